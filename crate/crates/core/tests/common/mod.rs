//! Test-side oracles implemented independently of the engine under test.
//!
//! The polynomial oracle applies mode unitaries by literal creation-operator
//! polynomial multiplication (no multinomial composition formulas); the click
//! oracle enumerates every detector-assignment sequence outright.
//!
//! Each integration-test binary compiles this module separately and uses a
//! subset of it.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Sparse polynomial in commuting creation-operator variables, keyed by the
/// exponent vector over all modes.
#[derive(Clone, Debug)]
pub struct Poly {
    pub terms: BTreeMap<Vec<u8>, C64>,
    n_modes: usize,
}

impl Poly {
    pub fn constant(n_modes: usize, c: C64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; n_modes], c);
        Poly { terms, n_modes }
    }

    /// The linear form Σ_j coeffs[j]·x_{modes[j]}.
    pub fn linear(n_modes: usize, parts: &[(usize, C64)]) -> Self {
        let mut terms = BTreeMap::new();
        for &(mode, c) in parts {
            let mut e = vec![0u8; n_modes];
            e[mode] = 1;
            let slot = terms.entry(e).or_insert(C64::new(0.0, 0.0));
            *slot += c;
        }
        Poly { terms, n_modes }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_modes, other.n_modes);
        let mut terms: BTreeMap<Vec<u8>, C64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += ca * cb;
            }
        }
        Poly { terms, n_modes: self.n_modes }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
    }
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Applies `u` (over `targets`, in matrix column order) to a state given as
/// (occupation, amplitude) terms, by expanding Π_i (Σ_j U_ji x_j)^{n_i} as a
/// literal polynomial product. Returns the exact output amplitudes.
pub fn polynomial_unitary_oracle(
    terms: &[(Vec<u8>, C64)],
    u: &DMatrix<C64>,
    targets: &[usize],
) -> BTreeMap<Vec<u8>, C64> {
    assert!(!terms.is_empty());
    let n_modes = terms[0].0.len();
    let mut acc = Poly { terms: BTreeMap::new(), n_modes };
    for (occ, amp) in terms {
        // Creation-operator polynomial coefficient of |occ⟩ is amp/√(Πn!).
        let norm: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
        let mut poly = Poly::constant(n_modes, amp / norm);
        for (i, &t) in targets.iter().enumerate() {
            let image: Vec<(usize, C64)> =
                targets.iter().enumerate().map(|(j, &tj)| (tj, u[(j, i)])).collect();
            let linear = Poly::linear(n_modes, &image);
            for _ in 0..occ[t] {
                poly = poly.mul(&linear);
            }
        }
        let untouched: Vec<u8> = (0..n_modes)
            .map(|m| if targets.contains(&m) { 0 } else { occ[m] })
            .collect();
        let mut passthrough = Poly { terms: BTreeMap::new(), n_modes };
        passthrough.terms.insert(untouched, C64::new(1.0, 0.0));
        acc.add_assign(&poly.mul(&passthrough));
    }
    // Monomial Π(a†)^p |vac⟩ = √(Πp!)·|p⟩.
    acc.terms
        .into_iter()
        .map(|(e, c)| {
            let norm: f64 = e.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            (e, c * norm)
        })
        .filter(|(_, c)| c.norm() > 1e-13)
        .collect()
}

/// P(k clicks | n photons, m detectors) by enumerating all mⁿ equally likely
/// assignment sequences and counting how many hit exactly k distinct
/// detectors.
pub fn click_distribution_bruteforce(n: u32, m: u32) -> Vec<f64> {
    assert!(m >= 1 && (m as u64).pow(n) <= 20_000_000);
    let mut counts = vec![0u64; n as usize + 1];
    let mut assignment = vec![0u32; n as usize];
    loop {
        let mut hit = vec![false; m as usize];
        for &a in &assignment {
            hit[a as usize] = true;
        }
        let k = hit.iter().filter(|&&h| h).count();
        counts[k] += 1;
        // Mixed-radix increment over the assignment digits.
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                let total = (m as u64).pow(n) as f64;
                return counts.into_iter().map(|c| c as f64 / total).collect();
            }
            assignment[pos] += 1;
            if assignment[pos] < m {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Click distribution with per-photon detection efficiency η: binomial
/// thinning composed with the assignment enumeration.
pub fn click_distribution_with_loss(n: u32, m: u32, eta: f64) -> Vec<f64> {
    let mut out = vec![0.0; n as usize + 1];
    for survivors in 0..=n {
        let choose = (0..survivors).fold(1.0, |acc, i| {
            acc * (n - i) as f64 / (i + 1) as f64
        });
        let weight = choose
            * eta.powi(survivors as i32)
            * (1.0 - eta).powi((n - survivors) as i32);
        for (k, p) in click_distribution_bruteforce(survivors, m).iter().enumerate() {
            out[k] += weight * p;
        }
    }
    out
}
