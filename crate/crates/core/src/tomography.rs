//! State and process tomography from Pauli-basis counts.
//!
//! State reconstruction is an iterative maximum-likelihood fixed point
//! (RρR with diluted damping) over the binomial likelihoods of the three
//! Pauli bases. Process reconstruction solves the linear probe system in the
//! Pauli operator basis and projects the result onto the physical
//! (Hermitian, PSD, trace-preserving) set. Error bars come from a parametric
//! bootstrap with Poissonian count resampling.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::linalg::{hermitian_eigen, hermitian_part, psd_clip, project_to_density};
use crate::qubit::{DensityMatrix, Pauli, QubitSpec};
use crate::C64;

/// Measured click totals of one Pauli-basis setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub basis: Pauli,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

/// Draws one binomial count record: p₊ = Tr[ρ·(I+σ)/2].
pub fn simulate_pauli_counts(
    rho: &DensityMatrix,
    basis: Pauli,
    shots: u64,
    seed: u64,
) -> SimResult<CountRecord> {
    if shots < 1 {
        return Err(SimError::InvalidParameter("shots must be at least 1".into()));
    }
    if basis == Pauli::I {
        return Err(SimError::InvalidParameter("measurement basis must be X, Y or Z".into()));
    }
    let p_plus = 0.5 * (1.0 + rho.expectation(&basis.matrix())).clamp(0.0, 2.0);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_plus = Binomial::new(shots, p_plus.min(1.0))
        .map_err(|e| SimError::InvalidParameter(e.to_string()))?
        .sample(&mut rng);
    Ok(CountRecord { basis, n_plus, n_minus: shots - n_plus })
}

/// Measurement-basis totals aggregated over records, indexed X, Y, Z.
fn aggregate(records: &[CountRecord]) -> SimResult<[(f64, f64); 3]> {
    let mut totals = [(0.0, 0.0); 3];
    for r in records {
        let i = match r.basis {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
            Pauli::I => {
                return Err(SimError::InvalidCounts("record in the identity basis".into()))
            }
        };
        totals[i].0 += r.n_plus as f64;
        totals[i].1 += r.n_minus as f64;
    }
    for (i, (p, m)) in totals.iter().enumerate() {
        if p + m < 1.0 {
            let basis = [Pauli::X, Pauli::Y, Pauli::Z][i];
            return Err(SimError::InvalidCounts(format!("no counts in the {basis} basis")));
        }
    }
    Ok(totals)
}

const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Log-likelihood of the aggregated binomial counts under ρ
/// (probabilities floored at 1e-12 to keep boundary states finite).
pub fn log_likelihood(rho: &DensityMatrix, records: &[CountRecord]) -> SimResult<f64> {
    let totals = aggregate(records)?;
    let mut ll = 0.0;
    for (i, &(n_plus, n_minus)) in totals.iter().enumerate() {
        let basis = [Pauli::X, Pauli::Y, Pauli::Z][i];
        let p = (0.5 * (1.0 + rho.expectation(&basis.matrix()))).clamp(LIKELIHOOD_FLOOR, 1.0);
        let q = (1.0 - p).max(LIKELIHOOD_FLOOR);
        ll += n_plus * p.ln() + n_minus * q.ln();
    }
    Ok(ll)
}

/// Direct Bloch-vector inversion of the frequencies, projected onto the
/// physical set. The likelihood baseline the MLE must beat.
pub fn linear_inversion(records: &[CountRecord]) -> SimResult<DensityMatrix> {
    let totals = aggregate(records)?;
    let mut m = Matrix2::<C64>::identity() * C64::new(0.5, 0.0);
    for (i, &(n_plus, n_minus)) in totals.iter().enumerate() {
        let basis = [Pauli::X, Pauli::Y, Pauli::Z][i];
        let r = (n_plus - n_minus) / (n_plus + n_minus);
        m += basis.matrix() * C64::new(0.5 * r, 0.0);
    }
    let projected = project_to_density(&to_dyn2(&m));
    DensityMatrix::try_new(from_dyn2(&projected))
}

const MLE_ITERATION_CAP: usize = 10_000;
const MLE_GAIN_TOLERANCE: f64 = 1e-10;

/// Maximum-likelihood state reconstruction from counts in all three Pauli
/// bases: iterates the RρR fixed point, diluting the step whenever a full
/// step would lower the likelihood.
pub fn mle_state_tomography(records: &[CountRecord]) -> SimResult<DensityMatrix> {
    let totals = aggregate(records)?;
    let shots: f64 = totals.iter().map(|(p, m)| p + m).sum();

    // R(ρ) = Σ_{b,s} (n_{b,s}/p_{b,s}) E_{b,s} / N with E = (I ± σ_b)/2.
    let r_operator = |rho: &Matrix2<C64>| -> Matrix2<C64> {
        let mut r = Matrix2::<C64>::zeros();
        for (i, &(n_plus, n_minus)) in totals.iter().enumerate() {
            let basis = [Pauli::X, Pauli::Y, Pauli::Z][i];
            let sigma = basis.matrix();
            let e_plus = (Matrix2::identity() + sigma) * C64::new(0.5, 0.0);
            let e_minus = (Matrix2::identity() - sigma) * C64::new(0.5, 0.0);
            let p = (e_plus * rho).trace().re.clamp(LIKELIHOOD_FLOOR, 1.0);
            let q = (e_minus * rho).trace().re.clamp(LIKELIHOOD_FLOOR, 1.0);
            r += e_plus * C64::new(n_plus / p / shots, 0.0);
            r += e_minus * C64::new(n_minus / q / shots, 0.0);
        }
        r
    };
    // Outcome probabilities (p₊, p₋) per basis, floored like the likelihood.
    let probs = |m: &Matrix2<C64>| -> [(f64, f64); 3] {
        let mut out = [(0.0, 0.0); 3];
        for (i, slot) in out.iter_mut().enumerate() {
            let basis = [Pauli::X, Pauli::Y, Pauli::Z][i];
            let p = (0.5 * ((Matrix2::identity() + basis.matrix()) * m).trace().re)
                .clamp(LIKELIHOOD_FLOOR, 1.0);
            *slot = (p, (1.0 - p).max(LIKELIHOOD_FLOOR));
        }
        out
    };
    // Likelihood gain computed from probability ratios: accurate to machine
    // precision where the difference of two absolute log-likelihoods
    // (magnitude ~N) would drown gains near the 1e-10 tolerance in rounding.
    let gain_of = |cur: &[(f64, f64); 3], next: &[(f64, f64); 3]| -> f64 {
        let mut gain = 0.0;
        for (i, &(n_plus, n_minus)) in totals.iter().enumerate() {
            gain += n_plus * (next[i].0 / cur[i].0).ln() + n_minus * (next[i].1 / cur[i].1).ln();
        }
        gain
    };

    // Bloch components of a Hermitian trace-1 matrix, and the inverse map.
    let bloch_of = |m: &Matrix2<C64>| -> [f64; 3] {
        [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
    };
    let state_of = |r: [f64; 3]| -> Matrix2<C64> {
        Matrix2::new(
            C64::new(1.0 + r[2], 0.0),
            C64::new(r[0], -r[1]),
            C64::new(r[0], r[1]),
            C64::new(1.0 - r[2], 0.0),
        ) * C64::new(0.5, 0.0)
    };

    // The unconstrained maximizer is the empirical Bloch point; when it lies
    // inside the closed ball it is the global physical maximum and is offered
    // as a candidate outright. When it lies outside, the maximum sits on the
    // sphere (rank-1), which plain RρR approaches only sublinearly — there a
    // rank-1 "snap" along the iterate's Bloch direction is offered instead.
    // Either candidate is taken only if it improves the likelihood, so the
    // iteration stays monotone.
    let empirical: [f64; 3] = {
        let mut r = [0.0; 3];
        for (i, &(p, m)) in totals.iter().enumerate() {
            r[i] = (p - m) / (p + m);
        }
        r
    };
    let empirical_len = empirical.iter().map(|x| x * x).sum::<f64>().sqrt();

    // Warm start: the projected linear inversion blended with the maximally
    // mixed state (conjugation steps preserve rank, so the start must be
    // full-rank).
    let baseline = linear_inversion(records)?;
    let mut rho =
        baseline.matrix() * C64::new(0.999, 0.0) + Matrix2::identity() * C64::new(0.0005, 0.0);
    let mut rho_probs = probs(&rho);
    let mut converged = false;
    let mut last_gain = f64::INFINITY;
    for _ in 0..MLE_ITERATION_CAP {
        let r = r_operator(&rho);
        // Candidates: full RρR step, the closed-form or snapped Bloch
        // candidate, and diluted steps (I+εR)ρ(I+εR)/tr over a halving ε
        // ladder. The largest likelihood gain wins.
        let mut candidates: Vec<Matrix2<C64>> = Vec::with_capacity(8);
        let full = r * rho * r;
        candidates.push(full / full.trace());
        if empirical_len < 1.0 {
            candidates.push(state_of(empirical));
        } else {
            let d = bloch_of(&rho);
            let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 1e-12 {
                candidates.push(state_of([d[0] / len, d[1] / len, d[2] / len]));
            }
        }
        for eps in [0.5, 0.125, 0.03125, 2.0_f64.powi(-8), 2.0_f64.powi(-12)] {
            let g = Matrix2::identity() + r * C64::new(eps, 0.0);
            let c = g * rho * g.adjoint();
            candidates.push(c / c.trace());
        }
        let mut best: Option<(Matrix2<C64>, [(f64, f64); 3], f64)> = None;
        for cand in candidates {
            let cand_probs = probs(&cand);
            let gain = gain_of(&rho_probs, &cand_probs);
            if best.as_ref().is_none_or(|(_, _, g)| gain > *g) {
                best = Some((cand, cand_probs, gain));
            }
        }
        let (next, next_probs, gain) = best.expect("candidate list is never empty");
        last_gain = gain;
        if gain < MLE_GAIN_TOLERANCE {
            // Also covers gain ≤ 0: no step of any size improves the
            // likelihood, so this is a fixed point.
            converged = true;
            break;
        }
        rho = next;
        rho_probs = next_probs;
    }
    if !converged {
        return Err(SimError::NoConvergence { iterations: MLE_ITERATION_CAP, last_gain });
    }
    let estimate = DensityMatrix::from_unnormalized(&rho)?;
    // Enforce the postcondition exactly: never return an estimate the
    // projected linear inversion beats.
    let improvement = gain_of(&probs(baseline.matrix()), &probs(estimate.matrix()));
    if improvement < 0.0 {
        return Ok(baseline);
    }
    Ok(estimate)
}

/// Point estimate with a bootstrap uncertainty.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FidelityEstimate {
    /// Fidelity of the MLE reconstruction against the target.
    pub fidelity: f64,
    /// Standard deviation over the bootstrap resamples.
    pub std_dev: f64,
    pub resamples: u32,
}

pub const DEFAULT_BOOTSTRAP_RESAMPLES: u32 = 250;

/// Parametric bootstrap: resamples every count as Poisson(n), reruns the MLE,
/// and reports the spread of the reconstructed fidelity against `target`.
pub fn bootstrap_fidelity(
    records: &[CountRecord],
    target: &QubitSpec,
    resamples: u32,
    seed: u64,
) -> SimResult<FidelityEstimate> {
    if resamples < 2 {
        return Err(SimError::InvalidParameter("need at least 2 bootstrap resamples".into()));
    }
    let point = mle_state_tomography(records)?.fidelity(target);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draw = |n: u64| -> SimResult<u64> {
        if n == 0 {
            return Ok(0);
        }
        let p = Poisson::new(n as f64).map_err(|e| SimError::InvalidParameter(e.to_string()))?;
        Ok(p.sample(&mut rng) as u64)
    };
    let mut fidelities = Vec::with_capacity(resamples as usize);
    for _ in 0..resamples {
        let mut resampled = Vec::with_capacity(records.len());
        for r in records {
            resampled.push(CountRecord {
                basis: r.basis,
                n_plus: draw(r.n_plus)?,
                n_minus: draw(r.n_minus)?,
            });
        }
        // A resample can zero out a basis; skip it rather than fail the run.
        match mle_state_tomography(&resampled) {
            Ok(rho) => fidelities.push(rho.fidelity(target)),
            Err(SimError::InvalidCounts(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if fidelities.len() < 2 {
        return Err(SimError::InvalidCounts(
            "all bootstrap resamples lost a measurement basis".into(),
        ));
    }
    let n = fidelities.len() as f64;
    let mean = fidelities.iter().sum::<f64>() / n;
    let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FidelityEstimate { fidelity: point, std_dev: var.sqrt(), resamples: fidelities.len() as u32 })
}

/// Process matrix χ in the Pauli operator basis {I, X, Y, Z}:
/// E(ρ) = Σ_jk χ_jk P_j ρ P_k.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    m: Matrix4<C64>,
}

const CHI_HERMITICITY_TOL: f64 = 1e-9;
const CHI_PSD_TOL: f64 = 1e-9;
const CHI_TRACE_PRESERVATION_TOL: f64 = 1e-6;

impl ChiMatrix {
    /// Validates Hermiticity, positive semidefiniteness, and the
    /// trace-preservation constraint Σ_jk χ_jk P_k P_j = I.
    pub fn try_new(m: &Matrix4<C64>) -> SimResult<Self> {
        let dev = (m - m.adjoint()).norm();
        if dev > CHI_HERMITICITY_TOL {
            return Err(SimError::NotPhysical(format!(
                "χ not Hermitian (deviation {dev:.2e})"
            )));
        }
        let (eigenvalues, _) = hermitian_eigen(&to_dyn4(m));
        if let Some(bad) = eigenvalues.iter().find(|&&e| e < -CHI_PSD_TOL) {
            return Err(SimError::NotPhysical(format!("χ has negative eigenvalue {bad:.2e}")));
        }
        let tp_dev = (trace_preservation_image(m) - Matrix2::identity()).norm();
        if tp_dev > CHI_TRACE_PRESERVATION_TOL {
            return Err(SimError::NotPhysical(format!(
                "χ violates trace preservation (deviation {tp_dev:.2e})"
            )));
        }
        Ok(ChiMatrix { m: hermitian_part4(m) })
    }

    /// χ of the identity channel: diag(1, 0, 0, 0).
    pub fn identity_channel() -> Self {
        Self::pauli_channel([1.0, 0.0, 0.0, 0.0]).expect("valid by construction")
    }

    /// Diagonal χ of the Pauli channel ρ ↦ Σ_j p_j P_j ρ P_j.
    pub fn pauli_channel(probabilities: [f64; 4]) -> SimResult<Self> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidParameter(
                "Pauli-channel probabilities must be nonnegative and sum to 1".into(),
            ));
        }
        let mut m = Matrix4::<C64>::zeros();
        for (j, &p) in probabilities.iter().enumerate() {
            m[(j, j)] = C64::new(p, 0.0);
        }
        Ok(ChiMatrix { m })
    }

    /// Rank-1 χ of the unitary conjugation channel ρ ↦ UρU†:
    /// χ_jk = a_j a̅_k with U = Σ_j a_j P_j.
    pub fn of_unitary(u: &Matrix2<C64>) -> SimResult<Self> {
        let dev = (u * u.adjoint() - Matrix2::identity()).norm();
        if dev > 1e-9 {
            return Err(SimError::NotUnitary { deviation: dev });
        }
        let a: Vec<C64> =
            Pauli::basis().iter().map(|p| (p.matrix() * u).trace() * 0.5).collect();
        let mut m = Matrix4::<C64>::zeros();
        for j in 0..4 {
            for k in 0..4 {
                m[(j, k)] = a[j] * a[k].conj();
            }
        }
        Ok(ChiMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.m[(j, k)]
    }

    /// Applies the channel to a state.
    pub fn apply(&self, rho: &DensityMatrix) -> SimResult<DensityMatrix> {
        let paulis = Pauli::basis();
        let mut out = Matrix2::<C64>::zeros();
        for j in 0..4 {
            for k in 0..4 {
                out += paulis[j].matrix() * rho.matrix() * paulis[k].matrix() * self.m[(j, k)];
            }
        }
        DensityMatrix::try_new(out)
    }
}

/// Σ_jk χ_jk P_k P_j — equals I exactly when the channel is trace-preserving.
fn trace_preservation_image(chi: &Matrix4<C64>) -> Matrix2<C64> {
    let paulis = Pauli::basis();
    let mut acc = Matrix2::<C64>::zeros();
    for j in 0..4 {
        for k in 0..4 {
            acc += paulis[k].matrix() * paulis[j].matrix() * chi[(j, k)];
        }
    }
    acc
}

/// Frobenius distance beyond which the projected χ is reported as
/// inconsistent with the probe data rather than silently returned.
const CHI_PROJECTION_TOLERANCE: f64 = 0.25;
const DYKSTRA_ITERATION_CAP: u32 = 2_000;

/// Process tomography from the four probe outputs, ordered as
/// [`QubitSpec::standard_probes`]: |0⟩, |1⟩, |+⟩, |+i⟩. Solves the linear
/// probe system for χ, then projects onto the Hermitian PSD
/// trace-preserving set (alternating projections with Dykstra correction).
pub fn process_tomography(outputs: &[DensityMatrix; 4]) -> SimResult<ChiMatrix> {
    let probes = QubitSpec::standard_probes();
    let paulis = Pauli::basis();

    // Row space: (probe, entry) → Σ_jk χ_jk [P_j ρ_i P_k]_{rc} = [O_i]_{rc}.
    let mut system = DMatrix::<C64>::zeros(16, 16);
    let mut target = DMatrix::<C64>::zeros(16, 1);
    for (i, (_, probe)) in probes.iter().enumerate() {
        let rho_in = probe.density();
        for r in 0..2 {
            for c in 0..2 {
                let row = i * 4 + r * 2 + c;
                for j in 0..4 {
                    for k in 0..4 {
                        let op = paulis[j].matrix() * rho_in.matrix() * paulis[k].matrix();
                        system[(row, j * 4 + k)] = op[(r, c)];
                    }
                }
                target[(row, 0)] = outputs[i].matrix()[(r, c)];
            }
        }
    }
    let solution = system
        .clone()
        .lu()
        .solve(&target)
        .or_else(|| {
            system
                .svd(true, true)
                .solve(&target, 1e-12)
                .ok()
        })
        .ok_or_else(|| SimError::NotPhysical("probe system is singular".into()))?;
    let mut chi = Matrix4::<C64>::zeros();
    for j in 0..4 {
        for k in 0..4 {
            chi[(j, k)] = solution[(j * 4 + k, 0)];
        }
    }
    let chi = hermitian_part4(&chi);

    // Dykstra's alternating projections onto PSD ∩ {trace-preserving}.
    let tp = TraceProjector::new();
    let mut x = chi;
    let mut p = Matrix4::<C64>::zeros();
    let mut q = Matrix4::<C64>::zeros();
    for _ in 0..DYKSTRA_ITERATION_CAP {
        let y = psd_clip4(&(x + p));
        p = x + p - y;
        let next = tp.project(&(y + q));
        q = y + q - next;
        let done = (next - x).norm() < 1e-13;
        x = next;
        if done {
            break;
        }
    }

    let distance = (x - chi).norm();
    if distance > CHI_PROJECTION_TOLERANCE {
        return Err(SimError::NotPhysical(format!(
            "probe outputs are {distance:.3} (Frobenius) away from any physical channel"
        )));
    }
    ChiMatrix::try_new(&x)
}

/// Process fidelity F_p = Tr(χ_exp χ_ideal), clipped to [0, 1].
/// The ideal must be a rank-1 (unitary-channel) χ.
pub fn process_fidelity(chi_exp: &ChiMatrix, chi_ideal: &ChiMatrix) -> SimResult<f64> {
    let (eigenvalues, _) = hermitian_eigen(&to_dyn4(chi_ideal.matrix()));
    let rank = eigenvalues.iter().filter(|&&e| e > 1e-9).count();
    if rank != 1 {
        return Err(SimError::InvalidParameter(format!(
            "ideal χ must be rank 1 (unitary target), got rank {rank}"
        )));
    }
    let f = (chi_exp.matrix() * chi_ideal.matrix()).trace();
    if f.im.abs() > 1e-9 {
        return Err(SimError::NotPhysical(format!(
            "process fidelity has imaginary part {:.2e}",
            f.im
        )));
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// Orthogonal projector onto the affine trace-preservation subspace
/// {χ : Σ_jk χ_jk P_k P_j = I}.
struct TraceProjector {
    /// Pseudo-inverse composition L†(LL†)⁻¹ of the constraint map L.
    correction: DMatrix<C64>,
    constraint: DMatrix<C64>,
}

impl TraceProjector {
    fn new() -> Self {
        let paulis = Pauli::basis();
        // L: vec(χ) → vec(Σ χ_jk P_k P_j), 4 rows, 16 columns.
        let mut l = DMatrix::<C64>::zeros(4, 16);
        for j in 0..4 {
            for k in 0..4 {
                let op = paulis[k].matrix() * paulis[j].matrix();
                for r in 0..2 {
                    for c in 0..2 {
                        l[(r * 2 + c, j * 4 + k)] = op[(r, c)];
                    }
                }
            }
        }
        let gram = &l * l.adjoint();
        let inv = gram.try_inverse().expect("LL† of the Pauli constraint map is invertible");
        TraceProjector { correction: l.adjoint() * inv, constraint: l }
    }

    fn project(&self, chi: &Matrix4<C64>) -> Matrix4<C64> {
        let mut v = DMatrix::<C64>::zeros(16, 1);
        for j in 0..4 {
            for k in 0..4 {
                v[(j * 4 + k, 0)] = chi[(j, k)];
            }
        }
        let mut residual = &self.constraint * &v;
        residual[(0, 0)] -= C64::new(1.0, 0.0);
        residual[(3, 0)] -= C64::new(1.0, 0.0);
        let corrected = v - &self.correction * residual;
        let mut out = Matrix4::<C64>::zeros();
        for j in 0..4 {
            for k in 0..4 {
                out[(j, k)] = corrected[(j * 4 + k, 0)];
            }
        }
        hermitian_part4(&out)
    }
}

fn to_dyn2(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

fn from_dyn2(m: &DMatrix<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|r, c| m[(r, c)])
}

fn to_dyn4(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
}

fn from_dyn4(m: &DMatrix<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| m[(r, c)])
}

fn hermitian_part4(m: &Matrix4<C64>) -> Matrix4<C64> {
    from_dyn4(&hermitian_part(&to_dyn4(m)))
}

fn psd_clip4(m: &Matrix4<C64>) -> Matrix4<C64> {
    from_dyn4(&psd_clip(&to_dyn4(m)))
}
