//! Sparse truncated Fock states.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::Matrix2;
use smallvec::{smallvec, SmallVec};

use crate::error::{SimError, SimResult};
use crate::fock::layout::{ModeIndex, ModeLayout, Polarization};
use crate::fock::unitary::ModeUnitary;
use crate::qubit::DensityMatrix;
use crate::C64;

/// Occupation vector: photon count per mode, in layout order.
pub type Occupation = SmallVec<[u8; 12]>;

/// Amplitudes with squared magnitude below this bound are pruned after each
/// transformation; the removed weight accumulates in the state's discarded
/// weight diagnostic.
pub const AMPLITUDE_PRUNE_THRESHOLD: f64 = 1e-14;

pub(crate) const FACT: [f64; 21] = {
    let mut f = [1.0f64; 21];
    let mut i = 1usize;
    while i < 21 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// A pure state in the truncated multimode Fock space: a sparse map from
/// occupation vectors to complex amplitudes.
///
/// Value semantics: every operation returns a new state and leaves the input
/// untouched. `discarded_weight` accumulates the squared norm removed by
/// cutoff truncation and amplitude pruning, so downstream consumers can bound
/// the truncation error of derived quantities.
#[derive(Clone, Debug)]
pub struct FockState {
    layout: Arc<ModeLayout>,
    amps: BTreeMap<Occupation, C64>,
    discarded_weight: f64,
}

impl FockState {
    /// The vacuum state of a layout.
    pub fn vacuum(layout: ModeLayout) -> Self {
        let occ: Occupation = smallvec![0u8; layout.len()];
        let mut amps = BTreeMap::new();
        amps.insert(occ, C64::new(1.0, 0.0));
        FockState { layout: Arc::new(layout), amps, discarded_weight: 0.0 }
    }

    /// Builds a state from explicit occupation/amplitude pairs.
    pub fn from_terms(layout: ModeLayout, terms: &[(Vec<u8>, C64)]) -> SimResult<Self> {
        let mut amps = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != layout.len() {
                return Err(SimError::InvalidParameter(format!(
                    "occupation length {} does not match layout size {}",
                    occ.len(),
                    layout.len()
                )));
            }
            let total: u32 = occ.iter().map(|&n| n as u32).sum();
            if total > layout.cutoff() {
                return Err(SimError::CutoffExceeded { total, cutoff: layout.cutoff() });
            }
            let key: Occupation = occ.iter().copied().collect();
            *amps.entry(key).or_insert(C64::new(0.0, 0.0)) += *amp;
        }
        Ok(FockState { layout: Arc::new(layout), amps, discarded_weight: 0.0 })
    }

    /// The layout this state lives on.
    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    /// Amplitude of one occupation vector (zero if absent).
    pub fn amplitude(&self, occ: &[u8]) -> C64 {
        let key: Occupation = occ.iter().copied().collect();
        self.amps.get(&key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Iterator over (occupation, amplitude) terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.amps.iter()
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.amps.len()
    }

    /// Squared norm Σ|amp|².
    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// True when the squared norm is 1 within `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Squared norm removed so far by truncation and pruning.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    /// Rescales to unit norm.
    pub fn normalized(mut self) -> SimResult<Self> {
        let n = self.norm();
        if n < 1e-150 {
            return Err(SimError::NotNormalized("cannot normalize a zero state".into()));
        }
        let inv = C64::new(1.0 / n, 0.0);
        for a in self.amps.values_mut() {
            *a *= inv;
        }
        Ok(self)
    }

    /// Multiplies every amplitude by a scalar.
    pub fn scaled(mut self, factor: C64) -> Self {
        for a in self.amps.values_mut() {
            *a *= factor;
        }
        self
    }

    /// Sum of two states on the same layout.
    pub fn add(&self, other: &FockState) -> SimResult<Self> {
        if *self.layout != *other.layout {
            return Err(SimError::InvalidParameter("cannot add states on different layouts".into()));
        }
        let mut out = self.clone();
        out.discarded_weight += other.discarded_weight;
        for (occ, amp) in &other.amps {
            *out.amps.entry(occ.clone()).or_insert(C64::new(0.0, 0.0)) += *amp;
        }
        Ok(out)
    }

    /// Total photon number of each term is identical for many states built
    /// here; this returns the (min, max) over stored terms.
    pub fn photon_number_range(&self) -> (u32, u32) {
        let mut lo = u32::MAX;
        let mut hi = 0;
        for occ in self.amps.keys() {
            let t: u32 = occ.iter().map(|&n| n as u32).sum();
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if lo == u32::MAX {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    /// Applies a creation operator `a†` on one mode: |…n…⟩ → √(n+1)|…n+1…⟩.
    ///
    /// Errors with [`SimError::CutoffExceeded`] if any term would pass the
    /// layout cutoff.
    pub fn apply_creation(&self, mode: ModeIndex) -> SimResult<Self> {
        let cutoff = self.layout.cutoff();
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let total: u32 = occ.iter().map(|&n| n as u32).sum();
            if total + 1 > cutoff {
                return Err(SimError::CutoffExceeded { total: total + 1, cutoff });
            }
            let mut out = occ.clone();
            let n = out[mode.0];
            out[mode.0] = n + 1;
            let factor = ((n as f64) + 1.0).sqrt();
            *amps.entry(out).or_insert(C64::new(0.0, 0.0)) += *amp * factor;
        }
        Ok(FockState { layout: Arc::clone(&self.layout), amps, discarded_weight: self.discarded_weight })
    }

    /// Removes terms whose amplitude magnitude squared is below `threshold`,
    /// adding the removed weight to the discarded-weight diagnostic.
    pub fn pruned(mut self, threshold: f64) -> Self {
        let mut removed = 0.0;
        self.amps.retain(|_, a| {
            let keep = a.norm_sqr() >= threshold;
            if !keep {
                removed += a.norm_sqr();
            }
            keep
        });
        self.discarded_weight += removed;
        self
    }

    /// Drops every term with total photon number above `max_total`, recording
    /// the removed weight.
    pub fn truncated_to_total(mut self, max_total: u32) -> Self {
        let mut removed = 0.0;
        self.amps.retain(|occ, a| {
            let t: u32 = occ.iter().map(|&n| n as u32).sum();
            let keep = t <= max_total;
            if !keep {
                removed += a.norm_sqr();
            }
            keep
        });
        self.discarded_weight += removed;
        self
    }

    /// Tensor product with a state on a disjoint layout.
    ///
    /// The combined layout is `self.layout ⧺ other.layout` with the larger of
    /// the two cutoffs; product terms above that cutoff are truncated into the
    /// discarded-weight diagnostic.
    pub fn tensor(&self, other: &FockState) -> SimResult<Self> {
        let layout = self.layout.join(other.layout())?;
        let cutoff = layout.cutoff();
        let mut amps = BTreeMap::new();
        let mut removed = 0.0;
        for (occ_a, amp_a) in &self.amps {
            let t_a: u32 = occ_a.iter().map(|&n| n as u32).sum();
            for (occ_b, amp_b) in &other.amps {
                let t_b: u32 = occ_b.iter().map(|&n| n as u32).sum();
                let amp = amp_a * amp_b;
                if t_a + t_b > cutoff {
                    removed += amp.norm_sqr();
                    continue;
                }
                let mut occ = occ_a.clone();
                occ.extend(occ_b.iter().copied());
                *amps.entry(occ).or_insert(C64::new(0.0, 0.0)) += amp;
            }
        }
        Ok(FockState {
            layout: Arc::new(layout),
            amps,
            discarded_weight: self.discarded_weight + other.discarded_weight + removed,
        })
    }

    /// Applies a Heisenberg-picture mode unitary `a_i† → Σ_j U_ji a_j†` over
    /// the unitary's target modes. Photon number is conserved, so no cutoff
    /// check is needed; tiny amplitudes are pruned afterwards.
    pub fn apply_mode_unitary(&self, u: &ModeUnitary) -> SimResult<Self> {
        let targets = u.targets();
        let k = targets.len();
        for &t in targets {
            if t.0 >= self.layout.len() {
                return Err(SimError::UnknownMode(format!("mode index {}", t.0)));
            }
        }
        let m = u.matrix();
        let mut amps: BTreeMap<Occupation, C64> = BTreeMap::new();

        // Composition scratch: distribution of each input mode's photons over
        // the k output modes.
        let mut p = vec![0u8; k];
        for (occ, amp) in &self.amps {
            let ns: Vec<u8> = targets.iter().map(|&t| occ[t.0]).collect();
            let denom: f64 = ns.iter().map(|&n| FACT[n as usize]).product::<f64>().sqrt();
            p.iter_mut().for_each(|x| *x = 0);
            distribute(
                0,
                &ns,
                m,
                k,
                C64::new(1.0, 0.0),
                &mut p,
                &mut |p_final: &[u8], coeff: C64| {
                    let mut out = occ.clone();
                    for (j, &t) in targets.iter().enumerate() {
                        out[t.0] = p_final[j];
                    }
                    let numer: f64 =
                        p_final.iter().map(|&n| FACT[n as usize]).product::<f64>().sqrt();
                    let contrib = *amp * coeff * (numer / denom);
                    *amps.entry(out).or_insert(C64::new(0.0, 0.0)) += contrib;
                },
            );
        }
        let out = FockState { layout: Arc::clone(&self.layout), amps, discarded_weight: self.discarded_weight };
        Ok(out.pruned(AMPLITUDE_PRUNE_THRESHOLD))
    }

    /// Projects the modes in `subset` onto a fixed occupation `pattern`.
    ///
    /// Returns the projection probability (squared norm of the matching part)
    /// and the normalized remainder state on the complement modes. A zero
    /// probability yields an empty remainder.
    pub fn project_occupation(
        &self,
        subset: &[ModeIndex],
        pattern: &[u8],
    ) -> SimResult<(f64, FockState)> {
        if subset.len() != pattern.len() {
            return Err(SimError::InvalidParameter(
                "projection pattern length does not match subset".into(),
            ));
        }
        for &s in subset {
            if s.0 >= self.layout.len() {
                return Err(SimError::UnknownMode(format!("mode index {}", s.0)));
            }
        }
        let complement = self.layout.complement(subset);
        let sub = self.layout.sublayout(&complement);
        let mut amps = BTreeMap::new();
        let mut prob = 0.0;
        for (occ, amp) in &self.amps {
            if subset.iter().zip(pattern).all(|(&s, &p)| occ[s.0] == p) {
                prob += amp.norm_sqr();
                let rest: Occupation = complement.iter().map(|&c| occ[c.0]).collect();
                *amps.entry(rest).or_insert(C64::new(0.0, 0.0)) += *amp;
            }
        }
        let mut remainder = FockState { layout: Arc::new(sub), amps, discarded_weight: 0.0 };
        if prob > 0.0 {
            remainder = remainder.normalized()?;
        }
        Ok((prob, remainder))
    }

    /// Enumerates every occupation pattern present on `subset`, returning
    /// `(pattern, probability, normalized remainder)` triples in canonical
    /// pattern order. Probabilities sum to the squared norm of the state.
    pub fn project_all(
        &self,
        subset: &[ModeIndex],
    ) -> SimResult<Vec<(Vec<u8>, f64, FockState)>> {
        for &s in subset {
            if s.0 >= self.layout.len() {
                return Err(SimError::UnknownMode(format!("mode index {}", s.0)));
            }
        }
        let complement = self.layout.complement(subset);
        let sub = self.layout.sublayout(&complement);
        let mut grouped: BTreeMap<Occupation, BTreeMap<Occupation, C64>> = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let key: Occupation = subset.iter().map(|&s| occ[s.0]).collect();
            let rest: Occupation = complement.iter().map(|&c| occ[c.0]).collect();
            *grouped.entry(key).or_default().entry(rest).or_insert(C64::new(0.0, 0.0)) += *amp;
        }
        let mut out = Vec::with_capacity(grouped.len());
        for (pattern, amps) in grouped {
            let prob: f64 = amps.values().map(|a| a.norm_sqr()).sum();
            if prob <= 0.0 {
                continue;
            }
            let remainder = FockState { layout: Arc::new(sub.clone()), amps, discarded_weight: 0.0 }
                .normalized()?;
            out.push((pattern.to_vec(), prob, remainder));
        }
        Ok(out)
    }

    /// Unnormalized reduced 2×2 block of a dual-rail spatial mode on its
    /// single-photon subspace, tracing out all other modes.
    ///
    /// Basis: index 0 = one H photon (logical |0⟩), index 1 = one V photon
    /// (logical |1⟩). The trace of the returned matrix is the joint weight of
    /// the single-photon subspace, i.e. the conditioning probability.
    pub fn qubit_block(&self, spatial: &str) -> SimResult<Matrix2<C64>> {
        let h = self.layout.mode(spatial, Polarization::H)?;
        let v = self.layout.mode(spatial, Polarization::V)?;
        let env: Vec<ModeIndex> = self.layout.complement(&[h, v]);
        let mut vectors: BTreeMap<Occupation, [C64; 2]> = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let logical = match (occ[h.0], occ[v.0]) {
                (1, 0) => 0usize,
                (0, 1) => 1usize,
                _ => continue,
            };
            let key: Occupation = env.iter().map(|&e| occ[e.0]).collect();
            let entry = vectors.entry(key).or_insert([C64::new(0.0, 0.0); 2]);
            entry[logical] += *amp;
        }
        let mut block = Matrix2::<C64>::zeros();
        for vec2 in vectors.values() {
            for r in 0..2 {
                for c in 0..2 {
                    block[(r, c)] += vec2[r] * vec2[c].conj();
                }
            }
        }
        Ok(block)
    }

    /// Reduces a dual-rail spatial mode to a qubit density matrix by
    /// conditioning on exactly one photon in the mode pair and tracing out
    /// everything else. Returns the density matrix and the conditioning
    /// probability.
    pub fn reduce_to_qubit(&self, spatial: &str) -> SimResult<(DensityMatrix, f64)> {
        let block = self.qubit_block(spatial)?;
        let prob = (block[(0, 0)] + block[(1, 1)]).re;
        if prob < 1e-150 {
            return Err(SimError::EmptySubspace(format!(
                "no single-photon weight on spatial mode {spatial}"
            )));
        }
        let rho = DensityMatrix::from_unnormalized(&block)?;
        Ok((rho, prob))
    }

    /// Mean photon number and ⟨n(n−1)⟩ of the total count over `modes`,
    /// computed on the normalized distribution.
    pub fn number_moments(&self, modes: &[ModeIndex]) -> (f64, f64) {
        let norm = self.norm_sqr();
        let mut mean = 0.0;
        let mut pair = 0.0;
        for (occ, amp) in &self.amps {
            let n: u32 = modes.iter().map(|&m| occ[m.0] as u32).sum();
            let w = amp.norm_sqr();
            mean += w * n as f64;
            pair += w * (n as f64) * (n as f64 - 1.0);
        }
        (mean / norm, pair / norm)
    }
}

/// Recursively distributes the photons of input mode `i` over the `k` output
/// modes, accumulating multinomial coefficients and matrix-element powers.
fn distribute(
    i: usize,
    ns: &[u8],
    m: &nalgebra::DMatrix<C64>,
    k: usize,
    coeff: C64,
    p: &mut [u8],
    emit: &mut impl FnMut(&[u8], C64),
) {
    if i == ns.len() {
        emit(p, coeff);
        return;
    }
    let n = ns[i] as usize;
    // Enumerate compositions (m_1, …, m_k) of n with the running product of
    // n!/(Πm_j!) · Π_j U[j][i]^{m_j}.
    let mut comp = vec![0usize; k];
    compose(0, n, k, &mut comp, &mut |c: &[usize]| {
        let mut factor = C64::new(FACT[n], 0.0);
        for (j, &mj) in c.iter().enumerate() {
            factor /= FACT[mj];
            for _ in 0..mj {
                factor *= m[(j, i)];
            }
        }
        if factor.norm_sqr() < 1e-60 {
            return;
        }
        for (j, &mj) in c.iter().enumerate() {
            p[j] += mj as u8;
        }
        distribute(i + 1, ns, m, k, coeff * factor, p, emit);
        for (j, &mj) in c.iter().enumerate() {
            p[j] -= mj as u8;
        }
    });
}

fn compose(j: usize, remaining: usize, k: usize, comp: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if j == k - 1 {
        comp[j] = remaining;
        emit(comp);
        return;
    }
    for take in 0..=remaining {
        comp[j] = take;
        compose(j + 1, remaining - take, k, comp, emit);
    }
}
