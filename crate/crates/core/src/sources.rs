//! Photon-pair source models.
//!
//! All three resources are truncated squeezed-vacuum expansions with a common
//! squeezing amplitude λ:
//!
//! * Bell pair:      exp[λ(a_H†b_V† − a_V†b_H†)]|vac⟩ — the two-photon term
//!   is the singlet ψ⁻; 2n-photon terms carry weight ∝ (n+1)λ²ⁿ.
//! * heralded input: exp[λ s_H† i_H†]|vac⟩ with the signal polarization then
//!   rotated to α|H⟩ + β|V⟩; the idler arm is kept for heralding.
//! * ancilla:        exp[λ a_H†a_V†]|vac⟩ through a half-wave plate at π/8;
//!   the two-photon component is (|2_H⟩ − |2_V⟩)/√2.
//!
//! States are renormalized after truncation; the weight lost to the cutoff is
//! reported separately so callers can bound truncation error.

use crate::error::{SimError, SimResult};
use crate::fock::{hwp_on, polarization_prep, FockState, ModeIndex, ModeLayout, Polarization};
use crate::qubit::QubitSpec;
use crate::C64;

/// Squeezing amplitude and per-source pair-number cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceParams {
    lambda: f64,
    cutoff: u32,
}

impl SourceParams {
    /// Requires 0 ≤ λ < 1 and cutoff ≥ 1.
    pub fn new(lambda: f64, cutoff: u32) -> SimResult<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(SimError::InvalidParameter(format!(
                "squeezing amplitude λ = {lambda} outside [0, 1)"
            )));
        }
        if cutoff < 1 {
            return Err(SimError::InvalidParameter("pair cutoff must be at least 1".into()));
        }
        Ok(SourceParams { lambda, cutoff })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Same cutoff with the squeezing amplitude multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> SimResult<Self> {
        SourceParams::new(self.lambda * scale, self.cutoff)
    }
}

/// A normalized truncated source state together with the squared-norm weight
/// the truncation removed from the untruncated state.
#[derive(Clone, Debug)]
pub struct SourceState {
    pub state: FockState,
    pub truncated_weight: f64,
}

/// One pair-creation step: state ↦ Σ_k c_k · a†(m1_k) a†(m2_k) state.
fn apply_pair_operator(
    state: &FockState,
    terms: &[(C64, ModeIndex, ModeIndex)],
) -> SimResult<FockState> {
    let mut acc: Option<FockState> = None;
    for &(c, m1, m2) in terms {
        let part = state.apply_creation(m1)?.apply_creation(m2)?.scaled(c);
        acc = Some(match acc {
            None => part,
            Some(a) => a.add(&part)?,
        });
    }
    acc.ok_or_else(|| SimError::InvalidParameter("empty pair operator".into()))
}

/// Truncated expansion of exp[Σ_k c_k a†a†] |vac⟩ up to `max_pairs` pair
/// applications: Σ_n (1/n!) K^n |vac⟩.
fn squeezed_expansion(
    layout: ModeLayout,
    pair_terms: &[(C64, ModeIndex, ModeIndex)],
    max_pairs: u32,
) -> SimResult<FockState> {
    let mut total = FockState::vacuum(layout);
    let mut term = total.clone();
    for n in 0..max_pairs {
        term = apply_pair_operator(&term, pair_terms)?
            .scaled(C64::new(1.0 / (n as f64 + 1.0), 0.0));
        if term.norm_sqr() < crate::fock::AMPLITUDE_PRUNE_THRESHOLD {
            break;
        }
        total = total.add(&term)?;
    }
    Ok(total.pruned(crate::fock::AMPLITUDE_PRUNE_THRESHOLD))
}

fn effective_pairs(params: &SourceParams, total_cutoff: u32, photons_per_pair: u32) -> u32 {
    params.cutoff.min(total_cutoff / photons_per_pair)
}

/// Polarization-entangled pair source on two dual-rail spatial modes.
///
/// Returns the normalized truncation of exp[λ(a_H†b_V† − a_V†b_H†)]|vac⟩; the
/// two-photon term is exactly |ψ⁻⟩.
pub fn bell_pair_state(
    params: &SourceParams,
    spatial_a: &str,
    spatial_b: &str,
    total_cutoff: u32,
) -> SimResult<SourceState> {
    let layout = ModeLayout::builder()
        .dual_rail(spatial_a)
        .dual_rail(spatial_b)
        .build(total_cutoff)?;
    let ah = layout.mode(spatial_a, Polarization::H)?;
    let av = layout.mode(spatial_a, Polarization::V)?;
    let bh = layout.mode(spatial_b, Polarization::H)?;
    let bv = layout.mode(spatial_b, Polarization::V)?;
    let l = C64::new(params.lambda, 0.0);
    let pairs = effective_pairs(params, total_cutoff, 2);
    let raw = squeezed_expansion(layout, &[(l, ah, bv), (-l, av, bh)], pairs)?;
    // ‖exp[λ(a_H†b_V† − a_V†b_H†)]|vac⟩‖² = 1/(1−λ²)².
    let analytic = 1.0 / ((1.0 - params.lambda * params.lambda).powi(2));
    finish(raw, analytic)
}

/// Heralded single-photon input: two-mode squeezed vacuum between the signal
/// and idler arms, with the signal polarization prepared to the requested
/// qubit. The idler is a single H-polarized mode used only for heralding.
pub fn heralded_input_state(
    q: &QubitSpec,
    params: &SourceParams,
    spatial_signal: &str,
    spatial_idler: &str,
    total_cutoff: u32,
) -> SimResult<SourceState> {
    let layout = ModeLayout::builder()
        .dual_rail(spatial_signal)
        .single(spatial_idler, Polarization::H)
        .build(total_cutoff)?;
    let sh = layout.mode(spatial_signal, Polarization::H)?;
    let sv = layout.mode(spatial_signal, Polarization::V)?;
    let ih = layout.mode(spatial_idler, Polarization::H)?;
    let l = C64::new(params.lambda, 0.0);
    let pairs = effective_pairs(params, total_cutoff, 2);
    let raw = squeezed_expansion(layout, &[(l, sh, ih)], pairs)?;
    let prep = polarization_prep(q.alpha(), q.beta(), sh, sv)?;
    let raw = raw.apply_mode_unitary(&prep)?;
    // ‖exp[λ s†i†]|vac⟩‖² = 1/(1−λ²).
    let analytic = 1.0 / (1.0 - params.lambda * params.lambda);
    finish(raw, analytic)
}

/// Two-photon ancilla: collinear pair source exp[λ a_H†a_V†]|vac⟩ rotated by
/// a half-wave plate at π/8. The two-photon component is (|2_H⟩ − |2_V⟩)/√2.
pub fn ancilla_state(
    params: &SourceParams,
    spatial: &str,
    total_cutoff: u32,
) -> SimResult<SourceState> {
    let raw = ancilla_before_waveplate(params, spatial, total_cutoff)?;
    let plate = hwp_on(raw.layout(), std::f64::consts::FRAC_PI_8, spatial)?;
    let raw = raw.apply_mode_unitary(&plate)?;
    let analytic = 1.0 / (1.0 - params.lambda * params.lambda);
    finish(raw, analytic)
}

fn ancilla_before_waveplate(
    params: &SourceParams,
    spatial: &str,
    total_cutoff: u32,
) -> SimResult<FockState> {
    let layout = ModeLayout::builder().dual_rail(spatial).build(total_cutoff)?;
    let h = layout.mode(spatial, Polarization::H)?;
    let v = layout.mode(spatial, Polarization::V)?;
    let l = C64::new(params.lambda, 0.0);
    let pairs = effective_pairs(params, total_cutoff, 2);
    squeezed_expansion(layout, &[(l, h, v)], pairs)
}

fn finish(raw: FockState, analytic_norm_sqr: f64) -> SimResult<SourceState> {
    let captured = raw.norm_sqr();
    let truncated_weight = (1.0 - captured / analytic_norm_sqr).max(0.0);
    Ok(SourceState { state: raw.normalized()?, truncated_weight })
}

/// Second-order correlation g²(0) = ⟨n(n−1)⟩ / ⟨n⟩² of the total photon
/// number over a mode group.
pub fn g2_zero(state: &FockState, modes: &[ModeIndex]) -> SimResult<f64> {
    let (mean, pair) = state.number_moments(modes);
    if mean <= 0.0 {
        return Err(SimError::EmptySubspace(
            "g²(0) undefined: zero mean photon number on the group".into(),
        ));
    }
    Ok(pair / (mean * mean))
}

/// Pair expansion depth used for the asymptotic g² diagnostics; deep enough
/// that the truncation error is far below 1e-9 for λ ≤ 0.5.
const G2_EXPANSION_PAIRS: u32 = 24;

/// Unheralded signal-arm g²(0) of the two-mode squeezed input source.
///
/// The marginal is thermal, so this is 2 for every λ > 0; computed on a
/// dedicated deep expansion so the value is flat to numerical precision
/// rather than polluted by the protocol-level photon cutoff.
pub fn unheralded_g2(lambda: f64) -> SimResult<f64> {
    let (state, sh, _ih) = deep_two_mode_squeezed(lambda)?;
    g2_zero(&state, &[sh])
}

/// Signal-arm g²(0) conditioned on at least one idler photon (a herald
/// click). Rises from 0 like 2λ² as the pump strength grows.
pub fn heralded_g2(lambda: f64) -> SimResult<f64> {
    let (state, sh, ih) = deep_two_mode_squeezed(lambda)?;
    let mut mean = 0.0;
    let mut pair = 0.0;
    let mut norm = 0.0;
    for (occ, amp) in state.terms() {
        if occ[ih.index()] == 0 {
            continue;
        }
        let n = occ[sh.index()] as f64;
        let w = amp.norm_sqr();
        norm += w;
        mean += w * n;
        pair += w * n * (n - 1.0);
    }
    if norm <= 0.0 || mean <= 0.0 {
        return Err(SimError::EmptySubspace(
            "heralded g²(0) undefined: no heralded events at λ = 0".into(),
        ));
    }
    mean /= norm;
    pair /= norm;
    Ok(pair / (mean * mean))
}

fn deep_two_mode_squeezed(lambda: f64) -> SimResult<(FockState, ModeIndex, ModeIndex)> {
    SourceParams::new(lambda, G2_EXPANSION_PAIRS)?;
    let layout = ModeLayout::builder()
        .single("sig", Polarization::H)
        .single("idl", Polarization::H)
        .build(2 * G2_EXPANSION_PAIRS)?;
    let sh = layout.mode("sig", Polarization::H)?;
    let ih = layout.mode("idl", Polarization::H)?;
    // The photon-number ladder of exp[λ s†i†]|vac⟩ is Σ λⁿ |n, n⟩ exactly;
    // building it directly keeps the deep tail free of expansion pruning.
    let terms: Vec<(Vec<u8>, C64)> = (0..=G2_EXPANSION_PAIRS)
        .map(|n| (vec![n as u8, n as u8], C64::new(lambda.powi(n as i32), 0.0)))
        .collect();
    let raw = FockState::from_terms(layout, &terms)?;
    Ok((raw.normalized()?, sh, ih))
}

/// HOM-style visibility of the two-photon ancilla.
///
/// Scans the preparation half-wave plate over `angle_grid`, records the H/V
/// coincidence probability at each angle, and returns
/// (max CC − min CC) / max CC. The ideal state gives 1: coincidences are
/// maximal at θ = 0 and vanish exactly at θ = π/8.
pub fn ancilla_visibility(params: &SourceParams, angle_grid: &[f64]) -> SimResult<f64> {
    ancilla_visibility_with_admixture(params, angle_grid, 0.0)
}

/// Visibility with a polarization-isotropic two-photon admixture of weight
/// `epsilon`: the admixed component contributes an angle-independent
/// coincidence floor of one third of the maximum, pulling the visibility
/// below 1. A generic imperfection knob, not a microscopic source model.
pub fn ancilla_visibility_with_admixture(
    params: &SourceParams,
    angle_grid: &[f64],
    epsilon: f64,
) -> SimResult<f64> {
    if angle_grid.is_empty() {
        return Err(SimError::InvalidParameter("visibility scan needs a non-empty grid".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(SimError::InvalidParameter(format!(
            "admixture weight {epsilon} outside [0, 1]"
        )));
    }
    let total_cutoff = 2 * params.cutoff;
    let raw = ancilla_before_waveplate(params, "anc", total_cutoff)?.normalized()?;
    let h = raw.layout().mode("anc", Polarization::H)?;
    let v = raw.layout().mode("anc", Polarization::V)?;
    let mut ccs = Vec::with_capacity(angle_grid.len());
    for &theta in angle_grid {
        let plate = hwp_on(raw.layout(), theta, "anc")?;
        let rotated = raw.apply_mode_unitary(&plate)?;
        let cc: f64 = rotated
            .terms()
            .filter(|(occ, _)| occ[h.index()] >= 1 && occ[v.index()] >= 1)
            .map(|(_, amp)| amp.norm_sqr())
            .sum();
        ccs.push(cc);
    }
    let max_pure = ccs.iter().cloned().fold(f64::MIN, f64::max);
    let min_pure = ccs.iter().cloned().fold(f64::MAX, f64::min);
    // Isotropic two-photon coincidence floor: a uniform mixture over the
    // three-dimensional symmetric polarization subspace has CC = max/3.
    let floor = epsilon * max_pure / 3.0;
    let max_cc = (1.0 - epsilon) * max_pure + floor;
    let min_cc = (1.0 - epsilon) * min_pure + floor;
    if max_cc <= 0.0 {
        return Err(SimError::EmptySubspace(
            "visibility undefined: no coincidences anywhere on the grid".into(),
        ));
    }
    Ok((max_cc - min_cc) / max_cc)
}
