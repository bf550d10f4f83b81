//! Pseudo-photon-number-resolving detection.
//!
//! Each detected mode feeds one detector group: an even 1×m fanout onto m
//! threshold detectors (or an idealized true number-resolving detector),
//! preceded by binomial loss with efficiency η. The group's observable is its
//! click count. Undetected modes must be declared explicitly; their
//! conditional states are returned alongside each click pattern so coherences
//! on the undetected part survive the measurement.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};
use crate::fock::{FockState, ModeIndex};

/// Detector multiplexing model for one group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fanout {
    /// Even 1×m split onto m threshold (click / no-click) detectors.
    Threshold(u32),
    /// Idealized number-resolving detector: click count equals photon count.
    /// Equivalent to the m → ∞ limit of `Threshold`.
    NumberResolving,
}

/// One detected mode: its fanout model and detection efficiency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorGroup {
    pub mode: ModeIndex,
    pub fanout: Fanout,
    pub efficiency: f64,
}

/// Full detector coverage of a layout: every mode is either detected by
/// exactly one group or explicitly kept (undetected).
#[derive(Clone, Debug)]
pub struct DetectorBankConfig {
    groups: Vec<DetectorGroup>,
    kept: Vec<ModeIndex>,
}

impl DetectorBankConfig {
    /// Validates efficiency ranges, fanout sizes, and exact disjoint coverage
    /// of `layout_len` modes by `groups` ∪ `kept`.
    pub fn new(
        groups: Vec<DetectorGroup>,
        kept: Vec<ModeIndex>,
        layout_len: usize,
    ) -> SimResult<Self> {
        let mut seen = vec![false; layout_len];
        let mut mark = |idx: ModeIndex| -> SimResult<()> {
            if idx.index() >= layout_len {
                return Err(SimError::UnknownMode(format!("mode index {}", idx.index())));
            }
            if seen[idx.index()] {
                return Err(SimError::DetectorCoverage(format!(
                    "mode index {} covered twice",
                    idx.index()
                )));
            }
            seen[idx.index()] = true;
            Ok(())
        };
        for g in &groups {
            if let Fanout::Threshold(m) = g.fanout {
                if m == 0 {
                    return Err(SimError::InvalidParameter("fanout must be at least 1".into()));
                }
            }
            if !(0.0..=1.0).contains(&g.efficiency) {
                return Err(SimError::InvalidParameter(format!(
                    "efficiency {} outside [0, 1]",
                    g.efficiency
                )));
            }
            mark(g.mode)?;
        }
        for &k in &kept {
            mark(k)?;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(SimError::DetectorCoverage(format!(
                "mode index {missing} neither detected nor kept"
            )));
        }
        Ok(DetectorBankConfig { groups, kept })
    }

    pub fn groups(&self) -> &[DetectorGroup] {
        &self.groups
    }

    pub fn kept(&self) -> &[ModeIndex] {
        &self.kept
    }

    fn detected_modes(&self) -> Vec<ModeIndex> {
        self.groups.iter().map(|g| g.mode).collect()
    }
}

/// Click counts per detector group, in group order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClickPattern(pub Vec<u8>);

impl ClickPattern {
    /// Total number of clicks across all groups.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&c| c as u32).sum()
    }
}

impl std::fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// One entry of the exact detection distribution: the click pattern, its
/// probability, and the conditional mixture of undetected-mode states that
/// accompanies it (weights sum to the probability).
#[derive(Clone, Debug)]
pub struct DetectionOutcome {
    pub pattern: ClickPattern,
    pub probability: f64,
    pub remainder: Vec<(f64, FockState)>,
}

const MAX_COUNT: usize = 64;

/// Stirling numbers of the second kind S(n, k): the number of ways to
/// partition n photons into k non-empty detector bins.
pub fn stirling2(n: u32, k: u32) -> f64 {
    let (n, k) = (n as usize, k as usize);
    if k > n {
        return 0.0;
    }
    if n == 0 {
        return 1.0; // S(0, 0)
    }
    if k == 0 {
        return 0.0;
    }
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0; // S(0, 0)
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Distribution of click counts when `n` photons enter an even 1×m fanout of
/// threshold detectors: P(k) = C(m,k)·k!·S(n,k)/mⁿ for k = 0..min(n,m).
///
/// For a number-resolving detector the click count equals n with certainty.
pub fn occupancy_click_distribution(n: u32, fanout: Fanout) -> SimResult<Vec<f64>> {
    if n as usize >= MAX_COUNT {
        return Err(SimError::InvalidParameter(format!(
            "photon count {n} beyond supported detection range"
        )));
    }
    match fanout {
        Fanout::NumberResolving => {
            let mut p = vec![0.0; n as usize + 1];
            p[n as usize] = 1.0;
            Ok(p)
        }
        Fanout::Threshold(m) => {
            if m == 0 {
                return Err(SimError::InvalidParameter("fanout must be at least 1".into()));
            }
            let kmax = n.min(m);
            let mn = (m as f64).powi(n as i32);
            let mut p = vec![0.0; kmax as usize + 1];
            let mut fact = 1.0;
            for k in 0..=kmax {
                if k > 0 {
                    fact *= k as f64;
                }
                p[k as usize] = binomial(m, k) * fact * stirling2(n, k) / mn;
            }
            Ok(p)
        }
    }
}

/// Click-count distribution of one group for `n` incident photons: binomial
/// loss at efficiency η followed by fanout occupancy statistics.
pub fn group_click_distribution(n: u32, group: &DetectorGroup) -> SimResult<Vec<f64>> {
    let eta = group.efficiency;
    let mut out = vec![0.0; n as usize + 1];
    for d in 0..=n {
        let p_detect = binomial(n, d) * eta.powi(d as i32) * (1.0 - eta).powi((n - d) as i32);
        if p_detect == 0.0 {
            continue;
        }
        for (k, pk) in occupancy_click_distribution(d, group.fanout)?.iter().enumerate() {
            out[k] += p_detect * pk;
        }
    }
    while out.len() > 1 && out.last() == Some(&0.0) {
        out.pop();
    }
    Ok(out)
}

/// Exact detection: the full distribution over click patterns, each carrying
/// the conditional mixture of states on the kept modes.
///
/// Probabilities sum to the squared norm of the input state. Patterns whose
/// probability falls below 1e-15 are dropped.
pub fn detect_exact(state: &FockState, config: &DetectorBankConfig) -> SimResult<Vec<DetectionOutcome>> {
    if config.groups.len() + config.kept.len() != state.layout().len() {
        return Err(SimError::DetectorCoverage(format!(
            "config covers {} modes, layout has {}",
            config.groups.len() + config.kept.len(),
            state.layout().len()
        )));
    }
    let detected = config.detected_modes();
    let occupations = state.project_all(&detected)?;

    struct Acc {
        probability: f64,
        remainder: Vec<(f64, FockState)>,
    }
    let mut by_pattern: BTreeMap<Vec<u8>, Acc> = BTreeMap::new();

    let mut click_dist: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (occ, prob, remainder) in occupations {
        // Per-group click distributions for this occupation, convolved into a
        // joint pattern distribution.
        click_dist.clear();
        click_dist.insert(Vec::new(), 1.0);
        for (g, group) in config.groups.iter().enumerate() {
            let dist = group_click_distribution(occ[g] as u32, group)?;
            let mut next: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
            for (prefix, w) in &click_dist {
                for (k, pk) in dist.iter().enumerate() {
                    if *pk == 0.0 {
                        continue;
                    }
                    let mut key = prefix.clone();
                    key.push(k as u8);
                    *next.entry(key).or_insert(0.0) += w * pk;
                }
            }
            click_dist = next;
        }
        for (pattern, w) in &click_dist {
            let weight = prob * w;
            if weight < 1e-15 {
                continue;
            }
            let acc = by_pattern
                .entry(pattern.clone())
                .or_insert(Acc { probability: 0.0, remainder: Vec::new() });
            acc.probability += weight;
            acc.remainder.push((weight, remainder.clone()));
        }
    }

    Ok(by_pattern
        .into_iter()
        .map(|(pattern, acc)| DetectionOutcome {
            pattern: ClickPattern(pattern),
            probability: acc.probability,
            remainder: acc.remainder,
        })
        .collect())
}

/// Samples one click pattern: draws an occupation from the state, thins each
/// group binomially at its efficiency, throws the surviving photons into the
/// fanout bins uniformly, and counts occupied bins. Deterministic per seed.
pub fn detect_sample(
    state: &FockState,
    config: &DetectorBankConfig,
    seed: u64,
) -> SimResult<ClickPattern> {
    if config.groups.len() + config.kept.len() != state.layout().len() {
        return Err(SimError::DetectorCoverage(format!(
            "config covers {} modes, layout has {}",
            config.groups.len() + config.kept.len(),
            state.layout().len()
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = state.norm_sqr();
    if norm <= 0.0 {
        return Err(SimError::EmptySubspace("cannot sample from a zero state".into()));
    }
    let mut draw = rng.gen_range(0.0..norm);
    let mut chosen = None;
    for (occ, amp) in state.terms() {
        let w = amp.norm_sqr();
        if draw < w {
            chosen = Some(occ.clone());
            break;
        }
        draw -= w;
    }
    let occ = chosen.ok_or_else(|| SimError::EmptySubspace("sampling fell off the state".into()))?;

    let mut clicks = Vec::with_capacity(config.groups.len());
    for group in &config.groups {
        let n = occ[group.mode.index()] as u32;
        let mut detected = 0u32;
        for _ in 0..n {
            if rng.gen_range(0.0..1.0) < group.efficiency {
                detected += 1;
            }
        }
        let k = match group.fanout {
            Fanout::NumberResolving => detected,
            Fanout::Threshold(m) => {
                let mut fired = vec![false; m as usize];
                for _ in 0..detected {
                    fired[rng.gen_range(0..m) as usize] = true;
                }
                fired.iter().filter(|&&f| f).count() as u32
            }
        };
        clicks.push(k as u8);
    }
    Ok(ClickPattern(clicks))
}
