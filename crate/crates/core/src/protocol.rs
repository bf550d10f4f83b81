//! End-to-end teleportation scenarios.
//!
//! Pipeline: source states → tensor into the joint register → BSM splitter
//! network → exact detection of the BSM ports and the herald arm → coincidence
//! post-selection → click-pattern classification → receiver-side Pauli
//! correction → reduction of the receiver arm to a qubit.
//!
//! Post-selection mirrors the coincidence logic of the experiment: exactly
//! one herald click, the scenario's BSM click total (2 for standard
//! operation, 4 for boosted), and exactly one photon in the receiver arm.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bsm::{
    acceptance_probability, BsmCircuit, ClassificationTable, CorrectionTable, OutcomeLabel,
    TableSector,
};
use crate::detection::{detect_exact, ClickPattern, DetectorBankConfig, Fanout};
use crate::error::{SimError, SimResult};
use crate::fock::FockState;
use crate::qubit::{DensityMatrix, PauliWord, QubitSpec};
use crate::sources::{ancilla_state, bell_pair_state, heralded_input_state, SourceParams};
use crate::C64;

/// The three experimental configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Standard teleportation: one splitter, ancilla source blocked,
    /// post-selection on 2 BSM clicks.
    Sqt,
    /// Boosted teleportation: two splitters with the two-photon ancilla,
    /// post-selection on 4 BSM clicks.
    Bqt,
    /// Standard-style analysis inside the boosted setup: the ancilla source
    /// still emits, but events are post-selected on 2 BSM clicks.
    SqtBackground,
}

impl ScenarioKind {
    pub fn all() -> [ScenarioKind; 3] {
        [ScenarioKind::Sqt, ScenarioKind::Bqt, ScenarioKind::SqtBackground]
    }

    /// BSM click total the scenario post-selects on.
    pub fn bsm_click_total(&self) -> u32 {
        match self {
            ScenarioKind::Sqt | ScenarioKind::SqtBackground => 2,
            ScenarioKind::Bqt => 4,
        }
    }

    /// Whether the scenario runs on the boosted (six-group) topology.
    pub fn uses_boosted_circuit(&self) -> bool {
        !matches!(self, ScenarioKind::Sqt)
    }

    /// Photon-number sector the classification table is derived over.
    pub fn table_sector(&self) -> TableSector {
        match self {
            ScenarioKind::Bqt => TableSector::FourPhoton,
            _ => TableSector::TwoPhoton,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioKind::Sqt => "sqt",
            ScenarioKind::Bqt => "bqt",
            ScenarioKind::SqtBackground => "sqt_background",
        };
        f.write_str(s)
    }
}

impl FromStr for ScenarioKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sqt" => Ok(ScenarioKind::Sqt),
            "bqt" => Ok(ScenarioKind::Bqt),
            "sqt_background" => Ok(ScenarioKind::SqtBackground),
            other => Err(SimError::InvalidParameter(format!(
                "unknown scenario '{other}' (expected sqt, bqt or sqt_background)"
            ))),
        }
    }
}

/// Full parameter set for one teleportation run.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Global squeezing amplitude; per-source values are λ·scale.
    pub lambda: f64,
    pub bell_scale: f64,
    pub input_scale: f64,
    pub ancilla_scale: f64,
    /// Per-source maximum pair number in the squeezed expansions.
    pub pair_cutoff: u32,
    /// Global total-photon cutoff of the joint register.
    pub total_cutoff: u32,
    /// Fanout model of the BSM detector banks.
    pub fanout: Fanout,
    /// Detection efficiency of every BSM group.
    pub efficiency: f64,
    /// Detection efficiency of the herald detector.
    pub herald_efficiency: f64,
    /// Upper bound on the acceptable total truncated weight.
    pub truncation_bound: f64,
}

impl Scenario {
    /// Realistic defaults: λ = 0.1, pair cutoff 3, total cutoff 8,
    /// 1×8 threshold fanout, unit efficiencies.
    pub fn new(kind: ScenarioKind) -> Self {
        Scenario {
            kind,
            lambda: 0.1,
            bell_scale: 1.0,
            input_scale: 1.0,
            ancilla_scale: 1.0,
            pair_cutoff: 3,
            total_cutoff: 8,
            fanout: Fanout::Threshold(8),
            efficiency: 1.0,
            herald_efficiency: 1.0,
            truncation_bound: 0.05,
        }
    }

    /// Idealized configuration: single-pair sources and number-resolving
    /// detection, which makes the acceptance probability exactly the
    /// classification table's success probability.
    pub fn ideal(kind: ScenarioKind) -> Self {
        Scenario {
            pair_cutoff: 1,
            fanout: Fanout::NumberResolving,
            ..Scenario::new(kind)
        }
    }

    pub fn validate(&self) -> SimResult<()> {
        for (name, scale) in [
            ("bell", self.bell_scale),
            ("input", self.input_scale),
            ("ancilla", self.ancilla_scale),
        ] {
            if scale < 0.0 {
                return Err(SimError::InvalidParameter(format!(
                    "{name} source scale must be nonnegative"
                )));
            }
            let l = self.lambda * scale;
            if !(0.0..1.0).contains(&l) {
                return Err(SimError::InvalidParameter(format!(
                    "effective {name} squeezing {l} outside [0, 1)"
                )));
            }
        }
        if self.pair_cutoff < 1 {
            return Err(SimError::InvalidParameter("pair cutoff must be at least 1".into()));
        }
        let needed = 2 + self.kind.bsm_click_total();
        if self.total_cutoff < needed {
            return Err(SimError::InvalidParameter(format!(
                "total cutoff {} below the {needed}-photon coincidence this scenario post-selects",
                self.total_cutoff
            )));
        }
        for eta in [self.efficiency, self.herald_efficiency] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(SimError::InvalidParameter(format!(
                    "efficiency {eta} outside [0, 1]"
                )));
            }
        }
        if self.truncation_bound <= 0.0 {
            return Err(SimError::InvalidParameter("truncation bound must be positive".into()));
        }
        Ok(())
    }
}

/// One classified outcome branch of the exact run.
#[derive(Clone, Debug)]
pub struct OutcomeReport {
    pub label: OutcomeLabel,
    /// Absolute probability of (post-selection ∧ this label ∧ one receiver
    /// photon), relative to the untruncated source emission.
    pub probability: f64,
    pub pre_correction: DensityMatrix,
    /// The applied correction; `None` on the ambiguous branch, which is
    /// reported uncorrected.
    pub correction: Option<PauliWord>,
    pub corrected: DensityMatrix,
    pub fidelity: f64,
}

/// Aggregated result of an exact teleportation run.
#[derive(Clone, Debug)]
pub struct TeleportationReport {
    pub kind: ScenarioKind,
    pub outcomes: Vec<OutcomeReport>,
    /// Post-selected mass classified Invalid (excluded from acceptance).
    pub invalid_probability: f64,
    /// Total post-selected mass (unambiguous + ambiguous + invalid).
    pub postselected_probability: f64,
    pub acceptance: Option<f64>,
    pub mean_unambiguous_fidelity: Option<f64>,
    pub quality: Option<f64>,
    /// Total squared-norm weight lost to cutoffs across the pipeline.
    pub truncated_weight: f64,
    /// Convention marker: the gate applied on the ambiguous branch.
    pub ambiguous_correction: PauliWord,
}

impl TeleportationReport {
    pub fn outcome(&self, label: OutcomeLabel) -> Option<&OutcomeReport> {
        self.outcomes.iter().find(|o| o.label == label)
    }
}

/// Teleportation fidelity F = ⟨ψ_in|ρ|ψ_in⟩.
pub fn teleport_fidelity(rho: &DensityMatrix, input: &QubitSpec) -> f64 {
    rho.fidelity(input)
}

/// Quality metric q = p_a · F̄_T.
pub fn quality(p_a: f64, mean_fidelity: f64) -> SimResult<f64> {
    for (name, v) in [("acceptance probability", p_a), ("mean fidelity", mean_fidelity)] {
        if !(0.0..=1.0 + 1e-12).contains(&v) {
            return Err(SimError::InvalidParameter(format!("{name} {v} outside [0, 1]")));
        }
    }
    Ok(p_a * mean_fidelity)
}

/// Precomputed machinery for one scenario: circuit, classification table and
/// correction table are λ-independent, so sweeps reuse the engine.
pub struct ScenarioEngine {
    scenario: Scenario,
    circuit: BsmCircuit,
    table: ClassificationTable,
    corrections: CorrectionTable,
}

impl ScenarioEngine {
    pub fn new(scenario: Scenario) -> SimResult<Self> {
        scenario.validate()?;
        let circuit = if scenario.kind.uses_boosted_circuit() {
            BsmCircuit::boosted("in", "ba", "anc")
        } else {
            BsmCircuit::standard("in", "ba")
        };
        let table =
            ClassificationTable::derive(&circuit, scenario.kind.table_sector(), scenario.fanout)?;
        let corrections = CorrectionTable::derive()?;
        Ok(ScenarioEngine { scenario, circuit, table, corrections })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &ClassificationTable {
        &self.table
    }

    pub fn corrections(&self) -> &CorrectionTable {
        &self.corrections
    }

    /// Replaces the squeezing amplitude, keeping the derived tables.
    pub fn with_lambda(&self, lambda: f64) -> SimResult<Self> {
        let mut scenario = self.scenario.clone();
        scenario.lambda = lambda;
        scenario.validate()?;
        Ok(ScenarioEngine {
            scenario,
            circuit: self.circuit.clone(),
            table: self.table.clone(),
            corrections: self.corrections.clone(),
        })
    }

    /// Builds the joint source state and the detector coverage for it.
    fn prepare(&self, input: &QubitSpec) -> SimResult<(FockState, DetectorBankConfig, f64)> {
        let s = &self.scenario;
        let cutoff = s.total_cutoff;
        let input_params = SourceParams::new(s.lambda * s.input_scale, s.pair_cutoff)?;
        let bell_params = SourceParams::new(s.lambda * s.bell_scale, s.pair_cutoff)?;

        let input_src = heralded_input_state(input, &input_params, "in", "idl", cutoff)?;
        let bell_src = bell_pair_state(&bell_params, "ba", "bb", cutoff)?;
        let mut truncated = input_src.truncated_weight + bell_src.truncated_weight;
        let mut joint = input_src.state.tensor(&bell_src.state)?;
        if s.kind.uses_boosted_circuit() {
            let anc_params = SourceParams::new(s.lambda * s.ancilla_scale, s.pair_cutoff)?;
            let anc_src = ancilla_state(&anc_params, "anc", cutoff)?;
            truncated += anc_src.truncated_weight;
            joint = joint.tensor(&anc_src.state)?;
        }

        let layout = joint.layout().clone();
        let mut groups = self.circuit.detector_groups(&layout, s.fanout, s.efficiency)?;
        groups.push(crate::detection::DetectorGroup {
            mode: layout.mode("idl", crate::fock::Polarization::H)?,
            fanout: Fanout::Threshold(1),
            efficiency: s.herald_efficiency,
        });
        let detected: Vec<_> = groups.iter().map(|g| g.mode).collect();
        let kept = layout.complement(&detected);
        let config = DetectorBankConfig::new(groups, kept, layout.len())?;
        Ok((joint, config, truncated))
    }

    /// Exact run: full conditional analysis of every post-selected outcome.
    pub fn run_exact(&self, input: &QubitSpec) -> SimResult<TeleportationReport> {
        let (joint, config, mut truncated) = self.prepare(input)?;
        let output = self.circuit.apply(&joint)?;
        truncated += output.discarded_weight();
        if truncated > self.scenario.truncation_bound {
            return Err(SimError::TruncationExceeded {
                weight: truncated,
                bound: self.scenario.truncation_bound,
            });
        }

        let n_bsm_groups = config.groups().len() - 1;
        let required_clicks = self.scenario.kind.bsm_click_total();

        struct Branch {
            mass: f64,
            block: Matrix2<C64>,
        }
        let mut branches: BTreeMap<OutcomeLabel, Branch> = BTreeMap::new();
        let mut invalid_mass = 0.0;

        for outcome in detect_exact(&output, &config)? {
            let herald = outcome.pattern.0[n_bsm_groups];
            if herald != 1 {
                continue;
            }
            let bsm_pattern = ClickPattern(outcome.pattern.0[..n_bsm_groups].to_vec());
            if bsm_pattern.total() != required_clicks {
                continue;
            }
            // Receiver-arm single-photon conditioning: per remainder
            // component, take the unnormalized qubit block; its trace is the
            // single-photon weight.
            let mut block = Matrix2::<C64>::zeros();
            for (w, rem) in &outcome.remainder {
                let b = rem.qubit_block("bb")?;
                block += b * C64::new(*w, 0.0);
            }
            let mass = (block[(0, 0)] + block[(1, 1)]).re;
            if mass <= 1e-15 {
                continue;
            }
            let label = self.table.classify(&bsm_pattern)?;
            if label == OutcomeLabel::Invalid {
                invalid_mass += mass;
                continue;
            }
            let e = branches
                .entry(label)
                .or_insert(Branch { mass: 0.0, block: Matrix2::zeros() });
            e.mass += mass;
            e.block += block;
        }

        let mut outcomes = Vec::new();
        let mut accepted_mass = 0.0;
        let mut ambiguous_mass = 0.0;
        let mut fidelity_mass = 0.0;
        for (label, branch) in &branches {
            let pre = DensityMatrix::from_unnormalized(&branch.block)?;
            let correction = match label {
                OutcomeLabel::Ambiguous => None,
                l => Some(self.corrections.correction_for(*l)?),
            };
            let corrected = match correction {
                Some(p) => pre.conjugated_by(&p.unitary()),
                None => pre.clone(),
            };
            let fidelity = teleport_fidelity(&corrected, input);
            if label.is_unambiguous() {
                accepted_mass += branch.mass;
                fidelity_mass += branch.mass * fidelity;
            } else {
                ambiguous_mass += branch.mass;
            }
            outcomes.push(OutcomeReport {
                label: *label,
                probability: branch.mass,
                pre_correction: pre,
                correction,
                corrected,
                fidelity,
            });
        }

        let acceptance = if accepted_mass + ambiguous_mass > 0.0 {
            Some(acceptance_probability(accepted_mass, ambiguous_mass)?)
        } else {
            None
        };
        let mean_unambiguous_fidelity =
            if accepted_mass > 0.0 { Some(fidelity_mass / accepted_mass) } else { None };
        let quality_metric = match (acceptance, mean_unambiguous_fidelity) {
            (Some(p), Some(f)) => Some(quality(p, f)?),
            _ => None,
        };

        Ok(TeleportationReport {
            kind: self.scenario.kind,
            outcomes,
            invalid_probability: invalid_mass,
            postselected_probability: accepted_mass + ambiguous_mass + invalid_mass,
            acceptance,
            mean_unambiguous_fidelity,
            quality: quality_metric,
            truncated_weight: truncated,
            ambiguous_correction: PauliWord::I,
        })
    }

    /// Monte Carlo run: draws coincidence events from the exact distribution.
    /// Returns the event-level record alongside the exact report the draws
    /// were taken from.
    pub fn run_sampled(
        &self,
        input: &QubitSpec,
        shots: u64,
        seed: u64,
    ) -> SimResult<(SampledReport, TeleportationReport)> {
        if shots < 1 {
            return Err(SimError::InvalidParameter("shots must be at least 1".into()));
        }
        let report = self.run_exact(input)?;
        // Categorical distribution: each post-selected label, invalid, and
        // the rejected remainder.
        let mut labels: Vec<OutcomeLabel> = report.outcomes.iter().map(|o| o.label).collect();
        let mut masses: Vec<f64> = report.outcomes.iter().map(|o| o.probability).collect();
        labels.push(OutcomeLabel::Invalid);
        masses.push(report.invalid_probability);
        let total_mass: f64 = 1.0 - report.truncated_weight;
        let rejected_mass = (total_mass - report.postselected_probability).max(0.0);

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut events = Vec::with_capacity(shots as usize);
        let mut counts: BTreeMap<OutcomeLabel, u64> = BTreeMap::new();
        let mut rejected = 0u64;
        for _ in 0..shots {
            let mut draw = rng.gen_range(0.0..total_mass);
            let mut picked = None;
            for (label, mass) in labels.iter().zip(&masses) {
                if draw < *mass {
                    picked = Some(*label);
                    break;
                }
                draw -= mass;
            }
            match picked {
                Some(label) => {
                    *counts.entry(label).or_insert(0) += 1;
                    events.push(ShotOutcome::Postselected(label));
                }
                None => {
                    rejected += 1;
                    events.push(ShotOutcome::Rejected);
                }
            }
        }
        let _ = rejected_mass;

        let accepted: u64 = counts
            .iter()
            .filter(|(l, _)| l.is_unambiguous())
            .map(|(_, c)| *c)
            .sum();
        let ambiguous = *counts.get(&OutcomeLabel::Ambiguous).unwrap_or(&0);
        let acceptance = if accepted + ambiguous > 0 {
            Some(acceptance_probability(accepted as f64, ambiguous as f64)?)
        } else {
            None
        };
        Ok((
            SampledReport { shots, events, counts, rejected, acceptance },
            report,
        ))
    }
}

/// Outcome of one Monte Carlo shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShotOutcome {
    /// Failed coincidence post-selection.
    Rejected,
    /// Post-selected and classified.
    Postselected(OutcomeLabel),
}

/// Event-level record of a sampled run.
#[derive(Clone, Debug)]
pub struct SampledReport {
    pub shots: u64,
    pub events: Vec<ShotOutcome>,
    pub counts: BTreeMap<OutcomeLabel, u64>,
    pub rejected: u64,
    pub acceptance: Option<f64>,
}

/// Convenience wrapper: builds the engine and runs once.
pub fn run_teleportation_exact(
    input: &QubitSpec,
    scenario: &Scenario,
) -> SimResult<TeleportationReport> {
    ScenarioEngine::new(scenario.clone())?.run_exact(input)
}

/// Convenience wrapper for sampled runs.
pub fn run_teleportation_sampled(
    input: &QubitSpec,
    scenario: &Scenario,
    shots: u64,
    seed: u64,
) -> SimResult<(SampledReport, TeleportationReport)> {
    ScenarioEngine::new(scenario.clone())?.run_sampled(input, shots, seed)
}
