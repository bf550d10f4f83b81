//! Derivation, lookup and serialization of the click-pattern classification
//! table.
//!
//! The table is built by simulation: each ideal Bell state (tensored with the
//! exact two-photon ancilla for the boosted four-photon sector) is pushed
//! through the circuit and detected at unit efficiency. A pattern reachable
//! from exactly one Bell input is labeled with that input; reachable from two
//! or more, Ambiguous; unreachable patterns are Invalid at lookup time.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detection::{detect_exact, ClickPattern, Fanout};
use crate::error::{SimError, SimResult};
use crate::fock::{FockState, ModeLayout};
use crate::C64;

use super::{BellState, BsmCircuit, BsmKind, OutcomeLabel};

/// Which ideal photon-number sector the table classifies.
///
/// `TwoPhoton`: the Bell pair alone enters the circuit (standard operation,
/// or the boosted circuit when the ancilla emitted vacuum). `FourPhoton`: the
/// Bell pair plus the two-photon ancilla (boosted operation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableSector {
    TwoPhoton,
    FourPhoton,
}

impl fmt::Display for TableSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableSector::TwoPhoton => f.write_str("two_photon"),
            TableSector::FourPhoton => f.write_str("four_photon"),
        }
    }
}

/// Probabilities below this bound are treated as unreachable when labeling
/// patterns, absorbing floating-point noise without hiding genuine overlap.
const REACHABILITY_THRESHOLD: f64 = 1e-12;

const TABLE_SCHEMA: &str = "bsm-classification/v1";
const DERIVATION_CUTOFF: u32 = 4;

/// Click-pattern → outcome map with provenance metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationTable {
    kind: BsmKind,
    sector: TableSector,
    fanout: Fanout,
    group_names: Vec<String>,
    cutoff: u32,
    convention_hash: String,
    success_probability: f64,
    entries: BTreeMap<ClickPattern, OutcomeLabel>,
}

impl ClassificationTable {
    /// Derives the table for a circuit, sector and fanout model at unit
    /// detection efficiency.
    pub fn derive(circuit: &BsmCircuit, sector: TableSector, fanout: Fanout) -> SimResult<Self> {
        if sector == TableSector::FourPhoton && circuit.kind() != BsmKind::Boosted {
            return Err(SimError::InvalidParameter(
                "the four-photon sector requires the boosted circuit".into(),
            ));
        }
        let mut builder = ModeLayout::builder();
        for spatial in circuit.detected_spatials() {
            builder = builder.dual_rail(spatial);
        }
        let layout = builder.build(DERIVATION_CUTOFF)?;
        let bells = BellState::two_photon(&layout, &circuit.input, &circuit.bell_arm)?;
        let config = circuit.detector_config(&layout, fanout, 1.0)?;

        let mut reach: BTreeMap<ClickPattern, BTreeMap<BellState, f64>> = BTreeMap::new();
        for bell in BellState::all() {
            let mut input = bells[&bell].clone();
            if sector == TableSector::FourPhoton {
                input = with_two_photon_ancilla(&input, &layout, circuit)?;
            }
            let output = circuit.apply(&input)?;
            for outcome in detect_exact(&output, &config)? {
                if outcome.probability < REACHABILITY_THRESHOLD {
                    continue;
                }
                *reach
                    .entry(outcome.pattern)
                    .or_default()
                    .entry(bell)
                    .or_insert(0.0) += outcome.probability;
            }
        }

        let mut entries = BTreeMap::new();
        let mut success = 0.0;
        for (pattern, producers) in reach {
            let label = match producers.len() {
                1 => {
                    let (bell, prob) = producers.iter().next().unwrap();
                    success += 0.25 * prob;
                    OutcomeLabel::from_bell(*bell)
                }
                _ => OutcomeLabel::Ambiguous,
            };
            entries.insert(pattern, label);
        }

        let group_names: Vec<String> = circuit
            .detector_groups(&layout, fanout, 1.0)?
            .iter()
            .map(|g| layout.mode_name(g.mode))
            .collect();
        let hash = convention_hash(circuit.kind(), sector, fanout, &group_names);
        Ok(ClassificationTable {
            kind: circuit.kind(),
            sector,
            fanout,
            group_names,
            cutoff: DERIVATION_CUTOFF,
            convention_hash: hash,
            success_probability: success,
            entries,
        })
    }

    /// Looks a pattern up; patterns outside the table are Invalid. Errors if
    /// the pattern does not fit the table's geometry (group count or click
    /// counts beyond the fanout).
    pub fn classify(&self, pattern: &ClickPattern) -> SimResult<OutcomeLabel> {
        if pattern.0.len() != self.group_names.len() {
            return Err(SimError::PatternMismatch(format!(
                "pattern has {} groups, table expects {}",
                pattern.0.len(),
                self.group_names.len()
            )));
        }
        if let Fanout::Threshold(m) = self.fanout {
            if pattern.0.iter().any(|&c| c as u32 > m) {
                return Err(SimError::PatternMismatch(format!(
                    "click count exceeds fanout {m}"
                )));
            }
        }
        Ok(self.entries.get(pattern).copied().unwrap_or(OutcomeLabel::Invalid))
    }

    /// Probability that a uniformly random ideal Bell input produces a
    /// pattern labeled with that same input (the unambiguous fraction).
    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn kind(&self) -> BsmKind {
        self.kind
    }

    pub fn sector(&self) -> TableSector {
        self.sector
    }

    pub fn fanout(&self) -> Fanout {
        self.fanout
    }

    pub fn convention_hash(&self) -> &str {
        &self.convention_hash
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates entries in canonical pattern order.
    pub fn entries(&self) -> impl Iterator<Item = (&ClickPattern, &OutcomeLabel)> {
        self.entries.iter()
    }

    /// All patterns carrying a given label, in canonical order.
    pub fn patterns_with_label(&self, label: OutcomeLabel) -> Vec<&ClickPattern> {
        self.entries
            .iter()
            .filter(|(_, l)| **l == label)
            .map(|(p, _)| p)
            .collect()
    }

    /// Serializes the table (sorted entries plus provenance) as JSON.
    pub fn to_json_string(&self) -> SimResult<String> {
        let doc = TableDoc {
            schema: TABLE_SCHEMA.to_string(),
            kind: self.kind,
            sector: self.sector,
            fanout: self.fanout,
            group_names: self.group_names.clone(),
            cutoff: self.cutoff,
            convention_hash: self.convention_hash.clone(),
            success_probability: self.success_probability,
            entries: self
                .entries
                .iter()
                .map(|(p, l)| EntryDoc { pattern: p.0.clone(), label: *l })
                .collect(),
        };
        serde_json::to_string_pretty(&doc)
            .map_err(|e| SimError::TableFormat(format!("serialization failed: {e}")))
    }

    /// Parses and validates a JSON table document.
    pub fn from_json_str(json: &str) -> SimResult<Self> {
        let doc: TableDoc = serde_json::from_str(json)
            .map_err(|e| SimError::TableFormat(format!("parse failure: {e}")))?;
        if doc.schema != TABLE_SCHEMA {
            return Err(SimError::TableFormat(format!(
                "unsupported schema '{}', expected '{TABLE_SCHEMA}'",
                doc.schema
            )));
        }
        let mut entries = BTreeMap::new();
        for e in doc.entries {
            if e.pattern.len() != doc.group_names.len() {
                return Err(SimError::TableFormat(format!(
                    "entry pattern length {} does not match {} groups",
                    e.pattern.len(),
                    doc.group_names.len()
                )));
            }
            if let Fanout::Threshold(m) = doc.fanout {
                if e.pattern.iter().any(|&c| c as u32 > m) {
                    return Err(SimError::TableFormat("click count exceeds fanout".into()));
                }
            }
            if e.label == OutcomeLabel::Invalid {
                return Err(SimError::TableFormat(
                    "tables list reachable patterns only; Invalid is implicit".into(),
                ));
            }
            if entries.insert(ClickPattern(e.pattern), e.label).is_some() {
                return Err(SimError::TableFormat("duplicate pattern entry".into()));
            }
        }
        Ok(ClassificationTable {
            kind: doc.kind,
            sector: doc.sector,
            fanout: doc.fanout,
            group_names: doc.group_names,
            cutoff: doc.cutoff,
            convention_hash: doc.convention_hash,
            success_probability: doc.success_probability,
            entries,
        })
    }
}

/// Tensors the exact two-photon ancilla (|2_H⟩ − |2_V⟩)/√2 onto the ancilla
/// spatial mode of a state already living on the circuit's full layout.
fn with_two_photon_ancilla(
    state: &FockState,
    layout: &ModeLayout,
    circuit: &BsmCircuit,
) -> SimResult<FockState> {
    let anc = circuit
        .ancilla
        .as_deref()
        .ok_or_else(|| SimError::InvalidParameter("circuit has no ancilla mode".into()))?;
    let h = layout.mode(anc, crate::fock::Polarization::H)?;
    let v = layout.mode(anc, crate::fock::Polarization::V)?;
    let r = C64::new(1.0 / std::f64::consts::SQRT_2, 0.0);
    let mut terms: Vec<(Vec<u8>, C64)> = Vec::new();
    for (occ, amp) in state.terms() {
        let mut plus = occ.to_vec();
        plus[h.index()] += 2;
        terms.push((plus, amp * r));
        let mut minus = occ.to_vec();
        minus[v.index()] += 2;
        terms.push((minus, -amp * r));
    }
    FockState::from_terms(layout.clone(), &terms)
}

/// Hash over every sign/ordering convention that shapes the table, so a
/// table file from a different convention set is detectable.
fn convention_hash(
    kind: BsmKind,
    sector: TableSector,
    fanout: Fanout,
    group_names: &[String],
) -> String {
    let canon = format!(
        "splitter=[[sqrt(r),sqrt(1-r)],[sqrt(1-r),-sqrt(r)]];\
         heisenberg=a_i->sum_j U_ji a_j;\
         psi_minus=(HV'-VH')/sqrt2;psi_plus=(HV'+VH')/sqrt2;\
         phi_pm=(HH'+-VV')/sqrt2;ancilla=(2H-2V)/sqrt2;\
         kind={kind:?};sector={sector:?};fanout={fanout:?};\
         cutoff={DERIVATION_CUTOFF};groups={}",
        group_names.join(",")
    );
    let digest = Sha256::digest(canon.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    schema: String,
    kind: BsmKind,
    sector: TableSector,
    fanout: Fanout,
    group_names: Vec<String>,
    cutoff: u32,
    convention_hash: String,
    success_probability: f64,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    pattern: Vec<u8>,
    label: OutcomeLabel,
}
