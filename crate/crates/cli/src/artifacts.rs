//! Artifact writers: a provenance manifest plus machine-readable result
//! tables, all byte-stable for a fixed configuration and seed. Wall-clock
//! timing lives in a plain-text sidecar so that every JSON and CSV file
//! compares byte-identical across reruns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use telesim::bsm::OutcomeLabel;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Fixed row order of the outcome tables.
pub const LABEL_ORDER: [OutcomeLabel; 5] = [
    OutcomeLabel::PsiMinus,
    OutcomeLabel::PsiPlus,
    OutcomeLabel::PhiMinus,
    OutcomeLabel::PhiPlus,
    OutcomeLabel::Ambiguous,
];

/// Provenance record written exactly once per run, after the computation
/// finishes but before any result file is laid down.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    /// Which pipeline produced the artifacts (`run` or `sweep`).
    pub command: String,
    /// Echo of the resolved configuration; feeding this file back through
    /// `--config` reproduces the run.
    pub config: ExperimentConfig,
    /// Content hash of the configuration echo.
    pub config_hash: String,
    /// Convention hash of the classification table in force.
    pub table_hash: String,
    /// Success probability of that table over its derivation sector.
    pub table_success_probability: f64,
    /// Result files this manifest vouches for.
    pub artifacts: Vec<String>,
    /// Truncated amplitude mass per computation, all below the bound.
    pub truncation: Vec<TruncationNote>,
    /// Sidecar holding the (non-reproducible) wall-clock numbers.
    pub timing_file: String,
}

#[derive(Debug, Serialize)]
pub struct TruncationNote {
    pub label: String,
    pub truncated_weight: f64,
}

/// Per-scenario results, one entry per requested input state.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub table_hash: String,
    pub scenario: String,
    /// `exact` (amplitude-level analysis) or `sampled` (finite statistics).
    pub mode: String,
    pub inputs: Vec<InputSummary>,
}

#[derive(Debug, Serialize)]
pub struct InputSummary {
    pub input_state: String,
    /// Unambiguous share of the post-selected events.
    pub acceptance: Option<f64>,
    pub mean_unambiguous_fidelity: Option<f64>,
    /// Acceptance × mean unambiguous fidelity.
    pub quality: Option<f64>,
    pub invalid_probability: f64,
    pub postselected_probability: f64,
    pub truncated_weight: f64,
    pub outcomes: Vec<OutcomeSummary>,
}

#[derive(Debug, Serialize)]
pub struct OutcomeSummary {
    pub bsm_outcome: String,
    /// Exact event mass, or the observed share of shots in sampled mode.
    pub probability: f64,
    /// Raw event count (sampled mode only).
    pub counts: Option<u64>,
    /// Assigned Pauli correction; absent on the ambiguous branch.
    pub correction: Option<String>,
    /// Teleportation fidelity after correction; absent when undefined.
    pub fidelity: Option<f64>,
    /// Bootstrap standard deviation (sampled mode only).
    pub fidelity_err: Option<f64>,
}

/// A complex matrix in split real/imaginary form.
#[derive(Debug, Serialize)]
pub struct ComplexMatrix {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ChiOutcome {
    pub bsm_outcome: String,
    pub correction: Option<String>,
    /// Channel from the probe to the teleported state before correction.
    pub pre_correction: ComplexMatrix,
    /// Channel after the assigned correction is applied.
    pub corrected: ComplexMatrix,
    /// Process fidelity of `pre_correction` against the assigned Pauli.
    pub process_fidelity_vs_correction: Option<f64>,
    /// Process fidelity of `corrected` against the identity channel.
    pub process_fidelity_vs_identity: f64,
}

#[derive(Debug, Serialize)]
pub struct ChiReport {
    pub config_hash: String,
    pub table_hash: String,
    pub scenario: String,
    pub mode: String,
    /// How the χ matrices were estimated, for the record.
    pub estimation: String,
    pub outcomes: Vec<ChiOutcome>,
}

/// Result of a stand-alone state reconstruction from count records.
#[derive(Debug, Serialize)]
pub struct TomoReport {
    /// Content hash of the counts file the state was reconstructed from.
    pub counts_hash: String,
    pub records: usize,
    pub bloch: [f64; 3],
    pub matrix: ComplexMatrix,
    pub purity: f64,
    pub eigenvalues: [f64; 2],
    pub target: Option<String>,
    pub fidelity: Option<f64>,
    pub fidelity_std_dev: Option<f64>,
    pub bootstrap_resamples: Option<u32>,
}

/// One row of the brightness-sweep table.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub acceptance: Option<f64>,
    pub mean_unambiguous_fidelity: Option<f64>,
    /// Mass-weighted fidelity over the ψ± branches alone.
    pub psi_fidelity: Option<f64>,
    pub quality: Option<f64>,
    /// g²(0) of the heralded input-source signal arm.
    pub g2_heralded: Option<f64>,
    /// g²(0) of the unheralded (thermal) signal arm.
    pub g2_unheralded: Option<f64>,
}

/// Formats a float with full round-trip precision for CSV cells.
fn cell(x: f64) -> String {
    format!("{x:.15e}")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_else(|| "NA".into())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("encoding {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = dir.join("manifest.json");
    write_json(&path, manifest)?;
    Ok(path)
}

pub fn write_summary(dir: &Path, summary: &RunSummary) -> Result<PathBuf, CliError> {
    let path = dir.join("summary.json");
    write_json(&path, summary)?;
    Ok(path)
}

pub fn write_chi(dir: &Path, report: &ChiReport) -> Result<PathBuf, CliError> {
    let path = dir.join("chi_matrices.json");
    write_json(&path, report)?;
    Ok(path)
}

/// Fixed-column fidelity table, one row per (input, BSM outcome).
pub fn write_fidelity_csv(dir: &Path, summary: &RunSummary) -> Result<PathBuf, CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "# config_hash={}", summary.config_hash);
    let _ = writeln!(
        text,
        "scenario,input_state,bsm_outcome,probability,fidelity,fidelity_err,p_a,q"
    );
    for input in &summary.inputs {
        for outcome in &input.outcomes {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{}",
                summary.scenario,
                input.input_state,
                outcome.bsm_outcome,
                cell(outcome.probability),
                opt_cell(outcome.fidelity),
                opt_cell(outcome.fidelity_err),
                opt_cell(input.acceptance),
                opt_cell(input.quality),
            );
        }
    }
    let path = dir.join("fidelity_table.csv");
    write_file(&path, &text)?;
    Ok(path)
}

pub fn write_sweep_csv(
    dir: &Path,
    config_hash: &str,
    rows: &[SweepRow],
) -> Result<PathBuf, CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "# config_hash={config_hash}");
    let _ = writeln!(
        text,
        "lambda,p_a,mean_unambiguous_fidelity,psi_fidelity,q,g2_heralded,g2_unheralded"
    );
    for row in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            cell(row.lambda),
            opt_cell(row.acceptance),
            opt_cell(row.mean_unambiguous_fidelity),
            opt_cell(row.psi_fidelity),
            opt_cell(row.quality),
            opt_cell(row.g2_heralded),
            opt_cell(row.g2_unheralded),
        );
    }
    let path = dir.join("sweep.csv");
    write_file(&path, &text)?;
    Ok(path)
}

/// Wall-clock sidecar; excluded from the reproducibility surface.
pub fn write_timing(dir: &Path, phases: &[(&str, f64)]) -> Result<PathBuf, CliError> {
    let mut text = String::new();
    for (name, seconds) in phases {
        let _ = writeln!(text, "{name}_seconds={seconds:.6}");
    }
    let path = dir.join("timing.txt");
    write_file(&path, &text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_format_na_and_full_precision() {
        assert_eq!(cell(0.5), "5.000000000000000e-1");
        assert_eq!(opt_cell(None), "NA");
        assert_eq!(opt_cell(Some(1.0)), "1.000000000000000e0");
    }

    #[test]
    fn csv_embeds_hash_and_emits_fixed_columns() {
        let dir = tempfile::tempdir().unwrap();
        let summary = RunSummary {
            config_hash: "abc123".into(),
            table_hash: "t".into(),
            scenario: "sqt".into(),
            mode: "exact".into(),
            inputs: vec![InputSummary {
                input_state: "plus".into(),
                acceptance: Some(0.5),
                mean_unambiguous_fidelity: Some(1.0),
                quality: Some(0.5),
                invalid_probability: 0.0,
                postselected_probability: 0.25,
                truncated_weight: 0.0,
                outcomes: vec![OutcomeSummary {
                    bsm_outcome: "phi_plus".into(),
                    probability: 0.0,
                    counts: None,
                    correction: None,
                    fidelity: None,
                    fidelity_err: None,
                }],
            }],
        };
        let path = write_fidelity_csv(dir.path(), &summary).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# config_hash=abc123");
        assert_eq!(
            lines.next().unwrap(),
            "scenario,input_state,bsm_outcome,probability,fidelity,fidelity_err,p_a,q"
        );
        assert_eq!(
            lines.next().unwrap(),
            "sqt,plus,phi_plus,0.000000000000000e0,NA,NA,5.000000000000000e-1,5.000000000000000e-1"
        );
    }
}
