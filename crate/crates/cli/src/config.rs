//! Experiment configuration: a sectioned key-value file merged with
//! command-line overrides (flags win), validated before any computation and
//! hashed so that every artifact can state exactly what produced it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use telesim::detection::Fanout;
use telesim::protocol::{Scenario, ScenarioKind};
use telesim::qubit::QubitSpec;

use crate::CliError;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "TELESIM_OUTPUT_DIR";

/// Fully resolved experiment configuration. Serialization deliberately
/// excludes the output directory so that the config hash — and therefore
/// every artifact byte — depends only on what is being simulated, not on
/// where the files land.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Scenario kind: `sqt`, `bqt`, or `sqt_background`.
    pub scenario: String,
    /// Probe states to teleport, by name (`zero`, `one`, `plus`, `plus_i`).
    pub inputs: Vec<String>,
    /// Base squeezing parameter shared by the sources.
    pub lambda: f64,
    /// Per-source multipliers on the base squeezing parameter.
    pub bell_scale: f64,
    pub input_scale: f64,
    pub ancilla_scale: f64,
    /// Pair-expansion order kept per source.
    pub pair_cutoff: u32,
    /// Total-photon cutoff of the simulation.
    pub total_cutoff: u32,
    /// Detection efficiency of the Bell-measurement groups.
    pub efficiency: f64,
    /// Detection efficiency of the herald detector.
    pub herald_efficiency: f64,
    /// Detector fanout: `pnr` or `threshold:<m>`.
    pub fanout: String,
    /// Largest tolerated truncated amplitude mass.
    pub truncation_bound: f64,
    /// Protocol shots; 0 selects exact mode.
    pub shots: u64,
    /// Measurement shots per Pauli basis in sampled tomography.
    pub tomography_shots: u64,
    /// Bootstrap resamples behind every fidelity error bar.
    pub bootstrap_resamples: u32,
    /// Seed for every stochastic stage.
    pub seed: u64,
    /// Resolved output directory (not part of the hashed identity).
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "sqt".into(),
            inputs: vec!["zero".into(), "one".into(), "plus".into(), "plus_i".into()],
            lambda: 0.1,
            bell_scale: 1.0,
            input_scale: 1.0,
            ancilla_scale: 1.0,
            pair_cutoff: 3,
            total_cutoff: 8,
            efficiency: 1.0,
            herald_efficiency: 1.0,
            fanout: "threshold:8".into(),
            truncation_bound: 0.05,
            shots: 0,
            tomography_shots: 10_000,
            bootstrap_resamples: telesim::tomography::DEFAULT_BOOTSTRAP_RESAMPLES,
            seed: 7,
            out_dir: PathBuf::from("telesim-out"),
        }
    }
}

/// Sectioned on-disk form of the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scenario: Option<ScenarioSection>,
    sources: Option<SourcesSection>,
    detection: Option<DetectionSection>,
    sampling: Option<SamplingSection>,
    output: Option<OutputSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    kind: Option<String>,
    inputs: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourcesSection {
    lambda: Option<f64>,
    bell_scale: Option<f64>,
    input_scale: Option<f64>,
    ancilla_scale: Option<f64>,
    pair_cutoff: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionSection {
    efficiency: Option<f64>,
    herald_efficiency: Option<f64>,
    fanout: Option<String>,
    total_cutoff: Option<u32>,
    truncation_bound: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSection {
    shots: Option<u64>,
    tomography_shots: Option<u64>,
    bootstrap_resamples: Option<u32>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    directory: Option<String>,
}

/// Command-line overrides; every field beats the file when present.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub inputs: Option<Vec<String>>,
    pub lambda: Option<f64>,
    pub efficiency: Option<f64>,
    pub herald_efficiency: Option<f64>,
    pub fanout: Option<String>,
    pub total_cutoff: Option<u32>,
    pub pair_cutoff: Option<u32>,
    pub truncation_bound: Option<f64>,
    pub shots: Option<u64>,
    pub tomography_shots: Option<u64>,
    pub bootstrap_resamples: Option<u32>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// Force exact mode regardless of any configured shot count.
    pub exact: bool,
    /// Preset: single-pair sources, number-resolving detectors, no loss.
    pub ideal: bool,
}

impl ExperimentConfig {
    /// Builds the effective configuration: defaults, then the file, then the
    /// output-directory environment override, then flags.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.out_dir = PathBuf::from(dir);
            }
        }
        if overrides.ideal {
            cfg.pair_cutoff = 1;
            cfg.fanout = "pnr".into();
            cfg.efficiency = 1.0;
            cfg.herald_efficiency = 1.0;
        }
        cfg.apply_overrides(overrides);
        // Surface validation problems before any computation starts.
        cfg.to_scenario()?;
        cfg.probes()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        // A manifest echo is accepted wherever a config file is: rerunning
        // from the manifest alone reproduces the run.
        let file: FileConfig = if path.extension().is_some_and(|e| e == "json") {
            let echo = manifest_config(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let dir = self.out_dir.clone();
            *self = echo;
            self.out_dir = dir;
            return Ok(());
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let s = file.scenario.unwrap_or_default();
        if let Some(v) = s.kind {
            self.scenario = v;
        }
        if let Some(v) = s.inputs {
            self.inputs = v;
        }
        let s = file.sources.unwrap_or_default();
        if let Some(v) = s.lambda {
            self.lambda = v;
        }
        if let Some(v) = s.bell_scale {
            self.bell_scale = v;
        }
        if let Some(v) = s.input_scale {
            self.input_scale = v;
        }
        if let Some(v) = s.ancilla_scale {
            self.ancilla_scale = v;
        }
        if let Some(v) = s.pair_cutoff {
            self.pair_cutoff = v;
        }
        let s = file.detection.unwrap_or_default();
        if let Some(v) = s.efficiency {
            self.efficiency = v;
        }
        if let Some(v) = s.herald_efficiency {
            self.herald_efficiency = v;
        }
        if let Some(v) = s.fanout {
            self.fanout = v;
        }
        if let Some(v) = s.total_cutoff {
            self.total_cutoff = v;
        }
        if let Some(v) = s.truncation_bound {
            self.truncation_bound = v;
        }
        let s = file.sampling.unwrap_or_default();
        if let Some(v) = s.shots {
            self.shots = v;
        }
        if let Some(v) = s.tomography_shots {
            self.tomography_shots = v;
        }
        if let Some(v) = s.bootstrap_resamples {
            self.bootstrap_resamples = v;
        }
        if let Some(v) = s.seed {
            self.seed = v;
        }
        if let Some(dir) = file.output.unwrap_or_default().directory {
            self.out_dir = PathBuf::from(dir);
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(v) = &o.scenario {
            self.scenario = v.clone();
        }
        if let Some(v) = &o.inputs {
            self.inputs = v.clone();
        }
        if let Some(v) = o.lambda {
            self.lambda = v;
        }
        if let Some(v) = o.efficiency {
            self.efficiency = v;
        }
        if let Some(v) = o.herald_efficiency {
            self.herald_efficiency = v;
        }
        if let Some(v) = &o.fanout {
            self.fanout = v.clone();
        }
        if let Some(v) = o.total_cutoff {
            self.total_cutoff = v;
        }
        if let Some(v) = o.pair_cutoff {
            self.pair_cutoff = v;
        }
        if let Some(v) = o.truncation_bound {
            self.truncation_bound = v;
        }
        if let Some(v) = o.shots {
            self.shots = v;
        }
        if let Some(v) = o.tomography_shots {
            self.tomography_shots = v;
        }
        if let Some(v) = o.bootstrap_resamples {
            self.bootstrap_resamples = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.output_dir {
            self.out_dir = v.clone();
        }
        if o.exact {
            self.shots = 0;
        }
    }

    /// Translates the configuration into a validated protocol scenario.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let kind: ScenarioKind = self
            .scenario
            .parse()
            .map_err(|_| CliError::Config(format!("unknown scenario `{}`", self.scenario)))?;
        let mut s = Scenario::new(kind);
        s.lambda = self.lambda;
        s.bell_scale = self.bell_scale;
        s.input_scale = self.input_scale;
        s.ancilla_scale = self.ancilla_scale;
        s.pair_cutoff = self.pair_cutoff;
        s.total_cutoff = self.total_cutoff;
        s.fanout = parse_fanout(&self.fanout)?;
        s.efficiency = self.efficiency;
        s.herald_efficiency = self.herald_efficiency;
        s.truncation_bound = self.truncation_bound;
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }

    /// Resolves the configured probe names.
    pub fn probes(&self) -> Result<Vec<(String, QubitSpec)>, CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::Config("input-state list is empty".into()));
        }
        self.inputs
            .iter()
            .map(|name| Ok((name.clone(), probe_by_name(name)?)))
            .collect()
    }

    /// Content hash of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("flat config always serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Extracts the config echo from a manifest (or bare config) JSON document.
fn manifest_config(text: &str) -> Result<ExperimentConfig, serde_json::Error> {
    #[derive(Deserialize)]
    struct Envelope {
        config: ExperimentConfig,
    }
    serde_json::from_str::<Envelope>(text)
        .map(|e| e.config)
        .or_else(|_| serde_json::from_str::<ExperimentConfig>(text))
}

/// Parses `pnr` or `threshold:<m>` into a detector fanout.
pub fn parse_fanout(text: &str) -> Result<Fanout, CliError> {
    let t = text.trim().to_ascii_lowercase();
    if t == "pnr" || t == "number_resolving" {
        return Ok(Fanout::NumberResolving);
    }
    if let Some(m) = t.strip_prefix("threshold:") {
        let m: u32 = m
            .parse()
            .map_err(|_| CliError::Config(format!("bad fanout multiplicity in `{text}`")))?;
        if m == 0 {
            return Err(CliError::Config("fanout multiplicity must be at least 1".into()));
        }
        return Ok(Fanout::Threshold(m));
    }
    Err(CliError::Config(format!(
        "unknown fanout `{text}` (expected `pnr` or `threshold:<m>`)"
    )))
}

/// Looks up one of the standard probe states by name.
pub fn probe_by_name(name: &str) -> Result<QubitSpec, CliError> {
    QubitSpec::standard_probes()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, q)| q)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown input state `{name}` (expected zero, one, plus, or plus_i)"
            ))
        })
}

/// Inclusive λ range `start:end:points`, optionally prefixed `lambda=`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub end: f64,
    pub points: u32,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let body = text.trim().strip_prefix("lambda=").unwrap_or(text.trim());
        let parts: Vec<&str> = body.split(':').collect();
        let bad = || CliError::Config(format!("bad sweep `{text}` (expected lambda=a:b:n)"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].parse().map_err(|_| bad())?;
        let end: f64 = parts[1].parse().map_err(|_| bad())?;
        let points: u32 = parts[2].parse().map_err(|_| bad())?;
        if points < 2 {
            return Err(CliError::Config("sweep needs at least two points".into()));
        }
        if !(start.is_finite() && end.is_finite()) || start > end {
            return Err(CliError::Config(format!("bad sweep range {start}..{end}")));
        }
        Ok(SweepSpec { start, end, points })
    }

    /// The evenly spaced grid, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points as usize;
        (0..n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}
