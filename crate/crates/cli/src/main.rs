//! Configuration-driven front end for the teleportation simulator: runs
//! scenarios, brightness sweeps, classification-table exports, and state
//! reconstruction from count files, writing machine-readable reports.

mod artifacts;
mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use telesim::bsm::{BsmCircuit, ClassificationTable, OutcomeLabel};
use telesim::protocol::{ScenarioEngine, ScenarioKind, TeleportationReport};
use telesim::qubit::{DensityMatrix, Pauli, QubitSpec};
use telesim::sources::{heralded_g2, unheralded_g2};
use telesim::tomography::{
    bootstrap_fidelity, mle_state_tomography, process_fidelity, process_tomography,
    simulate_pauli_counts, ChiMatrix, CountRecord, DEFAULT_BOOTSTRAP_RESAMPLES,
};
use telesim::SimError;
use thiserror::Error;

use artifacts::{
    write_chi, write_fidelity_csv, write_manifest, write_summary, write_sweep_csv, write_timing,
    ChiOutcome, ChiReport, ComplexMatrix, InputSummary, OutcomeSummary, RunManifest, RunSummary,
    SweepRow, TomoReport, TruncationNote, LABEL_ORDER,
};
use config::{parse_fanout, probe_by_name, ExperimentConfig, Overrides, SweepSpec};

/// Errors surfaced to the shell; each class maps to its own exit code so
/// scripts can tell a bad configuration (2) from a numerical diagnostic (3)
/// from an I/O failure (4).
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration file, the flags, or their merge is unusable.
    #[error("configuration: {0}")]
    Config(String),
    /// A module reported a diagnostic above its configured bound.
    #[error("numerical diagnostic: {0}")]
    Numerical(SimError),
    /// Reading inputs or writing artifacts failed.
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn numerical(e: SimError) -> CliError {
    CliError::Numerical(e)
}

#[derive(Parser)]
#[command(
    name = "telesim",
    version,
    about = "Exact simulator of linear-optical quantum teleportation with a boosted Bell-state measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifact set
    Run(RunArgs),
    /// Sweep the source brightness and write the trend table
    Sweep(SweepArgs),
    /// Inspect or export a Bell-measurement classification table
    Table(TableArgs),
    /// Reconstruct a qubit state from a file of measured counts
    Tomo(TomoArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Configuration file (sectioned key-value; a manifest JSON also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario kind: sqt, bqt, or sqt_background
    #[arg(long)]
    scenario: Option<String>,
    /// Base squeezing parameter of the sources
    #[arg(long)]
    lambda: Option<f64>,
    /// Detection efficiency of the Bell-measurement groups
    #[arg(long)]
    efficiency: Option<f64>,
    /// Detection efficiency of the herald detector
    #[arg(long)]
    herald_efficiency: Option<f64>,
    /// Detector fanout: pnr or threshold:<m>
    #[arg(long)]
    fanout: Option<String>,
    /// Total-photon cutoff of the simulation
    #[arg(long)]
    total_cutoff: Option<u32>,
    /// Pair-expansion order kept per source
    #[arg(long)]
    pair_cutoff: Option<u32>,
    /// Largest tolerated truncated amplitude mass
    #[arg(long)]
    truncation_bound: Option<f64>,
    /// Protocol shots; 0 selects exact mode
    #[arg(long)]
    shots: Option<u64>,
    /// Measurement shots per Pauli basis in sampled tomography
    #[arg(long)]
    tomography_shots: Option<u64>,
    /// Bootstrap resamples behind each error bar
    #[arg(long)]
    bootstrap_resamples: Option<u32>,
    /// Seed for every stochastic stage
    #[arg(long)]
    seed: Option<u64>,
    /// Probe state to teleport (repeatable): zero, one, plus, plus_i
    #[arg(long = "input")]
    inputs: Vec<String>,
    /// Directory receiving the artifact files
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Force exact mode regardless of the configured shot count
    #[arg(long)]
    exact: bool,
    /// Ideal preset: single-pair sources, number resolution, no loss
    #[arg(long)]
    ideal: bool,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario.clone(),
            inputs: if self.inputs.is_empty() { None } else { Some(self.inputs.clone()) },
            lambda: self.lambda,
            efficiency: self.efficiency,
            herald_efficiency: self.herald_efficiency,
            fanout: self.fanout.clone(),
            total_cutoff: self.total_cutoff,
            pair_cutoff: self.pair_cutoff,
            truncation_bound: self.truncation_bound,
            shots: self.shots,
            tomography_shots: self.tomography_shots,
            bootstrap_resamples: self.bootstrap_resamples,
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            exact: self.exact,
            ideal: self.ideal,
        }
    }

    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::resolve(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run a brightness sweep instead: lambda=<start>:<end>:<points>
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// λ grid <start>:<end>:<points>
    #[arg(long)]
    lambda_range: String,
}

#[derive(Args)]
struct TableArgs {
    /// Scenario whose table to derive: sqt, bqt, or sqt_background
    #[arg(long)]
    scenario: String,
    /// Detector fanout: pnr or threshold:<m>
    #[arg(long, default_value = "threshold:8")]
    fanout: String,
    /// Photon-number sector override: two or four
    #[arg(long)]
    sector: Option<String>,
    /// Write the full table as JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TomoArgs {
    /// Counts file: CSV (basis,n_plus,n_minus) or a JSON array of the same
    #[arg(long)]
    counts: PathBuf,
    /// Compare against a standard probe state: zero, one, plus, plus_i
    #[arg(long)]
    target: Option<String>,
    /// Bootstrap resamples behind the fidelity error bar
    #[arg(long)]
    resamples: Option<u32>,
    /// Seed for the bootstrap
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the reconstruction report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => match &args.sweep {
            Some(spec) => {
                let spec = match SweepSpec::parse(spec) {
                    Ok(s) => s,
                    Err(e) => return fail(e),
                };
                args.common.resolve().and_then(|cfg| sweep_command(cfg, spec))
            }
            None => args.common.resolve().and_then(run_command),
        },
        Command::Sweep(args) => match SweepSpec::parse(&args.lambda_range) {
            Ok(spec) => args.common.resolve().and_then(|cfg| sweep_command(cfg, spec)),
            Err(e) => return fail(e),
        },
        Command::Table(args) => table_command(args),
        Command::Tomo(args) => tomo_command(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

/// Derives a stream-specific seed from the run seed and a label path.
fn subseed(seed: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for part in parts {
        hasher.update([0x1f]);
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

fn complex_matrix<F>(n: usize, entry: F) -> ComplexMatrix
where
    F: Fn(usize, usize) -> telesim::C64,
{
    let real = (0..n).map(|r| (0..n).map(|c| entry(r, c).re).collect()).collect();
    let imag = (0..n).map(|r| (0..n).map(|c| entry(r, c).im).collect()).collect();
    ComplexMatrix { real, imag }
}

fn display_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into())
}

/// Measurement records for one state: X, Y, Z bases with a derived seed each.
fn simulate_records(
    state: &DensityMatrix,
    shots: u64,
    seed: u64,
    path: &[&str],
) -> Result<Vec<CountRecord>, CliError> {
    Pauli::measurement_axes()
        .iter()
        .map(|basis| {
            let mut parts: Vec<&str> = path.to_vec();
            let name = match basis {
                Pauli::X => "X",
                Pauli::Y => "Y",
                Pauli::Z => "Z",
                Pauli::I => "I",
            };
            parts.push(name);
            simulate_pauli_counts(state, *basis, shots, subseed(seed, &parts)).map_err(numerical)
        })
        .collect()
}

fn run_command(cfg: ExperimentConfig) -> Result<(), CliError> {
    let scenario = cfg.to_scenario()?;
    let probes = cfg.probes()?;
    let engine = ScenarioEngine::new(scenario).map_err(numerical)?;
    let sampled_mode = cfg.shots > 0;
    let mode = if sampled_mode { "sampled" } else { "exact" };
    let config_hash = cfg.hash();
    let table_hash = engine.table().convention_hash().to_string();

    let compute_start = Instant::now();

    // Exact analysis backs both modes; sampled mode draws shot counts and
    // simulated tomography statistics on top of it.
    let mut exact_reports: BTreeMap<String, TeleportationReport> = BTreeMap::new();
    let mut inputs = Vec::new();
    for (name, probe) in &probes {
        let (report, counts) = if sampled_mode {
            let (sampled, report) = engine
                .run_sampled(probe, cfg.shots, subseed(cfg.seed, &["bsm", &cfg.scenario, name]))
                .map_err(numerical)?;
            (report, Some(sampled))
        } else {
            (engine.run_exact(probe).map_err(numerical)?, None)
        };

        let mut outcomes = Vec::new();
        let mut weighted_fidelity = 0.0;
        let mut unambiguous_counts = 0u64;
        for label in LABEL_ORDER {
            let branch = report.outcome(label);
            let count = counts
                .as_ref()
                .map(|s| s.counts.get(&label).copied().unwrap_or(0));
            let (probability, fidelity, fidelity_err) = match (&counts, branch) {
                (None, Some(o)) => (o.probability, Some(o.fidelity), None),
                (Some(s), Some(o)) => {
                    let n = count.unwrap_or(0);
                    let probability = n as f64 / s.shots as f64;
                    if n == 0 {
                        (probability, None, None)
                    } else {
                        let records = simulate_records(
                            &o.corrected,
                            cfg.tomography_shots,
                            cfg.seed,
                            &["tomo", &cfg.scenario, name, &label.to_string()],
                        )?;
                        let estimate = mle_state_tomography(&records).map_err(numerical)?;
                        let fidelity = estimate.fidelity(probe);
                        let err = bootstrap_fidelity(
                            &records,
                            probe,
                            cfg.bootstrap_resamples,
                            subseed(cfg.seed, &["boot", &cfg.scenario, name, &label.to_string()]),
                        )
                        .map_err(numerical)?
                        .std_dev;
                        if label.is_unambiguous() {
                            weighted_fidelity += n as f64 * fidelity;
                            unambiguous_counts += n;
                        }
                        (probability, Some(fidelity), Some(err))
                    }
                }
                (_, None) => (0.0, None, None),
            };
            outcomes.push(OutcomeSummary {
                bsm_outcome: label.to_string(),
                probability,
                counts: count,
                correction: branch.and_then(|o| o.correction).map(|c| c.to_string()),
                fidelity,
                fidelity_err,
            });
        }

        let summary = if let Some(s) = &counts {
            let postselected = (s.shots - s.rejected) as f64 / s.shots as f64;
            let mean = (unambiguous_counts > 0)
                .then(|| weighted_fidelity / unambiguous_counts as f64);
            let quality = match (s.acceptance, mean) {
                (Some(p), Some(f)) => Some(p * f),
                _ => None,
            };
            InputSummary {
                input_state: name.clone(),
                acceptance: s.acceptance,
                mean_unambiguous_fidelity: mean,
                quality,
                invalid_probability: report.invalid_probability,
                postselected_probability: postselected,
                truncated_weight: report.truncated_weight,
                outcomes,
            }
        } else {
            InputSummary {
                input_state: name.clone(),
                acceptance: report.acceptance,
                mean_unambiguous_fidelity: report.mean_unambiguous_fidelity,
                quality: report.quality,
                invalid_probability: report.invalid_probability,
                postselected_probability: report.postselected_probability,
                truncated_weight: report.truncated_weight,
                outcomes,
            }
        };
        inputs.push(summary);
        exact_reports.insert(name.clone(), report);
    }

    // χ matrices always come from the four standard probes, regardless of
    // which inputs the fidelity table covers.
    for (name, probe) in QubitSpec::standard_probes() {
        if !exact_reports.contains_key(name) {
            exact_reports.insert(name.into(), engine.run_exact(&probe).map_err(numerical)?);
        }
    }
    let chi = chi_report(&cfg, &config_hash, &table_hash, mode, &exact_reports)?;

    let compute_seconds = compute_start.elapsed().as_secs_f64();

    let summary = RunSummary {
        config_hash: config_hash.clone(),
        table_hash: table_hash.clone(),
        scenario: cfg.scenario.clone(),
        mode: mode.into(),
        inputs,
    };
    let truncation = probes
        .iter()
        .map(|(name, _)| TruncationNote {
            label: name.clone(),
            truncated_weight: exact_reports[name].truncated_weight,
        })
        .collect();
    let manifest = RunManifest {
        command: "run".into(),
        config: cfg.clone(),
        config_hash,
        table_hash,
        table_success_probability: engine.table().success_probability(),
        artifacts: vec![
            "summary.json".into(),
            "fidelity_table.csv".into(),
            "chi_matrices.json".into(),
        ],
        truncation,
        timing_file: "timing.txt".into(),
    };

    let write_start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", cfg.out_dir.display())))?;
    write_manifest(&cfg.out_dir, &manifest)?;
    write_summary(&cfg.out_dir, &summary)?;
    write_fidelity_csv(&cfg.out_dir, &summary)?;
    write_chi(&cfg.out_dir, &chi)?;
    write_timing(
        &cfg.out_dir,
        &[("compute", compute_seconds), ("write", write_start.elapsed().as_secs_f64())],
    )?;

    println!("scenario {} ({} mode) -> {}", summary.scenario, summary.mode, cfg.out_dir.display());
    for input in &summary.inputs {
        println!(
            "  input={} p_a={} mean_F={} q={}",
            input.input_state,
            display_opt(input.acceptance),
            display_opt(input.mean_unambiguous_fidelity),
            display_opt(input.quality),
        );
    }
    Ok(())
}

/// Reconstructs the per-outcome channels from the four standard probes.
fn chi_report(
    cfg: &ExperimentConfig,
    config_hash: &str,
    table_hash: &str,
    mode: &str,
    exact_reports: &BTreeMap<String, TeleportationReport>,
) -> Result<ChiReport, CliError> {
    let std_probes = QubitSpec::standard_probes();
    let sampled_mode = cfg.shots > 0;
    let mut outcomes = Vec::new();
    for label in LABEL_ORDER {
        if std_probes.iter().any(|(n, _)| exact_reports[*n].outcome(label).is_none()) {
            continue;
        }
        let states = |pre: bool| -> Result<[DensityMatrix; 4], CliError> {
            let mut out = Vec::with_capacity(4);
            for (name, _) in &std_probes {
                let branch = exact_reports[*name].outcome(label).expect("checked above");
                let state =
                    if pre { branch.pre_correction.clone() } else { branch.corrected.clone() };
                if sampled_mode {
                    let stage = if pre { "chi_pre" } else { "chi_post" };
                    let records = simulate_records(
                        &state,
                        cfg.tomography_shots,
                        cfg.seed,
                        &[stage, &cfg.scenario, name, &label.to_string()],
                    )?;
                    out.push(mle_state_tomography(&records).map_err(numerical)?);
                } else {
                    out.push(state);
                }
            }
            Ok(out.try_into().expect("exactly four probes"))
        };
        let chi_pre = process_tomography(&states(true)?).map_err(numerical)?;
        let chi_post = process_tomography(&states(false)?).map_err(numerical)?;
        let correction = exact_reports[std_probes[0].0]
            .outcome(label)
            .and_then(|o| o.correction);
        let vs_correction = match correction {
            Some(word) => {
                let ideal = ChiMatrix::of_unitary(&word.unitary()).map_err(numerical)?;
                Some(process_fidelity(&chi_pre, &ideal).map_err(numerical)?)
            }
            None => None,
        };
        let vs_identity = process_fidelity(&chi_post, &ChiMatrix::identity_channel())
            .map_err(numerical)?;
        outcomes.push(ChiOutcome {
            bsm_outcome: label.to_string(),
            correction: correction.map(|c| c.to_string()),
            pre_correction: complex_matrix(4, |r, c| chi_pre.entry(r, c)),
            corrected: complex_matrix(4, |r, c| chi_post.entry(r, c)),
            process_fidelity_vs_correction: vs_correction,
            process_fidelity_vs_identity: vs_identity,
        });
    }
    Ok(ChiReport {
        config_hash: config_hash.into(),
        table_hash: table_hash.into(),
        scenario: cfg.scenario.clone(),
        mode: mode.into(),
        estimation: "four-probe linear inversion with physicality projection".into(),
        outcomes,
    })
}

fn sweep_command(cfg: ExperimentConfig, spec: SweepSpec) -> Result<(), CliError> {
    let scenario = cfg.to_scenario()?;
    let probes = cfg.probes()?;
    let (input_name, probe) = &probes[0];
    let config_hash = cfg.hash();

    let compute_start = Instant::now();
    let engine = ScenarioEngine::new(scenario).map_err(numerical)?;
    let table_hash = engine.table().convention_hash().to_string();
    let table_success = engine.table().success_probability();

    let mut rows = Vec::new();
    let mut truncation = Vec::new();
    for lambda in spec.values() {
        let point = engine.with_lambda(lambda).map_err(|e| match e {
            SimError::InvalidParameter(msg) => CliError::Config(msg),
            other => numerical(other),
        })?;
        let report = point.run_exact(probe).map_err(numerical)?;
        let mut psi_mass = 0.0;
        let mut psi_weighted = 0.0;
        for label in [OutcomeLabel::PsiMinus, OutcomeLabel::PsiPlus] {
            if let Some(o) = report.outcome(label) {
                psi_mass += o.probability;
                psi_weighted += o.probability * o.fidelity;
            }
        }
        let lambda_source = lambda * cfg.input_scale;
        rows.push(SweepRow {
            lambda,
            acceptance: report.acceptance,
            mean_unambiguous_fidelity: report.mean_unambiguous_fidelity,
            psi_fidelity: (psi_mass > 0.0).then(|| psi_weighted / psi_mass),
            quality: report.quality,
            g2_heralded: heralded_g2(lambda_source).ok(),
            g2_unheralded: unheralded_g2(lambda_source).ok(),
        });
        truncation.push(TruncationNote {
            label: format!("lambda={lambda:.6}"),
            truncated_weight: report.truncated_weight,
        });
    }
    let compute_seconds = compute_start.elapsed().as_secs_f64();

    let manifest = RunManifest {
        command: "sweep".into(),
        config: cfg.clone(),
        config_hash: config_hash.clone(),
        table_hash,
        table_success_probability: table_success,
        artifacts: vec!["sweep.csv".into()],
        truncation,
        timing_file: "timing.txt".into(),
    };

    let write_start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", cfg.out_dir.display())))?;
    write_manifest(&cfg.out_dir, &manifest)?;
    write_sweep_csv(&cfg.out_dir, &config_hash, &rows)?;
    write_timing(
        &cfg.out_dir,
        &[("compute", compute_seconds), ("write", write_start.elapsed().as_secs_f64())],
    )?;

    println!(
        "sweep λ ∈ [{}, {}] ({} points) scenario {} input {} -> {}",
        spec.start,
        spec.end,
        spec.points,
        cfg.scenario,
        input_name,
        cfg.out_dir.display()
    );
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        println!(
            "  psi_fidelity {} -> {}",
            display_opt(first.psi_fidelity),
            display_opt(last.psi_fidelity)
        );
    }
    Ok(())
}

fn table_command(args: TableArgs) -> Result<(), CliError> {
    let kind: ScenarioKind = args
        .scenario
        .parse()
        .map_err(|_| CliError::Config(format!("unknown scenario `{}`", args.scenario)))?;
    let fanout = parse_fanout(&args.fanout)?;
    let sector = match args.sector.as_deref() {
        None => kind.table_sector(),
        Some("two") => telesim::bsm::TableSector::TwoPhoton,
        Some("four") => telesim::bsm::TableSector::FourPhoton,
        Some(other) => {
            return Err(CliError::Config(format!("unknown sector `{other}` (two or four)")))
        }
    };
    let circuit = if kind.uses_boosted_circuit() {
        BsmCircuit::boosted("in", "ba", "anc")
    } else {
        BsmCircuit::standard("in", "ba")
    };
    let table = ClassificationTable::derive(&circuit, sector, fanout).map_err(numerical)?;

    println!("scenario:            {kind}");
    println!("kind:                {:?}", table.kind());
    println!("sector:              {:?}", table.sector());
    println!("fanout:              {:?}", table.fanout());
    println!("entries:             {}", table.len());
    for label in LABEL_ORDER {
        println!("  {:<10} {:>4} patterns", label.to_string(), table.patterns_with_label(label).len());
    }
    println!("success_probability: {:.12}", table.success_probability());
    println!("convention_hash:     {}", table.convention_hash());

    if let Some(path) = &args.out {
        let json = table.to_json_string().map_err(numerical)?;
        std::fs::write(path, json)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        println!("table written to {}", path.display());
    }
    Ok(())
}

fn tomo_command(args: TomoArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.counts)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", args.counts.display())))?;
    let records = parse_counts(&args.counts, &text)?;
    let rho = mle_state_tomography(&records).map_err(numerical)?;

    let counts_hash = {
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    let (lo, hi) = rho.eigenvalues();
    let mut report = TomoReport {
        counts_hash,
        records: records.len(),
        bloch: rho.bloch(),
        matrix: complex_matrix(2, |r, c| rho.entry(r, c)),
        purity: rho.purity(),
        eigenvalues: [lo, hi],
        target: None,
        fidelity: None,
        fidelity_std_dev: None,
        bootstrap_resamples: None,
    };
    if let Some(target) = &args.target {
        let probe = probe_by_name(target)?;
        let resamples = args.resamples.unwrap_or(DEFAULT_BOOTSTRAP_RESAMPLES);
        let estimate =
            bootstrap_fidelity(&records, &probe, resamples, args.seed).map_err(numerical)?;
        report.target = Some(target.clone());
        report.fidelity = Some(rho.fidelity(&probe));
        report.fidelity_std_dev = Some(estimate.std_dev);
        report.bootstrap_resamples = Some(resamples);
    }

    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Io(format!("encoding report: {e}")))?;
    json.push('\n');
    match &args.out {
        Some(path) => {
            std::fs::write(path, json)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            println!("reconstruction written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

/// Reads count records from a CSV (`basis,n_plus,n_minus`) or JSON file;
/// extra columns such as outcome labels or scenario tags are ignored.
fn parse_counts(path: &Path, text: &str) -> Result<Vec<CountRecord>, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let basis_of = |name: &str| -> Result<Pauli, CliError> {
        match name.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            other => Err(bad(format!("unknown basis `{other}`"))),
        }
    };
    let records: Vec<CountRecord> = if path.extension().is_some_and(|e| e == "json") {
        #[derive(serde::Deserialize)]
        struct Row {
            basis: String,
            n_plus: u64,
            n_minus: u64,
        }
        let rows: Vec<Row> =
            serde_json::from_str(text).map_err(|e| bad(format!("parsing JSON: {e}")))?;
        rows.into_iter()
            .map(|r| {
                Ok(CountRecord { basis: basis_of(&r.basis)?, n_plus: r.n_plus, n_minus: r.n_minus })
            })
            .collect::<Result<_, CliError>>()?
    } else {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("empty counts file".into()))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        let index = |name: &str| {
            columns
                .iter()
                .position(|c| *c == name)
                .ok_or_else(|| bad(format!("missing column `{name}`")))
        };
        let (bi, pi, mi) = (index("basis")?, index("n_plus")?, index("n_minus")?);
        lines
            .map(|line| {
                let fields: Vec<&str> = line.split(',').map(str::trim).collect();
                let get = |i: usize| {
                    fields.get(i).copied().ok_or_else(|| bad(format!("short row `{line}`")))
                };
                let parse_u64 = |s: &str| {
                    s.parse::<u64>().map_err(|_| bad(format!("bad count `{s}` in `{line}`")))
                };
                Ok(CountRecord {
                    basis: basis_of(get(bi)?)?,
                    n_plus: parse_u64(get(pi)?)?,
                    n_minus: parse_u64(get(mi)?)?,
                })
            })
            .collect::<Result<_, CliError>>()?
    };
    if records.is_empty() {
        return Err(bad("no count records".into()));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subseeds_differ_by_path_and_seed() {
        let a = subseed(7, &["bsm", "sqt", "plus"]);
        let b = subseed(7, &["bsm", "sqt", "zero"]);
        let c = subseed(8, &["bsm", "sqt", "plus"]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, subseed(7, &["bsm", "sqt", "plus"]));
    }

    #[test]
    fn counts_parse_from_csv_and_json() {
        let csv = "basis,n_plus,n_minus,scenario\nX,10,20,sqt\nZ,5,5,sqt\n";
        let records = parse_counts(Path::new("c.csv"), csv).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].basis, Pauli::X);
        assert_eq!(records[1].n_minus, 5);

        let json = r#"[{"basis": "Y", "n_plus": 1, "n_minus": 2}]"#;
        let records = parse_counts(Path::new("c.json"), json).unwrap();
        assert_eq!(records[0].basis, Pauli::Y);

        assert!(parse_counts(Path::new("c.csv"), "basis,n_plus\nX,1\n").is_err());
        assert!(parse_counts(Path::new("c.csv"), "basis,n_plus,n_minus\nQ,1,2\n").is_err());
    }
}
