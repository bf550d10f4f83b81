//! Acceptance suite: one test per release criterion, each printing a single
//! `criterion NN — <name>: pass|fail` verdict line. Criteria that concern
//! the command-line contract drive the built binary; the physics criteria
//! call the library directly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use telesim::bsm::OutcomeLabel;
use telesim::detection::{occupancy_click_distribution, Fanout};
use telesim::protocol::{Scenario, ScenarioEngine, ScenarioKind};
use telesim::qubit::{DensityMatrix, Pauli, QubitSpec};
use telesim::tomography::{
    mle_state_tomography, process_fidelity, process_tomography, simulate_pauli_counts, ChiMatrix,
    CountRecord,
};
use telesim::C64;

/// Prints the verdict line for one criterion, then fails on any recorded issue.
fn verdict(number: u32, name: &str, failures: &[String]) {
    let ok = failures.is_empty();
    println!("criterion {number:02} — {name}: {}", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {number:02} — {name} failed:\n  {}", failures.join("\n  "));
}

fn telesim_binary(args: &[&str], output_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telesim"))
        .args(args)
        .arg("--output-dir")
        .arg(output_dir)
        .env_remove("TELESIM_OUTPUT_DIR")
        .output()
        .expect("the telesim binary should spawn")
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

/// Runs the binary in exact ideal mode and checks every probe's acceptance
/// probability against a target, within the given wall-clock budget.
fn ideal_acceptance_check(
    number: u32,
    name: &str,
    scenario: &str,
    target: f64,
    budget: Duration,
) {
    let dir = tempfile::tempdir().expect("temporary output directory");
    let started = Instant::now();
    let out = telesim_binary(&["run", "--scenario", scenario, "--exact", "--ideal"], dir.path());
    let elapsed = started.elapsed();

    let mut failures = Vec::new();
    if !out.status.success() {
        failures.push(format!("binary failed: {}", String::from_utf8_lossy(&out.stderr)));
        verdict(number, name, &failures);
        return;
    }
    let summary = read_json(&dir.path().join("summary.json"));
    let inputs = summary["inputs"].as_array().expect("summary lists the probe inputs");
    if inputs.len() != 4 {
        failures.push(format!("expected 4 probe inputs, found {}", inputs.len()));
    }
    for input in inputs {
        let state = input["input_state"].as_str().unwrap_or("?");
        match input["acceptance"].as_f64() {
            Some(p_a) if (p_a - target).abs() <= 1e-9 => {}
            Some(p_a) => failures.push(format!(
                "input {state}: acceptance {p_a:.12} differs from {target} by {:.3e}",
                (p_a - target).abs()
            )),
            None => failures.push(format!("input {state}: acceptance missing")),
        }
    }
    if elapsed > budget {
        failures.push(format!("runtime {elapsed:?} exceeded the {budget:?} budget"));
    }
    verdict(number, name, &failures);
}

#[test]
fn criterion_01_standard_measurement_accepts_half() {
    ideal_acceptance_check(
        1,
        "ideal standard run reports acceptance 0.5",
        "sqt",
        0.5,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_02_boosted_measurement_accepts_five_eighths() {
    ideal_acceptance_check(
        2,
        "ideal boosted run reports acceptance 0.625",
        "bqt",
        0.625,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_03_ideal_runs_teleport_every_probe_exactly() {
    let mut failures = Vec::new();
    for kind in [ScenarioKind::Sqt, ScenarioKind::Bqt] {
        let engine = ScenarioEngine::new(Scenario::ideal(kind)).expect("ideal engine");
        let mut corrected_by_label: BTreeMap<OutcomeLabel, Vec<DensityMatrix>> = BTreeMap::new();
        for (name, probe) in QubitSpec::standard_probes() {
            let report = engine.run_exact(&probe).expect("ideal exact run");
            for outcome in &report.outcomes {
                if outcome.label == OutcomeLabel::Ambiguous {
                    continue;
                }
                if (outcome.fidelity - 1.0).abs() > 1e-9 {
                    failures.push(format!(
                        "{kind:?} {name} {}: teleportation fidelity {:.12} ≠ 1",
                        outcome.label, outcome.fidelity
                    ));
                }
                corrected_by_label.entry(outcome.label).or_default().push(outcome.corrected.clone());
            }
        }
        for (label, states) in corrected_by_label {
            let outputs: [DensityMatrix; 4] =
                states.try_into().unwrap_or_else(|_| panic!("{label} missing for some probe"));
            let chi = process_tomography(&outputs).expect("probe system is invertible");
            let f_p = process_fidelity(&chi, &ChiMatrix::identity_channel())
                .expect("identity target is rank one");
            if (f_p - 1.0).abs() > 1e-6 {
                failures.push(format!(
                    "{kind:?} {label}: corrected process fidelity {f_p:.9} ≠ 1"
                ));
            }
        }
    }
    verdict(3, "every unambiguous branch teleports all four probes exactly", &failures);
}

#[test]
fn criterion_04_uncorrected_ambiguous_branch_fidelities() {
    let engine = ScenarioEngine::new(Scenario::ideal(ScenarioKind::Sqt)).expect("ideal engine");
    let expected = [("zero", 0.0), ("one", 0.0), ("plus", 0.5), ("plus_i", 0.5)];
    let mut failures = Vec::new();
    for (name, target) in expected {
        let probe = telesim_probe(name);
        let report = engine.run_exact(&probe).expect("ideal exact run");
        let ambiguous = report
            .outcome(OutcomeLabel::Ambiguous)
            .expect("the standard scenario has an ambiguous branch");
        if ambiguous.correction.is_some() {
            failures.push(format!("{name}: ambiguous branch unexpectedly carries a correction"));
        }
        if (ambiguous.fidelity - target).abs() > 1e-9 {
            failures.push(format!(
                "{name}: ambiguous fidelity {:.12} differs from {target} by {:.3e}",
                ambiguous.fidelity,
                (ambiguous.fidelity - target).abs()
            ));
        }
    }
    verdict(4, "ambiguous branch scores 0, 0, ½, ½ on the four probes", &failures);
}

fn telesim_probe(name: &str) -> QubitSpec {
    match name {
        "zero" => QubitSpec::zero(),
        "one" => QubitSpec::one(),
        "plus" => QubitSpec::plus(),
        "plus_i" => QubitSpec::plus_i(),
        other => panic!("unknown probe {other}"),
    }
}

#[test]
fn criterion_05_boosted_quality_dominates_standard() {
    let mut failures = Vec::new();
    let ideal_quality = |kind: ScenarioKind| -> f64 {
        let engine = ScenarioEngine::new(Scenario::ideal(kind)).expect("ideal engine");
        let report = engine.run_exact(&QubitSpec::plus()).expect("ideal exact run");
        report.quality.expect("ideal runs accept events")
    };
    let q_sqt = ideal_quality(ScenarioKind::Sqt);
    let q_bqt = ideal_quality(ScenarioKind::Bqt);
    if (q_sqt - 0.5).abs() > 1e-9 {
        failures.push(format!("ideal standard quality {q_sqt:.12} ≠ 0.5"));
    }
    if (q_bqt - 0.625).abs() > 1e-9 {
        failures.push(format!("ideal boosted quality {q_bqt:.12} ≠ 0.625"));
    }

    let grid_quality = |kind: ScenarioKind, lambda: f64, eta: f64| -> f64 {
        let mut scenario = Scenario::new(kind);
        scenario.lambda = lambda;
        scenario.efficiency = eta;
        scenario.herald_efficiency = eta;
        let engine = ScenarioEngine::new(scenario).expect("grid engine");
        let report = engine.run_exact(&QubitSpec::plus()).expect("grid exact run");
        report.quality.expect("grid points accept events")
    };
    for lambda in [0.05, 0.1, 0.2] {
        for eta in [0.6, 0.8, 1.0] {
            let q_s = grid_quality(ScenarioKind::Sqt, lambda, eta);
            let q_b = grid_quality(ScenarioKind::Bqt, lambda, eta);
            if q_b <= q_s {
                failures.push(format!(
                    "λ={lambda}, η={eta}: boosted quality {q_b:.9} does not beat standard {q_s:.9}"
                ));
            }
        }
    }
    verdict(5, "boosted quality 0.625 beats standard 0.5 across the grid", &failures);
}

#[test]
fn criterion_06_two_photon_click_splitting_odds() {
    // Oracle: both photons land on independent uniform detectors, and the
    // 56 of 64 equally likely assignments with distinct detectors give two
    // clicks.
    let mut split = 0u32;
    for first in 0..8u32 {
        for second in 0..8u32 {
            if first != second {
                split += 1;
            }
        }
    }
    let oracle = f64::from(split) / 64.0;

    let distribution =
        occupancy_click_distribution(2, Fanout::Threshold(8)).expect("valid fanout");
    let mut failures = Vec::new();
    if distribution[2] != oracle {
        failures.push(format!(
            "model P(2 clicks|2 photons) = {} differs from the enumeration {}",
            distribution[2], oracle
        ));
    }
    if distribution[2] != 0.875 {
        failures.push(format!("P(2 clicks|2 photons) = {} ≠ 7/8", distribution[2]));
    }
    verdict(6, "two photons on eight detectors split 7/8 of the time", &failures);
}

#[test]
fn criterion_07_brightness_sweep_trends() {
    let dir = tempfile::tempdir().expect("temporary output directory");
    let out = telesim_binary(
        &[
            "sweep",
            "--scenario",
            "sqt",
            "--exact",
            "--input",
            "plus",
            "--lambda-range",
            "lambda=0.01:0.30:15",
        ],
        dir.path(),
    );
    let mut failures = Vec::new();
    if !out.status.success() {
        failures.push(format!("binary failed: {}", String::from_utf8_lossy(&out.stderr)));
        verdict(7, "sweep trends", &failures);
        return;
    }

    let text = fs::read_to_string(dir.path().join("sweep.csv")).expect("sweep.csv exists");
    let rows: Vec<Vec<Option<f64>>> = text
        .lines()
        .filter(|line| !line.starts_with('#') && !line.starts_with("lambda"))
        .map(|line| {
            line.split(',')
                .map(|cell| (cell != "NA").then(|| cell.parse().expect("numeric cell")))
                .collect()
        })
        .collect();
    if rows.len() != 15 {
        failures.push(format!("expected 15 sweep rows, found {}", rows.len()));
    }
    let column = |index: usize| -> Vec<f64> {
        rows.iter()
            .map(|row| row[index].unwrap_or_else(|| panic!("column {index} has an NA cell")))
            .collect()
    };
    let lambdas = column(0);
    let psi_fidelity = column(3);
    let g2_heralded = column(5);
    let g2_unheralded = column(6);

    if (lambdas[0] - 0.01).abs() > 1e-12 || (lambdas[14] - 0.30).abs() > 1e-12 {
        failures.push(format!("grid spans {}..{}, expected 0.01..0.30", lambdas[0], lambdas[14]));
    }
    for pair in psi_fidelity.windows(2) {
        if pair[1] > pair[0] + 1e-12 {
            failures.push(format!("ψ-branch fidelity rises: {} → {}", pair[0], pair[1]));
        }
    }
    for pair in g2_heralded.windows(2) {
        if pair[1] < pair[0] - 1e-12 {
            failures.push(format!("heralded g² falls: {} → {}", pair[0], pair[1]));
        }
    }
    if (g2_unheralded[0] - 2.0).abs() > 0.02 {
        failures.push(format!("unheralded g² at λ=0.01 is {}, not 2.0 ± 0.02", g2_unheralded[0]));
    }
    verdict(
        7,
        "fidelity falls and source g² rises toward 2 with brightness",
        &failures,
    );
}

#[test]
fn criterion_08_overcounting_acceptance_while_fidelity_drops() {
    let mut scenario = Scenario::new(ScenarioKind::Bqt);
    scenario.lambda = 0.2;
    scenario.efficiency = 0.8;
    scenario.herald_efficiency = 0.8;
    let engine = ScenarioEngine::new(scenario).expect("lossy boosted engine");
    let report = engine.run_exact(&QubitSpec::plus()).expect("lossy exact run");
    let p_a = report.acceptance.expect("events are accepted at λ=0.2");
    let fidelity = report.mean_unambiguous_fidelity.expect("unambiguous events exist");

    let mut failures = Vec::new();
    if p_a <= 0.625 + 1e-9 {
        failures.push(format!("acceptance {p_a:.9} does not exceed the ideal 0.625"));
    }
    if fidelity >= 1.0 - 1e-9 {
        failures.push(format!("mean unambiguous fidelity {fidelity:.9} did not drop below 1"));
    }
    verdict(
        8,
        "threshold fanout with loss over-accepts while fidelity degrades",
        &failures,
    );
}

/// Haar-random pure qubit state.
fn random_pure_state(rng: &mut ChaCha12Rng) -> QubitSpec {
    loop {
        let gaussian = |rng: &mut ChaCha12Rng| {
            C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
        };
        let alpha = gaussian(rng);
        let beta = gaussian(rng);
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm > 1e-6 {
            return QubitSpec::new(alpha / norm, beta / norm).expect("normalized amplitudes");
        }
    }
}

#[test]
fn criterion_09_tomography_calibration() {
    let mut failures = Vec::new();

    let mut rng = ChaCha12Rng::seed_from_u64(424_242);
    let mut good = 0usize;
    let mut worst = f64::INFINITY;
    for trial in 0..100u64 {
        let truth = random_pure_state(&mut rng);
        let rho = truth.density();
        let records: Vec<CountRecord> = Pauli::measurement_axes()
            .iter()
            .enumerate()
            .map(|(i, basis)| {
                simulate_pauli_counts(&rho, *basis, 10_000, 1_000 + trial + i as u64)
                    .expect("simulated counts")
            })
            .collect();
        let estimate = mle_state_tomography(&records).expect("reconstruction converges");
        let fidelity = estimate.fidelity(&truth);
        worst = worst.min(fidelity);
        if fidelity >= 0.99 {
            good += 1;
        }
    }
    if good < 95 {
        failures.push(format!(
            "only {good}/100 reconstructions reached fidelity 0.99 (worst {worst:.6})"
        ));
    }

    let channels: [[f64; 4]; 6] = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.5, 0.2, 0.2, 0.1],
        [0.25, 0.25, 0.25, 0.25],
    ];
    for weights in channels {
        let channel = ChiMatrix::pauli_channel(weights).expect("valid mixture");
        let mut outputs: Vec<DensityMatrix> = Vec::with_capacity(4);
        for (_, probe) in QubitSpec::standard_probes() {
            outputs.push(channel.apply(&probe.density()).expect("channel application"));
        }
        let outputs: [DensityMatrix; 4] = outputs.try_into().expect("four probes");
        let recovered = process_tomography(&outputs).expect("probe system is invertible");
        for j in 0..4 {
            for k in 0..4 {
                let ideal = if j == k { C64::new(weights[j], 0.0) } else { C64::new(0.0, 0.0) };
                let error = (recovered.entry(j, k) - ideal).norm();
                if error > 1e-8 {
                    failures.push(format!(
                        "channel {weights:?}: χ[{j},{k}] off by {error:.3e}"
                    ));
                }
            }
        }
    }
    verdict(
        9,
        "state estimates reach 0.99 fidelity and exact mixtures invert to diagonal χ",
        &failures,
    );
}

#[test]
fn criterion_10_reruns_reproduce_artifacts_byte_for_byte() {
    let args = [
        "run",
        "--scenario",
        "bqt",
        "--lambda",
        "0.15",
        "--efficiency",
        "0.85",
        "--herald-efficiency",
        "0.9",
        "--shots",
        "600",
        "--tomography-shots",
        "800",
        "--bootstrap-resamples",
        "64",
        "--seed",
        "99",
    ];
    let first = tempfile::tempdir().expect("first output directory");
    let second = tempfile::tempdir().expect("second output directory");
    let mut failures = Vec::new();
    for dir in [first.path(), second.path()] {
        let out = telesim_binary(&args, dir);
        if !out.status.success() {
            failures.push(format!("binary failed: {}", String::from_utf8_lossy(&out.stderr)));
            verdict(10, "rerun determinism", &failures);
            return;
        }
    }
    for name in ["manifest.json", "summary.json", "fidelity_table.csv", "chi_matrices.json"] {
        let a = fs::read(first.path().join(name)).expect("first artifact");
        let b = fs::read(second.path().join(name)).expect("second artifact");
        if a != b {
            failures.push(format!("{name} differs between identical runs"));
        }
    }
    verdict(10, "identical config and seed reproduce every artifact byte", &failures);
}
