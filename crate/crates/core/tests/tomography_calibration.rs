//! End-to-end calibration of the tomography stack: reconstruction accuracy
//! on synthetic counts, consistency as statistics grow, and agreement
//! between reconstructed processes and the teleportation corrections that
//! produced them.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use telesim::bsm::OutcomeLabel;
use telesim::protocol::{Scenario, ScenarioEngine, ScenarioKind};
use telesim::qubit::{DensityMatrix, Pauli, QubitSpec};
use telesim::tomography::{
    mle_state_tomography, process_fidelity, process_tomography, simulate_pauli_counts, ChiMatrix,
    CountRecord,
};

/// Draws a Haar-random pure qubit state.
fn random_pure_state(rng: &mut ChaCha12Rng) -> QubitSpec {
    loop {
        let g = |rng: &mut ChaCha12Rng| {
            C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
        };
        let alpha = g(rng);
        let beta = g(rng);
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm > 1e-6 {
            return QubitSpec::new(alpha / norm, beta / norm).unwrap();
        }
    }
}

fn measure_all_bases(state: &QubitSpec, shots: u64, seed: u64) -> Vec<CountRecord> {
    let rho = state.density();
    Pauli::measurement_axes()
        .iter()
        .enumerate()
        .map(|(i, basis)| {
            simulate_pauli_counts(&rho, *basis, shots, seed.wrapping_add(i as u64)).unwrap()
        })
        .collect()
}

#[test]
fn maximum_likelihood_calibration_on_random_pure_states() {
    let mut rng = ChaCha12Rng::seed_from_u64(424_242);
    let mut good = 0usize;
    let mut worst = f64::INFINITY;
    for trial in 0..100u64 {
        let truth = random_pure_state(&mut rng);
        let records = measure_all_bases(&truth, 10_000, 1_000 + trial);
        let estimate = mle_state_tomography(&records).unwrap();
        let f = estimate.fidelity(&truth);
        worst = worst.min(f);
        if f >= 0.99 {
            good += 1;
        }
    }
    assert!(good >= 95, "only {good}/100 reconstructions reached fidelity 0.99 (worst {worst})");
}

/// Jozsa fidelity between two qubit density matrices.
fn mixed_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (p, q) = (a.matrix(), b.matrix());
    let cross = (p * q).trace().re;
    cross + 2.0 * (p.determinant().re.max(0.0) * q.determinant().re.max(0.0)).sqrt()
}

fn median_infidelity(truths: &[DensityMatrix], shots: u64, seed_base: u64) -> f64 {
    let mut errors: Vec<f64> = truths
        .iter()
        .enumerate()
        .map(|(trial, truth)| {
            let records: Vec<CountRecord> = Pauli::measurement_axes()
                .iter()
                .enumerate()
                .map(|(i, basis)| {
                    simulate_pauli_counts(truth, *basis, shots, seed_base + 10 * trial as u64 + i as u64)
                        .unwrap()
                })
                .collect();
            let estimate = mle_state_tomography(&records).unwrap();
            1.0 - mixed_fidelity(&estimate, truth)
        })
        .collect();
    errors.sort_by(|a, b| a.total_cmp(b));
    0.5 * (errors[errors.len() / 2 - 1] + errors[errors.len() / 2])
}

#[test]
fn reconstruction_error_shrinks_as_counts_grow() {
    // Fifty fixed generic (mixed) true states: the median infidelity over
    // the ensemble falls strictly at every tenfold increase in counts.
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let truths: Vec<DensityMatrix> = (0..50)
        .map(|_| {
            let pure = random_pure_state(&mut rng).density();
            let len: f64 = rng.gen_range(0.3..0.95);
            DensityMatrix::mixture(&[
                (len, pure),
                (1.0 - len, DensityMatrix::maximally_mixed()),
            ])
            .unwrap()
        })
        .collect();
    let medians: Vec<f64> = [100u64, 1_000, 10_000]
        .iter()
        .enumerate()
        .map(|(step, &shots)| median_infidelity(&truths, shots, 5_000 + 977 * step as u64))
        .collect();
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "median infidelity must fall with statistics: {medians:?}"
    );

    // Pure states split the estimator between boundary-snapped and interior
    // solutions, so only the hundredfold endpoint comparison is stable.
    let pure_truths: Vec<DensityMatrix> =
        (0..50).map(|_| random_pure_state(&mut rng).density()).collect();
    let coarse = median_infidelity(&pure_truths, 100, 77_000);
    let fine = median_infidelity(&pure_truths, 10_000, 78_000);
    assert!(fine < coarse, "pure-state median infidelity: {coarse} -> {fine}");
}

/// Reconstructs the channel from a probe to its pre-correction teleported
/// state for one Bell-measurement outcome.
fn pre_correction_channel(kind: ScenarioKind, label: OutcomeLabel) -> ChiMatrix {
    let engine = ScenarioEngine::new(Scenario::ideal(kind)).unwrap();
    let probes = QubitSpec::standard_probes();
    let outputs: [DensityMatrix; 4] = std::array::from_fn(|i| {
        let report = engine.run_exact(&probes[i].1).unwrap();
        report.outcome(label).unwrap().pre_correction.clone()
    });
    process_tomography(&outputs).unwrap()
}

#[test]
fn reconstructed_processes_match_the_assigned_corrections() {
    // Before correction, the teleported state is the probe conjugated by the
    // outcome's Pauli word, so process tomography of each branch must return
    // exactly that word's channel — the invariant tying the classifier, the
    // correction table and the tomography stack together.
    let cases = [
        (ScenarioKind::Sqt, vec![OutcomeLabel::PsiMinus, OutcomeLabel::PsiPlus]),
        (
            ScenarioKind::Bqt,
            vec![
                OutcomeLabel::PsiMinus,
                OutcomeLabel::PsiPlus,
                OutcomeLabel::PhiMinus,
                OutcomeLabel::PhiPlus,
            ],
        ),
    ];
    let engine_corrections = |kind: ScenarioKind, label: OutcomeLabel| {
        let engine = ScenarioEngine::new(Scenario::ideal(kind)).unwrap();
        let report = engine.run_exact(&QubitSpec::plus()).unwrap();
        report.outcome(label).unwrap().correction.unwrap()
    };
    for (kind, labels) in cases {
        for label in labels {
            let chi = pre_correction_channel(kind, label);
            let word = engine_corrections(kind, label);
            let ideal = ChiMatrix::of_unitary(&word.unitary()).unwrap();
            for j in 0..4 {
                for k in 0..4 {
                    let d = (chi.entry(j, k) - ideal.entry(j, k)).norm();
                    assert!(d < 1e-8, "{kind} {label} χ[{j},{k}] off by {d}");
                }
            }
            let f = process_fidelity(&chi, &ideal).unwrap();
            assert!((f - 1.0).abs() < 1e-6, "{kind} {label}: process fidelity {f}");
        }
    }
}

#[test]
fn corrected_branches_implement_the_identity_channel() {
    let identity = ChiMatrix::identity_channel();
    for kind in [ScenarioKind::Sqt, ScenarioKind::Bqt] {
        let engine = ScenarioEngine::new(Scenario::ideal(kind)).unwrap();
        let probes = QubitSpec::standard_probes();
        let labels: Vec<OutcomeLabel> = engine
            .run_exact(&QubitSpec::plus())
            .unwrap()
            .outcomes
            .iter()
            .filter(|o| o.label.is_unambiguous())
            .map(|o| o.label)
            .collect();
        for label in labels {
            let outputs: [DensityMatrix; 4] = std::array::from_fn(|i| {
                let report = engine.run_exact(&probes[i].1).unwrap();
                report.outcome(label).unwrap().corrected.clone()
            });
            let chi = process_tomography(&outputs).unwrap();
            let f = process_fidelity(&chi, &identity).unwrap();
            assert!((f - 1.0).abs() < 1e-6, "{kind} {label}: corrected F_p = {f}");
        }
    }
}

#[test]
fn noisy_branch_tomography_stays_physical() {
    // Counts simulated from a lossy, bright run still reconstruct to valid
    // states whose fidelity against the exact branch state is high.
    let mut scenario = Scenario::new(ScenarioKind::Sqt);
    scenario.lambda = 0.2;
    scenario.efficiency = 0.7;
    let engine = ScenarioEngine::new(scenario).unwrap();
    let report = engine.run_exact(&QubitSpec::plus_i()).unwrap();
    let branch = report.outcome(OutcomeLabel::PsiPlus).unwrap();
    let records: Vec<CountRecord> = Pauli::measurement_axes()
        .iter()
        .enumerate()
        .map(|(i, basis)| {
            simulate_pauli_counts(&branch.corrected, *basis, 20_000, 31 + i as u64).unwrap()
        })
        .collect();
    let estimate = mle_state_tomography(&records).unwrap();
    let overlap = {
        let a = estimate.matrix();
        let b = branch.corrected.matrix();
        (a * b).trace().re + 2.0 * ((a.determinant().re).max(0.0) * (b.determinant().re).max(0.0)).sqrt()
    };
    assert!(overlap > 0.995, "mixed-state overlap {overlap} too low");
    let (lo, _) = estimate.eigenvalues();
    assert!(lo >= -1e-12);
}
