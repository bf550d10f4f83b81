//! Detection statistics checked against brute-force assignment enumeration.

mod common;

use common::{click_distribution_bruteforce, click_distribution_with_loss};
use telesim::detection::{
    detect_exact, group_click_distribution, occupancy_click_distribution, DetectorBankConfig,
    DetectorGroup, Fanout,
};
use telesim::fock::{FockState, ModeLayout, Polarization};
use telesim::C64;

#[test]
fn two_photons_on_eight_detectors_split_seven_of_eight_times() {
    let dist = occupancy_click_distribution(2, Fanout::Threshold(8)).unwrap();
    let oracle = click_distribution_bruteforce(2, 8);
    assert_eq!(dist[2], 0.875);
    assert_eq!(oracle[2], 0.875);
    assert_eq!(dist[1], 0.125);
}

#[test]
fn occupancy_distribution_matches_enumeration() {
    for m in [1u32, 2, 3, 4, 8] {
        for n in 0..=5u32 {
            let dist = occupancy_click_distribution(n, Fanout::Threshold(m)).unwrap();
            let oracle = click_distribution_bruteforce(n, m);
            for k in 0..=n as usize {
                let engine = dist.get(k).copied().unwrap_or(0.0);
                assert!(
                    (engine - oracle[k]).abs() < 1e-12,
                    "P({k} clicks | {n} photons, {m} detectors): {engine} vs {oracle:?}"
                );
            }
            let total: f64 = dist.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn lossy_group_distribution_matches_thinned_enumeration() {
    let layout = ModeLayout::new(vec![("d", Polarization::H)], 4).unwrap();
    let mode = layout.mode("d", Polarization::H).unwrap();
    for eta in [0.3, 0.6, 0.9] {
        for n in 0..=4u32 {
            let group = DetectorGroup { mode, fanout: Fanout::Threshold(4), efficiency: eta };
            let dist = group_click_distribution(n, &group).unwrap();
            let oracle = click_distribution_with_loss(n, 4, eta);
            for k in 0..=n as usize {
                let engine = dist.get(k).copied().unwrap_or(0.0);
                assert!(
                    (engine - oracle[k]).abs() < 1e-12,
                    "η={eta} P({k}|{n}): {engine} vs {}",
                    oracle[k]
                );
            }
        }
    }
}

#[test]
fn number_resolving_is_the_infinite_fanout_limit() {
    // Exact number resolution reports k = n with certainty; a 64-fold
    // threshold bank approaches it from below.
    for n in 0..=3u32 {
        let pnr = occupancy_click_distribution(n, Fanout::NumberResolving).unwrap();
        assert_eq!(pnr[n as usize], 1.0);
        let big = occupancy_click_distribution(n, Fanout::Threshold(64)).unwrap();
        assert!(big[n as usize] > 0.95);
    }
}

#[test]
fn detection_distribution_is_normalized_with_remainders() {
    // Two detected groups with different fanouts plus one kept mode.
    let layout = ModeLayout::new(
        vec![("d0", Polarization::H), ("d1", Polarization::H), ("keep", Polarization::H)],
        6,
    )
    .unwrap();
    let amp = |re: f64| C64::new(re, 0.0);
    let state = FockState::from_terms(
        layout.clone(),
        &[
            (vec![2, 0, 1], amp(0.5)),
            (vec![1, 1, 0], amp(0.5)),
            (vec![0, 2, 2], amp(0.5)),
            (vec![0, 0, 1], amp(0.5)),
        ],
    )
    .unwrap();
    let groups = vec![
        DetectorGroup {
            mode: layout.mode("d0", Polarization::H).unwrap(),
            fanout: Fanout::Threshold(2),
            efficiency: 0.7,
        },
        DetectorGroup {
            mode: layout.mode("d1", Polarization::H).unwrap(),
            fanout: Fanout::NumberResolving,
            efficiency: 0.9,
        },
    ];
    let kept = vec![layout.mode("keep", Polarization::H).unwrap()];
    let config = DetectorBankConfig::new(groups, kept, layout.len()).unwrap();
    let outcomes = detect_exact(&state, &config).unwrap();

    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    assert!((total - 1.0).abs() < 1e-12, "pattern probabilities sum to {total}");
    for o in &outcomes {
        let remainder_mass: f64 = o.remainder.iter().map(|(w, _)| w).sum();
        assert!((remainder_mass - o.probability).abs() < 1e-12);
        for (_, rem) in &o.remainder {
            assert!(rem.is_normalized(1e-9));
            // Remainders live on the kept mode only.
            for (occ, _) in rem.terms() {
                assert_eq!(occ.len(), 1);
            }
        }
    }
}
