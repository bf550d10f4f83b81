//! Property tests of the Fock engine's unitary application against an
//! independent creation-operator polynomial oracle.

mod common;

use common::polynomial_unitary_oracle;
use nalgebra::DMatrix;
use proptest::prelude::*;
use telesim::fock::{FockState, ModeLayout, ModeUnitary, Polarization};
use telesim::C64;

fn three_mode_layout(cutoff: u32) -> ModeLayout {
    ModeLayout::new(
        vec![("a", Polarization::H), ("b", Polarization::H), ("c", Polarization::H)],
        cutoff,
    )
    .unwrap()
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn occupation() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..=2, 3)
        .prop_filter("bounded total", |occ| occ.iter().map(|&n| n as u32).sum::<u32>() <= 4)
}

/// A normalized random state on three modes with at most four photons.
fn state() -> impl Strategy<Value = Vec<(Vec<u8>, C64)>> {
    proptest::collection::btree_map(occupation(), amplitude(), 1..4).prop_filter_map(
        "nonzero norm",
        |terms| {
            let norm: f64 = terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                return None;
            }
            Some(terms.into_iter().map(|(occ, c)| (occ, c / norm)).collect())
        },
    )
}

/// A Haar-ish random unitary: the Q factor of a random complex matrix.
fn unitary(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
    proptest::collection::vec(amplitude(), n * n).prop_map(move |entries| {
        let m = DMatrix::from_vec(n, n, entries);
        m.qr().q()
    })
}

fn engine_output(
    terms: &[(Vec<u8>, C64)],
    u: &DMatrix<C64>,
    targets: &[usize],
    cutoff: u32,
) -> FockState {
    let layout = three_mode_layout(cutoff);
    let state = FockState::from_terms(layout.clone(), terms).unwrap();
    let mode_targets = targets
        .iter()
        .map(|&t| layout.mode(["a", "b", "c"][t], Polarization::H).unwrap())
        .collect();
    let mu = ModeUnitary::new(u.clone(), mode_targets).unwrap();
    state.apply_mode_unitary(&mu).unwrap()
}

fn assert_states_match(engine: &FockState, oracle: &std::collections::BTreeMap<Vec<u8>, C64>) {
    for (occ, amp) in oracle {
        let got = engine.amplitude(occ);
        let diff = (got - amp).norm();
        assert!(diff < 1e-9, "occupation {occ:?}: engine {got} vs oracle {amp}");
    }
    for (occ, amp) in engine.terms() {
        let expect = oracle.get(&occ.to_vec()).copied().unwrap_or(C64::new(0.0, 0.0));
        assert!((amp - expect).norm() < 1e-9, "extra engine term {occ:?} = {amp}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unitary_application_matches_polynomial_oracle(
        terms in state(),
        u in unitary(2),
        pair in proptest::sample::select(vec![[0usize, 1], [0, 2], [1, 2]]),
    ) {
        let engine = engine_output(&terms, &u, &pair, 6);
        let oracle = polynomial_unitary_oracle(&terms, &u, &pair);
        assert_states_match(&engine, &oracle);
    }

    #[test]
    fn three_mode_unitary_matches_polynomial_oracle(
        terms in state(),
        u in unitary(3),
    ) {
        let engine = engine_output(&terms, &u, &[0, 1, 2], 6);
        let oracle = polynomial_unitary_oracle(&terms, &u, &[0, 1, 2]);
        assert_states_match(&engine, &oracle);
    }

    #[test]
    fn norm_is_preserved_without_truncation(terms in state(), u in unitary(3)) {
        let engine = engine_output(&terms, &u, &[0, 1, 2], 6);
        prop_assert!((engine.norm_sqr() - 1.0).abs() < 1e-10);
        prop_assert!(engine.discarded_weight() < 1e-12);
    }

    #[test]
    fn inverse_restores_the_state(terms in state(), u in unitary(3)) {
        let layout = three_mode_layout(6);
        let state = FockState::from_terms(layout.clone(), &terms).unwrap();
        let targets: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|s| layout.mode(s, Polarization::H).unwrap())
            .collect();
        let forward = ModeUnitary::new(u.clone(), targets.clone()).unwrap();
        let back = ModeUnitary::new(u.adjoint(), targets).unwrap();
        let roundtrip = state
            .apply_mode_unitary(&forward)
            .unwrap()
            .apply_mode_unitary(&back)
            .unwrap();
        for (occ, amp) in state.terms() {
            prop_assert!((roundtrip.amplitude(occ) - amp).norm() < 1e-9);
        }
    }
}

#[test]
fn balanced_splitter_bunches_photon_pairs() {
    // |1,1⟩ → (|2,0⟩ − |0,2⟩)/√2 via the oracle, independent of the engine's
    // own unit test of the same interference.
    let one = C64::new(1.0, 0.0);
    let r = 1.0 / 2.0_f64.sqrt();
    let u = DMatrix::from_row_slice(2, 2, &[
        C64::new(r, 0.0), C64::new(r, 0.0),
        C64::new(r, 0.0), C64::new(-r, 0.0),
    ]);
    let oracle = polynomial_unitary_oracle(&[(vec![1, 1, 0], one)], &u, &[0, 1]);
    assert_eq!(oracle.len(), 2);
    let hh = oracle[&vec![2u8, 0, 0]];
    let vv = oracle[&vec![0u8, 2, 0]];
    assert!((hh.re - r).abs() < 1e-12);
    assert!((vv.re + r).abs() < 1e-12);

    let engine = engine_output(&[(vec![1, 1, 0], one)], &u, &[0, 1], 6);
    assert_states_match(&engine, &oracle);
}
