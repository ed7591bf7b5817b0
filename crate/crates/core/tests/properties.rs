use std::sync::Arc;

use permwalk::dynamics::{return_prob_kfermion, TimeGrid, WalkResult};
use permwalk::fock::{apply_annihilation, apply_creation};
use permwalk::hamiltonians::build_hopping;
use permwalk::permgroup::realize_permutation;
use permwalk::{OccupationState, Permutation, SectorBasis};
use proptest::prelude::*;

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (2..=max_n).prop_flat_map(|n| {
        Just((1..=n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|images| Permutation::from_one_line(&images).unwrap())
    })
}

proptest! {
    #[test]
    fn create_then_annihilate_is_identity(n in 1usize..=10, bits in any::<u64>(), site in 1usize..=10) {
        let state = OccupationState::new(bits & ((1 << n) - 1), n).unwrap();
        prop_assume!(site <= n);
        if let Some((s1, up)) = apply_creation(state, site).unwrap() {
            let (s2, back) = apply_annihilation(up, site).unwrap().unwrap();
            prop_assert_eq!(back, state);
            prop_assert_eq!(s1 * s2, 1);
        } else {
            prop_assert!(state.is_occupied(site));
        }
    }

    #[test]
    fn rank_unrank(n in 1usize..=16, k in 0usize..=16, pick in any::<u64>()) {
        prop_assume!(k <= n);
        let basis = SectorBasis::new(n, k).unwrap();
        let i = (pick % basis.dim() as u64) as usize;
        let state = basis.unrank(i).unwrap();
        prop_assert_eq!(state.n_particles(), k);
        prop_assert_eq!(basis.rank(&state), Some(i));
    }

    #[test]
    fn realization_is_a_homomorphism(sigma in permutation(6), seed in any::<u64>()) {
        let n = sigma.n();
        let mut images: Vec<usize> = (1..=n).collect();
        images.rotate_left((seed % n as u64) as usize);
        let tau = Permutation::from_one_line(&images).unwrap();
        let k = (seed as usize / 7) % (n + 1);
        let lhs = realize_permutation::<i64>(&sigma, k).unwrap().matmul(&realize_permutation(&tau, k).unwrap());
        prop_assert_eq!(lhs, realize_permutation::<i64>(&sigma.compose(&tau).unwrap(), k).unwrap());
        let inv = realize_permutation::<i64>(&sigma.inverse(), k).unwrap();
        prop_assert_eq!(inv, realize_permutation::<i64>(&sigma, k).unwrap().transpose());
    }

    #[test]
    fn hopping_commutes_with_every_permutation(sigma in permutation(6), k in 0usize..=6) {
        prop_assume!(k <= sigma.n());
        let h = build_hopping::<i64>(sigma.n(), k).unwrap();
        prop_assert_eq!(h.commutator(&realize_permutation(&sigma, k).unwrap()).nnz(), 0);
    }

    #[test]
    fn return_probability_bounds(n in 2usize..=50, k in 1usize..50, t in 0.0f64..100.0) {
        prop_assume!(k < n);
        let p = return_prob_kfermion::<f64>(n, k, t);
        let floor = ((n as f64 - 2.0 * k as f64) / n as f64).powi(2);
        prop_assert!(p >= floor - 1e-12 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 2..20), t_end in 0.5f64..50.0) {
        let grid = TimeGrid::new(0.0, t_end, rows.len()).unwrap();
        let r = WalkResult { grid, labels: vec!["1".into(), "2".into(), "3".into()], rows };
        let back = WalkResult::from_csv(&r.to_csv()).unwrap();
        for (a, b) in r.rows.iter().flatten().zip(back.rows.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(1e-300));
        }
        prop_assert!((back.grid.t_end - t_end).abs() <= 1e-11 * t_end);
    }

    #[test]
    fn label_round_trip(n in 1usize..=12, bits in any::<u64>()) {
        let state = OccupationState::new(bits & ((1 << n) - 1), n).unwrap();
        prop_assert_eq!(OccupationState::parse_label(&state.label(), n).unwrap(), state);
        let basis = Arc::new(SectorBasis::new(n, state.n_particles()).unwrap());
        prop_assert!(basis.rank(&state).is_some());
    }
}
