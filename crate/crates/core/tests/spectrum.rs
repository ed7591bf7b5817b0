use permwalk::hamiltonians::build_hopping;
use permwalk::limits::binomial;
use permwalk::permgroup::realize_permutation;
use permwalk::spectral::{
    analytic_spectrum, eigenvectors_high, eigenvectors_low, eigenvectors_low_cyclic, family_rank, max_cross_overlap,
    mode_annihilation, mode_creation, mode_number_operator, numeric_spectrum, orthonormalize,
};
use permwalk::verify::{eigen_families, mode_car_relations, mode_identities};
use permwalk::{ComplexOperator, Permutation, SectorBasis, SpectrumSummary, Wave, C64};

#[test]
fn two_level_spectrum_up_to_eight_sites() {
    for n in 2..=8 {
        for k in 1..n {
            let numeric = numeric_spectrum(&build_hopping::<f64>(n, k).unwrap(), k).unwrap();
            let analytic = analytic_spectrum(n, k).unwrap();
            assert!(numeric.matches(&analytic, 1e-9), "N={n} k={k}: {numeric:?}");
            assert_eq!(analytic.dim() as u128, binomial(n, k));
        }
    }
}

#[test]
fn summary_round_trips_through_json() {
    let s = analytic_spectrum(7, 3).unwrap();
    let back: SpectrumSummary = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn fourier_modes() {
    assert!(mode_car_relations(4).unwrap() < 1e-13);
    let (identity, commutant) = mode_identities(5).unwrap();
    assert!(identity < 1e-12);
    assert!(commutant < 1e-12);
    // A† is the adjoint of A between neighbouring sectors
    let (n, k) = (5, 2);
    let upper = SectorBasis::new(n, k).unwrap();
    let lower = SectorBasis::new(n, k - 1).unwrap();
    for alpha in 1..=n {
        let a = mode_annihilation::<f64>(alpha, &upper).unwrap();
        let ad = mode_creation::<f64>(alpha, &lower).unwrap();
        assert!(a.adjoint().max_abs_diff(&ad) < 1e-15);
    }
    let number = mode_number_operator::<f64>(&upper).unwrap();
    assert!(number.max_abs_diff(&ComplexOperator::identity(upper.dim()).scale(C64::new(2.0, 0.0))) < 1e-13);
}

#[test]
fn family_invariants() {
    for c in eigen_families(2..=7).unwrap() {
        assert!(c.passed(), "{c}");
    }
}

#[test]
fn family_residuals_at_six_sites() {
    let n = 6;
    for k in 1..n {
        let h = build_hopping::<f64>(n, k).unwrap();
        for v in eigenvectors_high::<f64>(n, k).unwrap() {
            assert!(v.eigen_residual(&h, (n - k) as f64) < 1e-12);
        }
        for v in eigenvectors_low::<f64>(n, k).unwrap().iter().chain(&eigenvectors_low_cyclic::<f64>(n, k).unwrap()) {
            assert!(v.eigen_residual(&h, -(k as f64)) < 1e-12);
        }
    }
}

#[test]
fn transpositions_map_families_into_their_eigenspace() {
    for n in 3..=6 {
        for k in 1..n {
            let h = build_hopping::<f64>(n, k).unwrap();
            for (i, j) in [(1, 2), (1, n), (2, n - 1)] {
                if i == j {
                    continue;
                }
                let r = realize_permutation::<f64>(&Permutation::transposition(i, j, n).unwrap(), k).unwrap();
                for (family, e) in
                    [(eigenvectors_high::<f64>(n, k).unwrap(), (n - k) as f64), (eigenvectors_low(n, k).unwrap(), -(k as f64))]
                {
                    for v in family {
                        assert!(v.apply(&r).unwrap().eigen_residual(&h, e) < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn families_are_not_orthonormal_within_a_level() {
    let low = eigenvectors_low::<f64>(4, 1).unwrap();
    assert!((low[0].inner(&low[1]).re - 0.5).abs() < 1e-15);
    let q = orthonormalize(&low, 1e-12);
    assert_eq!(q.len(), 3);
    assert_eq!(family_rank(&q, 1e-10), 3);
    let high = eigenvectors_high::<f64>(4, 1).unwrap();
    assert!(max_cross_overlap(&q, &high) < 1e-15);
}

#[test]
fn two_fermion_start_decomposes_into_levels() {
    // |1,2⟩ has weight 2/N in the high level and 1 - 2/N in the low one
    let n = 7;
    let basis = std::sync::Arc::new(SectorBasis::new(n, 2).unwrap());
    let start = Wave::basis_ket(basis, &[1, 2]).unwrap();
    let high = orthonormalize(&eigenvectors_high::<f64>(n, 2).unwrap(), 1e-12);
    let weight: f64 = high.iter().map(|v| v.inner(&start).norm_sqr()).sum();
    assert!((weight - 2.0 / n as f64).abs() < 1e-13);
}
