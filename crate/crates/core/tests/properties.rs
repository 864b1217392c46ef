use num_complex::Complex64;
use pairquench::hubbard::{
    build_h0, build_hamiltonian, expectation, mean_distance, pair_distribution, Boundary,
    ModelParams, TwoBosonBasis,
};
use pairquench::linalg::StateVector;
use pairquench::propagate::{propagate, Backend, ChebyshevPropagator, SpectralPropagator};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = ModelParams> {
    (
        2usize..9,
        0.0..2.0f64,
        -8.0..8.0f64,
        -8.0..8.0f64,
        -1.0..1.0f64,
    )
        .prop_map(|(sites, hopping, onsite, nearest, field)| ModelParams {
            sites,
            hopping,
            onsite,
            nearest,
            field,
            boundary: Boundary::Open,
        })
}

/// Deterministic pseudo-random normalized state from a seed vector.
fn state_from(dim: usize, seed: &[f64]) -> StateVector {
    let amps: Vec<Complex64> = (0..dim)
        .map(|k| {
            let a = seed[k % seed.len()];
            Complex64::new(
                (a + k as f64 * 0.37).sin(),
                (a * 1.7 - k as f64 * 0.11).cos(),
            )
        })
        .collect();
    StateVector::new(amps).normalized().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_and_unrank_are_inverse(sites in 2usize..60) {
        let basis = TwoBosonBasis::new(sites).unwrap();
        prop_assert_eq!(basis.dim(), sites * (sites + 1) / 2);
        for k in 0..basis.dim() {
            let (i, j) = basis.unrank(k).unwrap();
            prop_assert!(1 <= i && i <= j && j <= sites);
            prop_assert_eq!(basis.rank(i, j), Some(k));
            prop_assert_eq!(basis.rank(j, i), Some(k));
        }
        prop_assert_eq!(basis.unrank(basis.dim()), None);
    }

    #[test]
    fn hamiltonian_is_symmetric(p in model()) {
        let basis = TwoBosonBasis::new(p.sites).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        prop_assert!(h.is_symmetric());
        for r in 0..h.dim() {
            prop_assert!(h.row_nnz(r) <= 5);
        }
    }

    #[test]
    fn separation_distribution_sums_to_one(p in model(), seed in prop::collection::vec(-3.0..3.0f64, 1..8)) {
        let basis = TwoBosonBasis::new(p.sites).unwrap();
        let psi = state_from(basis.dim(), &seed);
        let dist = pair_distribution(&basis, &psi).unwrap();
        prop_assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let rbar = mean_distance(&basis, &psi).unwrap();
        prop_assert!(rbar >= 0.0 && rbar <= (p.sites - 1) as f64 + 1e-12);
    }

    #[test]
    fn evolution_is_unitary_and_conserves_energy(
        p in model(),
        seed in prop::collection::vec(-3.0..3.0f64, 1..8),
        t in 0.0..60.0f64,
    ) {
        let basis = TwoBosonBasis::new(p.sites).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let psi0 = state_from(basis.dim(), &seed);
        let e0 = expectation(&h, &psi0).unwrap();
        let psi = propagate(&h, &psi0, t, Backend::Chebyshev).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-8);
        prop_assert!((expectation(&h, &psi).unwrap() - e0).abs() < 1e-8);
    }

    #[test]
    fn field_free_energy_is_real(p in model(), seed in prop::collection::vec(-3.0..3.0f64, 1..8)) {
        let basis = TwoBosonBasis::new(p.sites).unwrap();
        let h0 = build_h0(&p, &basis).unwrap();
        let psi = state_from(basis.dim(), &seed);
        prop_assert!(expectation(&h0, &psi).is_ok());
    }
}

#[test]
fn polynomial_and_spectral_agree_at_long_times() {
    let p = ModelParams {
        sites: 15,
        hopping: 1.0,
        onsite: -6.24,
        nearest: -6.24,
        field: -0.097120,
        boundary: Boundary::Open,
    };
    let basis = TwoBosonBasis::new(p.sites).unwrap();
    let h = build_hamiltonian(&p, &basis).unwrap();
    let psi0 = state_from(basis.dim(), &[0.3, -1.2, 2.0]);
    let spectral = SpectralPropagator::new(&h).unwrap();
    let reference = spectral.state_at(&spectral.coefficients(&psi0), 800.0);
    let mut amps = psi0.amplitudes().to_vec();
    let prop = ChebyshevPropagator::new(&h);
    for _ in 0..800 {
        prop.step(&mut amps, 1.0).unwrap();
    }
    let stepped = StateVector::new(amps);
    assert!(
        stepped.distance(&reference) < 1e-6,
        "{}",
        stepped.distance(&reference)
    );
    let single = propagate(&h, &psi0, 800.0, Backend::Chebyshev).unwrap();
    assert!(single.distance(&reference) < 1e-6);
}
