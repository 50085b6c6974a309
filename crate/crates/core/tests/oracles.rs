//! Cross-checks of the solver and the norms against independent closed forms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shear_decay::harness::{efold_of_series, measure_efold, Efold};
use shear_decay::norms::{verify_prop_subelliptic, SpaceTimeField};
use shear_decay::oracle::{compact_bump_data, couette_exact_norm, CouetteSpec};
use shear_decay::solver::{build_mode_operator, wavenumber};
use shear_decay::{
    evolve, BoundaryCondition, DiffusionOperator, Error, EvolveOptions, Grid, ModeField, ShearProfile, YScheme,
};

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn hminus1_h1_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let op = DiffusionOperator::build(Grid::new(BoundaryCondition::Dirichlet, 96).unwrap()).unwrap();
    let grid = op.grid();
    for nu in [1e-4, 1e-2, 1.0] {
        for _ in 0..50 {
            let g = random_vector(&mut rng, 96);
            let v = random_vector(&mut rng, 96);
            let pairing = grid.inner(&g, &v).norm();
            let h1 = (nu * grid.gradient_norm_sqr(&v)).sqrt();
            let hm1 = op.hminus1y_norm(&g, nu).unwrap();
            assert!(pairing <= hm1 * h1 * (1.0 + 1e-12), "{pairing} > {hm1} * {h1}");
        }
    }
}

/// Largest eigenvalue of the Hermitian part bounds the spectral abscissa.
fn hermitian_part_top(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn dirichlet_mode_operators_are_dissipative() {
    let op = DiffusionOperator::build(Grid::new(BoundaryCondition::Dirichlet, 64).unwrap()).unwrap();
    for name in ["couette", "poiseuille", "kolmogorov", "flat:2"] {
        let profile = ShearProfile::builtin(name).unwrap();
        for include_x in [false, true] {
            let lk = build_mode_operator(&profile, &op, wavenumber(2), 1e-3, include_x).unwrap();
            let top = hermitian_part_top(&lk.to_dense());
            assert!(top < 0.0, "{name}: {top}");
        }
    }
}

#[test]
fn analytic_crossover_ratios() {
    // single Fourier mode k = 1 at eta = 0 of the exact solution formula
    let nu: f64 = 1e-4;
    let grid = Grid::on_interval(BoundaryCondition::Periodic, 256, -8.0, 8.0).unwrap();
    let spec = CouetteSpec::new(grid.clone(), compact_bump_data(&grid, 0), 1.0, nu, false).unwrap();
    let t_star = nu.powf(-1.0 / 3.0);
    assert!((spec.multiplier(0.0, 0.1 * t_star) - 0.999_666_722).abs() < 1e-9);
    assert!((spec.multiplier(0.0, 3.0 * t_star) - 1.234_098_04e-4).abs() < 1e-12);
}

#[test]
fn couette_efold_matches_exact_norm_root() {
    let nu = 1e-3;
    let grid = Grid::on_interval(BoundaryCondition::Periodic, 2048, -8.0, 8.0).unwrap();
    let data = compact_bump_data(&grid, 0);
    let spec = CouetteSpec::new(grid.clone(), data.clone(), wavenumber(1), nu, false).unwrap();

    // bisect the exact norm for the 1/e crossing
    let target = (-1.0f64).exp() * couette_exact_norm(&spec, 0.0).unwrap();
    let (mut lo, mut hi) = (0.0, 20.0);
    assert!(couette_exact_norm(&spec, hi).unwrap() < target);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if couette_exact_norm(&spec, mid).unwrap() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let exact_tau = 0.5 * (lo + hi);

    let field = ModeField::new(grid, vec![1], vec![data]).unwrap();
    let mut opts = EvolveOptions::new(20.0, 2e-3);
    opts.scheme = YScheme::Spectral;
    opts.sample_every = 5;
    let traj = evolve(&field, &ShearProfile::builtin("couette").unwrap(), nu, &opts).unwrap();
    let tau = measure_efold(&traj).time().unwrap();
    // sampling every 1e-2 resolves the crossing far better than the 2% budget
    assert!((tau - exact_tau).abs() < 1e-4 * exact_tau, "{tau} vs {exact_tau}");
}

#[test]
fn zero_data_has_no_efold() {
    let times: Vec<f64> = (0..10).map(f64::from).collect();
    assert!(matches!(efold_of_series(&times, &[0.0; 10]), Efold::Incomplete { .. }));
}

#[test]
fn subelliptic_estimate_on_heat_and_zero_fields() {
    let nu = 1e-2;
    let grid = Grid::new(BoundaryCondition::Dirichlet, 64).unwrap();
    let op = DiffusionOperator::build(grid.clone()).unwrap();
    let basis = op.eigenbasis();
    // slowest mode: the eigenvalue closest to zero
    let j = (0..basis.values.len()).max_by(|&a, &b| basis.values[a].total_cmp(&basis.values[b])).unwrap();
    let first: Vec<Complex64> = basis.vectors[j].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let lambda = basis.values[j];
    // separable heat solution e^{nu lambda t} phi_1 in one x-mode
    let u = SpaceTimeField::separable(
        grid.clone(),
        vec![1],
        vec![first],
        (0..=100).map(|i| i as f64 * 0.5).collect(),
        |t| (nu * lambda * t).exp(),
    )
    .unwrap();
    let report = verify_prop_subelliptic(&u, &ShearProfile::still(), nu).unwrap();
    assert!(report.ratio.is_finite() && report.ratio > 0.0);

    let zero = SpaceTimeField::separable(grid, vec![1], vec![vec![Complex64::default(); 64]], vec![0.0, 1.0], |_| 1.0)
        .unwrap();
    assert_eq!(
        verify_prop_subelliptic(&zero, &ShearProfile::still(), nu).unwrap_err(),
        Error::VanishingRhs
    );
}
