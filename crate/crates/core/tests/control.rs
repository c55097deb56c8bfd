mod common;

use measure_control::control::*;
use measure_control::experiments::random::{smooth_field, stream_rng};
use measure_control::solver::SolverOptions;
use measure_control::{DiscreteMeasure, Error, Grid, Nonlinearity, ScalarField};
use proptest::prelude::*;

fn target(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x| 0.3 * (3.0 * x[0]).sin() * x[1] + 0.1 * x[0])
}

/// Central difference of the (smoothed) misfit along `v`, compared with
/// `⟨φ, v⟩_h`.
fn gradient_error(prob: &ControlProblem, smoothing: Option<f64>, c: &ScalarField, v: &ScalarField) -> f64 {
    let misfit = prob.misfit(smoothing).unwrap();
    let j = |d: &ScalarField| {
        let m = DiscreteMeasure::from_density(d.clone());
        let u = measure_control::solver::solve_semilinear(&prob.grid, &prob.g, &m, prob.solver.tol).unwrap().0;
        misfit.value(&u.sub(&prob.u_d))
    };
    let eps = 1e-4;
    let fd = (j(&c.add(&v.scale(eps))) - j(&c.sub(&v.scale(eps)))) / (2.0 * eps);
    let phi = adjoint_gradient(prob, &DiscreteMeasure::from_density(c.clone()), smoothing).unwrap();
    let exact = phi.inner(v);
    (fd - exact).abs() / exact.abs()
}

#[test]
fn adjoint_matches_finite_differences() {
    let grid = Grid::new(2, 17).unwrap();
    let mut rng = stream_rng(11, 0);
    let c = smooth_field(&mut rng, grid, 4, 3.0);
    let v = smooth_field(&mut rng, grid, 4, 1.0);
    for (g, p, smoothing) in [
        (Nonlinearity::power(3.0).unwrap(), 2.0, None),
        (Nonlinearity::linear(2.0).unwrap(), 3.0, None),
        (Nonlinearity::power(2.0).unwrap(), 1.5, None),
        (Nonlinearity::power(2.0).unwrap(), 1.0, Some(0.05)),
        (Nonlinearity::power(2.0).unwrap(), f64::INFINITY, Some(0.05)),
    ] {
        let prob = ControlProblem::new(g, target(grid), p, 0.01)
            .unwrap()
            .with_solver(SolverOptions::with_tol(1e-12));
        let err = gradient_error(&prob, smoothing, &c, &v);
        assert!(err < 1e-5, "p = {p}: relative error {err}");
    }
}

#[test]
fn optimizer_contracts() {
    let grid = Grid::new(2, 15).unwrap();
    let prob = ControlProblem::new(Nonlinearity::power(3.0).unwrap(), target(grid), 2.0, 0.01).unwrap();
    let result = optimize(&prob, &OptimizeConfig::default()).unwrap();
    let f0 = prob.cost_at_zero();
    assert!(result.f_value <= f0);
    assert!(result.tv <= f0 / prob.alpha + 1e-9);
    assert!(result.tv > 0.0);
    for w in result.history.windows(2) {
        assert!(w[1].f <= w[0].f);
    }
    let recomputed = evaluate_cost(&prob, &result.mu_star).unwrap();
    assert!((recomputed - result.f_value).abs() <= 1e-9 * result.f_value);
    assert!(result.sparsity > 0.0);
}

#[test]
fn large_alpha_gives_the_zero_control() {
    let grid = Grid::new(2, 11).unwrap();
    let prob = ControlProblem::new(Nonlinearity::power(3.0).unwrap(), target(grid), 2.0, 10.0).unwrap();
    let result = optimize(&prob, &OptimizeConfig::default()).unwrap();
    assert_eq!(result.tv, 0.0);
    assert_eq!(result.status, OptimStatus::Converged);
    assert_eq!(result.f_value, prob.cost_at_zero());
}

#[test]
fn zero_target_gives_exact_zeros() {
    let grid = Grid::new(2, 11).unwrap();
    let prob = ControlProblem::new(Nonlinearity::power(2.0).unwrap(), ScalarField::zeros(grid), 2.0, 0.1).unwrap();
    let result = optimize(&prob, &OptimizeConfig::default()).unwrap();
    assert_eq!(result.u_star.max_abs(), 0.0);
    assert_eq!(result.control.max_abs(), 0.0);
    let report = check_state_regularity(&prob, &result).unwrap();
    assert!(report.all_ok());
}

#[test]
fn nonsmooth_exponents_optimize_with_smoothing() {
    let grid = Grid::new(2, 11).unwrap();
    for p in [1.0, f64::INFINITY] {
        let prob = ControlProblem::new(Nonlinearity::power(2.0).unwrap(), target(grid), p, 0.005).unwrap();
        let result = optimize(&prob, &OptimizeConfig::default()).unwrap();
        assert!(result.f_value <= prob.cost_at_zero());
    }
}

#[test]
fn cost_of_unsolvable_datum_is_unavailable() {
    let grid = Grid::new(2, 7).unwrap();
    let prob = ControlProblem::new(Nonlinearity::zero(), target(grid), 2.0, 0.1).unwrap();
    let outside = DiscreteMeasure::dirac(2, &[0.5, 1.2], 1.0).unwrap();
    assert!(matches!(evaluate_cost(&prob, &outside), Err(Error::CostUnavailable(_))));
}

#[test]
fn sweep_requires_a_finite_exponent() {
    let grid = Grid::new(2, 7).unwrap();
    let prob = ControlProblem::new(Nonlinearity::zero(), target(grid), f64::INFINITY, 0.1).unwrap();
    assert!(matches!(
        alpha_sweep(&prob, &[0.1], &OptimizeConfig::default()),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn stability_in_the_target() {
    let grid = Grid::new(2, 11).unwrap();
    let prob = ControlProblem::new(Nonlinearity::power(2.0).unwrap(), target(grid), 2.0, 0.01).unwrap();
    let mut rng = stream_rng(5, 0);
    let perturbations: Vec<ScalarField> =
        [0.1, 0.03, 0.01].iter().map(|&s| smooth_field(&mut rng, grid, 3, s)).collect();
    let rows = stability_run(&prob, &perturbations, &OptimizeConfig::default()).unwrap();
    for r in &rows {
        assert!(r.within_bound, "{r:?}");
    }
}

proptest! {
    #[test]
    fn prox_is_soft_thresholding(v in proptest::collection::vec(-10.0f64..10.0, 9), t in 0.0f64..5.0) {
        let grid = Grid::new(2, 3).unwrap();
        let f = ScalarField::from_values(grid, v).unwrap();
        let out = prox_l1(&f, t * grid.cell_volume());
        for (x, y) in f.values().iter().zip(out.values()) {
            prop_assert!(y.abs() <= x.abs());
            prop_assert!(y * x >= 0.0);
            if x.abs() > t {
                prop_assert!((x.abs() - y.abs() - t).abs() < 1e-12);
            } else {
                prop_assert_eq!(*y, 0.0);
            }
        }
    }

    #[test]
    fn prox_minimizes_its_objective(v in proptest::collection::vec(-10.0f64..10.0, 4), t in 0.0f64..5.0, d in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let grid = Grid::new(2, 2).unwrap();
        let f = ScalarField::from_values(grid, v).unwrap();
        let thr = t * grid.cell_volume();
        // In node units the threshold is `t`.
        let obj = |c: &ScalarField| {
            c.values().iter().zip(f.values()).map(|(a, b)| 0.5 * (a - b).powi(2) + t * a.abs()).sum::<f64>()
        };
        let star = prox_l1(&f, thr);
        let other = star.add(&ScalarField::from_values(grid, d).unwrap());
        prop_assert!(obj(&star) <= obj(&other) + 1e-12);
    }
}
