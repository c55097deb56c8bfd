use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use measure_control::control::*;
use measure_control::experiments::random::{nonlinearity, nonnegative_field, smooth_field, stream_rng};
use measure_control::experiments::{run_experiment, ExperimentReport, ExperimentSpec};
use measure_control::solver::*;
use measure_control::{Atom, DiscreteMeasure, Grid, Nonlinearity, ScalarField};

fn verdict(criterion: usize, name: &str, ok: bool, detail: String) {
    println!("{} criterion {criterion} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} ({name}) failed: {detail}");
}

fn experiment_verdict(criterion: usize, report: &ExperimentReport, started: Instant) {
    let failed: Vec<&str> =
        report.assertions.iter().filter(|a| !a.passed()).map(|a| a.name.as_str()).collect();
    let detail = if failed.is_empty() {
        format!("{} assertions hold, {:.1} s", report.assertions.len(), started.elapsed().as_secs_f64())
    } else {
        format!("failing: {}\n{}", failed.join(", "), report.render())
    };
    verdict(criterion, &report.name, failed.is_empty(), detail);
}

#[test]
fn criterion_01_absorption_estimate() {
    let started = Instant::now();
    let grid = Grid::new(2, 65).unwrap();
    let excess: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(2024, i);
            let g = nonlinearity(&mut rng);
            let atoms = (0..rng.gen_range(1..5))
                .map(|_| Atom {
                    x: [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95), 0.0],
                    w: rng.gen_range(-5.0..5.0),
                })
                .collect();
            let mu = DiscreteMeasure::new(2, atoms, Some(smooth_field(&mut rng, grid, 4, 20.0))).unwrap();
            let (u, _) = solve_semilinear(&grid, &g, &mu, 1e-10).unwrap();
            absorption_l1(&g, &u) - mu.tv_norm()
        })
        .collect();
    let worst = excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    verdict(
        1,
        "absorption ‖g(u)‖_L1 ≤ ‖μ‖",
        worst <= 1e-8,
        format!("max(‖g(u)‖_L1 − ‖μ‖) = {worst:e} over 50 solves, {:.1} s", started.elapsed().as_secs_f64()),
    );
}

#[test]
fn criterion_02_second_order_linear_solver() {
    let error = |n: usize| {
        let grid = Grid::new(2, n).unwrap();
        let exact = ScalarField::from_fn(grid, |x| (PI * x[0]).sin() * (PI * x[1]).sin());
        let (u, _) = solve_linear_rhs(&exact.scale(2.0 * PI * PI), &SolverOptions::with_tol(1e-11)).unwrap();
        u.sub(&exact).max_abs()
    };
    let (e31, e63) = (error(31), error(63));
    let ratio = e31 / e63;
    verdict(2, "O(h²) manufactured solution", ratio >= 3.5, format!("errors {e31:e}, {e63:e}, ratio {ratio:.3}"));
}

#[test]
fn criterion_03_weak_maximum_principle() {
    let grid = Grid::new(2, 33).unwrap();
    let minima: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(77, i);
            let g = nonlinearity(&mut rng);
            let amplitude = rng.gen_range(1.0..100.0);
            let rhs = nonnegative_field(&mut rng, grid, amplitude);
            solve_semilinear_rhs(&g, &rhs, &SolverOptions::default(), None).unwrap().0.min()
        })
        .collect();
    let lowest = minima.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(3, "μ ≥ 0 implies u ≥ 0", lowest >= -1e-12, format!("min u = {lowest:e} over 50 solves"));
}

#[test]
fn criterion_04_truncation_inequalities() {
    let started = Instant::now();
    let report = run_experiment(&ExperimentSpec::new("exp_truncation_suite").with_seed(42)).unwrap();
    experiment_verdict(4, &report, started);
}

#[test]
fn criterion_05_dirac_collapse_limits() {
    let started = Instant::now();
    let report = run_experiment(
        &ExperimentSpec::new("exp_dirac_collapse").with_param("subcritical_q", serde_json::Value::Null),
    )
    .unwrap();
    experiment_verdict(5, &report, started);
}

#[test]
fn criterion_06_nonconvexity() {
    let started = Instant::now();
    let report = run_experiment(&ExperimentSpec::new("exp_nonconvexity")).unwrap();
    experiment_verdict(6, &report, started);
}

#[test]
fn criterion_07_optimizer_contracts() {
    let started = Instant::now();
    let grid = Grid::new(2, 17).unwrap();
    let u_d = ScalarField::from_fn(grid, |x| 0.3 * (3.0 * x[0]).sin() * x[1] + 0.1 * x[0]);
    let prob = ControlProblem::new(Nonlinearity::power(3.0).unwrap(), u_d, 2.0, 0.01)
        .unwrap()
        .with_solver(SolverOptions::with_tol(1e-12));
    let result = optimize(&prob, &OptimizeConfig::default()).unwrap();
    let f0 = prob.cost_at_zero();
    let descent = result.f_value <= f0;
    let tv_bound = result.tv <= f0 / prob.alpha + 1e-9;
    let monotone = result.history.windows(2).all(|w| w[1].f <= w[0].f);

    let mut rng = stream_rng(3, 0);
    let c = smooth_field(&mut rng, grid, 4, 3.0);
    let v = smooth_field(&mut rng, grid, 4, 1.0);
    let j = |d: &ScalarField| {
        let (u, _) = solve_semilinear(&grid, &prob.g, &DiscreteMeasure::from_density(d.clone()), 1e-12).unwrap();
        u.sub(&prob.u_d).lp_norm(2.0).unwrap()
    };
    let eps = 1e-4;
    let fd = (j(&c.add(&v.scale(eps))) - j(&c.sub(&v.scale(eps)))) / (2.0 * eps);
    let adjoint = adjoint_gradient(&prob, &DiscreteMeasure::from_density(c), None).unwrap().inner(&v);
    let rel = (fd - adjoint).abs() / adjoint.abs();

    verdict(
        7,
        "optimizer contracts and adjoint gradient",
        descent && tv_bound && monotone && rel <= 1e-5,
        format!(
            "F = {} ≤ F(0) = {f0}: {descent}; ‖μ*‖ = {} ≤ {}: {tv_bound}; history monotone: {monotone}; \
             gradient relative error {rel:e}; {:.1} s",
            result.f_value,
            result.tv,
            f0 / prob.alpha,
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_regularity_suite() {
    let started = Instant::now();
    let report = run_experiment(&ExperimentSpec::new("exp_regularity_suite").with_seed(42)).unwrap();
    experiment_verdict(8, &report, started);
}

#[test]
fn criterion_09_reduced_limit_lower_semicontinuity() {
    let report = run_experiment(&ExperimentSpec::new("exp_dirac_collapse")).unwrap();
    let checks: Vec<_> = report.assertions.iter().filter(|a| a.name.starts_with("reduced_limit_tv_lsc")).collect();
    let ok = checks.len() == 2 && checks.iter().all(|a| a.passed());
    let detail = checks.iter().map(|a| format!("{}: {}", a.name, a.detail)).collect::<Vec<_>>().join("; ");
    verdict(9, "tv(μ#) ≤ min tv(μ_k) + 5%", ok, detail);
}

#[test]
fn criterion_10_vanishing_alpha_sweep() {
    let started = Instant::now();
    let grid = Grid::new(2, 31).unwrap();
    let u_d = ScalarField::from_fn(grid, |x| (PI * x[0]).sin() * (2.0 * PI * x[1]).sin() + 0.5 * x[0] * x[1]);
    let prob = ControlProblem::new(Nonlinearity::power(3.0).unwrap(), u_d, 2.0, 1.0).unwrap();
    let alphas: Vec<f64> = (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let rows = alpha_sweep(&prob, &alphas, &OptimizeConfig::default()).unwrap();
    let ok = rows.iter().all(|r| r.error.is_none()) && misfit_nonincreasing(&rows, 0.05);
    let misfits: Vec<String> = rows.iter().map(|r| format!("{:.4e}", r.misfit)).collect();
    verdict(
        10,
        "misfit nonincreasing as α ↓ 0",
        ok,
        format!("misfits [{}], {:.1} s", misfits.join(", "), started.elapsed().as_secs_f64()),
    );
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut compared = 0;
    for (name, params) in [
        ("exp_truncation_suite", vec![]),
        ("exp_regularity_suite", vec![("count", 8)]),
    ] {
        let run = |tag: &str| {
            let mut spec = ExperimentSpec::new(name).with_seed(42);
            for (k, v) in &params {
                spec = spec.with_param(k, *v);
            }
            let out = dir.path().join(format!("{name}_{tag}"));
            run_experiment(&spec).unwrap().write(&out).unwrap();
            out
        };
        let (a, b) = (run("a"), run("b"));
        let mut files: Vec<_> = std::fs::read_dir(&a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .filter(|f| f.to_string_lossy().ends_with(".csv"))
            .collect();
        files.sort();
        for f in files {
            identical &= std::fs::read(a.join(&f)).unwrap() == std::fs::read(b.join(&f)).unwrap();
            compared += 1;
        }
    }
    verdict(
        11,
        "seeded runs reproduce CSV bytes",
        identical && compared > 0,
        format!("{compared} CSV files compared, identical: {identical}"),
    );
}
