use serde_json::json;

use super::{num, Assertion, ExperimentReport, ExperimentSpec, Table};
use crate::control::{cost_parts, ControlProblem};
use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::solver::{solve_semilinear_rhs, Nonlinearity, SolverOptions};

const KEYS: [&str; 6] = ["p", "theta", "dim", "n", "density", "alpha"];
const REFERENCE: &str = "(F(μ) + F(θμ))/2 < F((1+θ)/2 μ) for g(t) = |t|^{p−1}t, u_d = u(μ)";

/// Midpoint test of convexity of `F` along the ray `s ↦ sμ` for a constant
/// density `μ`, with `u_d` the state of `μ` and `g(t) = |t|^{p−1}t`.
///
/// Parameters: `p` (2), `theta` (2), `dim` (2), `n` (31), `density` (1),
/// `alpha` (0.1).
pub fn exp_nonconvexity(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.check_keys(&KEYS)?;
    let p = spec.f64_or("p", 2.0)?;
    let theta = spec.f64_or("theta", 2.0)?;
    let dim = spec.usize_or("dim", 2)?;
    let n = spec.usize_or("n", 31)?;
    let density = spec.f64_or("density", 1.0)?;
    let alpha = spec.f64_or("alpha", 0.1)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if !(theta >= 0.0) {
        return Err(Error::InvalidConfig(format!("theta must be nonnegative, got {theta}")));
    }
    let grid = Grid::new(dim, n)?;
    let mut report = ExperimentReport::new(spec);

    if p == 1.0 {
        report.assertions.push(Assertion::not_applicable(
            "midpoint_inequality",
            REFERENCE,
            "p = 1 makes g linear, so F is convex along the ray".into(),
        ));
        report.summary = json!({"p": p});
        return Ok(report);
    }

    let g = Nonlinearity::power(p)?;
    let opts = SolverOptions::with_tol(1e-12);
    let mu = DiscreteMeasure::from_density(ScalarField::constant(grid, density));
    let (u_d, _) = solve_semilinear_rhs(&g, &ScalarField::constant(grid, density), &opts, None)?;
    let prob = ControlProblem::new(g, u_d, p, alpha)?.with_solver(opts);

    let mid = 0.5 * (1.0 + theta);
    let parts = [1.0, theta, mid]
        .iter()
        .map(|&s| cost_parts(&prob, &mu.scale(s)))
        .collect::<Result<Vec<_>>>()?;
    let (f1, f_theta, f_mid) = (parts[0].total, parts[1].total, parts[2].total);
    let average = 0.5 * (f1 + f_theta);
    let margin = f_mid - average;

    let mut table = Table::new("nonconvexity", &["scale", "misfit", "tv", "F"]);
    for (s, c) in [1.0, theta, mid].iter().zip(&parts) {
        table.push(vec![num(*s), num(c.misfit), num(c.tv), num(c.total)]);
    }
    report.table_data.push(table);

    let detail = format!("F(μ) = {f1}, F(θμ) = {f_theta}, F(mid) = {f_mid}, margin = {margin:e}");
    if theta == 1.0 || density == 0.0 {
        report.assertions.push(Assertion::check(
            "degenerate_equality",
            REFERENCE,
            margin.abs() <= 1e-12 * f_mid.abs().max(1.0),
            "1e-12 relative",
            detail,
        ));
    } else {
        report.assertions.push(Assertion::check(
            "midpoint_inequality",
            REFERENCE,
            margin > 1e-6,
            "margin > 1e-6",
            detail,
        ));
    }
    report.summary = json!({
        "p": p,
        "theta": theta,
        "F_mu": f1,
        "F_theta_mu": f_theta,
        "F_midpoint": f_mid,
        "average": average,
        "margin": margin,
    });
    Ok(report)
}
