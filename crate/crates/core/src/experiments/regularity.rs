use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::random::{describe, nonlinearity, nonnegative_field, smooth_field, stream_rng};
use super::{num, Assertion, ExperimentReport, ExperimentSpec, Table};
use crate::control::{check_state_regularity, optimize, ControlProblem, OptimizeConfig, RegularityReport};
use crate::domain::{Grid, ScalarField};
use crate::error::Result;
use crate::solver::{solve_linear_rhs, Nonlinearity, SolverOptions};

const KEYS: [&str; 6] = ["count", "dim", "n", "p", "alpha_min", "alpha_max"];
const REF_TRUNCATION: &str = "truncating the state at ±‖u_d‖_∞ never increases F";
const REF_OPTIMALITY: &str = "a minimizer is not improved by truncation at ±‖u_d‖_∞ (up to optimizer slack)";
const REF_NONNEGATIVE: &str = "u_d ≥ 0 implies u* ≥ 0";
const REF_SUP: &str = "‖u*‖_∞ ≤ ‖u_d‖_∞";
const REF_SUPERSOLUTION: &str = "u_d ≤ w for a nonnegative supersolution w implies u* ≤ w";

struct Instance {
    kind: &'static str,
    g: String,
    alpha: f64,
    report: RegularityReport,
    iterations: usize,
    status: String,
}

/// Optimizes random problems and checks the state bounds of the results.
///
/// Instance 0 uses `u_d ≡ 0.5`; the others alternate between nonnegative
/// and signed smooth `u_d`. A final run takes `u_d = w`, the linear state of
/// a positive density, and compares `u*` with `w` pointwise.
///
/// Parameters: `count` (20), `dim` (2), `n` (15), `p` (2), `alpha_min`
/// (0.002), `alpha_max` (0.02).
pub fn exp_regularity_suite(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.check_keys(&KEYS)?;
    let count = spec.usize_or("count", 20)?;
    let grid = Grid::new(spec.usize_or("dim", 2)?, spec.usize_or("n", 15)?)?;
    let p = spec.f64_or("p", 2.0)?;
    let alpha_min = spec.f64_or("alpha_min", 0.002)?;
    let alpha_max = spec.f64_or("alpha_max", 0.02)?;
    let config = OptimizeConfig {
        seed: spec.seed,
        ..OptimizeConfig::default()
    };
    let seed = spec.seed;

    let instances: Vec<Instance> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let (kind, u_d, g, alpha) = if i == 0 {
                ("constant", ScalarField::constant(grid, 0.5), Nonlinearity::power(3.0)?, 0.1)
            } else {
                let g = nonlinearity(&mut rng);
                let alpha = rng.gen_range(alpha_min..=alpha_max);
                let amp = rng.gen_range(0.2..1.0);
                if i % 2 == 1 {
                    ("nonnegative", nonnegative_field(&mut rng, grid, amp), g, alpha)
                } else {
                    ("signed", smooth_field(&mut rng, grid, 3, amp), g, alpha)
                }
            };
            let prob = ControlProblem::new(g, u_d, p, alpha)?;
            let result = optimize(&prob, &config)?;
            Ok(Instance {
                kind,
                g: describe(&prob.g),
                alpha,
                report: check_state_regularity(&prob, &result)?,
                iterations: result.iterations,
                status: format!("{:?}", result.status),
            })
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(spec);
    let mut table = Table::new(
        "regularity",
        &[
            "instance", "kind", "g", "alpha", "F", "F_trunc_upper", "F_trunc_both", "F_positive_part", "u_min",
            "u_sup", "ud_sup", "slack", "state_tol", "iterations", "status",
        ],
    );
    for (i, inst) in instances.iter().enumerate() {
        let r = &inst.report;
        table.push(vec![
            i.to_string(),
            inst.kind.to_string(),
            inst.g.clone(),
            num(inst.alpha),
            num(r.f_result),
            num(r.f_truncated_upper),
            num(r.f_truncated_both),
            r.f_positive_part.map(num).unwrap_or_default(),
            num(r.u_min),
            num(r.u_sup),
            num(r.ud_sup),
            num(r.slack),
            num(r.state_tolerance),
            inst.iterations.to_string(),
            inst.status.clone(),
        ]);
    }
    report.table_data.push(table);

    let tally = |f: &dyn Fn(&RegularityReport) -> Option<bool>| {
        let checked: Vec<bool> = instances.iter().filter_map(|i| f(&i.report)).collect();
        (checked.iter().filter(|&&b| b).count(), checked.len())
    };
    for (name, reference, tolerance, (ok, total)) in [
        (
            "truncation_never_increases_F",
            REF_TRUNCATION,
            "1e-9 relative",
            tally(&|r| Some(r.truncation_never_increases)),
        ),
        ("optimality_under_truncation", REF_OPTIMALITY, "optimizer slack", tally(&|r| Some(r.optimality_ok))),
        ("nonnegative_state", REF_NONNEGATIVE, "√slack · ‖u_d‖_∞", tally(&|r| r.nonnegative_ok)),
        ("sup_bound", REF_SUP, "√slack · ‖u_d‖_∞", tally(&|r| Some(r.sup_bound_ok))),
    ] {
        report.assertions.push(Assertion::check(
            name,
            reference,
            ok == total,
            tolerance,
            format!("{ok}/{total} instances"),
        ));
    }

    // Non-constant supersolution.
    let mut rng = stream_rng(seed, u64::MAX);
    let nu = nonnegative_field(&mut rng, grid, 1.0).map(|v| v + 0.2);
    let (w, _) = solve_linear_rhs(&nu, &SolverOptions::with_tol(1e-13))?;
    let w = w.map(|v| v.max(0.0));
    let prob = ControlProblem::new(Nonlinearity::power(2.0)?, w.clone(), p, alpha_min)?;
    let result = optimize(&prob, &config)?;
    let tol = result.state_tolerance(w.max_abs());
    let excess = result
        .u_star
        .values()
        .iter()
        .zip(w.values())
        .map(|(u, w)| u - w)
        .fold(f64::NEG_INFINITY, f64::max);
    report.assertions.push(Assertion::check(
        "supersolution_bound",
        REF_SUPERSOLUTION,
        excess <= tol,
        "√slack · ‖w‖_∞",
        format!("max(u* − w) = {}, allowed {}", num(excess), num(tol)),
    ));

    report.summary = json!({
        "count": count,
        "max_slack": instances.iter().map(|i| i.report.slack).fold(0.0, f64::max),
        "supersolution_excess": excess,
        "supersolution_tv": result.tv,
    });
    Ok(report)
}
