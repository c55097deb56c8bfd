use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_cost, optimize, ControlProblem, OptimizeConfig};
use crate::domain::ScalarField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub misfit: f64,
    pub tv: f64,
    pub f: f64,
    pub sparsity: f64,
    pub iterations: usize,
    pub slack: f64,
    pub error: Option<String>,
}

/// Optimizes for each `α` (in the given order) and records the misfit
/// `‖u* − u_d‖_{L^p}`, `‖μ*‖_M` and `F`. Failed rows carry the error.
pub fn alpha_sweep(prob: &ControlProblem, alphas: &[f64], config: &OptimizeConfig) -> Result<Vec<SweepRow>> {
    if !prob.p.is_finite() {
        return Err(Error::InvalidConfig(
            "the vanishing-alpha sweep needs a finite exponent p".into(),
        ));
    }
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::InvalidConfig(format!("alpha must be positive, got {bad}")));
    }
    Ok(alphas
        .par_iter()
        .map(|&alpha| match optimize(&prob.with_alpha(alpha), config) {
            Ok(r) => SweepRow {
                alpha,
                misfit: r.misfit,
                tv: r.tv,
                f: r.f_value,
                sparsity: r.sparsity,
                iterations: r.iterations,
                slack: r.slack(),
                error: None,
            },
            Err(e) => SweepRow {
                alpha,
                misfit: f64::NAN,
                tv: f64::NAN,
                f: f64::NAN,
                sparsity: f64::NAN,
                iterations: 0,
                slack: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// Whether the misfit column never rises by more than `rel_slack` of the
/// previous row (rows ordered by decreasing `α`), on top of the optimizer
/// slack `slack · max(1, F)` of the two rows.
pub fn misfit_nonincreasing(rows: &[SweepRow], rel_slack: f64) -> bool {
    rows.windows(2).all(|w| {
        let floor = w[0].slack.max(w[1].slack) * w[0].f.abs().max(w[1].f.abs()).max(1.0);
        w[1].misfit <= w[0].misfit * (1.0 + rel_slack) + floor
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    /// `‖u_{d,n} − u_d‖_{L^p}`.
    pub perturbation_norm: f64,
    /// `F_{u_d}(μ_n*)`.
    pub f_at_perturbed_optimum: f64,
    /// `F_{u_d}(μ*)`.
    pub f_reference: f64,
    pub excess: f64,
    /// `2‖u_{d,n} − u_d‖ + slack·max(1, F)`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Optimizes with perturbed desired states `u_d + δ_n` and measures the
/// unperturbed cost of the perturbed optima against the reference optimum.
pub fn stability_run(
    prob: &ControlProblem,
    perturbations: &[ScalarField],
    config: &OptimizeConfig,
) -> Result<Vec<StabilityRow>> {
    let reference = optimize(prob, config)?;
    let f_reference = evaluate_cost(prob, &reference.mu_star)?;
    perturbations
        .par_iter()
        .map(|delta| {
            let perturbed = prob.with_desired_state(prob.u_d.add(delta));
            let result = optimize(&perturbed, config)?;
            let f = evaluate_cost(prob, &result.mu_star)?;
            let norm = delta.lp_norm(prob.p)?;
            let slack = reference.slack().max(result.slack()) * f_reference.abs().max(1.0);
            let excess = f - f_reference;
            let bound = 2.0 * norm + slack;
            Ok(StabilityRow {
                perturbation_norm: norm,
                f_at_perturbed_optimum: f,
                f_reference,
                excess,
                bound,
                within_bound: excess <= bound,
            })
        })
        .collect()
}
