use serde::{Deserialize, Serialize};

use super::{evaluate_cost, ControlProblem, OptimResult};
use crate::domain::ScalarField;
use crate::error::Result;
use crate::measures::DiscreteMeasure;
use crate::solver::{truncate_max, truncate_min};

/// State bounds of a candidate minimizer and the effect on `F` of
/// truncating its state at `±‖u_d‖_∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub slack: f64,
    pub ud_sup: f64,
    pub ud_nonnegative: bool,
    pub u_min: f64,
    pub u_sup: f64,
    /// Tolerance of the state bounds, see [`OptimResult::state_tolerance`].
    pub state_tolerance: f64,
    /// `min u* ≥ −tol`, checked only when `u_d ≥ 0`.
    pub nonnegative_ok: Option<bool>,
    /// `‖u*‖_∞ ≤ ‖u_d‖_∞ + tol`.
    pub sup_bound_ok: bool,
    pub f_result: f64,
    /// `F` after truncating the state at `‖u_d‖_∞` from above.
    pub f_truncated_upper: f64,
    /// `F` after additionally truncating at `−‖u_d‖_∞` from below.
    pub f_truncated_both: f64,
    /// `F` of the control induced by `max(u*, 0)`, when `u_d ≥ 0`.
    pub f_positive_part: Option<f64>,
    /// Truncation never raised `F` beyond `1e-9` (relative to `max(1, F)`).
    pub truncation_never_increases: bool,
    /// Truncation never lowered `F` by more than the slack.
    pub optimality_ok: bool,
    #[serde(skip)]
    pub improved_control: Option<DiscreteMeasure>,
}

impl RegularityReport {
    pub fn all_ok(&self) -> bool {
        self.sup_bound_ok
            && self.nonnegative_ok.unwrap_or(true)
            && self.truncation_never_increases
            && self.optimality_ok
    }
}

/// Checks the candidate minimizer `result` against the state bounds
/// `u* ≥ 0` (for `u_d ≥ 0`) and `‖u*‖_∞ ≤ ‖u_d‖_∞`, and re-evaluates `F`
/// after truncating the state by the constant supersolution `‖u_d‖_∞` and
/// subsolution `−‖u_d‖_∞`. A material decrease flags the result as
/// non-optimal and the truncated control is offered as an improvement.
pub fn check_state_regularity(prob: &ControlProblem, result: &OptimResult) -> Result<RegularityReport> {
    let slack = result.slack();
    let grid = prob.grid;
    let bound = prob.u_d.max_abs();
    let ud_nonnegative = prob.u_d.values().iter().all(|&v| v >= 0.0);
    let u = &result.u_star;
    let u_min = u.min();
    let u_sup = u.max_abs();
    let state_tolerance = result.state_tolerance(bound);

    let f_result = result.f_value;
    let upper = ScalarField::constant(grid, bound);
    let lower = ScalarField::constant(grid, -bound);
    let (z_upper, mu_upper) = truncate_min(u, &upper, &prob.g)?;
    let f_truncated_upper = evaluate_cost(prob, &mu_upper)?;
    let (_, mu_both) = truncate_max(&z_upper, &lower, &prob.g)?;
    let f_truncated_both = evaluate_cost(prob, &mu_both)?;

    let f_positive_part = if ud_nonnegative {
        let (_, mu_pos) = truncate_max(u, &ScalarField::zeros(grid), &prob.g)?;
        Some(evaluate_cost(prob, &mu_pos)?)
    } else {
        None
    };

    let scale = f_result.abs().max(1.0);
    let candidates = [Some(f_truncated_upper), Some(f_truncated_both), f_positive_part];
    let truncation_never_increases = candidates
        .iter()
        .flatten()
        .all(|&f| f <= f_result + 1e-9 * scale);
    let best_truncated = candidates.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let optimality_ok = f_result - best_truncated <= slack * scale;
    let improved_control = (!optimality_ok).then(|| {
        if f_truncated_both <= f_truncated_upper {
            mu_both.clone()
        } else {
            mu_upper.clone()
        }
    });

    Ok(RegularityReport {
        slack,
        ud_sup: bound,
        ud_nonnegative,
        u_min,
        u_sup,
        state_tolerance,
        nonnegative_ok: ud_nonnegative.then_some(u_min >= -state_tolerance),
        sup_bound_ok: u_sup <= bound + state_tolerance,
        f_result,
        f_truncated_upper,
        f_truncated_both,
        f_positive_part,
        truncation_never_increases,
        optimality_ok,
        improved_control,
    })
}
