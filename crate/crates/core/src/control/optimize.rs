use serde::{Deserialize, Serialize};

use super::{adjoint_from_state, prox_l1, ControlProblem};
use crate::domain::ScalarField;
use crate::error::Result;
use crate::measures::DiscreteMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeConfig {
    pub max_iter: usize,
    /// First trial step, in the `L²(h)` metric of control densities.
    pub step0: f64,
    /// Step reduction factor of the backtracking loop, in `(0, 1)`.
    pub backtrack: f64,
    /// Smoothing width for `p ∈ {1, ∞}`; `None` uses `10⁻³ ‖u_d‖_∞`.
    pub smoothing: Option<f64>,
    /// Stop once the relative decrease of the objective falls below this.
    pub rel_tol: f64,
    /// Recorded for reproducibility; the iteration itself is deterministic.
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            max_iter: 2000,
            step0: 100.0,
            backtrack: 0.5,
            smoothing: None,
            rel_tol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimStatus {
    /// Relative objective change fell below the tolerance.
    Converged,
    MaxIterations,
    /// No step decreased the objective at the first iteration; the zero
    /// control is returned.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// Objective driving the iteration (smoothed for `p ∈ {1, ∞}`).
    pub f: f64,
    /// `‖φ‖_{L²}` of the misfit gradient at the previous iterate.
    pub grad_norm: f64,
    pub step: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub mu_star: DiscreteMeasure,
    pub control: ScalarField,
    pub u_star: ScalarField,
    /// Unsmoothed `F` of the returned control.
    pub f_value: f64,
    pub misfit: f64,
    pub tv: f64,
    pub history: Vec<HistoryEntry>,
    /// Fraction of nodes where `|control| < 1e-12`.
    pub sparsity: f64,
    pub iterations: usize,
    pub status: OptimStatus,
    pub last_rel_change: f64,
}

impl OptimResult {
    /// Convergence slack `max(1e-6, 10 × last relative change)` used by
    /// every optimality check on candidate minimizers.
    pub fn slack(&self) -> f64 {
        (10.0 * self.last_rel_change).max(1e-6)
    }

    /// Tolerance for pointwise state bounds of a field of size `scale`:
    /// `√slack · scale`, since `F` grows quadratically in the state error
    /// near a minimizer.
    pub fn state_tolerance(&self, scale: f64) -> f64 {
        self.slack().sqrt() * scale
    }
}

struct Iterate {
    control: ScalarField,
    state: ScalarField,
    misfit_smooth: f64,
    objective: f64,
}

fn sparsity(c: &ScalarField) -> f64 {
    c.values().iter().filter(|v| v.abs() < 1e-12).count() as f64 / c.len() as f64
}

/// Proximal gradient over control densities `c`:
/// `c ← prox(c − τ∇J(c), τα)` with backtracking on `τ` so that the
/// objective decreases, starting from the zero control. The best iterate
/// by unsmoothed `F` is returned, so `F(result) ≤ F(0)` always holds.
pub fn optimize(prob: &ControlProblem, config: &OptimizeConfig) -> Result<OptimResult> {
    let smoothing = config.smoothing.unwrap_or_else(|| prob.default_smoothing());
    let misfit = prob.misfit(Some(smoothing))?;
    let vol = prob.grid.cell_volume();
    let tv = |c: &ScalarField| c.values().iter().map(|v| v.abs()).sum::<f64>() * vol;
    let exact_misfit = |u: &ScalarField| u.sub(&prob.u_d).lp_norm(prob.p);

    let zero = ScalarField::zeros(prob.grid);
    let state0 = prob.state_for_density(&zero, None)?;
    let m0 = misfit.value(&state0.sub(&prob.u_d));
    let mut current = Iterate {
        control: zero,
        state: state0,
        misfit_smooth: m0,
        objective: m0,
    };
    let exact0 = exact_misfit(&current.state)?;
    let mut best = (exact0, current.control.clone(), current.state.clone());

    let mut history = Vec::new();
    let mut status = OptimStatus::MaxIterations;
    let mut last_rel_change = f64::INFINITY;
    let mut step = config.step0;
    let mut prev: Option<(ScalarField, ScalarField)> = None;
    let mut iterations = 0;

    for it in 1..=config.max_iter {
        iterations = it;
        let grad = adjoint_from_state(prob, &misfit, &current.state)?;
        let grad_norm = grad.inner(&grad).sqrt();

        // Barzilai–Borwein trial step from the last accepted move.
        if let Some((c_prev, g_prev)) = &prev {
            let s = current.control.sub(c_prev);
            let y = grad.sub(g_prev);
            let sy = s.inner(&y);
            if sy > 0.0 {
                step = (s.inner(&s) / sy).clamp(1e-6 * config.step0, 1e6 * config.step0);
            } else {
                step = (2.0 * step).min(1e6 * config.step0);
            }
        }

        let mut accepted = None;
        let mut stationary = false;
        let mut backtracks = 0;
        for _ in 0..60 {
            let trial_c = prox_l1(&current.control.sub(&grad.scale(step)), step * prob.alpha * vol);
            let diff = trial_c.sub(&current.control);
            let diff_sq = diff.inner(&diff);
            if diff_sq == 0.0 {
                stationary = backtracks == 0;
                break;
            }
            if let Ok(trial_u) = prob.state_for_density(&trial_c, Some(&current.state)) {
                let trial_misfit = misfit.value(&trial_u.sub(&prob.u_d));
                let objective = trial_misfit + prob.alpha * tv(&trial_c);
                let model = current.misfit_smooth + grad.inner(&diff) + diff_sq / (2.0 * step);
                if trial_misfit <= model && objective <= current.objective {
                    accepted = Some(Iterate {
                        control: trial_c,
                        state: trial_u,
                        misfit_smooth: trial_misfit,
                        objective,
                    });
                    break;
                }
            }
            step *= config.backtrack;
            backtracks += 1;
        }

        let Some(next) = accepted else {
            status = if it == 1 && !stationary {
                OptimStatus::Stalled
            } else {
                OptimStatus::Converged
            };
            if it == 1 {
                last_rel_change = 0.0;
            }
            break;
        };

        let rel_change =
            (current.objective - next.objective) / current.objective.abs().max(f64::MIN_POSITIVE);
        history.push(HistoryEntry {
            iteration: it,
            f: next.objective,
            grad_norm,
            step,
            backtracks,
        });
        prev = Some((current.control.clone(), grad));
        current = next;
        last_rel_change = rel_change;

        let exact = exact_misfit(&current.state)? + prob.alpha * tv(&current.control);
        if exact < best.0 {
            best = (exact, current.control.clone(), current.state.clone());
        }
        if rel_change < config.rel_tol {
            status = OptimStatus::Converged;
            break;
        }
    }
    if history.is_empty() && status == OptimStatus::MaxIterations {
        last_rel_change = 0.0;
    }

    let (f_value, control, u_star) = best;
    let tv_star = tv(&control);
    Ok(OptimResult {
        mu_star: DiscreteMeasure::from_density(control.clone()),
        sparsity: sparsity(&control),
        misfit: exact_misfit(&u_star)?,
        tv: tv_star,
        control,
        u_star,
        f_value,
        history,
        iterations,
        status,
        last_rel_change,
    })
}
