//! The sparse control functional `F(μ) = ‖u(μ) − u_d‖_{L^p} + α‖μ‖_M`:
//! evaluation, adjoint gradients of the misfit, soft-thresholding and a
//! proximal-gradient minimizer over grid densities.

mod optimize;
mod regularity;
mod sweeps;

use serde::{Deserialize, Serialize};

use crate::domain::{check_exponent, ScalarField};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::solver::{solve_jacobian, solve_semilinear_rhs, Nonlinearity, SolverOptions};
use crate::Grid;

pub use optimize::{optimize, HistoryEntry, OptimResult, OptimStatus, OptimizeConfig};
pub use regularity::{check_state_regularity, RegularityReport};
pub use sweeps::{alpha_sweep, misfit_nonincreasing, stability_run, StabilityRow, SweepRow};

/// Data of the minimization problem.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub grid: Grid,
    pub g: Nonlinearity,
    pub u_d: ScalarField,
    /// Misfit exponent, `f64::INFINITY` allowed.
    pub p: f64,
    pub alpha: f64,
    pub solver: SolverOptions,
}

impl ControlProblem {
    pub fn new(g: Nonlinearity, u_d: ScalarField, p: f64, alpha: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        Ok(ControlProblem {
            grid: *u_d.grid(),
            g,
            u_d,
            p,
            alpha,
            solver: SolverOptions::default(),
        })
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_desired_state(&self, u_d: ScalarField) -> Self {
        ControlProblem {
            grid: *u_d.grid(),
            u_d,
            ..self.clone()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        ControlProblem {
            alpha,
            ..self.clone()
        }
    }

    /// `F(0) = ‖u_d‖_{L^p}`.
    pub fn cost_at_zero(&self) -> f64 {
        self.u_d.lp_norm(self.p).expect("exponent validated on construction")
    }

    /// Default smoothing width for `p ∈ {1, ∞}`: `10⁻³ ‖u_d‖_∞`.
    pub fn default_smoothing(&self) -> f64 {
        let s = 1e-3 * self.u_d.max_abs();
        if s > 0.0 {
            s
        } else {
            1e-3
        }
    }

    /// Misfit used by gradients: the exact `L^p` norm for `1 < p < ∞`, a
    /// smoothed surrogate otherwise.
    pub fn misfit(&self, smoothing: Option<f64>) -> Result<Misfit> {
        if self.p > 1.0 && self.p.is_finite() {
            return Ok(Misfit::Lp(self.p));
        }
        let eps = smoothing.ok_or_else(|| {
            Error::InvalidConfig(format!("p = {} needs a smoothing width", self.p))
        })?;
        if !(eps > 0.0) {
            return Err(Error::InvalidConfig("smoothing width must be positive".into()));
        }
        Ok(if self.p == 1.0 {
            Misfit::Huber(eps)
        } else {
            Misfit::LogSumExp(eps)
        })
    }

    pub(crate) fn state_for_density(
        &self,
        density: &ScalarField,
        warm: Option<&ScalarField>,
    ) -> Result<ScalarField> {
        solve_semilinear_rhs(&self.g, density, &self.solver, warm).map(|(u, _)| u)
    }

    pub(crate) fn state_for_measure(&self, m: &DiscreteMeasure) -> Result<ScalarField> {
        let rhs = m.rasterize(&self.grid)?;
        self.state_for_density(&rhs, None)
    }
}

/// Differentiable misfit functional of the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Misfit {
    Lp(f64),
    /// `Σ huber_ε(e_i) h^dim`, a smoothing of the `L^1` norm.
    Huber(f64),
    /// `ε log Σ 2cosh(e_i/ε)`, a smoothing of the max norm.
    LogSumExp(f64),
}

impl Misfit {
    pub fn value(&self, e: &ScalarField) -> f64 {
        let vol = e.grid().cell_volume();
        match *self {
            Misfit::Lp(p) => e.lp_norm(p).expect("p > 1"),
            Misfit::Huber(eps) => {
                e.values()
                    .iter()
                    .map(|&v| {
                        let a = v.abs();
                        if a <= eps {
                            0.5 * v * v / eps
                        } else {
                            a - 0.5 * eps
                        }
                    })
                    .sum::<f64>()
                    * vol
            }
            Misfit::LogSumExp(eps) => {
                let m = e.max_abs();
                let s: f64 = e
                    .values()
                    .iter()
                    .map(|&v| ((v - m) / eps).exp() + ((-v - m) / eps).exp())
                    .sum();
                m + eps * s.ln()
            }
        }
    }

    /// `L²(h)` representative of the derivative with respect to the state.
    pub fn gradient(&self, e: &ScalarField) -> ScalarField {
        let vol = e.grid().cell_volume();
        match *self {
            Misfit::Lp(p) => {
                let j = e.lp_norm(p).expect("p > 1");
                if j == 0.0 {
                    return ScalarField::zeros(*e.grid());
                }
                if p == 2.0 {
                    return e.scale(1.0 / j);
                }
                let scale = j.powf(1.0 - p);
                e.map(|v| scale * v.abs().powf(p - 1.0) * v.signum())
            }
            Misfit::Huber(eps) => e.map(|v| (v / eps).clamp(-1.0, 1.0)),
            Misfit::LogSumExp(eps) => {
                let m = e.max_abs();
                let s: f64 = e
                    .values()
                    .iter()
                    .map(|&v| ((v - m) / eps).exp() + ((-v - m) / eps).exp())
                    .sum();
                e.map(|v| (((v - m) / eps).exp() - ((-v - m) / eps).exp()) / (s * vol))
            }
        }
    }
}

/// `F(m)`; a state solve that fails makes the cost unavailable.
pub fn evaluate_cost(prob: &ControlProblem, m: &DiscreteMeasure) -> Result<f64> {
    let u = prob
        .state_for_measure(m)
        .map_err(|e| Error::CostUnavailable(Box::new(e)))?;
    Ok(u.sub(&prob.u_d).lp_norm(prob.p)? + prob.alpha * m.tv_norm())
}

/// Gradient of the (smoothed) misfit `J(μ)` with respect to the control
/// density, in the `L²(h)` inner product: the adjoint state `φ` solving
/// `(−Δ_h + diag g'(u)) φ = ∂J/∂u`.
pub fn adjoint_gradient(
    prob: &ControlProblem,
    m: &DiscreteMeasure,
    smoothing: Option<f64>,
) -> Result<ScalarField> {
    let misfit = prob.misfit(smoothing)?;
    let u = prob.state_for_measure(m)?;
    adjoint_from_state(prob, &misfit, &u)
}

pub(crate) fn adjoint_from_state(
    prob: &ControlProblem,
    misfit: &Misfit,
    u: &ScalarField,
) -> Result<ScalarField> {
    let source = misfit.gradient(&u.sub(&prob.u_d));
    if source.values().iter().all(|&v| v == 0.0) {
        return Ok(source);
    }
    let shift = u.map(|v| prob.g.derivative(v));
    solve_jacobian(&shift, &source, &prob.solver)
}

/// Soft-thresholding of a density: `sign(v)·max(|v| − threshold/h^dim, 0)`,
/// the threshold being a mass so that it matches `α‖·‖_M` of the density.
pub fn prox_l1(v: &ScalarField, threshold: f64) -> ScalarField {
    assert!(threshold >= 0.0, "threshold must be nonnegative");
    let t = threshold / v.grid().cell_volume();
    v.map(|x| x.signum() * (x.abs() - t).max(0.0))
}

/// Breakdown of a cost evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParts {
    pub misfit: f64,
    pub tv: f64,
    pub total: f64,
}

pub fn cost_parts(prob: &ControlProblem, m: &DiscreteMeasure) -> Result<CostParts> {
    let u = prob
        .state_for_measure(m)
        .map_err(|e| Error::CostUnavailable(Box::new(e)))?;
    let misfit = u.sub(&prob.u_d).lp_norm(prob.p)?;
    let tv = m.tv_norm();
    Ok(CostParts {
        misfit,
        tv,
        total: misfit + prob.alpha * tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_examples() {
        let g = Grid::new(1, 2).unwrap();
        let v = ScalarField::from_values(g, vec![3.0, -1.0]).unwrap();
        assert_eq!(prox_l1(&v, 0.0), v);
        // Scaled threshold 2 corresponds to a mass threshold 2h.
        let out = prox_l1(&v, 2.0 * g.cell_volume());
        assert_eq!(out.values(), &[1.0, 0.0]);
        let out = prox_l1(&v, 3.0 * g.cell_volume());
        assert!(out.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn problem_validation() {
        let u_d = ScalarField::zeros(Grid::new(2, 5).unwrap());
        assert!(ControlProblem::new(Nonlinearity::zero(), u_d.clone(), 0.5, 1.0).is_err());
        assert!(ControlProblem::new(Nonlinearity::zero(), u_d.clone(), 2.0, 0.0).is_err());
        assert!(ControlProblem::new(Nonlinearity::zero(), u_d, f64::INFINITY, 1.0).is_ok());
    }

    #[test]
    fn smoothed_misfits_approach_the_norms() {
        let g = Grid::new(2, 7).unwrap();
        let e = ScalarField::from_fn(g, |x| (5.0 * x[0]).sin() - x[1]);
        let l1 = e.lp_norm(1.0).unwrap();
        let linf = e.lp_norm(f64::INFINITY).unwrap();
        let huber = Misfit::Huber(1e-6).value(&e);
        assert!((huber - l1).abs() < 1e-6);
        let lse = Misfit::LogSumExp(1e-4).value(&e);
        assert!(lse >= linf && lse - linf < 1e-4 * (2.0 * g.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn nonsmooth_exponents_need_smoothing() {
        let u_d = ScalarField::constant(Grid::new(2, 5).unwrap(), 1.0);
        let prob = ControlProblem::new(Nonlinearity::zero(), u_d, 1.0, 1.0).unwrap();
        assert!(matches!(prob.misfit(None), Err(Error::InvalidConfig(_))));
        assert!(matches!(prob.misfit(Some(1e-3)), Ok(Misfit::Huber(_))));
    }
}
