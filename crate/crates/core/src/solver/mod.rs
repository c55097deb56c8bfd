//! Discrete solvers for `−Δ_h u + g(u) = μ` with zero Dirichlet data.
//!
//! The primary algorithm is damped Newton on the strictly convex discrete
//! energy `½⟨u, −Δ_h u⟩ + Σ G(u_i) h^dim − ⟨rhs, u⟩`. A monotone
//! sub/supersolution iteration is kept as an independent second route.

mod cg;
mod monotone;
mod nonlinearity;
mod reduced_limit;
mod truncation;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::domain::{apply_neg_laplacian, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

pub use monotone::solve_by_sub_supersolution;
pub use nonlinearity::{MonotoneFunction, Nonlinearity, PiecewiseLinear};
pub use reduced_limit::{reduced_limit, LevelRecord, ReducedLimit, REDUCED_LIMIT_NOTE};
pub use truncation::{
    lemma_truncation_check, truncate_max, truncate_min, truncation_tv_check, LemmaReport,
    TruncationReport, TRUNCATION_EPS,
};

/// Outcome of a solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Newton steps, monotone sweeps, or CG iterations for linear solves.
    pub iterations: usize,
    /// Total inner CG iterations.
    pub linear_iterations: usize,
    /// `Σ |−Δ_h u + g(u) − rhs|_i h^dim`.
    pub final_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    /// Discrete energy after each accepted Newton step, initial iterate first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy_history: Vec<f64>,
    /// Largest pointwise increase between consecutive monotone iterates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_violation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Residual tolerance, quadrature-weighted `L^1`.
    pub tol: f64,
    pub max_newton: usize,
    /// Floor for the relative tolerance of inner CG solves.
    pub cg_rel_tol: f64,
    pub max_cg: usize,
    /// Iteration cap of the monotone scheme.
    pub max_monotone: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_newton: 100,
            cg_rel_tol: 1e-12,
            max_cg: 50_000,
            max_monotone: 20_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Solves `−Δ_h u = rasterize(m)`.
pub fn solve_linear(grid: &Grid, m: &DiscreteMeasure, tol: f64) -> Result<(ScalarField, SolveReport)> {
    let rhs = m.rasterize(grid)?;
    solve_linear_rhs(&rhs, &SolverOptions::with_tol(tol))
}

/// Solves `−Δ_h u = rhs` for a nodal right-hand side.
pub fn solve_linear_rhs(rhs: &ScalarField, opts: &SolverOptions) -> Result<(ScalarField, SolveReport)> {
    let start = Instant::now();
    let grid = *rhs.grid();
    let mut x = vec![0.0; grid.len()];
    let (iterations, residual) = solve_shifted_to_l1(&grid, None, rhs.values(), &mut x, opts)?;
    let report = SolveReport {
        iterations,
        linear_iterations: iterations,
        final_residual: residual,
        converged: true,
        wall_time: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    Ok((ScalarField::from_values(grid, x)?, report))
}

/// Solves `(−Δ_h + diag(shift)) x = rhs` for nonnegative `shift` to
/// relative accuracy `cg_rel_tol`. This is the Jacobian of the state
/// equation, used for adjoints.
pub fn solve_jacobian(
    shift: &ScalarField,
    rhs: &ScalarField,
    opts: &SolverOptions,
) -> Result<ScalarField> {
    let grid = *rhs.grid();
    if shift.values().iter().any(|&d| !(d >= 0.0)) {
        return Err(Error::InvalidNonlinearity(
            "negative derivative in the Jacobian".into(),
        ));
    }
    let mut x = vec![0.0; grid.len()];
    let outcome = cg::solve(
        &grid,
        Some(shift.values()),
        rhs.values(),
        &mut x,
        cg::Stop::Relative(opts.cg_rel_tol),
        opts.max_cg,
    );
    if !outcome.converged {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            residual: f64::NAN,
        });
    }
    ScalarField::from_values(grid, x)
}

/// CG with restarts until the true weighted `L^1` residual is below `tol`.
fn solve_shifted_to_l1(
    grid: &Grid,
    shift: Option<&[f64]>,
    b: &[f64],
    x: &mut [f64],
    opts: &SolverOptions,
) -> Result<(usize, f64)> {
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut target = 0.5 * opts.tol;
    for _ in 0..4 {
        let outcome = cg::solve(grid, shift, b, x, cg::Stop::WeightedL1(target), opts.max_cg);
        iterations += outcome.iterations;
        residual = weighted_l1_residual(grid, shift, b, x);
        if residual <= opts.tol {
            return Ok((iterations, residual));
        }
        if !outcome.converged && outcome.iterations >= opts.max_cg {
            break;
        }
        target *= 0.1;
    }
    Err(Error::NoConvergence {
        iterations,
        residual,
    })
}

fn weighted_l1_residual(grid: &Grid, shift: Option<&[f64]>, b: &[f64], x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    apply_neg_laplacian(grid, x, shift, &mut ax);
    ax.iter().zip(b).map(|(a, b)| (a - b).abs()).sum::<f64>() * grid.cell_volume()
}

/// Solves `−Δ_h u + g(u) = rasterize(m)`.
pub fn solve_semilinear(
    grid: &Grid,
    g: &Nonlinearity,
    m: &DiscreteMeasure,
    tol: f64,
) -> Result<(ScalarField, SolveReport)> {
    let rhs = m.rasterize(grid)?;
    solve_semilinear_rhs(g, &rhs, &SolverOptions::with_tol(tol), None)
}

/// Damped Newton for `−Δ_h u + g(u) = rhs`.
///
/// Without `initial`, Newton starts from the linear solution clipped to
/// `[−M, M]` with `M = ‖(−Δ_h)^{-1}|rhs|‖_∞`.
pub fn solve_semilinear_rhs(
    g: &Nonlinearity,
    rhs: &ScalarField,
    opts: &SolverOptions,
    initial: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport)> {
    let start = Instant::now();
    let grid = *rhs.grid();
    let vol = grid.cell_volume();
    let len = grid.len();
    let b = rhs.values();
    let mut linear_iterations = 0;

    let mut u = match initial {
        Some(u0) => {
            if u0.grid() != &grid {
                return Err(Error::GridMismatch("initial iterate on another grid".into()));
            }
            u0.values().to_vec()
        }
        None => {
            let mut lin = vec![0.0; len];
            let (its, _) = solve_shifted_to_l1(&grid, None, b, &mut lin, opts)?;
            linear_iterations += its;
            let bound = if b.iter().all(|&v| v >= 0.0) {
                lin.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            } else {
                let abs_b: Vec<f64> = b.iter().map(|v| v.abs()).collect();
                let mut sup = vec![0.0; len];
                let (its, _) = solve_shifted_to_l1(&grid, None, &abs_b, &mut sup, opts)?;
                linear_iterations += its;
                sup.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            };
            lin.iter_mut().for_each(|v| *v = v.clamp(-bound, bound));
            lin
        }
    };

    let mut au = vec![0.0; len];
    let mut r = vec![0.0; len];
    let mut energy_history = Vec::new();

    let residual_into = |u: &[f64], au: &mut [f64], r: &mut [f64]| -> f64 {
        apply_neg_laplacian(&grid, u, None, au);
        let mut acc = 0.0;
        for i in 0..len {
            r[i] = au[i] + g.value(u[i]) - b[i];
            acc += r[i].abs();
        }
        acc * vol
    };
    // Returns the energy and the sum of magnitudes of its terms.
    let energy = |u: &[f64], au: &[f64]| -> (f64, f64) {
        let mut e = 0.0;
        let mut mag = 0.0;
        for i in 0..len {
            let quad = 0.5 * u[i] * au[i];
            let prim = g.primitive(u[i]);
            let lin = b[i] * u[i];
            e += quad + prim - lin;
            mag += quad.abs() + prim.abs() + lin.abs();
        }
        (e * vol, mag * vol)
    };

    let mut res = residual_into(&u, &mut au, &mut r);
    let res0 = res.max(f64::MIN_POSITIVE);
    let (mut e, mut e_mag) = energy(&u, &au);
    energy_history.push(e);

    let mut shift = vec![0.0; len];
    let mut delta = vec![0.0; len];
    let mut trial = vec![0.0; len];
    let mut au_trial = vec![0.0; len];
    let mut r_trial = vec![0.0; len];
    let mut iterations = 0;

    while res > opts.tol {
        if iterations >= opts.max_newton {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        for i in 0..len {
            let d = g.derivative(u[i]);
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::InvalidNonlinearity(format!(
                    "g'({}) = {d} is not a finite nonnegative slope",
                    u[i]
                )));
            }
            shift[i] = d;
        }
        // Inexact Newton: forcing term shrinks with the residual.
        let forcing = (res / res0).clamp(opts.cg_rel_tol, 1e-2).min(res.max(opts.cg_rel_tol));
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        delta.iter_mut().for_each(|d| *d = 0.0);
        let outcome = cg::solve(
            &grid,
            Some(&shift),
            &neg_r,
            &mut delta,
            cg::Stop::Relative(forcing),
            opts.max_cg,
        );
        linear_iterations += outcome.iterations;

        let slope: f64 = r.iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>() * vol;
        let mut step = 1.0;
        loop {
            for i in 0..len {
                trial[i] = u[i] + step * delta[i];
            }
            let res_trial = residual_into(&trial, &mut au_trial, &mut r_trial);
            let (e_trial, mag_trial) = energy(&trial, &au_trial);
            let armijo = e_trial <= e + 1e-4 * step * slope;
            // Near convergence energy differences drop below roundoff.
            let roundoff = e_trial <= e + 1e-13 * e_mag.max(mag_trial) && res_trial < res;
            if (armijo || roundoff) && res_trial.is_finite() {
                std::mem::swap(&mut u, &mut trial);
                std::mem::swap(&mut au, &mut au_trial);
                std::mem::swap(&mut r, &mut r_trial);
                res = res_trial;
                e = e_trial;
                e_mag = mag_trial;
                energy_history.push(e);
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: res,
                });
            }
        }
    }

    let report = SolveReport {
        iterations,
        linear_iterations,
        final_residual: res,
        converged: true,
        wall_time: start.elapsed().as_secs_f64(),
        energy_history,
        monotone_violation: None,
    };
    Ok((ScalarField::from_values(grid, u)?, report))
}

/// Discrete energy `½⟨u, −Δ_h u⟩ + Σ G(u_i) h^dim − ⟨rhs, u⟩`.
pub fn discrete_energy(g: &Nonlinearity, rhs: &ScalarField, u: &ScalarField) -> f64 {
    let au = u.neg_laplacian();
    let vol = u.grid().cell_volume();
    u.values()
        .iter()
        .zip(au.values())
        .zip(rhs.values())
        .map(|((&ui, &ai), &bi)| 0.5 * ui * ai + g.primitive(ui) - bi * ui)
        .sum::<f64>()
        * vol
}

/// `−Δ_h u + g(u)` as a nodal field.
pub fn state_operator(g: &Nonlinearity, u: &ScalarField) -> ScalarField {
    let mut out = u.neg_laplacian();
    for (o, &ui) in out.values_mut().iter_mut().zip(u.values()) {
        *o += g.value(ui);
    }
    out
}

/// The datum for which `u` is the solution: the density `−Δ_h u + g(u)`.
pub fn residual_measure(g: &Nonlinearity, u: &ScalarField) -> DiscreteMeasure {
    DiscreteMeasure::from_density(state_operator(g, u))
}

/// `Σ |g(u_i)| h^dim`.
pub fn absorption_l1(g: &Nonlinearity, u: &ScalarField) -> f64 {
    u.values().iter().map(|&v| g.value(v).abs()).sum::<f64>() * u.grid().cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_solve_exact_for_quadratic() {
        let g = Grid::new(1, 3).unwrap();
        let m = DiscreteMeasure::from_density(ScalarField::constant(g, 1.0));
        let (u, report) = solve_linear(&g, &m, 1e-12).unwrap();
        assert!(report.converged);
        for (v, e) in u.values().iter().zip([0.09375, 0.125, 0.09375]) {
            assert_relative_eq!(*v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_datum_gives_zero_state() {
        let g = Grid::new(2, 9).unwrap();
        let (u, report) = solve_linear(&g, &DiscreteMeasure::zero(2), 1e-10).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
        assert_eq!(report.iterations, 0);
        let (u, _) = solve_semilinear(&g, &Nonlinearity::power(3.0).unwrap(), &DiscreteMeasure::zero(2), 1e-10).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_nonlinearity_matches_linear_solve() {
        let g = Grid::new(2, 15).unwrap();
        let m = DiscreteMeasure::dirac(2, &[0.3, 0.6], 1.0).unwrap();
        let (lin, _) = solve_linear(&g, &m, 1e-10).unwrap();
        let (semi, report) = solve_semilinear(&g, &Nonlinearity::zero(), &m, 1e-10).unwrap();
        assert_eq!(lin, semi);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn newton_reports_no_convergence_at_cap() {
        let g = Grid::new(2, 15).unwrap();
        let m = DiscreteMeasure::dirac(2, &[0.5, 0.5], 50.0).unwrap();
        let opts = SolverOptions {
            max_newton: 1,
            ..Default::default()
        };
        let rhs = m.rasterize(&g).unwrap();
        let err = solve_semilinear_rhs(&Nonlinearity::power(3.0).unwrap(), &rhs, &opts, None).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 1, .. }));
    }

    #[test]
    fn residual_measure_of_zero_is_zero() {
        let g = Grid::new(2, 5).unwrap();
        let m = residual_measure(&Nonlinearity::power(2.0).unwrap(), &ScalarField::zeros(g));
        assert_eq!(m.tv_norm(), 0.0);
    }
}
