use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{absorption_l1, residual_measure, solve_semilinear_rhs, Nonlinearity, SolveReport, SolverOptions};
use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Grid and measure are refined together, so each level is a different
/// discrete problem; the trace approximates the fixed-domain limit only.
pub const REDUCED_LIMIT_NOTE: &str =
    "coupled grid-and-measure refinement: a numerical surrogate for the fixed-domain reduced limit";

/// One level of a reduced-limit schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    /// `‖u_k‖_{L^1}` on the level grid.
    pub u_l1: f64,
    /// `‖μ_k‖_M`.
    pub mu_tv: f64,
    /// `‖g(u_k)‖_{L^1}`.
    pub g_u_l1: f64,
    /// `‖u_k − u_{k−1}‖_{L^1}` after interpolation to the finest grid.
    pub cauchy_l1: Option<f64>,
    pub newton_iterations: usize,
    pub residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct ReducedLimit {
    /// Solution on the finest grid.
    pub u_sharp: ScalarField,
    /// `−Δ_h u_sharp + g(u_sharp)`.
    pub mu_sharp: DiscreteMeasure,
    pub trace: Vec<LevelRecord>,
    /// Per-level solutions on their own grids.
    pub levels: Vec<ScalarField>,
    pub note: &'static str,
}

/// Solves the state equation along a schedule of grids and data and tracks
/// the `L^1` behaviour of the solutions.
///
/// Levels are independent and may be solved on the current rayon pool; the
/// output is assembled in schedule order.
pub fn reduced_limit<F>(
    grids: &[Grid],
    schedule: F,
    g: &Nonlinearity,
    opts: &SolverOptions,
) -> Result<ReducedLimit>
where
    F: Fn(usize, &Grid) -> Result<DiscreteMeasure> + Sync,
{
    if grids.is_empty() {
        return Err(Error::InvalidConfig("empty grid schedule".into()));
    }
    for pair in grids.windows(2) {
        if pair[1].dim() != pair[0].dim() || pair[1].n() <= pair[0].n() {
            return Err(Error::InvalidConfig(
                "grid schedule must share a dimension and increase in resolution".into(),
            ));
        }
    }
    let finest = *grids.last().unwrap();

    let solved: Vec<Result<(ScalarField, DiscreteMeasure, SolveReport)>> = grids
        .par_iter()
        .enumerate()
        .map(|(k, grid)| {
            let mu = schedule(k, grid)?;
            let rhs = mu.rasterize(grid)?;
            let (u, report) = solve_semilinear_rhs(g, &rhs, opts, None)?;
            Ok((u, mu, report))
        })
        .collect();

    let mut trace = Vec::with_capacity(grids.len());
    let mut levels = Vec::with_capacity(grids.len());
    let mut previous_fine: Option<ScalarField> = None;
    for (k, outcome) in solved.into_iter().enumerate() {
        let (u, mu, report) = match outcome {
            Ok(v) => v,
            Err(source) => {
                return Err(Error::ReducedLimitFailed {
                    level: k,
                    trace,
                    source: Box::new(source),
                })
            }
        };
        let fine = u.interpolate_to(&finest)?;
        let cauchy_l1 = match &previous_fine {
            Some(prev) => Some(fine.sub(prev).lp_norm(1.0)?),
            None => None,
        };
        trace.push(LevelRecord {
            level: k,
            n: u.grid().n(),
            h: u.grid().h(),
            u_l1: u.lp_norm(1.0)?,
            mu_tv: mu.tv_norm(),
            g_u_l1: absorption_l1(g, &u),
            cauchy_l1,
            newton_iterations: report.iterations,
            residual: report.final_residual,
            wall_time: report.wall_time,
        });
        previous_fine = Some(fine);
        levels.push(u);
    }
    let u_sharp = levels.last().unwrap().clone();
    let mu_sharp = residual_measure(g, &u_sharp);
    Ok(ReducedLimit {
        u_sharp,
        mu_sharp,
        trace,
        levels,
        note: REDUCED_LIMIT_NOTE,
    })
}
