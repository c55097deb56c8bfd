//! Truncation of states by super- and subsolutions, and the `L^1`
//! inequalities that make truncation never increase the residual measure.

use serde::{Deserialize, Serialize};

use super::{residual_measure, state_operator, Nonlinearity};
use crate::domain::ScalarField;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Admissibility tolerance for super/subsolution checks, relative to
/// `1 + ‖−Δ_h w‖_∞` because the stencil scales like `h^{-2}`.
pub const TRUNCATION_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; nonnegative when the inequality holds.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub tv_truncated: f64,
    pub tv_original: f64,
    /// `tv_original − tv_truncated`.
    pub slack: f64,
}

fn admissibility_scale(w: &ScalarField) -> f64 {
    1.0 + w.neg_laplacian().max_abs()
}

fn same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("truncation operands live on different grids".into()));
    }
    Ok(())
}

/// `z = min(u, w)` for a nonnegative supersolution `w`, with the datum
/// `−Δ_h z + g(z)` of the truncated state.
pub fn truncate_min(
    u: &ScalarField,
    w: &ScalarField,
    g: &Nonlinearity,
) -> Result<(ScalarField, DiscreteMeasure)> {
    same_grid(u, w)?;
    if let Some(i) = w.values().iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidSupersolution(format!(
            "w is negative at node {i}"
        )));
    }
    let tol = TRUNCATION_EPS * admissibility_scale(w);
    let op = state_operator(g, w);
    if let Some((i, v)) = op.values().iter().enumerate().find(|(_, &v)| v < -tol) {
        return Err(Error::InvalidSupersolution(format!(
            "−Δw + g(w) = {v:e} at node {i}"
        )));
    }
    let z = u.zip_map(w, f64::min);
    let mu = residual_measure(g, &z);
    Ok((z, mu))
}

/// `z = max(u, w)` for a nonpositive subsolution `w`, through the
/// reflection `g̃(t) = −g(−t)`.
pub fn truncate_max(
    u: &ScalarField,
    w: &ScalarField,
    g: &Nonlinearity,
) -> Result<(ScalarField, DiscreteMeasure)> {
    same_grid(u, w)?;
    if let Some(i) = w.values().iter().position(|&v| v > 0.0) {
        return Err(Error::InvalidSupersolution(format!(
            "w is positive at node {i}"
        )));
    }
    let reflected = g.reflect();
    let (z, mu) = truncate_min(&u.scale(-1.0), &w.scale(-1.0), &reflected)?;
    Ok((z.scale(-1.0), mu.scale(-1.0)))
}

/// Compares the residual total variation of `min(u, w)` with that of `u`.
pub fn truncation_tv_check(
    u: &ScalarField,
    w: &ScalarField,
    g: &Nonlinearity,
) -> Result<TruncationReport> {
    let (_, mu_z) = truncate_min(u, w, g)?;
    let tv_truncated = mu_z.tv_norm();
    let tv_original = residual_measure(g, u).tv_norm();
    Ok(TruncationReport {
        tv_truncated,
        tv_original,
        slack: tv_original - tv_truncated,
    })
}

/// Evaluates both sides of
/// `∫|−Δu + a| ≤ ∫|−Δu₁ + a₁| + ∫_{u₁>u₂}(a₂ − a₁)`
/// with `u = min(u₁, u₂)` and `a = a₁` on `{u₁ ≤ u₂}`, `a₂` elsewhere.
/// Requires `−Δ_h u₂ + a₂ >= 0` up to [`TRUNCATION_EPS`].
pub fn lemma_truncation_check(
    u1: &ScalarField,
    u2: &ScalarField,
    a1: &ScalarField,
    a2: &ScalarField,
) -> Result<LemmaReport> {
    for f in [u2, a1, a2] {
        same_grid(u1, f)?;
    }
    let lu2 = u2.neg_laplacian();
    let tol = TRUNCATION_EPS * (1.0 + lu2.max_abs());
    if let Some(i) = lu2
        .values()
        .iter()
        .zip(a2.values())
        .position(|(l, a)| l + a < -tol)
    {
        return Err(Error::InvalidInput(format!(
            "−Δu₂ + a₂ is negative at node {i}"
        )));
    }
    let vol = u1.grid().cell_volume();
    let excess: Vec<bool> = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(x, y)| x > y)
        .collect();
    let u = u1.zip_map(u2, f64::min);
    let lu = u.neg_laplacian();
    let lu1 = u1.neg_laplacian();
    let mut lhs = 0.0;
    let mut base = 0.0;
    let mut correction = 0.0;
    for (i, &over) in excess.iter().enumerate() {
        let a = if over { a2.values()[i] } else { a1.values()[i] };
        lhs += (lu.values()[i] + a).abs();
        base += (lu1.values()[i] + a1.values()[i]).abs();
        if over {
            correction += a2.values()[i] - a1.values()[i];
        }
    }
    let lhs = lhs * vol;
    let rhs = (base + correction) * vol;
    Ok(LemmaReport {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Grid;

    fn bumpy(grid: Grid, shift: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x| {
            (3.0 * x[0]).sin() * (2.0 * x[1] + shift).cos() + 0.2 * shift
        })
    }

    #[test]
    fn min_with_larger_supersolution_is_identity() {
        let grid = Grid::new(2, 9).unwrap();
        let g = Nonlinearity::power(3.0).unwrap();
        let u = bumpy(grid, 0.3);
        let w = ScalarField::constant(grid, u.max_abs() + 1.0);
        let (z, mu) = truncate_min(&u, &w, &g).unwrap();
        assert_eq!(z, u);
        assert_eq!(mu, residual_measure(&g, &u));
    }

    #[test]
    fn min_with_zero_is_negative_part() {
        let grid = Grid::new(2, 9).unwrap();
        let g = Nonlinearity::power(2.0).unwrap();
        let u = bumpy(grid, 0.1);
        let (z, _) = truncate_min(&u, &ScalarField::zeros(grid), &g).unwrap();
        assert_eq!(z, u.map(|v| -(-v).max(0.0)));
        let (z, _) = truncate_max(&u, &ScalarField::zeros(grid), &g).unwrap();
        assert_eq!(z, u.map(|v| v.max(0.0)));
    }

    #[test]
    fn inadmissible_supersolutions_are_rejected() {
        let grid = Grid::new(2, 9).unwrap();
        let g = Nonlinearity::power(3.0).unwrap();
        let u = bumpy(grid, 0.0);
        let negative = ScalarField::constant(grid, -1.0);
        assert!(matches!(truncate_min(&u, &negative, &g), Err(Error::InvalidSupersolution(_))));
        // Convex in the interior with −Δw + w³ = −10 + w³ < 0 near the middle.
        let not_super = ScalarField::from_fn(grid, |x| 2.0 + 5.0 * (x[0] - 0.5).powi(2));
        assert!(matches!(truncate_min(&u, &not_super, &g), Err(Error::InvalidSupersolution(_))));
        assert!(matches!(truncate_max(&u, &ScalarField::constant(grid, 0.5), &g), Err(Error::InvalidSupersolution(_))));
    }

    #[test]
    fn lemma_equality_cases() {
        let grid = Grid::new(2, 11).unwrap();
        let u1 = bumpy(grid, 0.4);
        let a1 = bumpy(grid, 1.3);
        // Make u2 a supersolution pair: a2 = Δu2 + positive.
        let u2 = u1.clone();
        let a2 = u2.neg_laplacian().scale(-1.0).map(|v| v + 1.0);
        let report = lemma_truncation_check(&u1, &u2, &a1, &a2).unwrap();
        assert!((report.lhs - report.rhs).abs() <= 1e-12 * report.rhs.abs().max(1.0));

        let u2 = u1.map(|v| v + 0.5);
        let a2 = u2.neg_laplacian().scale(-1.0).map(|v| v + 0.1);
        let report = lemma_truncation_check(&u1, &u2, &a1, &a2).unwrap();
        assert_eq!(report.lhs, report.rhs);
    }
}
