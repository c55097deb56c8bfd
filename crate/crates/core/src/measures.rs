//! Finite signed measures represented as a list of atoms plus an optional
//! absolutely continuous part, together with their norms, Jordan
//! decomposition, mollification, grid assembly and Newtonian potential.

use std::f64::consts::PI;
use std::fmt;

use crate::domain::{Grid, Point, ScalarField};
use crate::error::{Error, Result};

/// A point mass `w δ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: Point,
    pub w: f64,
}

/// `μ = Σ w_j δ_{a_j} + density · dx`.
///
/// Atom locations are continuous, so the same measure can be assembled on
/// grids of any resolution. Atoms sharing a location are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    density: Option<ScalarField>,
}

/// Bookkeeping from [`DiscreteMeasure::rasterize_detailed`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RasterReport {
    /// Atoms that landed on a node already holding an atom.
    pub collisions: usize,
    /// Total variation lost because atoms of opposite sign share a node.
    pub cancelled_mass: f64,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>, density: Option<ScalarField>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidMeasure(format!("unsupported dimension {dim}")));
        }
        if let Some(d) = &density {
            if d.grid().dim() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "{}D density attached to a {dim}D measure",
                    d.grid().dim()
                )));
            }
        }
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for mut atom in atoms {
            if !atom.w.is_finite() || atom.x.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure("non-finite atom".into()));
            }
            atom.x[dim..].iter_mut().for_each(|c| *c = 0.0);
            match merged.iter_mut().find(|a| a.x == atom.x) {
                Some(existing) => existing.w += atom.w,
                None => merged.push(atom),
            }
        }
        Ok(DiscreteMeasure {
            dim,
            atoms: merged,
            density,
        })
    }

    pub fn zero(dim: usize) -> Self {
        DiscreteMeasure {
            dim,
            atoms: Vec::new(),
            density: None,
        }
    }

    pub fn dirac(dim: usize, x: &[f64], w: f64) -> Result<Self> {
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(&x[..dim]);
        Self::new(dim, vec![Atom { x: p, w }], None)
    }

    pub fn from_density(density: ScalarField) -> Self {
        DiscreteMeasure {
            dim: density.grid().dim(),
            atoms: Vec::new(),
            density: Some(density),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&ScalarField> {
        self.density.as_ref()
    }

    pub fn scale(&self, s: f64) -> Self {
        DiscreteMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { x: a.x, w: s * a.w })
                .collect(),
            density: self.density.as_ref().map(|d| d.scale(s)),
        }
    }

    /// `|μ|(Ω)`: absolute atom weights plus the `L^1` norm of the density.
    pub fn tv_norm(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w.abs()).sum();
        let dens = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.values().iter().map(|v| v.abs()).sum::<f64>() * d.grid().cell_volume());
        atoms + dens
    }

    /// `μ(Ω)`.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.w).sum();
        atoms + self.density.as_ref().map_or(0.0, |d| d.integral())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.w >= 0.0)
            && self
                .density
                .as_ref()
                .is_none_or(|d| d.values().iter().all(|&v| v >= 0.0))
    }

    /// Splits `μ = μ⁺ − μ⁻` into nonnegative parts.
    pub fn jordan_decompose(&self) -> (DiscreteMeasure, DiscreteMeasure) {
        let part = |sign: f64| DiscreteMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .filter(|a| sign * a.w > 0.0)
                .map(|a| Atom {
                    x: a.x,
                    w: sign * a.w,
                })
                .collect(),
            density: self
                .density
                .as_ref()
                .map(|d| d.map(|v| (sign * v).max(0.0))),
        };
        (part(1.0), part(-1.0))
    }

    /// Assembles the measure as a nodal density on `grid`: an atom of
    /// weight `w` adds `w / h^dim` at its nearest node. A density stored on
    /// `grid` is copied; one stored on another grid deposits each node's
    /// mass at the nearest target node.
    pub fn rasterize(&self, grid: &Grid) -> Result<ScalarField> {
        self.rasterize_detailed(grid).map(|(f, _)| f)
    }

    pub fn rasterize_detailed(&self, grid: &Grid) -> Result<(ScalarField, RasterReport)> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "{}D measure rasterized on a {}D grid",
                self.dim,
                grid.dim()
            )));
        }
        let inv_vol = 1.0 / grid.cell_volume();
        let mut atom_mass = vec![0.0; grid.len()];
        let mut hit = vec![false; grid.len()];
        let mut report = RasterReport::default();
        for atom in &self.atoms {
            let node = grid.nearest_node(&atom.x)?;
            if hit[node] {
                report.collisions += 1;
            }
            hit[node] = true;
            atom_mass[node] += atom.w;
        }
        let atom_tv: f64 = self.atoms.iter().map(|a| a.w.abs()).sum();
        let kept: f64 = atom_mass.iter().map(|m| m.abs()).sum();
        report.cancelled_mass = (atom_tv - kept).max(0.0);

        let mut values: Vec<f64> = atom_mass.iter().map(|m| m * inv_vol).collect();
        if let Some(d) = &self.density {
            if d.grid() == grid {
                for (v, &dv) in values.iter_mut().zip(d.values()) {
                    *v += dv;
                }
            } else {
                let src = d.grid();
                let src_vol = src.cell_volume();
                for (j, &dv) in d.values().iter().enumerate() {
                    if dv != 0.0 {
                        let node = grid.nearest_node(&src.coordinate(j))?;
                        values[node] += dv * src_vol * inv_vol;
                    }
                }
            }
        }
        Ok((ScalarField::from_values(*grid, values)?, report))
    }

    /// `∫ φ dμ` with atoms evaluated at their nearest node.
    pub fn pairing(&self, phi: &ScalarField) -> Result<f64> {
        Ok(self.rasterize(phi.grid())?.inner(phi))
    }

    /// Convolution with the normalized bump of radius `radius`, sampled on
    /// `grid`. Each source point's kernel is renormalized over the nodes so
    /// that the discrete integral equals `μ(Ω)`.
    pub fn mollify(&self, radius: f64, grid: &Grid) -> Result<ScalarField> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "{}D measure mollified on a {}D grid",
                self.dim,
                grid.dim()
            )));
        }
        let min = 2.0 * grid.h();
        if !(radius >= min * (1.0 - 1e-12)) {
            return Err(Error::UnderResolvedKernel { radius, min });
        }
        let mut out = vec![0.0; grid.len()];
        let mut scratch = Vec::new();
        for atom in &self.atoms {
            if !grid.contains(&atom.x) {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {:?} is outside the open unit box",
                    &atom.x[..self.dim]
                )));
            }
            deposit_kernel(grid, &atom.x, atom.w, radius, &mut scratch, &mut out)?;
        }
        if let Some(d) = &self.density {
            let src = d.grid();
            let src_vol = src.cell_volume();
            for (j, &dv) in d.values().iter().enumerate() {
                if dv != 0.0 {
                    deposit_kernel(grid, &src.coordinate(j), dv * src_vol, radius, &mut scratch, &mut out)?;
                }
            }
        }
        ScalarField::from_values(*grid, out)
    }

    /// Newtonian potential `(1/4π) ∫ dμ(y)/|x − y|` in three dimensions.
    pub fn newtonian_potential(&self, x: &[f64]) -> Result<f64> {
        if self.dim != 3 {
            return Err(Error::UnsupportedDimension {
                expected: 3,
                found: self.dim,
            });
        }
        let dist = |y: &Point| {
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
        };
        let mut acc = 0.0;
        for atom in &self.atoms {
            let r = dist(&atom.x);
            if r == 0.0 {
                return Err(Error::SingularEvaluation);
            }
            acc += atom.w / r;
        }
        if let Some(d) = &self.density {
            let grid = d.grid();
            let vol = grid.cell_volume();
            for (i, &dv) in d.values().iter().enumerate() {
                if dv != 0.0 {
                    let r = dist(&grid.coordinate(i));
                    if r == 0.0 {
                        return Err(Error::SingularEvaluation);
                    }
                    acc += dv * vol / r;
                }
            }
        }
        Ok(acc / (4.0 * PI))
    }
}

/// Unnormalized bump `exp(−1/(1 − s²))` for `s < 1`.
pub fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn deposit_kernel(
    grid: &Grid,
    center: &Point,
    mass: f64,
    radius: f64,
    scratch: &mut Vec<(usize, f64)>,
    out: &mut [f64],
) -> Result<()> {
    let dim = grid.dim();
    let h = grid.h();
    let n = grid.n() as i64;
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for axis in 0..dim {
        lo[axis] = (((center[axis] - radius) / h).ceil() as i64).max(1);
        hi[axis] = (((center[axis] + radius) / h).floor() as i64).min(n);
        if lo[axis] > hi[axis] {
            return Err(Error::InvalidMeasure(format!(
                "kernel at {:?} covers no interior node",
                &center[..dim]
            )));
        }
    }
    scratch.clear();
    let mut total = 0.0;
    let mut k = lo;
    'outer: loop {
        let mut r2 = 0.0;
        let mut mi = [0usize; 3];
        for axis in 0..dim {
            let d = k[axis] as f64 * h - center[axis];
            r2 += d * d;
            mi[axis] = (k[axis] - 1) as usize;
        }
        let w = bump(r2.sqrt() / radius);
        if w > 0.0 {
            scratch.push((grid.linear_index(&mi), w));
            total += w;
        }
        // Odometer over the index box, last axis fastest.
        let mut axis = dim;
        loop {
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
            if k[axis] < hi[axis] {
                k[axis] += 1;
                break;
            }
            k[axis] = lo[axis];
        }
    }
    if total == 0.0 {
        return Err(Error::InvalidMeasure(format!(
            "kernel at {:?} covers no interior node",
            &center[..dim]
        )));
    }
    let scale = mass / (total * grid.cell_volume());
    for &(idx, w) in scratch.iter() {
        out[idx] += w * scale;
    }
    Ok(())
}

impl fmt::Display for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (pos, neg) = self.jordan_decompose();
        writeln!(f, "{}D measure", self.dim)?;
        writeln!(f, "  total variation : {:.6e}", self.tv_norm())?;
        writeln!(f, "  total mass      : {:.6e}", self.total_mass())?;
        writeln!(
            f,
            "  positive / negative parts : {:.6e} / {:.6e}",
            pos.tv_norm(),
            neg.tv_norm()
        )?;
        writeln!(f, "  atoms ({}):", self.atoms.len())?;
        for atom in &self.atoms {
            let coords: Vec<String> = atom.x[..self.dim].iter().map(|c| format!("{c:.6}")).collect();
            writeln!(f, "    [{}]  w = {:+.6e}", coords.join(", "), atom.w)?;
        }
        match &self.density {
            Some(d) => write!(
                f,
                "  density: {}D grid n = {}, L1 = {:.6e}, range [{:.3e}, {:.3e}]",
                d.grid().dim(),
                d.grid().n(),
                d.lp_norm(1.0).unwrap_or(f64::NAN),
                d.min(),
                d.max()
            ),
            None => write!(f, "  density: none"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(dim: usize, n: usize) -> Grid {
        Grid::new(dim, n).unwrap()
    }

    #[test]
    fn tv_of_atoms_and_densities() {
        let m = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0).unwrap();
        assert_eq!(m.tv_norm(), 1.0);
        let m = DiscreteMeasure::new(
            2,
            vec![
                Atom { x: [0.2, 0.3, 0.0], w: 2.0 },
                Atom { x: [0.7, 0.6, 0.0], w: -3.0 },
            ],
            None,
        )
        .unwrap();
        assert_eq!(m.tv_norm(), 5.0);
        let d = DiscreteMeasure::from_density(ScalarField::constant(grid(2, 3), 1.0));
        assert_relative_eq!(d.tv_norm(), 9.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_atoms_merge() {
        let m = DiscreteMeasure::new(
            1,
            vec![Atom { x: [0.3, 0.0, 0.0], w: 1.0 }, Atom { x: [0.3, 0.0, 0.0], w: 0.5 }],
            None,
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.atoms()[0].w, 1.5);
    }

    #[test]
    fn jordan_split_of_atoms() {
        let a = [0.2, 0.3, 0.0];
        let b = [0.7, 0.6, 0.0];
        let m = DiscreteMeasure::new(2, vec![Atom { x: a, w: 2.0 }, Atom { x: b, w: -3.0 }], None).unwrap();
        let (pos, neg) = m.jordan_decompose();
        assert_eq!(pos.atoms(), &[Atom { x: a, w: 2.0 }]);
        assert_eq!(neg.atoms(), &[Atom { x: b, w: 3.0 }]);

        let nonneg = DiscreteMeasure::from_density(ScalarField::constant(grid(1, 4), 2.0));
        let (pos, neg) = nonneg.jordan_decompose();
        assert_eq!(pos, nonneg);
        assert_eq!(neg.tv_norm(), 0.0);
    }

    #[test]
    fn rasterize_examples() {
        let g = grid(2, 3);
        let m = DiscreteMeasure::dirac(2, &[0.5, 0.25], 1.0).unwrap();
        let f = m.rasterize(&g).unwrap();
        assert_eq!(f.values()[g.linear_index(&[1, 0])], 16.0);
        assert_eq!(f.values().iter().filter(|&&v| v != 0.0).count(), 1);

        let dens = ScalarField::from_fn(g, |x| x[0] - x[1]);
        let m = DiscreteMeasure::from_density(dens.clone());
        assert_eq!(m.rasterize(&g).unwrap(), dens);

        let m = DiscreteMeasure::new(
            2,
            vec![Atom { x: [0.49, 0.5, 0.0], w: 1.0 }, Atom { x: [0.51, 0.5, 0.0], w: -1.0 }],
            None,
        )
        .unwrap();
        let (f, report) = m.rasterize_detailed(&g).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        assert_eq!(report.collisions, 1);
        assert_relative_eq!(report.cancelled_mass, 2.0);

        let outside = DiscreteMeasure::dirac(2, &[0.5, 1.2], 1.0).unwrap();
        assert!(matches!(outside.rasterize(&g), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn mollified_dirac_has_unit_mass() {
        let g = grid(2, 33);
        let m = DiscreteMeasure::dirac(2, &[0.31, 0.62], 1.0).unwrap();
        for k in [2.0, 3.5, 6.0] {
            let f = m.mollify(k * g.h(), &g).unwrap();
            assert!(f.min() >= 0.0);
            assert!((f.integral() - 1.0).abs() < 1e-10);
        }
        let zero = DiscreteMeasure::zero(2).mollify(4.0 * g.h(), &g).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert!(matches!(
            m.mollify(1.5 * g.h(), &g),
            Err(Error::UnderResolvedKernel { .. })
        ));
    }

    #[test]
    fn newtonian_potential_of_unit_atom() {
        let m = DiscreteMeasure::dirac(3, &[0.5, 0.5, 0.5], 1.0).unwrap();
        let v = m.newtonian_potential(&[1.5, 0.5, 0.5]).unwrap();
        assert_relative_eq!(v, 0.079_577_471_545_947_67, epsilon = 1e-15);
        assert!(matches!(
            m.newtonian_potential(&[0.5, 0.5, 0.5]),
            Err(Error::SingularEvaluation)
        ));
        assert_eq!(DiscreteMeasure::zero(3).newtonian_potential(&[0.1, 0.2, 0.3]).unwrap(), 0.0);
        let planar = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0).unwrap();
        assert!(matches!(
            planar.newtonian_potential(&[0.1, 0.1]),
            Err(Error::UnsupportedDimension { expected: 3, found: 2 })
        ));
    }
}
