//! Uniform box grids on the open unit cube, nodal scalar fields, the
//! finite-difference negative Laplacian with zero Dirichlet data, and the
//! discrete norms built on node quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the open unit box. Unused trailing coordinates are zero.
pub type Point = [f64; 3];

/// Uniform grid of `n^dim` interior nodes on `(0,1)^dim` with spacing
/// `h = 1/(n+1)`.
///
/// Nodes are numbered lexicographically with the last axis running
/// fastest; node `(i_1, …, i_dim)` (zero-based) sits at `((i_1+1)h, …)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridShape", into = "GridShape")]
pub struct Grid {
    dim: usize,
    n: usize,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct GridShape {
    dim: usize,
    n: usize,
}

impl TryFrom<GridShape> for Grid {
    type Error = Error;

    fn try_from(shape: GridShape) -> Result<Self> {
        Grid::new(shape.dim, shape.n)
    }
}

impl From<Grid> for GridShape {
    fn from(grid: Grid) -> Self {
        GridShape {
            dim: grid.dim,
            n: grid.n,
        }
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidConfig(format!(
                "grid dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidConfig(
                "grid needs at least one interior node per axis".into(),
            ));
        }
        Ok(Grid {
            dim,
            n,
            h: 1.0 / (n as f64 + 1.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Interior nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Total number of interior nodes, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of a node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Zero-based per-axis indices of node `idx`.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn linear_index(&self, mi: &[usize]) -> usize {
        mi[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn coordinate(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = (mi[axis] as f64 + 1.0) * self.h;
        }
        x
    }

    /// Whether `x` lies in the open unit box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() >= self.dim && x[..self.dim].iter().all(|&c| c > 0.0 && c < 1.0)
    }

    /// Interior node closest to `x`; points between the boundary and the
    /// first node snap to that node.
    pub fn nearest_node(&self, x: &[f64]) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::InvalidMeasure(format!(
                "point {:?} is outside the open unit box",
                &x[..x.len().min(self.dim)]
            )));
        }
        let mut mi = [0usize; 3];
        for axis in 0..self.dim {
            let k = (x[axis] / self.h).round() as i64;
            mi[axis] = (k.clamp(1, self.n as i64) - 1) as usize;
        }
        Ok(self.linear_index(&mi))
    }
}

/// Real values at the interior nodes of a grid. Reads outside the interior
/// evaluate to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every interior node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| f(&grid.coordinate(i)[..grid.dim()]))
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Quadrature-weighted inner product `Σ f_i g_i h^dim`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        dot(&self.values, &other.values) * self.grid.cell_volume()
    }

    /// Discrete integral `Σ f_i h^dim`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete `L^p` norm with node quadrature; `p = f64::INFINITY` gives
    /// the max norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        if p == f64::INFINITY {
            return Ok(self.max_abs());
        }
        let w = self.grid.cell_volume();
        if p == 1.0 {
            return Ok(self.values.iter().map(|v| v.abs()).sum::<f64>() * w);
        }
        if p == 2.0 {
            return Ok((dot(&self.values, &self.values) * w).sqrt());
        }
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((sum * w).powf(1.0 / p))
    }

    /// Discrete `W^{1,1}_0` norm: the `L^1` norm plus the sum over all
    /// grid edges (boundary edges included) of `|f_j - f_i| h^{dim-1}`.
    pub fn w11_norm(&self) -> f64 {
        let grid = &self.grid;
        let n = grid.n();
        let dim = grid.dim();
        let mut edges = 0.0;
        for idx in 0..grid.len() {
            let mi = grid.multi_index(idx);
            let here = self.values[idx];
            for (axis, &m) in mi.iter().enumerate().take(dim) {
                // Edge towards the next node along `axis`.
                let next = if m + 1 < n {
                    self.values[idx + stride(grid, axis)]
                } else {
                    0.0
                };
                edges += (next - here).abs();
                // The lower boundary edge of each line.
                if m == 0 {
                    edges += here.abs();
                }
            }
        }
        let l1 = self.values.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
        l1 + edges * grid.h().powi(dim as i32 - 1)
    }

    /// The five/seven-point negative Laplacian `−Δ_h f` with zero boundary
    /// values.
    pub fn neg_laplacian(&self) -> ScalarField {
        let mut out = vec![0.0; self.values.len()];
        apply_neg_laplacian(&self.grid, &self.values, None, &mut out);
        ScalarField {
            grid: self.grid,
            values: out,
        }
    }

    /// Multilinear interpolation at `x`, treating the boundary as zero.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let grid = &self.grid;
        let dim = grid.dim();
        let n = grid.n() as i64;
        let mut lo = [0i64; 3];
        let mut frac = [0.0; 3];
        for axis in 0..dim {
            let t = (x[axis] / grid.h()).clamp(0.0, (n + 1) as f64);
            let i0 = (t.floor() as i64).min(n);
            lo[axis] = i0;
            frac[axis] = t - i0 as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dim) {
            let mut weight = 1.0;
            let mut mi = [0usize; 3];
            let mut inside = true;
            for axis in 0..dim {
                let up = (corner >> axis) & 1 == 1;
                let k = lo[axis] + up as i64;
                weight *= if up { frac[axis] } else { 1.0 - frac[axis] };
                if k < 1 || k > n {
                    inside = false;
                } else {
                    mi[axis] = (k - 1) as usize;
                }
            }
            if inside && weight != 0.0 {
                acc += weight * self.values[grid.linear_index(&mi)];
            }
        }
        acc
    }

    /// Resamples the field on another grid by multilinear interpolation.
    pub fn interpolate_to(&self, target: &Grid) -> Result<ScalarField> {
        if target.dim() != self.grid.dim() {
            return Err(Error::GridMismatch(format!(
                "cannot interpolate a {}D field onto a {}D grid",
                self.grid.dim(),
                target.dim()
            )));
        }
        if target == &self.grid {
            return Ok(self.clone());
        }
        Ok(ScalarField::from_fn(*target, |x| self.value_at(x)))
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

fn stride(grid: &Grid, axis: usize) -> usize {
    grid.n().pow((grid.dim() - 1 - axis) as u32)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = (−Δ_h + diag(shift)) x` on the interior nodes of `grid`.
pub(crate) fn apply_neg_laplacian(grid: &Grid, x: &[f64], shift: Option<&[f64]>, out: &mut [f64]) {
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let center = 2.0 * grid.dim() as f64;
    match grid.dim() {
        1 => {
            for i in 0..n {
                let mut s = 0.0;
                if i > 0 {
                    s += x[i - 1];
                }
                if i + 1 < n {
                    s += x[i + 1];
                }
                out[i] = (center * x[i] - s) * inv_h2;
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    let idx = i * n + j;
                    let mut s = 0.0;
                    if i > 0 {
                        s += x[idx - n];
                    }
                    if i + 1 < n {
                        s += x[idx + n];
                    }
                    if j > 0 {
                        s += x[idx - 1];
                    }
                    if j + 1 < n {
                        s += x[idx + 1];
                    }
                    out[idx] = (center * x[idx] - s) * inv_h2;
                }
            }
        }
        _ => {
            let nn = n * n;
            for i in 0..n {
                for j in 0..n {
                    let row = i * nn + j * n;
                    for k in 0..n {
                        let idx = row + k;
                        let mut s = 0.0;
                        if i > 0 {
                            s += x[idx - nn];
                        }
                        if i + 1 < n {
                            s += x[idx + nn];
                        }
                        if j > 0 {
                            s += x[idx - n];
                        }
                        if j + 1 < n {
                            s += x[idx + n];
                        }
                        if k > 0 {
                            s += x[idx - 1];
                        }
                        if k + 1 < n {
                            s += x[idx + 1];
                        }
                        out[idx] = (center * x[idx] - s) * inv_h2;
                    }
                }
            }
        }
    }
    if let Some(shift) = shift {
        for ((o, &d), &v) in out.iter_mut().zip(shift).zip(x) {
            *o += d * v;
        }
    }
}

/// Diagonal of `−Δ_h`.
pub(crate) fn neg_laplacian_diagonal(grid: &Grid) -> f64 {
    2.0 * grid.dim() as f64 / (grid.h() * grid.h())
}
