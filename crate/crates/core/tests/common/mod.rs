#![allow(dead_code)]

use measure_control::{Grid, ScalarField};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Dense matrix of the discrete operator `−Δ_h`, assembled column by column
/// from explicit neighbour enumeration.
pub fn dense_neg_laplacian(grid: &Grid) -> DMatrix<f64> {
    let n = grid.n();
    let dim = grid.dim();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut a = DMatrix::zeros(grid.len(), grid.len());
    for i in 0..grid.len() {
        let mi = grid.multi_index(i);
        a[(i, i)] = 2.0 * dim as f64 * inv_h2;
        for axis in 0..dim {
            for step in [-1i64, 1] {
                let c = mi[axis] as i64 + step;
                if c >= 0 && c < n as i64 {
                    let mut nb = mi;
                    nb[axis] = c as usize;
                    a[(i, grid.linear_index(&nb[..dim]))] = -inv_h2;
                }
            }
        }
    }
    a
}

pub fn to_vector(f: &ScalarField) -> DVector<f64> {
    DVector::from_column_slice(f.values())
}

pub fn from_vector(grid: Grid, v: &DVector<f64>) -> ScalarField {
    ScalarField::from_values(grid, v.iter().copied().collect()).unwrap()
}

pub fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop_oneof![(1usize..=12).prop_map(|n| (1, n)), (1usize..=7).prop_map(|n| (2, n)), (1usize..=4).prop_map(|n| (3, n))]
        .prop_map(|(d, n)| Grid::new(d, n).unwrap())
}

pub fn field_on(grid: Grid, scale: f64) -> impl Strategy<Value = ScalarField> {
    proptest::collection::vec(-scale..scale, grid.len())
        .prop_map(move |v| ScalarField::from_values(grid, v).unwrap())
}

pub fn grid_and_field() -> impl Strategy<Value = (Grid, ScalarField)> {
    grid_strategy().prop_flat_map(|g| (Just(g), field_on(g, 10.0)))
}

pub fn grid_and_fields(count: usize) -> impl Strategy<Value = (Grid, Vec<ScalarField>)> {
    grid_strategy().prop_flat_map(move |g| (Just(g), proptest::collection::vec(field_on(g, 10.0), count)))
}
