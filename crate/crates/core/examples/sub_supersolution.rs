// Monotone iteration between the constant subsolution 0 and the linear
// solution, which is a supersolution whenever g >= 0 on it.

use measure_control::solver::{solve_by_sub_supersolution, solve_linear, solve_semilinear, SolverOptions};
use measure_control::{DiscreteMeasure, Grid, Nonlinearity, Result, ScalarField};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(2, 15)?;
    let mu = DiscreteMeasure::from_density(ScalarField::from_fn(grid, |x| 20.0 * x[0] * x[1]));
    let g = Nonlinearity::power(2.0)?;

    let (upper, _) = solve_linear(&grid, &mu, 1e-12)?;
    let lower = ScalarField::zeros(grid);
    let (u, report) = solve_by_sub_supersolution(&grid, &g, &mu, &lower, &upper, &SolverOptions::default())?;
    let (newton, _) = solve_semilinear(&grid, &g, &mu, 1e-12)?;
    println!(
        "{} monotone sweeps, max pointwise increase {:.1e}, distance to Newton {:.2e}",
        report.iterations,
        report.monotone_violation.unwrap_or(0.0),
        u.sub(&newton).max_abs()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
