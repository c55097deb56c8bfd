// A unit Dirac mass in the middle of the square, with and without
// absorption.

use measure_control::solver::{absorption_l1, solve_linear, solve_semilinear};
use measure_control::{DiscreteMeasure, Grid, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(2, 31)?;
    let dirac = DiscreteMeasure::dirac(2, &[0.5, 0.5], 1.0)?;

    let (linear, report) = solve_linear(&grid, &dirac, 1e-10)?;
    println!(
        "linear: u(center) = {:.4}, {} CG iterations",
        linear.value_at(&[0.5, 0.5]),
        report.linear_iterations
    );

    for q in [1.0, 2.0, 3.0] {
        let g = Nonlinearity::power(q)?;
        let (u, report) = solve_semilinear(&grid, &g, &dirac, 1e-10)?;
        println!(
            "q = {q}: u(center) = {:.4}, ‖g(u)‖_L1 = {:.4} <= 1, {} Newton steps",
            u.value_at(&[0.5, 0.5]),
            absorption_l1(&g, &u),
            report.iterations
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
