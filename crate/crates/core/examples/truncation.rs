// Truncating a state by a supersolution never increases the total
// variation of the datum that produces it.

use measure_control::solver::{residual_measure, truncate_min, truncation_tv_check};
use measure_control::{Grid, Nonlinearity, Result, ScalarField};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(2, 33)?;
    let g = Nonlinearity::power(3.0)?;
    let u = ScalarField::from_fn(grid, |x| 2.0 * (3.0 * x[0]).sin() * (2.0 * x[1]).cos());
    let w = ScalarField::constant(grid, 0.5);

    let (z, mu_z) = truncate_min(&u, &w, &g)?;
    println!("max z = {:.3} (u reaches {:.3})", z.max(), u.max());
    println!(
        "‖μ_z‖ = {:.4} <= ‖μ_u‖ = {:.4}",
        mu_z.tv_norm(),
        residual_measure(&g, &u).tv_norm()
    );
    let report = truncation_tv_check(&u, &w, &g)?;
    println!("slack {:.4}", report.slack);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
