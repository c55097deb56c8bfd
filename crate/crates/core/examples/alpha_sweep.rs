// The misfit of the optimal state shrinks as the penalty weight α does.

use measure_control::control::{alpha_sweep, misfit_nonincreasing, ControlProblem, OptimizeConfig};
use measure_control::{Grid, Nonlinearity, Result, ScalarField};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(2, 15)?;
    let u_d = ScalarField::from_fn(grid, |x| 0.4 * (std::f64::consts::PI * x[0]).sin() * x[1]);
    let prob = ControlProblem::new(Nonlinearity::power(3.0)?, u_d, 2.0, 1.0)?;
    let alphas: Vec<f64> = (0..5).map(|k| 0.02 / 2f64.powi(k)).collect();

    let rows = alpha_sweep(&prob, &alphas, &OptimizeConfig::default())?;
    for r in &rows {
        println!("alpha = {:.5}: misfit {:.5e}, ‖μ‖ = {:.4}, slack {:.1e}", r.alpha, r.misfit, r.tv, r.slack);
    }
    println!("misfit nonincreasing: {}", misfit_nonincreasing(&rows, 0.05));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
