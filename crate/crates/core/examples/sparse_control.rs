// Minimizes ‖u(μ) − u_d‖_L2 + α‖μ‖ and shows how sparse the optimal
// control is.

use measure_control::control::{check_state_regularity, optimize, ControlProblem, OptimizeConfig};
use measure_control::{Grid, Nonlinearity, Result, ScalarField};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(2, 15)?;
    let bump = |x: &[f64], c: [f64; 2]| (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / 0.01).exp();
    let u_d = ScalarField::from_fn(grid, |x| 0.3 * bump(x, [0.3, 0.3]) + 0.2 * bump(x, [0.7, 0.6]));
    let prob = ControlProblem::new(Nonlinearity::power(3.0)?, u_d, 2.0, 0.005)?;

    let result = optimize(&prob, &OptimizeConfig::default())?;
    println!(
        "F = {:.5} (F(0) = {:.5}), ‖μ*‖ = {:.4}, {:.0}% of nodes carry no control, {} iterations ({:?})",
        result.f_value,
        prob.cost_at_zero(),
        result.tv,
        100.0 * result.sparsity,
        result.iterations,
        result.status
    );
    let report = check_state_regularity(&prob, &result)?;
    println!(
        "min u* = {:.2e}, max |u*| = {:.4} <= ‖u_d‖_∞ = {:.4}, checks ok: {}",
        report.u_min,
        report.u_sup,
        report.ud_sup,
        report.all_ok()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
