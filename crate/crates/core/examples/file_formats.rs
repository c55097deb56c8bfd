// Writes a problem file with a measure and a desired state on disk, reads
// it back and solves it, as the `measctl solve` and `optimize` commands do.

use measure_control::control::{optimize, OptimizeConfig};
use measure_control::io::{read_field, write_field, write_measure, LoadedProblem};
use measure_control::solver::solve_semilinear_rhs;
use measure_control::{Atom, DiscreteMeasure, Grid, Result, ScalarField};

pub fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join(format!("measure-control-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| measure_control::Error::Io { path: dir.clone(), source: e })?;

    let grid = Grid::new(2, 15)?;
    let atoms = vec![
        Atom { x: [0.25, 0.5, 0.0], w: 1.0 },
        Atom { x: [0.75, 0.5, 0.0], w: -0.5 },
    ];
    write_measure(&dir.join("measure.json"), &DiscreteMeasure::new(2, atoms, None)?)?;
    write_field(&dir.join("target.csv"), &ScalarField::from_fn(grid, |x| 0.2 * x[0] * (1.0 - x[0])))?;
    let problem = r#"{
        "schema": 1,
        "grid": {"dim": 2, "n": 15},
        "g": {"kind": "table", "points": [[-1, -2], [0, 0], [1, 1]]},
        "p": 2,
        "alpha": 0.002,
        "u_d": {"file": "target.csv"},
        "measure": "measure.json"
    }"#;
    let path = dir.join("problem.json");
    std::fs::write(&path, problem).map_err(|e| measure_control::Error::Io { path: path.clone(), source: e })?;

    let loaded = LoadedProblem::read(&path)?;
    println!("{}", loaded.measure()?);
    let rhs = loaded.measure()?.rasterize(&grid)?;
    let (u, _) = solve_semilinear_rhs(&loaded.nonlinearity()?, &rhs, &loaded.spec.solver, None)?;
    write_field(&dir.join("state.bin"), &u)?;
    println!("state round trip exact: {}", read_field(&dir.join("state.bin"))? == u);

    let result = optimize(&loaded.control_problem()?, &OptimizeConfig::default())?;
    println!("optimal F = {:.6} with ‖μ*‖ = {:.4}", result.f_value, result.tv);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
