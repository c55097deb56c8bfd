// Smoothing a Dirac mass with a bump kernel, and its Newtonian potential.

use measure_control::{DiscreteMeasure, Grid, Result};

pub fn run_example() -> Result<()> {
    let grid = Grid::new(3, 15)?;
    let dirac = DiscreteMeasure::dirac(3, &[0.5, 0.5, 0.5], 1.0)?;
    for cells in [4.0, 3.0, 2.0] {
        let rho = dirac.mollify(cells * grid.h(), &grid)?;
        println!("radius {cells}h: mass {:.12}, peak density {:.1}", rho.integral(), rho.max());
    }
    for r in [0.1, 0.2, 0.4] {
        println!("potential at distance {r}: {:.5}", dirac.newtonian_potential(&[0.5 + r, 0.5, 0.5])?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
