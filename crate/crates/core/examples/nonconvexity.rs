// F is not convex: along the ray sμ the midpoint value exceeds the
// average of the endpoint values.

use measure_control::experiments::{exp_nonconvexity, ExperimentSpec};
use measure_control::Result;

pub fn run_example() -> Result<()> {
    for p in [1.0, 2.0, 3.0] {
        let spec = ExperimentSpec::new("exp_nonconvexity").with_param("p", p).with_param("n", 15);
        let report = exp_nonconvexity(&spec)?;
        print!("p = {p}: {}", report.render());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
