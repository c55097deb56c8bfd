// Mollified Diracs refined together with the grid, with the cubic
// absorption. Coarse levels only, to keep the run short; the
// `exp_dirac_collapse` experiment goes to n = 63.

use measure_control::experiments::{exp_dirac_collapse, ExperimentSpec};
use measure_control::Result;

pub fn run_example() -> Result<()> {
    let spec = ExperimentSpec::new("exp_dirac_collapse")
        .with_param("levels", vec![7, 15, 23])
        .with_param("subcritical_q", serde_json::Value::Null);
    let report = exp_dirac_collapse(&spec)?;
    if let Some(table) = report.table("collapse") {
        println!("{}", table.header.join("\t"));
        for row in &table.rows {
            println!("{}", row.join("\t"));
        }
    }
    print!("{}", report.render());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
