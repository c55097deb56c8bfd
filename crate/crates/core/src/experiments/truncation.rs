use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::random::{describe, nonlinearity, nonnegative_field, smooth_field, stream_rng};
use super::{num, Assertion, ExperimentReport, ExperimentSpec, Table};
use crate::domain::{Grid, ScalarField};
use crate::error::Result;
use crate::solver::{lemma_truncation_check, truncation_tv_check, Nonlinearity};

const KEYS: [&str; 4] = ["count", "dim", "lemma_n", "truncation_n"];
const REF_LEMMA: &str =
    "∫|−Δu + a| ≤ ∫|−Δu₁ + a₁| + ∫_{u₁>u₂}(a₂ − a₁) for u = min(u₁, u₂) when −Δu₂ + a₂ ≥ 0";
const REF_TRUNCATION: &str =
    "‖−Δz + g(z)‖_M ≤ ‖−Δu + g(u)‖_M for z = min(u, w), w a nonnegative supersolution";
const TOL: f64 = 1e-8;
const BINS: usize = 10;

struct Row {
    index: usize,
    check: &'static str,
    kind: String,
    lhs: f64,
    rhs: f64,
    slack: f64,
}

/// Randomized instances of the truncation lemma and of the total-variation
/// decrease under truncation by supersolutions.
///
/// Parameters: `count` (100 per check), `dim` (2), `lemma_n` (17),
/// `truncation_n` (33).
pub fn exp_truncation_suite(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.check_keys(&KEYS)?;
    let count = spec.usize_or("count", 100)?;
    let dim = spec.usize_or("dim", 2)?;
    let lemma_grid = Grid::new(dim, spec.usize_or("lemma_n", 17)?)?;
    let trunc_grid = Grid::new(dim, spec.usize_or("truncation_n", 33)?)?;
    let seed = spec.seed;

    let lemma_rows: Vec<Row> = (0..count)
        .into_par_iter()
        .map(|i| lemma_instance(seed, i, lemma_grid))
        .collect::<Result<_>>()?;
    let trunc_rows: Vec<Row> = (0..count)
        .into_par_iter()
        .map(|i| truncation_instance(seed, i, trunc_grid))
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(spec);
    let mut slacks = Table::new("truncation_slacks", &["check", "instance", "kind", "lhs", "rhs", "slack"]);
    for r in lemma_rows.iter().chain(&trunc_rows) {
        slacks.push(vec![
            r.check.to_string(),
            r.index.to_string(),
            r.kind.clone(),
            num(r.lhs),
            num(r.rhs),
            num(r.slack),
        ]);
    }
    report.table_data.push(slacks);

    let mut histogram = Table::new("truncation_histogram", &["check", "bin_lo", "bin_hi", "count"]);
    for rows in [&lemma_rows, &trunc_rows] {
        histogram_rows(rows, &mut histogram);
    }
    report.table_data.push(histogram);

    for (name, reference, rows) in [
        ("lemma_slack_nonnegative", REF_LEMMA, &lemma_rows),
        ("truncation_slack_nonnegative", REF_TRUNCATION, &trunc_rows),
    ] {
        let passed = rows.iter().filter(|r| r.slack >= -TOL).count();
        let min = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        report.assertions.push(Assertion::check(
            name,
            reference,
            passed == rows.len(),
            "slack ≥ −1e-8",
            format!("{passed}/{} instances, min slack {}", rows.len(), num(min)),
        ));
    }

    // Degenerate instances with known slack.
    let zero = ScalarField::zeros(lemma_grid);
    let zero_report = lemma_truncation_check(&zero, &zero, &zero, &zero)?;
    report.assertions.push(Assertion::check(
        "zero_instance",
        REF_LEMMA,
        zero_report.slack == 0.0,
        "exact",
        format!("slack {}", num(zero_report.slack)),
    ));
    let mut rng = stream_rng(seed, u64::MAX);
    let u1 = smooth_field(&mut rng, lemma_grid, 4, 1.0);
    let u2 = u1.map(|v| v + 0.25);
    let a1 = smooth_field(&mut rng, lemma_grid, 3, 1.0);
    let a2 = u2.neg_laplacian().scale(-1.0).zip_map(&nonnegative_field(&mut rng, lemma_grid, 1.0), |a, s| a + s);
    let shifted = lemma_truncation_check(&u1, &u2, &a1, &a2)?;
    report.assertions.push(Assertion::check(
        "shifted_instance_equality",
        REF_LEMMA,
        shifted.slack.abs() <= TOL * shifted.rhs.abs().max(1.0),
        "|slack| ≤ 1e-8",
        format!("u₂ = u₁ + 0.25: lhs {}, rhs {}", num(shifted.lhs), num(shifted.rhs)),
    ));

    report.summary = json!({
        "count": count,
        "lemma_min_slack": lemma_rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        "truncation_min_slack": trunc_rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
    });
    Ok(report)
}

/// Random `u₁, u₂, a₁` and `a₂ = Δ_h u₂ + s` with `s ≥ 0`, so that
/// `−Δ_h u₂ + a₂ = s`.
fn lemma_instance(seed: u64, index: usize, grid: Grid) -> Result<Row> {
    let mut rng = stream_rng(seed, index as u64);
    let u1 = smooth_field(&mut rng, grid, 4, 1.0);
    let u2 = smooth_field(&mut rng, grid, 4, 1.0);
    let a1 = smooth_field(&mut rng, grid, 3, 2.0);
    let s = nonnegative_field(&mut rng, grid, 2.0);
    let a2 = u2.neg_laplacian().scale(-1.0).add(&s);
    let r = lemma_truncation_check(&u1, &u2, &a1, &a2)?;
    Ok(Row {
        index,
        check: "lemma",
        kind: "random".into(),
        lhs: r.lhs,
        rhs: r.rhs,
        slack: r.slack,
    })
}

/// Random monotone `g`, a random state `u` and an exact nonnegative
/// supersolution `w` from one of three families.
fn truncation_instance(seed: u64, index: usize, grid: Grid) -> Result<Row> {
    let mut rng = stream_rng(seed, (1 << 32) + index as u64);
    let g: Nonlinearity = nonlinearity(&mut rng);
    let level = rng.gen_range(0.0..1.0);
    let (family, w) = match rng.gen_range(0..3) {
        0 => ("constant", ScalarField::constant(grid, level)),
        1 => {
            // −Δ_h of a sine product is a positive multiple of itself.
            let amp = rng.gen_range(0.1..2.0);
            ("sine", ScalarField::from_fn(grid, |x| level + amp * x.iter().map(|c| (PI * c).sin()).product::<f64>()))
        }
        _ => {
            // Product of concave parabolas: nonnegative discrete Laplacian.
            let amp = rng.gen_range(0.5..8.0);
            ("parabola", ScalarField::from_fn(grid, |x| level + amp * x.iter().map(|c| c * (1.0 - c)).product::<f64>()))
        }
    };
    let u = smooth_field(&mut rng, grid, 4, 2.0 * w.max_abs().max(0.5)).map(|v| v + level);
    let r = truncation_tv_check(&u, &w, &g)?;
    Ok(Row {
        index,
        check: "truncation",
        kind: format!("{family}/{}", describe(&g)),
        lhs: r.tv_truncated,
        rhs: r.tv_original,
        slack: r.slack,
    })
}

fn histogram_rows(rows: &[Row], table: &mut Table) {
    let Some(first) = rows.first() else { return };
    let lo = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / BINS as f64 } else { 1.0 };
    let mut counts = [0usize; BINS];
    for r in rows {
        let b = (((r.slack - lo) / width) as usize).min(BINS - 1);
        counts[b] += 1;
    }
    for (b, c) in counts.iter().enumerate() {
        table.push(vec![
            first.check.to_string(),
            num(lo + b as f64 * width),
            num(lo + (b + 1) as f64 * width),
            c.to_string(),
        ]);
    }
}
