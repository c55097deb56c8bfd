//! Seeded generators of smooth test fields and nonlinearities.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Grid, ScalarField};
use crate::solver::Nonlinearity;

/// Independent stream `stream` of the generator seeded by `seed`, so that
/// instances can be drawn in parallel and still depend only on their index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sum of `modes` random products of sines with random phases, frequencies
/// up to 3 and amplitudes up to `amplitude`.
pub fn smooth_field(rng: &mut impl Rng, grid: Grid, modes: usize, amplitude: f64) -> ScalarField {
    let dim = grid.dim();
    let terms: Vec<(f64, Vec<(f64, f64)>)> = (0..modes)
        .map(|_| {
            let a = rng.gen_range(-amplitude..=amplitude);
            let axes = (0..dim)
                .map(|_| (rng.gen_range(1..=3) as f64 * PI, rng.gen_range(0.0..2.0 * PI)))
                .collect();
            (a, axes)
        })
        .collect();
    ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(a, axes)| a * axes.iter().zip(x).map(|((k, ph), c)| (k * c + ph).sin()).product::<f64>())
            .sum()
    })
}

/// A random nonnegative smooth field that vanishes on part of the domain.
pub fn nonnegative_field(rng: &mut impl Rng, grid: Grid, amplitude: f64) -> ScalarField {
    let offset = rng.gen_range(-0.3..0.3) * amplitude;
    smooth_field(rng, grid, 3, amplitude).map(|v| (v + offset).max(0.0))
}

/// One of `t^q` (odd power, `q ∈ [1, 4]`), `λt` (`λ ∈ [0, 5]`) or a
/// three-piece monotone table.
pub fn nonlinearity(rng: &mut impl Rng) -> Nonlinearity {
    match rng.gen_range(0..3) {
        0 => Nonlinearity::power(rng.gen_range(1.0..4.0)).expect("q >= 1"),
        1 => Nonlinearity::linear(rng.gen_range(0.0..5.0)).expect("lambda >= 0"),
        _ => {
            let s1 = rng.gen_range(0.0..3.0);
            let s2 = rng.gen_range(0.0..3.0);
            let s3 = rng.gen_range(0.0..3.0);
            Nonlinearity::table(vec![(-1.0, -s1), (0.0, 0.0), (0.5, 0.5 * s2), (1.0, 0.5 * s2 + 0.5 * s3)])
                .expect("monotone table")
        }
    }
}

/// Short human-readable description used in tables.
pub fn describe(g: &Nonlinearity) -> String {
    match g {
        Nonlinearity::Power { q } => format!("power(q={q:.4})"),
        Nonlinearity::Linear { lambda } => format!("linear(lambda={lambda:.4})"),
        Nonlinearity::Table(_) => "table".to_string(),
        Nonlinearity::Custom(_) => "custom".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let grid = Grid::new(2, 6).unwrap();
        let a = smooth_field(&mut stream_rng(42, 3), grid, 4, 1.0);
        let b = smooth_field(&mut stream_rng(42, 3), grid, 4, 1.0);
        let c = smooth_field(&mut stream_rng(42, 4), grid, 4, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(nonnegative_field(&mut stream_rng(1, 0), grid, 1.0).min() >= 0.0);
    }
}
