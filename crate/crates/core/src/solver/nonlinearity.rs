use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A user-supplied absorption term. Implementations must be continuous,
/// nondecreasing and vanish at zero; the derivative is the right derivative
/// where `value` has kinks.
pub trait MonotoneFunction: Send + Sync {
    fn value(&self, t: f64) -> f64;

    fn derivative(&self, t: f64) -> f64;

    /// `∫_0^t value(s) ds`. The default uses 16-point composite Gauss–Legendre.
    fn primitive(&self, t: f64) -> f64 {
        gauss_legendre(|s| self.value(s), 0.0, t, 16)
    }
}

/// Nondecreasing continuous `g` with `g(0) = 0`.
#[derive(Clone)]
pub enum Nonlinearity {
    /// `g(t) = |t|^{q-1} t`, `q >= 1`.
    Power { q: f64 },
    /// `g(t) = λ t`, `λ >= 0`.
    Linear { lambda: f64 },
    Table(PiecewiseLinear),
    Custom(Arc<dyn MonotoneFunction>),
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { q } => write!(f, "Power {{ q: {q} }}"),
            Nonlinearity::Linear { lambda } => write!(f, "Linear {{ lambda: {lambda} }}"),
            Nonlinearity::Table(t) => write!(f, "Table({:?})", t.points),
            Nonlinearity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Nonlinearity::Linear { lambda: 0.0 }
    }

    pub fn power(q: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "power exponent must satisfy q >= 1, got {q}"
            )));
        }
        Ok(Nonlinearity::Power { q })
    }

    pub fn linear(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "linear coefficient must be nonnegative, got {lambda}"
            )));
        }
        Ok(Nonlinearity::Linear { lambda })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        PiecewiseLinear::new(points).map(Nonlinearity::Table)
    }

    /// Wraps a user function after sampling it on `[-range, range]` for
    /// `g(0) = 0` and monotonicity.
    pub fn custom(f: Arc<dyn MonotoneFunction>, range: f64) -> Result<Self> {
        if f.value(0.0) != 0.0 {
            return Err(Error::InvalidNonlinearity("g(0) must vanish".into()));
        }
        let samples = 2001;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..samples {
            let t = -range + 2.0 * range * k as f64 / (samples - 1) as f64;
            let v = f.value(t);
            if !v.is_finite() || v < prev {
                return Err(Error::InvalidNonlinearity(format!(
                    "g decreases or is not finite near t = {t}"
                )));
            }
            if f.derivative(t) < 0.0 {
                return Err(Error::InvalidNonlinearity(format!(
                    "negative derivative at t = {t}"
                )));
            }
            prev = v;
        }
        Ok(Nonlinearity::Custom(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nonlinearity::Linear { lambda } if *lambda == 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => power_value(*q, t),
            Nonlinearity::Linear { lambda } => lambda * t,
            Nonlinearity::Table(table) => table.value(t),
            Nonlinearity::Custom(f) => f.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => {
                if *q == 1.0 {
                    1.0
                } else {
                    q * t.abs().powf(q - 1.0)
                }
            }
            Nonlinearity::Linear { lambda } => *lambda,
            Nonlinearity::Table(table) => table.slope_right(t),
            Nonlinearity::Custom(f) => f.derivative(t),
        }
    }

    /// `G(t) = ∫_0^t g`.
    pub fn primitive(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { q } => {
                if *q == 3.0 {
                    let t2 = t * t;
                    0.25 * t2 * t2
                } else {
                    t.abs().powf(q + 1.0) / (q + 1.0)
                }
            }
            Nonlinearity::Linear { lambda } => 0.5 * lambda * t * t,
            Nonlinearity::Table(table) => table.primitive(t),
            Nonlinearity::Custom(f) => f.primitive(t),
        }
    }

    /// Upper bound of `g'` over `[lo, hi]`.
    pub fn max_derivative(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Nonlinearity::Power { .. } => {
                let m = lo.abs().max(hi.abs());
                self.derivative(m)
            }
            Nonlinearity::Linear { lambda } => *lambda,
            Nonlinearity::Table(table) => table.max_slope(lo, hi),
            Nonlinearity::Custom(f) => {
                let samples = 1001;
                (0..samples)
                    .map(|k| f.derivative(lo + (hi - lo) * k as f64 / (samples - 1) as f64))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// The reflected nonlinearity `t ↦ −g(−t)`.
    pub fn reflect(&self) -> Nonlinearity {
        match self {
            Nonlinearity::Power { .. } | Nonlinearity::Linear { .. } => self.clone(),
            Nonlinearity::Table(table) => Nonlinearity::Table(table.reflect()),
            Nonlinearity::Custom(f) => Nonlinearity::Custom(Arc::new(Reflected(f.clone()))),
        }
    }
}

fn power_value(q: f64, t: f64) -> f64 {
    if q == 1.0 {
        t
    } else if q == 2.0 {
        t.abs() * t
    } else if q == 3.0 {
        t * t * t
    } else {
        t.abs().powf(q - 1.0) * t
    }
}

struct Reflected(Arc<dyn MonotoneFunction>);

impl MonotoneFunction for Reflected {
    fn value(&self, t: f64) -> f64 {
        -self.0.value(-t)
    }

    fn derivative(&self, t: f64) -> f64 {
        self.0.derivative(-t)
    }

    fn primitive(&self, t: f64) -> f64 {
        self.0.primitive(-t)
    }
}

/// Continuous piecewise-linear `g` through the given knots, extended
/// linearly beyond the first and last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidNonlinearity(
                "a table needs at least two knots".into(),
            ));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidNonlinearity("non-finite table entry".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in points.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidNonlinearity(format!(
                    "repeated knot t = {}",
                    pair[0].0
                )));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::InvalidNonlinearity(format!(
                    "table decreases between t = {} and t = {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let table = PiecewiseLinear { points };
        if table.value(0.0).abs() > 1e-14 {
            return Err(Error::InvalidNonlinearity(format!(
                "table gives g(0) = {}",
                table.value(0.0)
            )));
        }
        Ok(table)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Index of the segment used at `t` (right-continuous).
    fn segment(&self, t: f64) -> usize {
        let last = self.points.len() - 2;
        match self.points.iter().rposition(|&(k, _)| k <= t) {
            None => 0,
            Some(i) => i.min(last),
        }
    }

    fn slope(&self, seg: usize) -> f64 {
        let (t0, v0) = self.points[seg];
        let (t1, v1) = self.points[seg + 1];
        (v1 - v0) / (t1 - t0)
    }

    pub fn value(&self, t: f64) -> f64 {
        let seg = self.segment(t);
        let (t0, v0) = self.points[seg];
        v0 + self.slope(seg) * (t - t0)
    }

    pub fn slope_right(&self, t: f64) -> f64 {
        self.slope(self.segment(t))
    }

    pub fn primitive(&self, t: f64) -> f64 {
        let (a, b, sign) = if t >= 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
        let mut cuts = vec![a];
        cuts.extend(self.points.iter().map(|p| p.0).filter(|&k| k > a && k < b));
        cuts.push(b);
        let integral: f64 = cuts
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
            .sum();
        sign * integral
    }

    fn max_slope(&self, lo: f64, hi: f64) -> f64 {
        let (s0, s1) = (self.segment(lo), self.segment(hi));
        (s0..=s1).map(|s| self.slope(s)).fold(0.0, f64::max)
    }

    fn reflect(&self) -> PiecewiseLinear {
        PiecewiseLinear {
            points: self.points.iter().rev().map(|&(t, v)| (-t, -v)).collect(),
        }
    }
}

/// Composite Gauss–Legendre quadrature with 5 nodes per panel.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * width;
            let half = 0.5 * width;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, w)| w * f(mid + half * x))
                .sum::<f64>()
                * half
        })
        .sum()
}
