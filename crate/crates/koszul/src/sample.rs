//! Deterministic sampling: seeded points in the chart cube and random
//! low-degree polynomial inputs for identity checks.
//!
//! The generator is a self-contained splitmix64 so that reports are
//! byte-identical for a given seed across platforms and releases.

use thiserror::Error;

use crate::chart::{Chart, Point};
use crate::expr::Expr;

/// splitmix64; passes through the full 2^64 state space, no warmup needed.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn seeded(seed: u64) -> Rng {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn unit(&mut self) -> f64 {
        let mantissa = self.next_u64() >> 11; // 53 bits
        (mantissa as f64) / (1u64 << 52) as f64 - 1.0
    }

    /// Small integer in [-2, 2].
    pub fn small_int(&mut self) -> i64 {
        (self.next_u64() % 5) as i64 - 2
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(
        "could not sample {wanted} points clear of excluded loci after {rejections} rejections"
    )]
    Exhausted { wanted: usize, rejections: usize },
    #[error("excluded-locus expression failed to evaluate: {0}")]
    Excluded(#[from] crate::expr::EvalError),
}

/// Distance proxy below which a sample counts as too close to a locus.
const LOCUS_MARGIN: f64 = 0.1;
const MAX_REJECTIONS: usize = 1000;

/// Draw `n` points uniformly from [-1,1]^dim, rejecting points where any
/// excluded-locus expression is within `LOCUS_MARGIN` of zero.
pub fn sample_points(chart: &Chart, n: usize, seed: u64) -> Result<Vec<Point>, SampleError> {
    let mut rng = Rng::seeded(seed);
    let mut points = Vec::with_capacity(n);
    let mut rejections = 0;
    while points.len() < n {
        let candidate: Point = (0..chart.dim()).map(|_| rng.unit()).collect();
        let mut ok = true;
        for locus in chart.excluded() {
            if locus.eval(&candidate)?.abs() < LOCUS_MARGIN {
                ok = false;
                break;
            }
        }
        if ok {
            points.push(candidate);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(SampleError::Exhausted {
                    wanted: n,
                    rejections,
                });
            }
        }
    }
    Ok(points)
}

/// Random polynomial of total degree <= 2 with small integer coefficients.
/// Never identically zero (falls back to a constant 1 if all draws vanish).
pub fn random_polynomial(chart: &Chart, rng: &mut Rng) -> Expr {
    let dim = chart.dim();
    let mut acc = Expr::int(rng.small_int());
    for i in 0..dim {
        let c = rng.small_int();
        acc = acc.add(&Expr::int(c).mul(&Expr::coord(i)));
    }
    for i in 0..dim {
        for j in i..dim {
            let c = rng.small_int();
            acc = acc.add(&Expr::int(c).mul(&Expr::coord(i)).mul(&Expr::coord(j)));
        }
    }
    let acc = acc.simplify();
    if acc.is_zero() {
        Expr::one()
    } else {
        acc
    }
}

/// Component list for a random polynomial covector/vector.
pub fn random_components(chart: &Chart, rng: &mut Rng) -> Vec<Expr> {
    (0..chart.dim())
        .map(|_| random_polynomial(chart, rng))
        .collect()
}

/// Random affine function with small integer coefficients.
pub fn random_linear(chart: &Chart, rng: &mut Rng) -> Expr {
    let mut acc = Expr::int(rng.small_int());
    for i in 0..chart.dim() {
        acc = acc.add(&Expr::int(rng.small_int()).mul(&Expr::coord(i)));
    }
    let acc = acc.simplify();
    if acc.is_zero() {
        Expr::one()
    } else {
        acc
    }
}

/// Component list with affine coefficients; nested brackets stay small.
pub fn random_linear_components(chart: &Chart, rng: &mut Rng) -> Vec<Expr> {
    (0..chart.dim())
        .map(|_| random_linear(chart, rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let chart = Chart::new(vec!["x", "y", "z"]).unwrap();
        let a = sample_points(&chart, 20, 7).unwrap();
        let b = sample_points(&chart, 20, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_points(&chart, 20, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn respects_excluded_loci() {
        let chart = Chart::new(vec!["x", "y"]).unwrap();
        let chart = chart.with_excluded(vec![Expr::coord(0)]);
        let pts = sample_points(&chart, 50, 0).unwrap();
        for p in pts {
            assert!(p[0].abs() >= 0.1);
        }
    }

    #[test]
    fn exhaustion_reported() {
        // the zero constant's locus is the whole chart, so every candidate
        // point is rejected
        let chart = Chart::new(vec!["x"]).unwrap().with_excluded(vec![Expr::zero()]);
        assert!(matches!(
            sample_points(&chart, 1, 0),
            Err(SampleError::Exhausted { .. })
        ));
    }
}
