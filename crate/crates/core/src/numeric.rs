//! Deterministic summation, small fitting helpers and seeded sampling.
//!
//! Every reduction in the crate goes through [`pairwise_sum`] or
//! [`par_chunked`], which split work into fixed-size chunks whose partial
//! results are combined in index order. The answer therefore never depends on
//! how many worker threads rayon happens to use.

use std::ops::{Add, Range};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type C64 = Complex<f64>;

/// Base block below which pairwise summation falls back to a plain loop.
const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if xs.len() <= PAIRWISE_BLOCK {
        let mut s = T::default();
        for &x in xs {
            s = s + x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Streaming pairwise accumulator.
///
/// Values are pushed one at a time; partial sums of equal size are merged like
/// a binary counter, which reproduces the error behaviour of pairwise
/// summation without buffering the whole input.
#[derive(Clone, Debug, Default)]
pub struct PairwiseAcc<T> {
    levels: Vec<Option<T>>,
}

impl<T> PairwiseAcc<T>
where
    T: Copy + Add<Output = T> + Default,
{
    pub fn new() -> Self {
        Self { levels: Vec::new() }
    }

    pub fn push(&mut self, mut x: T) {
        for slot in self.levels.iter_mut() {
            match slot.take() {
                Some(y) => x = y + x,
                None => {
                    *slot = Some(x);
                    return;
                }
            }
        }
        self.levels.push(Some(x));
    }

    pub fn total(&self) -> T {
        let mut s = T::default();
        for v in self.levels.iter().rev().flatten() {
            s = s + *v;
        }
        s
    }
}

/// Chunk length used by the parallel reductions. Fixed so that results do
/// not depend on the worker count.
pub const CHUNK: usize = 1024;

/// Map fixed index chunks in parallel and combine the per-chunk results
/// pairwise in chunk order.
pub fn par_chunked<T, F>(n: usize, chunk: usize, f: F) -> T
where
    T: Copy + Add<Output = T> + Default + Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let parts: Vec<T> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| f(c * chunk..((c + 1) * chunk).min(n)))
        .collect();
    pairwise_sum(&parts)
}

/// Ordinary least squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = pairwise_sum(x) / nf;
    let my = pairwise_sum(y) / nf;
    let sxx: Vec<f64> = x.iter().map(|&v| (v - mx) * (v - mx)).collect();
    let sxy: Vec<f64> = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).collect();
    let sxx = pairwise_sum(&sxx);
    if sxx <= 0.0 {
        return None;
    }
    let slope = pairwise_sum(&sxy) / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .collect();
    let residual = (pairwise_sum(&res) / nf).sqrt();
    Some(LineFit { slope, intercept, residual })
}

/// Leave-one-out jackknife of the slope: returns (mean, standard error).
pub fn jackknife_slope(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 3 {
        return None;
    }
    let mut slopes = Vec::with_capacity(n);
    for skip in 0..n {
        let xs: Vec<f64> = (0..n).filter(|&i| i != skip).map(|i| x[i]).collect();
        let ys: Vec<f64> = (0..n).filter(|&i| i != skip).map(|i| y[i]).collect();
        slopes.push(fit_line(&xs, &ys)?.slope);
    }
    let nf = n as f64;
    let mean = pairwise_sum(&slopes) / nf;
    let dev: Vec<f64> = slopes.iter().map(|s| (s - mean) * (s - mean)).collect();
    let se = ((nf - 1.0) / nf * pairwise_sum(&dev)).sqrt();
    Some((mean, se))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Seeded quasi-random points in `[0,1)^dim`: a Halton sequence with a
/// Cranley-Patterson rotation drawn from the seed.
pub struct Halton {
    dim: usize,
    shift: Vec<f64>,
    next: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        use rand::Rng;
        assert!(dim <= PRIMES.len(), "Halton dimension too large");
        let mut r = rng(seed);
        let shift = (0..dim).map(|_| r.gen::<f64>()).collect();
        Self { dim, shift, next: 1 }
    }

    pub fn sample(&mut self) -> Vec<f64> {
        let i = self.next;
        self.next += 1;
        (0..self.dim)
            .map(|k| (radical_inverse(i, PRIMES[k]) + self.shift[k]).fract())
            .collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integers() {
        let xs: Vec<f64> = (1..=10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 50_005_000.0);
        let mut acc = PairwiseAcc::new();
        for &x in &xs {
            acc.push(x);
        }
        assert_eq!(acc.total(), 50_005_000.0);
    }

    #[test]
    fn chunked_reduction_is_order_fixed() {
        let f = |r: Range<usize>| r.map(|i| 1.0 / (1.0 + i as f64)).sum::<f64>();
        let a = par_chunked(100_000, 257, f);
        let b = par_chunked(100_000, 257, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn exact_power_law_fit() {
        let x: Vec<f64> = (2..8).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 1.5 * v).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let (m, se) = jackknife_slope(&x, &y).unwrap();
        assert!((m + 1.5).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn halton_is_reproducible_and_in_range() {
        let mut a = Halton::new(3, 9);
        let mut b = Halton::new(3, 9);
        for _ in 0..100 {
            let p = a.sample();
            assert_eq!(p, b.sample());
            assert!(p.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
    }
}
