//! Direct evaluation of the cone extension operator
//! `Ef(x,t) = sum_nodes h^d exp(2 pi i (<xi,x> + |xi| t)) f(xi)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, guard, Result};
use crate::grid::{GridFunction, TensorLattice};
use crate::numeric::{pairwise_sum, C64};

pub use crate::measures::measure_ft;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacetimePointSet {
    /// Spacetime points `(x, t)`, each of length `d + 1`.
    pub points: Vec<Vec<f64>>,
    pub tag: String,
}

impl SpacetimePointSet {
    pub fn new(points: Vec<Vec<f64>>, tag: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return domain("point set must be nonempty");
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return domain("points have mixed dimensions");
        }
        Ok(Self { points, tag: tag.into() })
    }
}

/// Largest spacetime radius that a grid of spacing `h` resolves: `1/(4h)`.
pub fn alias_radius(spacing: f64) -> f64 {
    0.25 / spacing
}

fn check_alias(f: &GridFunction, p: &[f64]) -> Result<()> {
    let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lim = alias_radius(f.spacing);
    if r > lim * (1.0 + 1e-12) {
        return guard(format!("evaluation point at radius {r:.3} exceeds the alias limit {lim:.3}"));
    }
    Ok(())
}

/// Lifted nodes `(xi, |xi|)` and weighted coefficients `h^d f(xi)`.
fn lifted(f: &GridFunction) -> (Vec<f64>, Vec<C64>) {
    let d = f.d;
    let w = f.weight();
    let coords = f.coords();
    let mut lift = Vec::with_capacity(f.len() * (d + 1));
    for xi in coords.chunks(d) {
        lift.extend_from_slice(xi);
        lift.push(xi.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    (lift, f.values().iter().map(|v| v * w).collect())
}

/// Nodes per inner block of the per-point sums.
const BLOCK: usize = 256;

fn point_value(lift: &[f64], coef: &[C64], p: &[f64]) -> C64 {
    let n = p.len();
    let blocks: Vec<C64> = coef
        .chunks(BLOCK)
        .zip(lift.chunks(BLOCK * n))
        .map(|(cb, lb)| {
            let mut s = C64::default();
            for (c, xi) in cb.iter().zip(lb.chunks(n)) {
                let mut ph = 0.0;
                for (a, b) in xi.iter().zip(p) {
                    ph += a * b;
                }
                let (sn, cs) = (2.0 * PI * ph).sin_cos();
                s += c * C64::new(cs, sn);
            }
            s
        })
        .collect();
    pairwise_sum(&blocks)
}

/// `Ef` at every point of `pts`. Points beyond the alias radius are rejected.
pub fn extend(f: &GridFunction, pts: &SpacetimePointSet) -> Result<Vec<C64>> {
    extend_points(f, &pts.points)
}

pub fn extend_points(f: &GridFunction, pts: &[Vec<f64>]) -> Result<Vec<C64>> {
    for p in pts {
        if p.len() != f.d + 1 {
            return domain("spacetime points must have d + 1 coordinates");
        }
        check_alias(f, p)?;
    }
    let (lift, coef) = lifted(f);
    Ok(pts.par_iter().map(|p| point_value(&lift, &coef, p)).collect())
}

/// Precomputed data for evaluating `Ef` on many translates of one tensor
/// lattice shape (cube sub-grids): per-node step factors are shared and each
/// translate costs one phase per node plus multiplications.
pub struct LatticeKernel {
    dim: usize,
    lift: Vec<f64>,
    coef: Vec<C64>,
    /// `exp(2 pi i <Xi, step_j>)`, `dim` per node.
    steps: Vec<C64>,
    n: usize,
    spacing: f64,
}

impl LatticeKernel {
    pub fn new(f: &GridFunction, shape: &TensorLattice) -> Result<Self> {
        let dim = f.d + 1;
        if shape.steps.len() != dim {
            return domain("lattice dimension does not match the grid");
        }
        let (lift, coef) = lifted(f);
        let mut steps = Vec::with_capacity(f.len() * dim);
        for xi in lift.chunks(dim) {
            for s in &shape.steps {
                let ph: f64 = xi.iter().zip(s).map(|(a, b)| a * b).sum();
                steps.push(C64::from_polar(1.0, 2.0 * PI * ph));
            }
        }
        Ok(Self { dim, lift, coef, steps, n: shape.n, spacing: f.spacing })
    }

    /// Values on `origin + sum m_j step_j`, in the order of
    /// [`TensorLattice::points`] (first axis fastest).
    pub fn eval(&self, lattice: &TensorLattice) -> Result<Vec<C64>> {
        for c in corner_points(lattice) {
            let r = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > alias_radius(self.spacing) * (1.0 + 1e-12) {
                return guard(format!("lattice point at radius {r:.3} exceeds the alias limit"));
            }
        }
        let dim = self.dim;
        let n = self.n;
        let npts = n.pow(dim as u32);
        let mut partials: Vec<Vec<C64>> = Vec::new();
        for (cb, (lb, sb)) in self
            .coef
            .chunks(BLOCK)
            .zip(self.lift.chunks(BLOCK * dim).zip(self.steps.chunks(BLOCK * dim)))
        {
            let mut acc = vec![C64::default(); npts];
            let mut powers = vec![C64::default(); dim * n];
            for (c, (xi, z)) in cb.iter().zip(lb.chunks(dim).zip(sb.chunks(dim))) {
                let ph: f64 = xi.iter().zip(&lattice.origin).map(|(a, b)| a * b).sum();
                let base = c * C64::from_polar(1.0, 2.0 * PI * ph);
                for j in 0..dim {
                    let mut v = C64::new(1.0, 0.0);
                    for m in 0..n {
                        powers[j * n + m] = v;
                        v *= z[j];
                    }
                }
                accumulate(&mut acc, base, &powers, dim, n);
            }
            partials.push(acc);
        }
        Ok(pairwise_vec(partials, npts))
    }
}

/// `acc[m] += base * prod_j powers[j][m_j]`, first axis fastest.
fn accumulate(acc: &mut [C64], base: C64, powers: &[C64], dim: usize, n: usize) {
    // Build the outer product one axis at a time, last axis outermost.
    fn rec(acc: &mut [C64], v: C64, powers: &[C64], axis: usize, n: usize, offset: usize, stride: usize) {
        if axis == 0 {
            for m in 0..n {
                acc[offset + m] += v * powers[m];
            }
            return;
        }
        for m in 0..n {
            rec(acc, v * powers[axis * n + m], powers, axis - 1, n, offset + m * stride, stride / n);
        }
    }
    let stride = n.pow(dim as u32 - 1);
    rec(acc, base, powers, dim - 1, n, 0, stride);
}

fn pairwise_vec(mut parts: Vec<Vec<C64>>, len: usize) -> Vec<C64> {
    if parts.is_empty() {
        return vec![C64::default(); len];
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("nonempty")
}

fn corner_points(l: &TensorLattice) -> Vec<Vec<f64>> {
    let dim = l.steps.len();
    let top = (l.n - 1) as f64;
    (0..1usize << dim)
        .map(|mask| {
            let mut p = l.origin.clone();
            for (j, s) in l.steps.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    for (pk, sk) in p.iter_mut().zip(s) {
                        *pk += top * sk;
                    }
                }
            }
            p
        })
        .collect()
}

/// `sum h^d |f|`, the trivial bound for `|Ef|`.
pub fn l1_bound(f: &GridFunction) -> f64 {
    let terms: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    pairwise_sum(&terms) * f.weight()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{annulus_grid, build_cube_cover};

    #[test]
    fn constant_on_half_annulus() {
        let g = annulus_grid(2, 64, true).unwrap().map(|_, _| C64::new(1.0, 0.0));
        let v = extend_points(&g, &[vec![0.0, 0.0, 0.0]]).unwrap()[0];
        assert!((v.re / (1.5 * PI) - 1.0).abs() < 0.02 && v.im.abs() < 1e-9);
    }

    #[test]
    fn lattice_kernel_matches_direct() {
        let g = annulus_grid(2, 32, true)
            .unwrap()
            .map(|p, _| C64::new((3.0 * p[0]).cos(), p[1] * p[0]));
        let cover = build_cube_cover(16.0, 2).unwrap();
        let shape = cover.cube_lattice(0, 3);
        let k = LatticeKernel::new(&g, &shape).unwrap();
        let i = cover.cubes.iter().position(|c| c.index == vec![0, 1, -1]).unwrap();
        let lat = cover.cube_lattice(i, 3);
        let fast = k.eval(&lat).unwrap();
        let slow = extend_points(&g, &lat.points()).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn alias_guard() {
        let g = annulus_grid(2, 16, true).unwrap();
        assert!(matches!(extend_points(&g, &[vec![5.0, 0.0, 0.0]]), Err(crate::Error::Guard(_))));
    }
}
