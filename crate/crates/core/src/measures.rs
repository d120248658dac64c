//! Atomic approximations of compactly supported measures: lattice measures,
//! Lebesgue proxies, Cantor measures and products, with Frostman-constant and
//! energy estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;

use crate::error::{domain, guard, Error, Result};
use crate::fft::{fftn, inverse_scale};
use crate::numeric::{pairwise_sum, par_chunked, unit_ball_volume, C64, CHUNK};

/// Arithmetic run of equal-weight atoms sharing all but the last coordinate.
#[derive(Clone, Debug, PartialEq)]
struct Run {
    prefix: Vec<f64>,
    start: f64,
    step: f64,
    count: usize,
    weight: f64,
}

/// Atoms on `origin + spacing * Z^n`, used by the FFT energy path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeMeta {
    pub spacing: f64,
    pub origin: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Atoms { points: Vec<f64>, weights: Vec<f64> },
    /// Tensor product; atoms are generated on demand.
    Product(Box<AtomicMeasure>, Box<AtomicMeasure>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    pub dim: usize,
    pub support: Support,
    /// Width `s` of the Gaussian mollifier `exp(-pi s^2 |xi|^2)`.
    pub mollifier_width: f64,
    pub alpha_meta: f64,
    pub provenance: String,
    pub lattice: Option<LatticeMeta>,
    runs: Vec<Run>,
}

impl AtomicMeasure {
    pub fn from_atoms(
        dim: usize,
        points: Vec<f64>,
        weights: Vec<f64>,
        mollifier_width: f64,
        alpha_meta: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() {
            return domain("atom coordinates do not match the dimension");
        }
        if weights.is_empty() {
            return domain("a measure needs at least one atom");
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return domain("atom weights must be positive");
        }
        if !(mollifier_width >= 0.0) {
            return domain("mollifier width must be nonnegative");
        }
        for p in points.chunks(dim) {
            let r2: f64 = p.iter().map(|v| v * v).sum();
            if r2 > 1.0 + 1e-12 {
                return domain("atoms must lie in the closed unit ball");
            }
        }
        let runs = build_runs(dim, &points, &weights);
        Ok(Self {
            dim,
            support: Support::Atoms { points, weights },
            mollifier_width,
            alpha_meta,
            provenance: provenance.into(),
            lattice: None,
            runs,
        })
    }

    pub fn len(&self) -> usize {
        match &self.support {
            Support::Atoms { weights, .. } => weights.len(),
            Support::Product(a, b) => a.len() * b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mass(&self) -> f64 {
        match &self.support {
            Support::Atoms { weights, .. } => pairwise_sum(weights),
            Support::Product(a, b) => a.mass() * b.mass(),
        }
    }

    /// Atom `i` as (point, weight).
    pub fn atom(&self, i: usize) -> (Vec<f64>, f64) {
        match &self.support {
            Support::Atoms { points, weights } => (points[i * self.dim..(i + 1) * self.dim].to_vec(), weights[i]),
            Support::Product(a, b) => {
                let (pa, wa) = a.atom(i / b.len());
                let (pb, wb) = b.atom(i % b.len());
                let mut p = pa;
                p.extend(pb);
                (p, wa * wb)
            }
        }
    }

    /// Flattened points and weights (materialises product atoms).
    pub fn atoms(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.support {
            Support::Atoms { points, weights } => (points.clone(), weights.clone()),
            Support::Product(..) => {
                let mut pts = Vec::with_capacity(self.len() * self.dim);
                let mut ws = Vec::with_capacity(self.len());
                for i in 0..self.len() {
                    let (p, w) = self.atom(i);
                    pts.extend(p);
                    ws.push(w);
                }
                (pts, ws)
            }
        }
    }

    /// Largest atom norm.
    pub fn support_radius(&self) -> f64 {
        match &self.support {
            Support::Atoms { points, .. } => points
                .chunks(self.dim)
                .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
            Support::Product(a, b) => a.support_radius().hypot(b.support_radius()),
        }
    }

    /// Fourier transform of the atoms without the mollifier factor.
    pub fn raw_ft(&self, xi: &[f64]) -> C64 {
        debug_assert_eq!(xi.len(), self.dim);
        match &self.support {
            Support::Atoms { .. } => {
                let n = self.dim;
                let last = xi[n - 1];
                let terms: Vec<C64> = self
                    .runs
                    .iter()
                    .map(|run| {
                        let mut ph = last * run.start;
                        for (x, p) in xi[..n - 1].iter().zip(&run.prefix) {
                            ph += x * p;
                        }
                        run.weight * C64::from_polar(1.0, -2.0 * PI * ph) * dirichlet(run.count, last * run.step)
                    })
                    .collect();
                pairwise_sum(&terms)
            }
            Support::Product(a, b) => a.raw_ft(&xi[..a.dim]) * b.raw_ft(&xi[a.dim..]),
        }
    }

    pub fn mollifier(&self, xi: &[f64]) -> f64 {
        let s = self.mollifier_width;
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        (-PI * s * s * r2).exp()
    }

    /// Number of arithmetic runs used by the fast transform.
    pub fn run_count(&self) -> usize {
        match &self.support {
            Support::Atoms { .. } => self.runs.len(),
            Support::Product(a, b) => a.run_count() + b.run_count(),
        }
    }
}

/// `sum_{k<n} exp(-2 pi i theta k)`.
fn dirichlet(n: usize, theta: f64) -> C64 {
    if n == 1 {
        return C64::new(1.0, 0.0);
    }
    let t = theta - theta.round();
    let nf = n as f64;
    let phase = C64::from_polar(1.0, -PI * t * (nf - 1.0));
    let den = (PI * t).sin();
    if den.abs() < 1e-9 {
        // Near an integer the ratio loses accuracy; sum directly.
        let mut s = C64::default();
        for k in 0..n {
            s += C64::from_polar(1.0, -2.0 * PI * t * k as f64);
        }
        return s;
    }
    phase * ((PI * nf * t).sin() / den)
}

fn build_runs(dim: usize, points: &[f64], weights: &[f64]) -> Vec<Run> {
    let n = weights.len();
    let key = |i: usize| -> Vec<u64> {
        points[i * dim..(i + 1) * dim - 1].iter().map(|v| v.to_bits()).collect()
    };
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(key(i)).or_default().push(i);
    }
    let mut runs = Vec::new();
    for (_, mut ids) in groups {
        ids.sort_by(|&a, &b| points[a * dim + dim - 1].total_cmp(&points[b * dim + dim - 1]));
        let last = |i: usize| points[i * dim + dim - 1];
        let prefix = points[ids[0] * dim..ids[0] * dim + dim - 1].to_vec();
        let mut k = 0;
        while k < ids.len() {
            let mut run = Run { prefix: prefix.clone(), start: last(ids[k]), step: 0.0, count: 1, weight: weights[ids[k]] };
            let mut j = k + 1;
            while j < ids.len() {
                let gap = last(ids[j]) - last(ids[j - 1]);
                let same_w = (weights[ids[j]] - run.weight).abs() <= 1e-12 * run.weight;
                let ok_gap = gap > 0.0 && (run.count == 1 || (gap - run.step).abs() <= 1e-9 * run.step);
                if !(same_w && ok_gap) {
                    break;
                }
                if run.count == 1 {
                    run.step = gap;
                }
                run.count += 1;
                j += 1;
            }
            runs.push(run);
            k = j;
        }
    }
    runs
}

/// `mu^(xi)` including the mollifier factor.
pub fn measure_ft(mu: &AtomicMeasure, xi: &[f64]) -> C64 {
    mu.raw_ft(xi) * mu.mollifier(xi)
}

fn lattice_points_in_ball(n: usize, spacing: f64, offset: f64) -> Vec<f64> {
    let k = (1.0 / spacing).floor() as i64 + 1;
    let mut pts = Vec::new();
    let mut cur = vec![-k; n];
    'outer: loop {
        let p: Vec<f64> = cur.iter().map(|&c| (c as f64 + offset) * spacing).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            pts.extend(p);
        }
        for j in (0..n).rev() {
            cur[j] += 1;
            if cur[j] <= k {
                continue 'outer;
            }
            cur[j] = -k;
        }
        break;
    }
    pts
}

/// Lebesgue measure restricted to balls of radius `eps/R` around
/// `R^{kappa-1} Z^n` in the unit ball, with `kappa n = n - alpha`. Each ball is
/// one atom carrying its volume; the mollifier width is `eps/R`.
pub fn lattice_measure(r: f64, alpha: f64, eps: f64, n: usize) -> Result<AtomicMeasure> {
    if n == 0 || !(alpha > 0.0 && alpha < n as f64) {
        return domain(format!("alpha = {alpha} must lie in (0, {n})"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return domain("eps must lie in (0, 1)");
    }
    let kappa = (n as f64 - alpha) / n as f64;
    if !(r.powf(kappa) > 2.0) {
        return domain(format!("R^kappa = {:.4} <= 2: the balls are not disjoint", r.powf(kappa)));
    }
    let spacing = r.powf(kappa - 1.0);
    if (2.0 / spacing + 1.0).powi(n as i32) > 4e8 {
        return guard("lattice measure has too many candidate atoms");
    }
    let points = lattice_points_in_ball(n, spacing, 0.0);
    let s = eps / r;
    let w = unit_ball_volume(n) * s.powi(n as i32);
    let count = points.len() / n;
    let mut mu = AtomicMeasure::from_atoms(n, points, vec![w; count], s, alpha, "lattice")?;
    mu.lattice = Some(LatticeMeta { spacing, origin: vec![0.0; n] });
    Ok(mu)
}

/// Lebesgue measure on the unit ball of `R^n`, discretised on a lattice of
/// the given spacing (atoms carry `spacing^n`; mollifier width = spacing).
pub fn lebesgue_ball(n: usize, spacing: f64) -> Result<AtomicMeasure> {
    if !(spacing > 0.0 && spacing < 0.5) {
        return domain("spacing must lie in (0, 1/2)");
    }
    if (2.0 / spacing + 1.0).powi(n as i32) > 4e8 {
        return guard("Lebesgue proxy has too many candidate atoms");
    }
    let points = lattice_points_in_ball(n, spacing, 0.0);
    let count = points.len() / n;
    let mut mu =
        AtomicMeasure::from_atoms(n, points, vec![spacing.powi(n as i32); count], spacing, n as f64, "lebesgue-ball")?;
    mu.lattice = Some(LatticeMeta { spacing, origin: vec![0.0; n] });
    Ok(mu)
}

pub fn point_mass(n: usize, at: &[f64], weight: f64) -> Result<AtomicMeasure> {
    if at.len() != n {
        return domain("point has the wrong dimension");
    }
    AtomicMeasure::from_atoms(n, at.to_vec(), vec![weight], 0.0, 0.0, "point")
}

/// `mu x lambda`, with `lambda` the midpoint rule for Lebesgue measure on
/// `[0, 1]` (`t_atoms` atoms). The mollifier of `mu` is kept.
pub fn product_measure(mu: &AtomicMeasure, t_atoms: usize) -> Result<AtomicMeasure> {
    if t_atoms < 8 {
        return domain("product measure needs at least 8 time atoms");
    }
    let h = 1.0 / t_atoms as f64;
    let ts: Vec<f64> = (0..t_atoms).map(|k| (k as f64 + 0.5) * h).collect();
    let mut lambda = AtomicMeasure::from_atoms(1, ts, vec![h; t_atoms], mu.mollifier_width, 1.0, "interval")?;
    lambda.lattice = Some(LatticeMeta { spacing: h, origin: vec![0.5 * h] });
    // Same spacing in both factors: the product sits on one lattice.
    let lattice = mu.lattice.as_ref().filter(|m| (m.spacing / h - 1.0).abs() < 1e-12).map(|m| {
        let mut origin = m.origin.clone();
        origin.push(0.5 * h);
        LatticeMeta { spacing: h, origin }
    });
    Ok(AtomicMeasure {
        dim: mu.dim + 1,
        support: Support::Product(Box::new(mu.clone()), Box::new(lambda)),
        mollifier_width: mu.mollifier_width,
        alpha_meta: mu.alpha_meta + 1.0,
        provenance: format!("{} x interval", mu.provenance),
        lattice,
        runs: Vec::new(),
    })
}

/// Two-branch self-similar measure on `[0,1]` with ratio `2^{-1/alpha}`:
/// `2^level` atoms of weight `2^{-level}` at the centers of the level
/// intervals.
pub fn cantor_measure(alpha: f64, level: u32) -> Result<AtomicMeasure> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain("Cantor alpha must lie in (0, 1]");
    }
    if level > 14 {
        return domain("Cantor level must be <= 14");
    }
    let ratio = 2f64.powf(-1.0 / alpha);
    let mut lefts = vec![0.0];
    let mut len = 1.0;
    for _ in 0..level {
        let next_len = len * ratio;
        lefts = lefts.iter().flat_map(|&a| [a, a + len - next_len]).collect();
        len = next_len;
    }
    let n = lefts.len();
    let pts: Vec<f64> = lefts.iter().map(|a| a + len / 2.0).collect();
    AtomicMeasure::from_atoms(1, pts, vec![1.0 / n as f64; n], 0.0, alpha, "cantor")
}

/// `n`-fold tensor power of a one-dimensional measure, scaled by
/// `1/sqrt(n)` so the support stays in the unit ball.
pub fn tensor_power(mu: &AtomicMeasure, n: usize) -> Result<AtomicMeasure> {
    if mu.dim != 1 || n == 0 {
        return domain("tensor_power needs a one-dimensional measure and n >= 1");
    }
    let (p, w) = mu.atoms();
    let m = w.len();
    let total = m.checked_pow(n as u32).filter(|&t| t <= 1 << 24);
    let Some(total) = total else {
        return guard("tensor power too large");
    };
    let s = 1.0 / (n as f64).sqrt();
    let mut pts = Vec::with_capacity(total * n);
    let mut ws = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut wt = 1.0;
        let mut coords = vec![0.0; n];
        for c in coords.iter_mut().rev() {
            let i = flat % m;
            flat /= m;
            *c = p[i] * s;
            wt *= w[i];
        }
        pts.extend(coords);
        ws.push(wt);
    }
    AtomicMeasure::from_atoms(n, pts, ws, mu.mollifier_width * s, mu.alpha_meta * n as f64, format!("{}^{n}", mu.provenance))
}

/// Lower estimate of `c_alpha(mu) = sup mu(B(x,r))/r^alpha`.
///
/// Centers range over atoms and radii over `r_min * 2^k <= 2`, where `r_min`
/// defaults to the larger of the mollifier width and the smallest atom gap.
/// An atom exactly on the sphere `|y - x| = r` counts with half its weight,
/// as if its mass were spread symmetrically about it.
pub fn c_alpha_estimate(mu: &AtomicMeasure, alpha: f64, r_min: Option<f64>) -> Result<f64> {
    Ok(c_alpha_profile(mu, alpha, r_min)?.into_iter().map(|(_, v)| v).fold(0.0, f64::max))
}

/// Per-radius maxima behind [`c_alpha_estimate`], as (r, max_x mu(B)/r^alpha).
pub fn c_alpha_profile(mu: &AtomicMeasure, alpha: f64, r_min: Option<f64>) -> Result<Vec<(f64, f64)>> {
    if !(alpha > 0.0) {
        return domain("alpha must be positive");
    }
    let n = mu.len();
    if n > 200_000 {
        return guard("c_alpha estimate limited to 2e5 atoms");
    }
    let (pts, ws) = mu.atoms();
    let dim = mu.dim;
    let dist = |i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for k in 0..dim {
            let t = pts[i * dim + k] - pts[j * dim + k];
            s += t * t;
        }
        s.sqrt()
    };
    let r0 = match r_min {
        Some(r) if r > 0.0 => r,
        Some(_) => return domain("r_min must be positive"),
        None => {
            let gap = (0..n)
                .into_par_iter()
                .map(|i| (0..n).filter(|&j| j != i).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min))
                .reduce(|| f64::INFINITY, f64::min);
            let r = mu.mollifier_width.max(if gap.is_finite() { gap } else { 0.0 });
            if !(r > 0.0) {
                return domain("r_min needed: zero mollifier and no atom gap");
            }
            r
        }
    };
    let mut radii = Vec::new();
    let mut r = r0;
    while r <= 2.0 * (1.0 + 1e-12) {
        radii.push(r);
        r *= 2.0;
    }
    let per_center: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut ds: Vec<(f64, f64)> = (0..n).map(|j| (dist(i, j), ws[j])).collect();
            ds.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut out = Vec::with_capacity(radii.len());
            let mut acc = 0.0;
            let mut k = 0;
            for &r in &radii {
                let tol = 1e-9 * r;
                while k < n && ds[k].0 < r - tol {
                    acc += ds[k].1;
                    k += 1;
                }
                let mut edge = 0.0;
                let mut m = k;
                while m < n && ds[m].0 <= r + tol {
                    edge += ds[m].1;
                    m += 1;
                }
                out.push((acc + 0.5 * edge) / r.powf(alpha));
            }
            out
        })
        .collect();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(k, &r)| (r, per_center.iter().map(|v| v[k]).fold(0.0, f64::max)))
        .collect())
}

/// Clipped Riesz kernel `max(|v|, s)^{-alpha}`.
fn kernel(dist: f64, s: f64, alpha: f64) -> f64 {
    dist.max(s).powf(-alpha)
}

/// Largest padded FFT grid used by the energy fast path.
const ENERGY_FFT_LIMIT: usize = 1 << 24;

/// `I_alpha(mu) = sum_{i,j} w_i w_j max(|x_i - x_j|, s)^{-alpha}`, where the
/// diagonal contributes `w_i^2 s^{-alpha}` (and is dropped when `s = 0`).
pub fn energy(mu: &AtomicMeasure, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain("alpha must be positive");
    }
    let s = mu.mollifier_width;
    if let Some(meta) = &mu.lattice {
        if let Some(e) = energy_fft(mu, meta, alpha)? {
            return Ok(e);
        }
    }
    let (pts, ws) = mu.atoms();
    let n = ws.len();
    let dim = mu.dim;
    if n > 300_000 {
        return guard("direct energy limited to 3e5 atoms");
    }
    let coincident = std::sync::atomic::AtomicBool::new(false);
    let total = par_chunked(n, CHUNK / 16, |range| {
        let mut acc = 0.0;
        for i in range {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                if i == j {
                    if s > 0.0 {
                        row.push(ws[i] * ws[i] * s.powf(-alpha));
                    }
                    continue;
                }
                let mut d2 = 0.0;
                for k in 0..dim {
                    let t = pts[i * dim + k] - pts[j * dim + k];
                    d2 += t * t;
                }
                let d = d2.sqrt();
                if d == 0.0 && s == 0.0 {
                    coincident.store(true, std::sync::atomic::Ordering::Relaxed);
                    continue;
                }
                row.push(ws[i] * ws[j] * kernel(d, s, alpha));
            }
            acc += pairwise_sum(&row);
        }
        acc
    });
    if coincident.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::Domain("coincident atoms with zero mollifier width".into()));
    }
    Ok(total)
}

/// Energy through the autocorrelation of the weight lattice. Returns `None`
/// when the padded grid would be too large.
fn energy_fft(mu: &AtomicMeasure, meta: &LatticeMeta, alpha: f64) -> Result<Option<f64>> {
    let (pts, ws) = mu.atoms();
    let dim = mu.dim;
    let n = ws.len();
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    let mut idx = Vec::with_capacity(n * dim);
    for i in 0..n {
        for k in 0..dim {
            let u = (pts[i * dim + k] - meta.origin[k]) / meta.spacing;
            let r = u.round();
            if (u - r).abs() > 1e-6 {
                return Ok(None);
            }
            let r = r as i64;
            lo[k] = lo[k].min(r);
            hi[k] = hi[k].max(r);
            idx.push(r);
        }
    }
    let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| (2 * (b - a + 1) as usize).next_power_of_two()).collect();
    let total: usize = shape.iter().product();
    if total > ENERGY_FFT_LIMIT {
        return Ok(None);
    }
    let mut grid = vec![C64::default(); total];
    for i in 0..n {
        let mut flat = 0usize;
        for k in 0..dim {
            flat = flat * shape[k] + (idx[i * dim + k] - lo[k]) as usize;
        }
        grid[flat] += C64::new(ws[i], 0.0);
    }
    fftn(&mut grid, &shape, FftDirection::Forward);
    for v in grid.iter_mut() {
        *v = C64::new(v.norm_sqr(), 0.0);
    }
    fftn(&mut grid, &shape, FftDirection::Inverse);
    let scale = inverse_scale(&shape);
    let s = mu.mollifier_width;
    let terms: Vec<f64> = grid
        .iter()
        .enumerate()
        .map(|(mut flat, c)| {
            let mut d2 = 0.0;
            for k in (0..dim).rev() {
                let m = flat % shape[k];
                flat /= shape[k];
                let off = if m > shape[k] / 2 { m as f64 - shape[k] as f64 } else { m as f64 };
                d2 += (off * meta.spacing).powi(2);
            }
            let d = d2.sqrt();
            let corr = c.re * scale;
            if d == 0.0 {
                if s > 0.0 {
                    corr * s.powf(-alpha)
                } else {
                    0.0
                }
            } else {
                corr * kernel(d, s, alpha)
            }
        })
        .collect();
    Ok(Some(pairwise_sum(&terms)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_matches_direct() {
        for &(n, th) in &[(5usize, 0.13), (7, 2.0000000001), (3, -0.7), (9, 1.0)] {
            let direct: C64 = (0..n).map(|k| C64::from_polar(1.0, -2.0 * PI * th * k as f64)).sum();
            assert!((dirichlet(n, th) - direct).norm() < 1e-9, "n={n} th={th}");
        }
    }

    #[test]
    fn runs_match_direct_ft() {
        let mu = lebesgue_ball(2, 0.1).unwrap();
        let (p, w) = mu.atoms();
        for xi in [[0.3, 1.7], [-2.2, 0.4], [5.0, 5.0]] {
            let direct: C64 = w
                .iter()
                .zip(p.chunks(2))
                .map(|(wi, x)| wi * C64::from_polar(1.0, -2.0 * PI * (xi[0] * x[0] + xi[1] * x[1])))
                .sum();
            assert!((mu.raw_ft(&xi) - direct).norm() < 1e-12);
        }
        assert!(mu.run_count() < mu.len() / 5);
    }

    #[test]
    fn point_mass_ft() {
        let mu = point_mass(2, &[0.0, 0.0], 1.0).unwrap();
        assert!((measure_ft(&mu, &[3.0, 1.0]) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fft_energy_matches_direct() {
        let mu = lebesgue_ball(2, 0.08).unwrap();
        let fast = energy(&mu, 1.3).unwrap();
        let mut plain = mu.clone();
        plain.lattice = None;
        let slow = energy(&plain, 1.3).unwrap();
        assert!((fast / slow - 1.0).abs() < 1e-10, "{fast} {slow}");

        let prod = product_measure(&lebesgue_ball(2, 0.125).unwrap(), 8).unwrap();
        assert!(prod.lattice.is_some());
        let fast = energy(&prod, 2.0).unwrap();
        let mut plain = prod.clone();
        plain.lattice = None;
        let slow = energy(&plain, 2.0).unwrap();
        assert!((fast / slow - 1.0).abs() < 1e-10, "{fast} {slow}");
    }

    #[test]
    fn cantor_alpha_one_is_uniform() {
        let mu = cantor_measure(1.0, 6).unwrap();
        let (p, _) = mu.atoms();
        for k in 1..p.len() {
            assert!((p[k] - p[k - 1] - 1.0 / 64.0).abs() < 1e-14);
        }
    }
}
