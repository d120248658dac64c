//! Empirical monitors for the refined Strichartz, multilinear, decoupling
//! and multilinear Kakeya inequalities. Every monitor reports both sides and
//! their ratio; pass/fail thresholds live with the callers.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::cone_normal;
use crate::constructions::SharpnessExample;
use crate::error::{domain, guard, Error, Result};
use crate::extension::LatticeKernel;
use crate::grid::{build_cube_cover, dyadic_sort, CubeCover, GridFunction};
use crate::numeric::{dot, norm, pairwise_sum, par_chunked, C64};

/// Sub-grid points per axis and cube used for the `L^q(Q)` quadrature.
pub const CUBE_POINTS: usize = 4;

/// `q = 2(d+1)/(d-1)`.
pub fn strichartz_q(d: usize) -> f64 {
    2.0 * (d + 1) as f64 / (d - 1) as f64
}

/// `gamma = 1/2 - 1/q`.
pub fn strichartz_gamma(d: usize) -> f64 {
    0.5 - 1.0 / strichartz_q(d)
}

fn check_dims(f: &GridFunction, cover: &CubeCover) -> Result<()> {
    if f.d != cover.d {
        return domain("field and cover dimensions differ");
    }
    if f.d < 2 {
        return domain("monitors need d >= 2");
    }
    Ok(())
}

/// `||Ef||_{L^q(Q)}` for every cube, by the midpoint rule on `p^{d+1}` points.
pub fn cube_lq_values(f: &GridFunction, cover: &CubeCover, q: f64, p: usize) -> Result<Vec<f64>> {
    check_dims(f, cover)?;
    if cover.is_empty() {
        return Ok(Vec::new());
    }
    let kernel = LatticeKernel::new(f, &cover.cube_lattice(0, p))?;
    let vol = cover.cube_lattice(0, p).cell_volume;
    (0..cover.len())
        .into_par_iter()
        .map(|i| {
            let vals = kernel.eval(&cover.cube_lattice(i, p))?;
            let terms: Vec<f64> = vals.iter().map(|v| v.norm().powf(q)).collect();
            Ok((vol * pairwise_sum(&terms)).powf(1.0 / q))
        })
        .collect()
}

/// `(sum_Q v_Q^q)^{1/q}`.
pub fn combine_lq(values: &[f64], q: f64) -> f64 {
    let terms: Vec<f64> = values.iter().map(|v| v.powf(q)).collect();
    pairwise_sum(&terms).powf(1.0 / q)
}

#[derive(Clone, Debug, Serialize)]
pub struct StrichartzRun {
    pub r: f64,
    pub d: usize,
    pub q: f64,
    pub gamma: f64,
    pub f_norm: f64,
    /// Dyadic class `floor(log2 (||Ef||_{L^q(Q)} / ||f||_2))` of the selected cubes.
    pub class: i32,
    pub cubes: usize,
    pub sigma: usize,
    /// Fraction of occupied slabs whose count is within a factor 2 of `sigma`.
    pub slab_band_fraction: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub cover: CubeCover,
}

/// Refined Strichartz monitor over the full cover of `B(0,R)`.
pub fn strichartz_ratio(f: &GridFunction, r: f64, d: usize) -> Result<StrichartzRun> {
    strichartz_ratio_with(f, r, d, CUBE_POINTS)
}

pub fn strichartz_ratio_with(f: &GridFunction, r: f64, d: usize, p: usize) -> Result<StrichartzRun> {
    strichartz_ratio_on(f, build_cube_cover(r, d)?, p)
}

/// The monitor on a given cover (for instance a translate of the standard one).
pub fn strichartz_ratio_on(f: &GridFunction, mut cover: CubeCover, p: usize) -> Result<StrichartzRun> {
    let (r, d) = (cover.r, cover.d);
    let q = strichartz_q(d);
    let values = cube_lq_values(f, &cover, q, p)?;
    let f_norm = f.l2_norm();
    if f_norm == 0.0 {
        return domain("Ef vanishes on every cube: empty dominant class");
    }
    // Classes of ||Ef||_{L^q(Q)} / ||f||_2, so that scaling f leaves them alone.
    cover.set_values(&values.iter().map(|v| v / f_norm).collect::<Vec<_>>())?;
    let sort = dyadic_sort(&mut cover)?;
    // Dominant class: the largest total L^q mass; ties go to the higher class.
    let mut best: Option<(f64, i32)> = None;
    for (k, c) in &sort.classes {
        let mass = pairwise_sum(&c.cubes.iter().map(|&i| values[i].powf(q)).collect::<Vec<_>>());
        if best.is_none_or(|(m, _)| mass >= m) {
            best = Some((mass, *k));
        }
    }
    let Some((_, class)) = best else {
        return domain("Ef vanishes on every cube: empty dominant class");
    };
    let chosen = &sort.classes[&class];
    let y = cover.subset(&chosen.cubes);
    let counts: Vec<usize> = chosen.slab_sigma.values().copied().collect();
    let sigma = median_usize(&counts);
    let in_band = counts.iter().filter(|&&c| 2 * c >= sigma && c <= 2 * sigma).count();
    let lhs = combine_lq(&chosen.cubes.iter().map(|&i| values[i]).collect::<Vec<_>>(), q);
    let gamma = strichartz_gamma(d);
    let rhs = (sigma as f64).powf(-gamma) * f_norm;
    Ok(StrichartzRun {
        r,
        d,
        q,
        gamma,
        f_norm,
        class,
        cubes: chosen.cubes.len(),
        sigma,
        slab_band_fraction: in_band as f64 / counts.len() as f64,
        lhs,
        rhs,
        ratio: lhs / rhs,
        cover: y,
    })
}

/// Lower median.
fn median_usize(v: &[usize]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s[(s.len() - 1) / 2]
}

/// The value at which the cubes above it first hold half of the total
/// `sum v^q`, so the reference sits where the field's mass is.
fn mass_median(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    let w: Vec<f64> = s.iter().map(|x| x.powf(q)).collect();
    let half = 0.5 * pairwise_sum(&w);
    let mut acc = 0.0;
    for (x, wx) in s.iter().zip(&w) {
        acc += wx;
        if acc >= half {
            return *x;
        }
    }
    s[s.len() - 1]
}

/// `||Ef||_{L^q(Y)} / (sigma^{-gamma} ||f||_2)` on the tube cubes of a
/// sharpness example, with the per-cube values.
#[derive(Clone, Debug, Serialize)]
pub struct SharpnessRatio {
    pub sigma: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub cube_values: Vec<f64>,
    /// max/min of the per-cube values.
    pub spread: f64,
}

pub fn sharpness_ratio(ex: &SharpnessExample, p: usize) -> Result<SharpnessRatio> {
    let d = ex.params.d;
    let q = strichartz_q(d);
    let vals = cube_lq_values(&ex.f, &ex.y, q, p)?;
    let lhs = combine_lq(&vals, q);
    let rhs = (ex.params.sigma as f64).powf(-strichartz_gamma(d)) * ex.f.l2_norm();
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SharpnessRatio { sigma: ex.params.sigma, lhs, rhs, ratio: lhs / rhs, spread: max / min, cube_values: vals })
}

/// `|v_1 ^ ... ^ v_k|`, the square root of the Gram determinant.
pub fn wedge_norm(vs: &[Vec<f64>]) -> f64 {
    let k = vs.len();
    let mut g: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| dot(&vs[i], &vs[j])).collect()).collect();
    // Gaussian elimination with partial pivoting.
    let mut det = 1.0;
    for c in 0..k {
        let p = (c..k).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).unwrap_or(c);
        if g[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            g.swap(p, c);
            det = -det;
        }
        det *= g[c][c];
        for i in c + 1..k {
            let m = g[i][c] / g[c][c];
            for j in c..k {
                g[i][j] -= m * g[c][j];
            }
        }
    }
    det.max(0.0).sqrt()
}

/// Minimal transversality constant over sampled frequency tuples.
pub const TRANSVERSALITY: f64 = 0.1;

/// Up to `per` evenly spaced support nodes of each field.
fn support_samples(f: &GridFunction, per: usize) -> Vec<Vec<f64>> {
    let nz: Vec<usize> = (0..f.len()).filter(|&k| f.values()[k] != C64::default()).collect();
    if nz.is_empty() {
        return Vec::new();
    }
    let step = nz.len().div_ceil(per).max(1);
    nz.iter().step_by(step).map(|&k| f.node(k)).collect()
}

/// Checks `|G(xi_1) ^ ... ^ G(xi_k)| >= 0.1` on sampled tuples and returns the
/// smallest wedge seen.
pub fn check_transversal(fs: &[&GridFunction]) -> Result<f64> {
    let samples: Vec<Vec<Vec<f64>>> = fs.iter().map(|f| support_samples(f, 12)).collect();
    if samples.iter().any(|s| s.is_empty()) {
        return domain("a field of the multilinear tuple vanishes");
    }
    let k = fs.len();
    let mut idx = vec![0usize; k];
    let mut min = f64::INFINITY;
    'outer: loop {
        let xs: Vec<Vec<f64>> = (0..k).map(|i| samples[i][idx[i]].clone()).collect();
        let ns = xs.iter().map(|x| cone_normal(x)).collect::<Result<Vec<_>>>()?;
        let w = wedge_norm(&ns);
        if w < TRANSVERSALITY {
            return Err(Error::Domain(format!(
                "supports are not transversal: |G(xi_1) ^ ... ^ G(xi_k)| = {w:.3e} at {xs:?}"
            )));
        }
        min = min.min(w);
        for i in 0..k {
            idx[i] += 1;
            if idx[i] < samples[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    Ok(min)
}

#[derive(Clone, Debug, Serialize)]
pub struct MultilinearRun {
    pub r: f64,
    pub d: usize,
    pub k: usize,
    pub q: f64,
    pub min_wedge: f64,
    /// Cubes on which every `||Ef_i||_{L^q(Q)}` is within a factor 4 of its median.
    pub n_cubes: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `|| prod |Ef_i|^{1/k} ||_{L^q(Y)}` against `N^{-(k-1) gamma / k} prod ||f_i||^{1/k}`.
///
/// Medians are taken over the cubes where a field carries at least a
/// thousandth of its largest cube value.
pub fn multilinear_ratio(fs: &[&GridFunction], r: f64, d: usize) -> Result<MultilinearRun> {
    let k = fs.len();
    if k == 0 {
        return domain("multilinear monitor needs at least one field");
    }
    let min_wedge = if k > 1 { check_transversal(fs)? } else { 1.0 };
    let cover = build_cube_cover(r, d)?;
    let q = strichartz_q(d);
    let p = CUBE_POINTS;
    let shape = cover.cube_lattice(0, p);
    let vol = shape.cell_volume;
    let kernels = fs.iter().map(|f| LatticeKernel::new(f, &shape)).collect::<Result<Vec<_>>>()?;
    // Per cube: each field's L^q value and the L^q^q of the geometric mean.
    let per: Vec<(Vec<f64>, f64)> = (0..cover.len())
        .into_par_iter()
        .map(|i| {
            let l = cover.cube_lattice(i, p);
            let vals = kernels.iter().map(|kr| kr.eval(&l)).collect::<Result<Vec<_>>>()?;
            let single: Vec<f64> = vals
                .iter()
                .map(|v| (vol * pairwise_sum(&v.iter().map(|z| z.norm().powf(q)).collect::<Vec<_>>())).powf(1.0 / q))
                .collect();
            let prod: Vec<f64> = (0..l.num_points())
                .map(|m| vals.iter().map(|v| v[m].norm().powf(q / k as f64)).product())
                .collect();
            Ok((single, vol * pairwise_sum(&prod)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut medians = Vec::with_capacity(k);
    for i in 0..k {
        let vals: Vec<f64> = per.iter().map(|p| p.0[i]).collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return domain("a field has vanishing extension on the cover");
        }
        medians.push(mass_median(&vals, q));
    }
    let common: Vec<usize> = (0..per.len())
        .filter(|&c| (0..k).all(|i| per[c].0[i] >= medians[i] / 4.0 && per[c].0[i] <= 4.0 * medians[i]))
        .collect();
    if common.is_empty() {
        return domain("no cube has every field near its median");
    }
    let lhs = pairwise_sum(&common.iter().map(|&c| per[c].1).collect::<Vec<_>>()).powf(1.0 / q);
    let n = common.len() as f64;
    let gamma = strichartz_gamma(d);
    let prod_norms: f64 = fs.iter().map(|f| f.l2_norm().powf(1.0 / k as f64)).product();
    let rhs = n.powf(-((k - 1) as f64) * gamma / k as f64) * prod_norms;
    Ok(MultilinearRun { r, d, k, q, min_wedge, n_cubes: common.len(), lhs, rhs, ratio: lhs / rhs })
}

/// `||sum_tau F_tau||_q / (sum_tau ||F_tau||_q^2)^{1/2}` for fields sampled on
/// shared points with the given quadrature weights.
pub fn decoupling_ratio(pieces: &[Vec<C64>], weights: &[f64], q: f64) -> Result<f64> {
    if pieces.is_empty() {
        return domain("decoupling needs at least one piece");
    }
    if !(q >= 2.0) {
        return domain("decoupling exponent must be at least 2");
    }
    let n = weights.len();
    if pieces.iter().any(|p| p.len() != n) {
        return domain("pieces and weights differ in length");
    }
    let lq = |vals: &[C64]| -> f64 {
        let t: Vec<f64> = vals.iter().zip(weights).map(|(v, w)| w * v.norm().powf(q)).collect();
        pairwise_sum(&t).powf(1.0 / q)
    };
    let sum: Vec<C64> = (0..n).map(|j| pieces.iter().map(|p| p[j]).sum()).collect();
    let sq: Vec<f64> = pieces.iter().map(|p| lq(p).powi(2)).collect();
    let den = pairwise_sum(&sq).sqrt();
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(lq(&sum) / den)
}

/// Spacetime samples of `F_tau(X) = e^{i theta_tau} w(X) sum_j exp(2 pi i <Xi_j, X>)`
/// for consecutive caps of `Gamma^2` at scale `delta`, with `Xi_j` random cone
/// points over the cap and `w(X) = exp(-pi |delta X|^2)`, so `F_tau^` lives
/// in an `O(delta)` neighbourhood of the cap. Points are uniform in
/// `[-2/delta, 2/delta]^3`.
#[derive(Clone, Debug)]
pub struct CapPieces {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub pieces: Vec<Vec<C64>>,
}

pub fn synth_cap_pieces(delta: f64, n_caps: usize, waves: usize, n_points: usize, seed: u64) -> Result<CapPieces> {
    use rand::Rng;
    let caps = crate::cone::build_caps(&crate::cone::ConeConfig::new(2, true)?, delta)?;
    if n_caps == 0 || n_caps > caps.len() {
        return domain(format!("between 1 and {} caps available at delta = {delta}", caps.len()));
    }
    let mut g = crate::numeric::rng(seed);
    let half = 2.0 / delta;
    let points: Vec<Vec<f64>> = (0..n_points).map(|_| (0..3).map(|_| g.gen_range(-half..half)).collect()).collect();
    let weights = vec![(2.0 * half).powi(3) / n_points as f64; n_points];
    let mut pieces = Vec::with_capacity(n_caps);
    for cap in caps.iter().take(n_caps) {
        let theta = g.gen_range(0.0..2.0 * std::f64::consts::PI);
        let a0 = cap.center_dir[1].atan2(cap.center_dir[0]);
        let freqs: Vec<[f64; 3]> = (0..waves)
            .map(|_| {
                let a = a0 + g.gen_range(-cap.radius..cap.radius);
                let r = g.gen_range(1.0..2.0);
                [r * a.cos(), r * a.sin(), r]
            })
            .collect();
        let vals = points
            .par_iter()
            .map(|x| {
                let w = (-std::f64::consts::PI * delta * delta * dot(x, x)).exp();
                let s: C64 = freqs
                    .iter()
                    .map(|f| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * dot(f, x)))
                    .sum();
                s * C64::from_polar(w, theta)
            })
            .collect();
        pieces.push(vals);
    }
    Ok(CapPieces { points, weights, pieces })
}

/// One tube: the `delta`-neighbourhood of the line through `center` along `dir`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tube {
    pub center: Vec<f64>,
    pub dir: Vec<f64>,
}

impl Tube {
    pub fn new(center: Vec<f64>, dir: &[f64]) -> Result<Self> {
        let l = norm(dir);
        if center.len() != dir.len() || !(l > 0.0) {
            return domain("tube needs a nonzero direction of matching dimension");
        }
        Ok(Self { center, dir: dir.iter().map(|v| v / l).collect() })
    }

    fn dist2(&self, p: &[f64]) -> f64 {
        let mut t = 0.0;
        let mut s = 0.0;
        for ((x, c), v) in p.iter().zip(&self.center).zip(&self.dir) {
            t += (x - c) * v;
            s += (x - c) * (x - c);
        }
        s - t * t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransverseTubes {
    pub n: usize,
    pub delta: f64,
    pub families: Vec<Vec<Tube>>,
    /// `min |v_1 ^ ... ^ v_k|` over all k-tuples, one tube per family.
    pub nu: f64,
}

impl TransverseTubes {
    /// Validates `nu >= threshold` over every k-tuple.
    pub fn new(n: usize, delta: f64, families: Vec<Vec<Tube>>, threshold: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return domain("tube radius must be positive");
        }
        if families.is_empty() || families.iter().flatten().any(|t| t.dir.len() != n) {
            return domain("families must be nonempty with tubes in R^n");
        }
        let nu = min_wedge(&families);
        if nu < threshold {
            return domain(format!("families are only {nu:.3}-transverse, need {threshold}"));
        }
        Ok(Self { n, delta, families, nu })
    }

    pub fn k(&self) -> usize {
        self.families.len()
    }
}

fn min_wedge(families: &[Vec<Tube>]) -> f64 {
    if families.iter().any(|f| f.is_empty()) {
        return f64::INFINITY;
    }
    let k = families.len();
    let mut idx = vec![0usize; k];
    let mut min = f64::INFINITY;
    'outer: loop {
        let vs: Vec<Vec<f64>> = (0..k).map(|i| families[i][idx[i]].dir.clone()).collect();
        min = min.min(wedge_norm(&vs));
        for i in 0..k {
            idx[i] += 1;
            if idx[i] < families[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    min
}

/// `k` families of `count` tubes through a common random point of
/// `[-1/4, 1/4]^n`, family `i` pointing near `e_i`. Directions are perturbed by
/// up to `spread` per coordinate and centers jittered within `delta/2`, so the
/// configuration is self-similar in `delta`.
pub fn bush_families(n: usize, k: usize, count: usize, delta: f64, spread: f64, seed: u64) -> Result<Vec<Vec<Tube>>> {
    use rand::Rng;
    if k > n || k == 0 {
        return domain("need 1 <= k <= n families");
    }
    let mut g = crate::numeric::rng(seed);
    let p: Vec<f64> = (0..n).map(|_| g.gen_range(-0.25..0.25)).collect();
    (0..k)
        .map(|i| {
            (0..count)
                .map(|_| {
                    let dir: Vec<f64> =
                        (0..n).map(|j| (i == j) as u8 as f64 + spread * g.gen_range(-1.0..1.0)).collect();
                    let c: Vec<f64> = p.iter().map(|v| v + 0.5 * delta * g.gen_range(-1.0..1.0)).collect();
                    Tube::new(c, &dir)
                })
                .collect()
        })
        .collect()
}

/// Axis-parallel sampling region `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SamplingBox {
    pub fn cube(n: usize, half: f64) -> Self {
        Self { lo: vec![-half; n], hi: vec![half; n] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KakeyaRun {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pixels: u64,
}

/// Pixel budget of [`kakeya_ratio`].
pub const MAX_PIXELS: f64 = 2e9;

/// `|| prod_i sum_{T in T_i} chi_T ||_{L^{q/k}(box)}` by pixel-center
/// quadrature at resolution `delta/4`, against `prod_i delta^{n/q} |T_i|`.
pub fn kakeya_ratio(tubes: &TransverseTubes, q: f64, region: &SamplingBox) -> Result<KakeyaRun> {
    let k = tubes.k();
    let n = tubes.n;
    if k >= 2 && !(q > k as f64 / (k - 1) as f64 + 0.05) {
        return domain(format!("q must exceed k/(k-1) + 0.05, got {q}"));
    }
    if region.lo.len() != n || region.hi.len() != n || region.lo.iter().zip(&region.hi).any(|(a, b)| !(b > a)) {
        return domain("sampling box must be a nondegenerate box in R^n");
    }
    let delta = tubes.delta;
    let rhs: f64 = tubes.families.iter().map(|f| delta.powf(n as f64 / q) * f.len() as f64).product();
    if tubes.families.iter().any(|f| f.is_empty()) {
        return Ok(KakeyaRun { lhs: 0.0, rhs, ratio: 0.0, pixels: 0 });
    }
    let px = delta / 4.0;
    let counts: Vec<usize> = region.lo.iter().zip(&region.hi).map(|(a, b)| ((b - a) / px).ceil() as usize).collect();
    let total: f64 = counts.iter().map(|&c| c as f64).product();
    if total > MAX_PIXELS {
        return guard(format!("{total:.3e} pixels exceed the budget {MAX_PIXELS:.1e}"));
    }
    let steps: Vec<f64> = (0..n).map(|j| (region.hi[j] - region.lo[j]) / counts[j] as f64).collect();
    let cell: f64 = steps.iter().product();
    let exponent = q / k as f64;
    let d2 = delta * delta;
    // Tubes relevant to each slab of the first axis.
    let row = |i0: usize| -> f64 {
        let x0 = region.lo[0] + (i0 as f64 + 0.5) * steps[0];
        let mut p = vec![0.0; n];
        p[0] = x0;
        let mut acc = Vec::new();
        let inner: usize = counts[1..].iter().product();
        for flat in 0..inner {
            let mut r = flat;
            for j in 1..n {
                p[j] = region.lo[j] + ((r % counts[j]) as f64 + 0.5) * steps[j];
                r /= counts[j];
            }
            let mut prod = 1.0;
            for fam in &tubes.families {
                let c = fam.iter().filter(|t| t.dist2(&p) <= d2).count();
                if c == 0 {
                    prod = 0.0;
                    break;
                }
                prod *= c as f64;
            }
            if prod > 0.0 {
                acc.push(prod.powf(exponent));
            }
        }
        pairwise_sum(&acc)
    };
    let s = par_chunked(counts[0], 1, |range| range.map(row).sum::<f64>());
    let lhs = (s * cell).powf(1.0 / exponent);
    Ok(KakeyaRun { lhs, rhs, ratio: lhs / rhs, pixels: total as u64 })
}

/// Area of the parallelogram where two strips of half-width `delta` in the
/// plane cross at angle `theta`.
pub fn parallelogram_area(delta: f64, theta: f64) -> f64 {
    4.0 * delta * delta / theta.sin().abs()
}

/// Tally of `(R, ratio)` pairs with the fitted log-log growth exponent.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GrowthFit {
    pub points: BTreeMap<String, f64>,
    pub slope: Option<f64>,
}

pub fn growth_fit(rs: &[f64], ratios: &[f64]) -> GrowthFit {
    let x: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    GrowthFit {
        points: rs.iter().zip(ratios).map(|(r, v)| (format!("{r}"), *v)).collect(),
        slope: crate::numeric::fit_line(&x, &y).map(|f| f.slope),
    }
}
