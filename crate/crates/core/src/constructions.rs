//! Explicit extremal examples: parallel wave-packet tubes built from a
//! Lorentz-rescaled bump, and the lattice counterexample measuring the
//! coherence of `int (f sigma)^(R x) d mu(x)` on the cone.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::cone::{apply_a, LorentzMap, OrientedBox, Selector};
use crate::error::{domain, guard, Error, Result};
use crate::extension::alias_radius;
use crate::grid::{annulus_sample, Cube, CubeCover, GridFunction, Mask};
use crate::measures::{lattice_measure, AtomicMeasure};
use crate::numeric::{fit_line, norm, par_chunked, rng, unit_ball_volume, C64};
use crate::packets::{smooth_step, OmegaFrame};

/// Cap on the number of enumerated lattice points.
const MAX_POINTS: usize = 20_000_000;

/// All `x in Z^k` with `|x|^2 = m^2`, in lexicographic order.
pub fn sphere_lattice_points(m: u64, k: usize) -> Result<Vec<Vec<i64>>> {
    if m < 1 || k < 2 {
        return domain("sphere enumeration needs m >= 1 and k >= 2");
    }
    let m2 = (m as i64)
        .checked_mul(m as i64)
        .filter(|v| v.checked_mul(k as i64).is_some())
        .ok_or_else(|| Error::Guard(format!("m^2 k overflows for m = {m}, k = {k}")))?;
    let mut out = Vec::new();
    let mut cur = vec![0i64; k];
    enumerate(&mut cur, 0, m2, &mut out)?;
    Ok(out)
}

fn enumerate(cur: &mut Vec<i64>, pos: usize, rem: i64, out: &mut Vec<Vec<i64>>) -> Result<()> {
    let k = cur.len();
    if pos == k - 1 {
        let s = isqrt(rem);
        if s * s == rem {
            if s == 0 {
                cur[pos] = 0;
                out.push(cur.clone());
            } else {
                for v in [-s, s] {
                    cur[pos] = v;
                    out.push(cur.clone());
                }
            }
            if out.len() > MAX_POINTS {
                return guard("sphere enumeration exceeds the point cap");
            }
        }
        return Ok(());
    }
    let b = isqrt(rem);
    for v in -b..=b {
        cur[pos] = v;
        enumerate(cur, pos + 1, rem - v * v, out)?;
    }
    Ok(())
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut s = (n as f64).sqrt() as i64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

/// Slope of `log count` against `log m`.
pub fn sphere_count_slope(ms: &[u64], counts: &[usize]) -> Option<f64> {
    let x: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    fit_line(&x, &y).map(|f| f.slope)
}

/// Lifted lattice points `(xi, |xi|)` with `R^kappa (xi, |xi|)` integral.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeConeSet {
    pub kappa: f64,
    /// `R^kappa`.
    pub scale: f64,
    pub m_range: (u64, u64),
    /// Integer vectors `v = R^kappa xi` with `|v| = m`.
    pub points: Vec<Vec<i64>>,
    pub radii: Vec<u64>,
    pub per_sphere: Vec<(u64, usize)>,
}

impl LatticeConeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `xi` of point `i`.
    pub fn xi(&self, i: usize) -> Vec<f64> {
        self.points[i].iter().map(|&v| v as f64 / self.scale).collect()
    }

    /// Lifted point `(xi, |xi|)`.
    pub fn lifted(&self, i: usize) -> Vec<f64> {
        let mut p = self.xi(i);
        p.push(self.radii[i] as f64 / self.scale);
        p
    }

    /// Fitted exponents of the per-sphere counts and of the cumulative count
    /// against the radius.
    pub fn fits(&self) -> (Option<f64>, Option<f64>) {
        let ms: Vec<u64> = self.per_sphere.iter().map(|p| p.0).collect();
        let counts: Vec<usize> = self.per_sphere.iter().map(|p| p.1).collect();
        let cum: Vec<usize> = counts
            .iter()
            .scan(0, |s, &c| {
                *s += c;
                Some(*s)
            })
            .collect();
        (sphere_count_slope(&ms, &counts), sphere_count_slope(&ms, &cum))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub r: f64,
    pub alpha: f64,
    pub d: usize,
    pub eps: f64,
    pub rho: f64,
    pub kappa: f64,
    #[serde(skip)]
    pub mu: AtomicMeasure,
    #[serde(skip)]
    pub e: LatticeConeSet,
    #[serde(skip)]
    pub f: GridFunction,
    /// For each node of `f`, the index of its point in `E`.
    #[serde(skip)]
    pub owner: Vec<usize>,
    pub e_count: usize,
    /// `|F|`: atoms of the measure.
    pub f_count: usize,
    pub grid_m: usize,
    /// `sigma(Omega)` from the grid nodes.
    pub omega_measure: f64,
    /// `|E| V_d (rho/R)^d / sqrt 2`: the sum of the exact ellipsoid areas.
    pub omega_exact: f64,
    /// Below the dimension where the sphere counts are regular.
    pub outside_validity: bool,
}

/// Grid resolution of the counterexample: about 0.8 nodes per radius
/// `rho / R` and no aliasing up to `R + eps`, rounded up to a multiple of 16.
pub fn counterexample_m(r: f64, rho: f64, eps: f64) -> usize {
    let m = (0.8 * r / rho).max(4.0 * (r + eps)).ceil() as usize;
    m.div_ceil(16) * 16
}

pub fn build_counterexample(r: f64, alpha: f64, d: usize, eps: f64, rho: f64) -> Result<Counterexample> {
    if d < 2 {
        return domain("counterexample needs d >= 2");
    }
    if !(rho > 0.0 && rho < 0.5) {
        return domain("rho must lie in (0, 1/2)");
    }
    let n = d + 1;
    let mu = lattice_measure(r, alpha, eps, n)?;
    let kappa = (n as f64 - alpha) / n as f64;
    let scale = r.powf(kappa);
    let m_lo = (scale - 1e-9).ceil().max(1.0) as u64;
    let m_hi = (2.0 * scale + 1e-9).floor() as u64;
    let mut points = Vec::new();
    let mut radii = Vec::new();
    let mut per_sphere = Vec::new();
    for m in m_lo..=m_hi {
        let pts = sphere_lattice_points(m, d)?;
        per_sphere.push((m, pts.len()));
        radii.extend(std::iter::repeat_n(m, pts.len()));
        points.extend(pts);
    }
    if points.is_empty() {
        return domain(format!("no lattice points on the cone for R^kappa = {scale:.4}"));
    }
    let e = LatticeConeSet { kappa, scale, m_range: (m_lo, m_hi), points, radii, per_sphere };

    // Nodes at i h (origin -h/2) within rho/R of E, lifted distance.
    let m = counterexample_m(r, rho, eps);
    let h = 1.0 / m as f64;
    let rad = rho / r;
    let reach = (rad / h).ceil() as i64 + 1;
    let mut nodes: BTreeSet<(Vec<i32>, usize)> = BTreeSet::new();
    let mut seen: BTreeSet<Vec<i32>> = BTreeSet::new();
    let span = (2 * reach + 1).pow(d as u32) as usize;
    if span.saturating_mul(e.len()) > 4_000_000_000 {
        return guard("counterexample node search is too large");
    }
    let mut off = vec![-reach; d];
    for i in 0..e.len() {
        let w = e.lifted(i);
        let base: Vec<i64> = w[..d].iter().map(|v| (v / h).round() as i64).collect();
        off.iter_mut().for_each(|o| *o = -reach);
        'outer: loop {
            let idx: Vec<i64> = base.iter().zip(&off).map(|(b, o)| b + o).collect();
            let xi: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            if (1.0..=4.0).contains(&r2) {
                let mut dist2: f64 = xi.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
                dist2 += (r2.sqrt() - w[d]).powi(2);
                if dist2 <= rad * rad {
                    let key: Vec<i32> = idx.iter().map(|&k| k as i32).collect();
                    if seen.insert(key.clone()) {
                        nodes.insert((key, i));
                    }
                }
            }
            for j in 0..d {
                off[j] += 1;
                if off[j] <= reach {
                    continue 'outer;
                }
                off[j] = -reach;
            }
            break;
        }
    }
    if nodes.is_empty() {
        return domain("Omega contains no grid nodes; refine the grid");
    }
    let count = nodes.len();
    let omega_measure = count as f64 * h.powi(d as i32);
    let val = C64::new(1.0 / omega_measure.sqrt(), 0.0);
    let owner: Vec<usize> = nodes.iter().map(|(_, i)| *i).collect();
    let f = GridFunction::from_nodes(
        d,
        h,
        -0.5 * h,
        Mask::Annulus { half: false },
        nodes.into_iter().map(|(k, _)| (k, val)),
    )?;
    if f.len() != count {
        return Err(Error::Invariant("Omega nodes left the annulus".into()));
    }
    let omega_exact = e.len() as f64 * unit_ball_volume(d) * rad.powi(d as i32) * FRAC_1_SQRT_2;
    Ok(Counterexample {
        r,
        alpha,
        d,
        eps,
        rho,
        kappa,
        e_count: e.len(),
        f_count: mu.len(),
        mu,
        e,
        f,
        owner,
        grid_m: m,
        omega_measure,
        omega_exact,
        outside_validity: d < 5,
    })
}

/// `int (f sigma)^(R x) d mu(x) = sum_nodes h^d f(xi) mu^(R (xi, |xi|))`.
pub fn pairing_value(mu: &AtomicMeasure, f: &GridFunction, r: f64) -> Result<C64> {
    if mu.dim != f.d + 1 {
        return domain("measure must live in R^{d+1}");
    }
    let reach = r * mu.support_radius();
    if reach > alias_radius(f.spacing) * (1.0 + 1e-12) {
        return guard(format!("R * supp radius = {reach:.3} exceeds the alias limit {:.3}", alias_radius(f.spacing)));
    }
    let d = f.d;
    let coords = f.coords();
    let vals = f.values();
    let s = par_chunked(f.len(), 16, |range| {
        let mut acc = C64::default();
        let mut y = vec![0.0; d + 1];
        for k in range {
            let xi = &coords[k * d..(k + 1) * d];
            for (yk, x) in y.iter_mut().zip(xi) {
                *yk = r * x;
            }
            y[d] = r * norm(xi);
            acc += vals[k] * mu.raw_ft(&y) * mu.mollifier(&y);
        }
        acc
    });
    Ok(s * f.weight())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairingReport {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `|E|^{1/2} |F| R^{-3d/2-1}` times the ball and ellipsoid constants
    /// `V_{d+1} eps^{d+1} (V_d / sqrt 2)^{1/2} rho^{d/2}`.
    pub prediction: f64,
    pub ratio: f64,
}

pub fn predicted_pairing(ex: &Counterexample) -> f64 {
    let d = ex.d as i32;
    let base = (ex.e_count as f64).sqrt() * ex.f_count as f64 * ex.r.powf(-1.5 * d as f64 - 1.0);
    let consts = unit_ball_volume(ex.d + 1)
        * ex.eps.powi(d + 1)
        * (unit_ball_volume(ex.d) * FRAC_1_SQRT_2).sqrt()
        * ex.rho.powf(0.5 * d as f64);
    base * consts
}

pub fn pairing_report(ex: &Counterexample) -> Result<PairingReport> {
    let v = pairing_value(&ex.mu, &ex.f, ex.r)?;
    let p = predicted_pairing(ex);
    Ok(PairingReport { re: v.re, im: v.im, modulus: v.norm(), prediction: p, ratio: v.norm() / p })
}

/// `|<Xi, R x> - <omega, R^kappa n>|` for random pairs of an atom ball point
/// and a node of `Omega` with its owner `omega`.
pub fn phase_defects(ex: &Counterexample, pairs: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut g = rng(seed);
    let d = ex.d;
    let (pts, _) = ex.mu.atoms();
    let n_atoms = ex.mu.len();
    let spacing = ex.r.powf(ex.kappa - 1.0);
    let s = ex.eps / ex.r;
    (0..pairs)
        .map(|_| {
            let i = g.gen_range(0..n_atoms);
            let x0 = &pts[i * (d + 1)..(i + 1) * (d + 1)];
            let n: Vec<f64> = x0.iter().map(|v| (v / spacing).round()).collect();
            // uniform point of the atom ball
            let x: Vec<f64> = loop {
                let u: Vec<f64> = (0..=d).map(|_| g.gen_range(-1.0..1.0)).collect();
                if norm(&u) <= 1.0 {
                    break x0.iter().zip(&u).map(|(a, b)| a + s * b).collect();
                }
            };
            let k = g.gen_range(0..ex.f.len());
            let mut xi = ex.f.node(k);
            xi.push(norm(&xi));
            let w = ex.e.lifted(ex.owner[k]);
            let a: f64 = xi.iter().zip(&x).map(|(p, q)| p * q * ex.r).sum();
            let b: f64 = w.iter().zip(&n).map(|(p, q)| p * q * ex.e.scale).sum();
            (a - b).abs()
        })
        .collect()
}

/// Parallel tubes of the sharpness example.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TubeFamily {
    pub r: f64,
    pub d: usize,
    pub delta_slack: f64,
    pub sigma: usize,
    /// Offset between neighbouring tubes along the flat direction.
    pub spacing: f64,
    pub centers: Vec<Vec<f64>>,
    pub tubes: Vec<OrientedBox>,
    pub inner: Vec<OrientedBox>,
}

/// Sizes of the bump and the example.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SharpnessParams {
    pub r: f64,
    pub sigma: usize,
    pub d: usize,
    pub delta_slack: f64,
    /// Bump radius: `phi^ = 1` on `B(1.5 e_d, eps)`, zero off `B(1.5 e_d, 2 eps)`.
    pub eps: f64,
}

impl SharpnessParams {
    pub fn new(r: f64, sigma: usize, d: usize, delta_slack: f64) -> Self {
        Self { r, sigma, d, delta_slack, eps: 0.2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessExample {
    pub params: SharpnessParams,
    #[serde(skip)]
    pub f: GridFunction,
    pub family: TubeFamily,
    #[serde(skip)]
    pub y: CubeCover,
    pub grid_m: usize,
    pub norm_sq: f64,
    /// `sigma R^{(d-1)/2}`.
    pub norm_sq_scale: f64,
}

/// Smallest multiple of 16 with `M >= 4 (R + R^{1/2} sqrt(d+1))`: resolves
/// `Ef` on every cube meeting `B(0,R)`.
pub fn cover_grid_m(r: f64, d: usize) -> usize {
    let need = 4.0 * (r + r.sqrt() * ((d + 1) as f64).sqrt());
    (need.ceil() as usize).div_ceil(16) * 16
}

fn bump_hat(eta: &[f64], eps: f64) -> f64 {
    let d = eta.len();
    let mut r2 = 0.0;
    for (i, v) in eta.iter().enumerate() {
        let c = if i + 1 == d { 1.5 } else { 0.0 };
        r2 += (v - c) * (v - c);
    }
    smooth_step((r2.sqrt() - eps) / eps)
}

/// Tube layout: offsets along the flat direction in multiples of the cube
/// side, so every tube is aligned with the cube lattice.
pub fn tube_family(r: f64, sigma: usize, d: usize, delta: f64) -> Result<TubeFamily> {
    if sigma < 1 {
        return domain("sigma must be at least 1");
    }
    if d < 2 || !(r >= 16.0) || !(delta > 0.0 && delta < 0.25) {
        return domain("tube family needs d >= 2, R >= 16 and delta in (0, 1/4)");
    }
    let side = r.sqrt();
    let spacing = side * r.powf(2.0 * delta).ceil();
    let half_span = (sigma - 1) as f64 * spacing / 2.0;
    if half_span > r / 2.0 {
        return domain(format!(
            "sigma = {sigma} tubes at spacing {spacing:.2} do not fit in B(0, R/2) for R = {r}"
        ));
    }
    let n = d + 1;
    let a = n - 2;
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            apply_a(&e, true)
        })
        .collect();
    let first = -(((sigma - 1) / 2) as f64);
    let mut centers = Vec::new();
    let mut tubes = Vec::new();
    let mut inner = Vec::new();
    for nu in 0..sigma {
        let mut y = vec![0.0; n];
        y[a] = (first + nu as f64) * spacing;
        let c = apply_a(&y, true);
        let mut th = vec![r.powf(0.5 + delta); n];
        th[a] = r.powf(delta);
        th[n - 1] = r;
        let mut sh = vec![side / 4.0; n];
        sh[a] = 0.5;
        sh[n - 1] = r / 2.0;
        tubes.push(OrientedBox::new(c.clone(), axes.clone(), th)?);
        inner.push(OrientedBox::new(c.clone(), axes.clone(), sh)?);
        centers.push(c);
    }
    Ok(TubeFamily { r, d, delta_slack: delta, sigma, spacing, centers, tubes, inner })
}

/// Cubes of `R^{1/2} A^* Z^{d+1}` whose bodies meet the inner boxes.
pub fn cover_of_inner(family: &TubeFamily) -> CubeCover {
    let r = family.r;
    let n = family.d + 1;
    let side = r.sqrt();
    let mut keys: BTreeSet<Vec<i64>> = BTreeSet::new();
    for b in &family.inner {
        let cy = apply_a(&b.center, false);
        let lo: Vec<i64> =
            (0..n).map(|j| ((cy[j] - b.half_widths[j]) / side + 0.5 - 1e-9).ceil() as i64 - 1).collect();
        let hi: Vec<i64> =
            (0..n).map(|j| ((cy[j] + b.half_widths[j]) / side - 0.5 + 1e-9).floor() as i64 + 1).collect();
        let mut k = lo.clone();
        'outer: loop {
            let meets = (0..n).all(|j| {
                let c = k[j] as f64 * side;
                (c - cy[j]).abs() <= side / 2.0 + b.half_widths[j] - 1e-12
            });
            if meets {
                keys.insert(k.clone());
            }
            for j in 0..n {
                k[j] += 1;
                if k[j] <= hi[j] {
                    continue 'outer;
                }
                k[j] = lo[j];
            }
            break;
        }
    }
    let cubes = keys
        .into_iter()
        .map(|k| {
            let y: Vec<f64> = k.iter().map(|&v| v as f64 * side).collect();
            Cube { center: apply_a(&y, true), value: None, dyadic_class: None, slab_index: k[n - 1], index: k }
        })
        .collect();
    CubeCover { r, d: family.d, side, cubes }
}

/// `sum_nu f_nu` with `f_nu(xi) = exp(-2 pi i <c_nu, (xi,|xi|)>) |d eta/d xi|
/// phi^(eta)`, `(eta, |eta|) = A^* B A (xi, |xi|)`.
pub fn build_sharpness_example(r: f64, sigma: usize, d: usize, delta: f64) -> Result<SharpnessExample> {
    build_sharpness_with(SharpnessParams::new(r, sigma, d, delta))
}

pub fn build_sharpness_with(params: SharpnessParams) -> Result<SharpnessExample> {
    let SharpnessParams { r, sigma, d, delta_slack, eps } = params;
    if !(eps > 0.0 && eps <= 0.2) {
        return domain("bump radius eps must lie in (0, 0.2]");
    }
    let family = tube_family(r, sigma, d, delta_slack)?;
    let y = cover_of_inner(&family);
    let bump = tube_bump(r, d, eps)?;
    let m = cover_grid_m(r, d);
    let (lo, hi) = tube_bump_support(r, d, eps);
    let centers = family.centers.clone();
    let sample = annulus_sample(d, m, true, &lo, &hi, |xi| {
        let b = bump(xi);
        if b == C64::default() {
            return b;
        }
        let s: C64 = centers
            .iter()
            .map(|c| {
                let ph: f64 = xi.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() + norm(xi) * c[d];
                C64::from_polar(1.0, -2.0 * PI * ph)
            })
            .sum();
        s * b
    })?;
    let f = compact(&sample)?;
    if f.is_empty() {
        return domain("sharpness bump missed every grid node");
    }
    let norm_sq = f.l2_norm().powi(2);
    Ok(SharpnessExample {
        params,
        f,
        family,
        y,
        grid_m: m,
        norm_sq,
        norm_sq_scale: sigma as f64 * r.powf(0.5 * (d - 1) as f64),
    })
}

/// `xi -> |d eta/d xi| phi^(eta)` with `(eta, |eta|) = A^* B A (xi, |xi|)`:
/// the unmodulated bump whose extension is one tube through the origin.
pub fn tube_bump(r: f64, d: usize, eps: f64) -> Result<impl Fn(&[f64]) -> C64 + Sync> {
    let lorentz = LorentzMap::new(r, Selector::Half, d)?;
    let mut e_d = vec![0.0; d];
    e_d[d - 1] = 1.0;
    let frame = OmegaFrame::new(&e_d)?;
    let jac_scale = r.powf(0.5 * (d - 1) as f64);
    Ok(move |xi: &[f64]| {
        let mut lift = xi.to_vec();
        lift.push(norm(xi));
        let h = lorentz.apply(&lift);
        let b = bump_hat(&h[..d], eps);
        if b == 0.0 {
            return C64::default();
        }
        let j = jac_scale * frame.jacobian(&frame.omega_of_xi(&h[..d])) / frame.jacobian(&frame.omega_of_xi(xi));
        C64::new(b * j, 0.0)
    })
}

/// Box containing the support of [`tube_bump`].
pub fn tube_bump_support(r: f64, d: usize, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let tang = r.powf(-0.5);
    let mut lo = vec![-2.2 * eps * tang; d];
    let mut hi = vec![2.2 * eps * tang; d];
    lo[d - 1] = 1.5 - 2.5 * eps;
    hi[d - 1] = 1.5 + 2.5 * eps;
    (lo, hi)
}

/// Drop zero nodes.
pub fn compact(g: &GridFunction) -> Result<GridFunction> {
    GridFunction::from_nodes(
        g.d,
        g.spacing,
        g.origin,
        g.mask.clone(),
        (0..g.len()).filter(|&k| g.values()[k] != C64::default()).map(|k| (g.index(k), g.values()[k])),
    )
}

/// The single modulated bump `f_nu` of one tube.
pub fn single_tube(ex: &SharpnessExample, nu: usize) -> Result<SharpnessExample> {
    let mut p = ex.params;
    p.sigma = 1;
    let one = build_sharpness_with(p)?;
    // Shift by modulation to the requested center.
    let c = ex.family.centers[nu].clone();
    let c0 = one.family.centers[0].clone();
    let f = one.f.map(|xi, v| {
        let mut lift = xi.to_vec();
        lift.push(norm(xi));
        let ph: f64 = lift.iter().zip(c.iter().zip(&c0)).map(|(a, (x, y))| a * (x - y)).sum();
        v * C64::from_polar(1.0, -2.0 * PI * ph)
    });
    Ok(SharpnessExample { f, ..one })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sphere_counts() {
        assert_eq!(sphere_lattice_points(1, 5).unwrap().len(), 10);
        assert_eq!(sphere_lattice_points(2, 5).unwrap().len(), 90);
        assert_eq!(sphere_lattice_points(5, 2).unwrap().len(), 12);
    }

    #[test]
    fn counts_symmetric_under_signs_and_permutations() {
        let pts = sphere_lattice_points(6, 4).unwrap();
        let set: BTreeSet<Vec<i64>> = pts.iter().cloned().collect();
        for p in &pts {
            let mut q = p.clone();
            q[0] = -q[0];
            assert!(set.contains(&q));
            let mut s = p.clone();
            s.swap(1, 3);
            assert!(set.contains(&s));
        }
    }

    #[test]
    fn tube_feasibility() {
        assert!(tube_family(64.0, 4, 2, 0.05).is_ok());
        assert!(tube_family(64.0, 8, 2, 0.05).is_err());
        let fam = tube_family(256.0, 8, 2, 0.05).unwrap();
        let sep = 256f64.powf(0.6);
        for i in 0..8 {
            for j in 0..i {
                let dd: f64 = norm(&fam.centers[i].iter().zip(&fam.centers[j]).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(dd >= sep);
            }
        }
    }

    #[test]
    fn inner_cover_has_sigma_cubes_per_slab() {
        let fam = tube_family(256.0, 4, 2, 0.05).unwrap();
        let y = cover_of_inner(&fam);
        for (_, c) in y.slab_counts() {
            assert_eq!(c, 4);
        }
    }
}
