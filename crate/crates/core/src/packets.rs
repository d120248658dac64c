//! Box and wave-packet decompositions of functions on a cap.
//!
//! A cap is rotated to the last axis and pulled back to the graph
//! coordinates `omega`, in which the lifted cone is `(omega, h(omega))` with
//! `h = sum_{i<d} omega_i^2 / (2 omega_d)`. There the pieces are
//! `f_D = psi * (phi_D f^)^` with an exact partition of unity `phi_D` on the
//! dual side, and `Ef_T` is concentrated on `T = D x [-R, R]` mapped back to
//! spacetime.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;

use crate::cone::{apply_a, Cap, OrientedBox, Rotation};
use crate::error::{domain, Result};
use crate::fft::{fftn, inverse_scale};
use crate::grid::GridFunction;
use crate::numeric::{norm, pairwise_sum, Halton, PairwiseAcc, C64};

/// Relative `L^2` size below which a box is not transformed at all.
pub const SKIP_TOL: f64 = 1e-13;
/// Relative `L^2` size below which a piece is dropped.
pub const KEEP_TOL: f64 = 1e-12;
/// Default slack exponent.
pub const DEFAULT_DELTA: f64 = 0.05;

/// `exp(-1/(1-t^2))` on `|t| < 1`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Smooth step: 1 for `u <= 0`, 0 for `u >= 1`.
pub fn smooth_step(u: f64) -> f64 {
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let (a, b) = (g(1.0 - u), g(u));
        a / (a + b)
    }
}

/// Fejer profile `sinc^2`, whose integer translates sum to one.
pub fn fejer(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let s = (PI * x).sin() / (PI * x);
        s * s
    }
}

/// `sum_{|k| <= k_max} fejer(x - k)`.
pub fn fejer_partition_sum(x: f64, k_max: i64) -> f64 {
    let terms: Vec<f64> = (-k_max..=k_max).map(|k| fejer(x - k as f64)).collect();
    pairwise_sum(&terms)
}

/// Profiles of the dual partition `phi_D` and the frequency cutoff `psi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PartitionKernel {
    /// Support of the one-dimensional bump in units of the half-width.
    pub support: f64,
    /// `psi` drops from 1 to 0 between `B` and `(1 + ramp) B`.
    pub ramp: f64,
}

impl Default for PartitionKernel {
    fn default() -> Self {
        Self { support: 0.75, ramp: 0.25 }
    }
}

impl PartitionKernel {
    fn raw(&self, u: f64) -> f64 {
        bump(u / self.support)
    }

    /// Normalised weight of the lattice point 0 at offset `u` (half-width
    /// units): `b(u) / sum_m b(u - m)`.
    pub fn phi_1d(&self, u: f64) -> f64 {
        let b = self.raw(u);
        if b == 0.0 {
            return 0.0;
        }
        let lo = (u - self.support).floor() as i64;
        let hi = (u + self.support).ceil() as i64;
        let s: f64 = (lo..=hi).map(|m| self.raw(u - m as f64)).sum();
        b / s
    }

    /// `phi_D(x)` for the box with the given center and half-widths.
    pub fn phi(&self, x: &[f64], center: &[f64], half: &[f64]) -> f64 {
        x.iter().zip(center.iter().zip(half)).map(|(v, (c, h))| self.phi_1d((v - c) / h)).product()
    }

    /// One-dimensional factor of `psi` at offset `v` from the center of an
    /// interval of half-width `a`.
    pub fn psi_1d(&self, v: f64, a: f64) -> f64 {
        smooth_step((v.abs() - a) / (self.ramp * a))
    }

    /// `psi(omega)` for the axis-parallel box `b`.
    pub fn psi(&self, omega: &[f64], b: &OrientedBox) -> f64 {
        omega
            .iter()
            .zip(b.center.iter().zip(&b.half_widths))
            .map(|(v, (c, a))| self.psi_1d(v - c, *a))
            .product()
    }
}

/// Rotation plus graph coordinates attached to a cap center.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaFrame {
    pub center: Vec<f64>,
    #[serde(skip)]
    rot: Rotation,
}

impl OmegaFrame {
    pub fn new(center: &[f64]) -> Result<Self> {
        let r = norm(center);
        if center.len() < 2 || !(r > 0.0) {
            return domain("frame needs a nonzero center in R^d, d >= 2");
        }
        let c: Vec<f64> = center.iter().map(|v| v / r).collect();
        Ok(Self { rot: Rotation::to_last_axis(&c), center: c })
    }

    pub fn d(&self) -> usize {
        self.center.len()
    }

    pub fn omega_of_xi(&self, xi: &[f64]) -> Vec<f64> {
        let mut w = self.rot.apply(xi);
        let d = w.len();
        w[d - 1] = (w[d - 1] + norm(xi)) * FRAC_1_SQRT_2;
        w
    }

    /// Inverse of [`Self::omega_of_xi`]; needs `omega_d > 0`.
    pub fn xi_of_omega(&self, w: &[f64]) -> Vec<f64> {
        let d = w.len();
        let h = graph_height(w);
        let mut xp = w.to_vec();
        xp[d - 1] = (w[d - 1] - h) * FRAC_1_SQRT_2;
        self.rot.apply(&xp)
    }

    /// `d xi / d omega`.
    pub fn jacobian(&self, w: &[f64]) -> f64 {
        let d = w.len();
        let s: f64 = w[..d - 1].iter().map(|v| v * v).sum();
        (1.0 + s / (2.0 * w[d - 1] * w[d - 1])) * FRAC_1_SQRT_2
    }

    /// Spacetime `(x, t)` to `(x~, t~) = A (Rot x, t)`.
    pub fn to_tilde(&self, p: &[f64]) -> Vec<f64> {
        apply_a(&self.rot.apply(p), false)
    }

    pub fn from_tilde(&self, q: &[f64]) -> Vec<f64> {
        self.rot.apply(&apply_a(q, true))
    }

    /// Bounding box in `omega` of `{r u : u within angle rho of the center,
    /// 1 <= r <= 2}`.
    pub fn omega_box(&self, rho: f64) -> OrientedBox {
        let d = self.d();
        let lo = (1.0 + rho.cos()) * FRAC_1_SQRT_2;
        let hi = 2.0 * SQRT_2;
        let mut center = vec![0.0; d];
        center[d - 1] = 0.5 * (lo + hi);
        let mut half = vec![2.0 * rho.sin(); d];
        half[d - 1] = 0.5 * (hi - lo);
        OrientedBox::axis_aligned(center, half).expect("positive half-widths")
    }
}

/// `h(omega) = sum_{i<d} omega_i^2 / (2 omega_d)`.
pub fn graph_height(w: &[f64]) -> f64 {
    let d = w.len();
    w[..d - 1].iter().map(|v| v * v).sum::<f64>() / (2.0 * w[d - 1])
}

/// Half-widths of the boxes `D`: `R^{3/4+delta}` tangentially and
/// `R^{1/2+delta}` along the last axis.
pub fn d_half_widths(d: usize, r: f64, delta: f64) -> Vec<f64> {
    let mut h = vec![r.powf(0.75 + delta); d];
    h[d - 1] = r.powf(0.5 + delta);
    h
}

/// One box piece.
#[derive(Clone, Debug)]
pub struct BoxPiece {
    /// Lattice index of `D`.
    pub key: Vec<i64>,
    /// `D` in the dual variable.
    pub d_box: OrientedBox,
    pub f_d: GridFunction,
}

/// Work counters of a decomposition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoxStats {
    pub boxes_total: usize,
    pub boxes_transformed: usize,
    pub pieces_kept: usize,
    pub input_norm: f64,
    pub kept_norm_sq: f64,
    pub grid_shape: [usize; 4],
}

/// 5-smooth integer `>= n`, for FFT-friendly sizes.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

fn check_box(b: &OrientedBox, d: usize, r: f64) -> Result<()> {
    if b.dim() != d {
        return domain("box dimension does not match the grid");
    }
    for (i, ax) in b.axes.iter().enumerate() {
        for (j, v) in ax.iter().enumerate() {
            let e = if i == j { 1.0 } else { 0.0 };
            if (v - e).abs() > 1e-12 {
                return domain("box must be axis-parallel");
            }
        }
    }
    let tang = r.powf(-0.25);
    for (i, &a) in b.half_widths.iter().enumerate() {
        let nominal = if i + 1 < d { tang } else { 1.0 };
        if !(a >= 0.5 * nominal && a <= 2.0 * nominal) {
            return domain(format!(
                "box half-width {a:.4} on axis {i} is not comparable to {nominal:.4}; unsupported box shape"
            ));
        }
    }
    Ok(())
}

/// Per-axis list, for every dual grid index, of `(lattice k, weight)`.
fn axis_partition(kernel: &PartitionKernel, n: usize, dx: f64, half: f64) -> Vec<Vec<(i64, f64)>> {
    (0..n)
        .map(|j| {
            let jj = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            let u = jj * dx / half;
            let lo = (u - kernel.support).floor() as i64;
            let hi = (u + kernel.support).ceil() as i64;
            (lo..=hi)
                .filter_map(|k| {
                    let w = kernel.phi_1d(u - k as f64);
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

/// Visit every nonnegligible `f_D` of `f`, which must be supported in the
/// axis-parallel box `b`. Pieces arrive in lexicographic order of `D`.
pub fn visit_boxes<V>(f: &GridFunction, b: &OrientedBox, r: f64, delta: f64, mut visit: V) -> Result<BoxStats>
where
    V: FnMut(BoxPiece) -> Result<()>,
{
    let d = f.d;
    if d < 2 {
        return domain("box decomposition needs d >= 2");
    }
    if !(r >= 64.0) {
        return domain(format!("box decomposition needs R >= 64, got {r}"));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return domain(format!("slack delta must lie in (0, 1/4), got {delta}"));
    }
    check_box(b, d, r)?;
    let h = f.spacing;
    if 1.0 / h < 4.0 * r * (1.0 - 1e-9) {
        return domain(format!("grid spacing {h} is too coarse for R = {r}: need 1/h >= 4R"));
    }
    let kernel = PartitionKernel::default();

    // Dense working grid covering (1 + ramp) B plus two nodes.
    let mut lo = vec![0i32; d];
    let mut shape = vec![0usize; d];
    for i in 0..d {
        let (c, a) = (b.center[i], b.half_widths[i] * (1.0 + kernel.ramp));
        let i0 = ((c - a - f.origin) / h - 0.5).floor() as i64 - 2;
        let i1 = ((c + a - f.origin) / h - 0.5).ceil() as i64 + 2;
        lo[i] = i0 as i32;
        shape[i] = smooth_size((i1 - i0 + 1) as usize);
    }
    let total: usize = shape.iter().product();
    if total > crate::grid::MAX_NODES {
        return crate::error::guard(format!("working grid of {total} nodes is too large"));
    }
    let strides: Vec<usize> = (0..d).map(|i| shape[..i].iter().product()).collect();
    let mut data = vec![C64::default(); total];
    for k in 0..f.len() {
        let idx = f.index(k);
        let mut off = 0;
        for i in 0..d {
            let j = idx[i] - lo[i];
            if j < 0 || j as usize >= shape[i] {
                if f.values()[k] != C64::default() {
                    return domain("input has nonzero values outside the enlarged box");
                }
                off = usize::MAX;
                break;
            }
            off += j as usize * strides[i];
        }
        if off != usize::MAX {
            data[off] = f.values()[k];
        }
    }
    let input_norm = f.l2_norm();

    // fhat on the dual grid (first axis fastest, so reverse for fftn).
    let rev: Vec<usize> = shape.iter().rev().copied().collect();
    fftn(&mut data, &rev, FftDirection::Inverse);
    let fhat = data;

    let halves = d_half_widths(d, r, delta);
    let parts: Vec<Vec<Vec<(i64, f64)>>> =
        (0..d).map(|i| axis_partition(&kernel, shape[i], 1.0 / (shape[i] as f64 * h), halves[i])).collect();

    // Energy of phi_D fhat per box, in one pass.
    let mut energy: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut cur = vec![0usize; d];
    let mut key = vec![0i64; d];
    for (off, v) in fhat.iter().enumerate() {
        let a = v.norm_sqr();
        if a > 0.0 {
            let mut sel = vec![0usize; d];
            'combo: loop {
                let mut w = 1.0;
                for i in 0..d {
                    let (k, wi) = parts[i][cur[i]][sel[i]];
                    key[i] = k;
                    w *= wi;
                }
                *energy.entry(key.clone()).or_insert(0.0) += w * w * a;
                for i in 0..d {
                    sel[i] += 1;
                    if sel[i] < parts[i][cur[i]].len() {
                        continue 'combo;
                    }
                    sel[i] = 0;
                }
                break;
            }
        }
        let _ = off;
        for i in 0..d {
            cur[i] += 1;
            if cur[i] < shape[i] {
                break;
            }
            cur[i] = 0;
        }
    }
    let fhat_sq: f64 = pairwise_sum(&fhat.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());

    // psi on the working grid and the index box where it is nonzero.
    let psi_axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..shape[i])
                .map(|j| {
                    let x = f.origin + ((lo[i] as i64 + j as i64) as f64 + 0.5) * h;
                    kernel.psi_1d(x - b.center[i], b.half_widths[i])
                })
                .collect()
        })
        .collect();
    let live: Vec<(usize, usize)> = psi_axes
        .iter()
        .map(|p| {
            let a = p.iter().position(|v| *v > 0.0).unwrap_or(0);
            let z = p.iter().rposition(|v| *v > 0.0).unwrap_or(0);
            (a, z + 1)
        })
        .collect();
    let out_shape: Vec<usize> = live.iter().map(|(a, z)| z - a).collect();
    let out_lo: Vec<i32> = (0..d).map(|i| lo[i] + live[i].0 as i32).collect();
    let scale = inverse_scale(&shape);

    let mut stats = BoxStats {
        boxes_total: energy.len(),
        input_norm,
        grid_shape: [shape[0], shape[1], *shape.get(2).unwrap_or(&1), *shape.get(3).unwrap_or(&1)],
        ..Default::default()
    };
    let mut buf = vec![C64::default(); total];
    let mut kept = PairwiseAcc::new();
    for (key, e) in &energy {
        if *e <= SKIP_TOL * SKIP_TOL * fhat_sq {
            continue;
        }
        stats.boxes_transformed += 1;
        // phi_D fhat, touching only the support rows of each axis.
        buf.iter_mut().for_each(|v| *v = C64::default());
        let supp: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|i| {
                parts[i]
                    .iter()
                    .enumerate()
                    .filter_map(|(j, l)| l.iter().find(|(k, _)| *k == key[i]).map(|(_, w)| (j, *w)))
                    .collect()
            })
            .collect();
        fill_product(&mut buf, &fhat, &supp, &strides, d - 1, 0, 1.0);
        fftn(&mut buf, &rev, FftDirection::Forward);

        let mut vals = Vec::with_capacity(out_shape.iter().product());
        let mut c = vec![0usize; d];
        loop {
            let mut off = 0;
            let mut w = scale;
            for i in 0..d {
                let j = live[i].0 + c[i];
                off += j * strides[i];
                w *= psi_axes[i][j];
            }
            vals.push(buf[off] * w);
            let mut done = true;
            for i in 0..d {
                c[i] += 1;
                if c[i] < out_shape[i] {
                    done = false;
                    break;
                }
                c[i] = 0;
            }
            if done {
                break;
            }
        }
        let f_d = GridFunction::dense(d, h, f.origin, out_lo.clone(), out_shape.clone(), vals)?;
        let nrm = f_d.l2_norm();
        if nrm <= KEEP_TOL * input_norm {
            continue;
        }
        stats.pieces_kept += 1;
        kept.push(nrm * nrm);
        let center: Vec<f64> = key.iter().zip(&halves).map(|(k, hw)| *k as f64 * hw).collect();
        let d_box = OrientedBox::axis_aligned(center, halves.clone())?;
        visit(BoxPiece { key: key.clone(), d_box, f_d })?;
    }
    stats.kept_norm_sq = kept.total();
    Ok(stats)
}

fn fill_product(
    buf: &mut [C64],
    src: &[C64],
    supp: &[Vec<(usize, f64)>],
    strides: &[usize],
    axis: usize,
    base: usize,
    w: f64,
) {
    for &(j, wj) in &supp[axis] {
        let off = base + j * strides[axis];
        if axis == 0 {
            buf[off] = src[off] * (w * wj);
        } else {
            fill_product(buf, src, supp, strides, axis - 1, off, w * wj);
        }
    }
}

/// All pieces `(D, f_D)` of `f`, supported in the axis-parallel box `b`.
pub fn decompose_boxes(f: &GridFunction, b: &OrientedBox, r: f64, delta: f64) -> Result<Vec<(OrientedBox, GridFunction)>> {
    let mut out = Vec::new();
    visit_boxes(f, b, r, delta, |p| {
        out.push((p.d_box, p.f_d));
        Ok(())
    })?;
    Ok(out)
}

/// Smooth window on the cap times eight random modes
/// `exp(-2 pi i <(xi, |xi|), X_k>)` with `|X_k| <= R/2`.
pub fn random_cap_input(cap: &Cap, r: f64, seed: u64) -> impl Fn(&[f64]) -> C64 + Sync {
    use rand::Rng;
    let d = cap.d();
    let mut g = crate::numeric::rng(seed);
    let modes: Vec<(Vec<f64>, C64)> = (0..8)
        .map(|_| {
            let x: Vec<f64> = loop {
                let p: Vec<f64> = (0..=d).map(|_| g.gen_range(-0.5..0.5) * r).collect();
                if norm(&p) <= 0.5 * r {
                    break p;
                }
            };
            (x, C64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
        })
        .collect();
    let c = cap.center_dir.clone();
    let rho = cap.radius;
    move |xi: &[f64]| {
        let m = norm(xi);
        let cosang: f64 = xi.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / m;
        let w = bump((m - 1.5) / 0.5) * bump(cosang.clamp(-1.0, 1.0).acos() / rho);
        if w == 0.0 {
            return C64::default();
        }
        let s: C64 = modes
            .iter()
            .map(|(x, a)| {
                let ph: f64 = xi.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + m * x[d];
                a * C64::from_polar(1.0, -2.0 * PI * ph)
            })
            .sum();
        s * w
    }
}

/// Input of a packet decomposition: a function of `xi` or samples of it.
#[derive(Clone, Copy)]
pub enum PacketInput<'a> {
    Closure(&'a (dyn Fn(&[f64]) -> C64 + Sync)),
    /// Interpolated multilinearly; missing nodes count as zero.
    Grid(&'a GridFunction),
}

/// A wave packet `f_T` in graph coordinates and its box `T` in spacetime.
#[derive(Clone, Debug, Serialize)]
pub struct Packet {
    pub t_box: OrientedBox,
    /// `D` in the dual graph coordinates.
    pub d_box: OrientedBox,
    pub key: Vec<i64>,
    pub l2: f64,
    pub leakage: Option<f64>,
    #[serde(skip)]
    pub f_t: GridFunction,
    #[serde(skip)]
    pub frame: OmegaFrame,
}

impl Packet {
    /// `f_T` as a function of `xi` on the annulus grid with `m` nodes per unit:
    /// `f(xi) = f_T(omega(xi)) / |d xi / d omega|`, interpolated multilinearly.
    pub fn to_annulus(&self, m: usize, half: bool) -> Result<GridFunction> {
        let g = &self.f_t;
        let d = g.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for k in 0..g.len() {
            if g.values()[k] == C64::default() {
                continue;
            }
            let xi = self.frame.xi_of_omega(&g.node(k));
            for i in 0..d {
                lo[i] = lo[i].min(xi[i]);
                hi[i] = hi[i].max(xi[i]);
            }
        }
        if lo[0] > hi[0] {
            return domain("packet has no support");
        }
        let pad = 2.0 * g.spacing;
        lo.iter_mut().for_each(|v| *v -= pad);
        hi.iter_mut().for_each(|v| *v += pad);
        let map = g.lookup();
        let out = crate::grid::annulus_sample(d, m, half, &lo, &hi, |xi| {
            let w = self.frame.omega_of_xi(xi);
            interpolate(g, &map, &w) / self.frame.jacobian(&w)
        })?;
        GridFunction::from_nodes(
            d,
            out.spacing,
            out.origin,
            out.mask.clone(),
            (0..out.len()).filter(|&k| out.values()[k] != C64::default()).map(|k| (out.index(k), out.values()[k])),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PacketDecomposition {
    pub cap: Cap,
    pub r: f64,
    pub delta_slack: f64,
    pub omega_box: OrientedBox,
    /// `||f||_2` in graph coordinates.
    pub input_norm: f64,
    /// `sum ||f_T||^2 / ||f||^2`.
    pub c_orth: f64,
    pub stats: BoxStats,
    pub pieces: Vec<Packet>,
}

/// Samples of the pulled-back input `f(xi(omega)) |d xi / d omega|` on the
/// spacing `1/(4R)` lattice over the box `b`.
pub fn pull_back(input: PacketInput<'_>, frame: &OmegaFrame, b: &OrientedBox, r: f64) -> Result<GridFunction> {
    let d = frame.d();
    let h = 0.25 / r;
    let mut lo = vec![0i32; d];
    let mut shape = vec![0usize; d];
    for i in 0..d {
        let (c, a) = (b.center[i], b.half_widths[i]);
        let i0 = ((c - a) / h - 0.5).floor() as i64;
        let i1 = ((c + a) / h - 0.5).ceil() as i64;
        lo[i] = i0 as i32;
        shape[i] = (i1 - i0 + 1) as usize;
    }
    let total: usize = shape.iter().product();
    if total > crate::grid::MAX_NODES {
        return crate::error::guard(format!("pull-back grid of {total} nodes is too large"));
    }
    let interp = match input {
        PacketInput::Grid(g) => {
            if g.d != d {
                return domain("input grid dimension does not match the cap");
            }
            Some((g, g.lookup()))
        }
        PacketInput::Closure(_) => None,
    };
    let vals: Vec<C64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut rem = k;
            let w: Vec<f64> = (0..d)
                .map(|i| {
                    let j = rem % shape[i];
                    rem /= shape[i];
                    ((lo[i] as i64 + j as i64) as f64 + 0.5) * h
                })
                .collect();
            if !b.contains(&w) {
                return C64::default();
            }
            let xi = frame.xi_of_omega(&w);
            let v = match (&input, &interp) {
                (PacketInput::Closure(f), _) => f(&xi),
                (PacketInput::Grid(_), Some((g, map))) => interpolate(g, map, &xi),
                _ => unreachable!(),
            };
            v * frame.jacobian(&w)
        })
        .collect();
    GridFunction::dense(d, h, 0.0, lo, shape, vals)
}

/// Multilinear interpolation of grid samples.
pub fn interpolate(g: &GridFunction, map: &std::collections::HashMap<Vec<i32>, usize>, x: &[f64]) -> C64 {
    let d = g.d;
    let u: Vec<f64> = x.iter().map(|v| (v - g.origin) / g.spacing - 0.5).collect();
    let base: Vec<i32> = u.iter().map(|v| v.floor() as i32).collect();
    let frac: Vec<f64> = u.iter().zip(&base).map(|(v, b)| v - *b as f64).collect();
    let mut acc = C64::default();
    let mut idx = vec![0i32; d];
    for corner in 0..1usize << d {
        let mut w = 1.0;
        for i in 0..d {
            let up = corner >> i & 1 == 1;
            idx[i] = base[i] + up as i32;
            w *= if up { frac[i] } else { 1.0 - frac[i] };
        }
        if w > 0.0 {
            if let Some(&k) = map.get(&idx) {
                acc += g.values()[k] * w;
            }
        }
    }
    acc
}

fn check_cap(cap: &Cap, r: f64) -> Result<()> {
    let want = r.powf(-0.25);
    if !((cap.scale / want - 1.0).abs() <= 1e-6) {
        return domain(format!("cap scale {} does not match R^(-1/4) = {want} for R = {r}", cap.scale));
    }
    Ok(())
}

/// Stream the packets of `f` on `cap` to `visit`; returns the decomposition
/// with an empty piece list.
pub fn visit_packets<V>(input: PacketInput<'_>, cap: &Cap, r: f64, delta: f64, mut visit: V) -> Result<PacketDecomposition>
where
    V: FnMut(Packet) -> Result<()>,
{
    check_cap(cap, r)?;
    let frame = OmegaFrame::new(&cap.center_dir)?;
    let d = frame.d();
    let b = frame.omega_box(cap.radius);
    let f = pull_back(input, &frame, &b, r)?;
    let t_axes: Vec<Vec<f64>> = (0..=d)
        .map(|j| {
            let mut e = vec![0.0; d + 1];
            e[j] = 1.0;
            frame.from_tilde(&e)
        })
        .collect();
    let stats = visit_boxes(&f, &b, r, delta, |p| {
        let mut c = p.d_box.center.clone();
        c.push(0.0);
        let mut half = p.d_box.half_widths.clone();
        half.push(r);
        let t_box = OrientedBox::new(frame.from_tilde(&c), t_axes.clone(), half)?;
        let l2 = p.f_d.l2_norm();
        visit(Packet { t_box, d_box: p.d_box, key: p.key, l2, leakage: None, f_t: p.f_d, frame: frame.clone() })
    })?;
    let c_orth = if stats.input_norm > 0.0 { stats.kept_norm_sq / stats.input_norm.powi(2) } else { 0.0 };
    Ok(PacketDecomposition {
        cap: cap.clone(),
        r,
        delta_slack: delta,
        omega_box: b,
        input_norm: stats.input_norm,
        c_orth,
        stats,
        pieces: Vec::new(),
    })
}

pub fn decompose_packets(input: PacketInput<'_>, cap: &Cap, r: f64, delta: f64) -> Result<PacketDecomposition> {
    let mut pieces = Vec::new();
    let mut out = visit_packets(input, cap, r, delta, |p| {
        pieces.push(p);
        Ok(())
    })?;
    out.pieces = pieces;
    Ok(out)
}

/// Steps between exact phase re-anchoring in the row recurrence.
const ANCHOR: usize = 1024;
const LANES: usize = 4;
/// Points evaluated per sweep over the field.
const POINT_BLOCK: usize = 8;

/// `sum_nodes h^d f(omega) exp(2 pi i (<omega, x~> + h(omega) t~))` for a
/// dense field at points `(x~, t~)` given in tilde coordinates.
pub fn graph_extension(f: &GridFunction, tilde: &[Vec<f64>]) -> Result<Vec<C64>> {
    let d = f.d;
    let (lo, shape) = f.dense_shape().ok_or_else(|| crate::Error::Domain("graph extension needs a dense field".into()))?;
    if tilde.iter().any(|p| p.len() != d + 1) {
        return domain("points must have d + 1 coordinates");
    }
    let h = f.spacing;
    let n0 = shape[0];
    let rows = f.len() / n0.max(1);
    let coord = |i: usize, j: usize| f.origin + ((lo[i] as i64 + j as i64) as f64 + 0.5) * h;
    let blocks: Vec<&[Vec<f64>]> = tilde.chunks(POINT_BLOCK).collect();
    let vals = f.values();
    let w = f.weight();
    let out: Vec<Vec<C64>> = blocks
        .par_iter()
        .map(|pts| {
            let mut accs: Vec<PairwiseAcc<C64>> = pts.iter().map(|_| PairwiseAcc::new()).collect();
            let mut rest = vec![0.0; d];
            for row in 0..rows {
                let mut rem = row;
                for i in 1..d {
                    let j = rem % shape[i];
                    rem /= shape[i];
                    rest[i] = coord(i, j);
                }
                let line = &vals[row * n0..(row + 1) * n0];
                if line.iter().all(|v| *v == C64::default()) {
                    continue;
                }
                let wd = rest[d - 1];
                let tail: f64 = rest[1..d - 1].iter().map(|v| v * v).sum::<f64>();
                for (p, acc) in pts.iter().zip(accs.iter_mut()) {
                    let t = p[d];
                    let lin: f64 = (1..d).map(|i| rest[i] * p[i]).sum::<f64>() + t * tail / (2.0 * wd);
                    let phase = |w0: f64| lin + w0 * p[0] + t * w0 * w0 / (2.0 * wd);
                    // Four interleaved lanes of stride 4 keep the chains independent.
                    let q4 = C64::from_polar(1.0, 2.0 * PI * t * 16.0 * h * h / wd);
                    let mut s = [C64::default(); LANES];
                    for (a, chunk) in line.chunks(ANCHOR).enumerate() {
                        let j0 = a * ANCHOR;
                        let mut z = [C64::default(); LANES];
                        let mut step = [C64::default(); LANES];
                        for l in 0..LANES {
                            let w0 = coord(0, j0 + l);
                            let ph0 = phase(w0);
                            z[l] = C64::from_polar(1.0, 2.0 * PI * ph0);
                            step[l] = C64::from_polar(1.0, 2.0 * PI * (phase(w0 + LANES as f64 * h) - ph0));
                        }
                        let mut groups = chunk.chunks_exact(LANES);
                        for g in &mut groups {
                            for l in 0..LANES {
                                s[l] += g[l] * z[l];
                                z[l] *= step[l];
                                step[l] *= q4;
                            }
                        }
                        for (l, v) in groups.remainder().iter().enumerate() {
                            s[l] += v * z[l];
                        }
                    }
                    let s = (s[0] + s[1]) + (s[2] + s[3]);
                    acc.push(s);
                }
            }
            accs.iter().map(|a| a.total() * w).collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// `Ef_T` at spacetime points.
pub fn packet_extension(p: &Packet, pts: &[Vec<f64>]) -> Result<Vec<C64>> {
    let tilde: Vec<Vec<f64>> = pts.iter().map(|x| p.frame.to_tilde(x)).collect();
    graph_extension(&p.f_t, &tilde)
}

/// Max of `|Ef_T| / ||f_T||_2` over quasi-random probes in `B(0,R) \ 2T`.
pub fn leakage_mass(p: &Packet, r: f64, probes: usize) -> Result<f64> {
    leakage_mass_seeded(p, r, probes, 0)
}

pub fn leakage_mass_seeded(p: &Packet, r: f64, probes: usize, seed: u64) -> Result<f64> {
    if probes < 100 {
        return domain(format!("leakage needs at least 100 probes, got {probes}"));
    }
    let nrm = p.f_t.l2_norm();
    if nrm == 0.0 {
        return Ok(0.0);
    }
    let dim = p.t_box.dim();
    let twice = p.t_box.scaled(2.0);
    let mut hal = Halton::new(dim, seed);
    let mut pts = Vec::with_capacity(probes);
    let mut tries = 0;
    while pts.len() < probes && tries < 1000 * probes {
        tries += 1;
        let x: Vec<f64> = hal.sample().iter().map(|u| (2.0 * u - 1.0) * r).collect();
        if norm(&x) <= r && !twice.contains(&x) {
            pts.push(x);
        }
    }
    if pts.is_empty() {
        return Ok(0.0);
    }
    let v = packet_extension(p, &pts)?;
    Ok(v.iter().map(|z| z.norm()).fold(0.0, f64::max) / nrm)
}

/// Mean of `|Ef_T| / ||f_T||_2` over `probes` points at distance
/// `factor * halfwidth` from the center of `T` along its short axis, spread
/// over the other axes within `T`.
pub fn shell_leakage(p: &Packet, factor: f64, probes: usize, seed: u64) -> Result<f64> {
    let nrm = p.f_t.l2_norm();
    if nrm == 0.0 {
        return Ok(0.0);
    }
    let dim = p.t_box.dim();
    let short = dim - 2;
    let mut hal = Halton::new(dim, seed);
    let pts: Vec<Vec<f64>> = (0..probes)
        .map(|k| {
            let u = hal.sample();
            let local: Vec<f64> = (0..dim)
                .map(|i| {
                    if i == short {
                        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                        s * factor * p.t_box.half_widths[i]
                    } else {
                        (2.0 * u[i] - 1.0) * p.t_box.half_widths[i]
                    }
                })
                .collect();
            p.t_box.from_local(&local)
        })
        .collect();
    let v = packet_extension(p, &pts)?;
    Ok(v.iter().map(|z| z.norm()).sum::<f64>() / (probes as f64 * nrm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::annulus_sample;

    #[test]
    fn partition_sums_to_one() {
        let k = PartitionKernel::default();
        for i in 0..200 {
            let u = -3.0 + 0.0301 * i as f64;
            let s: f64 = (-6..=6).map(|m| k.phi_1d(u - m as f64)).sum();
            assert!((s - 1.0).abs() < 1e-12, "{u} {s}");
        }
    }

    #[test]
    fn fejer_sums_to_one() {
        assert!((fejer_partition_sum(0.3, 20000) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn frame_roundtrip_and_graph() {
        let f = OmegaFrame::new(&[0.3, 0.8]).unwrap();
        let xi = [0.5, 1.2];
        let w = f.omega_of_xi(&xi);
        let back = f.xi_of_omega(&w);
        assert!((back[0] - xi[0]).abs() < 1e-12 && (back[1] - xi[1]).abs() < 1e-12);
        // <(xi,|xi|),(x,t)> = <(w,h(w)),(x~,t~)>
        let x = [0.7, -1.1, 2.3];
        let mut lift = xi.to_vec();
        lift.push(norm(&xi));
        let lhs: f64 = lift.iter().zip(&x).map(|(a, b)| a * b).sum();
        let t = f.to_tilde(&x);
        let rhs = w[0] * t[0] + w[1] * t[1] + graph_height(&w) * t[2];
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn graph_extension_matches_annulus_quadrature() {
        let cap = Cap::centered(&[0.0, 1.0], 0.25).unwrap();
        let frame = OmegaFrame::new(&cap.center_dir).unwrap();
        let f = |xi: &[f64]| {
            let r = norm(xi);
            let ang = xi[0].atan2(xi[1]);
            C64::new(bump((r - 1.5) / 0.5) * bump(ang / cap.radius), 0.0)
        };
        let b = frame.omega_box(cap.radius);
        let g = pull_back(PacketInput::Closure(&f), &frame, &b, 8.0).unwrap();
        let ann = annulus_sample(2, 256, true, &[-1.0, 0.0], &[1.0, 2.0], |p| f(p)).unwrap();
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.3, -0.4, 2.0]];
        let a = crate::extension::extend_points(&ann, &pts).unwrap();
        let tilde: Vec<Vec<f64>> = pts.iter().map(|p| frame.to_tilde(p)).collect();
        let bvals = graph_extension(&g, &tilde).unwrap();
        for (x, y) in a.iter().zip(&bvals) {
            assert!((x - y).norm() < 2e-3 * a[0].norm(), "{x} {y}");
        }
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let n = [1500usize, 3];
        let vals: Vec<C64> = (0..n[0] * n[1]).map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
        let g = GridFunction::dense(2, 1e-3, 0.0, vec![-700, 2000], n.to_vec(), vals).unwrap();
        let p = vec![37.5, -12.25, 250.0];
        let fast = graph_extension(&g, &[p.clone()]).unwrap()[0];
        let mut slow = C64::default();
        for k in 0..g.len() {
            let w = g.node(k);
            let ph = w[0] * p[0] + w[1] * p[1] + graph_height(&w) * p[2];
            slow += g.values()[k] * C64::from_polar(g.weight(), 2.0 * PI * ph);
        }
        assert!((fast - slow).norm() < 1e-11 * g.len() as f64 * g.weight(), "{fast} {slow}");
    }

    #[test]
    fn rejects_bad_box_and_cap() {
        let g = GridFunction::dense(2, 1.0 / 256.0, 0.0, vec![0, 0], vec![2, 2], vec![C64::default(); 4]).unwrap();
        let bad = OrientedBox::axis_aligned(vec![0.0, 2.0], vec![1.5, 1.0]).unwrap();
        assert!(decompose_boxes(&g, &bad, 64.0, 0.05).is_err());
        let cap = Cap::centered(&[0.0, 1.0], 0.25).unwrap();
        let f = |_: &[f64]| C64::default();
        assert!(decompose_packets(PacketInput::Closure(&f), &cap, 64.0, 0.05).is_err());
    }
}
