//! Cone geometry: the unitary `A`, normals, caps and the Lorentz rescalings.
//!
//! Coordinates are 0-indexed. In `R^{d+1}` the last spatial axis is `a = d-1`
//! and time is `b = d`. `A` rotates the `(a, b)` plane by 45 degrees so that
//! the cone direction `(e_a + e_b)/sqrt 2` lands on `e_a`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numeric::{dot, norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConeConfig {
    pub d: usize,
    /// Restrict to `xi_d >= 0`.
    pub half_cone: bool,
}

impl ConeConfig {
    pub fn new(d: usize, half_cone: bool) -> Result<Self> {
        if d < 2 {
            return domain(format!("cone dimension d = {d} must be >= 2"));
        }
        Ok(Self { d, half_cone })
    }
}

/// Apply `A` (or `A^*` when `inverse`) to a point of `R^{d+1}`.
pub fn apply_a(x: &[f64], inverse: bool) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2, "apply_a needs at least two coordinates");
    let (a, b) = (n - 2, n - 1);
    let mut y = x.to_vec();
    if inverse {
        y[a] = (x[a] - x[b]) * FRAC_1_SQRT_2;
        y[b] = (x[a] + x[b]) * FRAC_1_SQRT_2;
    } else {
        y[a] = (x[a] + x[b]) * FRAC_1_SQRT_2;
        y[b] = (x[b] - x[a]) * FRAC_1_SQRT_2;
    }
    y
}

/// Unit normal `(xi/|xi|, -1)/sqrt 2` to the cone over `xi`.
pub fn cone_normal(xi: &[f64]) -> Result<Vec<f64>> {
    let r = norm(xi);
    if !(r > 0.0) {
        return domain("cone_normal of the zero vector");
    }
    let mut g: Vec<f64> = xi.iter().map(|v| v / r * FRAC_1_SQRT_2).collect();
    g.push(-FRAC_1_SQRT_2);
    Ok(g)
}

/// Unit vector along the cone generator through `xi`.
pub fn cone_flat(xi: &[f64]) -> Vec<f64> {
    let r = norm(xi);
    let mut g: Vec<f64> = xi.iter().map(|v| v / r * FRAC_1_SQRT_2).collect();
    g.push(FRAC_1_SQRT_2);
    g
}

/// Angle between `v` and the hyperplane `A^*(R^d x {0})`.
pub fn angle_with_flat_plane(v: &[f64]) -> f64 {
    let n = v.len();
    let mut m = vec![0.0; n];
    m[n - 2] = -FRAC_1_SQRT_2;
    m[n - 1] = FRAC_1_SQRT_2;
    (dot(v, &m).abs() / norm(v)).min(1.0).asin()
}

/// Which of the two diagonal rescalings to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Selector {
    /// Exponents `(1/2, ..., 1/2, 0, 1)`.
    Half,
    /// Exponents `(1/4, ..., 1/4, 0, 1/2)`.
    Quarter,
}

/// The map `A^* B A` with `B` diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LorentzMap {
    pub r: f64,
    pub selector: Selector,
    diag: Vec<f64>,
}

impl LorentzMap {
    pub fn new(r: f64, selector: Selector, d: usize) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return domain(format!("Lorentz map needs R > 1, got {r}"));
        }
        if d < 2 {
            return domain("Lorentz map needs d >= 2");
        }
        let (e_tan, e_norm) = match selector {
            Selector::Half => (0.5, 1.0),
            Selector::Quarter => (0.25, 0.5),
        };
        let mut diag = vec![r.powf(e_tan); d + 1];
        diag[d - 1] = 1.0;
        diag[d] = r.powf(e_norm);
        Ok(Self { r, selector, diag })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = apply_a(x, false);
        for (v, s) in y.iter_mut().zip(&self.diag) {
            *v *= s;
        }
        apply_a(&y, true)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut y = apply_a(x, false);
        for (v, s) in y.iter_mut().zip(&self.diag) {
            *v /= s;
        }
        apply_a(&y, true)
    }

    /// Absolute Jacobian determinant.
    pub fn det(&self) -> f64 {
        self.diag.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrientedBox {
    pub center: Vec<f64>,
    /// Orthonormal rows.
    pub axes: Vec<Vec<f64>>,
    pub half_widths: Vec<f64>,
}

impl OrientedBox {
    pub fn new(center: Vec<f64>, axes: Vec<Vec<f64>>, half_widths: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if axes.len() != n || half_widths.len() != n || axes.iter().any(|a| a.len() != n) {
            return domain("box dimensions disagree");
        }
        if half_widths.iter().any(|h| !(*h > 0.0)) {
            return domain("box half-widths must be positive");
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(&axes[i], &axes[j]) - want).abs() > 1e-10 {
                    return domain("box frame is not orthonormal");
                }
            }
        }
        Ok(Self { center, axes, half_widths })
    }

    pub fn axis_aligned(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        let n = center.len();
        let axes = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(center, axes, half_widths)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Coordinates of `p` in the box frame, relative to the center.
    pub fn to_local(&self, p: &[f64]) -> Vec<f64> {
        let q: Vec<f64> = p.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.axes.iter().map(|ax| dot(ax, &q)).collect()
    }

    pub fn from_local(&self, u: &[f64]) -> Vec<f64> {
        let mut p = self.center.clone();
        for (ax, &c) in self.axes.iter().zip(u) {
            for (pi, ai) in p.iter_mut().zip(ax) {
                *pi += c * ai;
            }
        }
        p
    }

    /// Largest ratio `|u_i| / h_i`; at most 1 inside the box.
    pub fn gauge(&self, p: &[f64]) -> f64 {
        self.to_local(p)
            .iter()
            .zip(&self.half_widths)
            .map(|(u, h)| u.abs() / h)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.gauge(p) <= 1.0
    }

    /// The box dilated by `k` about its center.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            center: self.center.clone(),
            axes: self.axes.clone(),
            half_widths: self.half_widths.iter().map(|h| h * k).collect(),
        }
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                let u: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.half_widths[i] } else { -self.half_widths[i] })
                    .collect();
                self.from_local(&u)
            })
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }
}

/// Spherical footprint of a cap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Footprint {
    /// Box in hyperspherical angles `(theta_1, ..., theta_{d-2}, phi)`.
    Angles { lo: Vec<f64>, hi: Vec<f64> },
    /// Geodesic ball of the given angular radius around the center.
    Ball { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cap {
    pub center_dir: Vec<f64>,
    /// Nominal diameter `delta^{1/2}`.
    pub scale: f64,
    pub normal: Vec<f64>,
    pub flat_dir: Vec<f64>,
    pub footprint: Footprint,
    /// Largest angle between the center and a footprint point.
    pub radius: f64,
    /// Axes: `d-1` tangents, then flat, then normal.
    pub box_: OrientedBox,
}

/// Unit vector with hyperspherical angles `(theta_1, ..., theta_{d-2}, phi)`.
/// `theta_1` is measured from the last axis.
pub fn sphere_point(angles: &[f64], d: usize) -> Vec<f64> {
    debug_assert_eq!(angles.len(), d - 1);
    let mut x = vec![0.0; d];
    let mut s = 1.0;
    for (k, &th) in angles[..d - 2].iter().enumerate() {
        x[d - 1 - k] = s * th.cos();
        s *= th.sin();
    }
    let phi = angles[d - 2];
    x[1] = s * phi.sin();
    x[0] = s * phi.cos();
    x
}

/// Hyperspherical angles of a unit vector, inverse of [`sphere_point`].
pub fn sphere_angles(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut ang = Vec::with_capacity(d - 1);
    let mut tail: f64 = x.iter().map(|v| v * v).sum();
    for k in 0..d - 2 {
        let c = x[d - 1 - k];
        ang.push((tail - c * c).max(0.0).sqrt().atan2(c));
        tail = (tail - c * c).max(0.0);
    }
    let mut phi = x[1].atan2(x[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    ang.push(phi);
    ang
}

fn area_element(angles: &[f64], d: usize) -> f64 {
    let mut w = 1.0;
    for (k, &th) in angles[..d - 2].iter().enumerate() {
        w *= th.sin().powi((d - 2 - k) as i32);
    }
    w
}

/// `int_a^b sin^k`.
fn sin_power_integral(k: usize, a: f64, b: f64) -> f64 {
    // Reduction: I_k = -cos sin^{k-1}/k |_a^b + (k-1)/k I_{k-2}.
    match k {
        0 => b - a,
        1 => a.cos() - b.cos(),
        _ => {
            let kf = k as f64;
            let f = |t: f64| -t.cos() * t.sin().powi(k as i32 - 1) / kf;
            f(b) - f(a) + (kf - 1.0) / kf * sin_power_integral(k - 2, a, b)
        }
    }
}

/// Orthonormal basis of the complement of the unit vector `c`.
pub fn complement_basis(c: &[f64]) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    // Gram-Schmidt on the standard basis, dropping the most parallel axis.
    let skip = (0..n)
        .max_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .unwrap_or(0);
    for i in (0..n).filter(|&i| i != skip) {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for u in std::iter::once(c).chain(basis.iter().map(|b| b.as_slice())) {
            let p = dot(&v, u);
            for (vk, uk) in v.iter_mut().zip(u) {
                *vk -= p * uk;
            }
        }
        let r = norm(&v);
        v.iter_mut().for_each(|x| *x /= r);
        basis.push(v);
    }
    basis
}

/// Relative slack added to every cap box half-width.
const BOX_MARGIN: f64 = 0.02;

impl Cap {
    /// Cap whose footprint is the geodesic ball of diameter `delta^{1/2}`
    /// around `center` (normalised on input).
    pub fn centered(center: &[f64], delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if center.len() < 2 {
            return domain("cap center must live in R^d with d >= 2");
        }
        let r = norm(center);
        if !(r > 0.0) {
            return domain("cap center must be nonzero");
        }
        let c: Vec<f64> = center.iter().map(|v| v / r).collect();
        let w = delta.sqrt();
        Ok(Self::assemble(c, w, Footprint::Ball { radius: w / 2.0 }, w / 2.0))
    }

    fn assemble(c: Vec<f64>, w: f64, footprint: Footprint, rho: f64) -> Self {
        let d = c.len();
        let delta = w * w;
        let normal = cone_normal(&c).expect("unit center");
        let flat_dir = cone_flat(&c);
        let mut axes: Vec<Vec<f64>> = complement_basis(&c)
            .into_iter()
            .map(|mut t| {
                t.push(0.0);
                t
            })
            .collect();
        axes.push(flat_dir.clone());
        axes.push(normal.clone());

        // Tight extents of {(r u, r): u in footprint, 1 <= r <= 2} in the frame.
        let s2 = std::f64::consts::SQRT_2;
        let cr = rho.cos();
        let tan_half = 2.0 * rho.sin();
        let (flat_lo, flat_hi) = ((1.0 + cr) / s2, 2.0 * s2);
        let (norm_lo, norm_hi) = (2.0 * (cr - 1.0) / s2, 0.0);

        let mut local_center = vec![0.0; d + 1];
        local_center[d - 1] = 0.5 * (flat_lo + flat_hi);
        local_center[d] = 0.5 * (norm_lo + norm_hi);
        let mut half = vec![tan_half.max(w); d + 1];
        half[d - 1] = (0.5 * (flat_hi - flat_lo)).max(1.0);
        half[d] = (0.5 * (norm_hi - norm_lo)).max(delta);
        for h in half.iter_mut() {
            *h *= 1.0 + BOX_MARGIN;
        }
        let mut center = vec![0.0; d + 1];
        for (ax, &u) in axes.iter().zip(&local_center) {
            for (p, a) in center.iter_mut().zip(ax) {
                *p += u * a;
            }
        }
        let box_ = OrientedBox { center, axes, half_widths: half };
        Self { center_dir: c, scale: w, normal, flat_dir, footprint, radius: rho, box_ }
    }

    pub fn d(&self) -> usize {
        self.center_dir.len()
    }

    /// Whether the unit direction `u` lies in the spherical footprint.
    pub fn footprint_contains(&self, u: &[f64]) -> bool {
        match &self.footprint {
            Footprint::Ball { radius } => {
                dot(u, &self.center_dir).clamp(-1.0, 1.0).acos() <= *radius + 1e-12
            }
            Footprint::Angles { lo, hi } => {
                let a = sphere_angles(u);
                a.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= l - 1e-12 && *v <= h + 1e-12)
            }
        }
    }

    /// Surface measure of the footprint on `S^{d-1}`.
    pub fn area(&self) -> f64 {
        let d = self.d();
        match &self.footprint {
            Footprint::Angles { lo, hi } => {
                let mut a = hi[d - 2] - lo[d - 2];
                for k in 0..d - 2 {
                    a *= sin_power_integral(d - 2 - k, lo[k], hi[k]);
                }
                a
            }
            Footprint::Ball { radius } => {
                // |S^{d-2}| int_0^r sin^{d-2}.
                let sd2 = sphere_area(d - 1);
                sd2 * sin_power_integral(d - 2, 0.0, *radius)
            }
        }
    }

    /// Chord diameter of the footprint, from boundary sampling.
    pub fn diameter(&self) -> f64 {
        let pts = self.boundary_samples(9);
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let dd: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                best = best.max(dd);
            }
        }
        best.sqrt()
    }

    /// Points on (or spanning) the footprint, used for extents.
    pub fn boundary_samples(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.d();
        let per_axis = per_axis.max(2);
        match &self.footprint {
            Footprint::Angles { lo, hi } => {
                let k = d - 1;
                let total = per_axis.pow(k as u32);
                (0..total)
                    .map(|mut idx| {
                        let ang: Vec<f64> = (0..k)
                            .map(|j| {
                                let i = idx % per_axis;
                                idx /= per_axis;
                                lo[j] + (hi[j] - lo[j]) * i as f64 / (per_axis - 1) as f64
                            })
                            .collect();
                        sphere_point(&ang, d)
                    })
                    .collect()
            }
            Footprint::Ball { radius } => {
                let basis = complement_basis(&self.center_dir);
                let mut out = Vec::new();
                // Directions: +-basis vectors and their pairwise diagonals.
                let mut dirs: Vec<Vec<f64>> = Vec::new();
                for b in &basis {
                    dirs.push(b.clone());
                    dirs.push(b.iter().map(|v| -v).collect());
                }
                let ang_steps = 4 * per_axis;
                if basis.len() >= 2 {
                    for i in 0..basis.len() {
                        for j in i + 1..basis.len() {
                            for s in 0..ang_steps {
                                let t = 2.0 * PI * s as f64 / ang_steps as f64;
                                dirs.push(
                                    basis[i].iter().zip(&basis[j]).map(|(a, b)| a * t.cos() + b * t.sin()).collect(),
                                );
                            }
                        }
                    }
                }
                for v in dirs {
                    out.push(
                        self.center_dir
                            .iter()
                            .zip(&v)
                            .map(|(c, t)| c * radius.cos() + t * radius.sin())
                            .collect(),
                    );
                }
                out
            }
        }
    }
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * crate::numeric::unit_ball_volume(n)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta = {delta} must lie in (0, 1)"));
    }
    Ok(())
}

/// Quadrature nodes per angle when computing barycenters.
const BARY_NODES: usize = 8;

fn barycenter(lo: &[f64], hi: &[f64], d: usize) -> Vec<f64> {
    let k = d - 1;
    let total = BARY_NODES.pow(k as u32);
    let mut acc = vec![0.0; d];
    for mut idx in 0..total {
        let ang: Vec<f64> = (0..k)
            .map(|j| {
                let i = idx % BARY_NODES;
                idx /= BARY_NODES;
                lo[j] + (hi[j] - lo[j]) * (i as f64 + 0.5) / BARY_NODES as f64
            })
            .collect();
        let w = area_element(&ang, d);
        for (a, x) in acc.iter_mut().zip(sphere_point(&ang, d)) {
            *a += w * x;
        }
    }
    let r = norm(&acc);
    if r > 1e-9 {
        acc.iter().map(|v| v / r).collect()
    } else {
        // Degenerate (nearly antipodal-symmetric) footprint: use the angle midpoint.
        let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        sphere_point(&mid, d)
    }
}

/// Partition the sphere (or its `xi_d >= 0` half) into caps of diameter
/// about `delta^{1/2}`.
///
/// Latitude bands in `theta_1` are split recursively; each angle range is cut
/// into `ceil(len * s / w)` equal pieces where `s` is the product of the
/// largest sines of the enclosing bands. At `d = 2` this is a split of the
/// circle into equal arcs.
pub fn build_caps(cfg: &ConeConfig, delta: f64) -> Result<Vec<Cap>> {
    check_delta(delta)?;
    let d = cfg.d;
    if d < 2 {
        return domain("d must be >= 2");
    }
    let w = delta.sqrt();
    let mut boxes: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new())];
    let mut scales: Vec<f64> = vec![1.0];
    for level in 0..d - 1 {
        let last = level == d - 2;
        let (lo0, hi0) = if last {
            if d == 2 && cfg.half_cone {
                (0.0, PI)
            } else {
                (0.0, 2.0 * PI)
            }
        } else if level == 0 && cfg.half_cone {
            (0.0, PI / 2.0)
        } else {
            (0.0, PI)
        };
        let mut next_boxes = Vec::new();
        let mut next_scales = Vec::new();
        for ((lo, hi), s) in boxes.iter().zip(&scales) {
            let n = ((hi0 - lo0) * s / w).ceil().max(1.0) as usize;
            let step = (hi0 - lo0) / n as f64;
            for i in 0..n {
                let a = lo0 + step * i as f64;
                let b = if i + 1 == n { hi0 } else { a + step };
                let mut l = lo.clone();
                let mut h = hi.clone();
                l.push(a);
                h.push(b);
                next_boxes.push((l, h));
                let smax = if a <= PI / 2.0 && b >= PI / 2.0 { 1.0 } else { a.sin().max(b.sin()) };
                next_scales.push(s * smax);
            }
        }
        boxes = next_boxes;
        scales = next_scales;
    }
    Ok(boxes
        .into_iter()
        .map(|(lo, hi)| {
            let c = barycenter(&lo, &hi, d);
            let fp = Footprint::Angles { lo, hi };
            let mut cap = Cap::assemble(c.clone(), w, fp, 0.0);
            let rho = cap
                .boundary_samples(9)
                .iter()
                .map(|u| dot(u, &c).clamp(-1.0, 1.0).acos())
                .fold(0.0, f64::max);
            // Sampling can miss the exact extreme; pad slightly.
            cap = Cap::assemble(c, w, cap.footprint, rho * 1.01 + 1e-9);
            cap
        })
        .collect())
}

/// Orthogonal map sending the unit vector `c` to the last axis `e_{d-1}`
/// (a Householder reflection, or the identity).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    v: Option<Vec<f64>>,
}

impl Rotation {
    pub fn to_last_axis(c: &[f64]) -> Self {
        let d = c.len();
        let mut v = c.to_vec();
        v[d - 1] -= 1.0;
        let r = norm(&v);
        if r < 1e-14 {
            Self { v: None }
        } else {
            Self { v: Some(v.iter().map(|x| x / r).collect()) }
        }
    }

    /// Self-inverse.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.v {
            None => x.to_vec(),
            Some(v) => {
                let n = v.len();
                let p = 2.0 * dot(&x[..n], v);
                let mut y = x.to_vec();
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi -= p * vi;
                }
                y
            }
        }
    }
}
