//! Sampled functions on the frequency annulus, weighted `L^q` norms and the
//! `R^{1/2} A^* Z^{d+1}` cube cover of `B(0,R)`.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::cone::apply_a;
use crate::error::{domain, guard, Result};
use crate::numeric::{pairwise_sum, C64};

/// Which nodes of the lattice belong to the domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Mask {
    /// `1 <= |xi| <= 2`, optionally with `xi_d >= 0`.
    Annulus { half: bool },
    /// Axis-parallel box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Mask {
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Mask::Annulus { half } => {
                let r2: f64 = p.iter().map(|v| v * v).sum();
                (1.0..=4.0).contains(&r2) && (!half || p[p.len() - 1] >= 0.0)
            }
            Mask::Box { lo, hi } => p.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= *l && *v <= *h),
        }
    }
}

/// Largest number of nodes a single grid may hold.
pub const MAX_NODES: usize = 1 << 25;

/// Sparse samples on the cell-centered lattice `origin + (i + 1/2) h`.
///
/// Only nodes inside the mask are stored; absent nodes are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub d: usize,
    pub spacing: f64,
    pub origin: f64,
    pub mask: Mask,
    storage: Storage,
    values: Vec<C64>,
}

/// Node bookkeeping.
#[derive(Clone, Debug, PartialEq)]
enum Storage {
    /// Flattened integer node indices, `d` per node.
    Sparse(Vec<i32>),
    /// Every node of the index box `lo + [0, shape)`, first axis fastest.
    Dense { lo: Vec<i32>, shape: Vec<usize> },
}

impl GridFunction {
    /// Grid with the given nodes. Nodes outside the mask are dropped.
    pub fn from_nodes(
        d: usize,
        spacing: f64,
        origin: f64,
        mask: Mask,
        nodes: impl IntoIterator<Item = (Vec<i32>, C64)>,
    ) -> Result<Self> {
        if d < 1 || !(spacing > 0.0) {
            return domain("grid needs d >= 1 and positive spacing");
        }
        let mut idx: Vec<i32> = Vec::new();
        let mut g = Self { d, spacing, origin, mask, storage: Storage::Sparse(Vec::new()), values: Vec::new() };
        let mut p = vec![0.0; d];
        for (i, v) in nodes {
            if i.len() != d {
                return domain("node index has the wrong dimension");
            }
            for (pk, &ik) in p.iter_mut().zip(&i) {
                *pk = origin + (ik as f64 + 0.5) * spacing;
            }
            if g.mask.contains(&p) {
                idx.extend_from_slice(&i);
                g.values.push(v);
            }
            if g.values.len() > MAX_NODES {
                return guard(format!("grid exceeds {MAX_NODES} nodes"));
            }
        }
        g.storage = Storage::Sparse(idx);
        Ok(g)
    }

    /// Dense grid on the index box `lo + [0, shape)`, values in first-axis-
    /// fastest order.
    pub fn dense(d: usize, spacing: f64, origin: f64, lo: Vec<i32>, shape: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        if lo.len() != d || shape.len() != d || !(spacing > 0.0) {
            return domain("dense grid dimensions disagree");
        }
        if shape.iter().product::<usize>() != values.len() {
            return domain("dense grid value count does not match its shape");
        }
        if values.len() > MAX_NODES {
            return guard(format!("grid exceeds {MAX_NODES} nodes"));
        }
        let lo_c: Vec<f64> = lo.iter().map(|&i| origin + (i as f64 + 0.5) * spacing).collect();
        let hi_c: Vec<f64> =
            lo.iter().zip(&shape).map(|(&i, &n)| origin + (i as f64 + n as f64 - 0.5) * spacing).collect();
        Ok(Self {
            d,
            spacing,
            origin,
            mask: Mask::Box { lo: lo_c, hi: hi_c },
            storage: Storage::Dense { lo, shape },
            values,
        })
    }

    /// Index box of a dense grid.
    pub fn dense_shape(&self) -> Option<(&[i32], &[usize])> {
        match &self.storage {
            Storage::Dense { lo, shape } => Some((lo, shape)),
            Storage::Sparse(_) => None,
        }
    }

    /// Sample `f` on every mask node inside the box `[lo, hi]`.
    pub fn sample_box<F>(
        d: usize,
        spacing: f64,
        origin: f64,
        mask: Mask,
        lo: &[f64],
        hi: &[f64],
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> C64,
    {
        let ranges: Vec<(i32, i32)> = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| {
                (
                    ((l - origin) / spacing - 0.5).floor() as i32,
                    ((h - origin) / spacing - 0.5).ceil() as i32,
                )
            })
            .collect();
        let total: f64 = ranges.iter().map(|(a, b)| (b - a + 1) as f64).product();
        if total > 8.0 * MAX_NODES as f64 {
            return guard(format!("sampling box has {total:.3e} candidate nodes"));
        }
        let mut idx: Vec<i32> = Vec::new();
        let mut g = Self { d, spacing, origin, mask, storage: Storage::Sparse(Vec::new()), values: Vec::new() };
        let mut cur: Vec<i32> = ranges.iter().map(|r| r.0).collect();
        let mut p = vec![0.0; d];
        'outer: loop {
            for (pk, &ik) in p.iter_mut().zip(&cur) {
                *pk = origin + (ik as f64 + 0.5) * spacing;
            }
            if g.mask.contains(&p) && p.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v >= l && v <= h) {
                idx.extend_from_slice(&cur);
                g.values.push(f(&p));
                if g.values.len() > MAX_NODES {
                    return guard(format!("grid exceeds {MAX_NODES} nodes"));
                }
            }
            for k in 0..d {
                cur[k] += 1;
                if cur[k] <= ranges[k].1 {
                    continue 'outer;
                }
                cur[k] = ranges[k].0;
            }
            break;
        }
        g.storage = Storage::Sparse(idx);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.spacing.powi(self.d as i32)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn index(&self, k: usize) -> Vec<i32> {
        match &self.storage {
            Storage::Sparse(idx) => idx[k * self.d..(k + 1) * self.d].to_vec(),
            Storage::Dense { lo, shape } => {
                let mut rem = k;
                lo.iter()
                    .zip(shape)
                    .map(|(&l, &n)| {
                        let i = (rem % n) as i32;
                        rem /= n;
                        l + i
                    })
                    .collect()
            }
        }
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        self.index(k).iter().map(|&i| self.origin + (i as f64 + 0.5) * self.spacing).collect()
    }

    /// Flattened node coordinates, `d` per node.
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.d);
        for k in 0..self.len() {
            out.extend(self.node(k));
        }
        out
    }

    /// Same nodes with values replaced by `f(node, old)`.
    pub fn map<F: Fn(&[f64], C64) -> C64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for k in 0..self.len() {
            let p = self.node(k);
            out.values[k] = f(&p, self.values[k]);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|_, v| v * s)
    }

    /// Pointwise sum over a common node set.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.storage != other.storage || self.spacing != other.spacing || self.origin != other.origin {
            return domain("grids do not share a node set");
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(out)
    }

    /// `sum h^d` over stored nodes: the quadrature of the constant 1.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.weight()
    }

    /// `L^q` norm with quadrature weights `h^d`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        lq_norm_uniform(&self.values, self.weight(), q)
    }

    pub fn l2_norm(&self) -> f64 {
        lq_norm_uniform(&self.values, self.weight(), 2.0).expect("q = 2 is valid")
    }

    /// Map from node index to position, for lookups.
    pub fn lookup(&self) -> HashMap<Vec<i32>, usize> {
        (0..self.len()).map(|k| (self.index(k), k)).collect()
    }
}

/// Zero-valued grid on every node of the (half) annulus with spacing `1/M`.
pub fn annulus_grid(d: usize, m: usize, half: bool) -> Result<GridFunction> {
    if m < 16 {
        return domain(format!("annulus grid needs M >= 16, got {m}"));
    }
    if d < 2 {
        return domain("annulus grid needs d >= 2");
    }
    let mut lo = vec![-2.0; d];
    if half {
        lo[d - 1] = 0.0;
    }
    GridFunction::sample_box(d, 1.0 / m as f64, -2.0, Mask::Annulus { half }, &lo, &vec![2.0; d], |_| {
        C64::new(0.0, 0.0)
    })
}

/// Annulus grid sampled from `f`, restricted to nodes inside `[lo, hi]`.
pub fn annulus_sample<F: Fn(&[f64]) -> C64>(
    d: usize,
    m: usize,
    half: bool,
    lo: &[f64],
    hi: &[f64],
    f: F,
) -> Result<GridFunction> {
    if m < 16 {
        return domain(format!("annulus grid needs M >= 16, got {m}"));
    }
    GridFunction::sample_box(d, 1.0 / m as f64, -2.0, Mask::Annulus { half }, lo, hi, f)
}

/// `(sum w |v|^q)^{1/q}`, or `max |v|` for `q = inf`. Empty input gives 0.
pub fn lq_norm(values: &[C64], weights: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return domain(format!("L^q norm needs q >= 1, got {q}"));
    }
    if values.len() != weights.len() {
        return domain("values and weights differ in length");
    }
    if q.is_infinite() {
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let terms: Vec<f64> = values.iter().zip(weights).map(|(v, w)| w * v.norm().powf(q)).collect();
    Ok(pairwise_sum(&terms).powf(1.0 / q))
}

pub fn lq_norm_uniform(values: &[C64], weight: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return domain(format!("L^q norm needs q >= 1, got {q}"));
    }
    if q.is_infinite() {
        return Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let terms: Vec<f64> = if q == 2.0 {
        values.iter().map(|v| v.norm_sqr()).collect()
    } else {
        values.iter().map(|v| v.norm().powf(q)).collect()
    };
    Ok((weight * pairwise_sum(&terms)).powf(1.0 / q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cube {
    pub index: Vec<i64>,
    pub center: Vec<f64>,
    /// Per-cube `L^q` value; `None` until assigned.
    pub value: Option<f64>,
    pub dyadic_class: Option<i32>,
    pub slab_index: i64,
}

/// Cubes of side `R^{1/2}` centered on `R^{1/2} A^* Z^{d+1}` whose closed body
/// meets `B(0,R)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeCover {
    pub r: f64,
    pub d: usize,
    pub side: f64,
    pub cubes: Vec<Cube>,
}

impl CubeCover {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Lattice index of the cube containing `p` (ties round up).
    pub fn locate(&self, p: &[f64]) -> Vec<i64> {
        apply_a(p, false).iter().map(|y| (y / self.side + 0.5).floor() as i64).collect()
    }

    /// Distance from the origin to the closed body of the cube `k`.
    pub fn body_distance(side: f64, k: &[i64]) -> f64 {
        k.iter()
            .map(|&ki| {
                let g = ((ki as f64).abs() - 0.5).max(0.0) * side;
                g * g
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.cubes.len() {
            return domain("one value per cube is required");
        }
        for (c, &v) in self.cubes.iter_mut().zip(values) {
            c.value = Some(v);
        }
        Ok(())
    }

    /// Cube counts per slab index.
    pub fn slab_counts(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for c in &self.cubes {
            *m.entry(c.slab_index).or_insert(0) += 1;
        }
        m
    }

    /// Sub-cover with the listed cubes.
    pub fn subset(&self, ids: &[usize]) -> Self {
        Self { r: self.r, d: self.d, side: self.side, cubes: ids.iter().map(|&i| self.cubes[i].clone()).collect() }
    }

    /// The cover translated by `side * A^* dk`.
    pub fn shifted(&self, dk: &[i64]) -> Self {
        let n = self.d + 1;
        let cubes = self
            .cubes
            .iter()
            .map(|c| {
                let index: Vec<i64> = c.index.iter().zip(dk).map(|(a, b)| a + b).collect();
                let y: Vec<f64> = index.iter().map(|&v| v as f64 * self.side).collect();
                Cube { center: apply_a(&y, true), value: None, dyadic_class: None, slab_index: index[n - 1], index }
            })
            .collect();
        Self { r: self.r, d: self.d, side: self.side, cubes }
    }

    /// Tensor sub-grid of `p^{d+1}` points inside cube `i`, as (origin,
    /// step vectors, count per axis, cell volume). Points are
    /// `origin + sum_j m_j step_j` for `0 <= m_j < p`.
    pub fn cube_lattice(&self, i: usize, p: usize) -> TensorLattice {
        tensor_lattice(&self.cubes[i].index, self.side, p)
    }
}

/// Regular point lattice `origin + sum_j m_j steps[j]`, `0 <= m_j < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorLattice {
    pub origin: Vec<f64>,
    pub steps: Vec<Vec<f64>>,
    pub n: usize,
    pub cell_volume: f64,
}

impl TensorLattice {
    pub fn num_points(&self) -> usize {
        self.n.pow(self.steps.len() as u32)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let dim = self.steps.len();
        (0..self.num_points())
            .map(|mut flat| {
                let mut p = self.origin.clone();
                for s in &self.steps {
                    let m = (flat % self.n) as f64;
                    flat /= self.n;
                    for (pk, sk) in p.iter_mut().zip(s) {
                        *pk += m * sk;
                    }
                }
                debug_assert_eq!(p.len(), dim);
                p
            })
            .collect()
    }
}

/// Midpoint sub-grid of `p` points per axis in the cube of side `side`
/// centered at `side * A^* k`.
pub fn tensor_lattice(k: &[i64], side: f64, p: usize) -> TensorLattice {
    let n = k.len();
    let h = side / p as f64;
    let first: Vec<f64> = k.iter().map(|&ki| side * ki as f64 - side / 2.0 + h / 2.0).collect();
    let origin = apply_a(&first, true);
    let steps = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = h;
            apply_a(&e, true)
        })
        .collect();
    TensorLattice { origin, steps, n: p, cell_volume: h.powi(n as i32) }
}

pub fn build_cube_cover(r: f64, d: usize) -> Result<CubeCover> {
    if !(r >= 16.0) || !r.is_finite() {
        return domain(format!("cube cover needs R >= 16, got {r}"));
    }
    if d < 1 {
        return domain("cube cover needs d >= 1");
    }
    let n = d + 1;
    let side = r.sqrt();
    let kmax = (r / side + 1.0).ceil() as i64;
    let span = (2 * kmax + 1) as f64;
    if span.powi(n as i32) > 1e9 {
        return guard("cube cover enumeration too large");
    }
    let mut cubes = Vec::new();
    let mut k = vec![-kmax; n];
    'outer: loop {
        if CubeCover::body_distance(side, &k) <= r {
            let y: Vec<f64> = k.iter().map(|&v| v as f64 * side).collect();
            cubes.push(Cube {
                index: k.clone(),
                center: apply_a(&y, true),
                value: None,
                dyadic_class: None,
                slab_index: k[n - 1],
            });
        }
        for j in (0..n).rev() {
            k[j] += 1;
            if k[j] <= kmax {
                continue 'outer;
            }
            k[j] = -kmax;
        }
        break;
    }
    Ok(CubeCover { r, d, side, cubes })
}

/// Steiner-formula estimate of the cube count: the volume of the set of
/// centers within distance `R` of some body point, divided by `side^{d+1}`.
/// Exact for `d + 1 = 3`.
pub fn steiner_cube_estimate(r: f64, d: usize) -> Option<f64> {
    if d != 2 {
        return None;
    }
    let x = r / r.sqrt();
    let pi = std::f64::consts::PI;
    Some(1.0 + 6.0 * x + 3.0 * pi * x * x + 4.0 / 3.0 * pi * x * x * x)
}

/// One dyadic class: cube positions in the input cover and slab counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicClass {
    pub class: i32,
    pub cubes: Vec<usize>,
    pub slab_sigma: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicSort {
    pub classes: BTreeMap<i32, DyadicClass>,
    /// Cubes below `max * R^{-10}`, including zeros.
    pub negligible: Vec<usize>,
}

/// Group cubes by `floor(log2 value)`.
pub fn dyadic_sort(cover: &mut CubeCover) -> Result<DyadicSort> {
    let mut max: f64 = 0.0;
    for c in &cover.cubes {
        match c.value {
            Some(v) if v.is_finite() && v >= 0.0 => max = max.max(v),
            _ => return domain("dyadic_sort needs finite nonnegative values on every cube"),
        }
    }
    let cutoff = max * cover.r.powi(-10);
    let mut classes: BTreeMap<i32, DyadicClass> = BTreeMap::new();
    let mut negligible = Vec::new();
    for (i, c) in cover.cubes.iter_mut().enumerate() {
        let v = c.value.expect("checked above");
        if v <= 0.0 || v < cutoff {
            c.dyadic_class = None;
            negligible.push(i);
            continue;
        }
        let k = v.log2().floor() as i32;
        c.dyadic_class = Some(k);
        let e = classes.entry(k).or_insert_with(|| DyadicClass {
            class: k,
            cubes: Vec::new(),
            slab_sigma: BTreeMap::new(),
        });
        e.cubes.push(i);
        *e.slab_sigma.entry(c.slab_index).or_insert(0) += 1;
    }
    Ok(DyadicSort { classes, negligible })
}
