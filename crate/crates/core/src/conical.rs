//! Conical averages `int |mu^(R xi)|^2 d sigma_Gamma(xi)` and their decay.

use serde::Serialize;

use crate::bounds::{beta_bounds, BetaBounds};
use crate::error::{domain, guard, Error, Result};
use crate::extension::alias_radius;
use crate::grid::{annulus_grid, GridFunction};
use crate::measures::AtomicMeasure;
use crate::numeric::{fit_line, jackknife_slope, par_chunked};

/// Tolerance for finite-R effects when comparing a fit to upper bounds.
pub const VIOLATION_TOL: f64 = 0.3;

/// `sum_nodes h^d |mu^(R (xi, |xi|))|^2` over the grid (values ignored).
pub fn conical_average(mu: &AtomicMeasure, r: f64, grid: &GridFunction) -> Result<f64> {
    if mu.dim != grid.d + 1 {
        return domain("measure must live in R^{d+1} for a grid on R^d");
    }
    if !(r > 0.0) {
        return domain("R must be positive");
    }
    let reach = r * mu.support_radius();
    if reach > alias_radius(grid.spacing) * (1.0 + 1e-12) {
        return guard(format!(
            "R * supp radius = {reach:.3} exceeds the alias limit {:.3} of spacing {}",
            alias_radius(grid.spacing),
            grid.spacing
        ));
    }
    let d = grid.d;
    let coords = grid.coords();
    let n = grid.len();
    let total = par_chunked(n, 256, |range| {
        let mut acc = 0.0;
        let mut xi = vec![0.0; d + 1];
        for k in range {
            let p = &coords[k * d..(k + 1) * d];
            let mut r2 = 0.0;
            for (x, v) in xi.iter_mut().zip(p) {
                *x = r * v;
                r2 += v * v;
            }
            xi[d] = r * r2.sqrt();
            acc += (mu.raw_ft(&xi) * mu.mollifier(&xi)).norm_sqr();
        }
        acc
    }) * grid.weight();
    let cap = mu.mass().powi(2) * grid.measure();
    if total > cap * (1.0 + 1e-9) {
        return Err(Error::Invariant(format!("conical average {total} exceeds |mu|^2 sigma(Gamma) = {cap}")));
    }
    Ok(total)
}

/// How the annulus grid is chosen per `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPolicy {
    pub d: usize,
    pub m_min: usize,
    pub half: bool,
    /// Raise `M` to the smallest multiple of 16 that resolves `R`.
    pub adaptive: bool,
}

impl GridPolicy {
    pub fn m_for(&self, mu: &AtomicMeasure, r: f64) -> usize {
        let mut m = self.m_min.max(16);
        if self.adaptive {
            let need = (4.0 * r * mu.support_radius() - 1e-9).ceil().max(0.0) as usize;
            m = m.max(need.div_ceil(16) * 16);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub r_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub grid_m: Vec<usize>,
    pub beta_hat: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Jackknife (mean, standard error) of `beta_hat`.
    pub jackknife: Option<(f64, f64)>,
    pub normalization: Option<f64>,
    pub half_cone: bool,
}

/// Least-squares fit of `log sigma = c - beta log R`.
pub fn fit_decay(r_grid: &[f64], values: &[f64]) -> Result<DecayFit> {
    if r_grid.len() < 4 || r_grid.len() != values.len() {
        return domain("decay fit needs at least 4 (R, sigma) pairs");
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("R grid must be strictly increasing");
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return domain(format!("nonpositive conical average {v}; cannot take logarithms"));
    }
    let x: Vec<f64> = r_grid.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&x, &y).ok_or_else(|| Error::Domain("degenerate R grid".into()))?;
    let jack = jackknife_slope(&x, &y).map(|(m, se)| (-m, se));
    Ok(DecayFit {
        r_grid: r_grid.to_vec(),
        values: values.to_vec(),
        grid_m: Vec::new(),
        beta_hat: -fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        jackknife: jack,
        normalization: None,
        half_cone: false,
    })
}

pub fn decay_scan(mu: &AtomicMeasure, r_list: &[f64], policy: &GridPolicy) -> Result<DecayFit> {
    if r_list.len() < 4 {
        return domain("decay scan needs at least 4 values of R");
    }
    let mut values = Vec::with_capacity(r_list.len());
    let mut ms = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let m = policy.m_for(mu, r);
        let grid = annulus_grid(policy.d, m, policy.half)?;
        values.push(conical_average(mu, r, &grid)?);
        ms.push(m);
    }
    let mut fit = fit_decay(r_list, &values)?;
    fit.grid_m = ms;
    fit.half_cone = policy.half;
    Ok(fit)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundComparison {
    pub beta_hat: f64,
    pub alpha: f64,
    pub d: usize,
    pub bounds: BetaBounds,
    pub violates_upper_cho: bool,
    pub violates_upper_new: bool,
    pub below_sjolin: bool,
}

pub fn compare_bounds(fit: &DecayFit, alpha: f64, d: usize) -> Result<BoundComparison> {
    let b = beta_bounds(alpha, d)?;
    Ok(BoundComparison {
        beta_hat: fit.beta_hat,
        alpha,
        d,
        bounds: b,
        violates_upper_cho: fit.beta_hat > b.upper_cho + VIOLATION_TOL,
        violates_upper_new: b.upper_new.is_some_and(|u| fit.beta_hat > u + VIOLATION_TOL),
        below_sjolin: fit.beta_hat < alpha - 1.0 - VIOLATION_TOL,
    })
}
