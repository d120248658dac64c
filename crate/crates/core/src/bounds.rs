//! Closed-form exponents for conical-average decay and fractal Strichartz
//! estimates.
//!
//! Branches use left-open, right-closed intervals. At a breakpoint both
//! neighbouring branches are evaluated and checked against each other.

use serde::Serialize;

use crate::error::{domain, Result};

const TIE_TOL: f64 = 1e-12;

/// All exponent bounds at one `(alpha, q, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub q: f64,
    pub d: usize,
    pub beta_lower_cho: Option<f64>,
    pub beta_lower_new: Option<f64>,
    pub beta_upper_cho: Option<f64>,
    pub beta_upper_new: Option<f64>,
    pub s_lower: f64,
    pub s_upper: f64,
    /// True when the s bounds coincide.
    pub exact: bool,
    /// The d=2 upper table is not printed separately; it is taken equal to
    /// the lower one.
    pub s_upper_inferred: bool,
    pub q_infinite: bool,
}

/// The four decay-exponent bounds for `beta(alpha, cone in R^{d+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaBounds {
    pub lower_cho: f64,
    pub lower_new: f64,
    pub upper_cho: f64,
    /// Only defined for `d >= 5`.
    pub upper_new: Option<f64>,
}

fn check_alpha(alpha: f64, d: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha <= (d + 1) as f64) || !alpha.is_finite() {
        return domain(format!("alpha = {alpha} outside (0, {}]", d + 1));
    }
    Ok(())
}

/// Evaluate a piecewise function given as consecutive right-closed pieces.
/// Exactly at a breakpoint the next piece is evaluated as well and the two
/// values must agree.
fn piecewise(x: f64, breaks: &[f64], pieces: &[&dyn Fn(f64) -> f64]) -> f64 {
    debug_assert_eq!(breaks.len() + 1, pieces.len());
    let k = breaks.iter().position(|&b| x <= b).unwrap_or(breaks.len());
    let v = pieces[k](x);
    if k < breaks.len() && x == breaks[k] {
        let w = pieces[k + 1](x);
        assert!((v - w).abs() <= TIE_TOL, "discontinuous piecewise bound at {x}: {v} vs {w}");
    }
    v
}

/// Lower bound on beta from the Mattila/Rogers, Cho-Ham-Lee and Sjolin
/// table (`d >= 3`).
pub fn beta_lower_cho(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    piecewise(
        alpha,
        &[(df - 1.0) / 2.0, (df + 3.0) / 2.0],
        &[&|a| a, &|a| df / 4.0 + a / 2.0 - 0.25, &|a| a - 1.0],
    )
}

/// Upper bound on beta from the Cho-Ham-Lee table (`d >= 3`).
pub fn beta_upper_cho(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    piecewise(
        alpha,
        &[df - 2.0, df],
        &[&|a| a, &|a| df / 2.0 + a / 2.0 - 1.0, &|a| a - 1.0],
    )
}

/// The refined-Strichartz lower bound `alpha - 1 + (d - alpha)/(d + 1)`.
pub fn beta_lower_new(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    alpha - 1.0 + (df - alpha) / (df + 1.0)
}

/// The lattice-counterexample upper bound, valid for `d >= 5`.
pub fn beta_upper_new(alpha: f64, d: usize) -> Option<f64> {
    let df = d as f64;
    (d >= 5).then(|| alpha - 1.0 + 2.0 * (df + 1.0 - alpha) / (df + 1.0))
}

pub fn beta_bounds(alpha: f64, d: usize) -> Result<BetaBounds> {
    if d < 3 {
        return domain(format!("beta bound tables need d >= 3, got {d}"));
    }
    check_alpha(alpha, d)?;
    Ok(BetaBounds {
        lower_cho: beta_lower_cho(alpha, d),
        lower_new: beta_lower_new(alpha, d),
        upper_cho: beta_upper_cho(alpha, d),
        upper_new: beta_upper_new(alpha, d),
    })
}

/// `s(alpha, q, d)`, the lower bound for the optimal Sobolev index.
/// `inv_q` is `1/q`, so `q = infinity` is `inv_q = 0`.
pub fn s_lower_table(alpha: f64, inv_q: f64, d: usize) -> f64 {
    let df = d as f64;
    let first = |a: f64| df / 2.0 - a * inv_q;
    piecewise(
        alpha,
        &[1.0, df],
        &[
            &|a| first(a).max((df + 1.0) / 4.0),
            &|a| {
                first(a)
                    .max((df + 1.0) / 4.0 + (1.0 - a) * inv_q / 2.0)
                    .max((df + 2.0 - a) / 4.0)
            },
            &|a| {
                first(a)
                    .max((df + 1.0) / 4.0 + (df + 1.0 - 2.0 * a) * inv_q / 2.0)
                    .max((df + 1.0 - a) / 2.0)
            },
        ],
    )
}

/// The dedicated `q = 2` upper table `s~(alpha, 2, d)` (`d >= 3`).
pub fn s_upper_table_q2(alpha: f64, d: usize) -> f64 {
    let df = d as f64;
    piecewise(
        alpha,
        &[(df - 1.0) / 2.0, (df + 3.0) / 2.0],
        &[
            &|a| (df - a) / 2.0,
            &|a| (3.0 * df + 1.0) / 8.0 - a / 4.0,
            &|a| (df + 1.0 - a) / 2.0,
        ],
    )
}

/// `s~(alpha, q, d)` for `q > 2` (`d >= 3`).
pub fn s_upper_table(alpha: f64, inv_q: f64, d: usize) -> f64 {
    let df = d as f64;
    let first = |a: f64| df / 2.0 - a * inv_q;
    let third = |a: f64| (3.0 * df + 1.0) / 8.0 - a / 4.0;
    piecewise(
        alpha,
        &[1.0, df],
        &[
            &|a| first(a).max((df + 1.0) / 4.0).max(third(a)),
            &|a| first(a).max((df + 1.0) / 4.0 + (1.0 - a) * inv_q / 2.0).max(third(a)),
            &|a| {
                first(a)
                    .max((df + 1.0) / 4.0 + (df + 1.0 - 2.0 * a) * inv_q / 2.0)
                    .max((df + 1.0 - a) / 2.0)
            },
        ],
    )
}

/// Lower and upper bounds for the optimal `s_d(alpha, q)`.
///
/// For `q` in `[1, 2]` both bounds are the `q = 2` tables. In `d = 2` the
/// upper bound equals the lower one (the second element of the returned
/// flag pair records that this was inferred rather than tabulated).
pub fn s_formulas(alpha: f64, q: f64, d: usize) -> Result<(f64, f64)> {
    if d < 2 {
        return domain(format!("s bounds need d >= 2, got {d}"));
    }
    check_alpha(alpha, d)?;
    if q.is_nan() || q < 1.0 {
        return domain(format!("q = {q} must be >= 1"));
    }
    let inv_q = if q <= 2.0 { 0.5 } else { 1.0 / q };
    let lower = s_lower_table(alpha, inv_q, d);
    let upper = if d == 2 {
        lower
    } else if q <= 2.0 {
        s_upper_table_q2(alpha, d)
    } else {
        s_upper_table(alpha, inv_q, d)
    };
    Ok((lower, upper))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    BetaToS,
    SToBeta,
}

/// `beta = d - 2 s`, in either direction.
pub fn beta_s_relation(value: f64, direction: Direction, d: usize) -> f64 {
    let df = d as f64;
    match direction {
        Direction::BetaToS => (df - value) / 2.0,
        Direction::SToBeta => df - 2.0 * value,
    }
}

/// Scaling constant `C(mu)` of the fractal Strichartz inequality.
pub fn c_mu_scaling(q: f64, mass: f64, c_alpha: f64) -> Result<f64> {
    if !(mass > 0.0 && c_alpha > 0.0) || q.is_nan() || q < 1.0 {
        return domain("c_mu_scaling needs mass > 0, c_alpha > 0, q >= 1");
    }
    Ok(if q <= 2.0 {
        mass.powf(1.0 / q - 0.5) * c_alpha.sqrt()
    } else {
        c_alpha.powf(1.0 / q)
    })
}

pub fn bound_report(alpha: f64, q: f64, d: usize) -> Result<BoundReport> {
    let (s_lower, s_upper) = s_formulas(alpha, q, d)?;
    let beta = if d >= 3 { Some(beta_bounds(alpha, d)?) } else { None };
    Ok(BoundReport {
        alpha,
        q,
        d,
        beta_lower_cho: beta.map(|b| b.lower_cho),
        beta_lower_new: beta.map(|b| b.lower_new),
        beta_upper_cho: beta.map(|b| b.upper_cho),
        beta_upper_new: beta.and_then(|b| b.upper_new),
        s_lower,
        s_upper,
        exact: (s_upper - s_lower).abs() <= TIE_TOL,
        s_upper_inferred: d == 2,
        q_infinite: q.is_infinite(),
    })
}

/// True when the new lower bound strictly beats the tabulated one.
pub fn lower_improves(alpha: f64, d: usize) -> bool {
    beta_lower_new(alpha, d) > beta_lower_cho(alpha, d) + TIE_TOL
}

/// True when the new upper bound strictly beats the tabulated one.
pub fn upper_improves(alpha: f64, d: usize) -> bool {
    beta_upper_new(alpha, d).is_some_and(|u| u < beta_upper_cho(alpha, d) - TIE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn d3_alpha2_is_exact() {
        let b = beta_bounds(2.0, 3).unwrap();
        assert!(close(b.lower_cho, 1.5) && close(b.upper_cho, 1.5));
        let (s, _) = s_formulas(2.0, 2.0, 3).unwrap();
        assert!(close(s, 0.75));
        assert!(close(beta_s_relation(s, Direction::SToBeta, 3), 1.5));
    }

    #[test]
    fn d4_new_lower_beats_old() {
        let b = beta_bounds(3.5, 4).unwrap();
        assert!(close(b.lower_new, 2.6) && close(b.lower_cho, 2.5));
    }

    #[test]
    fn d5_new_upper() {
        let b = beta_bounds(4.0, 5).unwrap();
        assert!(close(b.upper_new.unwrap(), 11.0 / 3.0));
        assert!(beta_bounds(4.0, 4).unwrap().upper_new.is_none());
    }

    #[test]
    fn breakpoint_branch_is_sjolin_above() {
        assert!(close(beta_lower_cho(3.0 + 1e-9, 3), 2.0 + 1e-9));
    }

    #[test]
    fn s_tilde_continuous_at_first_break() {
        assert!(close(s_upper_table_q2(1.0, 3), 1.0));
    }

    #[test]
    fn q_large_is_optimal_in_d3() {
        for q in [4.0, 6.0, 10.0, f64::INFINITY] {
            for k in 1..=40 {
                let a = k as f64 * 0.1;
                let (lo, hi) = s_formulas(a, q, 3).unwrap();
                assert!(close(lo, hi), "q={q} alpha={a}");
            }
        }
    }

    #[test]
    fn c_mu_examples() {
        assert!(close(c_mu_scaling(2.0, 5.0, 9.0).unwrap(), 3.0));
        assert!(close(c_mu_scaling(1.0, 4.0, 9.0).unwrap(), 6.0));
        assert!(close(c_mu_scaling(f64::INFINITY, 4.0, 9.0).unwrap(), 1.0));
    }

    #[test]
    fn relation_is_involutive() {
        for v in [0.0, 0.3, 1.7, 2.5] {
            let s = beta_s_relation(v, Direction::BetaToS, 4);
            assert!((beta_s_relation(s, Direction::SToBeta, 4) - v).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(beta_bounds(0.0, 3).is_err());
        assert!(beta_bounds(4.5, 3).is_err());
        assert!(s_formulas(1.0, 0.5, 3).is_err());
    }
}
