//! Subcommand bodies. Each returns a table and a JSON summary; writing and
//! hashing happen in `main`.

use conewave::bounds::bound_report;
use conewave::cone::Cap;
use conewave::conical::{compare_bounds, decay_scan, GridPolicy};
use conewave::constructions::{build_counterexample, build_sharpness_example, pairing_report, phase_defects};
use conewave::error::{Error, Result};
use conewave::harness::{
    bush_families, decoupling_ratio, growth_fit, kakeya_ratio, sharpness_ratio, strichartz_q, strichartz_ratio,
    synth_cap_pieces, SamplingBox, TransverseTubes,
};
use conewave::io::{fmt_f64, Table};
use conewave::measures::{cantor_measure, lebesgue_ball, point_mass, product_measure, tensor_power, AtomicMeasure};
use conewave::packets::{leakage_mass_seeded, random_cap_input, visit_packets, PacketInput};
use serde_json::{json, Value};

use crate::config::{parse_dyadic, parse_list, parse_range, Resolved};
use crate::{BoundsArgs, CounterexampleArgs, DecayArgs, DecouplingArgs, KakeyaArgs, SharpnessArgs, StrichartzArgs, WavepacketArgs};

pub struct Output {
    pub table: Table,
    pub summary: Value,
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub fn bounds(a: &BoundsArgs, c: &mut Resolved) -> Result<Output> {
    let d = c.get("d", a.d, 3usize)?;
    let grid = c.get("alpha-grid", a.alpha_grid.clone(), "0.1:3.9:0.1".to_string())?;
    let q = c.get("q", a.q, 2.0f64)?;
    if d < 2 {
        return cfg_err("d must be at least 2");
    }
    let mut t = Table::new([
        "alpha", "q", "d", "beta_lower_cho", "beta_lower_new", "beta_upper_cho", "beta_upper_new", "s_lower", "s_upper",
        "exact",
    ]);
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut exact = 0;
    let alphas = parse_range(&grid)?;
    for &alpha in &alphas {
        let r = bound_report(alpha, q, d)?;
        exact += r.exact as usize;
        t.push(vec![
            fmt_f64(alpha),
            fmt_f64(q),
            d.to_string(),
            opt(r.beta_lower_cho),
            opt(r.beta_lower_new),
            opt(r.beta_upper_cho),
            opt(r.beta_upper_new),
            fmt_f64(r.s_lower),
            fmt_f64(r.s_upper),
            r.exact.to_string(),
        ]);
    }
    Ok(Output { table: t, summary: json!({ "points": alphas.len(), "exact_points": exact }) })
}

fn measure_for(kind: &str, d: usize, alpha: f64, spacing: f64, r_max: f64, eps: f64) -> Result<AtomicMeasure> {
    let n = d + 1;
    match kind {
        "point" => point_mass(n, &vec![0.0; n], 1.0),
        "lebesgue" => lebesgue_ball(n, spacing),
        "product" => product_measure(&lebesgue_ball(d, spacing)?, (1.0 / spacing).round() as usize),
        "cantor" => {
            let level = ((1.0 / spacing).log2().ceil() as u32).clamp(1, 20);
            tensor_power(&cantor_measure((alpha / n as f64).min(1.0), level)?, n)
        }
        "lattice" => conewave::measures::lattice_measure(r_max, alpha, eps, n),
        other => cfg_err(format!("unknown measure {other:?}; use point|lebesgue|product|cantor|lattice")),
    }
}

pub fn decay_scan_cmd(a: &DecayArgs, c: &mut Resolved) -> Result<Output> {
    let kind = c.get("measure", a.measure.clone(), "point".to_string())?;
    let d = c.get("d", a.d, 2usize)?;
    let rs = parse_dyadic(&c.get("R", a.r.clone(), "4:64".to_string())?)?;
    let alpha = c.get("alpha", a.alpha, 2.0f64)?;
    let spacing = c.get("spacing", a.spacing, 1.0 / 64.0)?;
    let m_min = c.get("M", a.m, 32usize)?;
    let eps = c.get("eps", a.eps, 0.05f64)?;
    let half = c.get("half", a.half, false)?;
    if d < 2 || rs.len() < 4 {
        return cfg_err("decay-scan needs d >= 2 and at least 4 values of R");
    }
    let mu = measure_for(&kind, d, alpha, spacing, *rs.last().expect("nonempty"), eps)?;
    let fit = decay_scan(&mu, &rs, &GridPolicy { d, m_min, half, adaptive: true })?;
    let mut t = Table::new(["R", "sigma", "M"]);
    for ((r, v), m) in fit.r_grid.iter().zip(&fit.values).zip(&fit.grid_m) {
        t.push(vec![fmt_f64(*r), fmt_f64(*v), m.to_string()]);
    }
    let cmp = if d >= 3 { serde_json::to_value(compare_bounds(&fit, alpha, d)?).ok() } else { None };
    Ok(Output {
        table: t,
        summary: json!({
            "measure": kind, "atoms": mu.len(), "beta_hat": fit.beta_hat, "residual": fit.residual,
            "jackknife": fit.jackknife, "comparison": cmp,
        }),
    })
}

pub fn wavepacket(a: &WavepacketArgs, c: &mut Resolved) -> Result<Output> {
    let r = c.get("R", a.r, 64.0f64)?;
    let delta = c.get("delta-slack", a.delta_slack, 0.1f64)?;
    let probes = c.get("probes", a.probes, 200usize)?;
    let seed = c.seed(a.seed)?;
    let mut dir = vec![0.0; 2];
    dir[1] = 1.0;
    let cap = Cap::centered(&dir, r.powf(-0.5))?;
    let input = random_cap_input(&cap, r, seed);
    let mut t = Table::new(["key", "l2", "leakage"]);
    let mut worst: f64 = 0.0;
    let dec = visit_packets(PacketInput::Closure(&input), &cap, r, delta, |p| {
        let leak = leakage_mass_seeded(&p, r, probes, seed)?;
        worst = worst.max(leak);
        let key = p.key.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![key, fmt_f64(p.l2), fmt_f64(leak)]);
        Ok(())
    })?;
    Ok(Output {
        table: t,
        summary: json!({
            "R": r, "packets": dec.stats.pieces_kept, "c_orth": dec.c_orth, "input_norm": dec.input_norm,
            "max_leakage": worst,
        }),
    })
}

pub fn strichartz(a: &StrichartzArgs, c: &mut Resolved) -> Result<Output> {
    let rs = parse_dyadic(&c.get("R", a.r.clone(), "64".to_string())?)?;
    let sigma = c.get("sigma", a.sigma, 4usize)?;
    let d = c.get("d", a.d, 2usize)?;
    let delta = c.get("delta-slack", a.delta_slack, 0.05f64)?;
    let mut t = Table::new(["R", "sigma_input", "class", "cubes", "sigma", "lhs", "rhs", "ratio"]);
    let mut ratios = Vec::new();
    for &r in &rs {
        let ex = build_sharpness_example(r, sigma, d, delta)?;
        let run = strichartz_ratio(&ex.f, r, d)?;
        ratios.push(run.ratio);
        t.push(vec![
            fmt_f64(r),
            sigma.to_string(),
            run.class.to_string(),
            run.cubes.to_string(),
            run.sigma.to_string(),
            fmt_f64(run.lhs),
            fmt_f64(run.rhs),
            fmt_f64(run.ratio),
        ]);
    }
    let fit = growth_fit(&rs, &ratios);
    Ok(Output { table: t, summary: json!({ "growth_slope": fit.slope, "selection": "dominant dyadic class" }) })
}

pub fn decoupling(a: &DecouplingArgs, c: &mut Resolved) -> Result<Output> {
    let delta = c.get("delta", a.delta, 1.0 / 64.0)?;
    let caps = c.get("caps", a.caps, 16usize)?;
    let trials = c.get("trials", a.trials, 20usize)?;
    let points = c.get("points", a.points, 20_000usize)?;
    let seed = c.seed(a.seed)?;
    let q = strichartz_q(2);
    let mut t = Table::new(["trial", "delta", "caps", "ratio"]);
    let mut max: f64 = 0.0;
    for k in 0..trials {
        let p = synth_cap_pieces(delta, caps, 4, points, seed.wrapping_add(k as u64))?;
        let ratio = decoupling_ratio(&p.pieces, &p.weights, q)?;
        max = max.max(ratio);
        t.push(vec![k.to_string(), fmt_f64(delta), caps.to_string(), fmt_f64(ratio)]);
    }
    Ok(Output { table: t, summary: json!({ "q": q, "max_ratio": max, "square_sum_exponent": 0.5 }) })
}

pub fn kakeya(a: &KakeyaArgs, c: &mut Resolved) -> Result<Output> {
    let n = c.get("n", a.n, 3usize)?;
    let k = c.get("k", a.k, 2usize)?;
    let count = c.get("count", a.count, 32usize)?;
    let deltas = parse_list(&c.get("delta", a.delta.clone(), "0.125,0.0625,0.03125".to_string())?)?;
    let q = c.get("q", a.q, 3.0f64)?;
    let nu = c.get("nu", a.nu, 0.5f64)?;
    let seed = c.seed(a.seed)?;
    let mut t = Table::new(["delta", "nu", "lhs", "rhs", "ratio", "pixels"]);
    for &delta in &deltas {
        let fam = bush_families(n, k, count, delta, 0.25, seed)?;
        let tubes = TransverseTubes::new(n, delta, fam, nu)?;
        let run = kakeya_ratio(&tubes, q, &SamplingBox::cube(n, 1.0))?;
        t.push(vec![
            fmt_f64(delta),
            fmt_f64(tubes.nu),
            fmt_f64(run.lhs),
            fmt_f64(run.rhs),
            fmt_f64(run.ratio),
            run.pixels.to_string(),
        ]);
    }
    Ok(Output { table: t, summary: json!({ "family": "bush", "box": "[-1,1]^n" }) })
}

pub fn sharpness(a: &SharpnessArgs, c: &mut Resolved) -> Result<Output> {
    let r = c.get("R", a.r, 256.0f64)?;
    let sigma = c.get("sigma", a.sigma, 4usize)?;
    let d = c.get("d", a.d, 2usize)?;
    let delta = c.get("delta-slack", a.delta_slack, 0.05f64)?;
    let ex = build_sharpness_example(r, sigma, d, delta)?;
    let sr = sharpness_ratio(&ex, 8)?;
    let mut t = Table::new(["cube", "slab", "lq"]);
    for (cube, v) in ex.y.cubes.iter().zip(&sr.cube_values) {
        let idx = cube.index.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
        t.push(vec![idx, cube.slab_index.to_string(), fmt_f64(*v)]);
    }
    Ok(Output {
        table: t,
        summary: json!({
            "R": r, "sigma": sigma, "norm_sq": ex.norm_sq, "predicted_norm_sq": ex.norm_sq_scale,
            "lhs": sr.lhs, "rhs": sr.rhs, "ratio": sr.ratio, "spread": sr.spread, "tube_spacing": ex.family.spacing,
        }),
    })
}

pub fn counterexample(a: &CounterexampleArgs, c: &mut Resolved) -> Result<Output> {
    let r = c.get("R", a.r, 16.0f64)?;
    let alpha = c.get("alpha", a.alpha, 3.0f64)?;
    let d = c.get("d", a.d, 5usize)?;
    let eps = c.get("eps", a.eps, 0.05f64)?;
    let rho = c.get("rho", a.rho, 0.05f64)?;
    let ex = build_counterexample(r, alpha, d, eps, rho)?;
    let rep = pairing_report(&ex)?;
    let defects = phase_defects(&ex, 100, 0);
    let max_def = defects.iter().cloned().fold(0.0, f64::max);
    let bare = rep.modulus / ((ex.e_count as f64).sqrt() * ex.f_count as f64 * r.powf(-1.5 * d as f64 - 1.0));
    let mut t = Table::new(["m", "points"]);
    for (m, n) in &ex.e.per_sphere {
        t.push(vec![m.to_string(), n.to_string()]);
    }
    Ok(Output {
        table: t,
        summary: json!({
            "counterexample": ex, "pairing": rep, "bare_ratio": bare, "max_phase_defect": max_def,
            "phase_bound": 3.0 * (rho + eps),
        }),
    })
}
