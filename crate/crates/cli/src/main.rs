//! `conewave`: batch runs of the cone experiments.
//!
//! Every run writes one table (CSV or JSON) and prints a JSON manifest with
//! the resolved configuration, its hash, the version and the wall time.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conewave::error::Error;
use conewave::io::{to_json, write_atomic};
use serde_json::json;

use commands::Output;
use config::Resolved;

#[derive(Parser)]
#[command(name = "conewave", version, about = "Cone extension and conical-average experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// `key=value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "CONEWAVE_THREADS")]
    threads: Option<usize>,
    /// Table destination, default `<subcommand>-<hash>.<format>`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the closed-form decay and Strichartz exponents.
    Bounds(BoundsArgs),
    /// Fit the decay exponent of a measure's conical averages.
    DecayScan(DecayArgs),
    /// Decompose a random cap input into wave packets and check leakage.
    WavepacketCheck(WavepacketArgs),
    /// Refined Strichartz ratios on the tube construction.
    StrichartzCheck(StrichartzArgs),
    /// Decoupling ratios for random cap pieces.
    DecouplingCheck(DecouplingArgs),
    /// Multilinear Kakeya ratios for transverse tube families.
    KakeyaCheck(KakeyaArgs),
    /// Build the sigma-tube example and report per-cube norms.
    Sharpness(SharpnessArgs),
    /// Build the lattice counterexample and evaluate its pairing.
    LatticeCounterexample(CounterexampleArgs),
}

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: Option<usize>,
    /// `start:stop:step`
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Args)]
pub struct DecayArgs {
    /// point, lebesgue, product, cantor or lattice.
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// `lo:hi` doubling, or a comma list.
    #[arg(long = "R")]
    pub r: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Minimum annulus grid size.
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub half: Option<bool>,
}

#[derive(Args)]
pub struct WavepacketArgs {
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub delta_slack: Option<f64>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct StrichartzArgs {
    #[arg(long = "R")]
    pub r: Option<String>,
    #[arg(long)]
    pub sigma: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub delta_slack: Option<f64>,
}

#[derive(Args)]
pub struct DecouplingArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub caps: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct KakeyaArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Tubes per family.
    #[arg(long)]
    pub count: Option<usize>,
    /// Comma list of tube widths.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Transversality threshold.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct SharpnessArgs {
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub sigma: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub delta_slack: Option<f64>,
}

#[derive(Args)]
pub struct CounterexampleArgs {
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Guard(_) => 3,
        Error::Invariant(_) => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let start = Instant::now();
    let file = match &cli.common.config {
        Some(p) => config::read_file(p)?,
        None => Default::default(),
    };
    let mut c = Resolved::new(file);
    let threads = c.get_opt("threads", cli.common.threads)?;
    let format = match c.get_opt::<String>("format", None)?.as_deref() {
        _ if cli.common.format.is_some() => cli.common.format.unwrap(),
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(Error::Config(format!("unknown format {other:?}"))),
    };
    c.values.insert("format".into(), if format == Format::Json { "json" } else { "csv" }.into());
    let output = c.get_opt::<String>("output", cli.common.output.map(|p| p.display().to_string()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;

    let seed = cli.common.seed;
    let (name, out): (&str, Output) = pool.install(|| -> Result<_, Error> {
        Ok(match &cli.cmd {
            Cmd::Bounds(a) => ("bounds", commands::bounds(a, &mut c)?),
            Cmd::DecayScan(a) => ("decay-scan", commands::decay_scan_cmd(a, &mut c)?),
            Cmd::WavepacketCheck(a) => {
                let a = WavepacketArgs { seed, ..*a };
                ("wavepacket-check", commands::wavepacket(&a, &mut c)?)
            }
            Cmd::StrichartzCheck(a) => ("strichartz-check", commands::strichartz(a, &mut c)?),
            Cmd::DecouplingCheck(a) => {
                let a = DecouplingArgs { seed, ..*a };
                ("decoupling-check", commands::decoupling(&a, &mut c)?)
            }
            Cmd::KakeyaCheck(a) => {
                let a = KakeyaArgs { seed, delta: a.delta.clone(), ..*a };
                ("kakeya-check", commands::kakeya(&a, &mut c)?)
            }
            Cmd::Sharpness(a) => ("sharpness", commands::sharpness(a, &mut c)?),
            Cmd::LatticeCounterexample(a) => ("lattice-counterexample", commands::counterexample(a, &mut c)?),
        })
    })?;

    let hash = c.hash(name);
    let config: serde_json::Map<String, serde_json::Value> = c
        .values
        .iter()
        .filter(|(k, _)| k.as_str() != "output" && k.as_str() != "threads")
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    let version = env!("CARGO_PKG_VERSION");
    let bytes = match format {
        Format::Csv => out.table.to_csv(&[
            format!("config_hash={hash}"),
            format!("conewave {version} {name}"),
            format!("summary={}", serde_json::to_string(&out.summary).expect("json")),
        ]),
        Format::Json => to_json(&json!({
            "config_hash": hash,
            "subcommand": name,
            "version": version,
            "config": config,
            "summary": out.summary,
            "columns": out.table.columns,
            "rows": out.table.rows,
        })),
    };
    let ext = if format == Format::Json { "json" } else { "csv" };
    let output = output.unwrap_or_else(|| format!("{name}-{hash}.{ext}"));
    write_atomic(output.as_ref(), bytes.as_bytes()).map_err(|e| Error::Config(format!("cannot write {output}: {e}")))?;
    let manifest = json!({
        "subcommand": name,
        "config": config,
        "config_hash": hash,
        "version": version,
        "output": output,
        "threads": pool.current_num_threads(),
        "wall_seconds": start.elapsed().as_secs_f64(),
        "summary": out.summary,
    });
    print!("{}", to_json(&manifest));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("conewave: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
