use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use polar_bd::config::KeyValues;
use polar_bd::latency::{latency_csv, latency_table, LatencyParams};
use polar_bd::sim::{self, ExperimentConfig, UeSent};
use polar_bd::{IdMode, PolarCode};

#[derive(Parser)]
#[command(
    name = "polar-bd",
    version,
    about = "Polar code blind detection toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the information, ID and frozen sets of a code.
    Construct(ConstructArgs),
    /// Worst-case and average latency of the decoder array, as CSV.
    Latency(LatencyArgs),
    /// Monte Carlo blind detection experiment, as CSV.
    Simulate(SimulateArgs),
    /// Single-codeword list decoding BLER sweep, as CSV.
    Bler(BlerArgs),
}

/// Flags common to every subcommand that accepts a config file.
#[derive(Args)]
struct ConfigArg {
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<KeyValues> {
        match &self.config {
            None => Ok(KeyValues::default()),
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(KeyValues::parse(&text)?)
            }
        }
    }
}

/// Resolves a setting: flag, then config file, then default.
fn pick<T: FromStr>(flag: Option<T>, file: &KeyValues, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(file.get(key)?.unwrap_or(default))
}

fn parse_switch(s: &str) -> Result<bool> {
    match s {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        other => bail!("expected on|off, got {other:?}"),
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    id_len: Option<usize>,
    #[arg(long)]
    id_mode: Option<u8>,
    /// Design SNR of the reliability construction, in dB.
    #[arg(long, allow_negative_numbers = true)]
    design_snr: Option<f64>,
    #[command(flatten)]
    cfg: ConfigArg,
}

#[derive(Args)]
struct LatencyArgs {
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    c1: Option<usize>,
    #[arg(long)]
    c2: Option<usize>,
    #[arg(long)]
    l1: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    /// Comma-separated physical decoder counts, one table row each.
    #[arg(long)]
    decoders: Option<String>,
    /// Cycles spent sorting phase-one metrics (defaults to C2).
    #[arg(long)]
    t_sort: Option<usize>,
    #[arg(long)]
    e1: Option<f64>,
    #[arg(long)]
    e2: Option<f64>,
    /// Clock frequency in Hz.
    #[arg(long)]
    freq: Option<f64>,
    /// Processing elements per decoder (reported only).
    #[arg(long)]
    pe: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    c1: Option<usize>,
    #[arg(long)]
    c2: Option<usize>,
    #[arg(long)]
    l1: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    id_len: Option<usize>,
    #[arg(long)]
    id_mode: Option<u8>,
    #[arg(long, allow_negative_numbers = true)]
    design_snr: Option<f64>,
    /// First Eb/N0 point in dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_stop: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// on|off
    #[arg(long)]
    early_stop: Option<String>,
    /// always|never|alternate
    #[arg(long)]
    ue_sent: Option<String>,
    /// Phase-one sorting metric: llr|pm
    #[arg(long)]
    metric: Option<String>,
    /// Channel noise across candidates: shared|per-candidate
    #[arg(long)]
    noise: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArg,
}

#[derive(Args)]
struct BlerArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    id_len: Option<usize>,
    #[arg(long)]
    id_mode: Option<u8>,
    #[arg(long, allow_negative_numbers = true)]
    design_snr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_stop: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArg,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn construct(a: ConstructArgs) -> Result<()> {
    let f = a.cfg.load()?;
    let n = pick(a.n, &f, "n", 256)?;
    let k = pick(a.k, &f, "k", 57)?;
    let id_len = pick(a.id_len, &f, "id-len", 16)?;
    let mode = IdMode::from_number(pick(a.id_mode, &f, "id-mode", 1)?)?;
    let snr = pick(a.design_snr, &f, "design-snr", 0.0)?;
    let code = PolarCode::construct(n, k, id_len, mode, snr)?;
    let mut out = io::stdout().lock();
    writeln!(out, "N={}", code.len())?;
    writeln!(out, "K={}", code.info_len())?;
    writeln!(out, "id_mode={}", code.id_mode())?;
    writeln!(out, "info={}", join(code.info_positions()))?;
    writeln!(out, "id={}", join(code.id_positions()))?;
    writeln!(out, "frozen={}", join(code.frozen_positions()))?;
    Ok(())
}

fn latency(a: LatencyArgs) -> Result<()> {
    let f = a.cfg.load()?;
    let d = LatencyParams::default();
    let c2 = pick(a.c2, &f, "c2", d.c2)?;
    let params = LatencyParams {
        n1: pick(a.n1, &f, "n1", d.n1)?,
        n2: pick(a.n2, &f, "n2", d.n2)?,
        k1: pick(a.k1, &f, "k1", d.k1)?,
        k2: pick(a.k2, &f, "k2", d.k2)?,
        c1: pick(a.c1, &f, "c1", d.c1)?,
        c2,
        l1: pick(a.l1, &f, "l1", d.l1)?,
        l_max: pick(a.lmax, &f, "lmax", d.l_max)?,
        n_scl_max: 1,
        t_sort: pick(a.t_sort, &f, "t-sort", c2)?,
        e1: pick(a.e1, &f, "e1", d.e1)?,
        e2: pick(a.e2, &f, "e2", d.e2)?,
        f_hz: pick(a.freq, &f, "freq", d.f_hz)?,
        pe: pick(a.pe, &f, "pe", d.pe)?,
    };
    let list = pick(a.decoders, &f, "decoders", "1,2,3,4,5".to_string())?;
    let decoders = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad decoder count {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = latency_table(&params, &decoders)?;
    let mut out = output(a.out.as_deref())?;
    out.write_all(latency_csv(&rows).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let f = a.cfg.load()?;
    let d = ExperimentConfig::default();
    let early = pick(a.early_stop, &f, "early-stop", "on".to_string())?;
    let ue_sent: UeSent = pick(a.ue_sent, &f, "ue-sent", "always".to_string())?.parse()?;
    let cfg = ExperimentConfig {
        n1: pick(a.n1, &f, "n1", d.n1)?,
        n2: pick(a.n2, &f, "n2", d.n2)?,
        k: pick(a.k, &f, "k", d.k)?,
        c1: pick(a.c1, &f, "c1", d.c1)?,
        c2: pick(a.c2, &f, "c2", d.c2)?,
        l1: pick(a.l1, &f, "l1", d.l1)?,
        l_max: pick(a.lmax, &f, "lmax", d.l_max)?,
        id_len: pick(a.id_len, &f, "id-len", d.id_len)?,
        id_mode: IdMode::from_number(pick(a.id_mode, &f, "id-mode", 1)?)?,
        design_snr_db: pick(a.design_snr, &f, "design-snr", d.design_snr_db)?,
        early_stop: parse_switch(&early)?,
        ue_sent,
        phase_one_metric: pick(a.metric, &f, "metric", "llr".to_string())?.parse()?,
        noise: pick(a.noise, &f, "noise", "shared".to_string())?.parse()?,
    };
    let grid = sim::snr_grid(
        pick(a.snr_start, &f, "snr-start", 0.0)?,
        pick(a.snr_stop, &f, "snr-stop", 3.0)?,
        pick(a.snr_step, &f, "snr-step", 1.0)?,
    )?;
    let trials = pick(a.trials, &f, "trials", 10_000)?;
    let seed = pick(a.seed, &f, "seed", 1)?;
    let threads = pick(a.threads, &f, "threads", 0)?;
    match cfg.noise {
        sim::NoiseModel::Shared => eprintln!(
            "snr_db is Eb/N0 in dB at rate K/N{}, one noise level for all candidates",
            cfg.n1.min(cfg.n2)
        ),
        sim::NoiseModel::PerCandidate => {
            eprintln!("snr_db is Eb/N0 in dB at each candidate's rate K/N")
        }
    }
    let points = sim::run_experiment(&cfg, &grid, trials, seed, threads)?;
    let mut out = output(a.out.as_deref())?;
    sim::emit_csv(&points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn bler(a: BlerArgs) -> Result<()> {
    let f = a.cfg.load()?;
    let code = PolarCode::construct(
        pick(a.n, &f, "n", 256)?,
        pick(a.k, &f, "k", 57)?,
        pick(a.id_len, &f, "id-len", 16)?,
        IdMode::from_number(pick(a.id_mode, &f, "id-mode", 1)?)?,
        pick(a.design_snr, &f, "design-snr", 0.0)?,
    )?;
    let grid = sim::snr_grid(
        pick(a.snr_start, &f, "snr-start", 0.0)?,
        pick(a.snr_stop, &f, "snr-stop", 3.0)?,
        pick(a.snr_step, &f, "snr-step", 1.0)?,
    )?;
    let points = sim::run_bler_experiment(
        &code,
        pick(a.l, &f, "l", 8)?,
        &grid,
        pick(a.trials, &f, "trials", 10_000)?,
        pick(a.seed, &f, "seed", 1)?,
        pick(a.threads, &f, "threads", 0)?,
    )?;
    eprintln!("snr_db is Eb/N0 in dB with rate K/N");
    let mut out = output(a.out.as_deref())?;
    sim::bler_csv(&points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Construct(a) => construct(a),
        Command::Latency(a) => latency(a),
        Command::Simulate(a) => simulate(a),
        Command::Bler(a) => bler(a),
    }
}
