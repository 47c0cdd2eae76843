//! `signlab`: batch front end for the singularity lab.

mod commands;
mod config;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{exit_for, Command};
use config::LabConfig;
use manifest::Run;

pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "signlab", version, about = "Experiments on random symmetric ±1 matrices", propagate_version = true)]
struct Cli {
    /// Key-value config file, applied over the defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable; applied after --config.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (also SIGNLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct RegimeFlags {
    #[arg(long = "L")]
    big_l: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Singular probability per n, exact or Monte Carlo.
    SingularityCurve {
        /// `a..b` or a single n.
        #[arg(long)]
        n: Option<String>,
        /// `exhaustive` or `monte-carlo`.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        /// Fit window `a..b` for the exponential decay rate.
        #[arg(long)]
        fit: Option<String>,
    },
    /// Joint rank distribution of consecutive trailing minors.
    RankEvolution {
        #[arg(long)]
        n_base: Option<String>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        budget: Option<String>,
    },
    /// Lemma verifiers over the default configurations.
    LemmaSuite {
        /// Restrict to these lemma ids.
        #[arg(long, num_args = 1..)]
        only: Vec<String>,
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        configs: Option<String>,
        #[command(flatten)]
        regime: RegimeFlags,
    },
    /// LCD brackets of random unit vectors.
    LcdStats {
        #[arg(long)]
        dim: Option<String>,
        #[arg(long)]
        count: Option<String>,
        #[arg(long)]
        phi_max: Option<String>,
        #[command(flatten)]
        regime: RegimeFlags,
    },
    /// Membership census of a small trivial net.
    NetCensus {
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        max_points: Option<String>,
        #[command(flatten)]
        regime: RegimeFlags,
    },
    /// Threshold bracket of a unit vector plus the RhoVtau check.
    Threshold {
        /// Comma-separated; normalized before use. Random flat vector if absent.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        #[command(flatten)]
        regime: RegimeFlags,
    },
    /// Exact concentration of a Rademacher walk.
    Rho {
        #[arg(long)]
        vector: Option<String>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// SVG from a curve or lemma CSV.
    Plot {
        csv: PathBuf,
        /// Defaults to the input path with an .svg extension.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn regime_pairs(r: RegimeFlags) -> Vec<(&'static str, Option<String>)> {
    vec![("L", r.big_l), ("d", r.d), ("mu", r.mu), ("alpha", r.alpha)]
}

/// Flag values as config keys, plus the command they select.
fn split(cmd: Cmd) -> (Command, Vec<(&'static str, Option<String>)>) {
    match cmd {
        Cmd::SingularityCurve { n, method, budget, fit } => {
            (Command::SingularityCurve, vec![("curve.n", n), ("curve.method", method), ("curve.budget", budget), ("curve.fit", fit)])
        }
        Cmd::RankEvolution { n_base, method, gamma, budget } => (
            Command::RankEvolution,
            vec![("rank.n_base", n_base), ("rank.method", method), ("rank.gamma", gamma), ("rank.budget", budget)],
        ),
        Cmd::LemmaSuite { only, budget, configs, regime } => {
            let mut p = vec![("suite.budget", budget), ("suite.configs", configs)];
            p.extend(regime_pairs(regime));
            (Command::LemmaSuite { only }, p)
        }
        Cmd::LcdStats { dim, count, phi_max, regime } => {
            let mut p = vec![("lcd.dim", dim), ("lcd.count", count), ("lcd.phi_max", phi_max)];
            p.extend(regime_pairs(regime));
            (Command::LcdStats, p)
        }
        Cmd::NetCensus { n, eps, budget, max_points, regime } => {
            let mut p = vec![("census.n", n), ("census.eps", eps), ("census.budget", budget), ("census.max_points", max_points)];
            p.extend(regime_pairs(regime));
            (Command::NetCensus, p)
        }
        Cmd::Threshold { vector, n, budget, regime } => {
            let mut p = vec![("vector", vector), ("threshold.n", n), ("threshold.budget", budget)];
            p.extend(regime_pairs(regime));
            (Command::Threshold, p)
        }
        Cmd::Rho { vector, eps } => (Command::Rho, vec![("vector", vector), ("rho.eps", eps)]),
        Cmd::Plot { csv, output } => (Command::Plot { csv, output }, Vec::new()),
    }
}

fn build_config(cli: Cli) -> Result<(Command, LabConfig), config::ConfigError> {
    let Cli { config, set, seed, threads, out, cmd } = cli;
    let (cmd, flags) = split(cmd);
    let mut cfg = LabConfig::default();
    if let Some(p) = &config {
        cfg.apply_file(p)?;
    }
    for kv in &set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config::ConfigError::Syntax { line: 0, text: format!("--set {kv}") })?;
        cfg.set(k.trim(), v)?;
    }
    for (k, v) in [("seed", seed), ("threads", threads), ("out", out)].into_iter().chain(flags) {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    cfg.regime.validate().map_err(|e| config::ConfigError::BadValue { key: "regime".into(), value: String::new(), reason: e.to_string() })?;
    Ok((cmd, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (cmd, cfg) = match build_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("signlab: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let threads = cfg.effective_threads();
    let mut run = Run::start(cmd.name());
    let result = signlab::mc::with_threads(threads, || commands::run(&cmd, &cfg, &mut run));
    let (code, err) = match result {
        Ok(v) => (exit_for(&v), None),
        Err(e) => {
            eprintln!("signlab {}: {e}", cmd.name());
            (e.exit_code(), Some(e.to_string()))
        }
    };
    if let Err(e) = run.finish(&cfg, threads, code, err.as_deref()) {
        eprintln!("signlab: writing manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
