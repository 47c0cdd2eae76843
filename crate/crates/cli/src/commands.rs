//! Subcommand bodies. Each one writes its CSVs through [`Run::emit`] and
//! returns the verdicts that decide the exit status.

use std::path::PathBuf;

use serde_json::json;
use signlab::concentration::{rho_eps_exact, rho_exact, threshold_estimate, verify_rho_v_tau};
use signlab::experiments::replacement::THRESHOLD_RESOLUTION;
use signlab::experiments::suite::sample_flat_unit;
use signlab::experiments::{fit_exponential, lemma_suite, rank_evolution, singularity_curve, SuiteConfig};
use signlab::lcd::{lcd, LcdStatus};
use signlab::lcd::search::DEFAULT_RESOLUTION;
use signlab::nets::{net_census_tiny, CensusConfig, NetVerdict};
use signlab::output::{write_curve_csv, write_lemma_csv, write_rank_csv};
use signlab::regime::RegimeTag;
use signlab::report::{LemmaReport, Side};
use signlab::rng::{standard_normal, SeedSpec};
use signlab::{LabError, Verdict};

use crate::config::LabConfig;
use crate::manifest::Run;
use crate::plot::{render, PlotError};

#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) | CmdError::Lab(LabError::InvalidArgument(_)) => crate::EXIT_USAGE,
            _ => 1,
        }
    }
}

pub enum Command {
    SingularityCurve,
    RankEvolution,
    LemmaSuite { only: Vec<String> },
    LcdStats,
    NetCensus,
    Threshold,
    Rho,
    Plot { csv: PathBuf, output: Option<PathBuf> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SingularityCurve => "singularity-curve",
            Command::RankEvolution => "rank-evolution",
            Command::LemmaSuite { .. } => "lemma-suite",
            Command::LcdStats => "lcd-stats",
            Command::NetCensus => "net-census",
            Command::Threshold => "threshold",
            Command::Rho => "rho",
            Command::Plot { .. } => "plot",
        }
    }
}

/// 1 on any violation, 2 on an unmet precondition, 3 when every verdict is
/// inconclusive, else 0.
pub fn exit_for(verdicts: &[Verdict]) -> i32 {
    if verdicts.contains(&Verdict::Violated) {
        1
    } else if verdicts.contains(&Verdict::PreconditionsUnmet) {
        2
    } else if !verdicts.is_empty() && verdicts.iter().all(|v| *v == Verdict::Inconclusive) {
        3
    } else {
        0
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> signlab::Result<()>) -> Result<Vec<u8>, CmdError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn simple_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CmdError> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header).map_err(LabError::from)?;
    for r in rows {
        wr.write_record(r).map_err(LabError::from)?;
    }
    wr.into_inner().map_err(|e| CmdError::Io(e.into_error()))
}

fn verdict_counts(reports: &[LemmaReport]) -> serde_json::Value {
    let mut m = std::collections::BTreeMap::<&str, usize>::new();
    for r in reports {
        *m.entry(r.verdict.as_str()).or_default() += 1;
    }
    json!(m)
}

pub fn run(cmd: &Command, cfg: &LabConfig, run: &mut Run) -> Result<Vec<Verdict>, CmdError> {
    let seed = SeedSpec::new(cfg.seed, cmd.name());
    let out = |name: &str| cfg.out.join(name);
    match cmd {
        Command::SingularityCurve => {
            let (a, b) = cfg.curve_n;
            let ns: Vec<usize> = (a..=b).collect();
            let curve = singularity_curve(&ns, cfg.curve_method, cfg.curve_budget, &seed)?;
            run.emit(out("curve.csv"), &csv_bytes(|w| write_curve_csv(w, &curve))?)?;
            for r in &curve.rows {
                println!("n={} p={} [{}, {}] ({}/{})", r.n, r.p_hat, r.ci_low, r.ci_high, r.count, r.total);
            }
            let mut verdicts = Vec::new();
            if let Some(w) = cfg.curve_fit {
                match fit_exponential(&curve, w) {
                    Ok(fit) => {
                        println!("fit over {:?}: log-slope {} CI [{}, {}]", fit.window, fit.slope, fit.slope_ci.lo, fit.slope_ci.hi);
                        run.record("fit", serde_json::to_value(&fit).unwrap_or_default());
                    }
                    Err(e) => {
                        eprintln!("fit skipped: {e}");
                        run.record("fit_error", json!(e.to_string()));
                        verdicts.push(Verdict::PreconditionsUnmet);
                    }
                }
            }
            run.record("rows", json!(curve.rows.len()));
            Ok(verdicts)
        }
        Command::RankEvolution => {
            let ev = rank_evolution(cfg.rank_n_base, cfg.rank_method, cfg.rank_gamma, cfg.rank_budget, &seed)?;
            run.emit(out("rank.csv"), &csv_bytes(|w| write_rank_csv(w, &ev))?)?;
            let reports: Vec<LemmaReport> = std::iter::once(ev.master.clone()).chain(ev.step_down.iter().cloned()).chain(ev.rank_t.iter().cloned()).collect();
            run.emit(out("rank_lemmas.csv"), &csv_bytes(|w| write_lemma_csv(w, &reports))?)?;
            println!("draws={} interlacing_violations={} decrease-rank={}", ev.total, ev.interlacing_violations, ev.master.verdict);
            run.record("interlacing_violations", json!(ev.interlacing_violations));
            run.record("verdicts", verdict_counts(&reports));
            let mut v: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
            if ev.interlacing_violations > 0 {
                v.push(Verdict::Violated);
            }
            Ok(v)
        }
        Command::LemmaSuite { only } => {
            let sc = SuiteConfig { budget: cfg.suite_budget, configs: cfg.suite_configs, regime: cfg.regime.clone() };
            let reports = lemma_suite(only, &sc, &seed)?;
            run.emit(out("lemmas.csv"), &csv_bytes(|w| write_lemma_csv(w, &reports))?)?;
            let mut ids: Vec<&str> = Vec::new();
            for r in &reports {
                if !ids.contains(&r.lemma_id.as_str()) {
                    ids.push(&r.lemma_id);
                }
            }
            for id in ids {
                let mine: Vec<LemmaReport> = reports.iter().filter(|r| r.lemma_id == id).cloned().collect();
                println!("{id}: {}", verdict_counts(&mine));
            }
            run.record("only", json!(only));
            run.record("verdicts", verdict_counts(&reports));
            Ok(reports.iter().map(|r| r.verdict).collect())
        }
        Command::LcdStats => {
            let d = cfg.lcd_dim;
            if d == 0 {
                return Err(CmdError::Usage("lcd.dim must be ≥ 1".into()));
            }
            let alpha = cfg.regime.alpha;
            let mut rows = Vec::with_capacity(cfg.lcd_count);
            let (mut certified, mut capped, mut replay_failures) = (0usize, 0usize, 0usize);
            for i in 0..cfg.lcd_count {
                let mut rng = seed.child(i).rng(0);
                let g: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                let v: Vec<f64> = g.iter().map(|x| x / norm).collect();
                let r = lcd(&v, alpha, cfg.lcd_phi_max, DEFAULT_RESOLUTION)?;
                let replay = r.replay(&v);
                match r.status {
                    LcdStatus::Certified => certified += 1,
                    LcdStatus::CappedAtPhiMax => capped += 1,
                    LcdStatus::Degenerate => {}
                }
                replay_failures += replay.is_err() as usize;
                rows.push(vec![
                    i.to_string(),
                    alpha.to_string(),
                    r.bracket_low.to_string(),
                    r.bracket_high.to_string(),
                    r.status.as_str().to_string(),
                    if replay.is_ok() { "ok".into() } else { "failed".into() },
                ]);
            }
            run.emit(out("lcd.csv"), &simple_csv(&["index", "alpha", "bracket_low", "bracket_high", "status", "replay"], &rows)?)?;
            println!("d={d} alpha={alpha}: certified={certified} capped={capped} replay_failures={replay_failures}");
            run.record("certified", json!(certified));
            run.record("capped", json!(capped));
            run.record("replay_failures", json!(replay_failures));
            Ok(if replay_failures > 0 { vec![Verdict::Violated] } else { Vec::new() })
        }
        Command::NetCensus => {
            let r = &cfg.regime;
            let cc = CensusConfig {
                n: cfg.census_n,
                d: r.d,
                eps: cfg.census_eps,
                big_l: r.big_l,
                mu: r.mu,
                kappa0: r.kappa0,
                kappa1: r.kappa1,
                budget: cfg.census_budget,
                max_points: cfg.census_max_points,
            };
            let rep = net_census_tiny(&cc, &seed)?;
            run.emit(out("census.csv"), &csv_bytes(|w| rep.write_csv(w))?)?;
            println!(
                "|Lambda|={} classified={} members={} nonmembers={} inconclusive={} uncovered={}",
                rep.lambda_size, rep.classified, rep.members, rep.nonmembers, rep.inconclusive, rep.uncovered
            );
            run.record("lambda_size", json!(rep.lambda_size));
            run.record("member_fraction", json!([rep.member_fraction.lo, rep.member_fraction.hi]));
            run.record("uncovered", json!(rep.uncovered));
            let mut v: Vec<Verdict> = rep
                .rows
                .iter()
                .map(|row| if row.verdict == NetVerdict::Inconclusive { Verdict::Inconclusive } else { Verdict::Holds })
                .collect();
            if rep.uncovered > 0 {
                v.push(Verdict::Violated);
            }
            Ok(v)
        }
        Command::Threshold => {
            let r = &cfg.regime;
            let v = match &cfg.vector {
                Some(x) => {
                    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(CmdError::Usage("vector must be nonzero".into()));
                    }
                    x.iter().map(|a| a / norm).collect()
                }
                None => sample_flat_unit(&mut seed.child("vector").rng(0), cfg.threshold_n, r.d.min(cfg.threshold_n), r.kappa0, r.kappa1),
            };
            let n = v.len();
            if r.d >= n {
                return Err(CmdError::Usage(format!("d={} must be below n={n}", r.d)));
            }
            let s = seed.child("threshold");
            let th = threshold_estimate(&v, r.big_l, n, r.d, r.mu, cfg.threshold_budget, THRESHOLD_RESOLUTION, &s)?;
            let target = |t: f64| (4.0 * r.big_l * t).powi(n as i32);
            let rows: Vec<Vec<String>> = th
                .probe_estimates
                .iter()
                .map(|(t, e)| vec![t.to_string(), e.p_hat.to_string(), e.ci_low.to_string(), e.ci_high.to_string(), target(*t).to_string()])
                .collect();
            run.emit(out("threshold.csv"), &simple_csv(&["t", "p_hat", "ci_low", "ci_high", "target"], &rows)?)?;
            let (verdict, lhs, rhs) = verify_rho_v_tau(&v, &th)?;
            let params = json!({"n": n, "d": r.d, "L": r.big_l, "mu": r.mu, "budget": cfg.threshold_budget, "t_low": th.t_low, "t_high": th.t_high, "resolved": th.resolved, "flagged": th.flagged});
            let rep = LemmaReport::new("RhoVtau", RegimeTag::Lab, verdict, Side::exact(lhs), Side::exact(rhs), params).with_seed(&s);
            run.emit(out("threshold_lemmas.csv"), &csv_bytes(|w| write_lemma_csv(w, std::slice::from_ref(&rep)))?)?;
            println!("t_low={} t_high={} RhoVtau={}", th.t_low, th.t_high, verdict);
            run.record("t_low", json!(th.t_low));
            run.record("t_high", json!(th.t_high));
            Ok(vec![verdict])
        }
        Command::Rho => {
            let v = cfg.vector.as_ref().ok_or_else(|| CmdError::Usage("rho needs --vector".into()))?;
            let rho = if cfg.rho_eps == 0.0 { rho_exact(v)? } else { rho_eps_exact(v, cfg.rho_eps)? };
            println!("{rho}");
            let joined = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            run.emit(out("rho.csv"), &simple_csv(&["vector", "eps", "rho"], &[vec![joined, cfg.rho_eps.to_string(), rho.to_string()]])?)?;
            run.record("rho", json!(rho));
            Ok(Vec::new())
        }
        Command::Plot { csv, output } => {
            let (kind, svg) = render(csv).map_err(CmdError::from)?;
            let dest = output.clone().unwrap_or_else(|| csv.with_extension("svg"));
            run.emit(dest.clone(), svg.as_bytes())?;
            println!("{}", dest.display());
            run.record("kind", json!(kind.as_str()));
            run.record("input", json!(csv.display().to_string()));
            Ok(Vec::new())
        }
    }
}
