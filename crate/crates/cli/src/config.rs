//! Run configuration.
//!
//! File grammar, one setting per line:
//!
//! ```text
//! # comment
//! key = value
//! ```
//!
//! Blank lines and `#` comments are ignored; whitespace around keys and
//! values is trimmed; a repeated key keeps its last value. Command-line flags
//! are applied after the file, so they win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use signlab::experiments::singularity::CurveMethod;
use signlab::regime::RegimeConstants;

/// Environment variable consulted when no thread count is configured.
pub const THREADS_ENV: &str = "SIGNLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub regime: RegimeConstants,

    pub curve_n: (usize, usize),
    pub curve_method: CurveMethod,
    pub curve_budget: u64,
    pub curve_fit: Option<(usize, usize)>,

    pub rank_n_base: usize,
    pub rank_method: CurveMethod,
    pub rank_gamma: f64,
    pub rank_budget: u64,

    pub suite_budget: u64,
    pub suite_configs: usize,

    pub lcd_dim: usize,
    pub lcd_count: usize,
    pub lcd_phi_max: f64,

    pub census_n: usize,
    pub census_eps: f64,
    pub census_budget: u64,
    pub census_max_points: usize,

    pub threshold_n: usize,
    pub threshold_budget: u64,
    pub vector: Option<Vec<f64>>,
    pub rho_eps: f64,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            out: PathBuf::from("signlab-out"),
            regime: RegimeConstants::lab(),
            curve_n: (1, 5),
            curve_method: CurveMethod::Exhaustive,
            curve_budget: 1_000_000,
            curve_fit: None,
            rank_n_base: 3,
            rank_method: CurveMethod::Exhaustive,
            rank_gamma: 1.0 / 16.0,
            rank_budget: 100_000,
            suite_budget: 100_000,
            suite_configs: 10,
            lcd_dim: 8,
            lcd_count: 100,
            lcd_phi_max: 32.0,
            census_n: 8,
            census_eps: 0.3,
            census_budget: 4096,
            census_max_points: 400,
            threshold_n: 10,
            threshold_budget: 100_000,
            vector: None,
            rho_eps: 0.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue { key: key.into(), value: value.into(), reason: e.to_string() })
}

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), reason: reason.into() }
}

/// `a..b` (inclusive) or a single value.
pub fn parse_range(key: &str, value: &str) -> Result<(usize, usize), ConfigError> {
    let (a, b) = match value.split_once("..") {
        Some((a, b)) => (parse(key, a.trim())?, parse(key, b.trim().trim_start_matches('='))?),
        None => {
            let a = parse(key, value)?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad(key, value, "empty range"));
    }
    Ok((a, b))
}

fn fmt_range(r: (usize, usize)) -> String {
    format!("{}..{}", r.0, r.1)
}

pub fn parse_method(key: &str, value: &str) -> Result<CurveMethod, ConfigError> {
    match value {
        "exhaustive" => Ok(CurveMethod::Exhaustive),
        "monte-carlo" | "mc" => Ok(CurveMethod::MonteCarlo),
        _ => Err(bad(key, value, "expected `exhaustive` or `monte-carlo`")),
    }
}

pub fn parse_vector(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = value.split(',').map(|x| parse::<f64>(key, x.trim())).collect::<Result<_, _>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(key, value, "need finite comma-separated numbers"));
    }
    Ok(v)
}

impl LabConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let r = &mut self.regime;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "threads" => {
                let t: usize = parse(key, v)?;
                if t == 0 {
                    return Err(bad(key, v, "must be ≥ 1"));
                }
                self.threads = Some(t);
            }
            "out" => self.out = PathBuf::from(v),
            "kappa0" => r.kappa0 = parse(key, v)?,
            "kappa1" => r.kappa1 = parse(key, v)?,
            "c0" => r.c0 = parse(key, v)?,
            "L" => r.big_l = parse(key, v)?,
            "mu" => r.mu = parse(key, v)?,
            "d" => r.d = parse(key, v)?,
            "alpha" => r.alpha = parse(key, v)?,
            "r_lcd" => r.r_lcd = parse(key, v)?,
            "r_rank" => r.r_rank = parse(key, v)?,
            "r_invert" => r.r_invert = parse(key, v)?,
            "lwo_r" => r.lwo_r = parse(key, v)?,
            "lwo_c1" => r.lwo_c1 = parse(key, v)?,
            "lwo_c2" => r.lwo_c2 = parse(key, v)?,
            "curve.n" => self.curve_n = parse_range(key, v)?,
            "curve.method" => self.curve_method = parse_method(key, v)?,
            "curve.budget" => self.curve_budget = parse(key, v)?,
            "curve.fit" => self.curve_fit = if v == "none" { None } else { Some(parse_range(key, v)?) },
            "rank.n_base" => self.rank_n_base = parse(key, v)?,
            "rank.method" => self.rank_method = parse_method(key, v)?,
            "rank.gamma" => self.rank_gamma = parse(key, v)?,
            "rank.budget" => self.rank_budget = parse(key, v)?,
            "suite.budget" => self.suite_budget = parse(key, v)?,
            "suite.configs" => self.suite_configs = parse(key, v)?,
            "lcd.dim" => self.lcd_dim = parse(key, v)?,
            "lcd.count" => self.lcd_count = parse(key, v)?,
            "lcd.phi_max" => self.lcd_phi_max = parse(key, v)?,
            "census.n" => self.census_n = parse(key, v)?,
            "census.eps" => self.census_eps = parse(key, v)?,
            "census.budget" => self.census_budget = parse(key, v)?,
            "census.max_points" => self.census_max_points = parse(key, v)?,
            "threshold.n" => self.threshold_n = parse(key, v)?,
            "threshold.budget" => self.threshold_budget = parse(key, v)?,
            "vector" => self.vector = Some(parse_vector(key, v)?),
            "rho.eps" => self.rho_eps = parse(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.into() });
            };
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Effective settings in a fixed order; re-applying them reproduces `self`.
    /// `threads` and `out` are left out because they never change results.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let r = &self.regime;
        let mut p = vec![
            ("seed", self.seed.to_string()),
            ("kappa0", r.kappa0.to_string()),
            ("kappa1", r.kappa1.to_string()),
            ("c0", r.c0.to_string()),
            ("L", r.big_l.to_string()),
            ("mu", r.mu.to_string()),
            ("d", r.d.to_string()),
            ("alpha", r.alpha.to_string()),
            ("r_lcd", r.r_lcd.to_string()),
            ("r_rank", r.r_rank.to_string()),
            ("r_invert", r.r_invert.to_string()),
            ("lwo_r", r.lwo_r.to_string()),
            ("lwo_c1", r.lwo_c1.to_string()),
            ("lwo_c2", r.lwo_c2.to_string()),
            ("curve.n", fmt_range(self.curve_n)),
            ("curve.method", self.curve_method.as_str().into()),
            ("curve.budget", self.curve_budget.to_string()),
            ("curve.fit", self.curve_fit.map(fmt_range).unwrap_or_else(|| "none".into())),
            ("rank.n_base", self.rank_n_base.to_string()),
            ("rank.method", self.rank_method.as_str().into()),
            ("rank.gamma", self.rank_gamma.to_string()),
            ("rank.budget", self.rank_budget.to_string()),
            ("suite.budget", self.suite_budget.to_string()),
            ("suite.configs", self.suite_configs.to_string()),
            ("lcd.dim", self.lcd_dim.to_string()),
            ("lcd.count", self.lcd_count.to_string()),
            ("lcd.phi_max", self.lcd_phi_max.to_string()),
            ("census.n", self.census_n.to_string()),
            ("census.eps", self.census_eps.to_string()),
            ("census.budget", self.census_budget.to_string()),
            ("census.max_points", self.census_max_points.to_string()),
            ("threshold.n", self.threshold_n.to_string()),
            ("threshold.budget", self.threshold_budget.to_string()),
            ("rho.eps", self.rho_eps.to_string()),
        ];
        if let Some(v) = &self.vector {
            p.push(("vector", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
        }
        p
    }

    pub fn canonical_text(&self) -> String {
        self.pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Config value, then the environment variable, then available parallelism.
    pub fn effective_threads(&self) -> usize {
        self.threads
            .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&t: &usize| t > 0))
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_grammar() {
        let mut c = LabConfig::default();
        c.apply_text("# header\nseed = 7\n\n  curve.n=2..5  # trailing\nL = 4\nseed = 9\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.curve_n, (2, 5));
        assert_eq!(c.regime.big_l, 4.0);
        assert!(matches!(c.apply_text("nonsense"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.apply_text("bogus = 1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("curve.n = 5..2"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = LabConfig::default();
        c.apply_text("vector = 1,2,3\ncurve.fit = 8..16\nrank.method = monte-carlo").unwrap();
        let mut d = LabConfig::default();
        d.apply_text(&c.canonical_text()).unwrap();
        assert_eq!(c, d);
        assert_eq!(c.hash(), d.hash());
        assert_ne!(c.hash(), LabConfig::default().hash());
    }

    #[test]
    fn ranges_and_vectors() {
        assert_eq!(parse_range("k", "3").unwrap(), (3, 3));
        assert_eq!(parse_range("k", "2..=4").unwrap(), (2, 4));
        assert_eq!(parse_vector("v", "1, 1,1,1").unwrap(), vec![1.0; 4]);
        assert!(parse_vector("v", "1,x").is_err());
    }
}
