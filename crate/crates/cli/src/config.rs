use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use squeezechain::observables::{AveragingWindow, RevivalOptions, DEFAULT_AVG_STEP};

use crate::CliError;

pub const DEFAULT_DELTA: f64 = 0.8;
pub const DEFAULT_N_SITES: usize = 100;
pub const DEFAULT_SIZES: [usize; 5] = [80, 100, 150, 200, 250];
pub const WORKERS_ENV: &str = "SQUEEZECHAIN_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "squeezechain", version, about = "Spin squeezing after a field quench in the transverse-field XY chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML file with default values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Data file to write (standard output if omitted). The manifest goes
    /// next to it as `<FILE>.manifest.json`.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads (falls back to SQUEEZECHAIN_WORKERS, then all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground-state squeezing parameter over a field range (columns h, xi2).
    #[command(allow_negative_numbers = true)]
    GroundSweep(GroundSweepArgs),
    /// Trajectory after a quench h1 -> h2 (columns t, xi2, var_jz, mz).
    #[command(allow_negative_numbers = true)]
    Quench(QuenchArgs),
    /// Windowed long-time averages over post-quench fields (columns h2, xi2_avg, var_avg).
    #[command(allow_negative_numbers = true)]
    AverageSweep(AverageSweepArgs),
    /// First revival time for several sizes and the fit T_rev = k N (columns N, T_rev).
    #[command(allow_negative_numbers = true)]
    RevivalScan(RevivalScanArgs),
    /// Compare the pipeline with brute-force Fock-space evolution for N <= 8.
    #[command(allow_negative_numbers = true)]
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GroundSweepArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub h_min: Option<f64>,
    #[arg(long)]
    pub h_max: Option<f64>,
    /// Number of intervals; the sweep has steps + 1 points.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QuenchArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub h1: Option<f64>,
    #[arg(long)]
    pub h2: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AverageSweepArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub h1: Option<f64>,
    #[arg(long)]
    pub h2_min: Option<f64>,
    #[arg(long)]
    pub h2_max: Option<f64>,
    /// Number of intervals; the sweep has h2-steps + 1 points.
    #[arg(long)]
    pub h2_steps: Option<usize>,
    /// `T_MIN:T_MAX` or `T_MIN:T_MAX:STEP`. Default: [5, 0.8 T_rev] with step 0.1.
    #[arg(long, value_name = "WINDOW")]
    pub avg_window: Option<String>,
}

#[derive(Debug, Args)]
pub struct RevivalScanArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub h1: Option<f64>,
    #[arg(long)]
    pub h2: Option<f64>,
    /// Comma-separated chain sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// Random (delta, h1, h2, t) tuples per chain size.
    #[arg(long)]
    pub tuples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Contents of a `--config` file. Keys match the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub delta: Option<f64>,
    pub n_sites: Option<usize>,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub steps: Option<usize>,
    pub h2_min: Option<f64>,
    pub h2_max: Option<f64>,
    pub h2_steps: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub avg_window: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub tuples: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundSweepConfig {
    pub delta: f64,
    pub n_sites: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuenchConfig {
    pub delta: f64,
    pub n_sites: usize,
    pub h1: f64,
    pub h2: f64,
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageSweepConfig {
    pub delta: f64,
    pub n_sites: usize,
    pub h1: f64,
    pub h2_min: f64,
    pub h2_max: f64,
    pub h2_steps: usize,
    /// `None` selects the default window for the sweep.
    pub avg_window: Option<AveragingWindow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RevivalScanConfig {
    pub delta: f64,
    pub h1: f64,
    pub h2: f64,
    pub sizes: Vec<usize>,
    pub options: RevivalOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheckConfig {
    pub sizes: Vec<usize>,
    pub tuples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// A subcommand with every parameter resolved.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Resolved {
    GroundSweep(GroundSweepConfig),
    Quench(QuenchConfig),
    AverageSweep(AverageSweepConfig),
    RevivalScan(RevivalScanConfig),
    OracleCheck(OracleCheckConfig),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Resolved,
    pub format: Format,
    pub workers: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("--{name} is required (flag or config file)")))
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}

fn check_field(name: &str, h: f64) -> Result<(), CliError> {
    check(h.is_finite() && h >= 0.0, || format!("--{name} must be a finite non-negative field, got {h}"))
}

fn check_delta(delta: f64) -> Result<(), CliError> {
    check(delta > 0.0 && delta <= 1.0, || format!("--delta must lie in (0, 1], got {delta}"))
}

fn check_range(lo: f64, hi: f64, steps: usize, what: &str) -> Result<(), CliError> {
    check(lo.is_finite() && hi.is_finite() && hi > lo && steps > 0, || {
        format!("empty {what} range: [{lo}, {hi}] with {steps} steps")
    })
}

fn check_sites(n: usize) -> Result<(), CliError> {
    check(n >= 2, || format!("--n-sites must be at least 2, got {n}"))
}

fn parse_window(text: &str) -> Result<AveragingWindow, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Validation(format!("--avg-window expects T_MIN:T_MAX[:STEP], got {text:?}"));
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let window = AveragingWindow {
        t_min: num(parts[0])?,
        t_max: num(parts[1])?,
        step: if parts.len() == 3 { num(parts[2])? } else { DEFAULT_AVG_STEP },
    };
    check(window.t_min >= 0.0 && window.t_max > window.t_min && window.step > 0.0, || {
        format!("--avg-window {text:?} is empty or malformed")
    })?;
    Ok(window)
}

fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    let workers = flag
        .or(file)
        .or(env)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    check(workers > 0, || "--workers must be positive".into())?;
    Ok(workers)
}

impl Cli {
    /// Applies flags > config file > defaults and validates everything.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let command = match self.command {
            Command::GroundSweep(a) => {
                let c = GroundSweepConfig {
                    delta: a.delta.or(file.delta).unwrap_or(DEFAULT_DELTA),
                    n_sites: a.n_sites.or(file.n_sites).unwrap_or(DEFAULT_N_SITES),
                    h_min: a.h_min.or(file.h_min).unwrap_or(0.0),
                    h_max: a.h_max.or(file.h_max).unwrap_or(2.0),
                    steps: a.steps.or(file.steps).unwrap_or(200),
                };
                check_delta(c.delta)?;
                check_sites(c.n_sites)?;
                check_range(c.h_min, c.h_max, c.steps, "field")?;
                check_field("h-min", c.h_min)?;
                Resolved::GroundSweep(c)
            }
            Command::Quench(a) => {
                let c = QuenchConfig {
                    delta: a.delta.or(file.delta).unwrap_or(DEFAULT_DELTA),
                    n_sites: a.n_sites.or(file.n_sites).unwrap_or(DEFAULT_N_SITES),
                    h1: required(a.h1.or(file.h1), "h1")?,
                    h2: required(a.h2.or(file.h2), "h2")?,
                    t_max: a.t_max.or(file.t_max).unwrap_or(50.0),
                    dt: a.dt.or(file.dt).unwrap_or(0.1),
                };
                check_delta(c.delta)?;
                check_sites(c.n_sites)?;
                check_field("h1", c.h1)?;
                check_field("h2", c.h2)?;
                check(c.t_max.is_finite() && c.t_max >= 0.0 && c.dt > 0.0, || {
                    format!("need t-max >= 0 and dt > 0, got t-max {} dt {}", c.t_max, c.dt)
                })?;
                Resolved::Quench(c)
            }
            Command::AverageSweep(a) => {
                let window = a.avg_window.or(file.avg_window).map(|w| parse_window(&w)).transpose()?;
                let c = AverageSweepConfig {
                    delta: a.delta.or(file.delta).unwrap_or(DEFAULT_DELTA),
                    n_sites: a.n_sites.or(file.n_sites).unwrap_or(DEFAULT_N_SITES),
                    h1: required(a.h1.or(file.h1), "h1")?,
                    h2_min: a.h2_min.or(file.h2_min).unwrap_or(0.1),
                    h2_max: a.h2_max.or(file.h2_max).unwrap_or(3.0),
                    h2_steps: a.h2_steps.or(file.h2_steps).unwrap_or(29),
                    avg_window: window,
                };
                check_delta(c.delta)?;
                check_sites(c.n_sites)?;
                check_field("h1", c.h1)?;
                check_range(c.h2_min, c.h2_max, c.h2_steps, "h2")?;
                check_field("h2-min", c.h2_min)?;
                Resolved::AverageSweep(c)
            }
            Command::RevivalScan(a) => {
                let mut options = RevivalOptions::default();
                if let Some(dt) = a.dt.or(file.dt) {
                    options.dt = dt;
                }
                let c = RevivalScanConfig {
                    delta: a.delta.or(file.delta).unwrap_or(DEFAULT_DELTA),
                    h1: required(a.h1.or(file.h1), "h1")?,
                    h2: a.h2.or(file.h2).unwrap_or(1.0),
                    sizes: a.sizes.or(file.sizes).unwrap_or_else(|| DEFAULT_SIZES.to_vec()),
                    options,
                };
                check_delta(c.delta)?;
                check_field("h1", c.h1)?;
                check_field("h2", c.h2)?;
                check(c.options.dt > 0.0, || "--dt must be positive".into())?;
                check(c.sizes.len() >= 3, || {
                    format!("a revival fit needs at least 3 sizes, got {}", c.sizes.len())
                })?;
                for &n in &c.sizes {
                    check_sites(n)?;
                }
                Resolved::RevivalScan(c)
            }
            Command::OracleCheck(a) => {
                let c = OracleCheckConfig {
                    sizes: vec![4, 6, 8],
                    tuples: a.tuples.or(file.tuples).unwrap_or(20),
                    seed: a.seed.or(file.seed).unwrap_or(2024),
                    tolerance: 1e-9,
                };
                check(c.tuples > 0, || "--tuples must be positive".into())?;
                Resolved::OracleCheck(c)
            }
        };
        Ok(RunConfig {
            command,
            format: self.format.or(file.format).unwrap_or(Format::Csv),
            workers: resolve_workers(self.workers, file.workers)?,
            output: self.output.or(file.output),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("squeezechain").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_are_canonical() {
        let run = parse(&["ground-sweep", "--workers", "1"]).resolve().unwrap();
        match run.command {
            Resolved::GroundSweep(c) => {
                assert_eq!(c.delta, 0.8);
                assert_eq!(c.n_sites, 100);
                assert_eq!(c.steps, 200);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(run.format, Format::Csv);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "delta = 0.6\nn-sites = 40\nh1 = 0.3\nh2 = 0.9\nformat = \"json\"\n").unwrap();
        let cfg = path.to_str().unwrap();
        let run = parse(&["quench", "--config", cfg, "--n-sites", "60", "--workers", "1"]).resolve().unwrap();
        match run.command {
            Resolved::Quench(c) => {
                assert_eq!(c.delta, 0.6);
                assert_eq!(c.n_sites, 60);
                assert_eq!((c.h1, c.h2), (0.3, 0.9));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(run.format, Format::Json);
    }

    #[test]
    fn rejects_unknown_config_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "detla = 0.6\n").unwrap();
        let err = parse(&["ground-sweep", "--config", path.to_str().unwrap()]).resolve().unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn validation_failures() {
        for args in [
            &["ground-sweep", "--h-min", "1", "--h-max", "1"][..],
            &["ground-sweep", "--steps", "0"],
            &["quench", "--h1", "0.5"],
            &["quench", "--h1", "0.5", "--h2", "-1"],
            &["revival-scan", "--h1", "0.9", "--sizes", "100"],
            &["average-sweep", "--h1", "2", "--avg-window", "5"],
            &["average-sweep", "--h1", "2", "--avg-window", "9:4"],
            &["ground-sweep", "--delta", "1.5"],
        ] {
            let err = parse(args).resolve().unwrap_err();
            assert!(matches!(err, CliError::Validation(_)), "{args:?}");
        }
    }

    #[test]
    fn window_parsing() {
        let w = parse_window("5:40").unwrap();
        assert_eq!((w.t_min, w.t_max, w.step), (5.0, 40.0, 0.1));
        let w = parse_window("2:10:0.5").unwrap();
        assert_eq!(w.step, 0.5);
    }
}
