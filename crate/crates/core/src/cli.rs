//! Command-line front end.
//!
//! Every subcommand writes CSV with a header row (or JSON with
//! `--format json`) to stdout or `--out`. Parameters may come from a TOML
//! file passed with `--config`; flags win over file values. Exit codes:
//! 0 success, 1 I/O, 2 usage, 3 domain, 4 solver, 5 starvation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use crate::channel::{ChannelParams, ContentionParams, SnrConvention};
use crate::error::DosError;
use crate::reproduce::{self, format_fixed, StudySetup, Table};
use crate::sim::{run_replications, run_simulation, SimConfig, SimPolicy, SimReport, DEFAULT_PROBE_CAP};
use crate::threshold::{optimize_backoff, solve_perfect_csi, LinearBackoffPolicy, OptimizeConfig};

pub const SEED_ENV: &str = "DOS_LAB_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] DosError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Model(e) => match e {
                DosError::Domain(_) | DosError::Policy(_) => 3,
                DosError::Starvation { .. } => 5,
                _ => 4,
            },
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "dos-lab",
    version,
    about = "Optimal distributed opportunistic scheduling under noisy channel estimates"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Decimal places in CSV output.
    #[arg(long, global = true, default_value_t = 6)]
    pub precision: usize,
    /// TOML file with run parameters; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "snr-convention", global = true)]
    pub snr_convention: Option<SnrConvention>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal throughput with perfect channel knowledge.
    SolvePerfect(ModelArgs),
    /// Backoff-ratio iteration; prints every iterate.
    Optimize(OptimizeArgs),
    /// Regenerate a benchmark table.
    Table {
        #[arg(value_enum)]
        id: TableId,
    },
    /// Data series for a figure.
    Figure(FigureArgs),
    /// Monte Carlo run of a threshold policy.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableId {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    Ii,
    #[value(name = "III")]
    Iii,
    #[value(name = "IV")]
    Iv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "1")]
    PhiVersusSigma,
    #[value(name = "2")]
    PhiVersusThreshold,
    #[value(name = "3")]
    SigmaVersusAlpha,
    #[value(name = "4")]
    ThroughputVersusTraining,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Contention overhead per successful round relative to the data slot.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Probability that a contention round succeeds.
    #[arg(long = "ps")]
    pub p_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Repeat for several curves.
    #[arg(long)]
    pub rho: Vec<f64>,
    #[arg(long)]
    pub alpha: Vec<f64>,
    /// Threshold at which to evaluate the backoff sweep (figure 1).
    #[arg(long, default_value_t = 0.1)]
    pub x: f64,
    /// Upper end of the threshold axis (figure 2).
    #[arg(long, default_value_t = 0.6)]
    pub x_max: f64,
    /// Data slot length; required by figure 4, whose training time doubles
    /// as the contention mini-slot.
    #[arg(long = "T")]
    pub t_data: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "ps")]
    pub p_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Use the optimal backoff ratio and threshold.
    #[arg(long)]
    pub auto_policy: bool,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Transmissions per replication.
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Falls back to the DOS_LAB_SEED environment variable, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub probe_cap: Option<f64>,
}

/// Contents of a `--config` file. Keys match the long flag names with
/// underscores.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub ps: Option<f64>,
    pub snr_convention: Option<SnrConvention>,
    pub x0: Option<f64>,
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub auto_policy: Option<bool>,
    pub threshold: Option<f64>,
    pub sigma: Option<f64>,
    pub episodes: Option<u64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub parallel: Option<bool>,
    pub probe_cap: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

struct Resolved<'a> {
    file: RunConfig,
    global: &'a GlobalArgs,
}

impl Resolved<'_> {
    fn convention(&self) -> SnrConvention {
        self.global.snr_convention.or(self.file.snr_convention).unwrap_or(SnrConvention::Boosted)
    }

    fn rho(&self, m: &ModelArgs) -> Result<f64, CliError> {
        m.rho.or(self.file.rho).ok_or_else(|| usage("missing required value: --rho"))
    }

    fn alpha(&self, m: &ModelArgs) -> Result<f64, CliError> {
        m.alpha.or(self.file.alpha).ok_or_else(|| usage("missing required value: --alpha"))
    }

    fn contention(&self, delta: Option<f64>, p_s: Option<f64>) -> Result<ContentionParams, CliError> {
        let default = ContentionParams::default();
        let delta = delta.or(self.file.delta).unwrap_or(default.delta());
        let p_s = p_s.or(self.file.ps).unwrap_or(default.p_s());
        Ok(ContentionParams::with_delta(delta, p_s)?)
    }

    fn channel(&self, m: &ModelArgs) -> Result<ChannelParams, CliError> {
        Ok(ChannelParams::from_alpha(self.rho(m)?, self.alpha(m)?, self.convention())?)
    }

    fn optimize(&self, x0: Option<f64>, eps: Option<f64>, max_iter: Option<usize>) -> OptimizeConfig {
        let d = OptimizeConfig::default();
        OptimizeConfig {
            x0: x0.or(self.file.x0).unwrap_or(d.x0),
            eps: eps.or(self.file.eps).unwrap_or(d.eps),
            max_iter: max_iter.or(self.file.max_iter).unwrap_or(d.max_iter),
            ..d
        }
    }

    fn setup(&self, delta: Option<f64>, p_s: Option<f64>) -> Result<StudySetup, CliError> {
        Ok(StudySetup {
            convention: self.convention(),
            contention: self.contention(delta, p_s)?,
            optimize: self.optimize(None, None, None),
        })
    }
}

/// Rendered command output.
enum Output {
    Table(Table),
    Report(SimReport),
}

impl Output {
    fn render(&self, format: Format, precision: usize) -> String {
        match (self, format) {
            (Output::Table(t), Format::Csv) => t.to_csv(precision),
            (Output::Table(t), Format::Json) => json_text(&t.to_json()),
            (Output::Report(r), Format::Csv) => report_csv(r, precision),
            (Output::Report(r), Format::Json) => json_text(&serde_json::to_value(r).expect("report serializes")),
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn report_csv(r: &SimReport, precision: usize) -> String {
    let mut s = String::from(
        "empirical_throughput,ci_halfwidth_95,outage_fraction,mean_probes_per_transmission,total_rounds,transmissions,replications\n",
    );
    let ci = r.ci_halfwidth_95.map(|c| format_fixed(c, precision)).unwrap_or_default();
    let _ = writeln!(
        s,
        "{},{},{},{},{},{},{}",
        format_fixed(r.empirical_throughput, precision),
        ci,
        format_fixed(r.outage_fraction, precision),
        format_fixed(r.mean_probes_per_transmission, precision),
        r.total_rounds,
        r.transmissions,
        r.replications
    );
    s
}

fn solve_perfect(res: &Resolved<'_>, m: &ModelArgs) -> Result<Output, CliError> {
    let rho = res.rho(m)?;
    let cont = res.contention(m.delta, m.p_s)?;
    let x = solve_perfect_csi(rho, cont.delta(), cont.p_s())?;
    let mut t = Table::new(vec!["x_star".into()]);
    t.push(vec![Some(x)]);
    Ok(Output::Table(t))
}

fn optimize(res: &Resolved<'_>, a: &OptimizeArgs) -> Result<Output, CliError> {
    let ch = res.channel(&a.model)?;
    let cont = res.contention(a.model.delta, a.model.p_s)?;
    let trace = optimize_backoff(&ch, &cont, &res.optimize(a.x0, a.eps, a.max_iter))?;
    let mut t = Table::new(vec!["k".into(), "x_k".into(), "sigma_k".into()]).mark_integer("k");
    for it in &trace.iterates {
        t.push(vec![Some(it.k as f64), Some(it.x), it.sigma]);
    }
    Ok(Output::Table(t))
}

fn table(res: &Resolved<'_>, id: TableId) -> Result<Output, CliError> {
    let setup = res.setup(None, None)?;
    let t = match id {
        TableId::I => reproduce::convergence_by_rho(&setup, &reproduce::CONVERGENCE_RHOS)?,
        TableId::Ii => reproduce::convergence_by_alpha(&setup, &reproduce::CONVERGENCE_ALPHAS)?,
        TableId::Iii => reproduce::gain_by_rho(&setup, &reproduce::GAIN_RHOS)?,
        TableId::Iv => reproduce::gain_by_alpha(&setup, &reproduce::GAIN_ALPHAS)?,
    };
    Ok(Output::Table(t))
}

fn or_default(v: &[f64], default: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        default.to_vec()
    } else {
        v.to_vec()
    }
}

fn figure(res: &Resolved<'_>, a: &FigureArgs) -> Result<Output, CliError> {
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let setup = res.setup(a.delta, a.p_s)?;
    let t = match a.id {
        FigureId::PhiVersusSigma => {
            let alphas = or_default(&a.alpha, &[1.0]);
            let [alpha] = alphas[..] else {
                return Err(usage("figure 1 takes a single --alpha"));
            };
            reproduce::phi_versus_sigma(&setup, a.x, &or_default(&a.rho, &[1.0]), alpha, a.points)?
        }
        FigureId::PhiVersusThreshold => reproduce::phi_versus_threshold(
            &setup,
            &or_default(&a.rho, &[0.5, 1.0, 2.0]),
            &or_default(&a.alpha, &[1.0]),
            a.x_max,
            a.points,
        )?,
        FigureId::SigmaVersusAlpha => reproduce::sigma_versus_alpha(
            &setup,
            &or_default(&a.rho, &[1.0, 10.0]),
            &or_default(&a.alpha, &reproduce::DEFAULT_SIGMA_ALPHAS),
        )?,
        FigureId::ThroughputVersusTraining => {
            if a.rho.is_empty() {
                return Err(usage("figure 4 needs at least one --rho"));
            }
            let t_data = a.t_data.ok_or_else(|| usage("figure 4 needs --T (data slot length)"))?;
            if !(0.0 < a.tau_min && a.tau_min < a.tau_max) {
                return Err(usage("figure 4 needs 0 < --tau-min < --tau-max"));
            }
            let taus = reproduce::logspace(a.tau_min, a.tau_max, a.points);
            reproduce::throughput_versus_training(&setup, &a.rho, t_data, &taus)?
        }
    };
    Ok(Output::Table(t))
}

fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| usage(format!("{SEED_ENV} is not an unsigned integer: '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn simulate(res: &Resolved<'_>, a: &SimulateArgs) -> Result<Output, CliError> {
    let f = &res.file;
    let ch = res.channel(&a.model)?;
    let cont = res.contention(a.model.delta, a.model.p_s)?;
    let auto = a.auto_policy || f.auto_policy.unwrap_or(false);
    let threshold = a.threshold.or(f.threshold);
    let sigma = a.sigma.or(f.sigma);

    let policy = if auto {
        if threshold.is_some() || sigma.is_some() {
            return Err(usage("--auto-policy conflicts with --threshold and --sigma"));
        }
        let trace = optimize_backoff(&ch, &cont, &res.optimize(None, None, None))?;
        if ch.is_perfect() {
            SimPolicy::PerfectCsi { threshold_x: trace.x_star }
        } else {
            SimPolicy::Linear(trace.policy())
        }
    } else {
        let x = threshold.ok_or_else(|| usage("simulate needs --threshold or --auto-policy"))?;
        if ch.is_perfect() {
            SimPolicy::PerfectCsi { threshold_x: x }
        } else {
            let s = sigma.ok_or_else(|| usage("simulate on a noisy channel needs --sigma"))?;
            SimPolicy::Linear(LinearBackoffPolicy::new(s, x)?)
        }
    };

    let mut cfg = SimConfig::new(ch, cont, policy);
    cfg.num_transmissions = a.episodes.or(f.episodes).unwrap_or(100_000);
    cfg.num_replications = a.replications.or(f.replications).unwrap_or(1);
    cfg.seed = match a.seed.or(f.seed) {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    cfg.parallel = a.parallel || f.parallel.unwrap_or(false);
    cfg.probe_cap = a.probe_cap.or(f.probe_cap).unwrap_or(DEFAULT_PROBE_CAP);

    let report = if cfg.num_replications > 1 { run_replications(&cfg)? } else { run_simulation(&cfg)? };
    Ok(Output::Report(report))
}

/// Runs a parsed command and returns the rendered output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let file = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let res = Resolved { file, global: &cli.global };
    let output = match &cli.command {
        Command::SolvePerfect(m) => solve_perfect(&res, m)?,
        Command::Optimize(a) => optimize(&res, a)?,
        Command::Table { id } => table(&res, *id)?,
        Command::Figure(a) => figure(&res, a)?,
        Command::Simulate(a) => simulate(&res, a)?,
    };
    Ok(output.render(cli.global.format, cli.global.precision))
}

/// Parses `args`, runs the command and writes output; errors go to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli).and_then(|text| emit(&cli.global.out, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dos-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("dos-lab").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = RunConfig::from_toml("rho = 1.0\nbogus = 2\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let cfg = RunConfig::from_toml("rho = 2.0\nsnr_convention = \"attenuated\"\nseed = 9\n").unwrap();
        assert_eq!(cfg.rho, Some(2.0));
        assert_eq!(cfg.snr_convention, Some(SnrConvention::Attenuated));
        assert_eq!(cfg.seed, Some(9));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("dos-lab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "rho = 0.5\n").unwrap();
        let p = path.to_str().unwrap();
        let from_file = exec(&["--config", p, "solve-perfect"]).unwrap();
        assert!(from_file.starts_with("x_star\n0.384"), "{from_file}");
        let overridden = exec(&["--config", p, "solve-perfect", "--rho", "1"]).unwrap();
        assert!(overridden.starts_with("x_star\n0.610"), "{overridden}");
    }

    #[test]
    fn error_classes() {
        assert_eq!(exec(&["solve-perfect"]).unwrap_err().exit_code(), 2);
        assert_eq!(exec(&["solve-perfect", "--rho", "0"]).unwrap_err().exit_code(), 3);
        assert_eq!(
            exec(&["optimize", "--rho", "1", "--alpha", "1", "--max-iter", "1", "--eps", "1e-12"])
                .unwrap_err()
                .exit_code(),
            4
        );
        let starve = ["simulate", "--rho", "1", "--alpha", "1", "--sigma", "0.3", "--threshold", "1e9"];
        assert_eq!(exec(&starve).unwrap_err().exit_code(), 5);
        assert_eq!(exec(&["figure", "4", "--rho", "1"]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn optimize_perfect_route() {
        let out = exec(&["optimize", "--rho", "1", "--alpha", "0"]).unwrap();
        let last = out.lines().last().unwrap();
        assert!(last.ends_with(",1.000000"), "{out}");
        assert!(last.contains(",0.610"), "{out}");
    }

    #[test]
    fn json_output() {
        let out = exec(&["--format", "json", "solve-perfect", "--rho", "1"]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v[0]["x_star"].as_f64().unwrap() - 0.6104).abs() < 1e-3);
    }
}
