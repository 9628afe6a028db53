//! Command-line front end: `run`, `gen`, `verify`, `sweep` and `oracle`.
//!
//! Settings resolve as flag, then `--config` file, then built-in default.
//! The config file holds `key = value` lines using the long flag names
//! (`p-range = 1..10`); `#` starts a comment.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! is still written), 2 for usage, parse and oracle-size errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::instance::{generate, parse_instance, Instance, InstanceError, WorkloadSpec};
use crate::oracle::{OracleError, DEFAULT_LIMIT};
use crate::rational::Rational;
use crate::report::{run_report, RunOptions, RunReport, SweepFailure, SweepReport, SweepRow, REPORT_VERSION, TOOL_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Instance {
        path: String,
        #[source]
        source: InstanceError,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Parser)]
#[command(name = "rejsched", version, about = "Online scheduling with rejection: simulate, certify, compare")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an instance, build the dual certificate and check it.
    Run {
        instance: PathBuf,
        /// Also compare against the exhaustive optimum and the baselines.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic instance.
    Gen {
        #[command(flatten)]
        workload: WorkloadFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full check suite, prefix-replay monotonicity included.
    Verify {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate and run many instances per epsilon; write an aggregate.
    Sweep {
        #[command(flatten)]
        workload: WorkloadFlags,
        /// Instances per epsilon.
        #[arg(long)]
        count: Option<usize>,
        /// Comma-separated list, e.g. `1/4,1/2`.
        #[arg(long)]
        epsilons: Option<String>,
        /// Run the oracle on instances small enough for it.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare against the exhaustive optimum and the baselines.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Default, Args)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override epsilon (a rational such as `1/2`).
    #[arg(long)]
    pub epsilon: Option<Rational>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub oracle_limit: Option<usize>,
    /// File of `key = value` defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct WorkloadFlags {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Inclusive range `a..b` or `a-b`.
    #[arg(long)]
    pub p_range: Option<String>,
    /// Inclusive range `a..b` or `a-b`.
    #[arg(long)]
    pub w_range: Option<String>,
    #[arg(long)]
    pub mean_interarrival: Option<u64>,
}

const CONFIG_KEYS: &[&str] = &[
    "out",
    "epsilon",
    "seed",
    "oracle-limit",
    "n",
    "m",
    "p-range",
    "w-range",
    "mean-interarrival",
    "count",
    "epsilons",
];

/// Parsed `key = value` config file.
#[derive(Debug, Default)]
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = read(path)?;
        Config::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    fn parse(text: &str) -> Result<Config, String> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", k + 1))?;
            let key = key.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", k + 1));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Config(map))
    }

    /// Flag value if given, else the config value, else `None`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
        }
    }
}

/// Parses an inclusive range written `a..b` or `a-b`.
pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .ok_or_else(|| format!("range `{s}`: expected a..b or a-b"))?;
    let lo = a.trim().parse().map_err(|e| format!("range `{s}`: {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("range `{s}`: {e}"))?;
    if lo > hi {
        return Err(format!("range `{s}` is empty"));
    }
    Ok((lo, hi))
}

fn parse_epsilons(s: &str) -> Result<Vec<Rational>, CliError> {
    s.split(',')
        .map(|e| {
            e.trim()
                .parse()
                .map_err(|err| CliError::Usage(format!("epsilon `{}`: {err}", e.trim())))
        })
        .collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_instance(path: &Path, epsilon: Option<Rational>) -> Result<Instance, CliError> {
    let wrap = |source| CliError::Instance {
        path: path.display().to_string(),
        source,
    };
    let inst = parse_instance(&read(path)?).map_err(wrap)?;
    match epsilon {
        Some(eps) => inst.with_epsilon(eps).map_err(wrap),
        None => Ok(inst),
    }
}

fn workload(flags: &WorkloadFlags, cfg: &Config, seed: u64, epsilon: Rational) -> Result<WorkloadSpec, CliError> {
    let range = |flag: &Option<String>, key: &str, default: (u64, u64)| -> Result<(u64, u64), CliError> {
        match cfg.pick(flag.clone(), key)? {
            None => Ok(default),
            Some(s) => parse_range(&s).map_err(CliError::Usage),
        }
    };
    let (p_min, p_max) = range(&flags.p_range, "p-range", (1, 10))?;
    let (w_min, w_max) = range(&flags.w_range, "w-range", (1, 10))?;
    let spec = WorkloadSpec {
        n: cfg.pick(flags.n, "n")?.unwrap_or(20),
        m: cfg.pick(flags.m, "m")?.unwrap_or(2),
        p_min,
        p_max,
        w_min,
        w_max,
        mean_interarrival: cfg.pick(flags.mean_interarrival, "mean-interarrival")?.unwrap_or(2),
        seed,
        epsilon,
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

fn oracle_limit(common: &Common, cfg: &Config, stderr: &mut dyn Write) -> Result<usize, CliError> {
    let limit = cfg.pick(common.oracle_limit, "oracle-limit")?.unwrap_or(DEFAULT_LIMIT);
    if limit > DEFAULT_LIMIT {
        let _ = writeln!(stderr, "warning: oracle limit {limit} is above {DEFAULT_LIMIT}; enumeration may take very long");
    }
    Ok(limit)
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |path: &str| {
        let path = path.to_string();
        move |source| CliError::Io { path, source }
    };
    match out {
        Some(path) => fs::write(path, text).map_err(io(&path.display().to_string())),
        None => stdout.write_all(text.as_bytes()).map_err(io("<stdout>")),
    }
}

fn finish_run(report: &RunReport, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    emit(out, &report.to_json(), stdout)?;
    Ok(if report.all_pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn single_run(
    name: &str,
    instance: &Path,
    common: &Common,
    oracle: bool,
    monotonicity: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let cfg = Config::load(common.config.as_deref())?;
    let epsilon = cfg.pick(common.epsilon.clone(), "epsilon")?;
    let inst = load_instance(instance, epsilon)?;
    let opts = RunOptions {
        command: name.to_string(),
        seed: cfg.pick(common.seed, "seed")?,
        monotonicity,
        oracle_limit: if oracle { Some(oracle_limit(common, &cfg, stderr)?) } else { None },
    };
    let out = cfg.pick(common.out.clone(), "out")?;
    finish_run(&run_report(&inst, &opts)?, out.as_deref(), stdout)
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { instance, oracle, common } => single_run("run", &instance, &common, oracle, false, stdout, stderr),
        Command::Verify { instance, common } => single_run("verify", &instance, &common, false, true, stdout, stderr),
        Command::Oracle { instance, common } => single_run("oracle", &instance, &common, true, false, stdout, stderr),
        Command::Gen { workload: flags, common } => {
            let cfg = Config::load(common.config.as_deref())?;
            let seed = cfg.pick(common.seed, "seed")?.unwrap_or(0);
            let eps = cfg.pick(common.epsilon, "epsilon")?.unwrap_or_else(|| Rational::new(1, 2));
            let spec = workload(&flags, &cfg, seed, eps)?;
            let inst = generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
            let out = cfg.pick(common.out, "out")?;
            emit(out.as_deref(), &inst.to_jsonl(), stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Sweep {
            workload: flags,
            count,
            epsilons,
            oracle,
            common,
        } => {
            let cfg = Config::load(common.config.as_deref())?;
            let seed = cfg.pick(common.seed, "seed")?.unwrap_or(0);
            let count = cfg.pick(count, "count")?.unwrap_or(100);
            let epsilons = match cfg.pick(epsilons, "epsilons")? {
                Some(list) => parse_epsilons(&list)?,
                None => match cfg.pick(common.epsilon.clone(), "epsilon")? {
                    Some(eps) => vec![eps],
                    None => vec![Rational::new(1, 4), Rational::new(1, 2)],
                },
            };
            let limit = if oracle { Some(oracle_limit(&common, &cfg, stderr)?) } else { None };
            let specs = epsilons
                .iter()
                .map(|eps| workload(&flags, &cfg, seed, eps.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            let report = sweep(&specs, count, limit);
            let out = cfg.pick(common.out, "out")?;
            emit(out.as_deref(), &report.to_json(), stdout)?;
            Ok(if report.all_pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Runs `count` instances per workload, seeds `seed, seed+1, ...`.
///
/// Runs go in parallel; rows and failures are assembled in input order, so
/// the report does not depend on scheduling.
pub fn sweep(specs: &[WorkloadSpec], count: usize, oracle_limit: Option<usize>) -> SweepReport {
    let mut rows = Vec::with_capacity(specs.len());
    let mut failures = Vec::new();
    for spec in specs {
        let reports: Vec<RunReport> = (0..count)
            .into_par_iter()
            .map(|k| {
                let spec = WorkloadSpec {
                    seed: spec.seed.wrapping_add(k as u64),
                    ..spec.clone()
                };
                let inst = generate(&spec).expect("validated workload");
                let opts = RunOptions {
                    command: "sweep".to_string(),
                    seed: Some(spec.seed),
                    monotonicity: false,
                    oracle_limit: oracle_limit.filter(|&l| inst.len() <= l),
                };
                run_report(&inst, &opts).expect("size checked against the oracle limit")
            })
            .collect();
        for r in reports.iter().filter(|r| !r.all_pass) {
            failures.push(SweepFailure {
                epsilon: r.epsilon.clone(),
                seed: r.seed.expect("sweep runs record their seed"),
                failed: r.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect(),
            });
        }
        rows.push(SweepRow::aggregate(&spec.epsilon, &reports));
    }
    SweepReport {
        report_version: REPORT_VERSION,
        tool_version: TOOL_VERSION,
        seed: specs.first().map_or(0, |s| s.seed),
        count,
        all_pass: failures.is_empty(),
        rows,
        failures,
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_PASS
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
