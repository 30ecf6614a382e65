//! Command-line front end: reliability curves, comparison tables, Monte
//! Carlo estimates and phase diagrams.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use moonrel::analysis::{build_report, enumerate_architectures, uniform_grid, ReportOptions};
use moonrel::ctmc::{enumerate_states, export_dot, is_operational};
use moonrel::montecarlo::{estimate_many, RNG_ALGORITHM};
use moonrel::{ArchitectureSpec, Layer, McConfig, Solver, DEFAULT_LAMBDA_MCU, DEFAULT_LAMBDA_SENSOR};
use thiserror::Error;

use crate::config::ConfigFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

fn usage(e: moonrel::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: moonrel::Error) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "moonrel", version, about = "Reliability of SooN/MooN sensor and MCU architectures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// R(t) of one or more architectures on a uniform time grid.
    Curve {
        #[arg(required = true, value_name = "SooN/MooN")]
        architectures: Vec<String>,
    },
    /// Enumerate, classify and rank every architecture up to the size limits.
    Compare,
    /// Phase diagram of the Markov chain in DOT format.
    Dot {
        #[arg(value_name = "SooN/MooN")]
        architecture: String,
    },
    /// Monte Carlo estimate of R(t) with 99% confidence half-widths.
    Mc {
        #[arg(required = true, value_name = "SooN/MooN")]
        architectures: Vec<String>,
    },
    /// List the chain's states in solver order.
    States {
        #[arg(value_name = "SooN/MooN")]
        architecture: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Ctmc,
    Analytic,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Ctmc => Solver::Ctmc,
            SolverArg::Analytic => Solver::Analytic,
        }
    }
}

#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// Sensor failure rate, per hour [default: 1e-5]
    #[arg(long, global = true)]
    pub lambda_s: Option<f64>,
    /// MCU failure rate, per hour [default: 1e-4]
    #[arg(long, global = true)]
    pub lambda_m: Option<f64>,
    /// Time horizon in hours [default: 30000]
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of grid points on [0, tmax] [default: 301]
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// [default: ctmc]
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverArg>,
    /// Monte Carlo runs [default: 100000]
    #[arg(long, global = true)]
    pub runs: Option<u64>,
    /// Monte Carlo seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// [default: 3]
    #[arg(long, global = true)]
    pub max_sensors: Option<u32>,
    /// [default: 4]
    #[arg(long, global = true)]
    pub max_mcus: Option<u32>,
    /// Comma-separated report horizons in hours [default: 10000,20000,30000]
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// key=value settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Flags merged with the config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub tmax: f64,
    pub points: usize,
    pub solver: Solver,
    pub runs: u64,
    pub seed: u64,
    pub max_sensors: u32,
    pub max_mcus: u32,
    pub horizons: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Self::merge(flags, &file)
    }

    pub fn merge(flags: &Flags, file: &ConfigFile) -> Result<Self, CliError> {
        let solver = match flags.solver {
            Some(s) => s.into(),
            None => file.get::<Solver>("solver")?.unwrap_or_default(),
        };
        let format = match flags.format {
            Some(f) => Some(f),
            None => file
                .get::<String>("format")?
                .map(|s| {
                    Format::from_str(&s, true)
                        .map_err(|_| CliError::Usage(format!("config key format: invalid value {s:?}")))
                })
                .transpose()?,
        };
        let horizons = match &flags.horizons {
            Some(h) => h.clone(),
            None => match file.get::<String>("horizons")? {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Usage(format!("config key horizons: invalid value {s:?}")))?,
                None => ReportOptions::default().horizons,
            },
        };
        let settings = Settings {
            lambda_s: pick(flags.lambda_s, file, "lambda-s", DEFAULT_LAMBDA_SENSOR)?,
            lambda_m: pick(flags.lambda_m, file, "lambda-m", DEFAULT_LAMBDA_MCU)?,
            tmax: pick(flags.tmax, file, "tmax", 30_000.0)?,
            points: pick(flags.points, file, "points", 301)?,
            solver,
            runs: pick(flags.runs, file, "runs", 100_000)?,
            seed: pick(flags.seed, file, "seed", 1)?,
            max_sensors: pick(flags.max_sensors, file, "max-sensors", 3)?,
            max_mcus: pick(flags.max_mcus, file, "max-mcus", 4)?,
            horizons,
            out: match &flags.out {
                Some(p) => Some(p.clone()),
                None => file.get::<PathBuf>("out")?,
            },
            format,
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("--lambda-s", self.lambda_s), ("--lambda-m", self.lambda_m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.tmax.is_finite() && self.tmax > 0.0) {
            return Err(CliError::Usage(format!("--tmax must be > 0, got {}", self.tmax)));
        }
        if self.points < 2 {
            return Err(CliError::Usage("--points must be >= 2".into()));
        }
        if self.runs < 1 {
            return Err(CliError::Usage("--runs must be >= 1".into()));
        }
        if self.max_sensors < 1 || self.max_mcus < 1 {
            return Err(CliError::Usage("--max-sensors and --max-mcus must be >= 1".into()));
        }
        if self.horizons.is_empty()
            || self.horizons.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || self.horizons.windows(2).any(|w| w[1] < w[0])
        {
            return Err(CliError::Usage("--horizons must be ascending times >= 0".into()));
        }
        Ok(())
    }

    fn spec(&self, label: &str) -> Result<ArchitectureSpec, CliError> {
        ArchitectureSpec::parse(label, self.lambda_s, self.lambda_m).map_err(usage)
    }

    fn reference(&self) -> Result<ArchitectureSpec, CliError> {
        ArchitectureSpec::new(Layer::new(1, 1), Layer::new(1, 1), self.lambda_s, self.lambda_m)
            .map_err(usage)
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        uniform_grid(self.tmax, self.points).map_err(usage)
    }
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T, CliError> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}

fn require_format(settings: &Settings, allowed: &[Format], default: Format) -> Result<Format, CliError> {
    let format = settings.format.unwrap_or(default);
    if allowed.contains(&format) {
        Ok(format)
    } else {
        Err(CliError::Usage(format!(
            "--format {} is not available for this subcommand",
            format.to_possible_value().unwrap().get_name()
        )))
    }
}

/// A rendered output document and where it should go.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub document: String,
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Rendered, CliError> {
    let settings = Settings::resolve(&cli.flags)?;
    let document = match &cli.command {
        Command::Curve { architectures } => cmd_curve(&settings, architectures),
        Command::Compare => cmd_compare(&settings),
        Command::Dot { architecture } => cmd_dot(&settings, architecture),
        Command::Mc { architectures } => cmd_mc(&settings, architectures),
        Command::States { architecture } => cmd_states(&settings, architecture),
    }?;
    Ok(Rendered {
        document,
        out: settings.out,
    })
}

pub fn cmd_curve(settings: &Settings, labels: &[String]) -> Result<String, CliError> {
    let format = require_format(settings, &[Format::Csv, Format::Svg], Format::Csv)?;
    let specs = labels
        .iter()
        .map(|l| settings.spec(l))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = settings.grid()?;
    let mut curves = specs
        .iter()
        .map(|s| settings.solver.curve(s, &grid))
        .collect::<Result<Vec<_>, _>>()
        .map_err(compute)?;

    if format == Format::Svg {
        let reference = settings.reference()?;
        if !specs.iter().any(|s| s.is_reference()) {
            curves.push(settings.solver.curve(&reference, &grid).map_err(compute)?);
        }
        return Ok(svg::render(&curves, &reference.label()));
    }

    let mut out = String::from("t_hours");
    for c in &curves {
        write!(out, ",{}", c.label()).unwrap();
    }
    out.push('\n');
    for (i, t) in grid.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for c in &curves {
            write!(out, ",{}", c.values()[i]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_compare(settings: &Settings) -> Result<String, CliError> {
    require_format(settings, &[Format::Csv], Format::Csv)?;
    let specs = enumerate_architectures(
        settings.max_sensors,
        settings.max_mcus,
        settings.lambda_s,
        settings.lambda_m,
    )
    .map_err(usage)?;
    let reference = settings.reference()?;
    let options = ReportOptions {
        horizons: settings.horizons.clone(),
        crossing_horizon: settings.tmax,
        solver: settings.solver,
    };
    let report = build_report(&specs, &options, &reference).map_err(compute)?;
    let mut out = format!(
        "# lambda_s={} lambda_m={} solver={} reference={} crossing_horizon_hours={}\n",
        settings.lambda_s,
        settings.lambda_m,
        settings.solver.tag().as_str(),
        report.reference,
        settings.tmax
    );
    out.push_str(&report.to_csv());
    Ok(out)
}

pub fn cmd_dot(settings: &Settings, label: &str) -> Result<String, CliError> {
    require_format(settings, &[Format::Dot], Format::Dot)?;
    Ok(export_dot(&settings.spec(label)?))
}

pub fn cmd_mc(settings: &Settings, labels: &[String]) -> Result<String, CliError> {
    require_format(settings, &[Format::Csv], Format::Csv)?;
    let specs = labels
        .iter()
        .map(|l| settings.spec(l))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = McConfig::new(settings.runs, settings.seed, settings.grid()?).map_err(usage)?;
    let estimates = estimate_many(&specs, &cfg);

    let mut out = format!(
        "# seed={} runs={} rng={}\n",
        settings.seed, settings.runs, RNG_ALGORITHM
    );
    if let [only] = estimates.as_slice() {
        writeln!(out, "# architecture={}", only.label).unwrap();
        out.push_str("t_hours,r_hat,ci99_halfwidth\n");
    } else {
        out.push_str("t_hours");
        for e in &estimates {
            write!(out, ",r_hat_{0},ci99_halfwidth_{0}", e.label).unwrap();
        }
        out.push('\n');
    }
    for (i, t) in cfg.t_grid().iter().enumerate() {
        write!(out, "{t}").unwrap();
        for e in &estimates {
            write!(out, ",{},{}", e.estimate(i), e.half_width(i)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_states(settings: &Settings, label: &str) -> Result<String, CliError> {
    require_format(settings, &[Format::Csv], Format::Csv)?;
    let spec = settings.spec(label)?;
    let mut out = String::from("index,m,s,operational\n");
    for (i, st) in enumerate_states(&spec).iter() {
        writeln!(out, "{i},{},{},{}", st.m, st.s, is_operational(&spec, st)).unwrap();
    }
    Ok(out)
}

/// Parses `args`, runs the command and writes its output to `--out` or
/// `stdout`. Returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = run(&cli).and_then(|rendered| {
        let doc = rendered.document;
        match rendered.out {
            Some(path) => std::fs::write(&path, doc)
                .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display()))),
            None => stdout
                .write_all(doc.as_bytes())
                .map_err(|e| CliError::Compute(format!("cannot write output: {e}"))),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
