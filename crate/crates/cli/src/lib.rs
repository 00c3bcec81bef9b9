//! Batch driver: builds instances, runs check suites and demos, and writes reports.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

pub mod fixture;
pub mod report;
pub mod suites;

pub use report::{Format, Report};

pub const CAP_ENV: &str = "TRACE_REL_CC_CAP";

#[derive(Debug, Parser)]
#[command(name = "trace-rel", version, about = "Trace-relating compiler-correctness checks over finite trace models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one criterion suite on an instance or on fixture files.
    Check {
        suite: Suite,
        #[command(flatten)]
        opts: Options,
    },
    /// Reproduce the claim of one of the bundled instances.
    Demo {
        demo: Demo,
        #[command(flatten)]
        opts: Options,
    },
    /// Run every demo and emit one combined report.
    Report {
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Trinity,
    Cc,
    Tp,
    Schp,
    Hc,
    Safety,
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Diffvalues,
    Sends,
    Ub,
    Resource,
    Robust,
    Ani,
}

impl Demo {
    pub const ALL: [Demo; 6] = [Demo::Diffvalues, Demo::Sends, Demo::Ub, Demo::Resource, Demo::Robust, Demo::Ani];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    /// Expressions with booleans compiled to naturals.
    Dv,
    /// The same compiler without the branch swap for negated conditions.
    DvMutant,
    /// Pair-valued sends compiled to sequences of natural sends.
    Sends,
    /// Identity compiler whose target runs out of fuel.
    Fuel,
    /// Seeded random universes, relation and behaviors.
    Random,
    /// Partial programs linked with contexts; non-robust suites use the union over contexts.
    Robust,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Instance to check; omitted with --universe/--relation, the fixtures alone are checked.
    #[arg(long, value_enum)]
    pub instance: Option<InstanceKind>,
    /// Enumeration depth: AST height (dv), command size (sends), program size (robust).
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=64))]
    pub depth: Option<u32>,
    /// Length bound for model universes and fuel runs.
    #[arg(long, alias = "max-len", value_parser = clap::value_parser!(u32).range(0..=64))]
    pub max_trace_len: Option<u32>,
    /// Size bound for robust contexts.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    pub context_size: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=1000))]
    pub fuel: Option<u32>,
    /// Number of regular events e1..eN in the undefined-behavior and resource models.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
    pub sigma: Option<u32>,
    /// Universe size of the random instance.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    pub size: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for running checks.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub jobs: u32,
    /// Bound on enumerated programs and on traces per universe.
    #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock per check in the report.
    #[arg(long)]
    pub timings: bool,
    /// Relation fixture replacing the instance relation.
    #[arg(long)]
    pub relation: Option<PathBuf>,
    /// Universe fixture; repeat for source and target.
    #[arg(long)]
    pub universe: Vec<PathBuf>,
    /// Property fixture checked for preservation by the `tp` suite; repeatable.
    #[arg(long)]
    pub property: Vec<PathBuf>,
    /// Program set fixture replacing the enumerated programs.
    #[arg(long)]
    pub programs: Option<PathBuf>,
    /// Write the relation actually used to this path.
    #[arg(long)]
    pub save_relation: Option<PathBuf>,
}

/// The command-line spelling of a value.
pub fn name_of<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

impl Options {
    /// Everything that determines the verdicts; output settings are left out.
    pub fn echo(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        if let Some(i) = self.instance {
            put("instance", Value::from(name_of(i)));
        }
        for (k, v) in [
            ("depth", self.depth),
            ("max_trace_len", self.max_trace_len),
            ("context_size", self.context_size),
            ("fuel", self.fuel),
            ("sigma", self.sigma),
            ("size", self.size),
        ] {
            if let Some(v) = v {
                put(k, Value::from(v));
            }
        }
        put("cap", Value::from(self.cap));
        let path = |p: &PathBuf| Value::from(p.display().to_string());
        if let Some(p) = &self.relation {
            put("relation", path(p));
        }
        if let Some(p) = &self.programs {
            put("programs", path(p));
        }
        if !self.universe.is_empty() {
            put("universe", Value::Array(self.universe.iter().map(path).collect()));
        }
        if !self.property.is_empty() {
            put("property", Value::Array(self.property.iter().map(path).collect()));
        }
        m
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Cap(String),
    Fixture(fixture::FixtureError),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Fixture(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Cap(m) => write!(f, "cap exceeded: {m}"),
            CliError::Fixture(e) => write!(f, "fixture error: {e}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<trace_rel_core::Error> for CliError {
    fn from(e: trace_rel_core::Error) -> Self {
        match e {
            trace_rel_core::Error::CapExceeded { .. } => CliError::Cap(e.to_string()),
            e => CliError::Failed(e.to_string()),
        }
    }
}

impl From<fixture::FixtureError> for CliError {
    fn from(e: fixture::FixtureError) -> Self {
        CliError::Fixture(e)
    }
}

/// Applies the cap override from the environment.
pub fn resolve_cap(command: &mut Command, env: Option<&str>) -> Result<(), CliError> {
    let Some(text) = env else { return Ok(()) };
    let cap: u64 = text.trim().parse().ok().filter(|&c| c > 0).ok_or_else(|| CliError::Usage(format!("{CAP_ENV} must be a positive integer, got `{text}`")))?;
    match command {
        Command::Check { opts, .. } | Command::Demo { opts, .. } | Command::Report { opts } => opts.cap = cap,
    }
    Ok(())
}

/// Runs a parsed command and returns its report.
pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Check { suite, opts } => suites::check(*suite, opts),
        Command::Demo { demo, opts } => suites::demo(*demo, opts),
        Command::Report { opts } => suites::report_all(opts),
    }
}

fn options(command: &Command) -> &Options {
    match command {
        Command::Check { opts, .. } | Command::Demo { opts, .. } | Command::Report { opts } => opts,
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env = std::env::var(CAP_ENV).ok();
    if let Err(e) = resolve_cap(&mut cli.command, env.as_deref()) {
        eprintln!("{e}");
        return e.exit_code();
    }
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let opts = options(&cli.command);
    let text = report.render(opts.format);
    match &opts.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
