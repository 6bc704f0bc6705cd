//! `gmeasure`: reproducible reports on g-measure kernels.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 spec or input error, 3 resource
//! limit, 4 diagnostic or simulation failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmeasure_core::simulate::{Init, RNG_ALGORITHM};
use gmeasure_core::{Error, VERSION};
use serde_json::{json, Value};

use commands::{Artifact, Context};
use config::{ConfigOverrides, EstimateChoice, RunConfig, SpecFile};

#[derive(Debug)]
pub enum CliError {
    Spec(String),
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Spec(_) | CliError::Core(Error::Input(_) | Error::Spec(_)) => 2,
            CliError::Core(Error::Resource(_)) => 3,
            CliError::Core(Error::Diagnostic { .. } | Error::Simulation(_)) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Spec(m) => write!(f, "invalid spec: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "gmeasure", version, about = "Discontinuity trees, pressure and stationary measures for g-functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Discontinuity tree, growth rate, shift stability and skeleton leaves.
    Tree,
    /// Upper and lower pressure of the discontinuity set per depth.
    Pressure,
    /// Every hypothesis check in one report.
    Hypotheses,
    /// Stationary estimate with its diagnostics.
    Stationary,
    /// Sample a path and compare its frequencies with the discontinuity set.
    Simulate,
    /// Run every command and write all artifacts into the `--out` directory.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Tree => "tree",
            Command::Pressure => "pressure",
            Command::Hypotheses => "hypotheses",
            Command::Stationary => "stationary",
            Command::Simulate => "simulate",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Opts {
    /// Kernel spec file, or a report written by this tool.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output file (a directory for `report`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the sampled path as symbol text.
    #[arg(long, global = true)]
    path_out: Option<PathBuf>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true)]
    h1_max: Option<usize>,
    #[arg(long, global = true)]
    order: Option<usize>,
    #[arg(long, global = true, value_enum)]
    estimate: Option<EstimateChoice>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    length: Option<usize>,
    #[arg(long, global = true)]
    burn_in: Option<usize>,
    /// `renewal`, or `word:<WORD>:<PADDING>` with the most recent symbol last.
    #[arg(long, global = true, value_parser = parse_init)]
    init: Option<Init>,
    #[arg(long, global = true)]
    truncation_depth: Option<usize>,
    /// Fail instead of sampling from midpoints when the window leaves g open.
    #[arg(long, global = true)]
    no_midpoint_fallback: bool,
    #[arg(long, global = true)]
    empirical_max_len: Option<usize>,
    #[arg(long, global = true)]
    budget_states: Option<usize>,
    #[arg(long, global = true)]
    budget_depth: Option<usize>,
    #[arg(long, global = true)]
    tail_terms: Option<usize>,
}

fn parse_init(text: &str) -> Result<Init, String> {
    if text == "renewal" {
        return Ok(Init::RenewalStationary);
    }
    let rest = text.strip_prefix("word:").ok_or("expected `renewal` or `word:<WORD>:<PADDING>`")?;
    let (word, padding) = rest.rsplit_once(':').ok_or("expected `word:<WORD>:<PADDING>`")?;
    let mut chars = padding.chars();
    match (chars.next(), chars.next()) {
        (Some(p), None) => Ok(Init::Word { word: word.into(), padding: p }),
        _ => Err("padding must be a single symbol".into()),
    }
}

impl Opts {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            depth: self.depth,
            n_max: self.n_max,
            h1_max: self.h1_max,
            order: self.order,
            estimate: self.estimate,
            seed: self.seed,
            length: self.length,
            burn_in: self.burn_in,
            init: self.init.clone(),
            truncation_depth: self.truncation_depth,
            midpoint_fallback: self.no_midpoint_fallback.then_some(false),
            empirical_max_len: self.empirical_max_len,
            budget_states: self.budget_states,
            budget_depth: self.budget_depth,
            tail_terms: self.tail_terms,
        }
    }
}

fn envelope(command: Command, spec: &SpecFile, cfg: &RunConfig, result: Value) -> Value {
    let mut document = spec.document.clone();
    document["config"] = serde_json::to_value(cfg).expect("config serializes");
    json!({
        "tool": "gmeasure",
        "version": VERSION,
        "command": command.name(),
        "rng": RNG_ALGORITHM,
        "spec": document,
        "result": result,
    })
}

fn single(command: Command, cx: &Context) -> Result<Artifact, CliError> {
    match command {
        Command::Tree => commands::tree(cx),
        Command::Pressure => commands::pressure(cx),
        Command::Hypotheses => commands::hypotheses(cx),
        Command::Stationary => commands::stationary(cx),
        Command::Simulate => commands::simulate(cx),
        Command::Report => unreachable!("report is not a single command"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let spec_path = cli.opts.spec.as_ref().ok_or_else(|| CliError::Spec("--spec is required".into()))?;
    let spec = SpecFile::load(spec_path)?;
    let kernel = spec.kernel.build()?;
    let padding = kernel.alphabet().labels()[0];
    let cfg = RunConfig::resolve(cli.opts.overrides().over(spec.config.clone()), padding)?;
    let cx = Context { spec: &spec.kernel, kernel, cfg: &cfg };

    if cli.command == Command::Report {
        let dir = cli.opts.out.as_ref().ok_or_else(|| CliError::Spec("report needs --out DIR".into()))?;
        let parts = [Command::Tree, Command::Pressure, Command::Hypotheses, Command::Stationary, Command::Simulate];
        let mut files = Vec::new();
        let mut summary = serde_json::Map::new();
        for part in parts {
            let artifact = single(part, &cx)?;
            let doc = envelope(part, &spec, &cfg, artifact.result);
            files.push((format!("{}.json", part.name()), output::pretty(&doc)));
            files.push((format!("{}.csv", part.name()), artifact.csv));
            if let Some(text) = artifact.path_text {
                files.push(("path.txt".into(), text));
            }
            summary.insert(part.name().into(), json!(format!("{}.json", part.name())));
        }
        let manifest = envelope(Command::Report, &spec, &cfg, Value::Object(summary));
        files.push(("report.json".into(), output::pretty(&manifest)));
        return output::write_dir(dir, &files);
    }

    let artifact = single(cli.command, &cx)?;
    if let (Some(path), Some(text)) = (&cli.opts.path_out, &artifact.path_text) {
        output::write_file(path, text)?;
    }
    let body = match cli.opts.format {
        Format::Json => output::pretty(&envelope(cli.command, &spec, &cfg, artifact.result)),
        Format::Csv => artifact.csv,
    };
    match &cli.opts.out {
        Some(path) => output::write_file(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gmeasure: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
