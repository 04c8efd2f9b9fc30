use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foliate::parse::parse_scalar;
use foliate_cli::run::{self, final_form};
use foliate_cli::{AnalysisConfig, CliError, Report, Setup};

#[derive(Parser)]
#[command(name = "foliate", version, about = "Blow-ups, criteria, holonomy and sections for cuspidal nilpotent foliations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Truncation order, overriding the config.
    #[arg(long, global = true)]
    order: Option<u32>,
    /// Numeric tolerance, overriding the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Exact rational arithmetic (the default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Convert alpha to floating point before the analysis.
    #[arg(long, global = true)]
    float: bool,
    /// Write the JSON report here and print a summary instead.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check listed in the config.
    Analyze { config: PathBuf },
    /// Print the transforms of a chain of blow-ups.
    Blowup {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: u32,
        /// Blow up the planar form at the origin instead of the axes of the 3D form.
        #[arg(long)]
        planar: bool,
    },
    /// Singular points on the first exceptional component and their classes.
    Classify { config: PathBuf },
    /// Holonomy generators of the special component.
    Holonomy {
        config: PathBuf,
        /// Orbit samples as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Construct and certify a dicriticalness section.
    Section { config: PathBuf },
    /// Check the candidate first integral, and optionally a separatrix leaf.
    VerifyIntegral {
        config: PathBuf,
        /// Leading coefficient of the leaf, as a scalar.
        #[arg(long, value_name = "C")]
        separatrix: Option<String>,
    },
}

impl Command {
    fn config(&self) -> &PathBuf {
        match self {
            Command::Analyze { config }
            | Command::Blowup { config, .. }
            | Command::Classify { config }
            | Command::Holonomy { config, .. }
            | Command::Section { config }
            | Command::VerifyIntegral { config, .. } => config,
        }
    }
}

fn setup(cli: &Cli) -> Result<Setup, CliError> {
    let mut config = AnalysisConfig::load(cli.command.config())?;
    if let Some(o) = cli.global.order {
        config.analysis.order = o;
    }
    if let Some(t) = cli.global.tol {
        config.analysis.tol = t;
    }
    Ok(Setup::new(config, cli.global.float && !cli.global.exact)?)
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let s = setup(cli)?;
    match &cli.command {
        Command::Analyze { .. } => run::run_analyze(&s),
        Command::Blowup { steps, planar, .. } => run::run_blowup(&s, *steps, *planar),
        Command::Classify { .. } => run::run_classify(&s),
        Command::Holonomy { csv, .. } => run::run_holonomy(&s, csv.as_deref()),
        Command::Section { .. } => run::run_section(&s),
        Command::VerifyIntegral { separatrix, .. } => {
            let c = match separatrix {
                Some(text) => Some(parse_scalar(text).map_err(|e| CliError::Config(e.into()))?),
                None => None,
            };
            run::run_verify_integral(&s, c.as_ref())
        }
    }
}

fn emit(cli: &Cli, body: &serde_json::Value, summary: &str) -> Result<(), String> {
    let text = serde_json::to_string_pretty(body).map_err(|e| e.to_string())?;
    match &cli.global.json {
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| format!("writing {}: {e}", path.display()))?;
            print!("{summary}");
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (body, summary, code) = match execute(&cli) {
        Ok(rep) => {
            let mut summary = rep.summary();
            if let Some(f) = final_form(&rep) {
                summary.push_str(&f);
                summary.push('\n');
            }
            (serde_json::to_value(&rep).unwrap_or_default(), summary, rep.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            (serde_json::json!({ "error": e.record() }), String::new(), e.exit_code())
        }
    };
    if let Err(msg) = emit(&cli, &body, &summary) {
        eprintln!("error: {msg}");
        return ExitCode::from(3);
    }
    ExitCode::from(code as u8)
}
