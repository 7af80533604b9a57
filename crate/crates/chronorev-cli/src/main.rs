//! Command-line front end: simulate the generating models, analyze trial
//! data under the three criteria families, predict out-of-sample choice
//! probabilities, and run the rationalizability falsification checks.
//!
//! Exit codes: 0 success, 2 input error, 3 analysis not applicable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chronorev::data_model::{ChoiceDataset, LoadOptions};
use chronorev::dataset::{AnalysisError, Dataset};
use chronorev::generators::ModelSpec;
use chronorev::report::{analyze, check_report, predict_report, AnalysisConfig, ClassSelection};
use chronorev::simulate::simulate;
use chronorev::OptionId;

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_APPLICABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chronorev",
    version,
    about = "Preference recovery from choices and response times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Unrestricted,
    Symmetric,
    Fechner,
    All,
}

impl From<ClassArg> for ClassSelection {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Unrestricted => ClassSelection::Unrestricted,
            ClassArg::Symmetric => ClassSelection::Symmetric,
            ClassArg::Fechner => ClassSelection::Fechner,
            ClassArg::All => ClassSelection::All,
        }
    }
}

/// Tolerance and binning flags shared by the analysis commands.
#[derive(Args)]
struct ToleranceArgs {
    /// Slack for the dominance inequality.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Margin required for strict verdicts.
    #[arg(long, default_value_t = 0.0)]
    strict_tol: f64,
    /// Equal-count bins for the density-ratio check.
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// Minimum pooled observations for a bin to count.
    #[arg(long, default_value_t = 10)]
    min_count: usize,
}

impl ToleranceArgs {
    fn config(&self) -> AnalysisConfig {
        let mut config = AnalysisConfig::default();
        config.dominance.tol = self.tol;
        config.dominance.strict_tol = self.strict_tol;
        config.density.bins = self.bins;
        config.density.min_count = self.min_count;
        config.density.tol = self.tol;
        config.symmetric.prob_margin = self.strict_tol;
        config.fechner.prob_margin = self.strict_tol;
        config
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw trials from a model spec and write a CSV plus ground-truth sidecar.
    Simulate {
        /// Model spec JSON path.
        #[arg(long)]
        config: PathBuf,
        /// Override the spec's trials per pair.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the diffusion step size.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the diffusion horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Sidecar JSON path (defaults to `<out>.sidecar.json`).
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Run revealed-preference criteria over a trial CSV or analytic fixture.
    Analyze {
        /// Trials CSV path.
        #[arg(long, conflicts_with = "analytic")]
        trials: Option<PathBuf>,
        /// Closed-form fixture: a rum_cf model spec JSON evaluated exactly.
        #[arg(long)]
        analytic: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ClassArg::All)]
        class: ClassArg,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        /// Report path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict out-of-sample choice probabilities through shared pivots.
    Predict {
        #[arg(long)]
        trials: PathBuf,
        /// Restrict to one unordered pair, e.g. `x,y`.
        #[arg(long)]
        pair: Option<String>,
        /// Tie band around 1/2 for case routing (default 2/sqrt(n)).
        #[arg(long)]
        tie_tol: Option<f64>,
        /// Pivot disagreement beyond this is flagged.
        #[arg(long, default_value_t = 0.05)]
        spread_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the necessary rationalizability checks for every model class.
    Check {
        #[arg(long)]
        trials: PathBuf,
        #[command(flatten)]
        tolerances: ToleranceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    chronorev::exec::configure_threads_from_env();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn not_applicable(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NOT_APPLICABLE,
            message: message.into(),
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            config,
            n,
            seed,
            dt,
            t_max,
            out,
            sidecar,
        } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError::input(format!("{}: {e}", config.display())))?;
            let mut spec =
                ModelSpec::from_json(&text).map_err(|e| CliError::input(e.to_string()))?;
            if let ModelSpec::Ddm(d) = &mut spec {
                if let Some(dt) = dt {
                    d.dt = dt;
                }
                if let Some(t_max) = t_max {
                    d.t_max = t_max;
                }
            } else if dt.is_some() || t_max.is_some() {
                return Err(CliError::input(
                    "--dt/--t-max apply to diffusion specs only",
                ));
            }
            spec.validate()
                .map_err(|e| CliError::input(e.to_string()))?;
            let output = simulate(&spec, seed, n).map_err(|e| CliError::input(e.to_string()))?;

            let dataset = ChoiceDataset::from_trials(output.trials)
                .map_err(|e| CliError::input(format!("generated data invalid: {e}")))?;
            let mut csv_bytes = Vec::new();
            dataset
                .emit_trials(&mut csv_bytes)
                .map_err(|e| CliError::input(e.to_string()))?;
            write_bytes(&out, &csv_bytes)?;

            let sidecar_path =
                sidecar.unwrap_or_else(|| PathBuf::from(format!("{}.sidecar.json", out.display())));
            write_json(Some(&sidecar_path), &output.sidecar)?;
            Ok(())
        }
        Command::Analyze {
            trials,
            analytic,
            class,
            tolerances,
            out,
        } => {
            let ds = load_dataset(trials.as_deref(), analytic.as_deref())?;
            let config = tolerances.config();
            let report = analyze(&ds, ClassSelection::from(class), &config)
                .map_err(|e| CliError::input(e.to_string()))?;
            write_json(out.as_deref(), &report)
        }
        Command::Predict {
            trials,
            pair,
            tie_tol,
            spread_tol,
            out,
        } => {
            let ds = load_dataset(Some(&trials), None)?;
            let mut config = AnalysisConfig::default();
            config.fechner.tie_tol = tie_tol;
            config.fechner.spread_tol = spread_tol;
            let parsed = pair.map(|s| parse_pair(&s)).transpose()?;
            let report = match &parsed {
                Some((x, y)) => predict_report(&ds, Some((x, y)), &config),
                None => predict_report(&ds, None, &config),
            }
            .map_err(|e| match e {
                AnalysisError::NoPivot(..) => {
                    CliError::not_applicable(format!("not predictable: {e}"))
                }
                other => CliError::input(other.to_string()),
            })?;
            if report.predictions.is_empty() {
                return Err(CliError::not_applicable(
                    "not predictable: no pair has a pivot",
                ));
            }
            write_json(out.as_deref(), &report)
        }
        Command::Check {
            trials,
            tolerances,
            out,
        } => {
            let ds = load_dataset(Some(&trials), None)?;
            let config = tolerances.config();
            let report = check_report(&ds, &config).map_err(|e| CliError::input(e.to_string()))?;
            write_json(out.as_deref(), &report)
        }
    }
}

fn parse_pair(s: &str) -> Result<(OptionId, OptionId), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::input(format!("--pair expects `x,y`, got `{s}`")));
    }
    let x = OptionId::new(parts[0].trim()).map_err(|e| CliError::input(e.to_string()))?;
    let y = OptionId::new(parts[1].trim()).map_err(|e| CliError::input(e.to_string()))?;
    Ok((x, y))
}

fn load_dataset(trials: Option<&Path>, analytic: Option<&Path>) -> Result<Dataset, CliError> {
    match (trials, analytic) {
        (Some(path), None) => {
            let file = fs::File::open(path)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let ds = ChoiceDataset::load_trials(file, &LoadOptions::default())
                .map_err(|e| CliError::input(e.to_string()))?;
            Ok(Dataset::Empirical(ds))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let spec = ModelSpec::from_json(&text).map_err(|e| CliError::input(e.to_string()))?;
            Dataset::analytic_from_spec(&spec).map_err(|e| CliError::input(e.to_string()))
        }
        _ => Err(CliError::input(
            "provide exactly one of --trials or --analytic",
        )),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("serialize: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(e.to_string())),
    }
}
