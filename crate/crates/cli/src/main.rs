use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "paraboost", version, about = "Stereoscopic full-reference quality assessment by parallel boosting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every scorer and the fuser; writes `<out>/model`.
    Train(Flags),
    /// Score a manifest with a trained bundle.
    Predict(Flags),
    /// K-fold cross-validation with pooled evaluation.
    Crossval(Flags),
    /// Dump per-view feature values.
    Features(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    /// `random` or `content-disjoint`.
    #[arg(long)]
    fold_policy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated scorer ids in 1..=9.
    #[arg(long)]
    scorers: Option<String>,
    /// Command line of the external scorer (id 9).
    #[arg(long)]
    external_scorer: Option<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scorer order for the progressive-fusion table (crossval).
    #[arg(long)]
    progressive: Option<String>,
    /// Comma-separated feature names (features).
    #[arg(long)]
    feature_names: Option<String>,
}

impl Flags {
    fn overrides(self) -> Overrides {
        Overrides {
            manifest: self.manifest,
            model: self.model,
            out: self.out,
            folds: self.folds,
            fold_policy: self.fold_policy,
            seed: self.seed,
            scorers: self.scorers,
            external_scorer: self.external_scorer,
            jobs: self.jobs,
            progressive: self.progressive,
            feature_names: self.feature_names,
        }
    }
}

/// A failure with its diagnostic category; configuration problems exit 2,
/// everything else 1.
#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    exit: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: "config",
            message: message.into(),
            exit: 2,
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            kind: "io",
            message: message.into(),
            exit: 1,
        }
    }
}

impl From<paraboost_core::Error> for CliError {
    fn from(e: paraboost_core::Error) -> Self {
        use paraboost_core::Error as E;
        let kind = match &e {
            E::Load { .. } | E::InvalidRaster(_) => "load",
            E::Manifest { .. } => "manifest",
            E::SizeMismatch { .. } | E::TooSmall { .. } | E::DimensionMismatch { .. } => "shape",
            E::InvalidParameter(_) | E::Camera(_) | E::UnknownFeature { .. } => "parameter",
            E::InsufficientData(_) | E::FoldPlan(_) => "data",
            E::ScorerUnavailable { .. } | E::Feature { .. } => "scorer",
            E::ProfileMismatch(_) => "profile_mismatch",
            E::Evaluation(_) => "evaluation",
            E::Io { .. } | E::Serde(_) | E::Csv(_) => "io",
        };
        CliError {
            kind,
            message: e.to_string(),
            exit: 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), (&'static str, CliError)> {
    let (name, flags, command): (&'static str, Flags, fn(&RunConfig) -> Result<(), CliError>) = match cli.command {
        Command::Train(f) => ("train", f, commands::train_cmd),
        Command::Predict(f) => ("predict", f, commands::predict_cmd),
        Command::Crossval(f) => ("crossval", f, commands::crossval_cmd),
        Command::Features(f) => ("features", f, commands::features_cmd),
    };
    let cfg = RunConfig::load(flags.config.as_deref())
        .and_then(|c| c.apply(flags.overrides()))
        .map_err(|e| (name, e))?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| (name, CliError::runtime(format!("thread pool: {e}"))))?;
    }
    command(&cfg).map_err(|e| (name, e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((command, e)) => {
            let line = serde_json::json!({
                "status": "error",
                "command": command,
                "kind": e.kind,
                "message": e.message,
            });
            eprintln!("{line}");
            ExitCode::from(e.exit)
        }
    }
}
