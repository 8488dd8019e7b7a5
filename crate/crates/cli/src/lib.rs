//! Command-line driver for burnnet: synthetic data, cross-validated
//! training, evaluation, texture baselines, trust scoring and saliency maps.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use burnnet::model::TaskMode;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Run;
use crate::config::{DataSource, RunConfig};
use crate::error::{CliError, Result, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass,
}

impl From<TaskArg> for TaskMode {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Binary => TaskMode::Binary,
            TaskArg::Multiclass => TaskMode::Multiclass,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "burnnet", version, about = "Burn-depth classification of ultrasound B-mode images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the phantom dataset as PNG folders.
    Generate,
    /// Pre-train the encoder-decoder and train one classifier per fold.
    Train,
    /// Pool out-of-fold predictions into metrics and curves.
    Evaluate,
    /// GLCM features with LDA and SVM on the same folds.
    Baseline,
    /// Trust spectrum, densities and NetTrustScore from saved predictions.
    Trust,
    /// Class-average guided Grad-CAM++ heatmaps and depth profiles.
    Explain,
    /// Run every stage and write a summary report.
    Report,
}

/// Flags that override the TOML configuration.
#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory for every artifact.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Seeds data generation, initialization and fold assignment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub task: Option<TaskArg>,
    /// Stratified cross-validation folds.
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Classifier epochs.
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Encoder-decoder pre-training epochs.
    #[arg(long, global = true)]
    pub source_epochs: Option<usize>,
    /// Minibatch size.
    #[arg(long, global = true)]
    pub batch: Option<usize>,
    /// Adam step size.
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    /// Phantoms per class.
    #[arg(long, global = true)]
    pub per_class: Option<usize>,
    /// Read class folders from this directory instead of generating phantoms.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Block-averaging factor applied before the network.
    #[arg(long, global = true)]
    pub downsample: Option<usize>,
    /// Train classifiers from scratch.
    #[arg(long, global = true)]
    pub no_pretrain: bool,
    /// Train only the classification head.
    #[arg(long, global = true)]
    pub frozen_encoder: bool,
    /// Use one width for every convolution.
    #[arg(long, global = true)]
    pub channels: Option<usize>,
    /// Classifier layer explained by Grad-CAM++.
    #[arg(long, global = true)]
    pub layer: Option<usize>,
    /// Use the kernel bandwidth in the density prefactor.
    #[arg(long, global = true)]
    pub normalized_density: bool,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(v) = &self.output {
            cfg.output = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.task {
            cfg.task = v.into();
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.epochs {
            cfg.model.epochs = v;
        }
        if let Some(v) = self.source_epochs {
            cfg.source_epochs = v;
        }
        if let Some(v) = self.batch {
            cfg.model.batch = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.model.learning_rate = v;
        }
        if let Some(v) = self.per_class {
            cfg.data.per_class = v;
        }
        if let Some(v) = &self.data_dir {
            cfg.data.source = DataSource::Directory;
            cfg.data.directory = Some(v.clone());
        }
        if let Some(v) = self.downsample {
            cfg.data.downsample = v;
        }
        if self.no_pretrain {
            cfg.pretrain = false;
        }
        if self.frozen_encoder {
            cfg.frozen_encoder = true;
        }
        if let Some(w) = self.channels {
            cfg.model.encoder_channels = [w; 4];
            cfg.model.decoder_channels = [w; 4];
            cfg.model.bottleneck_channels = w;
        }
        if let Some(v) = self.layer {
            cfg.explain.layer = Some(v);
        }
        if self.normalized_density {
            cfg.trust.normalized = true;
        }
        cfg
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(self.apply(base))
    }
}

fn print_json<T: serde::Serialize>(summary: &T) {
    println!("{}", serde_json::to_string_pretty(summary).expect("summaries serialize"));
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = cli.overrides.resolve()?;
    let (run, data) = Run::prepare(cfg)?;
    match cli.command {
        Command::Generate => print_json(&commands::cmd_generate(&run, &data)?),
        Command::Train => print_json(&commands::cmd_train(&run, &data)?),
        Command::Evaluate => print_json(&commands::cmd_evaluate(&run, &data)?),
        Command::Baseline => {
            if run.cfg.task != TaskMode::Binary {
                return Err(CliError::Usage("texture baselines are defined for the binary task only".into()));
            }
            print_json(&commands::cmd_baseline(&run, &data)?)
        }
        Command::Trust => print_json(&commands::cmd_trust(&run)?),
        Command::Explain => print_json(&commands::cmd_explain(&run, &data)?),
        Command::Report => print_json(&commands::cmd_report(&run, &data)?),
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
