//! Command-line runner: configuration, backend construction, and the glue
//! that reads and writes the JSON stores for each pipeline stage.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use visil::SummaryFormat;

pub use config::{resolve, BackendKind, ConfigLayer, RoleLayer, RunConfig};

/// Failure of a command. Usage errors exit 2, runtime failures exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Usage { code: &'static str, message: String },
    #[error("{message}")]
    Runtime { code: &'static str, message: String },
}

impl CliError {
    pub fn usage(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Usage {
            code,
            message: message.into(),
        }
    }

    pub fn runtime(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Runtime {
            code,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Runtime { .. } => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let (kind, code, message) = match self {
            CliError::Usage { code, message } => ("usage", code, message),
            CliError::Runtime { code, message } => ("runtime", code, message),
        };
        json!({"error": {"kind": kind, "code": code, "message": message}}).to_string()
    }
}

impl From<visil::store::StoreError> for CliError {
    fn from(e: visil::store::StoreError) -> Self {
        CliError::runtime("store", e.to_string())
    }
}

impl From<visil::harness::HarnessError> for CliError {
    fn from(e: visil::harness::HarnessError) -> Self {
        CliError::runtime("harness", e.to_string())
    }
}

impl From<visil::stats::StatsError> for CliError {
    fn from(e: visil::stats::StatsError) -> Self {
        match e {
            visil::stats::StatsError::EvaluatorMismatch(_) => CliError::usage("evaluator_mismatch", e.to_string()),
            other => CliError::runtime("stats", other.to_string()),
        }
    }
}

impl From<visil::selection::SelectionError> for CliError {
    fn from(e: visil::selection::SelectionError) -> Self {
        CliError::usage("selection", e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "visil", version, about = "Score multimodal video summaries by information loss")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by every subcommand. Each overrides the config file,
/// which overrides `VISIL_*` environment variables.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Directory of recorded request/response fixtures
    #[arg(long, global = true)]
    pub fixtures_dir: Option<PathBuf>,
    /// Directory for all stores written by the run
    #[arg(long, global = true)]
    pub store_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum concurrent backend calls
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Requests-per-minute cap
    #[arg(long, global = true)]
    pub rpm: Option<u32>,
    /// Repeated scoring calls per context
    #[arg(long, global = true)]
    pub runs: Option<u32>,
    #[arg(long, global = true)]
    pub epsilon_floor: Option<f64>,
    #[arg(long, global = true)]
    pub top_k: Option<u32>,
    /// Chat-completions URL for the api backend
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub captioner: Option<String>,
    #[arg(long, global = true)]
    pub keyword_extractor: Option<String>,
    #[arg(long, global = true)]
    pub summarizer: Option<String>,
    #[arg(long, global = true)]
    pub evaluator: Option<String>,
    #[arg(long, global = true)]
    pub answerer: Option<String>,
    /// Permit the evaluator to share a model with the captioner or summarizer
    #[arg(long, global = true)]
    pub allow_shared_evaluator: bool,
    /// Record api responses as fixtures
    #[arg(long, global = true)]
    pub record: bool,
    /// Toy world JSON for the synthetic backend
    #[arg(long, global = true)]
    pub world: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            backend: self.backend,
            roles: RoleLayer {
                captioner: self.captioner.clone(),
                keyword_extractor: self.keyword_extractor.clone(),
                summarizer: self.summarizer.clone(),
                evaluator: self.evaluator.clone(),
                answerer: self.answerer.clone(),
            },
            runs: self.runs,
            epsilon_floor: self.epsilon_floor,
            top_k: self.top_k,
            jobs: self.jobs,
            rpm: self.rpm,
            fixtures_dir: self.fixtures_dir.clone(),
            store_dir: self.store_dir.clone(),
            seed: self.seed,
            endpoint: self.endpoint.clone(),
            allow_shared_evaluator: self.allow_shared_evaluator.then_some(true),
            record: self.record.then_some(true),
            world: self.world.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Inputs {
    /// Dataset manifest: JSON array of videos [default: <store>/videos.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// [default: <store>/captions.jsonl]
    #[arg(long)]
    pub captions: Option<PathBuf>,
    /// [default: <store>/summaries.jsonl]
    #[arg(long)]
    pub summaries: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Caption every video and extract keywords
    Caption {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Re-extract keywords for existing captions
    Keywords {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Build summaries in the requested formats
    Summarize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_delimiter = ',', default_value = "text_only,one_image,three_image,full_video")]
        formats: Vec<SummaryFormat>,
        /// Frame extractor command; tokens {video} {index} {seconds} {output}
        #[arg(long)]
        extractor: Option<String>,
        #[arg(long, default_value_t = visil::types::DEFAULT_IMAGE_TOKEN_COST)]
        image_token_cost: u64,
    },
    /// Score every summary against its video
    Score {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Answer questions from each summary
    Vqa {
        #[command(flatten)]
        inputs: Inputs,
        /// JSON array of questions
        #[arg(long)]
        questions: PathBuf,
    },
    /// Run the correspondence test with generated distractors
    Correspond {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Pick summaries by visil + alpha * token_cost and export the frontier
    Select {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        alpha: Vec<f64>,
        /// [default: <store>/scores.jsonl]
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Logistic regression, Pearson's r and permutation test
    Stats {
        /// [default: <store>/scores.jsonl]
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Correctness labels [default: <store>/correctness.json, else <store>/vqa.jsonl]
        #[arg(long)]
        correctness: Option<PathBuf>,
        /// Pool records from different evaluator models
        #[arg(long)]
        force: bool,
        /// Drop the highest- and lowest-scoring pairs
        #[arg(long)]
        trim_extremes: bool,
        #[arg(long, default_value_t = 10_000)]
        n_shuffles: u64,
        /// Row label in the printed table
        #[arg(long, default_value = "all")]
        dataset: String,
    },
    /// Generate and score a toy-world experiment
    Synth {
        #[arg(long, default_value_t = 50)]
        n_videos: usize,
        #[arg(long, default_value_t = 10)]
        facts: usize,
        #[arg(long, default_value_t = 0.9)]
        p_hit: f64,
        #[arg(long, default_value_t = 0.1)]
        p_miss: f64,
        /// format=fraction pairs
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "text_only=0.25,one_image=0.5,three_image=0.75,full_video=1"
        )]
        coverage: Vec<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Caption { .. } => "caption",
            Command::Keywords { .. } => "keywords",
            Command::Summarize { .. } => "summarize",
            Command::Score { .. } => "score",
            Command::Vqa { .. } => "vqa",
            Command::Correspond { .. } => "correspond",
            Command::Select { .. } => "select",
            Command::Stats { .. } => "stats",
            Command::Synth { .. } => "synth",
        }
    }
}

/// Resolves configuration from flags, the optional file, and `env`, then
/// runs the command.
pub fn run(cli: Cli, env: impl Fn(&str) -> Option<String>) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigLayer::from_file(p)?,
        None => ConfigLayer::default(),
    };
    let env_layer = ConfigLayer::from_env(&env)?;
    let cfg = resolve(cli.global.layer(), file, env_layer)?;
    cfg.roles
        .validate(cfg.allow_shared_evaluator)
        .map_err(|e| CliError::usage("role_violation", e.to_string()))?;
    let api_key = env("VISIL_API_KEY");
    if cfg.backend == BackendKind::Api && api_key.as_deref().unwrap_or("").is_empty() {
        return Err(CliError::usage("config", "api backend requires VISIL_API_KEY"));
    }
    commands::execute(&cfg, api_key, &cli.command)
}
