//! Run configuration, layered flags > config file > environment > defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use visil::backend::ModelRoles;
use visil::ScoringConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Api,
    Replay,
    Synthetic,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "api" => Ok(Self::Api),
            "replay" => Ok(Self::Replay),
            "synthetic" => Ok(Self::Synthetic),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleLayer {
    pub captioner: Option<String>,
    pub keyword_extractor: Option<String>,
    pub summarizer: Option<String>,
    pub evaluator: Option<String>,
    pub answerer: Option<String>,
}

/// One source of settings; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub backend: Option<BackendKind>,
    #[serde(default)]
    pub roles: RoleLayer,
    pub runs: Option<u32>,
    pub epsilon_floor: Option<f64>,
    pub top_k: Option<u32>,
    pub jobs: Option<usize>,
    pub rpm: Option<u32>,
    pub fixtures_dir: Option<PathBuf>,
    pub store_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub endpoint: Option<String>,
    pub allow_shared_evaluator: Option<bool>,
    pub record: Option<bool>,
    pub world: Option<PathBuf>,
}

macro_rules! layer_over {
    ($hi:expr, $lo:expr, [$($f:ident),*], [$($r:ident),*]) => {
        ConfigLayer {
            $($f: $hi.$f.or($lo.$f),)*
            roles: RoleLayer { $($r: $hi.roles.$r.or($lo.roles.$r),)* },
        }
    };
}

impl ConfigLayer {
    /// Field-wise `self` if set, else `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        layer_over!(
            self,
            lower,
            [backend, runs, epsilon_floor, top_k, jobs, rpm, fixtures_dir, store_dir, seed, endpoint,
             allow_shared_evaluator, record, world],
            [captioner, keyword_extractor, summarizer, evaluator, answerer]
        )
    }

    pub fn from_file(path: &Path) -> Result<ConfigLayer, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
    }

    /// Reads `VISIL_*` variables through `var`.
    pub fn from_env(var: impl Fn(&str) -> Option<String>) -> Result<ConfigLayer, CliError> {
        fn parse<T: std::str::FromStr>(
            var: &impl Fn(&str) -> Option<String>,
            name: &str,
        ) -> Result<Option<T>, CliError>
        where
            T::Err: std::fmt::Display,
        {
            var(name)
                .map(|v| {
                    v.parse::<T>()
                        .map_err(|e| CliError::usage("config", format!("{name}={v}: {e}")))
                })
                .transpose()
        }
        Ok(ConfigLayer {
            backend: parse(&var, "VISIL_BACKEND")?,
            roles: RoleLayer {
                captioner: var("VISIL_CAPTIONER"),
                keyword_extractor: var("VISIL_KEYWORD_EXTRACTOR"),
                summarizer: var("VISIL_SUMMARIZER"),
                evaluator: var("VISIL_EVALUATOR"),
                answerer: var("VISIL_ANSWERER"),
            },
            runs: parse(&var, "VISIL_RUNS")?,
            epsilon_floor: parse(&var, "VISIL_EPSILON_FLOOR")?,
            top_k: parse(&var, "VISIL_TOP_K")?,
            jobs: parse(&var, "VISIL_JOBS")?,
            rpm: parse(&var, "VISIL_RPM")?,
            fixtures_dir: var("VISIL_FIXTURES_DIR").map(PathBuf::from),
            store_dir: var("VISIL_STORE_DIR").map(PathBuf::from),
            seed: parse(&var, "VISIL_SEED")?,
            endpoint: var("VISIL_ENDPOINT"),
            allow_shared_evaluator: parse(&var, "VISIL_ALLOW_SHARED_EVALUATOR")?,
            record: parse(&var, "VISIL_RECORD")?,
            world: var("VISIL_WORLD").map(PathBuf::from),
        })
    }
}

/// Effective settings of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub backend: BackendKind,
    pub roles: ModelRoles,
    pub scoring: ScoringConfig,
    pub jobs: usize,
    pub rpm: Option<u32>,
    pub fixtures_dir: Option<PathBuf>,
    pub store_dir: PathBuf,
    pub seed: u64,
    pub endpoint: Option<String>,
    pub allow_shared_evaluator: bool,
    pub record: bool,
    pub world: Option<PathBuf>,
}

pub const DEFAULT_STORE_DIR: &str = "store";
pub const DEFAULT_JOBS: usize = 4;

/// Layers `flags` over `file` over `env` over defaults, then validates.
pub fn resolve(flags: ConfigLayer, file: ConfigLayer, env: ConfigLayer) -> Result<RunConfig, CliError> {
    let l = flags.over(file).over(env);
    let d = ModelRoles::default();
    let seed = l.seed.unwrap_or(0);
    let cfg = RunConfig {
        backend: l.backend.unwrap_or(BackendKind::Synthetic),
        roles: ModelRoles {
            captioner: l.roles.captioner.unwrap_or(d.captioner),
            keyword_extractor: l.roles.keyword_extractor.unwrap_or(d.keyword_extractor),
            summarizer: l.roles.summarizer.unwrap_or(d.summarizer),
            evaluator: l.roles.evaluator.unwrap_or(d.evaluator),
            answerer: l.roles.answerer.unwrap_or(d.answerer),
        },
        scoring: ScoringConfig {
            runs: l.runs.unwrap_or(3),
            seed,
            epsilon_floor: l.epsilon_floor.unwrap_or(visil::backend::DEFAULT_EPSILON_FLOOR),
            top_k: l.top_k.unwrap_or(visil::backend::DEFAULT_TOP_K),
        },
        jobs: l.jobs.unwrap_or(DEFAULT_JOBS),
        rpm: l.rpm,
        fixtures_dir: l.fixtures_dir,
        store_dir: l.store_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_STORE_DIR)),
        seed,
        endpoint: l.endpoint,
        allow_shared_evaluator: l.allow_shared_evaluator.unwrap_or(false),
        record: l.record.unwrap_or(false),
        world: l.world,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.scoring
            .validate()
            .map_err(|e| CliError::usage("config", e.to_string()))?;
        if self.jobs == 0 {
            return Err(CliError::usage("config", "jobs must be at least 1"));
        }
        if self.rpm == Some(0) {
            return Err(CliError::usage("config", "rpm must be positive"));
        }
        match self.backend {
            BackendKind::Replay if self.fixtures_dir.is_none() => {
                Err(CliError::usage("config", "replay backend requires fixtures_dir"))
            }
            BackendKind::Api if self.endpoint.is_none() => {
                Err(CliError::usage("config", "api backend requires an endpoint"))
            }
            BackendKind::Api if self.record && self.fixtures_dir.is_none() => {
                Err(CliError::usage("config", "recording requires fixtures_dir"))
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON of the effective config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&serde_json::to_value(self).expect("config serializes"))
            .expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
