//! Information-loss scoring for multimodal video summaries.
//!
//! A summary (keyframes plus text) is scored by how much worse a vision-language
//! model recovers masked keywords of a detailed caption when conditioned on the
//! summary instead of the full video:
//!
//! ```text
//! visil = ln P(C | video) - ln P(C | summary)
//! ```
//!
//! with `ln P(C | ·)` approximated by the sum of per-keyword log-probabilities,
//! geometric-mean aggregated over repeated runs. Lower is better.
//!
//! Module map:
//! - [`types`]: shared domain records and token-cost estimation
//! - [`store`]: line-delimited JSON record stores
//! - [`backend`]: model backends (HTTP API, record/replay, synthetic world)
//! - [`masking`]: keyword parsing and masked-caption construction
//! - [`scoring`]: the score itself
//! - [`selection`]: Lagrangian selection and Pareto frontier
//! - [`stats`]: Pearson, permutation test, logistic regression
//! - [`harness`]: captioning/summarization/VQA/correspondence pipeline

pub mod backend;
pub mod dispatch;
pub mod harness;
pub mod masking;
pub mod prompts;
pub mod scoring;
pub mod selection;
pub mod stats;
pub mod store;
pub mod types;

pub use backend::{Backend, BackendError};
pub use masking::MaskedCaption;
pub use scoring::{visil_score, ScoringConfig};
pub use types::{MediaContext, Part, ScoreRecord, SummaryFormat, SummaryRecord, VideoRef};
