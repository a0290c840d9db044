//! End-to-end pipeline: captioning and keywords, keyframes and summaries,
//! scoring batches, question answering, the correspondence test, and a
//! synthetic experiment generator.

mod correspondence;
mod pipeline;
mod synthetic;
pub mod timecode;
mod vqa;

pub use correspondence::{
    aggregate_correspondence, make_distractors, parse_judgment, run_correspondence, CorrespondenceCell,
    CorrespondenceItem, CorrespondenceLabel, CorrespondenceOutcome, Judgment,
};
pub use pipeline::{
    build_summaries, parse_keyframes, run_captioning, score_batch, FrameResolver, KeyframeEntry, SummaryOptions,
};
pub use synthetic::{synthetic_experiment, CorrectnessLabel, SyntheticExperiment, SyntheticSpec};
pub use timecode::{parse_timecode, Timecode, TimecodeError};
pub use vqa::{parse_letter, run_vqa, VqaItem, VqaOutcome};

use thiserror::Error;

use crate::backend::BackendError;
use crate::masking::MaskError;
use crate::scoring::ScoringError;
use crate::types::TypeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("caption unavailable for video {video_id}: {source}")]
    CaptionUnavailable {
        video_id: String,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Timecode(#[from] TimecodeError),
    #[error("keyframe response is not a JSON array of {{timestamp, description}}: {0}")]
    KeyframeParse(String),
    #[error("frame unavailable: {0}")]
    FrameUnavailable(String),
    #[error(transparent)]
    Types(#[from] TypeError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("missing input: {0}")]
    MissingInput(String),
}

/// Recoverable anomalies, reported alongside results.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HarnessWarning {
    /// Fewer keyframes parsed than requested; a smaller format was kept.
    KeyframeShortfall { video_id: String, requested: usize, parsed: usize },
    /// Summary text does not reference every keyframe placeholder.
    PlaceholderMismatch { summary_id: String, expected: usize, found: usize },
    DistractorShortfall { summary_id: String, expected: usize, parsed: usize },
    VisualConfusionSkipped { summary_id: String, reason: String },
}
