//! Domain records shared by every stage of the pipeline.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vision-token budget charged per keyframe when the backend reports no usage.
pub const DEFAULT_IMAGE_TOKEN_COST: u64 = 258;

/// Most keyframes a summary may carry.
pub const MAX_KEYFRAMES: usize = 3;

/// Most keywords kept per caption.
pub const MAX_KEYWORDS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("invalid video reference {id}: {reason}")]
    InvalidVideoRef { id: String, reason: String },
    #[error("invalid summary {id}: {reason}")]
    InvalidSummary { id: String, reason: String },
    #[error("invalid caption for {id}: {reason}")]
    InvalidCaption { id: String, reason: String },
    #[error("media context must contain at least one part")]
    EmptyContext,
    #[error("token cost unavailable for full-video summary {0}: no reported usage and no frame inventory")]
    CostUnavailable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoRef {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_path: Option<PathBuf>,
    pub fps: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub dataset_tag: String,
}

impl VideoRef {
    pub fn validate(&self) -> Result<(), TypeError> {
        let bad = |reason: &str| TypeError::InvalidVideoRef {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.frame_dir.is_none() && self.video_path.is_none() {
            return Err(bad("one of frame_dir / video_path is required"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(bad("fps must be positive"));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 0.0) {
            return Err(bad("duration_s must be non-negative"));
        }
        Ok(())
    }

    /// Path of a pre-extracted frame, `frame_dir/frame_{index:06}.png`.
    pub fn frame_path(&self, index: u64) -> Option<PathBuf> {
        self.frame_dir
            .as_ref()
            .map(|dir| dir.join(format!("frame_{index:06}.png")))
    }
}

/// Reference to a single extracted frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrameRef(pub String);

impl fmt::Display for FrameRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryFormat {
    TextOnly,
    OneImage,
    ThreeImage,
    FullVideo,
}

impl SummaryFormat {
    pub const ALL: [SummaryFormat; 4] = [
        SummaryFormat::TextOnly,
        SummaryFormat::OneImage,
        SummaryFormat::ThreeImage,
        SummaryFormat::FullVideo,
    ];

    pub fn keyframe_count(self) -> usize {
        match self {
            SummaryFormat::TextOnly | SummaryFormat::FullVideo => 0,
            SummaryFormat::OneImage => 1,
            SummaryFormat::ThreeImage => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SummaryFormat::TextOnly => "text_only",
            SummaryFormat::OneImage => "one_image",
            SummaryFormat::ThreeImage => "three_image",
            SummaryFormat::FullVideo => "full_video",
        }
    }

    /// Phrase used to describe the input in the VQA prompt.
    pub fn input_phrase(self) -> &'static str {
        match self {
            SummaryFormat::TextOnly => "a textual summary of a video",
            SummaryFormat::OneImage => "one keyframe image and a textual summary of a video",
            SummaryFormat::ThreeImage => "three keyframe images and a textual summary of a video",
            SummaryFormat::FullVideo => "the full video",
        }
    }
}

impl fmt::Display for SummaryFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SummaryFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text_only" | "text" => Ok(SummaryFormat::TextOnly),
            "one_image" | "1-image" => Ok(SummaryFormat::OneImage),
            "three_image" | "3-image" => Ok(SummaryFormat::ThreeImage),
            "full_video" | "video" => Ok(SummaryFormat::FullVideo),
            other => Err(format!("unknown summary format '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generated,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryRecord {
    pub summary_id: String,
    pub video_id: String,
    pub format: SummaryFormat,
    #[serde(default)]
    pub keyframes: Vec<FrameRef>,
    #[serde(default)]
    pub text: String,
    pub token_cost: u64,
    pub provenance: Provenance,
}

impl SummaryRecord {
    pub fn validate(&self) -> Result<(), TypeError> {
        let bad = |reason: String| TypeError::InvalidSummary {
            id: self.summary_id.clone(),
            reason,
        };
        if self.keyframes.len() > MAX_KEYFRAMES {
            return Err(bad(format!(
                "{} keyframes exceeds the limit of {MAX_KEYFRAMES}",
                self.keyframes.len()
            )));
        }
        if self.keyframes.len() != self.format.keyframe_count() {
            return Err(bad(format!(
                "format {} requires {} keyframes, found {}",
                self.format,
                self.format.keyframe_count(),
                self.keyframes.len()
            )));
        }
        if self.format != SummaryFormat::FullVideo && self.text.trim().is_empty() {
            return Err(bad(format!("format {} requires summary text", self.format)));
        }
        Ok(())
    }
}

/// One element of a model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Part {
    Text(String),
    Image(FrameRef),
    Video(VideoRef),
}

/// Ordered, non-empty model input: the video, a summary, or any prompt context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Part>", into = "Vec<Part>")]
pub struct MediaContext {
    parts: Vec<Part>,
}

impl MediaContext {
    pub fn new(parts: Vec<Part>) -> Result<Self, TypeError> {
        if parts.is_empty() {
            return Err(TypeError::EmptyContext);
        }
        Ok(Self { parts })
    }

    pub fn video(video: &VideoRef) -> Self {
        Self {
            parts: vec![Part::Video(video.clone())],
        }
    }

    pub fn text(text: impl Into<String>) -> Self {
        Self {
            parts: vec![Part::Text(text.into())],
        }
    }

    /// Context for a summary: keyframes first, in order, then the text.
    /// A full-video summary is the video itself.
    pub fn summary(summary: &SummaryRecord, video: &VideoRef) -> Result<Self, TypeError> {
        if summary.format == SummaryFormat::FullVideo {
            return Ok(Self::video(video));
        }
        let mut parts: Vec<Part> = summary
            .keyframes
            .iter()
            .cloned()
            .map(Part::Image)
            .collect();
        if !summary.text.is_empty() {
            parts.push(Part::Text(summary.text.clone()));
        }
        Self::new(parts)
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn with_part(mut self, part: Part) -> Self {
        self.parts.push(part);
        self
    }

    /// Concatenated text parts, joined by a single space.
    pub fn joined_text(&self) -> String {
        self.parts
            .iter()
            .filter_map(|p| match p {
                Part::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn image_count(&self) -> usize {
        self.parts
            .iter()
            .filter(|p| matches!(p, Part::Image(_)))
            .count()
    }

    pub fn video_ids(&self) -> Vec<&str> {
        self.parts
            .iter()
            .filter_map(|p| match p {
                Part::Video(v) => Some(v.id.as_str()),
                _ => None,
            })
            .collect()
    }
}

impl TryFrom<Vec<Part>> for MediaContext {
    type Error = TypeError;

    fn try_from(parts: Vec<Part>) -> Result<Self, Self::Error> {
        Self::new(parts)
    }
}

impl From<MediaContext> for Vec<Part> {
    fn from(ctx: MediaContext) -> Self {
        ctx.parts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptionRecord {
    pub video_id: String,
    pub text: String,
    pub generator_model: String,
    pub keywords: Vec<String>,
}

impl CaptionRecord {
    pub fn validate(&self) -> Result<(), TypeError> {
        let bad = |reason: String| TypeError::InvalidCaption {
            id: self.video_id.clone(),
            reason,
        };
        if self.keywords.len() > MAX_KEYWORDS {
            return Err(bad(format!("{} keywords exceeds {MAX_KEYWORDS}", self.keywords.len())));
        }
        let mut seen = HashSet::new();
        for kw in &self.keywords {
            if kw == "video" {
                return Err(bad("keyword 'video' is excluded".into()));
            }
            if kw.is_empty() || kw.chars().any(char::is_whitespace) || kw.to_lowercase() != *kw {
                return Err(bad(format!("keyword '{kw}' is not a single lowercase word")));
            }
            if !seen.insert(kw) {
                return Err(bad(format!("duplicate keyword '{kw}'")));
            }
        }
        Ok(())
    }
}

/// One score evaluation of a (video, summary) pair.
///
/// Log-probabilities are natural logs. The per-keyword matrices are
/// `runs x n_keywords`, one row per repeated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub video_id: String,
    pub summary_id: String,
    pub evaluator_model: String,
    pub runs: u32,
    pub seed: u64,
    pub epsilon_floor: f64,
    pub keywords: Vec<String>,
    pub per_keyword_logp_video: Vec<Vec<f64>>,
    pub per_keyword_logp_summary: Vec<Vec<f64>>,
    pub logp_c_given_v: f64,
    pub logp_c_given_s: f64,
    pub visil: f64,
    /// `visil / n_keywords`, for dashboards comparing across videos.
    pub visil_per_keyword: f64,
    pub excluded_keywords: usize,
    /// Runs in which every slot fell back to the floor.
    #[serde(default)]
    pub floored_runs: u32,
}

impl ScoreRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.runs == 0 {
            return Err("runs must be positive".into());
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_floor < 1.0) {
            return Err("epsilon_floor must lie in (0, 1)".into());
        }
        let n = self.keywords.len();
        for (name, m) in [
            ("per_keyword_logp_video", &self.per_keyword_logp_video),
            ("per_keyword_logp_summary", &self.per_keyword_logp_summary),
        ] {
            if m.len() != self.runs as usize {
                return Err(format!("{name} has {} rows, expected {}", m.len(), self.runs));
            }
            if let Some(row) = m.iter().find(|r| r.len() != n) {
                return Err(format!("{name} row has {} columns, expected {n}", row.len()));
            }
        }
        let lo = self.epsilon_floor.ln();
        let in_range = |v: f64| v.is_finite() && v <= 0.0 && v >= lo;
        let cells = self
            .per_keyword_logp_video
            .iter()
            .chain(&self.per_keyword_logp_summary)
            .flatten();
        for &v in cells {
            if !in_range(v) {
                return Err(format!("log-probability {v} outside [{lo}, 0]"));
            }
        }
        for (name, v) in [
            ("logp_c_given_v", self.logp_c_given_v),
            ("logp_c_given_s", self.logp_c_given_s),
        ] {
            if !(v.is_finite() && v <= 0.0) {
                return Err(format!("{name} = {v} must be a finite non-positive log-probability"));
            }
        }
        if self.visil != self.logp_c_given_v - self.logp_c_given_s {
            return Err("visil must equal logp_c_given_v - logp_c_given_s".into());
        }
        Ok(())
    }
}

/// Token cost of a summary.
///
/// Backend-reported usage wins. Otherwise the estimate is the summary's word
/// count plus `image_token_cost` per keyframe; a full-video summary falls back
/// to `image_token_cost` per frame of its inventory.
pub fn estimate_token_cost(
    summary: &SummaryRecord,
    image_token_cost: u64,
    reported: Option<u64>,
    frame_inventory: Option<usize>,
) -> Result<u64, TypeError> {
    assert!(image_token_cost > 0, "image_token_cost must be positive");
    if let Some(n) = reported {
        return Ok(n);
    }
    let words = summary.text.split_whitespace().count() as u64;
    if summary.format == SummaryFormat::FullVideo {
        return match frame_inventory {
            Some(frames) => Ok(words + image_token_cost * frames as u64),
            None => Err(TypeError::CostUnavailable(summary.summary_id.clone())),
        };
    }
    Ok(words + image_token_cost * summary.keyframes.len() as u64)
}
