use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;

use log::warn;
use serde::{Deserialize, Serialize};

use super::timecode::parse_timecode;
use super::{HarnessError, HarnessWarning};
use crate::backend::{Backend, BackendError};
use crate::dispatch::{dispatch, DispatchLimits};
use crate::masking::{build_masked_caption, parse_keywords, strip_code_fence, MaskedCaption};
use crate::prompts;
use crate::scoring::{visil_score, ScoreTarget, ScoringConfig};
use crate::types::{
    estimate_token_cost, CaptionRecord, FrameRef, MediaContext, Part, Provenance, ScoreRecord, SummaryFormat,
    SummaryRecord, VideoRef, DEFAULT_IMAGE_TOKEN_COST,
};

/// Captions a video, then extracts its keywords from the caption text.
pub fn run_captioning(
    captioner: &dyn Backend,
    keyword_extractor: &dyn Backend,
    video: &VideoRef,
    seed: u64,
) -> Result<CaptionRecord, HarnessError> {
    let unavailable = |e: BackendError| match e {
        BackendError::Refused { .. } | BackendError::Unavailable { .. } => HarnessError::CaptionUnavailable {
            video_id: video.id.clone(),
            source: e,
        },
        other => HarnessError::Backend(other),
    };
    let caption = captioner
        .generate_text(&MediaContext::video(video), prompts::CAPTIONING, seed)
        .map_err(unavailable)?
        .text;
    let raw = keyword_extractor
        .generate_text(&MediaContext::text(caption.clone()), prompts::KEYWORDS, seed)
        .map_err(unavailable)?
        .text;
    let record = CaptionRecord {
        video_id: video.id.clone(),
        text: caption,
        generator_model: captioner.model_id().to_string(),
        keywords: parse_keywords(&raw)?,
    };
    record.validate()?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyframeEntry {
    pub timestamp: String,
    #[serde(default)]
    pub description: String,
}

/// Parses the keyframe answer: a JSON array of `{timestamp, description}`
/// (a lone object is accepted as a one-element array).
pub fn parse_keyframes(raw: &str) -> Result<Vec<KeyframeEntry>, HarnessError> {
    let body = strip_code_fence(raw);
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| HarnessError::KeyframeParse(e.to_string()))?;
    let entries = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value),
        serde_json::Value::Object(_) => serde_json::from_value(value).map(|e| vec![e]),
        _ => return Err(HarnessError::KeyframeParse("not an array".into())),
    }
    .map_err(|e| HarnessError::KeyframeParse(e.to_string()))?;
    Ok(entries)
}

/// Maps frame indices to `frame_dir/frame_{index:06}.png`, running an external
/// extractor when the file is absent and a command template is configured.
///
/// Template tokens: `{video}`, `{index}`, `{seconds}`, `{output}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameResolver {
    pub extractor: Option<String>,
}

impl FrameResolver {
    pub fn resolve(&self, video: &VideoRef, index: u64) -> Result<FrameRef, HarnessError> {
        let path = video
            .frame_path(index)
            .ok_or_else(|| HarnessError::FrameUnavailable(format!("video {} has no frame_dir", video.id)))?;
        if let Some(template) = &self.extractor {
            if !path.exists() {
                self.extract(template, video, index, &path)?;
            }
        }
        Ok(FrameRef(path.display().to_string()))
    }

    fn extract(&self, template: &str, video: &VideoRef, index: u64, out: &Path) -> Result<(), HarnessError> {
        let source = video
            .video_path
            .as_ref()
            .ok_or_else(|| HarnessError::FrameUnavailable(format!("video {} has no video_path", video.id)))?;
        if let Some(dir) = out.parent() {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::FrameUnavailable(e.to_string()))?;
        }
        let seconds = format!("{:.6}", index as f64 / video.fps);
        let args: Vec<String> = template
            .split_whitespace()
            .map(|tok| {
                tok.replace("{video}", &source.display().to_string())
                    .replace("{index}", &index.to_string())
                    .replace("{seconds}", &seconds)
                    .replace("{output}", &out.display().to_string())
            })
            .collect();
        let (program, rest) = args
            .split_first()
            .ok_or_else(|| HarnessError::FrameUnavailable("empty extractor command".into()))?;
        let status = Command::new(program)
            .args(rest)
            .status()
            .map_err(|e| HarnessError::FrameUnavailable(format!("{program}: {e}")))?;
        if !status.success() || !out.exists() {
            return Err(HarnessError::FrameUnavailable(format!(
                "extractor failed for frame {index} of {}",
                video.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub image_token_cost: u64,
    pub resolver: FrameResolver,
    pub seed: u64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            image_token_cost: DEFAULT_IMAGE_TOKEN_COST,
            resolver: FrameResolver::default(),
            seed: 0,
        }
    }
}

fn count_placeholders(text: &str, n: usize) -> usize {
    (1..=n).filter(|i| text.contains(&format!("[KEYFRAME{i}]"))).count()
}

fn frame_inventory(video: &VideoRef) -> Option<usize> {
    let dir = video.frame_dir.as_ref()?;
    let entries = std::fs::read_dir(dir).ok()?;
    let n = entries
        .filter_map(Result::ok)
        .filter(|e| {
            let name = e.file_name();
            let name = name.to_string_lossy();
            name.starts_with("frame_") && name.ends_with(".png")
        })
        .count();
    (n > 0).then_some(n)
}

/// Builds the requested summary formats for one video.
///
/// Image formats share one keyframe request; the summary text is generated
/// with the selected keyframes in context. A full-video summary has no text
/// and is costed from the backend's reported prompt usage for the video.
pub fn build_summaries(
    summarizer: &dyn Backend,
    video: &VideoRef,
    formats: &BTreeSet<SummaryFormat>,
    opts: &SummaryOptions,
) -> Result<(Vec<SummaryRecord>, Vec<HarnessWarning>), HarnessError> {
    let mut warnings = Vec::new();
    let wants_images = formats.contains(&SummaryFormat::OneImage) || formats.contains(&SummaryFormat::ThreeImage);
    let keyframes: Vec<FrameRef> = if wants_images {
        let raw = summarizer
            .generate_text(&MediaContext::video(video), prompts::KEYFRAMES, opts.seed)?
            .text;
        let entries = parse_keyframes(&raw)?;
        if entries.is_empty() {
            return Err(HarnessError::KeyframeParse("no keyframes returned".into()));
        }
        entries
            .iter()
            .take(3)
            .map(|e| {
                let index = parse_timecode(&e.timestamp, video.fps)?;
                opts.resolver.resolve(video, index)
            })
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    // formats to produce, after degrading a short three-image request
    let mut plan: BTreeSet<SummaryFormat> = formats.clone();
    if plan.contains(&SummaryFormat::ThreeImage) && keyframes.len() < 3 {
        warn!("video {}: {} keyframes parsed, 3 requested", video.id, keyframes.len());
        warnings.push(HarnessWarning::KeyframeShortfall {
            video_id: video.id.clone(),
            requested: 3,
            parsed: keyframes.len(),
        });
        plan.remove(&SummaryFormat::ThreeImage);
        plan.insert(SummaryFormat::OneImage);
    }

    let mut records = Vec::new();
    let mut video_prompt_tokens = None;
    let summarize = |images: &[FrameRef]| -> Result<(String, Option<u64>), HarnessError> {
        let ctx = images
            .iter()
            .cloned()
            .fold(MediaContext::video(video), |c, f| c.with_part(Part::Image(f)));
        let g = summarizer.generate_text(&ctx, prompts::SUMMARY, opts.seed)?;
        Ok((g.text.trim().to_string(), g.prompt_tokens))
    };
    for format in plan {
        let summary_id = format!("{}:{}", video.id, format);
        let mut record = SummaryRecord {
            summary_id: summary_id.clone(),
            video_id: video.id.clone(),
            format,
            keyframes: keyframes.iter().take(format.keyframe_count()).cloned().collect(),
            text: String::new(),
            token_cost: 0,
            provenance: Provenance::Generated,
        };
        if format == SummaryFormat::FullVideo {
            if video_prompt_tokens.is_none() {
                video_prompt_tokens = Some(summarize(&[])?.1);
            }
            record.token_cost = estimate_token_cost(
                &record,
                opts.image_token_cost,
                video_prompt_tokens.flatten(),
                frame_inventory(video),
            )?;
        } else {
            let (text, tokens) = summarize(&record.keyframes)?;
            if record.keyframes.is_empty() {
                video_prompt_tokens.get_or_insert(tokens);
            }
            let n = record.keyframes.len();
            let found = count_placeholders(&text, n);
            if n > 0 && found != n {
                warnings.push(HarnessWarning::PlaceholderMismatch {
                    summary_id: summary_id.clone(),
                    expected: n,
                    found,
                });
            }
            record.text = text;
            record.token_cost = estimate_token_cost(&record, opts.image_token_cost, None, None)?;
        }
        record.validate()?;
        records.push(record);
    }
    Ok((records, warnings))
}

/// Scores every summary against its video, in summary order.
pub fn score_batch(
    evaluator: &dyn Backend,
    videos: &[VideoRef],
    captions: &[CaptionRecord],
    summaries: &[SummaryRecord],
    cfg: &ScoringConfig,
    limits: DispatchLimits,
) -> Vec<Result<ScoreRecord, HarnessError>> {
    let videos: HashMap<&str, &VideoRef> = videos.iter().map(|v| (v.id.as_str(), v)).collect();
    let mut masks: HashMap<&str, Result<MaskedCaption, HarnessError>> = HashMap::new();
    for c in captions {
        masks
            .entry(c.video_id.as_str())
            .or_insert_with(|| build_masked_caption(&c.text, &c.keywords).map_err(HarnessError::from));
    }
    dispatch(summaries.iter().collect(), limits, |summary: &SummaryRecord| {
        let video = videos
            .get(summary.video_id.as_str())
            .ok_or_else(|| HarnessError::MissingInput(format!("video {} not in manifest", summary.video_id)))?;
        let masked = match masks.get(summary.video_id.as_str()) {
            Some(Ok(m)) => m,
            Some(Err(e)) => return Err(e.clone()),
            None => return Err(HarnessError::MissingInput(format!("no caption for video {}", summary.video_id))),
        };
        let video_ctx = MediaContext::video(video);
        let summary_ctx = MediaContext::summary(summary, video)?;
        let target = ScoreTarget {
            video_id: &video.id,
            summary_id: &summary.summary_id,
            video: &video_ctx,
            summary: &summary_ctx,
        };
        Ok(visil_score(evaluator, target, masked, cfg)?)
    })
}
