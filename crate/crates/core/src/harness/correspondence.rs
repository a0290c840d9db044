use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessWarning};
use crate::backend::Backend;
use crate::masking::strip_code_fence;
use crate::prompts;
use crate::types::{MediaContext, Part, SummaryFormat, SummaryRecord, VideoRef};

/// Distractors requested per summary.
const DISTRACTOR_COUNT: usize = 3;
const DISTRACTOR_FORMAT: &str = "JSON array of strings";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrespondenceLabel {
    GroundTruth,
    TextConfused,
    VisualConfused,
}

impl CorrespondenceLabel {
    pub fn expects_match(self) -> bool {
        self == CorrespondenceLabel::GroundTruth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceItem {
    pub video_id: String,
    pub summary: SummaryRecord,
    pub label: CorrespondenceLabel,
    /// The ground-truth summary this item perturbs (its own id when unperturbed).
    pub source_summary_id: String,
}

impl CorrespondenceItem {
    pub fn ground_truth(summary: &SummaryRecord) -> Self {
        Self {
            video_id: summary.video_id.clone(),
            summary: summary.clone(),
            label: CorrespondenceLabel::GroundTruth,
            source_summary_id: summary.summary_id.clone(),
        }
    }
}

fn parse_distractors(raw: &str) -> Vec<String> {
    serde_json::from_str::<Vec<serde_json::Value>>(strip_code_fence(raw))
        .map(|v| {
            v.into_iter()
                .filter_map(|x| x.as_str().map(str::trim).filter(|s| !s.is_empty()).map(str::to_string))
                .collect()
        })
        .unwrap_or_default()
}

/// Builds ground-truth, text-confused and visual-confused items for a batch.
///
/// Text distractors come from the backend with keyframes kept. Visual
/// distractors keep the text and take the same-position keyframes of the next
/// summary of the same format from a different video, rotating through the
/// batch. Full-video summaries carry nothing to perturb and are skipped.
pub fn make_distractors(
    generator: &dyn Backend,
    summaries: &[SummaryRecord],
    seed: u64,
) -> Result<(Vec<CorrespondenceItem>, Vec<HarnessWarning>), HarnessError> {
    let mut items = Vec::new();
    let mut warnings = Vec::new();
    let prompt = prompts::render_distractors(DISTRACTOR_COUNT, DISTRACTOR_FORMAT);
    for (i, summary) in summaries.iter().enumerate() {
        if summary.format == SummaryFormat::FullVideo {
            continue;
        }
        items.push(CorrespondenceItem::ground_truth(summary));

        let raw = generator
            .generate_text(&MediaContext::text(summary.text.clone()), &prompt, seed)?
            .text;
        let texts = parse_distractors(&raw);
        if texts.len() < DISTRACTOR_COUNT {
            warnings.push(HarnessWarning::DistractorShortfall {
                summary_id: summary.summary_id.clone(),
                expected: DISTRACTOR_COUNT,
                parsed: texts.len(),
            });
        }
        for (j, text) in texts.into_iter().take(DISTRACTOR_COUNT).enumerate() {
            let mut s = summary.clone();
            s.summary_id = format!("{}:text{j}", summary.summary_id);
            s.text = text;
            items.push(CorrespondenceItem {
                video_id: summary.video_id.clone(),
                summary: s,
                label: CorrespondenceLabel::TextConfused,
                source_summary_id: summary.summary_id.clone(),
            });
        }

        let k = summary.keyframes.len();
        if k == 0 {
            warnings.push(HarnessWarning::VisualConfusionSkipped {
                summary_id: summary.summary_id.clone(),
                reason: "summary has no keyframes".into(),
            });
            continue;
        }
        let n = summaries.len();
        let donor = (1..n).map(|step| &summaries[(i + step) % n]).find(|s| {
            s.video_id != summary.video_id && s.format == summary.format && s.keyframes.len() >= k
        });
        match donor {
            Some(d) => {
                let mut s = summary.clone();
                s.summary_id = format!("{}:visual", summary.summary_id);
                s.keyframes = d.keyframes[..k].to_vec();
                items.push(CorrespondenceItem {
                    video_id: summary.video_id.clone(),
                    summary: s,
                    label: CorrespondenceLabel::VisualConfused,
                    source_summary_id: summary.summary_id.clone(),
                });
            }
            None => warnings.push(HarnessWarning::VisualConfusionSkipped {
                summary_id: summary.summary_id.clone(),
                reason: "no other video with keyframes in the batch".into(),
            }),
        }
    }
    Ok((items, warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub judged_match: bool,
    pub confidence: Option<u8>,
}

/// First standalone "yes"/"no" decides the match; the first digit 1-5 after
/// it is the confidence.
pub fn parse_judgment(raw: &str) -> Option<Judgment> {
    let words: Vec<String> = raw
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let pos = words.iter().position(|w| w == "yes" || w == "no")?;
    let judged_match = words[pos] == "yes";
    let confidence = words[pos + 1..]
        .iter()
        .find_map(|w| w.parse::<u8>().ok().filter(|c| (1..=5).contains(c)));
    Some(Judgment {
        judged_match,
        confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceOutcome {
    pub item_summary_id: String,
    pub source_summary_id: String,
    pub video_id: String,
    pub label: CorrespondenceLabel,
    pub format: SummaryFormat,
    pub judgment: Option<Judgment>,
    pub correct: bool,
    pub raw_answer: String,
}

/// Shows the video, then the summary, and asks whether they correspond.
/// An unparseable answer counts as incorrect.
pub fn run_correspondence(
    judge: &dyn Backend,
    video: &VideoRef,
    item: &CorrespondenceItem,
    seed: u64,
) -> Result<CorrespondenceOutcome, HarnessError> {
    if item.video_id != video.id {
        return Err(HarnessError::MissingInput(format!(
            "item {} belongs to {}, not {}",
            item.summary.summary_id, item.video_id, video.id
        )));
    }
    let mut ctx = MediaContext::video(video);
    for f in &item.summary.keyframes {
        ctx = ctx.with_part(Part::Image(f.clone()));
    }
    if !item.summary.text.is_empty() {
        ctx = ctx.with_part(Part::Text(item.summary.text.clone()));
    }
    let raw = judge.generate_text(&ctx, prompts::CORRESPONDENCE, seed)?.text;
    let judgment = parse_judgment(&raw);
    Ok(CorrespondenceOutcome {
        item_summary_id: item.summary.summary_id.clone(),
        source_summary_id: item.source_summary_id.clone(),
        video_id: item.video_id.clone(),
        label: item.label,
        format: item.summary.format,
        correct: judgment.is_some_and(|j| j.judged_match == item.label.expects_match()),
        judgment,
        raw_answer: raw,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceCell {
    pub label: CorrespondenceLabel,
    pub format: SummaryFormat,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub anomalies: usize,
    pub mean_confidence: Option<f64>,
}

/// Accuracy per (label, format), in label then format order.
pub fn aggregate_correspondence(outcomes: &[CorrespondenceOutcome]) -> Vec<CorrespondenceCell> {
    let mut cells: BTreeMap<(CorrespondenceLabel, SummaryFormat), Vec<&CorrespondenceOutcome>> = BTreeMap::new();
    for o in outcomes {
        cells.entry((o.label, o.format)).or_default().push(o);
    }
    cells
        .into_iter()
        .map(|((label, format), group)| {
            let correct = group.iter().filter(|o| o.correct).count();
            let confidences: Vec<f64> = group
                .iter()
                .filter_map(|o| o.judgment.and_then(|j| j.confidence))
                .map(f64::from)
                .collect();
            CorrespondenceCell {
                label,
                format,
                n: group.len(),
                correct,
                accuracy: correct as f64 / group.len() as f64,
                anomalies: group.iter().filter(|o| o.judgment.is_none()).count(),
                mean_confidence: (!confidences.is_empty())
                    .then(|| confidences.iter().sum::<f64>() / confidences.len() as f64),
            }
        })
        .collect()
}
