use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::backend::Backend;
use crate::prompts;
use crate::types::{MediaContext, Part, SummaryFormat, SummaryRecord, TypeError, VideoRef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaItem {
    pub video_id: String,
    pub question: String,
    pub options: Vec<String>,
    pub answer_index: usize,
}

impl VqaItem {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(2..=4).contains(&self.options.len()) {
            return Err(HarnessError::MissingInput(format!(
                "question for {} needs 2-4 options, got {}",
                self.video_id,
                self.options.len()
            )));
        }
        if self.answer_index >= self.options.len() {
            return Err(HarnessError::MissingInput(format!(
                "answer_index {} out of range for {}",
                self.answer_index, self.video_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaOutcome {
    pub video_id: String,
    pub summary_id: String,
    pub format: SummaryFormat,
    pub question: String,
    pub parsed: Option<usize>,
    pub correct: bool,
    pub raw_answer: String,
    /// The response was not a single option letter.
    pub anomaly: bool,
}

/// Strict letter parse: after trimming whitespace and punctuation the response
/// must be exactly one of `A`-`D` (either case), within `n_options`.
pub fn parse_letter(raw: &str, n_options: usize) -> Option<usize> {
    let core = raw.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation());
    let mut chars = core.chars();
    let c = chars.next()?.to_ascii_uppercase();
    if chars.next().is_some() || !('A'..='D').contains(&c) {
        return None;
    }
    let index = (c as u8 - b'A') as usize;
    (index < n_options).then_some(index)
}

/// Asks one question given only the summary.
///
/// Keyframes (or the video, for a full-video summary) go in the context; the
/// summary text is filled into the prompt. A text-only summary has no media,
/// so its text doubles as the context.
pub fn run_vqa(
    answerer: &dyn Backend,
    item: &VqaItem,
    summary: &SummaryRecord,
    video: Option<&VideoRef>,
    seed: u64,
) -> Result<VqaOutcome, HarnessError> {
    item.validate()?;
    if item.video_id != summary.video_id {
        return Err(HarnessError::MissingInput(format!(
            "question is about {}, summary {} is not",
            item.video_id, summary.summary_id
        )));
    }
    let mut parts: Vec<Part> = summary.keyframes.iter().cloned().map(Part::Image).collect();
    if summary.format == SummaryFormat::FullVideo {
        let video = video.ok_or_else(|| HarnessError::MissingInput(format!("video {}", summary.video_id)))?;
        parts.push(Part::Video(video.clone()));
    }
    if parts.is_empty() {
        parts.push(Part::Text(summary.text.clone()));
    }
    let ctx = MediaContext::new(parts).map_err(|e: TypeError| HarnessError::Types(e))?;
    let prompt = prompts::render_vqa(
        summary.format.input_phrase(),
        &summary.text,
        &item.question,
        &item.options,
    );
    let raw = answerer.generate_text(&ctx, &prompt, seed)?.text;
    let parsed = parse_letter(&raw, item.options.len());
    Ok(VqaOutcome {
        video_id: item.video_id.clone(),
        summary_id: summary.summary_id.clone(),
        format: summary.format,
        question: item.question.clone(),
        parsed,
        correct: parsed == Some(item.answer_index),
        raw_answer: raw,
        anomaly: parsed.is_none(),
    })
}
