//! A toy world with a closed-form evaluator.
//!
//! Each video is a list of fact tokens. A keyword scores `ln p_hit` when the
//! conditioning context contains it and `ln p_miss` otherwise, so the score of
//! a summary is `|missing keywords| * ln(p_hit / p_miss)` exactly.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError, Generation, KeywordScores};
use crate::masking::MaskedCaption;
use crate::prompts::PromptKind;
use crate::types::{MediaContext, Part, VideoRef, DEFAULT_IMAGE_TOKEN_COST};

/// Prompt tokens charged per fact of a video part.
const TOKENS_PER_VIDEO_FACT: u64 = 700;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyWorld {
    pub facts_per_video: usize,
    pub p_hit: f64,
    pub p_miss: f64,
    pub seed: u64,
    /// Facts of each video, in caption order.
    pub videos: BTreeMap<String, Vec<String>>,
    /// Facts visible in a given frame.
    #[serde(default)]
    pub frames: BTreeMap<String, Vec<String>>,
}

impl ToyWorld {
    pub fn new(facts_per_video: usize, p_hit: f64, p_miss: f64, seed: u64) -> Self {
        assert!(facts_per_video > 0, "facts_per_video must be positive");
        assert!(
            0.0 < p_miss && p_miss < p_hit && p_hit <= 1.0,
            "need 0 < p_miss < p_hit <= 1"
        );
        Self {
            facts_per_video,
            p_hit,
            p_miss,
            seed,
            videos: BTreeMap::new(),
            frames: BTreeMap::new(),
        }
    }

    pub fn with_video(mut self, id: impl Into<String>, facts: &[&str]) -> Self {
        self.videos
            .insert(id.into(), facts.iter().map(|f| f.to_string()).collect());
        self
    }

    pub fn with_frame(mut self, frame: impl Into<String>, facts: &[&str]) -> Self {
        self.frames
            .insert(frame.into(), facts.iter().map(|f| f.to_string()).collect());
        self
    }

    /// Fact tokens of a generated video: `v{index}f{j}`.
    pub fn generated_facts(&self, index: usize) -> Vec<String> {
        (0..self.facts_per_video).map(|j| format!("v{index}f{j}")).collect()
    }

    /// Registers `facts_per_video` distinct facts for each id, in order.
    pub fn with_generated_videos<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for (i, id) in ids.into_iter().enumerate() {
            let facts = self.generated_facts(i);
            self.videos.insert(id.into(), facts);
        }
        self
    }

    pub fn is_fact(&self, token: &str) -> bool {
        self.videos.values().chain(self.frames.values()).flatten().any(|f| f == token)
    }

    pub fn video_facts(&self, id: &str) -> Option<&[String]> {
        self.videos.get(id).map(Vec::as_slice)
    }

    /// Facts carried by a context: word tokens of its text, all facts of any
    /// video part, and facts registered for its frames.
    pub fn context_facts(&self, ctx: &MediaContext) -> Result<HashSet<String>, BackendError> {
        let mut facts = HashSet::new();
        for part in ctx.parts() {
            match part {
                Part::Text(t) => facts.extend(words(t)),
                Part::Video(v) => {
                    let vf = self
                        .video_facts(&v.id)
                        .ok_or_else(|| BackendError::UnknownVideo(v.id.clone()))?;
                    facts.extend(vf.iter().cloned());
                }
                Part::Image(f) => {
                    if let Some(ff) = self.frames.get(&f.0) {
                        facts.extend(ff.iter().cloned());
                    }
                }
            }
        }
        Ok(facts)
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
}

/// `ln p_hit` for keywords present in `context_facts`, `ln p_miss` otherwise.
pub fn synthetic_score_keywords(
    world: &ToyWorld,
    context_facts: &HashSet<String>,
    masked: &MaskedCaption,
) -> Result<Vec<f64>, BackendError> {
    let (hit, miss) = (world.p_hit.ln(), world.p_miss.ln());
    masked
        .keywords()
        .map(|kw| {
            if !world.is_fact(kw) {
                return Err(BackendError::UnknownFact(kw.to_string()));
            }
            Ok(if context_facts.contains(kw) { hit } else { miss })
        })
        .collect()
}

pub struct SyntheticBackend {
    world: ToyWorld,
    model_id: String,
}

impl SyntheticBackend {
    pub fn new(world: ToyWorld, model_id: impl Into<String>) -> Self {
        Self {
            world,
            model_id: model_id.into(),
        }
    }

    pub fn world(&self) -> &ToyWorld {
        &self.world
    }

    fn single_video<'a>(&self, ctx: &'a MediaContext) -> Result<&'a VideoRef, BackendError> {
        ctx.parts()
            .iter()
            .find_map(|p| match p {
                Part::Video(v) => Some(v),
                _ => None,
            })
            .ok_or_else(|| BackendError::InvalidContext("expected a video part".into()))
    }

    fn facts_of(&self, video: &VideoRef) -> Result<&[String], BackendError> {
        self.world
            .video_facts(&video.id)
            .ok_or_else(|| BackendError::UnknownVideo(video.id.clone()))
    }

    fn prompt_tokens(&self, ctx: &MediaContext, prompt: &str) -> u64 {
        let mut n = prompt.split_whitespace().count() as u64;
        for part in ctx.parts() {
            n += match part {
                Part::Text(t) => t.split_whitespace().count() as u64,
                Part::Image(_) => DEFAULT_IMAGE_TOKEN_COST,
                Part::Video(v) => self.world.video_facts(&v.id).map_or(0, |f| f.len() as u64) * TOKENS_PER_VIDEO_FACT,
            };
        }
        n
    }

    fn answer(&self, ctx: &MediaContext, prompt: &str) -> Result<String, BackendError> {
        let kind = PromptKind::identify(prompt).ok_or(BackendError::UnsupportedPrompt)?;
        match kind {
            PromptKind::Captioning => Ok(self.facts_of(self.single_video(ctx)?)?.join(" ")),
            PromptKind::Keywords => {
                let mut seen = BTreeSet::new();
                let kws: Vec<String> = words(&ctx.joined_text())
                    .filter(|w| self.world.is_fact(w) && seen.insert(w.clone()))
                    .collect();
                Ok(serde_json::to_string(&kws).expect("strings serialize"))
            }
            PromptKind::Keyframes => {
                let facts = self.facts_of(self.single_video(ctx)?)?;
                let frames: Vec<_> = (0..3)
                    .map(|j| {
                        json!({
                            "timestamp": format!("00:00:{:02}:00", j + 1),
                            "description": facts.get(j).cloned().unwrap_or_else(|| "scene".into()),
                        })
                    })
                    .collect();
                Ok(serde_json::to_string(&frames).expect("json serializes"))
            }
            PromptKind::Summary => {
                let facts = self.facts_of(self.single_video(ctx)?)?;
                let n_images = ctx.image_count();
                let mut words: Vec<String> = (1..=n_images).map(|i| format!("[KEYFRAME{i}]")).collect();
                words.extend(facts.iter().take(facts.len().div_ceil(2)).cloned());
                Ok(words.join(" "))
            }
            PromptKind::Distractors => {
                let text = ctx.joined_text();
                let tokens: Vec<&str> = text.split_whitespace().collect();
                let fact_positions: Vec<usize> = tokens
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| self.world.is_fact(t))
                    .map(|(i, _)| i)
                    .collect();
                let variants: Vec<String> = (0..3)
                    .map(|j| {
                        let mut t: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
                        if let Some(&pos) = fact_positions.get(j % fact_positions.len().max(1)) {
                            t[pos] = format!("other{j}");
                        } else {
                            t.push(format!("other{j}"));
                        }
                        t.join(" ")
                    })
                    .collect();
                Ok(serde_json::to_string(&variants).expect("strings serialize"))
            }
            PromptKind::Correspondence => {
                let video = self.single_video(ctx)?;
                let facts: HashSet<&str> = self.facts_of(video)?.iter().map(String::as_str).collect();
                let text_ok = words(&ctx.joined_text())
                    .all(|w| !w.starts_with("other") && (facts.contains(w.as_str()) || !self.world.is_fact(&w)));
                let frame_prefix = video.frame_dir.as_ref().map(|d| d.display().to_string());
                let images_ok = ctx.parts().iter().all(|p| match (p, &frame_prefix) {
                    (Part::Image(f), Some(prefix)) => f.0.starts_with(prefix.as_str()),
                    _ => true,
                });
                Ok(if text_ok && images_ok { "Yes 5" } else { "No 4" }.to_string())
            }
            PromptKind::Vqa => {
                // first option whose text is a fact of the context, else A
                let ctx_facts = self.world.context_facts(ctx)?;
                let summary_facts: HashSet<String> = prompt
                    .lines()
                    .find_map(|l| l.strip_prefix("Textual description of the video: "))
                    .map(|s| words(s).collect())
                    .unwrap_or_default();
                let letter = prompt
                    .lines()
                    .filter_map(|l| {
                        let l = l.strip_prefix("Options: ").unwrap_or(l);
                        let (letter, text) = l.split_once(". ")?;
                        (letter.len() == 1).then_some((letter.to_string(), text.trim().to_lowercase()))
                    })
                    .find(|(_, text)| ctx_facts.contains(text) || summary_facts.contains(text))
                    .map(|(l, _)| l)
                    .unwrap_or_else(|| "A".into());
                Ok(letter)
            }
            PromptKind::Visil => Err(BackendError::UnsupportedPrompt),
        }
    }
}

impl Backend for SyntheticBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn generate_text(
        &self,
        context: &MediaContext,
        prompt: &str,
        _seed: u64,
    ) -> Result<Generation, BackendError> {
        Ok(Generation {
            text: self.answer(context, prompt)?,
            prompt_tokens: Some(self.prompt_tokens(context, prompt)),
        })
    }

    fn score_keywords(
        &self,
        context: &MediaContext,
        masked: &MaskedCaption,
        _seed: u64,
    ) -> Result<KeywordScores, BackendError> {
        let facts = self.world.context_facts(context)?;
        Ok(KeywordScores {
            logprobs: synthetic_score_keywords(&self.world, &facts, masked)?,
            empty_recovery: false,
            prompt_tokens: Some(self.prompt_tokens(context, &masked.masked_text)),
        })
    }
}
