use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::backend::synthetic::{SyntheticBackend, ToyWorld};
use crate::masking::build_masked_caption;
use crate::scoring::{visil_score, ScoreTarget, ScoringConfig};
use crate::types::{
    estimate_token_cost, CaptionRecord, FrameRef, MediaContext, Provenance, ScoreRecord, SummaryFormat,
    SummaryRecord, VideoRef, DEFAULT_IMAGE_TOKEN_COST,
};

/// Filler word for a summary that covers no facts.
const EMPTY_SUMMARY: &str = "scene";
const SYNTHETIC_MODEL: &str = "synthetic";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub facts_per_video: usize,
    pub p_hit: f64,
    pub p_miss: f64,
    pub n_videos: usize,
    /// Probability that a summary of each format covers a given fact.
    pub coverage_by_format: BTreeMap<SummaryFormat, f64>,
    pub scoring: ScoringConfig,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            facts_per_video: 10,
            p_hit: 0.9,
            p_miss: 0.1,
            n_videos: 50,
            coverage_by_format: [
                (SummaryFormat::TextOnly, 0.25),
                (SummaryFormat::OneImage, 0.5),
                (SummaryFormat::ThreeImage, 0.75),
                (SummaryFormat::FullVideo, 1.0),
            ]
            .into(),
            scoring: ScoringConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessLabel {
    pub video_id: String,
    pub summary_id: String,
    pub queried_fact: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticExperiment {
    pub world: ToyWorld,
    pub videos: Vec<VideoRef>,
    pub captions: Vec<CaptionRecord>,
    pub summaries: Vec<SummaryRecord>,
    pub records: Vec<ScoreRecord>,
    pub correctness: Vec<CorrectnessLabel>,
}

/// Generates toy videos whose captions list their facts, one summary per
/// format covering a random subset of facts, scores every summary, and draws
/// one question outcome per summary: a uniformly chosen fact is answered
/// correctly with `p_hit` if covered and `p_miss` otherwise.
///
/// Everything is a function of `spec.seed`.
pub fn synthetic_experiment(spec: &SyntheticSpec) -> Result<SyntheticExperiment, HarnessError> {
    if let Some((f, c)) = spec.coverage_by_format.iter().find(|(_, c)| !(0.0..=1.0).contains(*c)) {
        return Err(HarnessError::MissingInput(format!("coverage {c} for {f} outside [0, 1]")));
    }
    let ids: Vec<String> = (0..spec.n_videos).map(|i| format!("toy{i:03}")).collect();
    let world = ToyWorld::new(spec.facts_per_video, spec.p_hit, spec.p_miss, spec.seed).with_generated_videos(&ids);
    let backend = SyntheticBackend::new(world.clone(), SYNTHETIC_MODEL);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut exp = SyntheticExperiment {
        world: world.clone(),
        videos: Vec::new(),
        captions: Vec::new(),
        summaries: Vec::new(),
        records: Vec::new(),
        correctness: Vec::new(),
    };
    for id in &ids {
        let facts = world.video_facts(id).expect("generated above").to_vec();
        let video = VideoRef {
            id: id.clone(),
            frame_dir: Some(format!("toy/{id}").into()),
            video_path: None,
            fps: 30.0,
            duration_s: facts.len() as f64,
            dataset_tag: "synthetic".into(),
        };
        let caption = CaptionRecord {
            video_id: id.clone(),
            text: facts.join(" "),
            generator_model: SYNTHETIC_MODEL.into(),
            keywords: facts.clone(),
        };
        let masked = build_masked_caption(&caption.text, &caption.keywords)?;
        let video_ctx = MediaContext::video(&video);

        for (&format, &coverage) in &spec.coverage_by_format {
            let covered: Vec<bool> = facts
                .iter()
                .map(|_| format == SummaryFormat::FullVideo || rng.random_bool(coverage))
                .collect();
            let mut summary = SummaryRecord {
                summary_id: format!("{id}:{format}"),
                video_id: id.clone(),
                format,
                keyframes: (0..format.keyframe_count())
                    .map(|k| FrameRef(format!("toy/{id}/frame_{:06}.png", 30 * k)))
                    .collect(),
                text: String::new(),
                token_cost: 0,
                provenance: Provenance::Generated,
            };
            let reported = if format == SummaryFormat::FullVideo {
                // what the synthetic backend reports for a video part
                let g = backend_prompt_tokens(&backend, &video)?;
                Some(g)
            } else {
                let mut words: Vec<String> = (1..=summary.keyframes.len()).map(|k| format!("[KEYFRAME{k}]")).collect();
                words.extend(facts.iter().zip(&covered).filter(|(_, c)| **c).map(|(f, _)| f.clone()));
                if words.is_empty() {
                    words.push(EMPTY_SUMMARY.into());
                }
                summary.text = words.join(" ");
                None
            };
            summary.token_cost = estimate_token_cost(&summary, DEFAULT_IMAGE_TOKEN_COST, reported, None)?;
            summary.validate()?;

            let summary_ctx = MediaContext::summary(&summary, &video)?;
            let target = ScoreTarget {
                video_id: id,
                summary_id: &summary.summary_id,
                video: &video_ctx,
                summary: &summary_ctx,
            };
            let record = visil_score(&backend, target, &masked, &spec.scoring)?;

            let q = rng.random_range(0..facts.len());
            let p = if covered[q] { spec.p_hit } else { spec.p_miss };
            exp.correctness.push(CorrectnessLabel {
                video_id: id.clone(),
                summary_id: summary.summary_id.clone(),
                queried_fact: facts[q].clone(),
                correct: rng.random_bool(p),
            });
            exp.records.push(record);
            exp.summaries.push(summary);
        }
        exp.videos.push(video);
        exp.captions.push(caption);
    }
    Ok(exp)
}

fn backend_prompt_tokens(backend: &SyntheticBackend, video: &VideoRef) -> Result<u64, HarnessError> {
    use crate::backend::Backend;
    let g = backend.generate_text(&MediaContext::video(video), crate::prompts::SUMMARY, 0)?;
    g.prompt_tokens
        .ok_or_else(|| HarnessError::MissingInput("synthetic backend reported no usage".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(coverage: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n_videos: 20,
            coverage_by_format: [(SummaryFormat::TextOnly, coverage)].into(),
            seed,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn full_coverage_has_zero_loss() {
        let e = synthetic_experiment(&spec(1.0, 3)).unwrap();
        assert!(e.records.iter().all(|r| r.visil == 0.0));
        let rate = e.correctness.iter().filter(|c| c.correct).count() as f64 / 20.0;
        assert!(rate > 0.6, "rate {rate}");
    }

    #[test]
    fn zero_coverage_loses_everything() {
        let e = synthetic_experiment(&spec(0.0, 3)).unwrap();
        let expected = 10.0 * 9f64.ln();
        assert!(e.records.iter().all(|r| (r.visil - expected).abs() < 1e-9));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = synthetic_experiment(&spec(0.5, 11)).unwrap();
        let b = synthetic_experiment(&spec(0.5, 11)).unwrap();
        assert_eq!(a, b);
        let c = synthetic_experiment(&spec(0.5, 12)).unwrap();
        assert_ne!(a.correctness, c.correctness);
    }

    #[test]
    fn default_formats_and_costs() {
        let e = synthetic_experiment(&SyntheticSpec {
            n_videos: 2,
            ..SyntheticSpec::default()
        })
        .unwrap();
        assert_eq!(e.summaries.len(), 8);
        let full = e.summaries.iter().find(|s| s.format == SummaryFormat::FullVideo).unwrap();
        assert!(full.token_cost >= 7000);
        let three = e.summaries.iter().find(|s| s.format == SummaryFormat::ThreeImage).unwrap();
        assert!(three.token_cost >= 3 * DEFAULT_IMAGE_TOKEN_COST);
    }

    #[test]
    fn correctness_falls_with_loss() {
        // mean correctness per coverage level, pooled over seeds
        let rate = |c: f64| {
            let mut hits = 0;
            let mut n = 0;
            for seed in 0..10 {
                let e = synthetic_experiment(&spec(c, seed)).unwrap();
                hits += e.correctness.iter().filter(|x| x.correct).count();
                n += e.correctness.len();
            }
            hits as f64 / n as f64
        };
        let rates: Vec<f64> = [0.0, 0.5, 1.0].iter().map(|&c| rate(c)).collect();
        assert!(rates[0] < rates[1] && rates[1] < rates[2], "{rates:?}");
    }
}
