//! Summary information-loss score.
//!
//! `visil = ln P(C | video) - ln P(C | summary)`, each term approximated by the
//! sum over masked keywords of the per-keyword log-probability, geometric-mean
//! aggregated over `runs` repeated backend calls. Values are in nats; lower is
//! better; negative values are legitimate and never clamped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError, KeywordScores, DEFAULT_EPSILON_FLOOR, DEFAULT_TOP_K};
use crate::dispatch::{dispatch, DispatchLimits};
use crate::masking::MaskedCaption;
use crate::types::{MediaContext, ScoreRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("probability {0} outside (0, 1]; apply the floor first")]
    Domain(f64),
    #[error("geometric mean needs at least one sample row of equal width")]
    Shape,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("backend returned {got} values for {expected} slots")]
    SlotCount { expected: usize, got: usize },
    #[error("context refers to video '{found}', expected '{expected}'")]
    IdentityMismatch { expected: String, found: String },
    #[error("masked caption has no slots")]
    EmptyMask,
    #[error("invalid scoring config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringConfig {
    pub runs: u32,
    pub seed: u64,
    pub epsilon_floor: f64,
    pub top_k: u32,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            runs: 3,
            seed: 0,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if self.runs == 0 {
            return Err(ScoringError::Config("runs must be at least 1".into()));
        }
        if !(self.epsilon_floor > 0.0 && self.epsilon_floor < 1.0) {
            return Err(ScoringError::Config("epsilon_floor must lie in (0, 1)".into()));
        }
        if self.top_k == 0 {
            return Err(ScoringError::Config("top_k must be positive".into()));
        }
        Ok(())
    }
}

/// Mean computed as an offset from the first value, so identical inputs
/// return that value bit-for-bit.
fn shifted_mean(values: impl ExactSizeIterator<Item = f64> + Clone) -> f64 {
    let n = values.len() as f64;
    let mut it = values.clone();
    let Some(first) = it.next() else { return f64::NAN };
    first + values.map(|v| v - first).sum::<f64>() / n
}

/// Column-wise geometric mean of probabilities, `exp(mean(ln p))`.
pub fn geometric_mean_probs(samples: &[Vec<f64>]) -> Result<Vec<f64>, ScoringError> {
    let Some(first) = samples.first() else {
        return Err(ScoringError::Shape);
    };
    let width = first.len();
    if samples.iter().any(|r| r.len() != width) {
        return Err(ScoringError::Shape);
    }
    if let Some(&bad) = samples.iter().flatten().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(ScoringError::Domain(bad));
    }
    Ok((0..width)
        .map(|j| {
            let col = samples.iter().map(|r| r[j]);
            if col.clone().all(|p| p == first[j]) {
                return first[j];
            }
            shifted_mean(col.map(f64::ln)).exp()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptionLogprob {
    /// `sum_i ln pbar(k_i | context)`, never positive.
    pub total: f64,
    /// `ln pbar(k_i | context)` per keyword.
    pub per_keyword: Vec<f64>,
    /// Floored log-probabilities, `runs x n_keywords`.
    pub runs: Vec<Vec<f64>>,
    pub floored_runs: u32,
}

fn floor_run(scores: &KeywordScores, n: usize, ln_floor: f64) -> Result<(Vec<f64>, bool), ScoringError> {
    if scores.logprobs.len() != n {
        return Err(ScoringError::SlotCount {
            expected: n,
            got: scores.logprobs.len(),
        });
    }
    let row: Vec<f64> = scores
        .logprobs
        .iter()
        .map(|&lp| if lp.is_nan() { ln_floor } else { lp.clamp(ln_floor, 0.0) })
        .collect();
    let fully_floored = scores.empty_recovery || row.iter().all(|&v| v == ln_floor);
    Ok((row, fully_floored))
}

/// Aggregates per-run keyword scores: floor each run, then geometric-mean
/// per keyword (mean of logs, fixed run order), then sum over keywords.
pub fn aggregate_runs(
    run_scores: &[KeywordScores],
    n_keywords: usize,
    epsilon_floor: f64,
) -> Result<CaptionLogprob, ScoringError> {
    let ln_floor = epsilon_floor.ln();
    let mut runs = Vec::with_capacity(run_scores.len());
    let mut floored_runs = 0;
    for s in run_scores {
        let (row, fully) = floor_run(s, n_keywords, ln_floor)?;
        floored_runs += u32::from(fully);
        runs.push(row);
    }
    let per_keyword: Vec<f64> = (0..n_keywords)
        .map(|j| shifted_mean(runs.iter().map(|r| r[j])).min(0.0))
        .collect();
    let total = per_keyword.iter().sum();
    Ok(CaptionLogprob {
        total,
        per_keyword,
        runs,
        floored_runs,
    })
}

fn run_seeds(cfg: &ScoringConfig) -> impl Iterator<Item = u64> + '_ {
    (0..u64::from(cfg.runs)).map(|r| cfg.seed.wrapping_add(r))
}

/// `ln P(C | context)` over `cfg.runs` calls seeded `seed, seed+1, ...`.
pub fn conditional_caption_logprob<B: Backend + ?Sized>(
    backend: &B,
    context: &MediaContext,
    masked: &MaskedCaption,
    cfg: &ScoringConfig,
) -> Result<CaptionLogprob, ScoringError> {
    cfg.validate()?;
    if masked.is_empty() {
        return Err(ScoringError::EmptyMask);
    }
    let runs: Vec<KeywordScores> = run_seeds(cfg)
        .map(|seed| backend.score_keywords(context, masked, seed))
        .collect::<Result<_, _>>()?;
    aggregate_runs(&runs, masked.len(), cfg.epsilon_floor)
}

/// The pair being scored. Any video part in either context must be `video_id`.
#[derive(Debug, Clone, Copy)]
pub struct ScoreTarget<'a> {
    pub video_id: &'a str,
    pub summary_id: &'a str,
    pub video: &'a MediaContext,
    pub summary: &'a MediaContext,
}

impl ScoreTarget<'_> {
    fn check_identity(&self) -> Result<(), ScoringError> {
        for ctx in [self.video, self.summary] {
            if let Some(found) = ctx.video_ids().into_iter().find(|id| *id != self.video_id) {
                return Err(ScoringError::IdentityMismatch {
                    expected: self.video_id.to_string(),
                    found: found.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Scores one summary against its video.
///
/// The `2 x runs` backend calls run concurrently; aggregation order is fixed
/// (run index, then keyword index), so results do not depend on scheduling.
pub fn visil_score<B: Backend + ?Sized>(
    backend: &B,
    target: ScoreTarget<'_>,
    masked: &MaskedCaption,
    cfg: &ScoringConfig,
) -> Result<ScoreRecord, ScoringError> {
    cfg.validate()?;
    target.check_identity()?;
    if masked.is_empty() {
        return Err(ScoringError::EmptyMask);
    }
    let jobs: Vec<(bool, u64)> = [false, true]
        .into_iter()
        .flat_map(|is_summary| run_seeds(cfg).map(move |s| (is_summary, s)))
        .collect();
    let limits = DispatchLimits::new(jobs.len(), None);
    let results = dispatch(jobs, limits, |(is_summary, seed)| {
        let ctx = if is_summary { target.summary } else { target.video };
        backend.score_keywords(ctx, masked, seed)
    });
    let results: Vec<KeywordScores> = results.into_iter().collect::<Result<_, _>>()?;
    let (video_runs, summary_runs) = results.split_at(cfg.runs as usize);

    let n = masked.len();
    let given_video = aggregate_runs(video_runs, n, cfg.epsilon_floor)?;
    let given_summary = aggregate_runs(summary_runs, n, cfg.epsilon_floor)?;
    let visil = given_video.total - given_summary.total;
    Ok(ScoreRecord {
        video_id: target.video_id.to_string(),
        summary_id: target.summary_id.to_string(),
        evaluator_model: backend.model_id().to_string(),
        runs: cfg.runs,
        seed: cfg.seed,
        epsilon_floor: cfg.epsilon_floor,
        keywords: masked.keywords().map(str::to_string).collect(),
        per_keyword_logp_video: given_video.runs,
        per_keyword_logp_summary: given_summary.runs,
        logp_c_given_v: given_video.total,
        logp_c_given_s: given_summary.total,
        visil,
        visil_per_keyword: visil / n as f64,
        excluded_keywords: masked.excluded.len(),
        floored_runs: given_video.floored_runs + given_summary.floored_runs,
    })
}
