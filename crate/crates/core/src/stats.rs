//! Validation statistics: Pearson's r, a seeded permutation test on r, and
//! logistic regression of answer correctness on the score.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use log::warn;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::ScoreRecord;

/// Log-likelihood change below which IRLS stops.
pub const LOGISTIC_TOLERANCE: f64 = 1e-8;
pub const LOGISTIC_MAX_ITER: usize = 100;
/// Coefficient norm treated as divergence under separation.
pub const SEPARATION_NORM: f64 = 1e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("records come from several evaluator models ({0}); scores are not comparable across models")]
    EvaluatorMismatch(String),
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::DegenerateInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(StatsError::DegenerateInput(format!("need at least 3 pairs, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value".into()));
    }
    Ok(())
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| a - mean).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    let (dx, dy) = (centered(x), centered(y));
    let (sxx, syy) = (dot(&dx, &dx), dot(&dy, &dy));
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("constant vector".into()));
    }
    Ok((dot(&dx, &dy) / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Uniform integer in `[0, n)` by rejection on a 64-bit draw.
fn uniform_below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % n;
        }
    }
}

/// Permutation of `0..n` for shuffle number `index`.
///
/// ChaCha8 seeded with `seed`, stream `index`; Fisher–Yates from the top,
/// swapping position `i` with a uniform `j` in `[0, i]`. Every shuffle owns its
/// stream, so results do not depend on how shuffles are scheduled.
pub fn shuffle_indices(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub r_obs: f64,
    pub perm_p: f64,
    pub n_shuffles: u64,
    pub seed: u64,
}

/// Two-sided permutation test on Pearson's r:
/// `p = (1 + #{|r_perm| >= |r_obs|}) / (1 + n_shuffles)`.
pub fn permutation_test(x: &[f64], y: &[f64], n_shuffles: u64, seed: u64) -> Result<PermutationResult, StatsError> {
    assert!(n_shuffles > 0, "n_shuffles must be positive");
    let r_obs = pearson_r(x, y)?;
    let (dx, dy) = (centered(x), centered(y));
    // permuting y leaves both norms unchanged
    let denom = (dot(&dx, &dx) * dot(&dy, &dy)).sqrt();
    let threshold = r_obs.abs() * (1.0 - 1e-12);
    let extreme: u64 = (0..n_shuffles)
        .into_par_iter()
        .map(|i| {
            let perm = shuffle_indices(dy.len(), seed, i);
            let num: f64 = dx.iter().zip(&perm).map(|(a, &j)| a * dy[j]).sum();
            u64::from((num / denom).abs() >= threshold)
        })
        .sum();
    Ok(PermutationResult {
        r_obs,
        perm_p: (1 + extreme) as f64 / (1 + n_shuffles) as f64,
        n_shuffles,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub beta0: f64,
    pub beta1: f64,
    pub se1: f64,
    pub wald_p: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separation: bool,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn log_likelihood(x: &[f64], y: &[f64], b0: f64, b1: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let eta = b0 + b1 * xi;
            yi * eta - softplus(eta)
        })
        .sum()
}

/// Some threshold splits the classes, possibly with ties at the boundary.
fn separated(x: &[f64], y: &[f64]) -> bool {
    let extent = |class: f64| {
        x.iter()
            .zip(y)
            .filter(|(_, &yi)| yi == class)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&xi, _)| (lo.min(xi), hi.max(xi)))
    };
    let (lo0, hi0) = extent(0.0);
    let (lo1, hi1) = extent(1.0);
    hi0 <= lo1 || hi1 <= lo0
}

/// Weighted normal equations `[[sw, swx], [swx, swxx]]` for the current fit.
fn weighted_moments(x: &[f64], b0: f64, b1: f64) -> (f64, f64, f64) {
    x.iter().fold((0.0, 0.0, 0.0), |(sw, swx, swxx), &xi| {
        let p = sigmoid(b0 + b1 * xi);
        let w = p * (1.0 - p);
        (sw + w, swx + w * xi, swxx + w * xi * xi)
    })
}

/// Maximum-likelihood logistic regression `P(y=1|x) = 1 / (1 + e^-(b0 + b1 x))`
/// by iteratively reweighted least squares.
///
/// Stops when the log-likelihood changes by less than 1e-8 or after 100
/// iterations. Separable data, or a coefficient norm above 1e3, returns the
/// current estimate with `converged = false`.
pub fn logistic_fit(x: &[f64], y: &[f64]) -> Result<LogisticFit, StatsError> {
    check_pair(x, y)?;
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(StatsError::DegenerateInput("labels must be 0 or 1".into()));
    }
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    if positives == 0 || positives == y.len() {
        return Err(StatsError::DegenerateInput("labels contain a single class".into()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(StatsError::DegenerateInput("constant predictor".into()));
    }
    let separation = separated(x, y);

    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    let mut ll = log_likelihood(x, y, b0, b1);
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    while iterations < LOGISTIC_MAX_ITER {
        iterations += 1;
        // working response z = eta + (y - p) / w, solve (X'WX) b = X'Wz
        let (mut sw, mut swx, mut swxx, mut swz, mut swxz) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let eta = b0 + b1 * xi;
            let p = sigmoid(eta);
            let w = (p * (1.0 - p)).max(1e-300);
            let z = eta + (yi - p) / w;
            sw += w;
            swx += w * xi;
            swxx += w * xi * xi;
            swz += w * z;
            swxz += w * xi * z;
        }
        let det = sw * swxx - swx * swx;
        if !(det.is_finite() && det > 0.0) {
            diverged = true;
            break;
        }
        b0 = (swxx * swz - swx * swxz) / det;
        b1 = (sw * swxz - swx * swz) / det;
        if !(b0.is_finite() && b1.is_finite()) || b0.hypot(b1) > SEPARATION_NORM {
            diverged = true;
            break;
        }
        let next = log_likelihood(x, y, b0, b1);
        let delta = (next - ll).abs();
        ll = next;
        if delta < LOGISTIC_TOLERANCE {
            converged = true;
            break;
        }
    }
    if separation || diverged {
        warn!("logistic fit: separation detected, estimates are not finite-sample MLEs");
        converged = false;
    }

    let (sw, swx, swxx) = weighted_moments(x, b0, b1);
    let det = sw * swxx - swx * swx;
    let se1 = if det > 0.0 { (sw / det).sqrt() } else { f64::INFINITY };
    let wald_p = if se1.is_finite() && se1 > 0.0 {
        let z = b1 / se1;
        libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(f64::MIN_POSITIVE, 1.0)
    } else {
        1.0
    };
    Ok(LogisticFit {
        beta0: b0,
        beta1: b1,
        se1,
        wald_p,
        converged,
        iterations,
        separation: separation || diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    /// Scores.
    pub x: Vec<f64>,
    /// Correctness labels (0/1) for the logistic fit; any reals for Pearson.
    pub y: Vec<f64>,
    pub evaluator_model: String,
    /// (video_id, summary_id) of each pair.
    pub keys: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub sample: PairedSample,
    pub dropped: usize,
}

/// Joins scores with correctness labels on (video_id, summary_id). Records
/// without a label are dropped and counted.
pub fn pool_records(
    records: &[ScoreRecord],
    correctness: &HashMap<(String, String), bool>,
    force: bool,
) -> Result<Pooled, StatsError> {
    let models: BTreeSet<&str> = records.iter().map(|r| r.evaluator_model.as_str()).collect();
    if models.len() > 1 && !force {
        return Err(StatsError::EvaluatorMismatch(
            models.into_iter().collect::<Vec<_>>().join(", "),
        ));
    }
    let mut sample = PairedSample {
        x: Vec::new(),
        y: Vec::new(),
        evaluator_model: models.into_iter().collect::<Vec<_>>().join("+"),
        keys: Vec::new(),
    };
    let mut dropped = 0;
    for r in records {
        let key = (r.video_id.clone(), r.summary_id.clone());
        match correctness.get(&key) {
            Some(&c) => {
                sample.x.push(r.visil);
                sample.y.push(if c { 1.0 } else { 0.0 });
                sample.keys.push(key);
            }
            None => dropped += 1,
        }
    }
    Ok(Pooled { sample, dropped })
}

/// Drops the single highest- and lowest-scoring pairs (first occurrence).
pub fn trim_extremes(sample: &PairedSample) -> PairedSample {
    if sample.x.len() < 3 {
        return sample.clone();
    }
    let argmax = (0..sample.x.len())
        .max_by(|&a, &b| sample.x[a].total_cmp(&sample.x[b]).then(b.cmp(&a)))
        .unwrap();
    let argmin = (0..sample.x.len())
        .filter(|&i| i != argmax)
        .min_by(|&a, &b| sample.x[a].total_cmp(&sample.x[b]).then(a.cmp(&b)))
        .unwrap();
    let keep = |i: &usize| *i != argmax && *i != argmin;
    let idx: Vec<usize> = (0..sample.x.len()).filter(keep).collect();
    PairedSample {
        x: idx.iter().map(|&i| sample.x[i]).collect(),
        y: idx.iter().map(|&i| sample.y[i]).collect(),
        evaluator_model: sample.evaluator_model.clone(),
        keys: idx.iter().map(|&i| sample.keys[i].clone()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub n: usize,
    pub evaluator_model: String,
    pub beta0: f64,
    pub beta1: f64,
    pub se1: f64,
    pub wald_p: f64,
    pub converged: bool,
    pub pearson_r: f64,
    pub perm_p: f64,
    pub n_shuffles: u64,
    pub seed: u64,
}

pub fn stat_report(sample: &PairedSample, n_shuffles: u64, seed: u64) -> Result<StatReport, StatsError> {
    let fit = logistic_fit(&sample.x, &sample.y)?;
    let perm = permutation_test(&sample.x, &sample.y, n_shuffles, seed)?;
    Ok(StatReport {
        n: sample.x.len(),
        evaluator_model: sample.evaluator_model.clone(),
        beta0: fit.beta0,
        beta1: fit.beta1,
        se1: fit.se1,
        wald_p: fit.wald_p,
        converged: fit.converged,
        pearson_r: perm.r_obs,
        perm_p: perm.perm_p,
        n_shuffles,
        seed,
    })
}

/// Aligned text table: dataset, sample size, Pearson's r, p-value, plus the
/// logistic slope and its Wald p.
pub fn render_table(rows: &[(String, StatReport)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>11} {:>11} {:>9} {:>9} {:>9}",
        "Dataset", "Sample Size", "Pearson's r", "p-value", "beta1", "Wald p"
    );
    for (name, r) in rows {
        let stars = if r.perm_p < 0.01 {
            "**"
        } else if r.perm_p < 0.05 {
            "*"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "{:<20} {:>11} {:>11.3} {:>9} {:>9.3} {:>9.3}",
            name,
            r.n,
            r.pearson_r,
            format!("{:.3}{stars}", r.perm_p),
            r.beta1,
            r.wald_p
        );
    }
    out
}
