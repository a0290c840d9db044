//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visil::backend::synthetic::{SyntheticBackend, ToyWorld};
use visil::backend::KeywordScores;
use visil::harness::{parse_timecode, synthetic_experiment, SyntheticSpec};
use visil::masking::{build_masked_caption, parse_keywords};
use visil::scoring::{aggregate_runs, geometric_mean_probs, ScoreTarget};
use visil::selection::{alpha_sweep, pareto_frontier, CandidatePoint};
use visil::stats::{logistic_fit, permutation_test, pool_records, stat_report};
use visil::types::FrameRef;
use visil::{visil_score, MediaContext, Part, ScoringConfig, VideoRef};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn video(id: &str) -> VideoRef {
    VideoRef {
        id: id.into(),
        frame_dir: Some(PathBuf::from(format!("frames/{id}"))),
        video_path: None,
        fps: 30.0,
        duration_s: 10.0,
        dataset_tag: String::new(),
    }
}

fn facts(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}f{j}")).collect()
}

fn world_with(ids: &[&str], n: usize) -> ToyWorld {
    let mut w = ToyWorld::new(n, 0.9, 0.1, 0);
    for id in ids {
        let f = facts(id, n);
        let refs: Vec<&str> = f.iter().map(String::as_str).collect();
        w = w.with_video(*id, &refs);
    }
    w
}

fn random_subset(rng: &mut ChaCha8Rng, items: &[String], p: f64) -> Vec<String> {
    items.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

fn identity_law() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let all = facts("v", 10);
        let mut world = world_with(&["v"], 10);
        for k in 0..3 {
            let seen = random_subset(&mut rng, &all, 0.4);
            let refs: Vec<&str> = seen.iter().map(String::as_str).collect();
            world = world.with_frame(format!("frame{k}"), &refs);
        }
        let mut parts = Vec::new();
        for k in 0..3 {
            if rng.random_bool(0.5) {
                parts.push(Part::Image(FrameRef(format!("frame{k}"))));
            }
        }
        let words = random_subset(&mut rng, &all, 0.5);
        if !words.is_empty() || parts.is_empty() {
            parts.push(Part::Text(format!("the scene {}", words.join(" "))));
        }
        if rng.random_bool(0.2) {
            parts.push(Part::Video(video("v")));
        }
        let ctx = MediaContext::new(parts).unwrap();
        let mut keywords = random_subset(&mut rng, &all, 0.6);
        if keywords.is_empty() {
            keywords.push(all[0].clone());
        }
        let masked = build_masked_caption(&all.join(" "), &keywords).map_err(|e| e.to_string())?;
        let cfg = ScoringConfig {
            seed: rng.random(),
            ..ScoringConfig::default()
        };
        let backend = SyntheticBackend::new(world, "synthetic");
        let target = ScoreTarget {
            video_id: "v",
            summary_id: "x",
            video: &ctx,
            summary: &ctx,
        };
        let r = visil_score(&backend, target, &masked, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(r.visil.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("max |visil(X, X)| = {worst:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("100 contexts, max |visil(X, X)| = {worst:e}, {secs:.3} s"))
}

fn closed_form() -> Check {
    let start = Instant::now();
    let all = facts("v", 10);
    let backend = SyntheticBackend::new(world_with(&["v"], 10), "synthetic");
    let v = video("v");
    let video_ctx = MediaContext::video(&v);
    let masked = build_masked_caption(&all.join(" "), &all).map_err(|e| e.to_string())?;
    let mut prev = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for m in 0..=10usize {
        let text = if m == 0 { "scene".to_string() } else { all[..m].join(" ") };
        let summary = MediaContext::text(text);
        let target = ScoreTarget {
            video_id: "v",
            summary_id: "s",
            video: &video_ctx,
            summary: &summary,
        };
        let r = visil_score(&backend, target, &masked, &ScoringConfig::default()).map_err(|e| e.to_string())?;
        // each uncovered keyword costs ln(p_hit) - ln(p_miss) = ln 9
        let expected = (10 - m) as f64 * 9f64.ln();
        let err = (r.visil - expected).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("m={m}: visil {} vs {expected}", r.visil))?;
        ensure(r.visil < prev, || format!("m={m}: not strictly decreasing"))?;
        prev = r.visil;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("m = 0..10, max error {worst:e}, {secs:.3} s"))
}

fn hallucination_neutrality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ids = ["v", "w", "u"];
    let backend = SyntheticBackend::new(world_with(&ids, 10), "synthetic");
    let all = facts("v", 10);
    let foreign: Vec<String> = facts("w", 10).into_iter().chain(facts("u", 10)).collect();
    let v = video("v");
    let video_ctx = MediaContext::video(&v);
    for trial in 0..1000 {
        let mut keywords = random_subset(&mut rng, &all, 0.7);
        if keywords.is_empty() {
            keywords.push(all[9].clone());
        }
        let masked = build_masked_caption(&all.join(" "), &keywords).map_err(|e| e.to_string())?;
        let covered = random_subset(&mut rng, &all, 0.5);
        let base_text = format!("summary {}", covered.join(" "));
        let extra = random_subset(&mut rng, &foreign, 0.3);
        let padded_text = format!("{base_text} {} invented filler", extra.join(" "));
        let cfg = ScoringConfig {
            seed: trial,
            ..ScoringConfig::default()
        };
        let score = |text: &str| {
            let summary = MediaContext::text(text);
            let target = ScoreTarget {
                video_id: "v",
                summary_id: "s",
                video: &video_ctx,
                summary: &summary,
            };
            visil_score(&backend, target, &masked, &cfg).map(|r| r.visil)
        };
        let base = score(&base_text).map_err(|e| e.to_string())?;
        let padded = score(&padded_text).map_err(|e| e.to_string())?;
        ensure(base == padded, || format!("trial {trial}: {base} -> {padded}"))?;
    }
    Ok("1000 trials, delta exactly 0".into())
}

fn geometric_mean() -> Check {
    let got = geometric_mean_probs(&[vec![0.1, 0.5], vec![0.9, 0.5], vec![0.3, 0.5]]).map_err(|e| e.to_string())?;
    ensure((got[0] - 0.3).abs() <= 1e-12, || format!("(0.1, 0.9, 0.3) -> {}", got[0]))?;
    ensure(got[1] == 0.5, || format!("(0.5, 0.5, 0.5) -> {}", got[1]))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let runs = rng.random_range(1..=5);
        let width = rng.random_range(1..=8);
        let samples: Vec<Vec<f64>> = (0..runs)
            .map(|_| (0..width).map(|_| rng.random_range(1e-6..=1.0)).collect())
            .collect();
        let got = geometric_mean_probs(&samples).map_err(|e| e.to_string())?;
        for j in 0..width {
            let product: f64 = samples.iter().map(|r| r[j]).product();
            let oracle = product.powf(1.0 / runs as f64);
            ensure((got[j] - oracle).abs() <= 1e-12, || {
                format!("column {j}: {} vs {oracle}", got[j])
            })?;
        }
    }

    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let row = KeywordScores {
            logprobs: (0..n).map(|_| -rng.random_range(0.0..14.0)).collect(),
            empty_recovery: false,
            prompt_tokens: None,
        };
        let once = aggregate_runs(std::slice::from_ref(&row), n, 1e-6).map_err(|e| e.to_string())?;
        let thrice = aggregate_runs(&[row.clone(), row.clone(), row], n, 1e-6).map_err(|e| e.to_string())?;
        ensure(once.total.to_bits() == thrice.total.to_bits(), || {
            format!("runs=3 {} != runs=1 {}", thrice.total, once.total)
        })?;
        ensure(once.per_keyword == thrice.per_keyword, || "per-keyword mismatch".into())?;
    }
    Ok("(0.1, 0.9, 0.3) -> 0.3; 200 random columns; runs=3 == runs=1 bitwise".into())
}

fn desk_reproduction() -> Check {
    let start = Instant::now();
    let spec = SyntheticSpec {
        seed: 7,
        scoring: ScoringConfig {
            seed: 7,
            ..ScoringConfig::default()
        },
        ..SyntheticSpec::default()
    };
    let exp = synthetic_experiment(&spec).map_err(|e| e.to_string())?;
    let labels: HashMap<(String, String), bool> = exp
        .correctness
        .iter()
        .map(|c| ((c.video_id.clone(), c.summary_id.clone()), c.correct))
        .collect();
    let pooled = pool_records(&exp.records, &labels, false).map_err(|e| e.to_string())?;
    let report = stat_report(&pooled.sample, 10_000, 7).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "n={}, beta1={:.4}, wald_p={:.2e}, r={:.3}, perm_p={:.2e}, {secs:.2} s",
        report.n, report.beta1, report.wald_p, report.pearson_r, report.perm_p
    );
    ensure(report.n == 200, || format!("expected 200 pairs: {summary}"))?;
    ensure(report.beta1 < 0.0 && report.wald_p < 0.01, || summary.clone())?;
    ensure(report.perm_p < 0.01, || summary.clone())?;
    ensure(secs < 30.0, || summary.clone())?;
    Ok(summary)
}

fn permutation_calibration() -> Check {
    let start = Instant::now();
    let shuffles = 2000u64;
    let floor = 1.0 / (shuffles + 1) as f64;
    let mut rejections = 0;
    for trial in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + trial);
        let x: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let res = permutation_test(&x, &y, shuffles, trial).map_err(|e| e.to_string())?;
        ensure(res.perm_p >= floor, || format!("trial {trial}: p = {} below floor", res.perm_p))?;
        rejections += usize::from(res.perm_p < 0.05);
    }
    let rate = rejections as f64 / 200.0;
    let secs = start.elapsed().as_secs_f64();
    ensure((0.01..=0.10).contains(&rate), || format!("rejection rate {rate}"))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("rejection rate {rate:.3} at 0.05, {secs:.2} s"))
}

/// Plain Newton-Raphson on the logistic log-likelihood, iterated to a fixed point.
fn newton_oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = 1.0 / (1.0 + (-(b0 + b1 * xi)).exp());
            let w = p * (1.0 - p);
            g0 += yi - p;
            g1 += (yi - p) * xi;
            h00 += w;
            h01 += w * xi;
            h11 += w * xi * xi;
        }
        let det = h00 * h11 - h01 * h01;
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if d0.abs().max(d1.abs()) < 1e-13 {
            break;
        }
    }
    (b0, b1)
}

fn logistic_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut datasets = 0;
    while datasets < 20 {
        let (t0, t1) = (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0));
        let x: Vec<f64> = (0..100).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| f64::from(u8::from(rng.random_bool(1.0 / (1.0 + (-(t0 + t1 * xi)).exp())))))
            .collect();
        let fit = match logistic_fit(&x, &y) {
            Ok(f) if f.converged => f,
            // single-class or separable draws are not valid oracle inputs
            _ => continue,
        };
        let (b0, b1) = newton_oracle(&x, &y);
        let err = (fit.beta0 - b0).abs().max((fit.beta1 - b1).abs());
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("dataset {datasets}: ({}, {}) vs ({b0}, {b1})", fit.beta0, fit.beta1))?;
        datasets += 1;
    }
    let x: Vec<f64> = (1..=10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|&v| f64::from(u8::from(v > 5.0))).collect();
    let sep = logistic_fit(&x, &y).map_err(|e| e.to_string())?;
    ensure(!sep.converged, || "separable input reported converged".into())?;
    Ok(format!("20 datasets, max coefficient error {worst:e}; separable flagged"))
}

fn brute_frontier(points: &[CandidatePoint]) -> Vec<CandidatePoint> {
    let mut out: Vec<CandidatePoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| q.dominates(p)))
        .cloned()
        .collect();
    out.sort_by(|a, b| {
        a.token_cost
            .cmp(&b.token_cost)
            .then(a.visil.total_cmp(&b.visil))
            .then_with(|| a.summary_id.cmp(&b.summary_id))
    });
    out
}

fn pareto() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut alphas: Vec<f64> = std::iter::once(0.0)
        .chain((0..19).map(|i| 1e-4 * 10f64.powf(i as f64 / 4.0)))
        .collect();
    alphas.sort_by(f64::total_cmp);
    for set in 0..1000 {
        let n = rng.random_range(1..=50);
        // coarse grids force ties on both axes
        let points: Vec<CandidatePoint> = (0..n)
            .map(|i| {
                let visil = f64::from(rng.random_range(0..20u32)) * 0.5;
                CandidatePoint::new(format!("p{i:02}"), visil, rng.random_range(0..30u64) * 100)
            })
            .collect();
        let got = pareto_frontier(&points);
        ensure(got == brute_frontier(&points), || format!("set {set}: frontier mismatch"))?;
        let sweep = alpha_sweep(&points, &alphas).map_err(|e| e.to_string())?;
        for (alpha, pick) in &sweep {
            ensure(!points.iter().any(|q| q.dominates(pick)), || {
                format!("set {set}: alpha {alpha} picked dominated {}", pick.summary_id)
            })?;
        }
        ensure(sweep.windows(2).all(|w| w[1].1.token_cost <= w[0].1.token_cost), || {
            format!("set {set}: token cost increased along the sweep")
        })?;
    }
    Ok("1000 sets match brute force; 20-alpha sweeps non-dominated, cost non-increasing".into())
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn prompt_fidelity() -> Check {
    for (name, text) in visil::prompts::ALL {
        let path = golden_dir().join(format!("{name}.txt"));
        let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(golden == text, || format!("{name} differs from its golden file"))?;
    }
    ensure(visil::prompts::KEYWORDS.contains(r#"["dog", "jump", "frisbee", "park"]"#), || {
        "keyword example array missing".into()
    })?;
    ensure(visil::prompts::VISIL.contains("[MASK]") && visil::prompts::MASK == "[MASK]", || {
        "mask sentinel missing".into()
    })?;
    Ok(format!("{} assets byte-identical; example array and [MASK] present", visil::prompts::ALL.len()))
}

fn timecodes() -> Check {
    let a = parse_timecode("00:00:11:15", 30.0).map_err(|e| e.to_string())?;
    let b = parse_timecode("00:00:16:03", 24.0).map_err(|e| e.to_string())?;
    ensure(a == 345, || format!("00:00:11:15@30 -> {a}"))?;
    ensure(b == 387, || format!("00:00:16:03@24 -> {b}"))?;
    for (tc, fps) in [("00:00:01:30", 30.0), ("00:00:01:24", 24.0), ("00:00:01:25", 25.0), ("00:00:01:99", 30.0)] {
        ensure(parse_timecode(tc, fps).is_err(), || format!("{tc}@{fps} accepted"))?;
    }
    Ok("345, 387; FF >= fps rejected".into())
}

fn replay_run(jobs: &str) -> Result<Vec<Vec<u8>>, String> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/replay");
    let store = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |f: &str| data.join(f).into_os_string();
    for cmd in [vec!["score"], vec!["vqa", "--questions"]] {
        let mut c = Command::new(env!("CARGO_BIN_EXE_visil"));
        for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("VISIL_")) {
            c.env_remove(k);
        }
        c.args(["--backend", "replay", "--jobs", jobs])
            .arg("--fixtures-dir")
            .arg(d("fixtures"))
            .arg("--store-dir")
            .arg(store.path())
            .args(&cmd);
        if cmd[0] == "vqa" {
            c.arg(d("questions.json"));
        }
        c.arg("--manifest")
            .arg(d("videos.json"))
            .arg("--captions")
            .arg(d("captions.jsonl"))
            .arg("--summaries")
            .arg(d("summaries.jsonl"));
        let out = c.output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("{} failed: {}", cmd[0], String::from_utf8_lossy(&out.stderr))
        })?;
    }
    ["scores.jsonl", "vqa.jsonl", "vqa_accuracy.json"]
        .iter()
        .map(|f| std::fs::read(store.path().join(f)).map_err(|e| format!("{f}: {e}")))
        .collect()
}

fn pipeline_determinism() -> Check {
    let first = replay_run("1")?;
    ensure(first[0].iter().filter(|&&b| b == b'\n').count() == 12, || "expected 12 score records".into())?;
    for (label, jobs) in [("second run", "1"), ("--jobs 8", "8"), ("second --jobs 8", "8")] {
        let other = replay_run(jobs)?;
        ensure(other == first, || format!("{label} differs"))?;
    }
    Ok("scores, vqa outputs byte-identical across reruns and --jobs 1/8".into())
}

fn keyword_hygiene() -> Check {
    let many: Vec<String> = (0..25).map(|i| format!("w{i}")).collect();
    let many_json = serde_json::to_string(&many).unwrap();
    let first20: Vec<&str> = many[..20].iter().map(String::as_str).collect();
    let dup_heavy: Vec<String> = (0..30).map(|i| format!("k{}", i % 22)).collect();
    let dup_json = serde_json::to_string(&dup_heavy).unwrap();
    let dup20: Vec<String> = (0..20).map(|i| format!("k{i}")).collect();
    let dup20: Vec<&str> = dup20.iter().map(String::as_str).collect();
    let with_video: Vec<String> = (0..21).map(|i| if i == 3 { "Video".into() } else { format!("x{i}") }).collect();
    let with_video_json = serde_json::to_string(&with_video).unwrap();
    let expect_video: Vec<String> = (0..21).filter(|&i| i != 3).take(20).map(|i| format!("x{i}")).collect();
    let expect_video: Vec<&str> = expect_video.iter().map(String::as_str).collect();

    let ok = |v: &[&str]| Some(v.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let table: Vec<(&str, Option<Vec<String>>)> = vec![
        (r#"["dog", "jump", "frisbee", "park"]"#, ok(&["dog", "jump", "frisbee", "park"])),
        (r#"["Dog", "JUMP"]"#, ok(&["dog", "jump"])),
        (r#"["video", "dog"]"#, ok(&["dog"])),
        (r#"["VIDEO", "Video", "dog"]"#, ok(&["dog"])),
        (r#"["dog", "dog", "cat"]"#, ok(&["dog", "cat"])),
        (r#"["Dog", "dog", "DOG"]"#, ok(&["dog"])),
        (r#"["red car", "car"]"#, ok(&["car"])),
        (r#"["  dog  ", "cat"]"#, ok(&["dog", "cat"])),
        (r#"[]"#, ok(&[])),
        (r#"["", "dog"]"#, ok(&["dog"])),
        (r#"["video"]"#, ok(&[])),
        (r#"["videos", "videotape"]"#, ok(&["videos", "videotape"])),
        ("```json\n[\"dog\", \"park\"]\n```", ok(&["dog", "park"])),
        ("```\n[\"Park\"]\n```", ok(&["park"])),
        (r#"["ÉCLAIR", "café"]"#, ok(&["éclair", "café"])),
        (r#"["jumps", "jumped", "jump"]"#, ok(&["jumps", "jumped", "jump"])),
        (r#"["park", "dog", "park", "video", "Dog"]"#, ok(&["park", "dog"])),
        (r#"["t-shirt", "o'clock"]"#, ok(&["t-shirt", "o'clock"])),
        (r#"["two words", "three word phrase"]"#, ok(&[])),
        (r#"["tab\tsep", "ok"]"#, ok(&["ok"])),
        (&many_json, ok(&first20)),
        (&dup_json, ok(&dup20)),
        (&with_video_json, ok(&expect_video)),
        (r#"["3", "42nd"]"#, ok(&["3", "42nd"])),
        ("  [\"dog\"]  \n", ok(&["dog"])),
        ("dog, jump, park", None),
        ("", None),
        (r#"{"keywords": ["dog"]}"#, None),
        (r#"["dog", 3]"#, None),
        (r#"["dog""#, None),
    ];
    ensure(table.len() == 30, || format!("table has {} cases", table.len()))?;
    for (i, (raw, expected)) in table.iter().enumerate() {
        let got = parse_keywords(raw).ok();
        ensure(&got == expected, || format!("case {i} {raw:?}: got {got:?}, expected {expected:?}"))?;
        if let Some(words) = &got {
            ensure(words.len() <= 20, || format!("case {i}: {} keywords", words.len()))?;
        }
    }
    Ok("30 cases".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("identity law", identity_law),
        ("closed-form oracle", closed_form),
        ("hallucination neutrality", hallucination_neutrality),
        ("geometric-mean aggregation", geometric_mean),
        ("desk-scale reproduction", desk_reproduction),
        ("permutation calibration", permutation_calibration),
        ("logistic oracle equivalence", logistic_oracle),
        ("pareto correctness", pareto),
        ("prompt fidelity", prompt_fidelity),
        ("timecode parsing", timecodes),
        ("pipeline determinism", pipeline_determinism),
        ("keyword hygiene", keyword_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
