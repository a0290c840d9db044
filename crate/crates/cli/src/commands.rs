//! Subcommand bodies. Every command reads its inputs from the store (or
//! explicit paths), writes whole stores atomically, and appends one entry to
//! `run_manifest.jsonl`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use visil::backend::chat::{ChatBackend, ChatConfig, HttpTransport};
use visil::backend::replay::{RecordingTransport, ReplayTransport};
use visil::backend::synthetic::{SyntheticBackend, ToyWorld};
use visil::backend::Backend;
use visil::dispatch::{dispatch, DispatchLimits};
use visil::harness::{
    self, aggregate_correspondence, build_summaries, make_distractors, run_captioning, run_correspondence, run_vqa,
    score_batch, synthetic_experiment, CorrectnessLabel, FrameResolver, HarnessError, SummaryOptions,
    SyntheticSpec, VqaItem, VqaOutcome,
};
use visil::masking::parse_keywords;
use visil::selection::{pareto_frontier, select_summary, CandidatePoint};
use visil::stats::{pool_records, stat_report, trim_extremes, PairedSample};
use visil::store::{append_jsonl, read_jsonl, read_scores, write_atomic, write_jsonl};
use visil::types::{CaptionRecord, ScoreRecord, SummaryRecord, VideoRef};
use visil::{MediaContext, SummaryFormat};

use crate::config::{BackendKind, RunConfig};
use crate::{CliError, Command, Inputs};

pub const RUN_MANIFEST: &str = "run_manifest.jsonl";

/// One line of the run manifest. Carries no timestamps, so identical runs
/// append identical lines.
#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    command: &'a str,
    config_hash: String,
    backend: BackendKind,
    roles: &'a visil::backend::ModelRoles,
    seed: u64,
    scoring: &'a visil::ScoringConfig,
    outputs: Vec<String>,
    skipped: Vec<Value>,
    warnings: Vec<Value>,
}

#[derive(Default)]
struct Report {
    outputs: Vec<String>,
    skipped: Vec<Value>,
    warnings: Vec<Value>,
    /// Items that failed for reasons other than a documented skip.
    failures: Vec<String>,
}

impl Report {
    fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    fn warn(&mut self, w: &harness::HarnessWarning) {
        warn!("{}", serde_json::to_string(w).unwrap_or_default());
        self.warnings.push(serde_json::to_value(w).unwrap_or(Value::Null));
    }

    fn fail(&mut self, what: String, e: &HarnessError) {
        let msg = format!("{what}: {e}");
        warn!("{msg}");
        self.failures.push(msg);
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestFile {
    List(Vec<VideoRef>),
    Wrapped { videos: Vec<VideoRef> },
}

fn store_path(cfg: &RunConfig, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| cfg.store_dir.join(name))
}

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage("missing_input", format!("{what} not found: {}", path.display())))
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    require(path, what)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::runtime("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage("missing_input", format!("{}: {e}", path.display())))
}

fn load_videos(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<VideoRef>, CliError> {
    let path = store_path(cfg, &inputs.manifest, "videos.json");
    let videos = match load_json::<ManifestFile>(&path, "dataset manifest")? {
        ManifestFile::List(v) | ManifestFile::Wrapped { videos: v } => v,
    };
    let mut seen = BTreeSet::new();
    for v in &videos {
        v.validate()
            .map_err(|e| CliError::usage("missing_input", e.to_string()))?;
        if !seen.insert(v.id.as_str()) {
            return Err(CliError::usage("missing_input", format!("duplicate video id '{}'", v.id)));
        }
    }
    Ok(videos)
}

fn load_jsonl<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>, CliError> {
    require(path, what)?;
    Ok(read_jsonl(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime("store", e.to_string()))?;
    text.push('\n');
    Ok(write_atomic(path, text.as_bytes())?)
}

fn chat_config(cfg: &RunConfig, model: &str) -> ChatConfig {
    let mut c = ChatConfig::new(model);
    c.top_k = cfg.scoring.top_k;
    c.epsilon_floor = cfg.scoring.epsilon_floor;
    c
}

/// Backend for one model role.
pub fn make_backend(cfg: &RunConfig, api_key: Option<&str>, model: &str) -> Result<Box<dyn Backend>, CliError> {
    match cfg.backend {
        BackendKind::Synthetic => {
            let path = cfg.world.clone().unwrap_or_else(|| cfg.store_dir.join("world.json"));
            let world: ToyWorld = load_json(&path, "toy world")?;
            Ok(Box::new(SyntheticBackend::new(world, model)))
        }
        BackendKind::Replay => {
            let dir = cfg.fixtures_dir.clone().expect("validated");
            require(&dir, "fixtures directory")?;
            Ok(Box::new(ChatBackend::new(chat_config(cfg, model), ReplayTransport::new(dir))))
        }
        BackendKind::Api => {
            let endpoint = cfg.endpoint.clone().expect("validated");
            let http = HttpTransport::new(endpoint, api_key.unwrap_or_default());
            let c = chat_config(cfg, model);
            if cfg.record {
                let dir = cfg.fixtures_dir.clone().expect("validated");
                Ok(Box::new(ChatBackend::new(c, RecordingTransport::new(http, dir))))
            } else {
                Ok(Box::new(ChatBackend::new(c, http)))
            }
        }
    }
}

fn limits(cfg: &RunConfig) -> DispatchLimits {
    DispatchLimits::new(cfg.jobs, cfg.rpm)
}

pub fn execute(cfg: &RunConfig, api_key: Option<String>, command: &Command) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.store_dir)
        .map_err(|e| CliError::runtime("io", format!("{}: {e}", cfg.store_dir.display())))?;
    let key = api_key.as_deref();
    let mut report = Report::default();
    match command {
        Command::Caption { inputs } => caption(cfg, key, inputs, &mut report)?,
        Command::Keywords { inputs } => keywords(cfg, key, inputs, &mut report)?,
        Command::Summarize {
            inputs,
            formats,
            extractor,
            image_token_cost,
        } => summarize(cfg, key, inputs, formats, extractor, *image_token_cost, &mut report)?,
        Command::Score { inputs } => score(cfg, key, inputs, &mut report)?,
        Command::Vqa { inputs, questions } => vqa(cfg, key, inputs, questions, &mut report)?,
        Command::Correspond { inputs } => correspond(cfg, key, inputs, &mut report)?,
        Command::Select { inputs, alpha, scores } => select(cfg, inputs, alpha, scores, &mut report)?,
        Command::Stats {
            scores,
            correctness,
            force,
            trim_extremes,
            n_shuffles,
            dataset,
        } => stats(cfg, scores, correctness, *force, *trim_extremes, *n_shuffles, dataset, &mut report)?,
        Command::Synth {
            n_videos,
            facts,
            p_hit,
            p_miss,
            coverage,
        } => synth(cfg, *n_videos, *facts, *p_hit, *p_miss, coverage, &mut report)?,
    }
    let entry = ManifestEntry {
        command: command.name(),
        config_hash: cfg.hash(),
        backend: cfg.backend,
        roles: &cfg.roles,
        seed: cfg.seed,
        scoring: &cfg.scoring,
        outputs: report.outputs,
        skipped: report.skipped,
        warnings: report.warnings,
    };
    append_jsonl(&cfg.store_dir.join(RUN_MANIFEST), &entry)?;
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::runtime(
            "partial_failure",
            format!("{} item(s) failed: {}", report.failures.len(), report.failures.join("; ")),
        ))
    }
}

fn caption(cfg: &RunConfig, key: Option<&str>, inputs: &Inputs, report: &mut Report) -> Result<(), CliError> {
    let videos = load_videos(cfg, inputs)?;
    let captioner = make_backend(cfg, key, &cfg.roles.captioner)?;
    let extractor = make_backend(cfg, key, &cfg.roles.keyword_extractor)?;
    let results = dispatch(videos.iter().collect(), limits(cfg), |v: &VideoRef| {
        run_captioning(captioner.as_ref(), extractor.as_ref(), v, cfg.seed)
    });
    let mut captions = Vec::new();
    for (v, r) in videos.iter().zip(results) {
        match r {
            Ok(c) => captions.push(c),
            Err(e @ HarnessError::CaptionUnavailable { .. }) => {
                warn!("{e}");
                report.skipped.push(json!({"video_id": v.id, "reason": e.to_string()}));
            }
            Err(e) => report.fail(format!("caption {}", v.id), &e),
        }
    }
    let path = store_path(cfg, &inputs.captions, "captions.jsonl");
    write_jsonl(&path, &captions)?;
    report.output(&path.display().to_string());
    info!("captioned {}/{} videos", captions.len(), videos.len());
    Ok(())
}

fn keywords(cfg: &RunConfig, key: Option<&str>, inputs: &Inputs, report: &mut Report) -> Result<(), CliError> {
    let path = store_path(cfg, &inputs.captions, "captions.jsonl");
    let captions: Vec<CaptionRecord> = load_jsonl(&path, "caption store")?;
    let extractor = make_backend(cfg, key, &cfg.roles.keyword_extractor)?;
    let results = dispatch(captions.iter().collect(), limits(cfg), |c: &CaptionRecord| {
        let raw = extractor
            .generate_text(&MediaContext::text(c.text.clone()), visil::prompts::KEYWORDS, cfg.seed)
            .map_err(HarnessError::from)?
            .text;
        Ok::<_, HarnessError>(parse_keywords(&raw)?)
    });
    let mut updated = Vec::new();
    for (c, r) in captions.iter().zip(results) {
        match r {
            Ok(kws) => updated.push(CaptionRecord {
                keywords: kws,
                ..c.clone()
            }),
            Err(e) => {
                report.fail(format!("keywords {}", c.video_id), &e);
                updated.push(c.clone());
            }
        }
    }
    write_jsonl(&path, &updated)?;
    report.output(&path.display().to_string());
    Ok(())
}

fn summarize(
    cfg: &RunConfig,
    key: Option<&str>,
    inputs: &Inputs,
    formats: &[SummaryFormat],
    extractor: &Option<String>,
    image_token_cost: u64,
    report: &mut Report,
) -> Result<(), CliError> {
    if image_token_cost == 0 {
        return Err(CliError::usage("arguments", "image_token_cost must be positive"));
    }
    let videos = load_videos(cfg, inputs)?;
    let summarizer = make_backend(cfg, key, &cfg.roles.summarizer)?;
    let formats: BTreeSet<SummaryFormat> = formats.iter().copied().collect();
    let opts = SummaryOptions {
        image_token_cost,
        resolver: FrameResolver {
            extractor: extractor.clone(),
        },
        seed: cfg.seed,
    };
    let results = dispatch(videos.iter().collect(), limits(cfg), |v: &VideoRef| {
        build_summaries(summarizer.as_ref(), v, &formats, &opts)
    });
    let mut summaries = Vec::new();
    for (v, r) in videos.iter().zip(results) {
        match r {
            Ok((recs, warnings)) => {
                summaries.extend(recs);
                warnings.iter().for_each(|w| report.warn(w));
            }
            Err(e) => report.fail(format!("summarize {}", v.id), &e),
        }
    }
    let path = store_path(cfg, &inputs.summaries, "summaries.jsonl");
    write_jsonl(&path, &summaries)?;
    report.output(&path.display().to_string());
    Ok(())
}

fn score(cfg: &RunConfig, key: Option<&str>, inputs: &Inputs, report: &mut Report) -> Result<(), CliError> {
    let videos = load_videos(cfg, inputs)?;
    let captions: Vec<CaptionRecord> = load_jsonl(&store_path(cfg, &inputs.captions, "captions.jsonl"), "caption store")?;
    let summaries: Vec<SummaryRecord> =
        load_jsonl(&store_path(cfg, &inputs.summaries, "summaries.jsonl"), "summary store")?;
    let evaluator = make_backend(cfg, key, &cfg.roles.evaluator)?;
    let results = score_batch(evaluator.as_ref(), &videos, &captions, &summaries, &cfg.scoring, limits(cfg));
    let mut records = Vec::new();
    for (s, r) in summaries.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => report.fail(format!("score {}", s.summary_id), &e),
        }
    }
    let path = cfg.store_dir.join("scores.jsonl");
    write_jsonl(&path, &records)?;
    report.output(&path.display().to_string());
    Ok(())
}

#[derive(Debug, Serialize)]
struct FormatAccuracy {
    format: SummaryFormat,
    n: usize,
    correct: usize,
    accuracy: f64,
    anomalies: usize,
}

fn accuracy_by_format(outcomes: &[VqaOutcome]) -> Vec<FormatAccuracy> {
    let mut by: BTreeMap<SummaryFormat, Vec<&VqaOutcome>> = BTreeMap::new();
    for o in outcomes {
        by.entry(o.format).or_default().push(o);
    }
    by.into_iter()
        .map(|(format, v)| {
            let correct = v.iter().filter(|o| o.correct).count();
            FormatAccuracy {
                format,
                n: v.len(),
                correct,
                accuracy: correct as f64 / v.len() as f64,
                anomalies: v.iter().filter(|o| o.anomaly).count(),
            }
        })
        .collect()
}

fn vqa(
    cfg: &RunConfig,
    key: Option<&str>,
    inputs: &Inputs,
    questions: &Path,
    report: &mut Report,
) -> Result<(), CliError> {
    let videos = load_videos(cfg, inputs)?;
    let items: Vec<VqaItem> = load_json(questions, "question file")?;
    for item in &items {
        item.validate().map_err(|e| CliError::usage("missing_input", e.to_string()))?;
    }
    let summaries: Vec<SummaryRecord> =
        load_jsonl(&store_path(cfg, &inputs.summaries, "summaries.jsonl"), "summary store")?;
    let by_video: HashMap<&str, &VideoRef> = videos.iter().map(|v| (v.id.as_str(), v)).collect();
    let answerer = make_backend(cfg, key, &cfg.roles.answerer)?;
    // question-major, then summary order
    let pairs: Vec<(&VqaItem, &SummaryRecord)> = items
        .iter()
        .flat_map(|q| summaries.iter().filter(move |s| s.video_id == q.video_id).map(move |s| (q, s)))
        .collect();
    let results = dispatch(pairs.clone(), limits(cfg), |(q, s)| {
        run_vqa(answerer.as_ref(), q, s, by_video.get(s.video_id.as_str()).copied(), cfg.seed)
    });
    let mut outcomes = Vec::new();
    for ((q, s), r) in pairs.iter().zip(results) {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => report.fail(format!("vqa {} on {}", q.question, s.summary_id), &e),
        }
    }
    let path = cfg.store_dir.join("vqa.jsonl");
    write_jsonl(&path, &outcomes)?;
    report.output(&path.display().to_string());
    let acc = accuracy_by_format(&outcomes);
    let acc_path = cfg.store_dir.join("vqa_accuracy.json");
    write_json(&acc_path, &acc)?;
    report.output(&acc_path.display().to_string());
    println!("{}", serde_json::to_string(&acc).expect("serializes"));
    Ok(())
}

fn correspond(cfg: &RunConfig, key: Option<&str>, inputs: &Inputs, report: &mut Report) -> Result<(), CliError> {
    let videos = load_videos(cfg, inputs)?;
    let summaries: Vec<SummaryRecord> =
        load_jsonl(&store_path(cfg, &inputs.summaries, "summaries.jsonl"), "summary store")?;
    let generator = make_backend(cfg, key, &cfg.roles.summarizer)?;
    let judge = make_backend(cfg, key, &cfg.roles.answerer)?;
    let (items, warnings) = make_distractors(generator.as_ref(), &summaries, cfg.seed)?;
    warnings.iter().for_each(|w| report.warn(w));
    let by_video: HashMap<&str, &VideoRef> = videos.iter().map(|v| (v.id.as_str(), v)).collect();
    let results = dispatch(items.iter().collect(), limits(cfg), |item: &harness::CorrespondenceItem| {
        let video = by_video
            .get(item.video_id.as_str())
            .ok_or_else(|| HarnessError::MissingInput(format!("video {}", item.video_id)))?;
        run_correspondence(judge.as_ref(), video, item, cfg.seed)
    });
    let mut outcomes = Vec::new();
    for (item, r) in items.iter().zip(results) {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => report.fail(format!("correspond {}", item.summary.summary_id), &e),
        }
    }
    let path = cfg.store_dir.join("correspondence.jsonl");
    write_jsonl(&path, &outcomes)?;
    report.output(&path.display().to_string());
    let cells = aggregate_correspondence(&outcomes);
    let cells_path = cfg.store_dir.join("correspondence_cells.json");
    write_json(&cells_path, &cells)?;
    report.output(&cells_path.display().to_string());
    Ok(())
}

#[derive(Debug, Serialize)]
struct Selection {
    alpha: f64,
    summary_id: String,
    visil: f64,
    token_cost: u64,
}

#[derive(Debug, Serialize)]
struct VideoSelection {
    video_id: String,
    frontier: Vec<CandidatePoint>,
    selections: Vec<Selection>,
}

#[derive(Debug, Serialize)]
struct FormatPoint {
    format: SummaryFormat,
    n: usize,
    mean_visil: f64,
    mean_token_cost: f64,
    vqa_accuracy: Option<f64>,
    on_frontier: bool,
}

fn select(
    cfg: &RunConfig,
    inputs: &Inputs,
    alphas: &[f64],
    scores: &Option<PathBuf>,
    report: &mut Report,
) -> Result<(), CliError> {
    let scores_path = store_path(cfg, scores, "scores.jsonl");
    require(&scores_path, "score store")?;
    let records = read_scores(&scores_path)?;
    let summaries: Vec<SummaryRecord> =
        load_jsonl(&store_path(cfg, &inputs.summaries, "summaries.jsonl"), "summary store")?;
    let by_id: HashMap<&str, &SummaryRecord> = summaries.iter().map(|s| (s.summary_id.as_str(), s)).collect();
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut per_video: BTreeMap<&str, Vec<CandidatePoint>> = BTreeMap::new();
    let mut per_format: BTreeMap<SummaryFormat, Vec<(f64, u64)>> = BTreeMap::new();
    for r in &records {
        let s = by_id
            .get(r.summary_id.as_str())
            .ok_or_else(|| CliError::usage("missing_input", format!("summary {} not in summary store", r.summary_id)))?;
        per_video
            .entry(r.video_id.as_str())
            .or_default()
            .push(CandidatePoint::new(r.summary_id.clone(), r.visil, s.token_cost));
        per_format.entry(s.format).or_default().push((r.visil, s.token_cost));
    }

    let mut videos = Vec::new();
    for (video_id, points) in &per_video {
        let selections = sorted
            .iter()
            .map(|&a| {
                select_summary(points, a).map(|p| Selection {
                    alpha: a,
                    summary_id: p.summary_id.clone(),
                    visil: p.visil,
                    token_cost: p.token_cost,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        videos.push(VideoSelection {
            video_id: video_id.to_string(),
            frontier: pareto_frontier(points),
            selections,
        });
    }

    // format-level averages, annotated with VQA accuracy when available
    let vqa_path = cfg.store_dir.join("vqa.jsonl");
    let vqa: Vec<VqaOutcome> = if vqa_path.exists() { read_jsonl(&vqa_path)? } else { Vec::new() };
    let acc: BTreeMap<SummaryFormat, f64> = accuracy_by_format(&vqa)
        .into_iter()
        .map(|a| (a.format, a.accuracy))
        .collect();
    let mut format_points: Vec<FormatPoint> = per_format
        .iter()
        .map(|(&format, v)| FormatPoint {
            format,
            n: v.len(),
            mean_visil: v.iter().map(|x| x.0).sum::<f64>() / v.len() as f64,
            mean_token_cost: v.iter().map(|x| x.1 as f64).sum::<f64>() / v.len() as f64,
            vqa_accuracy: acc.get(&format).copied(),
            on_frontier: false,
        })
        .collect();
    let candidates: Vec<CandidatePoint> = format_points
        .iter()
        .map(|p| CandidatePoint::new(p.format.as_str(), p.mean_visil, p.mean_token_cost.round() as u64))
        .collect();
    let frontier: BTreeSet<String> = pareto_frontier(&candidates).into_iter().map(|p| p.summary_id).collect();
    for p in &mut format_points {
        p.on_frontier = frontier.contains(p.format.as_str());
    }

    let out = json!({"alphas": sorted, "formats": format_points, "videos": videos});
    let path = cfg.store_dir.join("selection.json");
    write_json(&path, &out)?;
    report.output(&path.display().to_string());

    let mut tsv = String::from("token_cost\tvisil\n");
    for p in &format_points {
        let _ = writeln!(tsv, "{}\t{}", p.mean_token_cost, p.mean_visil);
    }
    let tsv_path = cfg.store_dir.join("frontier.tsv");
    write_atomic(&tsv_path, tsv.as_bytes())?;
    report.output(&tsv_path.display().to_string());

    for v in &videos {
        for s in &v.selections {
            println!("{}\t{}\t{}", v.video_id, s.alpha, s.summary_id);
        }
    }
    Ok(())
}

/// One pair per answered question: the summary's score and whether the
/// answer was right.
fn pairs_from_vqa(records: &[ScoreRecord], outcomes: &[VqaOutcome], force: bool) -> Result<PairedSample, CliError> {
    let pooled = pool_records(records, &HashMap::new(), force)?;
    let scores: HashMap<(&str, &str), f64> = records
        .iter()
        .map(|r| ((r.video_id.as_str(), r.summary_id.as_str()), r.visil))
        .collect();
    let mut sample = PairedSample {
        x: Vec::new(),
        y: Vec::new(),
        evaluator_model: pooled.sample.evaluator_model,
        keys: Vec::new(),
    };
    for o in outcomes {
        if let Some(&v) = scores.get(&(o.video_id.as_str(), o.summary_id.as_str())) {
            sample.x.push(v);
            sample.y.push(if o.correct { 1.0 } else { 0.0 });
            sample.keys.push((o.video_id.clone(), o.summary_id.clone()));
        }
    }
    Ok(sample)
}

#[allow(clippy::too_many_arguments)]
fn stats(
    cfg: &RunConfig,
    scores: &Option<PathBuf>,
    correctness: &Option<PathBuf>,
    force: bool,
    trim: bool,
    n_shuffles: u64,
    dataset: &str,
    report: &mut Report,
) -> Result<(), CliError> {
    if n_shuffles == 0 {
        return Err(CliError::usage("arguments", "n_shuffles must be positive"));
    }
    let scores_path = store_path(cfg, scores, "scores.jsonl");
    require(&scores_path, "score store")?;
    let records = read_scores(&scores_path)?;

    let labels_path = correctness.clone().unwrap_or_else(|| {
        let labels = cfg.store_dir.join("correctness.json");
        if labels.exists() {
            labels
        } else {
            cfg.store_dir.join("vqa.jsonl")
        }
    });
    let mut sample = if labels_path.extension().is_some_and(|e| e == "jsonl") {
        let outcomes: Vec<VqaOutcome> = load_jsonl(&labels_path, "correctness labels")?;
        pairs_from_vqa(&records, &outcomes, force)?
    } else {
        let labels: Vec<CorrectnessLabel> = load_json(&labels_path, "correctness labels")?;
        let map: HashMap<(String, String), bool> = labels
            .into_iter()
            .map(|l| ((l.video_id, l.summary_id), l.correct))
            .collect();
        let pooled = pool_records(&records, &map, force)?;
        if pooled.dropped > 0 {
            warn!("{} score records had no correctness label", pooled.dropped);
            report
                .skipped
                .push(json!({"reason": "no correctness label", "count": pooled.dropped}));
        }
        pooled.sample
    };
    if trim {
        sample = trim_extremes(&sample);
    }
    let result = stat_report(&sample, n_shuffles, cfg.seed)?;
    let path = cfg.store_dir.join("stats.json");
    write_json(&path, &result)?;
    report.output(&path.display().to_string());
    print!("{}", visil::stats::render_table(&[(dataset.to_string(), result)]));
    Ok(())
}

fn parse_coverage(items: &[String]) -> Result<BTreeMap<SummaryFormat, f64>, CliError> {
    items
        .iter()
        .map(|item| {
            let (f, c) = item
                .split_once('=')
                .ok_or_else(|| CliError::usage("arguments", format!("coverage '{item}' is not format=fraction")))?;
            let format: SummaryFormat = f.trim().parse().map_err(|e: String| CliError::usage("arguments", e))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| CliError::usage("arguments", format!("coverage '{item}': {e}")))?;
            if !(0.0..=1.0).contains(&c) {
                return Err(CliError::usage("arguments", format!("coverage '{item}' outside [0, 1]")));
            }
            Ok((format, c))
        })
        .collect()
}

fn synth(
    cfg: &RunConfig,
    n_videos: usize,
    facts: usize,
    p_hit: f64,
    p_miss: f64,
    coverage: &[String],
    report: &mut Report,
) -> Result<(), CliError> {
    if facts == 0 || n_videos == 0 {
        return Err(CliError::usage("arguments", "n_videos and facts must be positive"));
    }
    if !(0.0 < p_miss && p_miss < p_hit && p_hit <= 1.0) {
        return Err(CliError::usage("arguments", "need 0 < p_miss < p_hit <= 1"));
    }
    let spec = SyntheticSpec {
        facts_per_video: facts,
        p_hit,
        p_miss,
        n_videos,
        coverage_by_format: parse_coverage(coverage)?,
        scoring: cfg.scoring.clone(),
        seed: cfg.seed,
    };
    let exp = synthetic_experiment(&spec)?;
    let dir = &cfg.store_dir;
    write_json(&dir.join("world.json"), &exp.world)?;
    write_json(&dir.join("videos.json"), &exp.videos)?;
    write_jsonl(&dir.join("captions.jsonl"), &exp.captions)?;
    write_jsonl(&dir.join("summaries.jsonl"), &exp.summaries)?;
    write_jsonl(&dir.join("scores.jsonl"), &exp.records)?;
    write_json(&dir.join("correctness.json"), &exp.correctness)?;
    for name in ["world.json", "videos.json", "captions.jsonl", "summaries.jsonl", "scores.jsonl", "correctness.json"] {
        report.output(&dir.join(name).display().to_string());
    }
    info!("synthetic experiment: {} summaries", exp.summaries.len());
    Ok(())
}
