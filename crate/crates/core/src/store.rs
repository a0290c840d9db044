//! Line-delimited JSON stores.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::types::ScoreRecord;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One JSON document per line, each terminated by `\n`. Empty input gives `""`.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String, StoreError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses one record per non-blank line. Line numbers in errors are 1-based.
pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, StoreError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| StoreError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn serialize_records(records: &[ScoreRecord]) -> Result<String, StoreError> {
    to_jsonl(records)
}

/// Parses a score store, rejecting unknown fields and records that break the
/// score invariants.
pub fn parse_records(text: &str) -> Result<Vec<ScoreRecord>, StoreError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| StoreError::Parse {
            line: i + 1,
            message,
        };
        let rec: ScoreRecord = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        rec.validate().map_err(parse_err)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    from_jsonl(&text)
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRecord>, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_records(&text)
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `contents` to a sibling temp file, then renames it over `path`.
/// Temp names are unique per call, so concurrent writers never share one.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_file_name(format!(".{file_name}.{}.{n}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), StoreError> {
    write_atomic(path, to_jsonl(records)?.as_bytes())
}

pub fn append_jsonl<T: Serialize>(path: &Path, record: &T) -> Result<(), StoreError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let line = serde_json::to_string(record)?;
    writeln!(f, "{line}").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(visil_v: f64, visil_s: f64) -> ScoreRecord {
        ScoreRecord {
            video_id: "v1".into(),
            summary_id: "s1".into(),
            evaluator_model: "eval".into(),
            runs: 1,
            seed: 7,
            epsilon_floor: 1e-6,
            keywords: vec!["dog".into()],
            per_keyword_logp_video: vec![vec![visil_v]],
            per_keyword_logp_summary: vec![vec![visil_s]],
            logp_c_given_v: visil_v,
            logp_c_given_s: visil_s,
            visil: visil_v - visil_s,
            visil_per_keyword: visil_v - visil_s,
            excluded_keywords: 0,
            floored_runs: 0,
        }
    }

    #[test]
    fn empty_round_trip() {
        assert_eq!(serialize_records(&[]).unwrap(), "");
        assert!(parse_records("").unwrap().is_empty());
    }

    #[test]
    fn zero_visil_line() {
        let r = record(-0.5, -0.5);
        let text = serialize_records(std::slice::from_ref(&r)).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("\"visil\":0.0"));
        assert_eq!(parse_records(&text).unwrap(), vec![r]);
    }

    #[test]
    fn positive_logp_rejected_with_line_number() {
        let good = serialize_records(&[record(-1.0, -2.0)]).unwrap();
        let mut bad = record(-1.0, -2.0);
        bad.logp_c_given_v = 0.5;
        bad.visil = bad.logp_c_given_v - bad.logp_c_given_s;
        let text = format!("{good}{}", serialize_records(&[bad]).unwrap());
        match parse_records(&text) {
            Err(StoreError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = serialize_records(&[record(-1.0, -1.0)]).unwrap();
        let text = text.replacen('{', "{\"extra\":1,", 1);
        assert!(matches!(parse_records(&text), Err(StoreError::Parse { line: 1, .. })));
    }

    #[test]
    fn malformed_line() {
        assert!(matches!(
            parse_records("{not json"),
            Err(StoreError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/scores.jsonl");
        write_atomic(&p, b"a\n").unwrap();
        write_atomic(&p, b"b\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    fn arb_record() -> impl Strategy<Value = ScoreRecord> {
        let floor = 1e-6f64;
        let lo = floor.ln();
        (1u32..4, 0usize..6, any::<u64>(), "[a-z]{1,8}", "[a-z0-9]{1,8}").prop_flat_map(
            move |(runs, n, seed, vid, sid)| {
                let cell = lo..=0.0f64;
                let mat = proptest::collection::vec(
                    proptest::collection::vec(cell.clone(), n),
                    runs as usize,
                );
                (mat.clone(), mat, lo * 20.0..=0.0f64, lo * 20.0..=0.0f64, 0usize..5).prop_map(
                    move |(mv, ms, lv, ls, excluded)| ScoreRecord {
                        video_id: vid.clone(),
                        summary_id: sid.clone(),
                        evaluator_model: "m".into(),
                        runs,
                        seed,
                        epsilon_floor: floor,
                        keywords: (0..n).map(|i| format!("k{i}")).collect(),
                        per_keyword_logp_video: mv,
                        per_keyword_logp_summary: ms,
                        logp_c_given_v: lv,
                        logp_c_given_s: ls,
                        visil: lv - ls,
                        visil_per_keyword: if n == 0 { 0.0 } else { (lv - ls) / n as f64 },
                        excluded_keywords: excluded,
                        floored_runs: 0,
                    },
                )
            },
        )
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(records in proptest::collection::vec(arb_record(), 0..5)) {
            let text = serialize_records(&records).unwrap();
            prop_assert_eq!(text.lines().count(), records.len());
            prop_assert_eq!(parse_records(&text).unwrap(), records);
        }
    }
}
