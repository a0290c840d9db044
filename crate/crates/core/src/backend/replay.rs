//! Record/replay fixtures for the chat transport.
//!
//! One file per request, `<fixtures>/<key>.json`, holding
//! `{"key": ..., "request": ..., "response": ...}`. The key is the SHA-256 of
//! the canonical JSON of `{"model_id", "payload", "seed"}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::chat::{Transport, TransportError};
use crate::store::write_atomic;

/// Stable content hash of a request. `serde_json` objects keep keys sorted,
/// so the serialization is canonical.
pub fn fixture_key(payload: &Value) -> String {
    let model_id = payload.get("model").cloned().unwrap_or(Value::Null);
    let seed = payload.get("seed").cloned().unwrap_or(Value::Null);
    let canonical = json!({"model_id": model_id, "payload": payload, "seed": seed});
    let bytes = serde_json::to_vec(&canonical).expect("json values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub request: Value,
    pub response: Value,
}

fn fixture_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

pub fn record_fixture(dir: &Path, request: &Value, response: &Value) -> Result<PathBuf, TransportError> {
    let key = fixture_key(request);
    let fixture = Fixture {
        key: key.clone(),
        request: request.clone(),
        response: response.clone(),
    };
    let mut text = serde_json::to_string_pretty(&fixture).map_err(|e| TransportError::Fatal(e.to_string()))?;
    text.push('\n');
    let path = fixture_path(dir, &key);
    write_atomic(&path, text.as_bytes()).map_err(|e| TransportError::Fatal(e.to_string()))?;
    Ok(path)
}

pub fn replay_lookup(dir: &Path, request: &Value) -> Result<Value, TransportError> {
    let key = fixture_key(request);
    let path = fixture_path(dir, &key);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(TransportError::FixtureMiss(key)),
        Err(e) => return Err(TransportError::Fatal(format!("{}: {e}", path.display()))),
    };
    let fixture: Fixture = serde_json::from_str(&text)
        .map_err(|e| TransportError::Fatal(format!("corrupt fixture {}: {e}", path.display())))?;
    if fixture.key != key {
        return Err(TransportError::Fatal(format!("fixture {} has key {}", path.display(), fixture.key)));
    }
    Ok(fixture.response)
}

/// Serves recorded responses; never touches the network.
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Transport for ReplayTransport {
    fn send(&self, payload: &Value) -> Result<Value, TransportError> {
        replay_lookup(&self.dir, payload)
    }
}

/// Passes requests through to `inner` and persists every successful response.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, payload: &Value) -> Result<Value, TransportError> {
        let response = self.inner.send(payload)?;
        record_fixture(&self.dir, payload, &response)?;
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;

    impl Transport for Echo {
        fn send(&self, payload: &Value) -> Result<Value, TransportError> {
            Ok(json!({"echo": payload["seed"]}))
        }
    }

    fn req(seed: u64) -> Value {
        json!({"model": "m", "seed": seed, "messages": [{"role": "user", "content": []}]})
    }

    #[test]
    fn seed_changes_key() {
        assert_ne!(fixture_key(&req(1)), fixture_key(&req(2)));
        assert_eq!(fixture_key(&req(1)), fixture_key(&req(1)));
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let rec = RecordingTransport::new(Echo, dir.path());
        let live = rec.send(&req(5)).unwrap();
        let replay = ReplayTransport::new(dir.path());
        let a = replay.send(&req(5)).unwrap();
        let b = replay.send(&req(5)).unwrap();
        assert_eq!(a, live);
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    }

    #[test]
    fn missing_fixture_names_hash() {
        let dir = tempfile::tempdir().unwrap();
        let replay = ReplayTransport::new(dir.path());
        assert_eq!(replay.send(&req(3)), Err(TransportError::FixtureMiss(fixture_key(&req(3)))));
    }
}
