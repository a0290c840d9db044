//! Chat-completions wire format with per-token log-probabilities.
//!
//! Requests look like
//!
//! ```json
//! {"model": "...", "seed": 7, "temperature": 0.0,
//!  "messages": [{"role": "user", "content": [
//!     {"type": "video_url", "video_url": {"url": "clips/a.mp4"}},
//!     {"type": "image_url", "image_url": {"url": "frames/a/frame_000345.png"}},
//!     {"type": "text", "text": "..."}]}],
//!  "logprobs": true, "top_logprobs": 20}
//! ```
//!
//! Media parts carry local paths; only the HTTP transport inlines them as
//! data URLs, so fixture keys do not depend on file bytes.

use std::thread;
use std::time::Duration;

use log::warn;
use serde_json::{json, Value};

use super::{Backend, BackendError, Generation, KeywordScores};
use crate::masking::{align_guesses, MaskedCaption};
use crate::prompts::{self, ScoreModality};
use crate::types::{MediaContext, Part};

#[derive(Debug, Clone, PartialEq)]
pub enum TransportError {
    /// Worth retrying: timeouts, 429, 5xx.
    Retryable(String),
    Fatal(String),
    FixtureMiss(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, payload: &Value) -> Result<Value, TransportError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatConfig {
    pub model_id: String,
    pub top_k: u32,
    pub epsilon_floor: f64,
    pub temperature: f64,
    /// Extra attempts after the first.
    pub retries: u32,
    pub backoff_base: Duration,
}

impl ChatConfig {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            top_k: super::DEFAULT_TOP_K,
            epsilon_floor: super::DEFAULT_EPSILON_FLOOR,
            temperature: 0.0,
            retries: 3,
            backoff_base: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
    pub top: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    pub tokens: Vec<TokenLogprob>,
    pub prompt_tokens: Option<u64>,
    pub finish_reason: Option<String>,
}

impl ChatResponse {
    pub fn is_refusal(&self) -> bool {
        matches!(
            self.finish_reason.as_deref(),
            Some("content_filter") | Some("safety") | Some("refusal")
        ) || (self.content.trim().is_empty() && self.tokens.is_empty())
    }
}

fn part_json(part: &Part) -> Value {
    match part {
        Part::Text(t) => json!({"type": "text", "text": t}),
        Part::Image(f) => json!({"type": "image_url", "image_url": {"url": f.0}}),
        Part::Video(v) => {
            let url = v
                .video_path
                .as_ref()
                .or(v.frame_dir.as_ref())
                .map(|p| p.display().to_string())
                .unwrap_or_default();
            json!({"type": "video_url", "video_url": {"url": url}})
        }
    }
}

/// Builds the request body. `logprobs` requests top-k alternatives.
pub fn build_request(
    cfg: &ChatConfig,
    parts: &[Part],
    prompt: &str,
    seed: u64,
    logprobs: bool,
) -> Value {
    let mut content: Vec<Value> = parts.iter().map(part_json).collect();
    content.push(json!({"type": "text", "text": prompt}));
    let mut body = json!({
        "model": cfg.model_id,
        "messages": [{"role": "user", "content": content}],
        "temperature": cfg.temperature,
        "seed": seed,
    });
    if logprobs {
        body["logprobs"] = json!(true);
        body["top_logprobs"] = json!(cfg.top_k);
    }
    body
}

pub fn parse_response(body: &Value) -> Result<ChatResponse, BackendError> {
    let proto = |m: &str| BackendError::Protocol(m.to_string());
    let choice = body
        .get("choices")
        .and_then(Value::as_array)
        .and_then(|c| c.first())
        .ok_or_else(|| proto("missing choices[0]"))?;
    let content = match choice.pointer("/message/content") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => String::new(),
        Some(_) => return Err(proto("message.content is not a string")),
    };
    let finish_reason = choice
        .get("finish_reason")
        .and_then(Value::as_str)
        .map(str::to_string);
    let mut tokens = Vec::new();
    if let Some(entries) = choice.pointer("/logprobs/content").and_then(Value::as_array) {
        for e in entries {
            let token = e
                .get("token")
                .and_then(Value::as_str)
                .ok_or_else(|| proto("logprob entry without token"))?;
            let logprob = e
                .get("logprob")
                .and_then(Value::as_f64)
                .ok_or_else(|| proto("logprob entry without logprob"))?;
            let top = e
                .get("top_logprobs")
                .and_then(Value::as_array)
                .map(|alts| {
                    alts.iter()
                        .filter_map(|a| {
                            Some((a.get("token")?.as_str()?.to_string(), a.get("logprob")?.as_f64()?))
                        })
                        .collect()
                })
                .unwrap_or_default();
            tokens.push(TokenLogprob {
                token: token.to_string(),
                logprob,
                top,
            });
        }
    }
    let prompt_tokens = body.pointer("/usage/prompt_tokens").and_then(Value::as_u64);
    Ok(ChatResponse {
        content,
        tokens,
        prompt_tokens,
        finish_reason,
    })
}

fn normalize_word(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Char spans of whitespace-separated words.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Reads per-slot keyword log-probabilities off a scored response.
///
/// For slot `i` with keyword `k`: if guess `i` is `k`, the summed log-probs of
/// the tokens forming that guess; else `k`'s log-prob among the first `top_k`
/// alternatives at the guess's first token; else `ln(floor)`. Values are
/// clamped to `[ln floor, 0]`.
pub fn keyword_logprobs(
    resp: &ChatResponse,
    keywords: &[&str],
    top_k: usize,
    epsilon_floor: f64,
) -> (Vec<f64>, bool) {
    let floor = epsilon_floor.ln();
    // token text is authoritative when present
    let text: String = if resp.tokens.is_empty() {
        resp.content.clone()
    } else {
        resp.tokens.iter().map(|t| t.token.as_str()).collect()
    };
    let mut token_starts = Vec::with_capacity(resp.tokens.len());
    let mut at = 0;
    for t in &resp.tokens {
        token_starts.push((at, at + t.token.len()));
        at += t.token.len();
    }
    let spans = word_spans(&text);
    let alignment = align_guesses(&text, keywords.len());
    let empty = alignment.parsed() == 0;

    let values = keywords
        .iter()
        .enumerate()
        .map(|(i, kw)| {
            let Some(guess) = &alignment.guesses[i] else {
                return floor;
            };
            let (ws, we) = spans[i];
            let covering: Vec<&TokenLogprob> = resp
                .tokens
                .iter()
                .zip(&token_starts)
                .filter(|(_, &(ts, te))| ts < we && te > ws)
                .map(|(t, _)| t)
                .collect();
            let value = if normalize_word(guess) == *kw {
                if covering.is_empty() {
                    floor
                } else {
                    covering.iter().map(|t| t.logprob).sum()
                }
            } else {
                covering
                    .first()
                    .and_then(|t| {
                        t.top
                            .iter()
                            .take(top_k)
                            .find(|(alt, _)| normalize_word(alt) == *kw)
                            .map(|(_, lp)| *lp)
                    })
                    .unwrap_or(floor)
            };
            value.clamp(floor, 0.0)
        })
        .collect();
    (values, empty)
}

/// Input bullet of the score prompt matching the context's media.
pub fn score_modality(ctx: &MediaContext) -> Result<ScoreModality, BackendError> {
    if !ctx.video_ids().is_empty() {
        return Ok(ScoreModality::Video);
    }
    match ctx.image_count() {
        0 => Ok(ScoreModality::TextOnly),
        1 => Ok(ScoreModality::OneImage),
        3 => Ok(ScoreModality::ThreeImage),
        n => Err(BackendError::InvalidContext(format!("{n} keyframes"))),
    }
}

/// Score request: media parts in order, then the filled score prompt. Text
/// parts become the prompt's summary slot.
pub fn score_request(
    cfg: &ChatConfig,
    ctx: &MediaContext,
    masked: &MaskedCaption,
    seed: u64,
) -> Result<Value, BackendError> {
    let modality = score_modality(ctx)?;
    let prompt = prompts::render_visil(modality, &ctx.joined_text(), &masked.masked_text);
    let media: Vec<Part> = ctx
        .parts()
        .iter()
        .filter(|p| !matches!(p, Part::Text(_)))
        .cloned()
        .collect();
    Ok(build_request(cfg, &media, &prompt, seed, true))
}

pub struct ChatBackend<T> {
    cfg: ChatConfig,
    transport: T,
}

impl<T: Transport> ChatBackend<T> {
    pub fn new(cfg: ChatConfig, transport: T) -> Self {
        Self { cfg, transport }
    }

    pub fn config(&self) -> &ChatConfig {
        &self.cfg
    }

    /// Sends with retries; refusals and retryable transport errors back off
    /// exponentially from `backoff_base`.
    fn call(&self, payload: &Value) -> Result<ChatResponse, BackendError> {
        let attempts = self.cfg.retries + 1;
        let mut last = String::new();
        let mut refused = false;
        for attempt in 0..attempts {
            if attempt > 0 {
                let wait = self.cfg.backoff_base * 2u32.saturating_pow(attempt - 1);
                if !wait.is_zero() {
                    thread::sleep(wait);
                }
            }
            match self.transport.send(payload) {
                Ok(body) => {
                    let resp = parse_response(&body)?;
                    if resp.is_refusal() {
                        warn!("model refused (attempt {}/{attempts})", attempt + 1);
                        refused = true;
                        continue;
                    }
                    return Ok(resp);
                }
                Err(TransportError::FixtureMiss(hash)) => return Err(BackendError::FixtureMiss { hash }),
                Err(TransportError::Fatal(msg)) => {
                    return Err(BackendError::Unavailable {
                        attempts: attempt + 1,
                        last: msg,
                    })
                }
                Err(TransportError::Retryable(msg)) => {
                    warn!("transport error (attempt {}/{attempts}): {msg}", attempt + 1);
                    refused = false;
                    last = msg;
                }
            }
        }
        if refused {
            Err(BackendError::Refused { attempts })
        } else {
            Err(BackendError::Unavailable { attempts, last })
        }
    }
}

impl<T: Transport> Backend for ChatBackend<T> {
    fn model_id(&self) -> &str {
        &self.cfg.model_id
    }

    fn generate_text(
        &self,
        context: &MediaContext,
        prompt: &str,
        seed: u64,
    ) -> Result<Generation, BackendError> {
        let payload = build_request(&self.cfg, context.parts(), prompt, seed, false);
        let resp = self.call(&payload)?;
        Ok(Generation {
            text: resp.content,
            prompt_tokens: resp.prompt_tokens,
        })
    }

    fn score_keywords(
        &self,
        context: &MediaContext,
        masked: &MaskedCaption,
        seed: u64,
    ) -> Result<KeywordScores, BackendError> {
        let payload = score_request(&self.cfg, context, masked, seed)?;
        let resp = self.call(&payload)?;
        let keywords: Vec<&str> = masked.keywords().collect();
        let (logprobs, empty_recovery) =
            keyword_logprobs(&resp, &keywords, self.cfg.top_k as usize, self.cfg.epsilon_floor);
        if empty_recovery {
            warn!("no parseable guesses; all {} slots floored", keywords.len());
        }
        Ok(KeywordScores {
            logprobs,
            empty_recovery,
            prompt_tokens: resp.prompt_tokens,
        })
    }
}

/// Live HTTP transport. Local media paths are inlined as base64 data URLs.
pub struct HttpTransport {
    endpoint: String,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            agent,
        }
    }
}

fn mime_for(path: &str) -> &'static str {
    let lower = path.to_ascii_lowercase();
    match lower.rsplit('.').next() {
        Some("png") => "image/png",
        Some("jpg") | Some("jpeg") => "image/jpeg",
        Some("webp") => "image/webp",
        Some("mp4") => "video/mp4",
        Some("webm") => "video/webm",
        Some("mov") => "video/quicktime",
        _ => "application/octet-stream",
    }
}

/// Replaces local media paths with data URLs; remote and data URLs pass through.
pub fn inline_media(payload: &Value) -> Result<Value, TransportError> {
    use base64::Engine;
    let mut out = payload.clone();
    let Some(messages) = out.get_mut("messages").and_then(Value::as_array_mut) else {
        return Ok(out);
    };
    for msg in messages {
        let Some(content) = msg.get_mut("content").and_then(Value::as_array_mut) else {
            continue;
        };
        for part in content {
            for key in ["image_url", "video_url"] {
                let Some(url) = part.pointer_mut(&format!("/{key}/url")) else {
                    continue;
                };
                let Some(path) = url.as_str() else { continue };
                if path.starts_with("http://") || path.starts_with("https://") || path.starts_with("data:") {
                    continue;
                }
                let bytes = std::fs::read(path)
                    .map_err(|e| TransportError::Fatal(format!("cannot read media {path}: {e}")))?;
                let data = base64::engine::general_purpose::STANDARD.encode(bytes);
                *url = Value::String(format!("data:{};base64,{data}", mime_for(path)));
            }
        }
    }
    Ok(out)
}

impl Transport for HttpTransport {
    fn send(&self, payload: &Value) -> Result<Value, TransportError> {
        let body = inline_media(payload)?;
        let result = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body);
        match result {
            Ok(mut resp) => resp
                .body_mut()
                .read_json::<Value>()
                .map_err(|e| TransportError::Retryable(format!("bad response body: {e}"))),
            Err(ureq::Error::StatusCode(code)) if code == 429 || code >= 500 => {
                Err(TransportError::Retryable(format!("HTTP {code}")))
            }
            Err(ureq::Error::StatusCode(code)) => Err(TransportError::Fatal(format!("HTTP {code}"))),
            Err(e) => Err(TransportError::Retryable(e.to_string())),
        }
    }
}
