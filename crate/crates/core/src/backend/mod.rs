//! Model backends.
//!
//! Every backend answers two kinds of request: free text generation, and
//! per-keyword log-probabilities for a masked caption. Three implementations
//! exist: [`chat::ChatBackend`] over an HTTP or fixture [`chat::Transport`],
//! and [`synthetic::SyntheticBackend`], a closed-form toy world.

pub mod chat;
pub mod replay;
pub mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::masking::MaskedCaption;
use crate::types::MediaContext;

/// Default probability floor for keywords the model did not propose.
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-6;

/// Default number of per-position alternatives requested.
pub const DEFAULT_TOP_K: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempts: {last}")]
    Unavailable { attempts: u32, last: String },
    #[error("model refused the request after {attempts} attempts")]
    Refused { attempts: u32 },
    #[error("no recorded fixture for request {hash}")]
    FixtureMiss { hash: String },
    #[error("unknown fact token '{0}'")]
    UnknownFact(String),
    #[error("unknown video '{0}'")]
    UnknownVideo(String),
    #[error("malformed backend response: {0}")]
    Protocol(String),
    #[error("unsupported context: {0}")]
    InvalidContext(String),
    #[error("unsupported prompt for this backend")]
    UnsupportedPrompt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub text: String,
    /// Prompt-side token count reported by the backend.
    pub prompt_tokens: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordScores {
    /// One natural-log probability per slot, each in `[ln floor, 0]`.
    pub logprobs: Vec<f64>,
    /// The response held no usable guesses; every slot was floored.
    pub empty_recovery: bool,
    pub prompt_tokens: Option<u64>,
}

pub trait Backend: Send + Sync {
    fn model_id(&self) -> &str;

    fn generate_text(
        &self,
        context: &MediaContext,
        prompt: &str,
        seed: u64,
    ) -> Result<Generation, BackendError>;

    fn score_keywords(
        &self,
        context: &MediaContext,
        masked: &MaskedCaption,
        seed: u64,
    ) -> Result<KeywordScores, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn generate_text(&self, c: &MediaContext, p: &str, s: u64) -> Result<Generation, BackendError> {
        (**self).generate_text(c, p, s)
    }

    fn score_keywords(
        &self,
        c: &MediaContext,
        m: &MaskedCaption,
        s: u64,
    ) -> Result<KeywordScores, BackendError> {
        (**self).score_keywords(c, m, s)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn generate_text(&self, c: &MediaContext, p: &str, s: u64) -> Result<Generation, BackendError> {
        (**self).generate_text(c, p, s)
    }

    fn score_keywords(
        &self,
        c: &MediaContext,
        m: &MaskedCaption,
        s: u64,
    ) -> Result<KeywordScores, BackendError> {
        (**self).score_keywords(c, m, s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluator model '{evaluator}' must differ from the {role} model")]
pub struct RoleViolation {
    pub evaluator: String,
    pub role: &'static str,
}

/// Which model plays which part. Scoring with a model that also produced the
/// caption or the summary would let its own hallucinations score well.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRoles {
    pub captioner: String,
    pub keyword_extractor: String,
    pub summarizer: String,
    pub evaluator: String,
    pub answerer: String,
}

impl ModelRoles {
    pub fn validate(&self, allow_shared_evaluator: bool) -> Result<(), RoleViolation> {
        if allow_shared_evaluator {
            return Ok(());
        }
        for (role, model) in [("captioner", &self.captioner), ("summarizer", &self.summarizer)] {
            if *model == self.evaluator {
                return Err(RoleViolation {
                    evaluator: self.evaluator.clone(),
                    role,
                });
            }
        }
        Ok(())
    }
}

impl Default for ModelRoles {
    fn default() -> Self {
        Self {
            captioner: "gemini-2.5-pro".into(),
            keyword_extractor: "gpt-5".into(),
            summarizer: "gemini-2.5-pro".into(),
            evaluator: "gemini-2.0-flash".into(),
            answerer: "gemini-2.5-pro".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluator_must_be_distinct() {
        let mut roles = ModelRoles::default();
        assert!(roles.validate(false).is_ok());
        roles.evaluator = roles.captioner.clone();
        let err = roles.validate(false).unwrap_err();
        assert_eq!(err.role, "captioner");
        assert!(roles.validate(true).is_ok());
        roles.captioner = "other".into();
        roles.evaluator = roles.summarizer.clone();
        assert_eq!(roles.validate(false).unwrap_err().role, "summarizer");
    }
}
