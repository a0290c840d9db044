//! Keyword lists, masked captions and guess alignment.

use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompts::MASK;
use crate::types::MAX_KEYWORDS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskError {
    #[error("keyword list is not a JSON array of strings: {0}")]
    KeywordParse(String),
    #[error("none of the keywords occur in the caption")]
    NothingToMask,
    #[error("caption already contains the literal {MASK} marker")]
    SentinelInCaption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub keyword: String,
    /// Character offsets into the original caption, half-open.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub keyword: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedCaption {
    pub original_text: String,
    pub masked_text: String,
    pub slots: Vec<Slot>,
    pub excluded: Vec<Excluded>,
}

impl MaskedCaption {
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().map(|s| s.keyword.as_str())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Removes a surrounding markdown code fence, if any.
pub(crate) fn strip_code_fence(raw: &str) -> &str {
    let t = raw.trim();
    let Some(inner) = t.strip_prefix("```") else {
        return t;
    };
    let Some(inner) = inner.strip_suffix("```") else {
        return t;
    };
    // drop an info string such as `json`
    match inner.find('\n') {
        Some(nl) if inner[..nl].chars().all(|c| c.is_ascii_alphanumeric()) => inner[nl + 1..].trim(),
        _ => inner.trim(),
    }
}

/// Parses a model's keyword answer.
///
/// Entries are lowercased; multi-word entries and "video" are dropped;
/// duplicates keep their first occurrence; at most 20 survive, in order.
pub fn parse_keywords(raw: &str) -> Result<Vec<String>, MaskError> {
    let entries: Vec<String> = serde_json::from_str(strip_code_fence(raw))
        .map_err(|e| MaskError::KeywordParse(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for entry in entries {
        let word = entry.trim().to_lowercase();
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            warn!("dropping keyword {entry:?}: not a single word");
            continue;
        }
        if word == "video" {
            continue;
        }
        if !seen.insert(word.clone()) {
            continue;
        }
        out.push(word);
    }
    if out.len() > MAX_KEYWORDS {
        warn!("truncating {} keywords to {MAX_KEYWORDS}", out.len());
        out.truncate(MAX_KEYWORDS);
    }
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// First case-insensitive whole-word match of `keyword` starting at or after
/// char index `from`. Returns char offsets.
fn find_word(chars: &[char], keyword: &[char], from: usize) -> Option<(usize, usize)> {
    if keyword.is_empty() || chars.len() < keyword.len() {
        return None;
    }
    let last_start = chars.len() - keyword.len();
    (from..=last_start).find_map(|start| {
        let end = start + keyword.len();
        let matches = chars[start..end]
            .iter()
            .zip(keyword)
            .all(|(&c, &k)| c == k || c.to_lowercase().eq(k.to_lowercase()));
        let left_ok = start == 0 || !is_word_char(chars[start - 1]);
        let right_ok = end == chars.len() || !is_word_char(chars[end]);
        (matches && left_ok && right_ok).then_some((start, end))
    })
}

/// Masks each keyword at its first whole-word occurrence after the previous
/// slot. Keywords with no such occurrence are excluded, not fatal.
pub fn build_masked_caption(caption: &str, keywords: &[String]) -> Result<MaskedCaption, MaskError> {
    if caption.contains(MASK) {
        return Err(MaskError::SentinelInCaption);
    }
    let chars: Vec<char> = caption.chars().collect();
    let mut cursor = 0;
    let mut slots = Vec::new();
    let mut excluded = Vec::new();
    for kw in keywords {
        let kw_chars: Vec<char> = kw.chars().collect();
        match find_word(&chars, &kw_chars, cursor) {
            Some((start, end)) => {
                slots.push(Slot {
                    keyword: kw.clone(),
                    start,
                    end,
                });
                cursor = end;
            }
            None => excluded.push(Excluded {
                keyword: kw.clone(),
                reason: ExclusionReason::NotFound,
            }),
        }
    }
    if slots.is_empty() {
        return Err(MaskError::NothingToMask);
    }
    let mut masked = String::with_capacity(caption.len());
    let mut pos = 0;
    for slot in &slots {
        masked.extend(&chars[pos..slot.start]);
        masked.push_str(MASK);
        pos = slot.end;
    }
    masked.extend(&chars[pos..]);
    Ok(MaskedCaption {
        original_text: caption.to_string(),
        masked_text: masked,
        slots,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// One entry per slot, in slot order; `None` when the response ran short.
    pub guesses: Vec<Option<String>>,
    pub discarded: usize,
}

impl Alignment {
    pub fn parsed(&self) -> usize {
        self.guesses.iter().filter(|g| g.is_some()).count()
    }
}

/// Pairs whitespace-separated guesses with slots in order.
pub fn align_guesses(response: &str, n_slots: usize) -> Alignment {
    let mut words = response.split_whitespace();
    let guesses: Vec<Option<String>> = (0..n_slots)
        .map(|_| words.next().map(str::to_string))
        .collect();
    let discarded = words.count();
    if discarded > 0 {
        warn!("discarding {discarded} surplus guesses");
    }
    Alignment { guesses, discarded }
}
