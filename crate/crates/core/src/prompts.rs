//! Prompt assets shipped with the library, plus placeholder filling.
//!
//! Assets are stored as plain text under `prompts/` and embedded verbatim.

pub const CAPTIONING: &str = include_str!("../prompts/captioning.txt");
pub const KEYWORDS: &str = include_str!("../prompts/keywords.txt");
pub const KEYFRAMES: &str = include_str!("../prompts/keyframes.txt");
pub const SUMMARY: &str = include_str!("../prompts/summary.txt");
pub const DISTRACTORS: &str = include_str!("../prompts/distractors.txt");
pub const CORRESPONDENCE: &str = include_str!("../prompts/correspondence.txt");
pub const VISIL: &str = include_str!("../prompts/visil.txt");
pub const VQA: &str = include_str!("../prompts/vqa.txt");

/// Literal slot marker in masked captions.
pub const MASK: &str = "[MASK]";

/// Every asset with its file stem.
pub const ALL: [(&str, &str); 8] = [
    ("captioning", CAPTIONING),
    ("keywords", KEYWORDS),
    ("keyframes", KEYFRAMES),
    ("summary", SUMMARY),
    ("distractors", DISTRACTORS),
    ("correspondence", CORRESPONDENCE),
    ("visil", VISIL),
    ("vqa", VQA),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Captioning,
    Keywords,
    Keyframes,
    Summary,
    Distractors,
    Correspondence,
    Visil,
    Vqa,
}

impl PromptKind {
    /// Recognizes a rendered prompt by its opening line.
    pub fn identify(prompt: &str) -> Option<Self> {
        let first = prompt.lines().next()?;
        let table = [
            (CAPTIONING, PromptKind::Captioning),
            (KEYWORDS, PromptKind::Keywords),
            (KEYFRAMES, PromptKind::Keyframes),
            (SUMMARY, PromptKind::Summary),
            (DISTRACTORS, PromptKind::Distractors),
            (CORRESPONDENCE, PromptKind::Correspondence),
            (VISIL, PromptKind::Visil),
        ];
        if let Some((_, kind)) = table.iter().find(|(asset, _)| asset.lines().next() == Some(first)) {
            return Some(*kind);
        }
        // The VQA prompt opens with a placeholder.
        let vqa_tail = "answer concisely using only the provided information.";
        (first.starts_with("Given ") && first.ends_with(vqa_tail)).then_some(PromptKind::Vqa)
    }
}

/// Which input bullet of the score prompt applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreModality {
    Video,
    ThreeImage,
    OneImage,
    TextOnly,
}

impl ScoreModality {
    fn bullet_prefix(self) -> &'static str {
        match self {
            ScoreModality::Video => "- For video:",
            ScoreModality::ThreeImage => "- For 3-image summary:",
            ScoreModality::OneImage => "- For 1-image summary:",
            ScoreModality::TextOnly => "- For text-only summary:",
        }
    }
}

/// Fills the score prompt, keeping only the input bullet for `modality`.
pub fn render_visil(modality: ScoreModality, summary: &str, masked_caption: &str) -> String {
    let keep = modality.bullet_prefix();
    let mut out = String::with_capacity(VISIL.len() + summary.len() + masked_caption.len());
    for line in VISIL.lines() {
        if line.starts_with("- For ") && !line.starts_with(keep) {
            continue;
        }
        out.push_str(line);
        out.push('\n');
    }
    fill(&out, &[("summary", summary), ("masked_caption", masked_caption)])
}

/// Letters the options `A. ...`, one per line.
pub fn letter_options(options: &[String]) -> String {
    options
        .iter()
        .enumerate()
        .map(|(i, o)| format!("{}. {o}", (b'A' + i as u8) as char))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_vqa(input_format: &str, summary: &str, question: &str, options: &[String]) -> String {
    fill(
        VQA,
        &[
            ("input_format", input_format),
            ("summary", summary),
            ("question", question),
            ("options", &letter_options(options)),
        ],
    )
}

pub fn render_distractors(count: usize, format: &str) -> String {
    fill(
        DISTRACTORS,
        &[("total_distractor_num", &count.to_string()), ("format", format)],
    )
}

/// Single-pass `{name}` substitution; substituted text is never rescanned.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identify_each_prompt() {
        assert_eq!(PromptKind::identify(CAPTIONING), Some(PromptKind::Captioning));
        assert_eq!(PromptKind::identify(KEYWORDS), Some(PromptKind::Keywords));
        assert_eq!(PromptKind::identify(KEYFRAMES), Some(PromptKind::Keyframes));
        assert_eq!(PromptKind::identify(SUMMARY), Some(PromptKind::Summary));
        assert_eq!(
            PromptKind::identify(&render_distractors(3, "JSON array")),
            Some(PromptKind::Distractors)
        );
        assert_eq!(PromptKind::identify(CORRESPONDENCE), Some(PromptKind::Correspondence));
        assert_eq!(
            PromptKind::identify(&render_visil(ScoreModality::Video, "", "a [MASK]")),
            Some(PromptKind::Visil)
        );
        assert_eq!(
            PromptKind::identify(&render_vqa("a textual summary", "s", "q?", &["x".into()])),
            Some(PromptKind::Vqa)
        );
        assert_eq!(PromptKind::identify("hello"), None);
    }

    #[test]
    fn visil_keeps_one_bullet() {
        let p = render_visil(ScoreModality::OneImage, "a dog runs", "A [MASK] jumps");
        assert!(p.contains("- For 1-image summary: Given the single keyframe image [KEYFRAME1]"));
        assert!(p.contains("describing a video: a dog runs."));
        assert!(!p.contains("For 3-image"));
        assert!(!p.contains("For video:"));
        assert!(p.contains("masked caption of the video: A [MASK] jumps."));
        assert!(p.contains("Guess all [MASK] words"));
    }

    #[test]
    fn fill_does_not_rescan() {
        assert_eq!(fill("{a} {b}", &[("a", "{b}"), ("b", "x")]), "{b} x");
        assert_eq!(fill("{unknown}", &[]), "{unknown}");
    }

    #[test]
    fn vqa_fills_every_slot() {
        let p = render_vqa("a textual summary of a video", "S", "Why?", &["yes".into(), "no".into()]);
        assert!(p.starts_with("Given a textual summary of a video, answer"));
        assert!(p.contains("Question: Why?"));
        assert!(p.contains("Options: A. yes\nB. no"));
        assert!(!p.contains('{'));
    }
}
