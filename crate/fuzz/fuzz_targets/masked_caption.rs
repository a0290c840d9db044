#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::masking::build_masked_caption;

// First line is the caption, the rest are keywords.
fuzz_target!(|data: &str| {
    let (caption, rest) = data.split_once('\n').unwrap_or((data, ""));
    let keywords: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    if let Ok(masked) = build_masked_caption(caption, &keywords) {
        assert!(masked.len() <= keywords.len());
    }
});
