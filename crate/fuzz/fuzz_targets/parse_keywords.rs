#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::masking::parse_keywords;

fuzz_target!(|data: &str| {
    if let Ok(words) = parse_keywords(data) {
        assert!(words.len() <= 20);
        for w in &words {
            assert!(!w.is_empty() && w != "video");
            assert!(!w.chars().any(char::is_whitespace));
            assert_eq!(w, &w.to_lowercase());
        }
        let mut sorted = words.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), words.len());
    }
});
