#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::harness::parse_judgment;

fuzz_target!(|data: &str| {
    if let Some(j) = parse_judgment(data) {
        assert!(j.confidence.is_none_or(|c| (1..=5).contains(&c)));
    }
});
