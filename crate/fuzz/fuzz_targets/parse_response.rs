#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::backend::chat::{keyword_logprobs, parse_response};

fuzz_target!(|data: &[u8]| {
    let Ok(body) = serde_json::from_slice::<serde_json::Value>(data) else { return };
    if let Ok(resp) = parse_response(&body) {
        let (lps, _) = keyword_logprobs(&resp, &["dog", "park", "red"], 20, 1e-6);
        assert_eq!(lps.len(), 3);
        assert!(lps.iter().all(|&lp| (1e-6f64.ln()..=0.0).contains(&lp)));
    }
});
