#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::harness::parse_keyframes;

fuzz_target!(|data: &str| {
    let _ = parse_keyframes(data);
});
