#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::harness::{parse_timecode, Timecode};

fuzz_target!(|input: (f64, &str)| {
    let (fps, tc) = input;
    let _ = parse_timecode(tc, fps);
    if let Ok(parsed) = tc.parse::<Timecode>() {
        assert_eq!(parsed.to_string().parse::<Timecode>().unwrap(), parsed);
    }
});
