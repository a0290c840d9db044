#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::harness::parse_letter;

fuzz_target!(|input: (u8, &str)| {
    let (n, raw) = input;
    let n = usize::from(n % 6);
    if let Some(i) = parse_letter(raw, n) {
        assert!(i < n);
    }
});
