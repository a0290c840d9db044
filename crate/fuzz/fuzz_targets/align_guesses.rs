#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::masking::align_guesses;

fuzz_target!(|input: (u8, &str)| {
    let (n, response) = input;
    let n = usize::from(n % 32);
    let a = align_guesses(response, n);
    assert_eq!(a.guesses.len(), n);
    assert_eq!(a.parsed() + a.discarded, response.split_whitespace().count());
});
