#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::backend::replay::Fixture;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<Fixture>(data);
});
