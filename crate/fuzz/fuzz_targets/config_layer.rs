#![no_main]

use libfuzzer_sys::fuzz_target;
use visil_cli::ConfigLayer;

fuzz_target!(|data: &[u8]| {
    if let Ok(layer) = serde_json::from_slice::<ConfigLayer>(data) {
        let _ = visil_cli::resolve(layer, ConfigLayer::default(), ConfigLayer::default());
    }
});
