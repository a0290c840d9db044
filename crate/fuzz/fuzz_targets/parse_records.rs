#![no_main]

use libfuzzer_sys::fuzz_target;
use visil::store::{parse_records, serialize_records};

fuzz_target!(|data: &str| {
    if let Ok(records) = parse_records(data) {
        let text = serialize_records(&records).unwrap();
        assert_eq!(parse_records(&text).unwrap(), records);
    }
});
