#![no_main]

use libfuzzer_sys::fuzz_target;
use mle_core::store::{decode_records, encode_record};

fuzz_target!(|data: &[u8]| {
    let Ok(log) = decode_records(data) else {
        return;
    };
    assert!(log.valid_len <= data.len());
    let bytes: Vec<u8> = log.events.iter().flat_map(encode_record).collect();
    let again = decode_records(&bytes).unwrap();
    assert_eq!(again.events, log.events);
    assert!(!again.torn_tail);
});
