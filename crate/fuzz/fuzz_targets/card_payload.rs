#![no_main]

use libfuzzer_sys::fuzz_target;
use mle_core::qr::{decode_payload, encode_payload};

fuzz_target!(|data: &str| {
    if let Ok(decoded) = decode_payload(data) {
        // The decoder accepts exactly the encoder's image.
        let encoded = encode_payload(decoded.deck_id.as_str(), decoded.card_id.as_str()).unwrap();
        assert_eq!(encoded, data);
    }
});
