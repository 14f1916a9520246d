#![no_main]

use libfuzzer_sys::fuzz_target;
use mle_core::game::GamePack;
use mle_core::pack::{parse_content_pack, validate_pack};

fuzz_target!(|data: &str| {
    let Ok(pack) = parse_content_pack(data) else {
        return;
    };
    let report = validate_pack(&pack);
    // Only validated packs may back a game.
    assert_eq!(report.is_valid(), GamePack::new(pack).is_ok());
});
