#![no_main]

use libfuzzer_sys::fuzz_target;
use mle_core::analytics::{distribution, read_dataset, sus_from_dataset};
use mle_core::store::ExportFormat;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_dataset(data, ExportFormat::Csv) else {
        return;
    };
    for row in rows.iter().take(8) {
        let _ = distribution(&rows, &row.prompt_id);
    }
    let _ = sus_from_dataset(&rows);
});
