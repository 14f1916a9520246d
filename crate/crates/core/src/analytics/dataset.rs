use std::path::Path;

use super::AnalyticsError;
use crate::store::{DatasetRow, ExportFormat, COLUMNS};

/// Guesses the export format from a file extension.
pub fn detect_format(path: &Path) -> Option<ExportFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(ExportFormat::Csv),
        "jsonl" | "ndjson" => Some(ExportFormat::Jsonl),
        _ => None,
    }
}

/// Parses an exported dataset. The CSV header must list the export columns
/// in order.
pub fn read_dataset(bytes: &[u8], format: ExportFormat) -> Result<Vec<DatasetRow>, AnalyticsError> {
    match format {
        ExportFormat::Csv => read_csv(bytes),
        ExportFormat::Jsonl => read_jsonl(bytes),
    }
}

fn read_csv(bytes: &[u8]) -> Result<Vec<DatasetRow>, AnalyticsError> {
    let parse_error =
        |record: usize, e: &dyn std::fmt::Display| AnalyticsError::Parse { record, message: e.to_string() };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| parse_error(0, &e))?;
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    if headers.iter().ne(COLUMNS) {
        return Err(AnalyticsError::Parse {
            record: 0,
            message: format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    reader.deserialize().enumerate().map(|(i, row)| row.map_err(|e| parse_error(i + 1, &e))).collect()
}

fn read_jsonl(bytes: &[u8]) -> Result<Vec<DatasetRow>, AnalyticsError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AnalyticsError::Parse { record: 0, message: e.to_string() })?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| AnalyticsError::Parse { record: i + 1, message: e.to_string() })
        })
        .collect()
}
