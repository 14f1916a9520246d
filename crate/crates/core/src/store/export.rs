use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};

use super::{EventPayload, EventStore, GameEvent, StoreError};
use crate::analytics::find_item;
use crate::game::PlayerProfile;
use crate::pack::PLACEHOLDER;

pub const PHASE_DECORATION: &str = "room_decoration";
pub const PHASE_ESCAPE: &str = "escape_gameplay";
pub const PHASE_QUESTIONNAIRE: &str = "questionnaire";

/// One response in the anonymized dataset. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub session_id: String,
    pub age: Option<u32>,
    pub country: String,
    pub gender: String,
    pub ethnicity: String,
    pub education_level: String,
    pub student_status: String,
    pub prompt_id: String,
    pub prompt_text: String,
    pub response_id: String,
    pub response_text: String,
    pub phase: String,
    pub timestamp: String,
}

pub const COLUMNS: [&str; 13] = [
    "session_id",
    "age",
    "country",
    "gender",
    "ethnicity",
    "education_level",
    "student_status",
    "prompt_id",
    "prompt_text",
    "response_id",
    "response_text",
    "phase",
    "timestamp",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Jsonl,
}

impl ExportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ExportFormat::Csv => "export.csv",
            ExportFormat::Jsonl => "export.jsonl",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Csv => "text/csv; charset=utf-8",
            ExportFormat::Jsonl => "application/x-ndjson",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "jsonl" => Ok(ExportFormat::Jsonl),
            _ => Err(StoreError::UnsupportedFormat(s.to_owned())),
        }
    }
}

pub fn student_status(student: Option<bool>) -> &'static str {
    match student {
        Some(true) => "student",
        Some(false) => "non_student",
        None => "unknown",
    }
}

#[derive(Default)]
struct Demographics<'a> {
    profile: Option<&'a PlayerProfile>,
}

impl Demographics<'_> {
    fn row(
        &self,
        event: &GameEvent,
        prompt_id: &str,
        prompt_text: &str,
        response_id: &str,
        response_text: &str,
        phase: &str,
    ) -> DatasetRow {
        let p = self.profile;
        DatasetRow {
            session_id: event.session_id.to_string(),
            age: p.map(|p| p.age),
            country: p.map(|p| p.country.clone()).unwrap_or_default(),
            gender: p.map(|p| p.gender.as_str().to_owned()).unwrap_or_default(),
            ethnicity: p.map(|p| p.ethnicity.clone()).unwrap_or_default(),
            education_level: p.map(|p| p.education_level.clone()).unwrap_or_default(),
            student_status: student_status(p.and_then(|p| p.student)).to_owned(),
            prompt_id: prompt_id.to_owned(),
            prompt_text: prompt_text.to_owned(),
            response_id: response_id.to_owned(),
            response_text: response_text.to_owned(),
            phase: phase.to_owned(),
            timestamp: event.wall_time.to_rfc3339_opts(SecondsFormat::Millis, true),
        }
    }
}

/// Flattens events into dataset rows, sessions ordered by id and events by
/// log order. Nicknames are never exported.
pub fn dataset_rows(events: &[GameEvent]) -> Vec<DatasetRow> {
    let mut sessions: BTreeMap<&str, Vec<&GameEvent>> = BTreeMap::new();
    for event in events {
        sessions.entry(event.session_id.as_str()).or_default().push(event);
    }
    let mut rows = Vec::new();
    for events in sessions.values() {
        let mut demo = Demographics::default();
        for event in events {
            match &event.payload {
                EventPayload::ProfileSubmitted { profile, .. } => demo.profile = Some(profile),
                EventPayload::DecorationScanned { statement_id, statement_text, card_id, completion, .. } => {
                    rows.push(demo.row(
                        event,
                        statement_id.as_str(),
                        &statement_text.replace(PLACEHOLDER, "..."),
                        card_id.as_str(),
                        completion,
                        PHASE_DECORATION,
                    ))
                }
                EventPayload::QuestionAnswered { question_id, option_id, prompt, answer_text, .. } => rows
                    .push(demo.row(event, question_id.as_str(), prompt, option_id.as_str(), answer_text, PHASE_ESCAPE)),
                EventPayload::QuestionnaireSubmitted { responses } => {
                    for r in responses {
                        let text = find_item(&r.item_id).map_or("", |(_, item)| item.text);
                        let value = r.value.to_string();
                        rows.push(demo.row(event, &r.item_id, text, &value, &value, PHASE_QUESTIONNAIRE));
                    }
                }
                _ => {}
            }
        }
    }
    rows
}

pub fn write_rows(rows: &[DatasetRow], format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .has_headers(false)
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            writer.write_record(COLUMNS).expect("writing to memory");
            for row in rows {
                writer.serialize(row).expect("writing to memory");
            }
            writer.into_inner().expect("writing to memory")
        }
        ExportFormat::Jsonl => {
            let mut out = Vec::new();
            for row in rows {
                serde_json::to_writer(&mut out, row).expect("rows serialize");
                out.push(b'\n');
            }
            out
        }
    }
}

pub fn export_dataset(store: &EventStore, format: ExportFormat) -> Vec<u8> {
    write_rows(&dataset_rows(&store.all_events()), format)
}
