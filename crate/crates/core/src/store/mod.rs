//! Event-sourced persistence: the append-only log, replay, dataset export
//! and avatar blobs.

mod blob;
mod command;
mod event;
mod export;
mod log;
mod replay;

use std::io;

use thiserror::Error;

use crate::SessionId;

pub use blob::BlobStore;
pub use command::{apply_command, Command, Outcome};
pub use event::{EventPayload, GameEvent, QuestionnaireResponse};
pub use export::{
    dataset_rows, export_dataset, student_status, write_rows, DatasetRow, ExportFormat, COLUMNS, PHASE_DECORATION,
    PHASE_ESCAPE, PHASE_QUESTIONNAIRE,
};
pub use log::{decode_records, encode_record, DecodedLog, EventStore, InjectedFault, LOG_FILE, MAX_RECORD_LEN};
pub use replay::{replay_events, replay_session, ReplayError};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("sequence conflict on session {session_id}: expected seq {expected}, got {got}")]
    SequenceConflict { session_id: SessionId, expected: u64, got: u64 },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("corrupt log at byte {offset}: {message}")]
    Corrupt { offset: u64, message: String },
    #[error("unsupported export format {0:?}")]
    UnsupportedFormat(String),
    #[error("storage error: {0}")]
    Storage(#[from] io::Error),
}
