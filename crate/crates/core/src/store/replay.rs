use thiserror::Error;

use super::{apply_command, EventPayload, EventStore, GameEvent};
use crate::game::{GameSession, PackRegistry};
use crate::SessionId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("pack {pack_id} version {version} is not available")]
    PackUnavailable { pack_id: String, version: String },
    #[error("corrupt log at seq {seq}: {message}")]
    CorruptLog { seq: u64, message: String },
}

/// Rebuilds a session by folding its events through the engine.
pub fn replay_session(
    store: &EventStore,
    session_id: &SessionId,
    registry: &PackRegistry,
) -> Result<GameSession, ReplayError> {
    replay_events(session_id, &store.events_for(session_id.as_str()), registry)
}

/// Replays one session's events. Every recorded outcome must match what the
/// engine produces now, otherwise the log is reported as corrupt.
pub fn replay_events(
    session_id: &SessionId,
    events: &[GameEvent],
    registry: &PackRegistry,
) -> Result<GameSession, ReplayError> {
    let Some(first) = events.first() else {
        return Err(ReplayError::UnknownSession(session_id.clone()));
    };
    let corrupt = |seq: u64, message: String| ReplayError::CorruptLog { seq, message };
    let EventPayload::SessionCreated { pack_id, pack_version, mode, escape_rule, seed, .. } = &first.payload else {
        return Err(corrupt(first.seq, format!("log starts with {}", first.kind())));
    };
    let pack = registry
        .get(pack_id, pack_version)
        .ok_or_else(|| ReplayError::PackUnavailable { pack_id: pack_id.clone(), version: pack_version.clone() })?;
    let mut session = GameSession::new(session_id.clone(), pack, *mode, *escape_rule, *seed);

    for (i, event) in events.iter().enumerate() {
        let expected = i as u64 + 1;
        if event.seq != expected {
            return Err(corrupt(event.seq, format!("expected seq {expected}")));
        }
        if &event.session_id != session_id {
            return Err(corrupt(event.seq, format!("event belongs to {}", event.session_id)));
        }
        if i == 0 {
            continue;
        }
        match &event.payload {
            EventPayload::SessionCreated { .. } => {
                return Err(corrupt(event.seq, "session created twice".into()));
            }
            EventPayload::QuestionnaireSubmitted { .. } => {
                if !session.phase().is_finished() {
                    return Err(corrupt(event.seq, "questionnaire before the game ended".into()));
                }
            }
            recorded => {
                let command = recorded.command().expect("every other event records a command");
                let (_, produced) =
                    apply_command(&mut session, &command).map_err(|e| corrupt(event.seq, e.to_string()))?;
                if &produced != recorded {
                    return Err(corrupt(event.seq, "recorded outcome differs from replay".into()));
                }
            }
        }
    }
    Ok(session)
}
