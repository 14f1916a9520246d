use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::game::{Avatar, EscapeRule, PlayMode, PlayerProfile};
use crate::{CardId, OptionId, QuestionId, SessionId, StatementId};

/// One append-only log record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub session_id: SessionId,
    pub seq: u64,
    pub wall_time: DateTime<Utc>,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl GameEvent {
    pub fn new(session_id: SessionId, seq: u64, wall_time: DateTime<Utc>, payload: EventPayload) -> Self {
        GameEvent { session_id, seq, wall_time, payload }
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventPayload {
    SessionCreated {
        pack_id: String,
        pack_version: String,
        mode: PlayMode,
        escape_rule: EscapeRule,
        seed: u64,
        /// Hex SHA-256 of the session capability token.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        token_digest: Option<String>,
    },
    ProfileSubmitted {
        profile: PlayerProfile,
        avatar: Avatar,
    },
    DecorationScanned {
        payload: String,
        statement_id: StatementId,
        statement_text: String,
        card_id: CardId,
        completion: String,
    },
    EscapePhaseBegun,
    PileCardScanned {
        payload: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pile_index: Option<usize>,
        card_id: CardId,
        question_id: QuestionId,
    },
    QuestionAnswered {
        question_id: QuestionId,
        option_id: OptionId,
        prompt: String,
        answer_text: String,
        item_name: String,
    },
    EscapeAttempted,
    QuestionnaireSubmitted {
        responses: Vec<QuestionnaireResponse>,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::SessionCreated { .. } => "SessionCreated",
            EventPayload::ProfileSubmitted { .. } => "ProfileSubmitted",
            EventPayload::DecorationScanned { .. } => "DecorationScanned",
            EventPayload::EscapePhaseBegun => "EscapePhaseBegun",
            EventPayload::PileCardScanned { .. } => "PileCardScanned",
            EventPayload::QuestionAnswered { .. } => "QuestionAnswered",
            EventPayload::EscapeAttempted => "EscapeAttempted",
            EventPayload::QuestionnaireSubmitted { .. } => "QuestionnaireSubmitted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub item_id: String,
    pub value: u8,
}
