use serde::{Deserialize, Serialize};

use super::EventPayload;
use crate::game::{AnswerOutcome, Avatar, EngineError, GameSession, PlayerProfile};
use crate::pack::Question;
use crate::qr::decode_payload;
use crate::{OptionId, QuestionId};

/// A player action, in the shape it is logged and replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    SubmitProfile { profile: PlayerProfile, avatar: Avatar },
    ScanDecoration { payload: String },
    BeginEscapePhase,
    ScanPileCard { payload: String, pile_index: Option<usize> },
    AnswerQuestion { question_id: QuestionId, option_id: OptionId },
    AttemptEscape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    ProfileAccepted,
    Fragment(String),
    EscapePhaseBegun,
    Question(Question),
    Answered(AnswerOutcome),
    Escaped,
}

/// Runs `command` against `session` and returns the event that records it.
/// On error the session is unchanged and nothing should be logged.
pub fn apply_command(session: &mut GameSession, command: &Command) -> Result<(Outcome, EventPayload), EngineError> {
    match command {
        Command::SubmitProfile { profile, avatar } => {
            session.submit_profile_and_avatar(profile.clone(), avatar.clone())?;
            Ok((
                Outcome::ProfileAccepted,
                EventPayload::ProfileSubmitted { profile: profile.clone(), avatar: avatar.clone() },
            ))
        }
        Command::ScanDecoration { payload } => {
            let statement = session.active_statement().cloned();
            let fragment = session.scan_decoration(payload)?;
            let statement = statement.expect("a successful scan had an active statement");
            let card_id = decode_payload(payload)?.card_id;
            let completion =
                session.pack().card(card_id.as_str()).and_then(|c| c.completion.clone()).unwrap_or_default();
            Ok((
                Outcome::Fragment(fragment),
                EventPayload::DecorationScanned {
                    payload: payload.clone(),
                    statement_id: statement.id,
                    statement_text: statement.text,
                    card_id,
                    completion,
                },
            ))
        }
        Command::BeginEscapePhase => {
            session.begin_escape_phase()?;
            Ok((Outcome::EscapePhaseBegun, EventPayload::EscapePhaseBegun))
        }
        Command::ScanPileCard { payload, pile_index } => {
            let question = session.scan_pile_card(payload, *pile_index)?;
            Ok((
                Outcome::Question((*question).clone()),
                EventPayload::PileCardScanned {
                    payload: payload.clone(),
                    pile_index: *pile_index,
                    card_id: question.card.clone(),
                    question_id: question.id.clone(),
                },
            ))
        }
        Command::AnswerQuestion { question_id, option_id } => {
            let answer = session.answer_question(question_id.as_str(), option_id.as_str())?;
            let question = session.pack().question(question_id.as_str()).expect("answered question exists");
            let answer_text = question.option(option_id.as_str()).map(|o| o.text.clone()).unwrap_or_default();
            let payload = EventPayload::QuestionAnswered {
                question_id: question_id.clone(),
                option_id: option_id.clone(),
                prompt: question.prompt.clone(),
                answer_text,
                item_name: answer.item.clone(),
            };
            Ok((Outcome::Answered(answer), payload))
        }
        Command::AttemptEscape => {
            session.attempt_escape()?;
            Ok((Outcome::Escaped, EventPayload::EscapeAttempted))
        }
    }
}

impl EventPayload {
    /// The engine command this event records, if it records one.
    pub fn command(&self) -> Option<Command> {
        Some(match self {
            EventPayload::ProfileSubmitted { profile, avatar } => {
                Command::SubmitProfile { profile: profile.clone(), avatar: avatar.clone() }
            }
            EventPayload::DecorationScanned { payload, .. } => Command::ScanDecoration { payload: payload.clone() },
            EventPayload::EscapePhaseBegun => Command::BeginEscapePhase,
            EventPayload::PileCardScanned { payload, pile_index, .. } => {
                Command::ScanPileCard { payload: payload.clone(), pile_index: *pile_index }
            }
            EventPayload::QuestionAnswered { question_id, option_id, .. } => {
                Command::AnswerQuestion { question_id: question_id.clone(), option_id: option_id.clone() }
            }
            EventPayload::EscapeAttempted => Command::AttemptEscape,
            EventPayload::SessionCreated { .. } | EventPayload::QuestionnaireSubmitted { .. } => return None,
        })
    }
}
