//! The session state machine.
//!
//! A session moves through `PlayerCreation -> RoomDecoration -> EscapeSetup
//! -> EscapeGameplay -> {Escaped, Completed}` and never backwards. Every
//! operation validates its input completely before touching state, so a call
//! that returns an error leaves the session exactly as it was.

mod session;

use std::sync::Arc;

use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pack::{validate_pack, Card, ContentPack, Deck, DeckKind, Question, ValidationReport};
use crate::qr::PayloadError;
use crate::{AvatarId, CardId, QuestionId, StatementId};

pub use session::{AnswerOutcome, GameSession, Piles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayMode {
    /// Players shuffle the physical cards; any unseen escape card may be scanned.
    #[default]
    Companion,
    /// The engine owns the shuffle and enforces top-of-pile scans.
    Digital,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeRule {
    /// Escape as soon as every core card is uncovered.
    #[default]
    Greedy,
    /// Escape only once every pile is empty.
    EmptyPiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PlayerCreation,
    RoomDecoration,
    EscapeSetup,
    EscapeGameplay,
    Escaped,
    Completed,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PlayerCreation => "player_creation",
            Phase::RoomDecoration => "room_decoration",
            Phase::EscapeSetup => "escape_setup",
            Phase::EscapeGameplay => "escape_gameplay",
            Phase::Escaped => "escaped",
            Phase::Completed => "completed",
        }
    }

    pub fn is_finished(self) -> bool {
        matches!(self, Phase::Escaped | Phase::Completed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Other,
    Undisclosed,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Other => "other",
            Gender::Undisclosed => "undisclosed",
        }
    }
}

pub const MIN_AGE: u32 = 5;
pub const MAX_AGE: u32 = 120;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub nickname: String,
    pub age: u32,
    pub country: String,
    pub gender: Gender,
    pub ethnicity: String,
    pub education_level: String,
    /// Whether the player is currently a student; used for cross-tabulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub student: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Avatar {
    Digital {
        avatar_id: AvatarId,
    },
    /// A photographed, hand-drawn avatar card stored as an opaque blob.
    Physical {
        blob_id: String,
        media_type: String,
    },
}

/// What the companion app should show next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prompt {
    ProfileForm,
    Statement {
        statement_id: StatementId,
        text: String,
    },
    /// Physical players are building the piles.
    BoardSetup,
    PileChoice,
    Question {
        question_id: QuestionId,
    },
    /// The escape rule is met; the player may escape or keep choosing piles.
    EscapeOffer,
    FinalStory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discovery {
    pub card_id: CardId,
    pub item: String,
    pub question_id: QuestionId,
    pub prompt: String,
    pub answer: String,
}

/// The shareable end-of-game summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub avatar: Option<Avatar>,
    pub narrative: Vec<String>,
    pub discoveries: Vec<Discovery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("pack is invalid: {0}")]
    InvalidPack(ValidationReport),
    #[error("{operation} is not allowed in phase {}", phase.as_str())]
    Phase { operation: &'static str, phase: Phase },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error("unknown card {0}")]
    UnknownCard(String),
    #[error("card {card} belongs to deck {actual}, the current statement needs deck {expected}")]
    DeckMismatch { card: CardId, expected: String, actual: String },
    #[error("card {0} has already been placed")]
    CardAlreadyUsed(CardId),
    #[error("question {0} must be answered first")]
    PendingAnswer(QuestionId),
    #[error("card {0} is not on top of a pile")]
    NotOnTop(CardId),
    #[error("card {0} has already been uncovered")]
    AlreadyUncovered(CardId),
    #[error("card {0} is not part of the escape piles")]
    CardNotInPlay(CardId),
    #[error("pile {0} does not exist")]
    InvalidPile(usize),
    #[error("no question is waiting for an answer")]
    NoPendingQuestion,
    #[error("question {got} is not the pending question {expected}")]
    QuestionMismatch { expected: QuestionId, got: QuestionId },
    #[error("question {question} has no option {option}")]
    UnknownOption { question: QuestionId, option: String },
    #[error("escape condition unmet: missing {missing_items:?}, {remaining} cards remaining")]
    EscapeConditionUnmet { missing_items: Vec<String>, remaining: usize },
}

impl EngineError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::InvalidPack(_) => "INVALID_PACK",
            EngineError::Phase { .. } => "PHASE_ERROR",
            EngineError::Validation(_) => "VALIDATION_ERROR",
            EngineError::Payload(_) => "PAYLOAD_ERROR",
            EngineError::UnknownCard(_) => "UNKNOWN_CARD",
            EngineError::DeckMismatch { .. } => "DECK_MISMATCH",
            EngineError::CardAlreadyUsed(_) => "CARD_ALREADY_USED",
            EngineError::PendingAnswer(_) => "PENDING_ANSWER",
            EngineError::NotOnTop(_) => "NOT_ON_TOP",
            EngineError::AlreadyUncovered(_) => "ALREADY_UNCOVERED",
            EngineError::CardNotInPlay(_) => "CARD_NOT_IN_PLAY",
            EngineError::InvalidPile(_) => "INVALID_PILE",
            EngineError::NoPendingQuestion => "NO_PENDING_QUESTION",
            EngineError::QuestionMismatch { .. } => "QUESTION_MISMATCH",
            EngineError::UnknownOption { .. } => "UNKNOWN_OPTION",
            EngineError::EscapeConditionUnmet { .. } => "ESCAPE_CONDITION_UNMET",
        }
    }
}

/// A validated pack with lookup indexes, shared read-only by sessions.
#[derive(Debug, PartialEq, Eq)]
pub struct GamePack {
    content: ContentPack,
    /// Deck index, position in the deck and dense index over all cards.
    card_pos: FxHashMap<CardId, (usize, usize, usize)>,
    card_question: FxHashMap<CardId, Arc<Question>>,
    question_index: FxHashMap<QuestionId, usize>,
    /// Core flags by dense card index.
    core: Vec<bool>,
    statement_order: Vec<usize>,
    objects: Vec<CardId>,
    containers: Vec<CardId>,
}

impl GamePack {
    pub fn new(content: ContentPack) -> Result<Arc<Self>, EngineError> {
        let report = validate_pack(&content);
        if !report.is_valid() {
            return Err(EngineError::InvalidPack(report));
        }
        let mut card_pos = FxHashMap::default();
        let mut core = Vec::new();
        let mut objects = Vec::new();
        let mut containers = Vec::new();
        for (d, deck) in content.decks.iter().enumerate() {
            for (c, card) in deck.cards.iter().enumerate() {
                card_pos.insert(card.id.clone(), (d, c, core.len()));
                core.push(content.core_card_ids.contains(&card.id));
                match deck.kind {
                    DeckKind::Object => objects.push(card.id.clone()),
                    DeckKind::Container => containers.push(card.id.clone()),
                    DeckKind::Decoration => {}
                }
            }
        }
        let card_question = content.questions.iter().map(|q| (q.card.clone(), Arc::new(q.clone()))).collect();
        let question_index = content.questions.iter().enumerate().map(|(i, q)| (q.id.clone(), i)).collect();
        let mut statement_order: Vec<usize> = (0..content.statements.len()).collect();
        statement_order.sort_by_key(|&i| content.statements[i].order);
        Ok(Arc::new(GamePack {
            content,
            card_pos,
            card_question,
            question_index,
            core,
            statement_order,
            objects,
            containers,
        }))
    }

    pub fn content(&self) -> &ContentPack {
        &self.content
    }

    pub fn card(&self, id: &str) -> Option<&Card> {
        self.card_pos.get(id).map(|&(d, c, _)| &self.content.decks[d].cards[c])
    }

    /// The card and its dense index in `0..card_count()`.
    pub(crate) fn indexed_card(&self, id: &str) -> Option<(usize, &Card)> {
        self.card_pos.get(id).map(|&(d, c, i)| (i, &self.content.decks[d].cards[c]))
    }

    pub(crate) fn card_count(&self) -> usize {
        self.core.len()
    }

    pub(crate) fn is_core(&self, index: usize) -> bool {
        self.core[index]
    }

    pub(crate) fn core_count(&self) -> usize {
        self.core.iter().filter(|&&c| c).count()
    }

    pub fn deck_of(&self, card: &str) -> Option<&Deck> {
        self.card_pos.get(card).map(|&(d, _, _)| &self.content.decks[d])
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.question_index.get(id).map(|&i| &self.content.questions[i])
    }

    pub fn question_for_card(&self, card: &str) -> Option<&Question> {
        self.card_question.get(card).map(|q| &**q)
    }

    pub(crate) fn shared_question_for_card(&self, card: &str) -> Option<Arc<Question>> {
        self.card_question.get(card).cloned()
    }

    /// Statements in the order they are played.
    pub fn statements_in_order(&self) -> impl Iterator<Item = &crate::pack::Statement> {
        self.statement_order.iter().map(|&i| &self.content.statements[i])
    }

    pub fn object_cards(&self) -> &[CardId] {
        &self.objects
    }

    pub fn container_cards(&self) -> &[CardId] {
        &self.containers
    }
}

/// Validated packs by id and version.
#[derive(Debug, Clone, Default)]
pub struct PackRegistry {
    packs: std::collections::BTreeMap<(String, String), Arc<GamePack>>,
}

impl PackRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry holding only the shipped default pack.
    pub fn with_default() -> Self {
        let mut registry = Self::new();
        registry.insert(crate::pack::default_covid_pack()).expect("default pack is valid");
        registry
    }

    pub fn insert(&mut self, content: ContentPack) -> Result<Arc<GamePack>, EngineError> {
        let key = (content.pack_id.clone(), content.version.clone());
        let pack = GamePack::new(content)?;
        self.packs.insert(key, pack.clone());
        Ok(pack)
    }

    pub fn get(&self, pack_id: &str, version: &str) -> Option<Arc<GamePack>> {
        self.packs.get(&(pack_id.to_owned(), version.to_owned())).cloned()
    }

    /// The highest registered version of `pack_id`, comparing dotted
    /// numeric components.
    pub fn latest(&self, pack_id: &str) -> Option<Arc<GamePack>> {
        self.packs
            .iter()
            .filter(|((id, _), _)| id == pack_id)
            .max_by_key(|((_, version), _)| version_key(version))
            .map(|(_, p)| p.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<GamePack>> {
        self.packs.values()
    }
}

fn version_key(version: &str) -> Vec<(u64, &str)> {
    version.split('.').map(|part| (part.parse().unwrap_or(0), part)).collect()
}
