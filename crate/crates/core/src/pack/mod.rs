//! Declarative game content: decks, cards, statements, questions and the
//! board layout.
//!
//! A pack is authored as a single JSON document (see `docs/pack-schema.json`).
//! [`ContentPack::from_json`] parses it and resolves every cross-reference;
//! [`validate_pack`] then checks the structural invariants the engine relies
//! on and reports every violation as data.

mod default;
mod validate;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{AvatarId, CardId, DeckId, OptionId, QuestionId, SlotId, StatementId};

pub use default::default_covid_pack;
pub use validate::{validate_pack, ValidationReport, Violation, ViolationCode};

/// Token replaced by the chosen card's completion text.
pub const PLACEHOLDER: &str = "{completion}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentPack {
    pub pack_id: String,
    pub version: String,
    pub decks: Vec<Deck>,
    pub statements: Vec<Statement>,
    pub questions: Vec<Question>,
    pub board: BoardLayout,
    pub core_card_ids: BTreeSet<CardId>,
    #[serde(default)]
    pub avatars: Vec<AvatarDescriptor>,
    #[serde(default = "default_pile_count")]
    pub pile_count: u32,
    /// When set, placed decoration cards join the object pool at escape setup.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub recycle_decoration_cards: bool,
}

fn default_pile_count() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeckKind {
    Decoration,
    Object,
    Container,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deck {
    pub id: DeckId,
    pub name: String,
    pub colour: String,
    pub kind: DeckKind,
    pub cards: Vec<Card>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Card {
    pub id: CardId,
    pub deck: DeckId,
    /// Label of the icon printed on the card front.
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<String>,
}

impl Card {
    /// Human-readable label: the item name, or the completion for decoration cards.
    pub fn label(&self) -> &str {
        self.item.as_deref().or(self.completion.as_deref()).unwrap_or(&self.symbol)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Statement {
    pub id: StatementId,
    pub order: u32,
    pub text: String,
    pub deck: DeckId,
    pub slot: SlotId,
}

impl Statement {
    pub fn complete(&self, completion: &str) -> String {
        self.text.replacen(PLACEHOLDER, completion, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: QuestionId,
    pub card: CardId,
    pub prompt: String,
    pub options: Vec<AnswerOption>,
}

impl Question {
    pub fn option(&self, id: &str) -> Option<&AnswerOption> {
        self.options.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerOption {
    pub id: OptionId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardLayout {
    pub decoration_slots: Vec<Slot>,
    #[serde(default = "yes")]
    pub avatar_slot: bool,
    pub pile_slots: u32,
    #[serde(default = "yes")]
    pub uncovered_slot: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    pub id: SlotId,
    pub deck: DeckId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvatarDescriptor {
    pub id: AvatarId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{from} references unknown {kind} {id:?}")]
    Reference { from: String, kind: &'static str, id: String },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
}

/// Parses a pack document and resolves its cross-references.
pub fn parse_content_pack(source: &str) -> Result<ContentPack, PackError> {
    ContentPack::from_json(source)
}

impl ContentPack {
    pub fn from_json(source: &str) -> Result<Self, PackError> {
        let pack: ContentPack = serde_json::from_str(source).map_err(|e| PackError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        pack.resolve()?;
        Ok(pack)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("pack serialization is infallible")
    }

    pub fn deck(&self, id: &str) -> Option<&Deck> {
        self.decks.iter().find(|d| d.id == id)
    }

    pub fn card(&self, id: &str) -> Option<&Card> {
        self.cards().find(|c| c.id == id)
    }

    pub fn cards(&self) -> impl Iterator<Item = &Card> {
        self.decks.iter().flat_map(|d| d.cards.iter())
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn question_for_card(&self, card: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.card == card)
    }

    pub fn decks_of_kind(&self, kind: DeckKind) -> impl Iterator<Item = &Deck> {
        self.decks.iter().filter(move |d| d.kind == kind)
    }

    fn resolve(&self) -> Result<(), PackError> {
        fn unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<HashSet<&'a str>, PackError> {
            let mut seen = HashSet::new();
            for id in ids {
                if !seen.insert(id) {
                    return Err(PackError::DuplicateId { kind, id: id.to_owned() });
                }
            }
            Ok(seen)
        }

        let decks = unique("deck", self.decks.iter().map(|d| d.id.as_str()))?;
        let cards = unique("card", self.cards().map(|c| c.id.as_str()))?;
        unique("statement", self.statements.iter().map(|s| s.id.as_str()))?;
        unique("question", self.questions.iter().map(|q| q.id.as_str()))?;
        let slots = unique("slot", self.board.decoration_slots.iter().map(|s| s.id.as_str()))?;
        unique("avatar", self.avatars.iter().map(|a| a.id.as_str()))?;
        for q in &self.questions {
            unique("option", q.options.iter().map(|o| o.id.as_str()))?;
        }

        let missing =
            |from: String, kind: &'static str, id: &str| PackError::Reference { from, kind, id: id.to_owned() };
        for card in self.cards() {
            if !decks.contains(card.deck.as_str()) {
                return Err(missing(format!("card {}", card.id), "deck", card.deck.as_str()));
            }
        }
        for s in &self.statements {
            if !decks.contains(s.deck.as_str()) {
                return Err(missing(format!("statement {}", s.id), "deck", s.deck.as_str()));
            }
            if !slots.contains(s.slot.as_str()) {
                return Err(missing(format!("statement {}", s.id), "slot", s.slot.as_str()));
            }
        }
        for q in &self.questions {
            if !cards.contains(q.card.as_str()) {
                return Err(missing(format!("question {}", q.id), "card", q.card.as_str()));
            }
        }
        for slot in &self.board.decoration_slots {
            if !decks.contains(slot.deck.as_str()) {
                return Err(missing(format!("slot {}", slot.id), "deck", slot.deck.as_str()));
            }
        }
        for core in &self.core_card_ids {
            if !cards.contains(core.as_str()) {
                return Err(missing("core_card_ids".into(), "card", core.as_str()));
            }
        }
        Ok(())
    }
}
