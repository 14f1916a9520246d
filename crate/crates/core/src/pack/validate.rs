use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ContentPack, DeckKind, PLACEHOLDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateId,
    InvalidId,
    EmptyDeck,
    CardDeckMismatch,
    CardTextKindMismatch,
    StatementUnknownDeck,
    StatementNotDecoration,
    StatementPlaceholder,
    StatementUnknownSlot,
    DuplicateStatementOrder,
    QuestionUnknownCard,
    QuestionCardKind,
    QuestionTooFewOptions,
    DuplicateOptionId,
    CardMissingQuestion,
    CardMultipleQuestions,
    CoreEmpty,
    CoreUnknown,
    CoreNotObject,
    SlotUnknownDeck,
    SlotNotDecoration,
    SlotStatementMismatch,
    SlotDeckMismatch,
    SlotOrderMismatch,
    DeckTooSmallForSlots,
    NoObjectDeck,
    ContainersTooFew,
    PileCountZero,
    PileSlotsMismatch,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            DuplicateId => "DUPLICATE_ID",
            InvalidId => "INVALID_ID",
            EmptyDeck => "EMPTY_DECK",
            CardDeckMismatch => "CARD_DECK_MISMATCH",
            CardTextKindMismatch => "CARD_TEXT_KIND_MISMATCH",
            StatementUnknownDeck => "STATEMENT_UNKNOWN_DECK",
            StatementNotDecoration => "STATEMENT_NOT_DECORATION",
            StatementPlaceholder => "STATEMENT_PLACEHOLDER",
            StatementUnknownSlot => "STATEMENT_UNKNOWN_SLOT",
            DuplicateStatementOrder => "DUPLICATE_STATEMENT_ORDER",
            QuestionUnknownCard => "QUESTION_UNKNOWN_CARD",
            QuestionCardKind => "QUESTION_CARD_KIND",
            QuestionTooFewOptions => "QUESTION_TOO_FEW_OPTIONS",
            DuplicateOptionId => "DUPLICATE_OPTION_ID",
            CardMissingQuestion => "CARD_MISSING_QUESTION",
            CardMultipleQuestions => "CARD_MULTIPLE_QUESTIONS",
            CoreEmpty => "CORE_EMPTY",
            CoreUnknown => "CORE_UNKNOWN",
            CoreNotObject => "CORE_NOT_OBJECT",
            SlotUnknownDeck => "SLOT_UNKNOWN_DECK",
            SlotNotDecoration => "SLOT_NOT_DECORATION",
            SlotStatementMismatch => "SLOT_STATEMENT_MISMATCH",
            SlotDeckMismatch => "SLOT_DECK_MISMATCH",
            SlotOrderMismatch => "SLOT_ORDER_MISMATCH",
            DeckTooSmallForSlots => "DECK_TOO_SMALL_FOR_SLOTS",
            NoObjectDeck => "NO_OBJECT_DECK",
            ContainersTooFew => "CONTAINERS_TOO_FEW",
            PileCountZero => "PILE_COUNT_ZERO",
            PileSlotsMismatch => "PILE_SLOTS_MISMATCH",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, message: impl Into<String>) {
        self.violations.push(Violation { code, message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

fn bad_id(id: &str) -> bool {
    id.is_empty() || id.contains('|')
}

/// Checks every structural invariant of a pack. Never fails; an empty report
/// means the pack is playable.
pub fn validate_pack(pack: &ContentPack) -> ValidationReport {
    use ViolationCode::*;
    let mut r = ValidationReport::default();

    let mut deck_kinds: HashMap<&str, DeckKind> = HashMap::new();
    for deck in &pack.decks {
        if deck_kinds.insert(deck.id.as_str(), deck.kind).is_some() {
            r.push(DuplicateId, format!("deck {} defined twice", deck.id));
        }
        if bad_id(deck.id.as_str()) {
            r.push(InvalidId, format!("deck id {:?} is empty or contains '|'", deck.id.as_str()));
        }
        if deck.cards.is_empty() {
            r.push(EmptyDeck, format!("deck {} has no cards", deck.id));
        }
    }

    // card id -> kind of the deck that holds it
    let mut card_kinds: HashMap<&str, DeckKind> = HashMap::new();
    for deck in &pack.decks {
        for card in &deck.cards {
            if card_kinds.insert(card.id.as_str(), deck.kind).is_some() {
                r.push(DuplicateId, format!("card {} defined twice", card.id));
            }
            if bad_id(card.id.as_str()) {
                r.push(InvalidId, format!("card id {:?} is empty or contains '|'", card.id.as_str()));
            }
            if card.deck != deck.id {
                r.push(CardDeckMismatch, format!("card {} lists deck {} but sits in {}", card.id, card.deck, deck.id));
            }
            let text_ok = match deck.kind {
                DeckKind::Decoration => card.completion.is_some() && card.item.is_none(),
                DeckKind::Object | DeckKind::Container => card.item.is_some() && card.completion.is_none(),
            };
            if !text_ok {
                r.push(
                    CardTextKindMismatch,
                    format!("card {} must carry exactly the text its deck kind requires", card.id),
                );
            }
        }
    }

    let mut orders = HashSet::new();
    let mut statement_ids = HashSet::new();
    for s in &pack.statements {
        if !statement_ids.insert(s.id.as_str()) {
            r.push(DuplicateId, format!("statement {} defined twice", s.id));
        }
        match deck_kinds.get(s.deck.as_str()) {
            None => r.push(StatementUnknownDeck, format!("statement {} uses unknown deck {}", s.id, s.deck)),
            Some(DeckKind::Decoration) => {}
            Some(_) => {
                r.push(StatementNotDecoration, format!("statement {} uses non-decoration deck {}", s.id, s.deck))
            }
        }
        if s.text.matches(PLACEHOLDER).count() != 1 {
            r.push(StatementPlaceholder, format!("statement {} must contain exactly one {PLACEHOLDER}", s.id));
        }
        if !orders.insert(s.order) {
            r.push(DuplicateStatementOrder, format!("order index {} used twice", s.order));
        }
    }

    let mut question_ids = HashSet::new();
    let mut questions_per_card: HashMap<&str, usize> = HashMap::new();
    for q in &pack.questions {
        if !question_ids.insert(q.id.as_str()) {
            r.push(DuplicateId, format!("question {} defined twice", q.id));
        }
        *questions_per_card.entry(q.card.as_str()).or_default() += 1;
        match card_kinds.get(q.card.as_str()) {
            None => r.push(QuestionUnknownCard, format!("question {} bound to unknown card {}", q.id, q.card)),
            Some(DeckKind::Decoration) if !pack.recycle_decoration_cards => {
                r.push(QuestionCardKind, format!("question {} bound to decoration card {}", q.id, q.card))
            }
            Some(_) => {}
        }
        if q.options.len() < 2 {
            r.push(QuestionTooFewOptions, format!("question {} needs at least two options", q.id));
        }
        let mut option_ids = HashSet::new();
        for o in &q.options {
            if !option_ids.insert(o.id.as_str()) {
                r.push(DuplicateOptionId, format!("question {} repeats option {}", q.id, o.id));
            }
        }
    }

    for deck in &pack.decks {
        let needs_question = deck.kind != DeckKind::Decoration || pack.recycle_decoration_cards;
        for card in &deck.cards {
            match questions_per_card.get(card.id.as_str()).copied().unwrap_or(0) {
                0 if needs_question => r.push(CardMissingQuestion, format!("card {} has no question", card.id)),
                0 | 1 => {}
                n => r.push(CardMultipleQuestions, format!("card {} has {n} questions", card.id)),
            }
        }
    }

    if pack.core_card_ids.is_empty() {
        r.push(CoreEmpty, "at least one core card is required");
    }
    for core in &pack.core_card_ids {
        match card_kinds.get(core.as_str()) {
            None => r.push(CoreUnknown, format!("core card {core} does not exist")),
            Some(DeckKind::Object) => {}
            Some(_) => r.push(CoreNotObject, format!("core card {core} is not an object card")),
        }
    }

    let slots = &pack.board.decoration_slots;
    let mut slot_ids = HashSet::new();
    let mut slots_per_deck: HashMap<&str, usize> = HashMap::new();
    for slot in slots {
        if !slot_ids.insert(slot.id.as_str()) {
            r.push(DuplicateId, format!("slot {} defined twice", slot.id));
        }
        *slots_per_deck.entry(slot.deck.as_str()).or_default() += 1;
        match deck_kinds.get(slot.deck.as_str()) {
            None => r.push(SlotUnknownDeck, format!("slot {} uses unknown deck {}", slot.id, slot.deck)),
            Some(DeckKind::Decoration) => {}
            Some(_) => r.push(SlotNotDecoration, format!("slot {} uses non-decoration deck", slot.id)),
        }
    }
    if slots.len() != pack.statements.len() {
        r.push(
            SlotStatementMismatch,
            format!("{} statements for {} decoration slots", pack.statements.len(), slots.len()),
        );
    }
    let mut claimed: HashMap<&str, &str> = HashMap::new();
    for s in &pack.statements {
        match slots.iter().find(|slot| slot.id == s.slot) {
            None => r.push(StatementUnknownSlot, format!("statement {} uses unknown slot {}", s.id, s.slot)),
            Some(slot) => {
                if slot.deck != s.deck {
                    r.push(
                        SlotDeckMismatch,
                        format!("statement {} (deck {}) bound to slot {} of deck {}", s.id, s.deck, slot.id, slot.deck),
                    );
                }
                if let Some(other) = claimed.insert(slot.id.as_str(), s.id.as_str()) {
                    r.push(
                        SlotStatementMismatch,
                        format!("slot {} claimed by statements {other} and {}", slot.id, s.id),
                    );
                }
            }
        }
    }
    // Scans fill the lowest empty slot of the deck, so statements of a
    // multi-slot deck must visit its slots in board order.
    for deck in pack.decks_of_kind(DeckKind::Decoration) {
        let mut by_order: Vec<_> = pack.statements.iter().filter(|s| s.deck == deck.id).collect();
        by_order.sort_by_key(|s| s.order);
        let statement_slots: Vec<&str> = by_order.iter().map(|s| s.slot.as_str()).collect();
        let board_slots: Vec<&str> = slots.iter().filter(|s| s.deck == deck.id).map(|s| s.id.as_str()).collect();
        if statement_slots.len() == board_slots.len() && statement_slots != board_slots {
            r.push(SlotOrderMismatch, format!("statements of deck {} do not follow its slot order", deck.id));
        }
        let needed = slots_per_deck.get(deck.id.as_str()).copied().unwrap_or(0);
        if needed > deck.cards.len() {
            r.push(DeckTooSmallForSlots, format!("deck {} has {} cards for {needed} slots", deck.id, deck.cards.len()));
        }
    }

    if pack.decks_of_kind(DeckKind::Object).next().is_none() {
        r.push(NoObjectDeck, "pack has no object deck");
    }
    let containers: usize = pack.decks_of_kind(DeckKind::Container).map(|d| d.cards.len()).sum();
    if pack.pile_count == 0 {
        r.push(PileCountZero, "pile_count must be positive");
    } else if containers < pack.pile_count as usize {
        r.push(ContainersTooFew, format!("{containers} container cards cannot top {} piles", pack.pile_count));
    }
    if pack.board.pile_slots != pack.pile_count {
        r.push(
            PileSlotsMismatch,
            format!("board has {} pile slots but pile_count is {}", pack.board.pile_slots, pack.pile_count),
        );
    }

    for a in &pack.avatars {
        if pack.avatars.iter().filter(|b| b.id == a.id).count() > 1 {
            r.push(DuplicateId, format!("avatar {} defined twice", a.id));
        }
    }

    r
}
