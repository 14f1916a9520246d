use std::collections::BTreeMap;

use mle_core::game::{EscapeRule, GameSession, Piles, PlayMode, Prompt, Story};
use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AvatarView {
    pub avatar_id: String,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OptionView {
    pub option_id: String,
    pub text: String,
}

/// The engine prompt, with the text a client needs to render it.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PromptView {
    ProfileForm { avatars: Vec<AvatarView> },
    Statement { statement_id: String, text: String, deck: String },
    BoardSetup,
    PileChoice,
    Question { question_id: String, card_id: String, prompt: String, options: Vec<OptionView> },
    EscapeOffer,
    FinalStory,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct UncoveredView {
    pub card_id: String,
    pub item: Option<String>,
    pub symbol: String,
}

/// `GET /state` body. Mutating routes return the same shape, plus the
/// fragment or item the mutation produced.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StateView {
    pub session_id: String,
    pub pack_id: String,
    pub pack_version: String,
    pub mode: PlayMode,
    pub escape_rule: EscapeRule,
    pub phase: &'static str,
    pub prompt: PromptView,
    pub story_so_far: Vec<String>,
    /// Decoration card placed in each board slot.
    pub slot_fills: BTreeMap<String, String>,
    pub uncovered: Vec<UncoveredView>,
    pub can_escape: bool,
    /// Cards left in each pile (Digital mode) or in play (Companion mode).
    pub remaining: Vec<usize>,
    /// Top card of each pile in Digital mode, which the player pulls next.
    pub pile_tops: Vec<Option<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub story: Option<Story>,
    pub questionnaire_submitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fragment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discovered: Option<String>,
}

fn prompt_view(session: &GameSession) -> PromptView {
    let pack = session.pack();
    match session.current_prompt() {
        Prompt::ProfileForm => PromptView::ProfileForm {
            avatars: pack
                .content()
                .avatars
                .iter()
                .map(|a| AvatarView { avatar_id: a.id.to_string(), name: a.name.clone() })
                .collect(),
        },
        Prompt::Statement { statement_id, text } => PromptView::Statement {
            deck: session.active_statement().map(|s| s.deck.to_string()).unwrap_or_default(),
            statement_id: statement_id.to_string(),
            text,
        },
        Prompt::BoardSetup => PromptView::BoardSetup,
        Prompt::PileChoice => PromptView::PileChoice,
        Prompt::Question { question_id } => {
            let question = pack.question(question_id.as_str()).expect("pending question exists in pack");
            PromptView::Question {
                question_id: question_id.to_string(),
                card_id: question.card.to_string(),
                prompt: question.prompt.clone(),
                options: question
                    .options
                    .iter()
                    .map(|o| OptionView { option_id: o.id.to_string(), text: o.text.clone() })
                    .collect(),
            }
        }
        Prompt::EscapeOffer => PromptView::EscapeOffer,
        Prompt::FinalStory => PromptView::FinalStory,
    }
}

pub fn state_view(session: &GameSession, questionnaire_submitted: bool) -> StateView {
    let pack = session.pack();
    let remaining = match session.piles() {
        Piles::NotDealt => Vec::new(),
        Piles::Ordered(piles) => piles.iter().map(Vec::len).collect(),
        Piles::Unordered(cards) => vec![cards.len()],
    };
    StateView {
        session_id: session.id().to_string(),
        pack_id: pack.content().pack_id.clone(),
        pack_version: pack.content().version.clone(),
        mode: session.mode(),
        escape_rule: session.escape_rule(),
        phase: session.phase().as_str(),
        prompt: prompt_view(session),
        story_so_far: session.story_so_far(),
        slot_fills: session.slot_fills().iter().map(|(s, c)| (s.to_string(), c.to_string())).collect(),
        uncovered: session
            .uncovered()
            .iter()
            .map(|id| {
                let card = pack.card(id.as_str());
                UncoveredView {
                    card_id: id.to_string(),
                    item: card.and_then(|c| c.item.clone()),
                    symbol: card.map(|c| c.symbol.clone()).unwrap_or_default(),
                }
            })
            .collect(),
        can_escape: session.can_escape(),
        remaining,
        pile_tops: session.pile_tops().into_iter().map(|c| c.map(ToString::to_string)).collect(),
        story: session.generate_story().ok(),
        questionnaire_submitted,
        fragment: None,
        discovered: None,
    }
}
