use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    Avatar, Discovery, EngineError, EscapeRule, GamePack, Phase, PlayMode, PlayerProfile, Prompt, Story, MAX_AGE,
    MIN_AGE,
};
use crate::pack::{Card, Question, Statement};
use crate::qr::split_payload;
use crate::{CardId, OptionId, QuestionId, SessionId, SlotId};

/// State of the escape piles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piles {
    NotDealt,
    /// Digital mode: each pile lists its cards bottom to top.
    Ordered(Vec<Vec<CardId>>),
    /// Companion mode: the engine only knows which cards are still hidden.
    Unordered(BTreeSet<CardId>),
}

impl Piles {
    pub fn remaining(&self) -> usize {
        match self {
            Piles::NotDealt => 0,
            Piles::Ordered(piles) => piles.iter().map(Vec::len).sum(),
            Piles::Unordered(set) => set.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerOutcome {
    pub card_id: CardId,
    pub item: String,
    pub can_escape: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSession {
    id: SessionId,
    pack: Arc<GamePack>,
    mode: PlayMode,
    escape_rule: EscapeRule,
    rng_seed: u64,
    phase: Phase,
    profile: Option<PlayerProfile>,
    avatar: Option<Avatar>,
    slot_fills: BTreeMap<SlotId, CardId>,
    used_cards: BTreeSet<CardId>,
    next_statement: usize,
    piles: Piles,
    in_play: BTreeSet<CardId>,
    pending: Option<(QuestionId, CardId)>,
    uncovered: Vec<CardId>,
    /// Uncovered flags by dense card index.
    found: Vec<bool>,
    cores_left: usize,
    answers: BTreeMap<QuestionId, OptionId>,
}

impl GameSession {
    pub fn new(id: SessionId, pack: Arc<GamePack>, mode: PlayMode, escape_rule: EscapeRule, rng_seed: u64) -> Self {
        let (found, cores_left) = (vec![false; pack.card_count()], pack.core_count());
        GameSession {
            id,
            pack,
            mode,
            escape_rule,
            rng_seed,
            phase: Phase::PlayerCreation,
            profile: None,
            avatar: None,
            slot_fills: BTreeMap::new(),
            used_cards: BTreeSet::new(),
            next_statement: 0,
            piles: Piles::NotDealt,
            in_play: BTreeSet::new(),
            pending: None,
            uncovered: Vec::new(),
            found,
            cores_left,
            answers: BTreeMap::new(),
        }
    }

    /// Validates `content` and opens a session on it.
    pub fn from_content(
        id: SessionId,
        content: crate::pack::ContentPack,
        mode: PlayMode,
        escape_rule: EscapeRule,
        rng_seed: u64,
    ) -> Result<Self, EngineError> {
        Ok(Self::new(id, GamePack::new(content)?, mode, escape_rule, rng_seed))
    }

    pub fn id(&self) -> &SessionId {
        &self.id
    }

    pub fn pack(&self) -> &Arc<GamePack> {
        &self.pack
    }

    pub fn mode(&self) -> PlayMode {
        self.mode
    }

    pub fn escape_rule(&self) -> EscapeRule {
        self.escape_rule
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn profile(&self) -> Option<&PlayerProfile> {
        self.profile.as_ref()
    }

    pub fn avatar(&self) -> Option<&Avatar> {
        self.avatar.as_ref()
    }

    pub fn slot_fills(&self) -> &BTreeMap<SlotId, CardId> {
        &self.slot_fills
    }

    pub fn used_cards(&self) -> &BTreeSet<CardId> {
        &self.used_cards
    }

    pub fn piles(&self) -> &Piles {
        &self.piles
    }

    /// Cards dealt into the escape piles, containers included.
    pub fn in_play(&self) -> &BTreeSet<CardId> {
        &self.in_play
    }

    pub fn pending_question(&self) -> Option<&QuestionId> {
        self.pending.as_ref().map(|(q, _)| q)
    }

    pub fn uncovered(&self) -> &[CardId] {
        &self.uncovered
    }

    pub fn answers(&self) -> &BTreeMap<QuestionId, OptionId> {
        &self.answers
    }

    /// Top card of every pile in Digital mode; `None` for empty piles.
    pub fn pile_tops(&self) -> Vec<Option<&CardId>> {
        match &self.piles {
            Piles::Ordered(piles) => piles.iter().map(|p| p.last()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn active_statement(&self) -> Option<&Statement> {
        if self.phase != Phase::RoomDecoration {
            return None;
        }
        self.pack.statements_in_order().nth(self.next_statement)
    }

    fn phase_error(&self, operation: &'static str) -> EngineError {
        EngineError::Phase { operation, phase: self.phase }
    }

    fn require(&self, phase: Phase, operation: &'static str) -> Result<(), EngineError> {
        if self.phase == phase {
            Ok(())
        } else {
            Err(self.phase_error(operation))
        }
    }

    fn resolve_card(&self, payload: &str) -> Result<(usize, &Card), EngineError> {
        let (deck_id, card_id) = split_payload(payload)?;
        self.pack
            .indexed_card(card_id)
            .filter(|(_, c)| c.deck == deck_id)
            .ok_or_else(|| EngineError::UnknownCard(card_id.to_owned()))
    }

    pub fn submit_profile_and_avatar(&mut self, profile: PlayerProfile, avatar: Avatar) -> Result<(), EngineError> {
        self.require(Phase::PlayerCreation, "submit_profile_and_avatar")?;
        if profile.nickname.trim().is_empty() {
            return Err(EngineError::Validation("nickname must not be empty".into()));
        }
        if !(MIN_AGE..=MAX_AGE).contains(&profile.age) {
            return Err(EngineError::Validation(format!("age {} outside {MIN_AGE}..={MAX_AGE}", profile.age)));
        }
        match &avatar {
            Avatar::Digital { avatar_id } => {
                if !self.pack.content().avatars.iter().any(|a| &a.id == avatar_id) {
                    return Err(EngineError::Validation(format!("unknown avatar {avatar_id}")));
                }
            }
            Avatar::Physical { blob_id, .. } => {
                if blob_id.is_empty() {
                    return Err(EngineError::Validation("avatar image reference is empty".into()));
                }
            }
        }
        self.profile = Some(profile);
        self.avatar = Some(avatar);
        self.phase = Phase::RoomDecoration;
        Ok(())
    }

    /// Places a decoration card for the active statement and returns the
    /// completed sentence.
    pub fn scan_decoration(&mut self, payload: &str) -> Result<String, EngineError> {
        self.require(Phase::RoomDecoration, "scan_decoration")?;
        let (_, card) = self.resolve_card(payload)?;
        let statement = self.active_statement().expect("room decoration always has an active statement");
        if card.deck != statement.deck {
            return Err(EngineError::DeckMismatch {
                card: card.id.clone(),
                expected: statement.deck.to_string(),
                actual: card.deck.to_string(),
            });
        }
        if self.used_cards.contains(&card.id) {
            return Err(EngineError::CardAlreadyUsed(card.id.clone()));
        }
        let slot = self
            .pack
            .content()
            .board
            .decoration_slots
            .iter()
            .find(|s| s.deck == card.deck && !self.slot_fills.contains_key(&s.id))
            .expect("validated packs have a slot per statement")
            .id
            .clone();
        let fragment = statement.complete(card.completion.as_deref().unwrap_or_default());
        let card_id = card.id.clone();

        self.slot_fills.insert(slot, card_id.clone());
        self.used_cards.insert(card_id);
        self.next_statement += 1;
        if self.next_statement == self.pack.content().statements.len() {
            self.phase = Phase::EscapeSetup;
        }
        Ok(fragment)
    }

    pub fn begin_escape_phase(&mut self) -> Result<(), EngineError> {
        self.require(Phase::EscapeSetup, "begin_escape_phase")?;
        let content = self.pack.content();
        let mut pool: Vec<CardId> = self.pack.object_cards().to_vec();
        if content.recycle_decoration_cards {
            for slot in &content.board.decoration_slots {
                if let Some(card) = self.slot_fills.get(&slot.id) {
                    pool.push(card.clone());
                }
            }
        }
        let pile_count = content.pile_count as usize;
        match self.mode {
            PlayMode::Digital => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
                pool.shuffle(&mut rng);
                let mut piles = vec![Vec::new(); pile_count];
                for (i, card) in pool.into_iter().enumerate() {
                    piles[i % pile_count].push(card);
                }
                let mut containers = self.pack.container_cards().to_vec();
                containers.shuffle(&mut rng);
                for (pile, container) in piles.iter_mut().zip(containers) {
                    pile.push(container);
                }
                self.in_play = piles.iter().flatten().cloned().collect();
                self.piles = Piles::Ordered(piles);
            }
            PlayMode::Companion => {
                pool.extend(self.pack.container_cards().iter().cloned());
                self.in_play = pool.into_iter().collect();
                self.piles = Piles::Unordered(self.in_play.clone());
            }
        }
        self.phase = Phase::EscapeGameplay;
        Ok(())
    }

    /// Registers the scan of an escape card and returns its question.
    pub fn scan_pile_card(&mut self, payload: &str, pile_index: Option<usize>) -> Result<Arc<Question>, EngineError> {
        self.require(Phase::EscapeGameplay, "scan_pile_card")?;
        if let Some((question, _)) = &self.pending {
            return Err(EngineError::PendingAnswer(question.clone()));
        }
        let (index, card) = self.resolve_card(payload)?;
        if self.found[index] {
            return Err(EngineError::AlreadyUncovered(card.id.clone()));
        }
        if !self.in_play.contains(&card.id) {
            return Err(EngineError::CardNotInPlay(card.id.clone()));
        }
        if let Piles::Ordered(piles) = &self.piles {
            let on_top = |p: &Vec<CardId>| p.last() == Some(&card.id);
            match pile_index {
                Some(i) => {
                    let pile = piles.get(i).ok_or(EngineError::InvalidPile(i))?;
                    if !on_top(pile) {
                        return Err(EngineError::NotOnTop(card.id.clone()));
                    }
                }
                None => {
                    if !piles.iter().any(on_top) {
                        return Err(EngineError::NotOnTop(card.id.clone()));
                    }
                }
            }
        }
        let question = self
            .pack
            .shared_question_for_card(card.id.as_str())
            .expect("validated packs bind a question to every escape card");
        self.pending = Some((question.id.clone(), card.id.clone()));
        Ok(question)
    }

    /// Records the answer and uncovers the pending card. Any option counts as
    /// a successful answer.
    pub fn answer_question(&mut self, question_id: &str, option_id: &str) -> Result<AnswerOutcome, EngineError> {
        let Some((pending, card_id)) = &self.pending else {
            return Err(EngineError::NoPendingQuestion);
        };
        if pending != question_id {
            return Err(EngineError::QuestionMismatch { expected: pending.clone(), got: question_id.into() });
        }
        let question = self.pack.question(question_id).expect("pending question exists");
        let Some(option) = question.option(option_id) else {
            return Err(EngineError::UnknownOption { question: question.id.clone(), option: option_id.to_owned() });
        };
        let (index, card) = self.pack.indexed_card(card_id.as_str()).expect("pending card exists");
        let item = card.label().to_owned();
        let card_id = card_id.clone();
        let question_id = pending.clone();
        let option_id = option.id.clone();

        match &mut self.piles {
            Piles::Ordered(piles) => {
                if let Some(pile) = piles.iter_mut().find(|p| p.last() == Some(&card_id)) {
                    pile.pop();
                }
            }
            Piles::Unordered(set) => {
                set.remove(&card_id);
            }
            Piles::NotDealt => unreachable!("a pending question implies dealt piles"),
        }
        self.answers.insert(question_id, option_id);
        self.uncovered.push(card_id.clone());
        self.found[index] = true;
        self.cores_left -= usize::from(self.pack.is_core(index));
        self.pending = None;
        if self.uncovered.len() == self.in_play.len() {
            self.phase = Phase::Completed;
        }
        Ok(AnswerOutcome { card_id, item, can_escape: self.escape_rule_met() })
    }

    fn missing_core_items(&self) -> Vec<String> {
        self.pack
            .content()
            .core_card_ids
            .iter()
            .filter(|c| !self.uncovered.contains(c))
            .map(|c| self.pack.card(c.as_str()).map_or_else(|| c.to_string(), |card| card.label().to_owned()))
            .collect()
    }

    fn escape_rule_met(&self) -> bool {
        if self.piles == Piles::NotDealt {
            return false;
        }
        match self.escape_rule {
            EscapeRule::Greedy => self.cores_left == 0,
            EscapeRule::EmptyPiles => self.uncovered.len() == self.in_play.len(),
        }
    }

    /// True when the player may leave the room right now.
    pub fn can_escape(&self) -> bool {
        self.phase == Phase::EscapeGameplay && self.escape_rule_met()
    }

    pub fn attempt_escape(&mut self) -> Result<(), EngineError> {
        self.require(Phase::EscapeGameplay, "attempt_escape")?;
        if !self.escape_rule_met() {
            let (missing_items, remaining) = match self.escape_rule {
                EscapeRule::Greedy => (self.missing_core_items(), self.piles.remaining()),
                EscapeRule::EmptyPiles => (Vec::new(), self.in_play.len() - self.uncovered.len()),
            };
            return Err(EngineError::EscapeConditionUnmet { missing_items, remaining });
        }
        self.pending = None;
        self.phase = Phase::Escaped;
        Ok(())
    }

    pub fn current_prompt(&self) -> Prompt {
        match self.phase {
            Phase::PlayerCreation => Prompt::ProfileForm,
            Phase::RoomDecoration => {
                let s = self.active_statement().expect("active statement");
                Prompt::Statement { statement_id: s.id.clone(), text: s.text.clone() }
            }
            Phase::EscapeSetup => Prompt::BoardSetup,
            Phase::EscapeGameplay => match &self.pending {
                Some((q, _)) => Prompt::Question { question_id: q.clone() },
                None if self.escape_rule_met() => Prompt::EscapeOffer,
                None => Prompt::PileChoice,
            },
            Phase::Escaped | Phase::Completed => Prompt::FinalStory,
        }
    }

    /// Completed sentences so far, in play order.
    pub fn story_so_far(&self) -> Vec<String> {
        self.pack
            .statements_in_order()
            .filter_map(|s| {
                let card = self.slot_fills.get(&s.slot)?;
                let completion = self.pack.card(card.as_str())?.completion.as_deref()?;
                Some(s.complete(completion))
            })
            .collect()
    }

    pub fn discoveries(&self) -> Vec<Discovery> {
        self.uncovered
            .iter()
            .filter_map(|card_id| {
                let question = self.pack.question_for_card(card_id.as_str())?;
                let option = self.answers.get(&question.id)?;
                Some(Discovery {
                    card_id: card_id.clone(),
                    item: self.pack.card(card_id.as_str())?.label().to_owned(),
                    question_id: question.id.clone(),
                    prompt: question.prompt.clone(),
                    answer: question.option(option.as_str())?.text.clone(),
                })
            })
            .collect()
    }

    /// Checks the structural invariants that every reachable state satisfies.
    pub fn check_invariants(&self) -> Result<(), String> {
        let statements = self.pack.content().statements.len();
        if self.slot_fills.len() != self.next_statement || self.used_cards.len() != self.next_statement {
            return Err("slot fills out of step with statements".into());
        }
        let decorated = match self.phase {
            Phase::PlayerCreation | Phase::RoomDecoration => self.next_statement < statements,
            _ => self.next_statement == statements,
        };
        if !decorated {
            return Err(format!("{} statements done in phase {}", self.next_statement, self.phase.as_str()));
        }
        if (self.phase == Phase::PlayerCreation) != self.profile.is_none() {
            return Err("profile presence does not match phase".into());
        }
        let dealt = self.phase >= Phase::EscapeGameplay;
        if dealt == (self.piles == Piles::NotDealt) {
            return Err("piles dealt state does not match phase".into());
        }
        let unique: BTreeSet<&CardId> = self.uncovered.iter().collect();
        if unique.len() != self.uncovered.len() || !unique.iter().all(|c| self.in_play.contains(*c)) {
            return Err("uncovered cards are not a set of in-play cards".into());
        }
        if self.piles.remaining() + self.uncovered.len() != self.in_play.len() {
            return Err("cards lost between piles and uncovered area".into());
        }
        let indexed: Vec<usize> =
            self.uncovered.iter().filter_map(|c| self.pack.indexed_card(c.as_str()).map(|(i, _)| i)).collect();
        let flagged = self.found.iter().filter(|&&f| f).count();
        if indexed.len() != flagged || !indexed.iter().all(|&i| self.found[i]) {
            return Err("uncovered flags out of step with uncovered cards".into());
        }
        let cores_found = indexed.iter().filter(|&&i| self.pack.is_core(i)).count();
        if self.cores_left + cores_found != self.pack.core_count() {
            return Err("core count out of step with uncovered cards".into());
        }
        if let Some((_, card)) = &self.pending {
            if self.uncovered.contains(card) || self.phase != Phase::EscapeGameplay {
                return Err("stale pending question".into());
            }
        }
        match self.phase {
            Phase::Escaped if !self.escape_rule_met() => Err("escaped without meeting the rule".into()),
            Phase::Completed if self.uncovered.len() != self.in_play.len() => Err("completed with cards left".into()),
            _ => Ok(()),
        }
    }

    pub fn generate_story(&self) -> Result<Story, EngineError> {
        if !self.phase.is_finished() {
            return Err(self.phase_error("generate_story"));
        }
        Ok(Story { avatar: self.avatar.clone(), narrative: self.story_so_far(), discoveries: self.discoveries() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Gender;
    use crate::pack::default_covid_pack;
    use crate::qr::encode_payload;

    fn pack() -> Arc<GamePack> {
        GamePack::new(default_covid_pack()).unwrap()
    }

    fn profile() -> PlayerProfile {
        PlayerProfile {
            nickname: "otter".into(),
            age: 27,
            country: "Italy".into(),
            gender: Gender::Female,
            ethnicity: "white".into(),
            education_level: "master".into(),
            student: Some(true),
        }
    }

    fn avatar() -> Avatar {
        Avatar::Digital { avatar_id: "astronaut".into() }
    }

    fn payload(pack: &GamePack, card: &str) -> String {
        let deck = pack.card(card).unwrap().deck.clone();
        encode_payload(deck.as_str(), card).unwrap()
    }

    fn session(mode: PlayMode, rule: EscapeRule) -> GameSession {
        GameSession::new("s".into(), pack(), mode, rule, 42)
    }

    /// Plays the decoration step with the first unused card of each deck.
    fn decorate(s: &mut GameSession) {
        s.submit_profile_and_avatar(profile(), avatar()).unwrap();
        while s.phase() == Phase::RoomDecoration {
            let deck = s.active_statement().unwrap().deck.clone();
            let card = s
                .pack()
                .content()
                .deck(deck.as_str())
                .unwrap()
                .cards
                .iter()
                .find(|c| !s.used_cards().contains(&c.id))
                .unwrap()
                .id
                .clone();
            let p = payload(s.pack(), card.as_str());
            s.scan_decoration(&p).unwrap();
        }
    }

    fn uncover(s: &mut GameSession, card: &str) -> AnswerOutcome {
        let p = payload(s.pack(), card);
        let q = s.scan_pile_card(&p, None).unwrap();
        let opt = q.options[0].id.clone();
        s.answer_question(q.id.as_str(), opt.as_str()).unwrap()
    }

    #[test]
    fn new_session_starts_in_player_creation() {
        let s = session(PlayMode::Companion, EscapeRule::Greedy);
        assert_eq!(s.phase(), Phase::PlayerCreation);
        assert_eq!(s.current_prompt(), Prompt::ProfileForm);
        assert!(s.slot_fills().is_empty());
        assert_eq!(s.pack().content().board.decoration_slots.len(), 8);
        assert_eq!(s, session(PlayMode::Companion, EscapeRule::Greedy));
    }

    #[test]
    fn invalid_pack_is_rejected() {
        let mut content = default_covid_pack();
        content.core_card_ids.clear();
        let err = GameSession::from_content("s".into(), content, PlayMode::Digital, EscapeRule::Greedy, 1).unwrap_err();
        assert_eq!(err.code(), "INVALID_PACK");
    }

    #[test]
    fn profile_moves_to_decoration_with_opening_statement() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        s.submit_profile_and_avatar(profile(), avatar()).unwrap();
        assert_eq!(s.phase(), Phase::RoomDecoration);
        match s.current_prompt() {
            Prompt::Statement { text, .. } => assert!(text.starts_with("Our story begins in early 2020")),
            other => panic!("{other:?}"),
        }
        let err = s.submit_profile_and_avatar(profile(), avatar()).unwrap_err();
        assert_eq!(err.code(), "PHASE_ERROR");
    }

    #[test]
    fn profile_validation() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        let before = s.clone();
        let old = PlayerProfile { age: 200, ..profile() };
        assert_eq!(s.submit_profile_and_avatar(old, avatar()).unwrap_err().code(), "VALIDATION_ERROR");
        let anon = PlayerProfile { nickname: " ".into(), ..profile() };
        assert!(s.submit_profile_and_avatar(anon, avatar()).is_err());
        let ghost = Avatar::Digital { avatar_id: "ghost".into() };
        assert!(s.submit_profile_and_avatar(profile(), ghost).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn decoration_scans() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        s.submit_profile_and_avatar(profile(), avatar()).unwrap();
        let lamp = payload(s.pack(), "reading");
        let err = s.scan_decoration(&lamp).unwrap_err();
        assert_eq!(err.code(), "DECK_MISMATCH");

        let fragment = s.scan_decoration(&payload(s.pack(), "family")).unwrap();
        assert!(fragment.ends_with("you are surrounded by Family"), "{fragment}");
        assert_eq!(s.story_so_far(), vec![fragment]);
        assert_eq!(s.used_cards().len(), 1);

        assert_eq!(s.scan_decoration("MLE1|people|family|0000").unwrap_err().code(), "PAYLOAD_ERROR");
        let forged = encode_payload("people", "unicorn").unwrap();
        assert_eq!(s.scan_decoration(&forged).unwrap_err().code(), "UNKNOWN_CARD");
        let wrong_deck = encode_payload("lamp", "family").unwrap();
        assert_eq!(s.scan_decoration(&wrong_deck).unwrap_err().code(), "UNKNOWN_CARD");
    }

    #[test]
    fn floor_needs_two_distinct_cards() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        s.submit_profile_and_avatar(profile(), avatar()).unwrap();
        s.scan_decoration(&payload(s.pack(), "family")).unwrap();
        s.scan_decoration(&payload(s.pack(), "anxious")).unwrap();
        s.scan_decoration(&payload(s.pack(), "laptop")).unwrap();
        assert_eq!(s.slot_fills().get("slot_floor_1").unwrap(), &"laptop");
        let before = s.clone();
        let err = s.scan_decoration(&payload(s.pack(), "laptop")).unwrap_err();
        assert_eq!(err.code(), "CARD_ALREADY_USED");
        assert_eq!(s, before);
        s.scan_decoration(&payload(s.pack(), "guitar")).unwrap();
        assert_eq!(s.slot_fills().get("slot_floor_2").unwrap(), &"guitar");
    }

    #[test]
    fn eighth_scan_enters_escape_setup() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        decorate(&mut s);
        assert_eq!(s.phase(), Phase::EscapeSetup);
        assert_eq!(s.slot_fills().len(), 8);
        assert_eq!(s.current_prompt(), Prompt::BoardSetup);
    }

    #[test]
    fn digital_deal_is_even_with_distinct_containers() {
        let mut s = session(PlayMode::Digital, EscapeRule::Greedy);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        let Piles::Ordered(piles) = s.piles() else { panic!() };
        assert_eq!(piles.iter().map(Vec::len).collect::<Vec<_>>(), [5, 5, 5]);
        let tops: BTreeSet<_> = piles.iter().map(|p| p.last().unwrap().clone()).collect();
        assert_eq!(tops.len(), 3);
        for top in &tops {
            assert_eq!(s.pack().deck_of(top.as_str()).unwrap().kind, crate::pack::DeckKind::Container);
        }

        let mut again = session(PlayMode::Digital, EscapeRule::Greedy);
        decorate(&mut again);
        again.begin_escape_phase().unwrap();
        assert_eq!(again.piles(), s.piles());
    }

    #[test]
    fn companion_mode_tracks_all_escape_cards() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        assert_eq!(s.in_play().len(), 15);
        assert_eq!(s.piles().remaining(), 15);
        assert_eq!(s.begin_escape_phase().unwrap_err().code(), "PHASE_ERROR");
    }

    #[test]
    fn companion_scan_and_answer() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        let q = s.scan_pile_card(&payload(s.pack(), "wardrobe"), None).unwrap();
        assert_eq!(q.card, "wardrobe");
        assert_eq!(s.pending_question(), Some(&q.id));
        assert_eq!(s.current_prompt(), Prompt::Question { question_id: q.id.clone() });
        assert_eq!(s.scan_pile_card(&payload(s.pack(), "mask"), None).unwrap_err().code(), "PENDING_ANSWER");
        assert_eq!(s.answer_question("q_movie", "cast_away").unwrap_err().code(), "QUESTION_MISMATCH");
        assert_eq!(s.answer_question(q.id.as_str(), "zzz").unwrap_err().code(), "UNKNOWN_OPTION");
        let out = s.answer_question(q.id.as_str(), q.options[1].id.as_str()).unwrap();
        assert_eq!(out.item, "wardrobe");
        assert!(!out.can_escape);
        assert_eq!(s.uncovered(), ["wardrobe"]);
        assert_eq!(s.answer_question(q.id.as_str(), "x").unwrap_err(), EngineError::NoPendingQuestion);
        assert_eq!(s.scan_pile_card(&payload(s.pack(), "wardrobe"), None).unwrap_err().code(), "ALREADY_UNCOVERED");
        assert_eq!(s.scan_pile_card(&payload(s.pack(), "family"), None).unwrap_err().code(), "CARD_NOT_IN_PLAY");
    }

    #[test]
    fn digital_mode_enforces_top_of_pile() {
        let mut s = session(PlayMode::Digital, EscapeRule::Greedy);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        let Piles::Ordered(piles) = s.piles().clone() else { panic!() };
        let buried = piles[0][1].clone();
        let before = s.clone();
        assert_eq!(s.scan_pile_card(&payload(s.pack(), buried.as_str()), Some(0)).unwrap_err().code(), "NOT_ON_TOP");
        assert_eq!(s.scan_pile_card(&payload(s.pack(), buried.as_str()), None).unwrap_err().code(), "NOT_ON_TOP");
        let top1 = piles[1].last().unwrap().clone();
        assert_eq!(s.scan_pile_card(&payload(s.pack(), top1.as_str()), Some(0)).unwrap_err().code(), "NOT_ON_TOP");
        assert_eq!(s.scan_pile_card(&payload(s.pack(), top1.as_str()), Some(7)).unwrap_err().code(), "INVALID_PILE");
        assert_eq!(s, before);
        s.scan_pile_card(&payload(s.pack(), top1.as_str()), Some(1)).unwrap();
    }

    #[test]
    fn greedy_escape_after_core_items() {
        let mut s = session(PlayMode::Companion, EscapeRule::Greedy);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        assert!(!uncover(&mut s, "mask").can_escape);
        assert!(!uncover(&mut s, "hand_sanitiser").can_escape);
        match s.attempt_escape().unwrap_err() {
            EngineError::EscapeConditionUnmet { missing_items, .. } => assert_eq!(missing_items, ["green pass"]),
            other => panic!("{other:?}"),
        }
        assert!(uncover(&mut s, "green_pass").can_escape);
        assert_eq!(s.current_prompt(), Prompt::EscapeOffer);
        s.attempt_escape().unwrap();
        assert_eq!(s.phase(), Phase::Escaped);
        assert_eq!(s.current_prompt(), Prompt::FinalStory);
        let story = s.generate_story().unwrap();
        assert_eq!(story.narrative.len(), 8);
        assert_eq!(story.discoveries.len(), 3);
        assert_eq!(story.discoveries[0].item, "mask");
        assert_eq!(s.generate_story().unwrap(), story);
        assert_eq!(s.attempt_escape().unwrap_err().code(), "PHASE_ERROR");
    }

    #[test]
    fn empty_piles_rule_requires_every_card() {
        let mut s = session(PlayMode::Companion, EscapeRule::EmptyPiles);
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        for card in ["mask", "hand_sanitiser", "green_pass"] {
            assert!(!uncover(&mut s, card).can_escape);
        }
        let all: Vec<CardId> = s.in_play().iter().cloned().collect();
        let rest: Vec<_> = all.iter().filter(|c| !s.uncovered().contains(c)).cloned().collect();
        for card in &rest[..rest.len() - 2] {
            uncover(&mut s, card.as_str());
        }
        match s.attempt_escape().unwrap_err() {
            EngineError::EscapeConditionUnmet { remaining, .. } => assert_eq!(remaining, 2),
            other => panic!("{other:?}"),
        }
        uncover(&mut s, rest[rest.len() - 2].as_str());
        let last = uncover(&mut s, rest[rest.len() - 1].as_str());
        assert!(last.can_escape);
        assert_eq!(s.phase(), Phase::Completed);
        assert_eq!(s.generate_story().unwrap().discoveries.len(), 15);
    }

    #[test]
    fn story_requires_finished_game() {
        let s = session(PlayMode::Companion, EscapeRule::Greedy);
        assert_eq!(s.generate_story().unwrap_err().code(), "PHASE_ERROR");
    }

    #[test]
    fn recycled_decoration_cards_join_the_piles() {
        let mut content = default_covid_pack();
        content.recycle_decoration_cards = true;
        let decoration_cards: Vec<_> = content
            .decks_of_kind(crate::pack::DeckKind::Decoration)
            .flat_map(|d| d.cards.iter().map(|c| c.id.clone()))
            .collect();
        for card in decoration_cards {
            content.questions.push(Question {
                id: format!("q_recycled_{card}").into(),
                card: card.clone(),
                prompt: "Why this one?".into(),
                options: vec![
                    crate::pack::AnswerOption { id: "a".into(), text: "Habit".into() },
                    crate::pack::AnswerOption { id: "b".into(), text: "Chance".into() },
                ],
            });
        }
        let mut s =
            GameSession::from_content("r".into(), content, PlayMode::Digital, EscapeRule::EmptyPiles, 9).unwrap();
        decorate(&mut s);
        s.begin_escape_phase().unwrap();
        assert_eq!(s.in_play().len(), 15 + 8);
        for card in s.slot_fills().values() {
            assert!(s.in_play().contains(card));
        }
        let Piles::Ordered(piles) = s.piles() else { panic!() };
        let sizes: Vec<_> = piles.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}
