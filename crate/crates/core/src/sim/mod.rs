//! Data-yield analysis of the escape rules.
//!
//! [`simulate`] plays whole Digital-mode games through the engine with a
//! scripted pile-choosing player; [`exact_expected_scans`] computes the same
//! expectation exactly for small instances. [`random_command`] drives
//! sessions with a mix of legal and illegal actions for stress tests.

mod exact;
mod player;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Avatar, EscapeRule, GamePack, GameSession, Gender, Phase, Piles, PlayMode, PlayerProfile};
use crate::pack::{
    AnswerOption, AvatarDescriptor, BoardLayout, Card, ContentPack, Deck, DeckKind, Question, Slot, Statement,
};
use crate::qr::encode_payload;

pub use exact::{brute_force_expected_scans, exact_expected_scans, EXACT_MAX_OBJECTS};
pub use player::{noise_command, random_command, random_profile, valid_command};

pub const N_CORE: usize = 3;
pub const N_PILES: usize = 3;
pub const N_CONTAINERS: usize = 3;
pub const MAX_OBJECTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Pick uniformly among the non-empty piles.
    #[default]
    UniformRandomPile,
    /// Always take from the leftmost non-empty pile.
    LeftmostNonEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_objects: usize,
    pub policy: Policy,
    pub escape_rule: EscapeRule,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_objects < N_CORE {
            return Err(SimError::Config(format!("n_objects must be at least {N_CORE}, got {}", self.n_objects)));
        }
        if self.n_objects > MAX_OBJECTS {
            return Err(SimError::Config(format!("n_objects must be at most {MAX_OBJECTS}")));
        }
        if self.trials == 0 {
            return Err(SimError::Config("trials must be positive".into()));
        }
        Ok(())
    }

    pub fn total_cards(&self) -> usize {
        self.n_objects + N_CONTAINERS
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("exact enumeration supports at most {max} objects, got {n}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub mean_scans: f64,
    /// Standard error of `mean_scans`.
    pub std_error: f64,
    /// Number of trials ending after each scan count.
    pub scan_distribution: BTreeMap<u32, u64>,
    pub mean_questions_answered_fraction: f64,
}

/// A minimal valid pack: one decoration statement, `n_objects` objects of
/// which the first three are core, and three containers.
pub fn synthetic_pack(n_objects: usize) -> ContentPack {
    let card = |id: String, deck: &str, completion: Option<String>, item: Option<String>| Card {
        symbol: id.clone(),
        id: id.into(),
        deck: deck.into(),
        completion,
        item,
    };
    let objects: Vec<Card> =
        (0..n_objects).map(|i| card(format!("o{i}"), "objects", None, Some(format!("object {i}")))).collect();
    let containers: Vec<Card> =
        (0..N_CONTAINERS).map(|i| card(format!("k{i}"), "containers", None, Some(format!("container {i}")))).collect();
    let questions = objects
        .iter()
        .chain(&containers)
        .map(|c| Question {
            id: format!("q_{}", c.id).into(),
            card: c.id.clone(),
            prompt: format!("About the {}?", c.label()),
            options: vec![
                AnswerOption { id: "yes".into(), text: "Yes".into() },
                AnswerOption { id: "no".into(), text: "No".into() },
            ],
        })
        .collect();
    let deck = |id: &str, kind, cards| Deck { id: id.into(), name: id.into(), colour: "grey".into(), kind, cards };
    ContentPack {
        pack_id: format!("synthetic-{n_objects}"),
        version: "1".into(),
        decks: vec![
            deck(
                "room",
                DeckKind::Decoration,
                vec![card("plant".into(), "room", None, None)]
                    .into_iter()
                    .map(|c| Card { completion: Some("a plant".into()), ..c })
                    .collect(),
            ),
            deck("objects", DeckKind::Object, objects),
            deck("containers", DeckKind::Container, containers),
        ],
        statements: vec![Statement {
            id: "only".into(),
            order: 0,
            text: "The room holds {completion}.".into(),
            deck: "room".into(),
            slot: "slot_room".into(),
        }],
        questions,
        board: BoardLayout {
            decoration_slots: vec![Slot { id: "slot_room".into(), deck: "room".into() }],
            avatar_slot: true,
            pile_slots: N_PILES as u32,
            uncovered_slot: true,
        },
        core_card_ids: (0..N_CORE).map(|i| format!("o{i}").into()).collect(),
        avatars: vec![AvatarDescriptor { id: "a".into(), name: "A".into() }],
        pile_count: N_PILES as u32,
        recycle_decoration_cards: false,
    }
}

struct Harness {
    pack: Arc<GamePack>,
    payloads: std::collections::HashMap<String, String>,
    profile: PlayerProfile,
}

impl Harness {
    fn new(n_objects: usize) -> Self {
        let pack = GamePack::new(synthetic_pack(n_objects)).expect("synthetic pack is valid");
        let payloads = pack
            .content()
            .decks
            .iter()
            .flat_map(|d| d.cards.iter())
            .map(|c| {
                let payload = encode_payload(c.deck.as_str(), c.id.as_str()).expect("valid ids");
                (c.id.to_string(), payload)
            })
            .collect();
        let profile = PlayerProfile {
            nickname: "sim".into(),
            age: 30,
            country: String::new(),
            gender: Gender::Undisclosed,
            ethnicity: String::new(),
            education_level: String::new(),
            student: None,
        };
        Harness { pack, payloads, profile }
    }

    /// Plays one game and returns the number of escape-card scans.
    fn play(&self, config: &SimConfig, game_seed: u64, policy_seed: u64) -> u32 {
        let mut session =
            GameSession::new("sim".into(), self.pack.clone(), PlayMode::Digital, config.escape_rule, game_seed);
        session
            .submit_profile_and_avatar(self.profile.clone(), Avatar::Digital { avatar_id: "a".into() })
            .expect("profile is valid");
        session.scan_decoration(&self.payloads["plant"]).expect("decoration scan is valid");
        session.begin_escape_phase().expect("setup follows decoration");

        let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
        let mut scans = 0;
        let mut open = Vec::with_capacity(N_PILES);
        loop {
            if config.escape_rule == EscapeRule::Greedy && session.can_escape() {
                session.attempt_escape().expect("escape is available");
                break;
            }
            if session.phase() == Phase::Completed {
                break;
            }
            let Piles::Ordered(piles) = session.piles() else { unreachable!("digital sessions deal ordered piles") };
            open.clear();
            open.extend(piles.iter().enumerate().filter(|(_, p)| !p.is_empty()).map(|(i, _)| i));
            let pile = match config.policy {
                Policy::LeftmostNonEmpty => open[0],
                Policy::UniformRandomPile => open[rng.gen_range(0..open.len())],
            };
            let top = piles[pile].last().expect("open piles are non-empty");
            let payload = &self.payloads[top.as_str()];
            let question = session.scan_pile_card(payload, Some(pile)).expect("top card scans");
            session
                .answer_question(question.id.as_str(), question.options[0].id.as_str())
                .expect("listed option is accepted");
            scans += 1;
        }
        scans
    }
}

/// SplitMix64 step, used to derive independent per-trial seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Runs `config.trials` independent games. The result depends only on the
/// config, never on thread scheduling.
pub fn simulate(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    let harness = Harness::new(config.n_objects);
    let base = splitmix64(config.seed);
    let histogram = (0..config.trials)
        .into_par_iter()
        .fold(BTreeMap::new, |mut hist: BTreeMap<u32, u64>, trial| {
            let game_seed = splitmix64(base ^ trial.wrapping_mul(2));
            let policy_seed = splitmix64(base ^ trial.wrapping_mul(2).wrapping_add(1));
            *hist.entry(harness.play(config, game_seed, policy_seed)).or_default() += 1;
            hist
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    Ok(summarize(config, histogram))
}

fn summarize(config: &SimConfig, histogram: BTreeMap<u32, u64>) -> SimResult {
    let n = config.trials as f64;
    let (sum, sum_sq) = histogram.iter().fold((0u128, 0u128), |(s, q), (&k, &v)| {
        let k = k as u128;
        (s + k * v as u128, q + k * k * v as u128)
    });
    let mean = sum as f64 / n;
    let variance = if config.trials > 1 { (sum_sq as f64 - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
    SimResult {
        trials: config.trials,
        mean_scans: mean,
        std_error: (variance / n).sqrt(),
        scan_distribution: histogram,
        mean_questions_answered_fraction: mean / config.total_cards() as f64,
    }
}
