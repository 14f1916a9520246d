#![allow(dead_code)]

pub mod cohort;
pub mod qr;

use std::sync::Arc;

use chrono::{DateTime, Duration, TimeZone, Utc};
use mle_core::game::{Avatar, EscapeRule, GamePack, GameSession, Gender, PlayMode, PlayerProfile};
use mle_core::pack::default_covid_pack;
use mle_core::qr::encode_payload;
use mle_core::sim::random_command;
use mle_core::store::{apply_command, EventPayload, EventStore, GameEvent};
use mle_core::SessionId;
use rand::Rng;

pub fn default_pack() -> Arc<GamePack> {
    GamePack::new(default_covid_pack()).unwrap()
}

pub fn profile() -> PlayerProfile {
    PlayerProfile {
        nickname: "heron".into(),
        age: 26,
        country: "Italy".into(),
        gender: Gender::Female,
        ethnicity: "white".into(),
        education_level: "master".into(),
        student: Some(true),
    }
}

pub fn avatar() -> Avatar {
    Avatar::Digital { avatar_id: "astronaut".into() }
}

pub fn payload(pack: &GamePack, card: &str) -> String {
    let deck = &pack.card(card).unwrap().deck;
    encode_payload(deck.as_str(), card).unwrap()
}

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2022, 3, 14, 9, 0, 0).unwrap()
}

/// Appends every successful action of a randomly played session to `store`
/// and returns the live session.
pub fn record_random_session<R: Rng>(
    store: &EventStore,
    id: &str,
    mode: PlayMode,
    rule: EscapeRule,
    rng: &mut R,
    valid_rate: f64,
    max_steps: usize,
) -> GameSession {
    let pack = default_pack();
    let seed = rng.gen();
    let session_id = SessionId::from(id);
    let mut session = GameSession::new(session_id.clone(), pack.clone(), mode, rule, seed);
    let mut seq = 1;
    let mut clock = epoch();
    store
        .append(GameEvent::new(
            session_id.clone(),
            seq,
            clock,
            EventPayload::SessionCreated {
                pack_id: pack.content().pack_id.clone(),
                pack_version: pack.content().version.clone(),
                mode,
                escape_rule: rule,
                seed,
                token_digest: None,
            },
        ))
        .unwrap();
    for _ in 0..max_steps {
        if session.phase().is_finished() {
            break;
        }
        let command = random_command(&session, rng, valid_rate);
        if let Ok((_, event)) = apply_command(&mut session, &command) {
            seq += 1;
            clock += Duration::milliseconds(rng.gen_range(500..20_000));
            store.append(GameEvent::new(session_id.clone(), seq, clock, event)).unwrap();
        }
    }
    session
}

/// Plays a Companion-mode session to a successful escape and appends it.
/// `decoration` may pick the card for a statement by id; otherwise the first
/// unused card of the deck is placed. `escape` lists `(card, option)` pairs in
/// scan order and must uncover the three core objects.
pub fn record_scripted_session(
    store: &EventStore,
    id: &str,
    profile: PlayerProfile,
    decoration: &dyn Fn(&str) -> Option<&'static str>,
    escape: &[(&str, &str)],
    questionnaire: &[(&str, u8)],
) -> GameSession {
    use mle_core::game::Phase;
    use mle_core::store::{Command, QuestionnaireResponse};

    let pack = default_pack();
    let sid = SessionId::from(id);
    let mut session = GameSession::new(sid.clone(), pack.clone(), PlayMode::Companion, EscapeRule::Greedy, 0);
    let mut events = vec![EventPayload::SessionCreated {
        pack_id: pack.content().pack_id.clone(),
        pack_version: pack.content().version.clone(),
        mode: PlayMode::Companion,
        escape_rule: EscapeRule::Greedy,
        seed: 0,
        token_digest: None,
    }];
    let mut run = |s: &mut GameSession, c: Command| events.push(apply_command(s, &c).unwrap().1);
    run(&mut session, Command::SubmitProfile { profile, avatar: avatar() });
    while session.phase() == Phase::RoomDecoration {
        let statement = session.active_statement().unwrap().clone();
        let card = match decoration(statement.id.as_str()) {
            Some(card) => card.to_owned(),
            None => pack
                .content()
                .deck(statement.deck.as_str())
                .unwrap()
                .cards
                .iter()
                .find(|c| !session.used_cards().contains(&c.id))
                .unwrap()
                .id
                .to_string(),
        };
        run(&mut session, Command::ScanDecoration { payload: payload(&pack, &card) });
    }
    run(&mut session, Command::BeginEscapePhase);
    for (card, option) in escape {
        run(&mut session, Command::ScanPileCard { payload: payload(&pack, card), pile_index: None });
        let q = pack.question_for_card(card).unwrap();
        run(&mut session, Command::AnswerQuestion { question_id: q.id.clone(), option_id: (*option).into() });
    }
    run(&mut session, Command::AttemptEscape);
    if !questionnaire.is_empty() {
        let responses = questionnaire
            .iter()
            .map(|(item, value)| QuestionnaireResponse { item_id: (*item).into(), value: *value })
            .collect();
        events.push(EventPayload::QuestionnaireSubmitted { responses });
    }
    let batch = events
        .into_iter()
        .enumerate()
        .map(|(i, p)| GameEvent::new(sid.clone(), i as u64 + 1, epoch() + Duration::seconds(i as i64), p))
        .collect();
    store.append_batch(batch).unwrap();
    session
}
