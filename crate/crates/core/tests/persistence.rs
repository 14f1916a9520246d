mod common;

use chrono::Duration;
use common::{avatar, default_pack, epoch, payload, profile, record_random_session};
use mle_core::game::{EscapeRule, GameSession, PackRegistry, Phase, PlayMode};
use mle_core::store::{
    apply_command, export_dataset, replay_session, Command, EventPayload, EventStore, ExportFormat, GameEvent,
    InjectedFault, QuestionnaireResponse, ReplayError, StoreError, COLUMNS, LOG_FILE,
};
use mle_core::SessionId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn modes(i: u64) -> (PlayMode, EscapeRule) {
    let mode = if i.is_multiple_of(2) { PlayMode::Digital } else { PlayMode::Companion };
    let rule = if i.is_multiple_of(3) { EscapeRule::EmptyPiles } else { EscapeRule::Greedy };
    (mode, rule)
}

#[test]
fn replay_reproduces_live_sessions_after_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let mut live = Vec::new();
    {
        let store = EventStore::open(dir.path()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for i in 0..200 {
            let (mode, rule) = modes(i);
            let rate = rng.gen_range(0.5..1.0);
            live.push(record_random_session(&store, &format!("s{i}"), mode, rule, &mut rng, rate, 150));
        }
    }
    let store = EventStore::open(dir.path()).unwrap();
    let registry = PackRegistry::with_default();
    let mut finished = 0;
    for session in &live {
        let replayed = replay_session(&store, session.id(), &registry).unwrap();
        assert_eq!(&replayed, session);
        if session.phase().is_finished() {
            finished += 1;
            let live_story = serde_json::to_string(&session.generate_story().unwrap()).unwrap();
            let replayed_story = serde_json::to_string(&replayed.generate_story().unwrap()).unwrap();
            assert_eq!(live_story, replayed_story);
        }
    }
    assert!(finished > 100, "{finished}");
}

#[test]
fn replay_errors() {
    let registry = PackRegistry::with_default();
    let store = EventStore::in_memory();
    assert_eq!(replay_session(&store, &"nobody".into(), &registry), Err(ReplayError::UnknownSession("nobody".into())));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    record_random_session(&store, "a", PlayMode::Digital, EscapeRule::Greedy, &mut rng, 1.0, 40);
    assert!(replay_session(&store, &"a".into(), &PackRegistry::new())
        .is_err_and(|e| matches!(e, ReplayError::PackUnavailable { .. })));

    // Swap two events in the log image.
    let mut events = store.events_for("a");
    events.swap(3, 4);
    let dir = tempfile::tempdir().unwrap();
    let bytes: Vec<u8> = events.iter().flat_map(mle_core::store::encode_record).collect();
    std::fs::write(dir.path().join(LOG_FILE), bytes).unwrap();
    let reordered = EventStore::open(dir.path()).unwrap();
    assert!(matches!(replay_session(&reordered, &"a".into(), &registry), Err(ReplayError::CorruptLog { seq: 5, .. })));
}

#[test]
fn tampered_outcome_is_detected() {
    let store = EventStore::in_memory();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    record_random_session(&store, "a", PlayMode::Companion, EscapeRule::Greedy, &mut rng, 1.0, 40);
    let mut events = store.events_for("a");
    let i = events.iter().position(|e| e.kind() == "DecorationScanned").unwrap();
    if let EventPayload::DecorationScanned { completion, .. } = &mut events[i].payload {
        completion.push_str(" (edited)");
    }
    let tampered = EventStore::in_memory();
    tampered.append_batch(events).unwrap();
    assert!(matches!(
        replay_session(&tampered, &"a".into(), &PackRegistry::with_default()),
        Err(ReplayError::CorruptLog { .. })
    ));
}

/// Simulates the process dying part-way through each append: the reopened
/// log is always a whole-record prefix of the intended one.
#[test]
fn crash_mid_append_leaves_a_prefix() {
    let reference = EventStore::in_memory();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    record_random_session(&reference, "a", PlayMode::Digital, EscapeRule::Greedy, &mut rng, 1.0, 60);
    let intended = reference.all_events();
    for cut in 0..intended.len() {
        let record_len = mle_core::store::encode_record(&intended[cut]).len();
        for written in [0, 1, 3, 4, 5, record_len / 2, record_len - 1] {
            let dir = tempfile::tempdir().unwrap();
            {
                let store = EventStore::open(dir.path()).unwrap();
                for event in &intended[..cut] {
                    store.append(event.clone()).unwrap();
                }
                store.inject_fault(InjectedFault { written, crash: true });
                assert!(matches!(store.append(intended[cut].clone()), Err(StoreError::Storage(_))));
                assert!(store.append(intended[cut].clone()).is_err());
            }
            let store = EventStore::open(dir.path()).unwrap();
            assert_eq!(store.all_events(), intended[..cut]);
            for event in &intended[cut..] {
                store.append(event.clone()).unwrap();
            }
            assert_eq!(store.all_events(), intended);
        }
    }
}

fn finished_session(store: &EventStore, id: &str, answers: usize, questionnaire: bool) {
    let pack = default_pack();
    let sid = SessionId::from(id);
    let mut s = GameSession::new(sid.clone(), pack.clone(), PlayMode::Companion, EscapeRule::Greedy, 1);
    let mut events = vec![EventPayload::SessionCreated {
        pack_id: pack.content().pack_id.clone(),
        pack_version: pack.content().version.clone(),
        mode: PlayMode::Companion,
        escape_rule: EscapeRule::Greedy,
        seed: 1,
        token_digest: None,
    }];
    let mut run = |s: &mut GameSession, c: Command| events.push(apply_command(s, &c).unwrap().1);
    run(&mut s, Command::SubmitProfile { profile: profile(), avatar: avatar() });
    while s.phase() == Phase::RoomDecoration {
        let deck = s.active_statement().unwrap().deck.clone();
        let card = pack
            .content()
            .deck(deck.as_str())
            .unwrap()
            .cards
            .iter()
            .find(|c| !s.used_cards().contains(&c.id))
            .unwrap()
            .id
            .clone();
        run(&mut s, Command::ScanDecoration { payload: payload(&pack, card.as_str()) });
    }
    run(&mut s, Command::BeginEscapePhase);
    let order = ["wardrobe", "smartphone", "newspaper", "webcam", "drawer", "mask", "hand_sanitiser", "green_pass"];
    for card in &order[order.len() - answers..] {
        run(&mut s, Command::ScanPileCard { payload: payload(&pack, card), pile_index: None });
        let q = pack.question_for_card(card).unwrap();
        run(&mut s, Command::AnswerQuestion { question_id: q.id.clone(), option_id: q.options[0].id.clone() });
    }
    run(&mut s, Command::AttemptEscape);
    if questionnaire {
        let responses = mle_core::analytics::randomize_questionnaire(&mle_core::analytics::InstrumentId::ALL, 1)
            .into_iter()
            .map(|item| QuestionnaireResponse { item_id: item.id.into(), value: 4 })
            .collect();
        events.push(EventPayload::QuestionnaireSubmitted { responses });
    }
    let batch = events
        .into_iter()
        .enumerate()
        .map(|(i, p)| GameEvent::new(sid.clone(), i as u64 + 1, epoch() + Duration::seconds(i as i64), p))
        .collect();
    store.append_batch(batch).unwrap();
}

#[test]
fn export_counts_every_response() {
    let store = EventStore::in_memory();
    finished_session(&store, "one", 7, false);
    let csv = String::from_utf8(export_dataset(&store, ExportFormat::Csv)).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), COLUMNS);
    assert_eq!(reader.records().count(), 15);
    assert!(!csv.contains("heron"), "nickname leaked");
    assert!(!csv.contains('\r'));

    finished_session(&store, "two", 3, true);
    let jsonl = String::from_utf8(export_dataset(&store, ExportFormat::Jsonl)).unwrap();
    assert_eq!(jsonl.lines().count(), 15 + 8 + 3 + 20);
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    let keys: Vec<_> = first.as_object().unwrap().keys().cloned().collect();
    let mut sorted_columns: Vec<_> = COLUMNS.iter().map(|c| c.to_string()).collect();
    sorted_columns.sort();
    let mut sorted_keys = keys.clone();
    sorted_keys.sort();
    assert_eq!(sorted_keys, sorted_columns);
    assert_eq!(first["phase"], "room_decoration");
    assert_eq!(first["prompt_text"].as_str().unwrap().matches("...").count(), 1);
}

#[test]
fn empty_and_repeated_exports() {
    let store = EventStore::in_memory();
    assert_eq!(export_dataset(&store, ExportFormat::Csv), format!("{}\n", COLUMNS.join(",")).into_bytes());
    assert!(export_dataset(&store, ExportFormat::Jsonl).is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..20 {
        record_random_session(&store, &format!("r{i}"), PlayMode::Digital, EscapeRule::Greedy, &mut rng, 0.9, 100);
    }
    for format in [ExportFormat::Csv, ExportFormat::Jsonl] {
        assert_eq!(export_dataset(&store, format), export_dataset(&store, format));
    }
}

#[test]
fn export_rows_equal_recorded_responses() {
    let store = EventStore::in_memory();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..50 {
        let (mode, rule) = modes(i);
        record_random_session(&store, &format!("c{i}"), mode, rule, &mut rng, 0.8, 120);
    }
    let responses = store
        .all_events()
        .iter()
        .map(|e| match &e.payload {
            EventPayload::DecorationScanned { .. } | EventPayload::QuestionAnswered { .. } => 1,
            EventPayload::QuestionnaireSubmitted { responses } => responses.len(),
            _ => 0,
        })
        .sum::<usize>();
    let jsonl = export_dataset(&store, ExportFormat::Jsonl);
    assert_eq!(jsonl.iter().filter(|&&b| b == b'\n').count(), responses);
}
