//! Synthetic cohorts whose answers follow the proportions reported for the
//! original study, so that analytics output can be checked exactly.

use mle_core::game::{Gender, PlayerProfile};
use mle_core::store::EventStore;

use crate::common::record_scripted_session;

pub const SESSIONS: usize = 200;

/// Picks the answer for `rank` (0..100) from cumulative `(answer, percent)` splits.
fn pick(rank: usize, split: &[(&'static str, usize)]) -> &'static str {
    let mut upto = 0;
    for (answer, pct) in split {
        upto += pct;
        if rank < upto {
            return answer;
        }
    }
    panic!("split does not cover 100%")
}

pub const FEELING: &[(&str, usize)] =
    &[("frustrated", 39), ("anxious", 26), ("bored", 12), ("lonely", 8), ("hopeful", 7), ("indifferent", 8)];
pub const GENERAL_IMPACT: &[(&str, usize)] = &[("negative", 89), ("none", 6), ("positive", 5)];
pub const PERSONAL_CHANGE: &[(&str, usize)] = &[("changed", 75), ("not_changed", 25)];
pub const PRIORITIES_BEFORE: &[(&str, usize)] =
    &[("relationships", 40), ("career_finance", 36), ("family", 10), ("leisure", 8), ("physical_health", 6)];
pub const PRIORITIES_DURING: &[(&str, usize)] = &[
    ("mental_health", 30),
    ("relationships", 28),
    ("family", 18),
    ("physical_health", 12),
    ("career_finance", 7),
    ("leisure", 5),
];
pub const SOCIAL_DISTANCE: &[(&str, usize)] =
    &[("anxious", 30), ("vulnerable", 30), ("annoyed", 15), ("angry", 10), ("indifferent", 10), ("safe", 5)];
pub const HANG_OUT_STUDENTS: &[(&str, usize)] = &[("no", 46), ("afraid", 30), ("yes_carefully", 16), ("yes_gladly", 8)];
pub const HANG_OUT_OTHERS: &[(&str, usize)] = &[("no", 32), ("afraid", 30), ("yes_carefully", 26), ("yes_gladly", 12)];
pub const EMOTION_FEMALE: &[(&str, usize)] =
    &[("frustration", 40), ("anxiety", 25), ("boredom", 20), ("sadness", 10), ("hope", 5)];
pub const EMOTION_MALE: &[(&str, usize)] =
    &[("boredom", 40), ("anxiety", 25), ("frustration", 20), ("fear", 10), ("serenity", 5)];

/// Ten SUS responses whose raw sum is `sum` (score = 2.5 * sum).
pub fn sus_responses(sum: u32) -> [u8; 10] {
    let mut values = [3u8; 10];
    let mut delta = sum as i32 - 20;
    for (i, v) in values.iter_mut().enumerate() {
        let step = delta.clamp(-2, 2);
        let toward_agree = if i.is_multiple_of(2) { step } else { -step };
        *v = (3 + toward_agree) as u8;
        delta -= step;
    }
    assert_eq!(delta, 0);
    values
}

/// 21 SUS response sets with scores 85, 75 and 65, seven of each: mean 75.
pub fn sus_cohort() -> Vec<[u8; 10]> {
    (0..21).map(|i| sus_responses([34, 30, 26][i % 3])).collect()
}

/// Approach answers for participant `p`; over 20 participants the reflected
/// grand mean is 3.9.
pub fn approach_responses(p: usize) -> [(&'static str, u8); 5] {
    if p.is_multiple_of(2) {
        [("APPROACH1", 5), ("APPROACH2", 4), ("APPROACH3", 4), ("APPROACH4", 4), ("APPROACH5", 2)]
    } else {
        [("APPROACH1", 4), ("APPROACH2", 4), ("APPROACH3", 4), ("APPROACH4", 3), ("APPROACH5", 3)]
    }
}

/// Empathy answers for participant `p`; over 20 participants the grand mean
/// is 3.6.
pub fn empathy_responses(p: usize) -> [(&'static str, u8); 5] {
    if p.is_multiple_of(2) {
        [("EMPATHY1", 5), ("EMPATHY2", 4), ("EMPATHY3", 3), ("EMPATHY4", 2), ("EMPATHY5", 4)]
    } else {
        [("EMPATHY1", 4), ("EMPATHY2", 3), ("EMPATHY3", 4), ("EMPATHY4", 3), ("EMPATHY5", 4)]
    }
}

/// 200 played sessions. Sessions `0..100` are students, even sessions are
/// female. Every split holds within each student group, and the emotion
/// split holds within each gender. The first 21 sessions also answer the
/// questionnaire: all of them SUS, the first 20 the other two sets.
pub fn paper_cohort() -> EventStore {
    let store = EventStore::in_memory();
    for i in 0..SESSIONS {
        let student = i < SESSIONS / 2;
        let group_rank = i % 100;
        let female = i.is_multiple_of(2);
        let gender_rank = i / 2;
        let profile = PlayerProfile {
            nickname: format!("p{i}"),
            age: 18 + (i as u32 * 7) % 30,
            country: "Italy".into(),
            gender: if female { Gender::Female } else { Gender::Male },
            ethnicity: String::new(),
            education_level: if student { "bachelor" } else { "master" }.into(),
            student: Some(student),
        };
        let feeling = pick(group_rank, FEELING);
        let decoration = move |statement: &str| (statement == "lockdown_feeling").then_some(feeling);
        let hang_out = pick(group_rank, if student { HANG_OUT_STUDENTS } else { HANG_OUT_OTHERS });
        let emotion = pick(gender_rank, if female { EMOTION_FEMALE } else { EMOTION_MALE });
        let escape = [
            ("thermometer", pick(group_rank, GENERAL_IMPACT)),
            ("rapid_test", pick(group_rank, PERSONAL_CHANGE)),
            ("newspaper", pick(group_rank, PRIORITIES_BEFORE)),
            ("webcam", pick(group_rank, PRIORITIES_DURING)),
            ("mask", pick(group_rank, SOCIAL_DISTANCE)),
            ("hand_sanitiser", hang_out),
            ("green_pass", emotion),
        ];
        let mut questionnaire: Vec<(&str, u8)> = Vec::new();
        if i < 21 {
            let sus = sus_cohort()[i];
            questionnaire.extend(mle_core::analytics::SUS.items.iter().map(|it| it.id).zip(sus));
        }
        if i < 20 {
            questionnaire.extend(approach_responses(i));
            questionnaire.extend(empathy_responses(i));
        }
        record_scripted_session(&store, &format!("s{i:03}"), profile, &decoration, &escape, &questionnaire);
    }
    store
}
