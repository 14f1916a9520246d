use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use crate::game::{Avatar, GameSession, Gender, Phase, Piles, PlayerProfile};
use crate::qr::encode_payload;
use crate::store::Command;

const COUNTRIES: [&str; 5] = ["Italy", "Spain", "Germany", "Brazil", "India"];
const EDUCATION: [&str; 4] = ["high_school", "bachelor", "master", "phd"];
const GENDERS: [Gender; 4] = [Gender::Female, Gender::Male, Gender::Other, Gender::Undisclosed];

pub fn random_profile<R: Rng>(rng: &mut R) -> PlayerProfile {
    PlayerProfile {
        nickname: format!("player{}", rng.gen_range(0..10_000)),
        age: rng.gen_range(16..70),
        country: COUNTRIES.choose(rng).unwrap().to_string(),
        gender: *GENDERS.choose(rng).unwrap(),
        ethnicity: String::new(),
        education_level: EDUCATION.choose(rng).unwrap().to_string(),
        student: [None, Some(true), Some(false)].choose(rng).copied().flatten(),
    }
}

fn payload(session: &GameSession, card: &str) -> String {
    let deck = &session.pack().card(card).expect("pack card").deck;
    encode_payload(deck.as_str(), card).expect("pack ids are valid")
}

/// A legal next action, or `None` once the game is over.
pub fn valid_command<R: Rng>(session: &GameSession, rng: &mut R) -> Option<Command> {
    let pack = session.pack();
    match session.phase() {
        Phase::PlayerCreation => {
            let avatar = match pack.content().avatars.choose(rng) {
                Some(a) if rng.gen_bool(0.8) => Avatar::Digital { avatar_id: a.id.clone() },
                _ => {
                    Avatar::Physical { blob_id: format!("{:064x}", rng.gen::<u128>()), media_type: "image/jpeg".into() }
                }
            };
            Some(Command::SubmitProfile { profile: random_profile(rng), avatar })
        }
        Phase::RoomDecoration => {
            let deck = &session.active_statement()?.deck;
            let card = pack
                .content()
                .deck(deck.as_str())?
                .cards
                .iter()
                .filter(|c| !session.used_cards().contains(&c.id))
                .choose(rng)?;
            Some(Command::ScanDecoration { payload: payload(session, card.id.as_str()) })
        }
        Phase::EscapeSetup => Some(Command::BeginEscapePhase),
        Phase::EscapeGameplay => {
            if let Some(q) = session.pending_question() {
                let option = pack.question(q.as_str())?.options.choose(rng)?;
                return Some(Command::AnswerQuestion { question_id: q.clone(), option_id: option.id.clone() });
            }
            if session.can_escape() && rng.gen_bool(0.5) {
                return Some(Command::AttemptEscape);
            }
            match session.piles() {
                Piles::Ordered(piles) => {
                    let (i, pile) = piles.iter().enumerate().filter(|(_, p)| !p.is_empty()).choose(rng)?;
                    Some(Command::ScanPileCard {
                        payload: payload(session, pile.last()?.as_str()),
                        pile_index: if rng.gen_bool(0.5) { Some(i) } else { None },
                    })
                }
                Piles::Unordered(cards) => Some(Command::ScanPileCard {
                    payload: payload(session, cards.iter().choose(rng)?.as_str()),
                    pile_index: None,
                }),
                Piles::NotDealt => None,
            }
        }
        Phase::Escaped | Phase::Completed => None,
    }
}

/// An action that is likely, but not certain, to be rejected.
pub fn noise_command<R: Rng>(session: &GameSession, rng: &mut R) -> Command {
    let content = session.pack().content();
    let any_card = content.decks.choose(rng).unwrap().cards.choose(rng).unwrap();
    let any_payload = payload(session, any_card.id.as_str());
    let any_question = content.questions.choose(rng).unwrap();
    match rng.gen_range(0..9) {
        0 => Command::ScanDecoration { payload: any_payload },
        1 => Command::ScanPileCard { payload: any_payload, pile_index: Some(rng.gen_range(0..5)) },
        2 => {
            let mut bad = any_payload.into_bytes();
            let i = rng.gen_range(0..bad.len());
            bad[i] = rng.gen_range(b' '..=b'~');
            Command::ScanDecoration { payload: String::from_utf8(bad).unwrap() }
        }
        3 => Command::AnswerQuestion {
            question_id: any_question.id.clone(),
            option_id: any_question.options.choose(rng).unwrap().id.clone(),
        },
        4 => Command::AnswerQuestion { question_id: any_question.id.clone(), option_id: "no_such_option".into() },
        5 => Command::AttemptEscape,
        6 => Command::BeginEscapePhase,
        7 => Command::SubmitProfile {
            profile: PlayerProfile { age: rng.gen_range(0..5), ..random_profile(rng) },
            avatar: Avatar::Digital { avatar_id: "no_such_avatar".into() },
        },
        _ => Command::ScanPileCard { payload: "MLE1|objects|mask|0000".into(), pile_index: None },
    }
}

/// A valid action with probability `valid_rate`, otherwise noise.
pub fn random_command<R: Rng>(session: &GameSession, rng: &mut R, valid_rate: f64) -> Command {
    if rng.gen_bool(valid_rate) {
        if let Some(c) = valid_command(session, rng) {
            return c;
        }
    }
    noise_command(session, rng)
}
