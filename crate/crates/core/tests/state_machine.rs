mod common;

use common::default_pack;
use mle_core::game::{EscapeRule, GameSession, Phase, PlayMode};
use mle_core::sim::random_command;
use mle_core::store::apply_command;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CORE: [&str; 3] = ["mask", "hand_sanitiser", "green_pass"];

fn run(seed: u64, digital: bool, greedy: bool, valid_rate: f64, steps: usize) -> Result<(), TestCaseError> {
    let mode = if digital { PlayMode::Digital } else { PlayMode::Companion };
    let rule = if greedy { EscapeRule::Greedy } else { EscapeRule::EmptyPiles };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut session = GameSession::new("sm".into(), default_pack(), mode, rule, seed);
    for _ in 0..steps {
        let before = session.clone();
        let command = random_command(&session, &mut rng, valid_rate);
        match apply_command(&mut session, &command) {
            Err(_) => prop_assert_eq!(&session, &before, "failed {:?} mutated state", command),
            Ok(_) => {
                prop_assert!(!before.phase().is_finished(), "{:?} accepted after the game ended", command);
                prop_assert!(session.phase() >= before.phase(), "phase regressed on {:?}", command);
            }
        }
        prop_assert_eq!(session.check_invariants(), Ok(()));
        if session.phase() == Phase::Escaped {
            match rule {
                EscapeRule::Greedy => {
                    for core in CORE {
                        prop_assert!(session.uncovered().iter().any(|c| c == core), "escaped without {}", core);
                    }
                }
                EscapeRule::EmptyPiles => prop_assert_eq!(session.uncovered().len(), session.in_play().len()),
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn random_sequences_respect_the_rules(
        seed in any::<u64>(),
        digital in any::<bool>(),
        greedy in any::<bool>(),
        valid_rate in 0.2f64..1.0,
        steps in 1usize..120,
    ) {
        run(seed, digital, greedy, valid_rate, steps)?;
    }
}

#[test]
fn mostly_valid_sequences_finish_games() {
    let mut finished = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = GameSession::new("f".into(), default_pack(), PlayMode::Digital, EscapeRule::Greedy, seed);
        for _ in 0..200 {
            let command = random_command(&s, &mut rng, 0.95);
            let _ = apply_command(&mut s, &command);
        }
        finished += usize::from(s.phase().is_finished());
    }
    assert!(finished > 190, "{finished}");
}
