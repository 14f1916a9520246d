use std::collections::HashMap;

use num_rational::Ratio;

use super::{Policy, SimConfig, SimError, N_CORE, N_PILES};
use crate::game::EscapeRule;

pub const EXACT_MAX_OBJECTS: usize = 9;

type Q = Ratio<i128>;

fn pile_sizes(n_objects: usize) -> [usize; N_PILES] {
    let mut sizes = [0; N_PILES];
    for k in 0..n_objects {
        sizes[k % N_PILES] += 1;
    }
    sizes
}

/// Expected scans from `removed` onwards, given how many cards must leave
/// each pile before the player stops.
fn expected_from(
    removed: [usize; N_PILES],
    lengths: &[usize; N_PILES],
    need: &[usize; N_PILES],
    policy: Policy,
    memo: &mut HashMap<[usize; N_PILES], Q>,
) -> Q {
    if (0..N_PILES).all(|p| removed[p] >= need[p]) {
        return Q::from_integer(0);
    }
    if let Some(v) = memo.get(&removed) {
        return *v;
    }
    let open: Vec<usize> = (0..N_PILES).filter(|&p| removed[p] < lengths[p]).collect();
    let next = |p: usize| {
        let mut r = removed;
        r[p] += 1;
        r
    };
    let value = match policy {
        Policy::LeftmostNonEmpty => Q::from_integer(1) + expected_from(next(open[0]), lengths, need, policy, memo),
        Policy::UniformRandomPile => {
            let sum = open
                .iter()
                .map(|&p| expected_from(next(p), lengths, need, policy, memo))
                .fold(Q::from_integer(0), |a, b| a + b);
            Q::from_integer(1) + sum / Q::from_integer(open.len() as i128)
        }
    };
    memo.insert(removed, value);
    value
}

/// Exact expected number of escape-card scans.
///
/// The uniform shuffle makes every set of core positions equally likely, so
/// the expectation averages a pile-choice recursion over those sets.
pub fn exact_expected_scans(config: &SimConfig) -> Result<Q, SimError> {
    let n = config.n_objects;
    if n > EXACT_MAX_OBJECTS {
        return Err(SimError::TooLarge { n, max: EXACT_MAX_OBJECTS });
    }
    config.validate()?;
    let sizes = pile_sizes(n);
    let lengths = sizes.map(|s| s + 1);
    if config.escape_rule == EscapeRule::EmptyPiles {
        return Ok(Q::from_integer(lengths.iter().sum::<usize>() as i128));
    }
    let mut total = Q::from_integer(0);
    let mut placements = 0i128;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let mut need = [0; N_PILES];
                for k in [a, b, c] {
                    let p = k % N_PILES;
                    let depth = sizes[p] - k / N_PILES;
                    need[p] = need[p].max(depth + 1);
                }
                total += expected_from([0; N_PILES], &lengths, &need, config.policy, &mut HashMap::new());
                placements += 1;
            }
        }
    }
    debug_assert_eq!(N_CORE, 3);
    Ok(total / Q::from_integer(placements))
}

const CONTAINER: usize = usize::MAX;

fn explore(piles: &mut [Vec<usize>; N_PILES], found: usize, rule: EscapeRule, policy: Policy) -> Q {
    let remaining: usize = piles.iter().map(Vec::len).sum();
    let done = match rule {
        EscapeRule::Greedy => found == N_CORE,
        EscapeRule::EmptyPiles => remaining == 0,
    };
    if done {
        return Q::from_integer(0);
    }
    let open: Vec<usize> = (0..N_PILES).filter(|&p| !piles[p].is_empty()).collect();
    let branches: &[usize] = match policy {
        Policy::LeftmostNonEmpty => &open[..1],
        Policy::UniformRandomPile => &open,
    };
    let mut sum = Q::from_integer(0);
    for &p in branches {
        let card = piles[p].pop().expect("open pile");
        let core = usize::from(card < N_CORE);
        sum += explore(piles, found + core, rule, policy);
        piles[p].push(card);
    }
    Q::from_integer(1) + sum / Q::from_integer(branches.len() as i128)
}

fn permutations(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Reference computation over every ordering of the object pool and every
/// branch of the player's choices, dealt exactly as the engine deals.
/// Cards `0..3` are the core objects. Feasible up to about seven objects.
pub fn brute_force_expected_scans(config: &SimConfig) -> Result<Q, SimError> {
    config.validate()?;
    if config.n_objects > 7 {
        return Err(SimError::TooLarge { n: config.n_objects, max: 7 });
    }
    let mut total = Q::from_integer(0);
    let mut count = 0i128;
    let mut pool: Vec<usize> = (0..config.n_objects).collect();
    permutations(&mut pool, 0, &mut |order| {
        let mut piles: [Vec<usize>; N_PILES] = Default::default();
        for (i, &card) in order.iter().enumerate() {
            piles[i % N_PILES].push(card);
        }
        for pile in piles.iter_mut() {
            pile.push(CONTAINER);
        }
        total += explore(&mut piles, 0, config.escape_rule, config.policy);
        count += 1;
    });
    Ok(total / Q::from_integer(count))
}
