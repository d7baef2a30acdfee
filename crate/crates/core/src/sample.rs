//! Seeded random conditions for property suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::eval::{Assignment, Nat};
use crate::poset::{make_pair_word, Condition, PosetMode};
use crate::words::{Gen, Letter, Word};

fn random_map<R: Rng>(rng: &mut R, mode: PosetMode, pairs: usize, bound: Nat) -> Vec<(Nat, Nat)> {
    let mut dom: Vec<Nat> = (0..bound).collect();
    dom.shuffle(rng);
    dom.truncate(pairs);
    match mode {
        PosetMode::Cofinitary | PosetMode::Adp => {
            let mut ran: Vec<Nat> = (0..bound).collect();
            ran.shuffle(rng);
            dom.into_iter().zip(ran).collect()
        }
        PosetMode::Edf => dom.into_iter().map(|n| (n, rng.gen_range(0..bound))).collect(),
        PosetMode::Mad => dom.into_iter().map(|n| (n, rng.gen_range(0..2))).collect(),
    }
}

pub fn random_word<R: Rng>(rng: &mut R, gens: &[Gen], len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let g = *gens.choose(rng).expect("nonempty alphabet");
        let l = Letter {
            gen: g,
            inv: rng.gen_bool(0.5),
        };
        if letters.last().is_some_and(|x| x.gen == l.gen && x.inv != l.inv) {
            continue;
        }
        letters.push(l);
    }
    Word::reduce(letters)
}

/// Up to `count` distinct random hat words of length `1..=max_len`.
pub fn hat_words<R: Rng>(rng: &mut R, gens: &[Gen], count: usize, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for _ in 0..count {
        let len = rng.gen_range(1..=max_len);
        let w = random_word(rng, gens, len);
        if w.is_hat() {
            out.insert(w);
        }
    }
    out
}

fn side_set<R: Rng>(rng: &mut R, mode: PosetMode, gens: &[Gen], count: usize, max_len: usize) -> BTreeSet<Word> {
    match mode {
        PosetMode::Cofinitary => hat_words(rng, gens, count, max_len),
        PosetMode::Adp | PosetMode::Edf => {
            let mut out = BTreeSet::new();
            if gens.len() >= 2 {
                for _ in 0..count {
                    let mut two: Vec<Gen> = gens.choose_multiple(rng, 2).copied().collect();
                    two.shuffle(rng);
                    out.insert(make_pair_word(two[0], two[1]));
                }
            }
            out
        }
        PosetMode::Mad => (0..count)
            .map(|_| Word::gen(*gens.choose(rng).expect("nonempty alphabet")))
            .collect(),
    }
}

/// A valid condition over `gens` with at most `max_pairs` pairs per
/// generator below `bound` and at most `max_words` side entries.
pub fn condition<R: Rng>(
    rng: &mut R,
    mode: PosetMode,
    gens: &[Gen],
    max_pairs: usize,
    max_words: usize,
    max_len: usize,
    bound: Nat,
) -> Condition {
    let mut s = Assignment::new();
    for &g in gens {
        let k = rng.gen_range(0..=max_pairs);
        for (n, m) in random_map(rng, mode, k, bound) {
            s.insert(g, n, m).expect("fresh domain points");
        }
    }
    let count = rng.gen_range(0..=max_words);
    Condition::new(mode, s, side_set(rng, mode, gens, count, max_len.max(1)))
}

/// Adds up to `extra` random pairs that keep the mode's map discipline, and
/// occasionally a side entry. The result need not extend the input.
pub fn random_extension<R: Rng>(rng: &mut R, q: &Condition, extra: usize, bound: Nat) -> Condition {
    let mut gens: BTreeSet<Gen> = q.s.support();
    gens.extend(q.f.iter().flat_map(|w| w.occurrences()));
    let gens: Vec<Gen> = gens.into_iter().collect();
    let mut p = q.clone();
    if gens.is_empty() {
        return p;
    }
    let k = rng.gen_range(0..=extra);
    for _ in 0..k * 4 {
        if p.s.len() >= q.s.len() + k {
            break;
        }
        let g = *gens.choose(rng).expect("nonempty");
        let n = rng.gen_range(0..bound);
        let m = match q.mode {
            PosetMode::Mad => rng.gen_range(0..2),
            _ => rng.gen_range(0..bound),
        };
        let map = p.s.get(g);
        if map.is_some_and(|x| x.in_domain(n)) {
            continue;
        }
        let injective = matches!(q.mode, PosetMode::Cofinitary | PosetMode::Adp);
        if injective && map.is_some_and(|x| x.in_range(m)) {
            continue;
        }
        p.s.insert(g, n, m).expect("checked domain");
    }
    if rng.gen_bool(0.2) {
        p.f.extend(side_set(rng, q.mode, &gens, 1, 3));
    }
    p
}

/// `count` conditions sharing a root assignment on `root` generators, each
/// with its own `private` fresh generators. Side sets live over root plus
/// private generators, so any two members overlap only in the root.
pub fn delta_system<R: Rng>(rng: &mut R, mode: PosetMode, count: usize, root: u32, private: u32) -> Vec<Condition> {
    let root_gens: Vec<Gen> = (0..root).map(Gen).collect();
    let t = condition(rng, mode, &root_gens, 3, 0, 1, 8).s;
    (0..count as u32)
        .map(|alpha| {
            let own: Vec<Gen> = (0..private).map(|j| Gen(root + alpha * private + j)).collect();
            let private_part = condition(rng, mode, &own, 3, 0, 1, 8).s;
            let all: Vec<Gen> = root_gens.iter().chain(own.iter()).copied().collect();
            let f = side_set(rng, mode, &all, 3, 4);
            Condition::new(mode, t.union(&private_part).expect("disjoint generators"), f)
        })
        .collect()
}

/// A triple `(p, A₀, t)` where `t` is built from the strong reduction of `p`
/// to `A₀` by random one-pair extensions and side words over `A₀` and two
/// fresh generators.
pub fn embedding_triple<R: Rng>(
    rng: &mut R,
    mode: PosetMode,
    rho: &crate::eval::GroundRep,
) -> Result<(Condition, BTreeSet<Gen>, Condition), crate::extension::ExtensionError> {
    use crate::extension::{extend_domain, extend_range, ExtensionError};
    let gens = [Gen(0), Gen(1), Gen(2)];
    let p = condition(rng, mode, &gens, 4, 3, 4, 8);
    let a0: BTreeSet<Gen> = gens.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let mut t = crate::extension::strong_reduction(&p, &a0, rho)?;
    let pool: Vec<Gen> = a0.iter().copied().chain([Gen(5), Gen(6)]).collect();
    for _ in 0..rng.gen_range(0..=6) {
        let g = *pool.choose(rng).expect("nonempty pool");
        let x = rng.gen_range(0..12);
        let step = if mode == PosetMode::Mad {
            extend_domain(&t, g, x, rng.gen_range(0..2), rho)
        } else if rng.gen_bool(0.5) {
            extend_domain(&t, g, x, rng.gen_range(0..12), rho)
        } else {
            extend_range(&t, g, x, rng.gen_range(0..12), rho)
        };
        match step {
            Ok((next, _)) => t = next,
            Err(ExtensionError::AlreadyInDomain { .. } | ExtensionError::AlreadyInRange { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let count = rng.gen_range(0..=2);
    let extra = side_set(rng, mode, &pool, count, 4);
    let t = t.add_words(&extra, rho)?;
    Ok((p, a0, t))
}
