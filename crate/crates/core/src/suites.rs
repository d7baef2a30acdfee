//! Property suites run against a finite function poset: restriction and
//! extension clauses, the strong embedding contract, and hit density.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eval::{Assignment, GroundPermutation, GroundRep, Nat};
use crate::extension::{self, ExtensionError};
use crate::poset::{self, agreement, letter_word, Condition, PosetError, PosetMode};
use crate::sample;
use crate::words::{Gen, Word};

/// The operations the axiom suite exercises.
pub trait FinitePoset {
    fn mode(&self) -> PosetMode;
    fn ground(&self) -> &GroundRep;
    fn leq(&self, p: &Condition, q: &Condition) -> Result<bool, PosetError>;
    fn restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition;
    fn strong_restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition;
    fn merge(&self, p: &Condition, t: &Assignment) -> Result<Condition, PosetError>;
    fn add_words(&self, p: &Condition, words: &BTreeSet<Word>) -> Result<Condition, PosetError>;
    fn strong_reduction(&self, p: &Condition, a0: &BTreeSet<Gen>) -> Result<Condition, ExtensionError>;
    fn canonical_extension(
        &self,
        p: &Condition,
        t: &Condition,
        a0: &BTreeSet<Gen>,
    ) -> Result<Condition, ExtensionError>;
}

/// The library's poset in one mode over a ground representation.
pub struct GroupPoset {
    pub mode: PosetMode,
    pub rho: GroundRep,
}

impl FinitePoset for GroupPoset {
    fn mode(&self) -> PosetMode {
        self.mode
    }

    fn ground(&self) -> &GroundRep {
        &self.rho
    }

    fn leq(&self, p: &Condition, q: &Condition) -> Result<bool, PosetError> {
        poset::leq(p, q, &self.rho)
    }

    fn restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition {
        p.restrict(gens)
    }

    fn strong_restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition {
        p.strong_restrict(gens, &self.rho)
    }

    fn merge(&self, p: &Condition, t: &Assignment) -> Result<Condition, PosetError> {
        p.merge_disjoint(t, &self.rho)
    }

    fn add_words(&self, p: &Condition, words: &BTreeSet<Word>) -> Result<Condition, PosetError> {
        p.add_words(words, &self.rho)
    }

    fn strong_reduction(&self, p: &Condition, a0: &BTreeSet<Gen>) -> Result<Condition, ExtensionError> {
        extension::strong_reduction(p, a0, &self.rho)
    }

    fn canonical_extension(
        &self,
        p: &Condition,
        t: &Condition,
        a0: &BTreeSet<Gen>,
    ) -> Result<Condition, ExtensionError> {
        extension::canonical_extension(p, t, a0, &self.rho)
    }
}

/// Wraps a poset with an order that only compares the finite parts and
/// ignores frozen sets. The suite must reject it.
pub struct ForgetfulLeq<P>(pub P);

impl<P: FinitePoset> FinitePoset for ForgetfulLeq<P> {
    fn mode(&self) -> PosetMode {
        self.0.mode()
    }

    fn ground(&self) -> &GroundRep {
        self.0.ground()
    }

    fn leq(&self, p: &Condition, q: &Condition) -> Result<bool, PosetError> {
        Ok(q.s.is_subset_of(&p.s) && q.f.is_subset(&p.f))
    }

    fn restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition {
        self.0.restrict(p, gens)
    }

    fn strong_restrict(&self, p: &Condition, gens: &BTreeSet<Gen>) -> Condition {
        self.0.strong_restrict(p, gens)
    }

    fn merge(&self, p: &Condition, t: &Assignment) -> Result<Condition, PosetError> {
        self.0.merge(p, t)
    }

    fn add_words(&self, p: &Condition, words: &BTreeSet<Word>) -> Result<Condition, PosetError> {
        self.0.add_words(p, words)
    }

    fn strong_reduction(&self, p: &Condition, a0: &BTreeSet<Gen>) -> Result<Condition, ExtensionError> {
        self.0.strong_reduction(p, a0)
    }

    fn canonical_extension(
        &self,
        p: &Condition,
        t: &Condition,
        a0: &BTreeSet<Gen>,
    ) -> Result<Condition, ExtensionError> {
        self.0.canonical_extension(p, t, a0)
    }
}

/// `p ≤ q` straight from the definition: `p` contains `q` and every set
/// `q` protects is the same under `p`.
pub fn leq_by_definition(p: &Condition, q: &Condition, rho: &GroundRep) -> bool {
    if !q.s.is_subset_of(&p.s) || !q.f.is_subset(&p.f) {
        return false;
    }
    match q.mode {
        PosetMode::Mad => {
            let letters: Vec<Gen> = q.f.iter().filter_map(letter_word).collect();
            letters.iter().enumerate().all(|(i, &a)| {
                letters[i + 1..]
                    .iter()
                    .all(|&b| agreement(&p.s, a, b, Some(1)) == agreement(&q.s, a, b, Some(1)))
            })
        }
        _ => q.f.iter().all(|w| p.frozen_set(w, rho) == q.frozen_set(w, rho)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseResult {
    pub clause: &'static str,
    pub checked: u64,
    pub failures: u64,
    /// The first counterexample, as JSON.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FfpReport {
    pub mode: PosetMode,
    pub samples: u64,
    pub seed: u64,
    pub clauses: Vec<ClauseResult>,
}

impl FfpReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.failures == 0)
    }
}

struct Clause {
    result: ClauseResult,
}

impl Clause {
    fn new(clause: &'static str) -> Self {
        Clause {
            result: ClauseResult {
                clause,
                checked: 0,
                failures: 0,
                witness: None,
            },
        }
    }

    fn record<T: Serialize>(&mut self, ok: bool, witness: impl FnOnce() -> T) {
        self.result.checked += 1;
        if !ok {
            self.result.failures += 1;
            if self.result.witness.is_none() {
                self.result.witness = Some(serde_json::to_string(&witness()).expect("serializable witness"));
            }
        }
    }
}

const GENS: [Gen; 3] = [Gen(0), Gen(1), Gen(2)];
const FRESH: [Gen; 2] = [Gen(7), Gen(8)];

fn random_subset<R: Rng>(rng: &mut R) -> BTreeSet<Gen> {
    GENS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

/// Samples conditions of `poset` and checks: the order against its
/// definition, `p↾B ≤ p‖B`, monotonicity of both restrictions,
/// disjoint merges and side-set growth extending the input, and the strong
/// embedding contract.
pub fn ffp_axiom_suite<P: FinitePoset>(poset: &P, samples: u64, seed: u64) -> FfpReport {
    let mode = poset.mode();
    let rho = poset.ground();
    let leq = |p: &Condition, q: &Condition| poset.leq(p, q).unwrap_or(false);
    let mut order = Clause::new("order-matches-definition");
    let mut weaken = Clause::new("restriction-weakens");
    let mut mono = Clause::new("restriction-monotone");
    let mut merge = Clause::new("disjoint-merge-extends");
    let mut grow = Clause::new("side-growth-extends");
    let mut embed = Clause::new("strong-embedding");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let q = sample::condition(&mut rng, mode, &GENS, 4, 3, 4, 8);
        let p = sample::random_extension(&mut rng, &q, 3, 8);
        if p.validate(rho).is_ok() {
            let expected = leq_by_definition(&p, &q, rho);
            order.record(leq(&p, &q) == expected, || (&p, &q, expected));
        }

        let b = random_subset(&mut rng);
        let r = poset.restrict(&q, &b);
        let sr = poset.strong_restrict(&q, &b);
        weaken.record(leq(&r, &sr), || (&q, &b));

        if leq_by_definition(&p, &q, rho) && p.validate(rho).is_ok() {
            let ok = leq(&poset.restrict(&p, &b), &r) && leq(&poset.strong_restrict(&p, &b), &sr);
            mono.record(ok, || (&p, &q, &b));
        }

        let t = sample::condition(&mut rng, mode, &FRESH, 3, 0, 1, 8).s;
        let merged = poset.merge(&q, &t);
        let ok = merged.as_ref().is_ok_and(|m| leq(m, &q) && t.is_subset_of(&m.s));
        merge.record(ok, || (&q, &t, merged.as_ref().err().map(|e| e.to_string())));

        let extra = sample::condition(&mut rng, mode, &GENS, 0, 2, 4, 8).f;
        let grown = poset.add_words(&q, &extra);
        let ok = grown.as_ref().is_ok_and(|g| leq(g, &q) && extra.is_subset(&g.f));
        grow.record(ok, || (&q, &extra, grown.as_ref().err().map(|e| e.to_string())));

        match sample::embedding_triple(&mut rng, mode, rho) {
            Ok((p, a0, t)) => {
                let out = poset.canonical_extension(&p, &t, &a0);
                let ok = out.as_ref().is_ok_and(|r| leq(r, &p) && leq(r, &t));
                embed.record(ok, || (&p, &a0, &t, out.as_ref().err().map(|e| e.to_string())));
            }
            Err(e) => embed.record(false, || e.to_string()),
        }
    }
    FfpReport {
        mode,
        samples,
        seed,
        clauses: [order, weaken, mono, merge, grow, embed]
            .into_iter()
            .map(|c| c.result)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HitMiss {
    pub sample: u64,
    pub gen: Gen,
    pub from: Nat,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HitDensityReport {
    pub generators: u32,
    pub words: usize,
    pub max_n: Nat,
    pub window: Nat,
    pub samples: u64,
    pub seed: u64,
    pub searches: u64,
    pub not_found: u64,
    pub errors: u64,
    /// Largest `n − N` over successful searches.
    pub max_offset: Nat,
    pub misses: Vec<HitMiss>,
}

impl HitDensityReport {
    pub fn passed(&self) -> bool {
        self.not_found == 0 && self.errors == 0
    }
}

/// For sampled cofinitary conditions over `generators` letters with up to
/// `words` side words, searches for a ℤ-shift hit at or above every
/// `N ≤ max_n` within `window`, and checks each hit extends the sample.
pub fn hit_density_suite(
    generators: u32,
    words: usize,
    max_n: Nat,
    window: Nat,
    samples: u64,
    seed: u64,
) -> HitDensityReport {
    let rho = GroundRep::empty();
    let gens: Vec<Gen> = (0..generators).map(Gen).collect();
    let sigma = GroundPermutation::ZShift;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HitDensityReport {
        generators,
        words,
        max_n,
        window,
        samples,
        seed,
        searches: 0,
        not_found: 0,
        errors: 0,
        max_offset: 0,
        misses: Vec::new(),
    };
    for sample in 0..samples {
        let p = sample::condition(&mut rng, PosetMode::Cofinitary, &gens, 6, words, 4, 8);
        let a0 = *gens.choose(&mut rng).expect("at least one generator");
        for from in 0..=max_n {
            report.searches += 1;
            let miss = |reason: String| HitMiss {
                sample,
                gen: a0,
                from,
                reason,
            };
            match extension::hit_search(&p, a0, &sigma, from, window, &rho) {
                Ok(Some((n, q))) => {
                    let hit = q.s.get(a0).and_then(|m| m.get(n)) == Some(sigma.apply(n));
                    if hit && n >= from && leq_by_definition(&q, &p, &rho) {
                        report.max_offset = report.max_offset.max(n - from);
                    } else {
                        report.errors += 1;
                        report.misses.push(miss(format!("hit at {n} is not a valid extension")));
                    }
                }
                Ok(None) => {
                    report.not_found += 1;
                    report.misses.push(miss("no hit in window".into()));
                }
                Err(e) => {
                    report.errors += 1;
                    report.misses.push(miss(e.to_string()));
                }
            }
        }
    }
    report.misses.truncate(20);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(mode: PosetMode) -> GroupPoset {
        GroupPoset {
            mode,
            rho: GroundRep::empty(),
        }
    }

    #[test]
    fn reference_poset_passes_in_every_mode() {
        for mode in [PosetMode::Cofinitary, PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
            let report = ffp_axiom_suite(&reference(mode), 200, 9);
            assert!(report.passed(), "{mode}: {:?}", report.clauses);
            assert!(report.clauses.iter().all(|c| c.checked > 0), "{mode}");
        }
    }

    #[test]
    fn forgetful_order_is_caught() {
        for mode in [PosetMode::Cofinitary, PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
            let report = ffp_axiom_suite(&ForgetfulLeq(reference(mode)), 300, 9);
            let order = &report.clauses[0];
            assert!(order.failures > 0, "{mode}");
            assert!(order.witness.is_some());
        }
    }

    #[test]
    fn definition_rejects_a_new_fixed_point() {
        let rho = GroundRep::empty();
        let q = Condition::new(PosetMode::Cofinitary, Assignment::new(), ["g0".parse().unwrap()].into());
        let mut p = q.clone();
        p.s.insert(Gen(0), 3, 3).unwrap();
        assert!(!leq_by_definition(&p, &q, &rho));
        assert!(!poset::leq(&p, &q, &rho).unwrap());
    }

    #[test]
    fn hits_are_dense() {
        let report = hit_density_suite(3, 4, 50, 64, 20, 5);
        assert!(report.passed(), "{:?}", report.misses);
        assert_eq!(report.searches, 20 * 51);
    }
}
