//! Conditions `(s, F)` of the group-adding poset and its variants, with a
//! decidable extension relation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{eval, step, Assignment, GroundRep, MapError, Nat};
use crate::words::{Gen, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosetMode {
    /// Partial injections with hat words frozen.
    Cofinitary,
    /// Almost disjoint permutations: injections, side words `a b⁻¹`.
    Adp,
    /// Eventually different functions: plain functions, side words `a b⁻¹`.
    Edf,
    /// Mad families: `{0,1}`-valued functions, side set of letters.
    Mad,
}

impl fmt::Display for PosetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PosetMode::Cofinitary => "cofinitary",
            PosetMode::Adp => "adp",
            PosetMode::Edf => "edf",
            PosetMode::Mad => "mad",
        })
    }
}

impl std::str::FromStr for PosetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cofinitary" => Ok(PosetMode::Cofinitary),
            "adp" => Ok(PosetMode::Adp),
            "edf" => Ok(PosetMode::Edf),
            "mad" => Ok(PosetMode::Mad),
            other => Err(format!("unknown mode `{other}` (cofinitary, adp, edf, mad)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("side word is the identity")]
    EmptyWord,
    #[error("side word {0} is not in the hat set")]
    NotHat(Word),
    #[error("side word {0} is not of the form a b^-1 with a != b")]
    NotPairWord(Word),
    #[error("side entry {0} is not a single generator")]
    NotLetter(Word),
    #[error("side entry {0} uses a ground generator")]
    GroundInSide(Word),
    #[error("map for {0} is not injective")]
    NotInjective(Gen),
    #[error("map for {gen} sends {n} to {m}, outside {{0,1}}")]
    NotBinary { gen: Gen, n: Nat, m: Nat },
    #[error("assignment gives pairs to ground generator {0}")]
    GroundGenerator(Gen),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("mode mismatch: {0} vs {1}")]
    ModeMismatch(PosetMode, PosetMode),
    #[error("generators {0:?} occur on both sides")]
    Overlap(Vec<Gen>),
    #[error("invalid condition: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("result does not extend its input: {0}")]
    ContractViolated(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// `a b⁻¹` with `a ≠ b`, as `(a, b)`.
pub fn pair_word(w: &Word) -> Option<(Gen, Gen)> {
    match w.letters() {
        [x, y] if !x.inv && y.inv && x.gen != y.gen => Some((x.gen, y.gen)),
        _ => None,
    }
}

pub fn make_pair_word(a: Gen, b: Gen) -> Word {
    Word::reduce([Letter::pos(a), Letter::neg(b)])
}

/// A single positive letter, as its generator.
pub fn letter_word(w: &Word) -> Option<Gen> {
    match w.letters() {
        [x] if !x.inv => Some(x.gen),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub mode: PosetMode,
    pub s: Assignment,
    #[serde(rename = "F")]
    pub f: BTreeSet<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Merge {
    Merged(Condition),
    Incompatible,
}

impl Condition {
    pub fn empty(mode: PosetMode) -> Self {
        Condition {
            mode,
            s: Assignment::new(),
            f: BTreeSet::new(),
        }
    }

    pub fn new(mode: PosetMode, s: Assignment, f: BTreeSet<Word>) -> Self {
        Condition { mode, s, f }
    }

    pub fn validate(&self, rho: &GroundRep) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for (g, map) in self.s.maps() {
            if rho.is_ground(g) {
                out.push(Violation::GroundGenerator(g));
            }
            match self.mode {
                PosetMode::Cofinitary | PosetMode::Adp => {
                    if !map.is_injective() {
                        out.push(Violation::NotInjective(g));
                    }
                }
                PosetMode::Edf => {}
                PosetMode::Mad => {
                    for (n, m) in map.pairs().filter(|&(_, m)| m > 1) {
                        out.push(Violation::NotBinary { gen: g, n, m });
                    }
                }
            }
        }
        for w in &self.f {
            if w.is_empty() {
                out.push(Violation::EmptyWord);
                continue;
            }
            match self.mode {
                PosetMode::Cofinitary => {
                    if !w.is_hat() {
                        out.push(Violation::NotHat(w.clone()));
                    }
                }
                PosetMode::Adp | PosetMode::Edf => match pair_word(w) {
                    None => out.push(Violation::NotPairWord(w.clone())),
                    Some((a, b)) if rho.is_ground(a) || rho.is_ground(b) => {
                        out.push(Violation::GroundInSide(w.clone()))
                    }
                    Some(_) => {}
                },
                PosetMode::Mad => match letter_word(w) {
                    None => out.push(Violation::NotLetter(w.clone())),
                    Some(a) if rho.is_ground(a) => out.push(Violation::GroundInSide(w.clone())),
                    Some(_) => {}
                },
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn checked(self, rho: &GroundRep) -> Result<Condition, PosetError> {
        self.validate(rho).map_err(PosetError::Invalid)?;
        Ok(self)
    }

    /// Generic generators occurring in `s` or in a side word.
    pub fn oc(&self, rho: &GroundRep) -> BTreeSet<Gen> {
        let mut out = self.s.support();
        for w in &self.f {
            out.extend(rho.generic_occurrences(w));
        }
        out
    }

    /// Generic generators occurring in side words.
    pub fn oc_words(&self, rho: &GroundRep) -> BTreeSet<Gen> {
        self.f.iter().flat_map(|w| rho.generic_occurrences(w)).collect()
    }

    /// `p↾A₀`: pairs outside `A₀` dropped, side set kept.
    pub fn restrict(&self, gens: &BTreeSet<Gen>) -> Condition {
        Condition {
            mode: self.mode,
            s: self.s.restrict(gens),
            f: self.f.clone(),
        }
    }

    /// `p‖A₀`: pairs and side words outside `A₀` (plus ground letters) dropped.
    pub fn strong_restrict(&self, gens: &BTreeSet<Gen>, rho: &GroundRep) -> Condition {
        Condition {
            mode: self.mode,
            s: self.s.restrict(gens),
            f: self
                .f
                .iter()
                .filter(|w| rho.generic_occurrences(w).is_subset(gens))
                .cloned()
                .collect(),
        }
    }

    /// `(s ∪ t, F)`; `t` may not touch generators occurring in `self`.
    pub fn merge_disjoint(&self, t: &Assignment, rho: &GroundRep) -> Result<Condition, PosetError> {
        let overlap: Vec<Gen> = t.support().intersection(&self.oc(rho)).copied().collect();
        if !overlap.is_empty() {
            return Err(PosetError::Overlap(overlap));
        }
        let out = Condition {
            mode: self.mode,
            s: self.s.union(t)?,
            f: self.f.clone(),
        }
        .checked(rho)?;
        ensure_extends(&out, self, rho)?;
        Ok(out)
    }

    /// `(s, F ∪ E)`.
    pub fn add_words<'a, I: IntoIterator<Item = &'a Word>>(
        &self,
        words: I,
        rho: &GroundRep,
    ) -> Result<Condition, PosetError> {
        let mut f = self.f.clone();
        f.extend(words.into_iter().cloned());
        let out = Condition {
            mode: self.mode,
            s: self.s.clone(),
            f,
        }
        .checked(rho)?;
        ensure_extends(&out, self, rho)?;
        Ok(out)
    }

    /// The frozen set a side entry protects: fixed points for hat words,
    /// agreement points `{k : s_a(k) = s_b(k)}` for pair words, and for a
    /// pair of letters in the mad mode the common 1-set.
    pub fn frozen_set(&self, w: &Word, rho: &GroundRep) -> BTreeSet<Nat> {
        match self.mode {
            PosetMode::Cofinitary => crate::eval::fix_points(w, &self.s, rho).into_set(),
            PosetMode::Adp | PosetMode::Edf => {
                let (a, b) = pair_word(w).expect("pair word");
                agreement(&self.s, a, b, None)
            }
            PosetMode::Mad => {
                let (a, b) = pair_word(w).expect("mad pairs are keyed by a b^-1");
                agreement(&self.s, a, b, Some(1))
            }
        }
    }
}

/// Points where `s_a` and `s_b` are both defined and equal (to `value`, when
/// given).
pub fn agreement(s: &Assignment, a: Gen, b: Gen, value: Option<Nat>) -> BTreeSet<Nat> {
    let (Some(ma), Some(mb)) = (s.get(a), s.get(b)) else {
        return BTreeSet::new();
    };
    ma.pairs()
        .filter(|&(n, m)| mb.get(n) == Some(m) && value.is_none_or(|v| v == m))
        .map(|(n, _)| n)
        .collect()
}

fn ensure_extends(p: &Condition, q: &Condition, rho: &GroundRep) -> Result<(), PosetError> {
    if leq(p, q, rho)? {
        Ok(())
    } else {
        Err(PosetError::ContractViolated(
            "freezing check failed on the merged condition".into(),
        ))
    }
}

/// Fixed points of `w` under `new_s` that were not fixed points under `old`.
///
/// Such a point's evaluation path must pass through one of `new_pairs`; each
/// use of a new pair at a letter position pins the path, so back-propagating
/// from that position gives the only candidate start point.
pub fn new_fixed_points(
    w: &Word,
    old: &Assignment,
    new_s: &Assignment,
    new_pairs: &[(Gen, Nat, Nat)],
    rho: &GroundRep,
) -> BTreeSet<Nat> {
    let app: Vec<Letter> = w.letters().iter().rev().copied().collect();
    let mut out = BTreeSet::new();
    for &(g, n, m) in new_pairs {
        for (i, l) in app.iter().enumerate().filter(|(_, l)| l.gen == g) {
            let entry = if l.inv { m } else { n };
            let start = app[..i]
                .iter()
                .rev()
                .try_fold(entry, |x, &l| step(l.inverse(), new_s, rho, x));
            if let Some(x) = start {
                if eval(w, new_s, rho, x) == Some(x) && eval(w, old, rho, x) != Some(x) {
                    out.insert(x);
                }
            }
        }
    }
    out
}

/// `p ≤ q`: `p` extends `q`.
pub fn leq(p: &Condition, q: &Condition, rho: &GroundRep) -> Result<bool, PosetError> {
    if p.mode != q.mode {
        return Err(PosetError::ModeMismatch(p.mode, q.mode));
    }
    if !q.s.is_subset_of(&p.s) || !q.f.is_subset(&p.f) {
        return Ok(false);
    }
    let new = p.s.difference(&q.s);
    if new.is_empty() {
        return Ok(true);
    }
    Ok(match p.mode {
        PosetMode::Cofinitary | PosetMode::Adp => {
            q.f.iter()
                .all(|w| new_fixed_points(w, &q.s, &p.s, &new, rho).is_empty())
        }
        PosetMode::Edf => q.f.iter().filter_map(pair_word).all(|(a, b)| {
            !new.iter().any(|&(g, n, _)| {
                (g == a || g == b) && {
                    let (x, y) = (p.s.get(a).and_then(|m| m.get(n)), p.s.get(b).and_then(|m| m.get(n)));
                    x.is_some() && x == y
                }
            })
        }),
        PosetMode::Mad => {
            let letters: Vec<Gen> = q.f.iter().filter_map(letter_word).collect();
            !new.iter().any(|&(g, n, v)| {
                v == 1
                    && letters.contains(&g)
                    && letters
                        .iter()
                        .any(|&b| b != g && p.s.get(b).and_then(|m| m.get(n)) == Some(1))
            })
        }
    })
}

/// The union of two conditions when it is a condition extending both.
pub fn delta_compatible_merge(p: &Condition, q: &Condition, rho: &GroundRep) -> Result<Merge, PosetError> {
    if p.mode != q.mode {
        return Err(PosetError::ModeMismatch(p.mode, q.mode));
    }
    let Ok(s) = p.s.union(&q.s) else {
        return Ok(Merge::Incompatible);
    };
    let merged = Condition {
        mode: p.mode,
        s,
        f: p.f.union(&q.f).cloned().collect(),
    };
    if merged.validate(rho).is_err() {
        return Ok(Merge::Incompatible);
    }
    if leq(&merged, p, rho)? && leq(&merged, q, rho)? {
        Ok(Merge::Merged(merged))
    } else {
        Ok(Merge::Incompatible)
    }
}
