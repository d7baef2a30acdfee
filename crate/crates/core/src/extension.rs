//! Constructive extension lemmas: one-pair extensions with certified
//! forbidden sets, cover extensions, strong reductions, canonical extensions,
//! and hitting a ground permutation.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::eval::{step, Assignment, GroundPermutation, GroundRep, Nat};
use crate::poset::{leq, letter_word, pair_word, Condition, PosetError, PosetMode};
use crate::words::{Gen, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("{0} is a ground generator")]
    GroundGenerator(Gen),
    #[error("{n} is already in the domain of {gen}")]
    AlreadyInDomain { gen: Gen, n: Nat },
    #[error("{m} is already in the range of {gen}")]
    AlreadyInRange { gen: Gen, m: Nat },
    #[error("{op} is not available in {mode} mode")]
    Unsupported { op: &'static str, mode: PosetMode },
    #[error("no admissible value")]
    NoAdmissibleValue,
    #[error("certificate admitted ({gen}, {n}, {m}) but the extension check rejects it")]
    CertificateUnsound { gen: Gen, n: Nat, m: Nat },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// The values a one-pair extension may use: everything outside `forbidden`
/// (and below `value_limit`, when set). Every value at or above `bound` is
/// admitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionCertificate {
    pub forbidden: BTreeSet<Nat>,
    pub bound: Nat,
    pub value_limit: Option<Nat>,
    /// False when some forbidden value came from a fixed-point scan of a
    /// ground word, which is only complete below the scan horizon.
    pub exact: bool,
}

impl ExtensionCertificate {
    fn new(forbidden: BTreeSet<Nat>, value_limit: Option<Nat>, exact: bool) -> Self {
        let bound = forbidden.last().map_or(0, |&m| m + 1);
        ExtensionCertificate {
            forbidden,
            bound,
            value_limit,
            exact,
        }
    }

    pub fn admits(&self, m: Nat) -> bool {
        !self.forbidden.contains(&m) && self.value_limit.is_none_or(|lim| m < lim)
    }

    /// Least admitted value at or above `floor`, falling back to the least
    /// admitted value overall when the limit leaves nothing above `floor`.
    pub fn choose(&self, floor: Nat) -> Option<Nat> {
        let top = self.value_limit.unwrap_or(Nat::MAX);
        (floor..top)
            .find(|&m| self.admits(m))
            .or_else(|| (0..top.min(floor)).find(|&m| self.admits(m)))
    }
}

/// Applies a letter sequence given in application order.
fn run(app: &[Letter], s: &Assignment, rho: &GroundRep, x: Nat) -> Option<Nat> {
    app.iter().try_fold(x, |y, &l| step(l, s, rho, y))
}

fn run_back(app: &[Letter], s: &Assignment, rho: &GroundRep, x: Nat) -> Option<Nat> {
    app.iter().rev().try_fold(x, |y, &l| step(l.inverse(), s, rho, y))
}

/// Fixed points of a letter sequence (application order). The flag is false
/// when the sequence is purely ground and had to be scanned.
fn seq_fix(app: &[Letter], s: &Assignment, rho: &GroundRep) -> (BTreeSet<Nat>, bool) {
    let Some(pos) = app.iter().position(|l| !rho.is_ground(l.gen)) else {
        let word = Word::reduce(app.iter().rev().copied());
        let fix = crate::eval::fix_points(&word, s, rho);
        let exact = fix.is_exact();
        return (fix.into_set(), exact);
    };
    let l = app[pos];
    let entry: Vec<Nat> = match s.get(l.gen) {
        None => Vec::new(),
        Some(map) if l.inv => map.range().collect(),
        Some(map) => map.domain().collect(),
    };
    let set = entry
        .into_iter()
        .filter_map(|x| run_back(&app[..pos], s, rho, x))
        .filter(|&x| run(app, s, rho, x) == Some(x))
        .collect();
    (set, true)
}

/// Values `m` for which adding `(a, n, m)` could create a new fixed point of
/// `w`. A new fixed point traces a closed path through `w` that uses the new
/// pair at one or more `a`-positions; between two consecutive uses the path
/// only sees old pairs, and each such segment pins `m` or is silent.
fn word_forbidden(w: &Word, a: Gen, n: Nat, s: &Assignment, rho: &GroundRep, out: &mut BTreeSet<Nat>) -> bool {
    let app: Vec<Letter> = w.letters().iter().rev().copied().collect();
    let len = app.len();
    let positions: Vec<usize> = (0..len).filter(|&i| app[i].gen == a).collect();
    let mut exact = true;
    for &i in &positions {
        for &j in &positions {
            let count = if j > i { j - i - 1 } else { len - i - 1 + j };
            let seg: Vec<Letter> = (0..count).map(|t| app[(i + 1 + t) % len]).collect();
            match (app[i].inv, app[j].inv) {
                // a at i sends n to m; a at j needs n again.
                (false, false) => out.extend(run_back(&seg, s, rho, n)),
                // a at i leaves at m; a⁻¹ at j starts from m.
                (false, true) => {
                    if seg.is_empty() {
                        continue;
                    }
                    let (fix, ok) = seq_fix(&seg, s, rho);
                    exact &= ok;
                    out.extend(fix);
                }
                // a⁻¹ at i leaves at n; a⁻¹ at j starts from m.
                (true, true) => out.extend(run(&seg, s, rho, n)),
                // a⁻¹ at i leaves at n; a at j starts from n. Constrains n only.
                (true, false) => {}
            }
        }
    }
    exact
}

fn require_generic(a: Gen, rho: &GroundRep) -> Result<(), ExtensionError> {
    if rho.is_ground(a) {
        Err(ExtensionError::GroundGenerator(a))
    } else {
        Ok(())
    }
}

fn partners(p: &Condition, a: Gen) -> Vec<Gen> {
    p.f.iter()
        .filter_map(pair_word)
        .filter_map(|(x, y)| {
            if x == a {
                Some(y)
            } else if y == a {
                Some(x)
            } else {
                None
            }
        })
        .collect()
}

fn value_of(s: &Assignment, g: Gen, n: Nat) -> Option<Nat> {
    s.get(g).and_then(|m| m.get(n))
}

fn injection_certificate(
    s: &Assignment,
    words: &BTreeSet<Word>,
    a: Gen,
    n: Nat,
    rho: &GroundRep,
) -> ExtensionCertificate {
    let mut forbidden: BTreeSet<Nat> = s.get(a).map(|m| m.range().collect()).unwrap_or_default();
    let mut exact = true;
    for w in words.iter().filter(|w| w.contains_gen(a)) {
        exact &= word_forbidden(w, a, n, s, rho, &mut forbidden);
    }
    ExtensionCertificate::new(forbidden, None, exact)
}

/// Certificate for values `m` with `(s ∪ {(a, n, m)}, F) ≤ (s, F)`.
pub fn domain_extend(p: &Condition, a: Gen, n: Nat, rho: &GroundRep) -> Result<ExtensionCertificate, ExtensionError> {
    require_generic(a, rho)?;
    if value_of(&p.s, a, n).is_some() {
        return Err(ExtensionError::AlreadyInDomain { gen: a, n });
    }
    Ok(match p.mode {
        PosetMode::Cofinitary | PosetMode::Adp => injection_certificate(&p.s, &p.f, a, n, rho),
        PosetMode::Edf => {
            let forbidden = partners(p, a)
                .into_iter()
                .filter_map(|b| value_of(&p.s, b, n))
                .collect();
            ExtensionCertificate::new(forbidden, None, true)
        }
        PosetMode::Mad => {
            let letters: Vec<Gen> = p.f.iter().filter_map(letter_word).collect();
            let clash = letters.contains(&a) && letters.iter().any(|&b| b != a && value_of(&p.s, b, n) == Some(1));
            let forbidden = if clash { BTreeSet::from([1]) } else { BTreeSet::new() };
            ExtensionCertificate::new(forbidden, Some(2), true)
        }
    })
}

/// Certificate for preimages `n` with `(s ∪ {(a, n, m)}, F) ≤ (s, F)`.
///
/// For injections this inverts `s_a`, swaps `a` for `a⁻¹` in every side
/// word, and reuses the domain certificate.
pub fn range_extend(p: &Condition, a: Gen, m: Nat, rho: &GroundRep) -> Result<ExtensionCertificate, ExtensionError> {
    require_generic(a, rho)?;
    if p.s.get(a).is_some_and(|map| map.in_range(m)) {
        return Err(ExtensionError::AlreadyInRange { gen: a, m });
    }
    match p.mode {
        PosetMode::Cofinitary | PosetMode::Adp => {
            let s_bar = p.s.inverted_at(a);
            let f_bar: BTreeSet<Word> = p.f.iter().map(|w| w.substitute(a, Letter::neg(a))).collect();
            Ok(injection_certificate(&s_bar, &f_bar, a, m, rho))
        }
        PosetMode::Edf => {
            let mut forbidden: BTreeSet<Nat> = p.s.get(a).map(|map| map.domain().collect()).unwrap_or_default();
            for b in partners(p, a) {
                if let Some(map) = p.s.get(b) {
                    forbidden.extend(map.preimages(m));
                }
            }
            Ok(ExtensionCertificate::new(forbidden, None, true))
        }
        PosetMode::Mad => Err(ExtensionError::Unsupported {
            op: "range extension",
            mode: p.mode,
        }),
    }
}

fn checked_add(p: &Condition, a: Gen, n: Nat, m: Nat, rho: &GroundRep) -> Result<Condition, ExtensionError> {
    let mut q = p.clone();
    q.s.insert(a, n, m).map_err(PosetError::from)?;
    if leq(&q, p, rho)? {
        Ok(q)
    } else {
        Err(ExtensionError::CertificateUnsound { gen: a, n, m })
    }
}

/// Adds `(a, n, m)` for the least admitted `m ≥ floor`.
pub fn extend_domain(
    p: &Condition,
    a: Gen,
    n: Nat,
    floor: Nat,
    rho: &GroundRep,
) -> Result<(Condition, Nat), ExtensionError> {
    let cert = domain_extend(p, a, n, rho)?;
    let m = cert.choose(floor).ok_or(ExtensionError::NoAdmissibleValue)?;
    Ok((checked_add(p, a, n, m, rho)?, m))
}

/// Adds `(a, n, m)` for the least admitted `n ≥ floor`.
pub fn extend_range(
    p: &Condition,
    a: Gen,
    m: Nat,
    floor: Nat,
    rho: &GroundRep,
) -> Result<(Condition, Nat), ExtensionError> {
    let cert = range_extend(p, a, m, rho)?;
    let n = cert.choose(floor).ok_or(ExtensionError::NoAdmissibleValue)?;
    Ok((checked_add(p, a, n, m, rho)?, n))
}

fn walk(cur: &mut Condition, app: &[Letter], start: Nat, rho: &GroundRep) -> Result<(), ExtensionError> {
    let mut x = start;
    for &l in app {
        x = match step(l, &cur.s, rho, x) {
            Some(y) => y,
            None if l.inv => {
                let (next, n) = extend_range(cur, l.gen, x, 0, rho)?;
                *cur = next;
                n
            }
            None => {
                let (next, m) = extend_domain(cur, l.gen, x, 0, rho)?;
                *cur = next;
                m
            }
        };
    }
    Ok(())
}

/// New pairs `t` on the generic letters of `w` so that `e_w[s ∪ t]` is
/// defined on `c0` and has `c1` in its range, with `(s ∪ t, F) ≤ (s, F)`.
pub fn cover_extend(
    p: &Condition,
    w: &Word,
    c0: &BTreeSet<Nat>,
    c1: &BTreeSet<Nat>,
    rho: &GroundRep,
) -> Result<Assignment, ExtensionError> {
    if p.mode == PosetMode::Mad {
        return Err(ExtensionError::Unsupported {
            op: "cover extension",
            mode: p.mode,
        });
    }
    let mut cur = p.clone();
    let forward: Vec<Letter> = w.letters().iter().rev().copied().collect();
    let backward: Vec<Letter> = w.letters().iter().map(|l| l.inverse()).collect();
    for &c in c0 {
        walk(&mut cur, &forward, c, rho)?;
    }
    for &c in c1 {
        walk(&mut cur, &backward, c, rho)?;
    }
    Assignment::from_triples(cur.s.difference(&p.s)).map_err(|e| PosetError::from(e).into())
}

/// Maximal runs of `w` in application order, split by whether the letter's
/// generator lies in `outer`. Each entry is (in `outer`, letters).
fn runs(w: &Word, outer: &BTreeSet<Gen>) -> Vec<(bool, Vec<Letter>)> {
    let mut out: Vec<(bool, Vec<Letter>)> = Vec::new();
    for &l in w.letters().iter().rev() {
        let side = outer.contains(&l.gen);
        match out.last_mut() {
            Some((s, v)) if *s == side => v.push(l),
            _ => out.push((side, vec![l])),
        }
    }
    out
}

fn seq_domain(app: &[Letter], s: &Assignment, rho: &GroundRep) -> BTreeSet<Nat> {
    let w = Word::reduce(app.iter().rev().copied());
    crate::eval::exact_domain(&w, s, rho).expect("outer runs are generic")
}

/// `(t₀, F ∩ Ŵ_{A₀ ∪ B})`: `t₀ ⊇ s↾A₀` padded so that any extension of it
/// on `A₀` and fresh generators merges back with `p`.
///
/// In every side word the runs over `A₀ ∪ B` between runs over the other
/// generators of `p` get their domains and ranges widened to cover what the
/// neighbouring runs can deliver or demand, so later pairs on `A₀` can never
/// reroute a path that passes through those runs.
pub fn strong_reduction(p: &Condition, a0: &BTreeSet<Gen>, rho: &GroundRep) -> Result<Condition, ExtensionError> {
    let a1: BTreeSet<Gen> = p.oc(rho).difference(a0).copied().collect();
    let mut cur = p.clone();
    match p.mode {
        PosetMode::Cofinitary | PosetMode::Adp => {
            for w in &p.f {
                if rho.generic_occurrences(w).is_disjoint(&a1) {
                    continue;
                }
                let runs = runs(w, &a1);
                for (r, (outer, letters)) in runs.iter().enumerate() {
                    if *outer {
                        continue;
                    }
                    // Range of the outer run applied just before, domain of the one just after.
                    let c0 = match r.checked_sub(1).map(|k| &runs[k]) {
                        Some((true, v)) => seq_domain(&inverse_seq(v), &cur.s, rho),
                        _ => BTreeSet::new(),
                    };
                    let c1 = match runs.get(r + 1) {
                        Some((true, v)) => seq_domain(v, &cur.s, rho),
                        _ => BTreeSet::new(),
                    };
                    let u = Word::reduce(letters.iter().rev().copied());
                    let t = cover_extend(&cur, &u, &c0, &c1, rho)?;
                    cur.s = cur.s.union(&t).map_err(PosetError::from)?;
                }
            }
        }
        PosetMode::Edf => {
            for (x, y) in p.f.iter().filter_map(pair_word) {
                for (inner, outer) in [(x, y), (y, x)] {
                    if a0.contains(&inner) && a1.contains(&outer) {
                        let dom: BTreeSet<Nat> = p.s.get(outer).map(|m| m.domain().collect()).unwrap_or_default();
                        let t = cover_extend(&cur, &Word::gen(inner), &dom, &BTreeSet::new(), rho)?;
                        cur.s = cur.s.union(&t).map_err(PosetError::from)?;
                    }
                }
            }
        }
        PosetMode::Mad => {
            let letters: Vec<Gen> = p.f.iter().filter_map(letter_word).collect();
            for &a in letters.iter().filter(|g| a0.contains(g)) {
                for &b in letters.iter().filter(|g| a1.contains(g)) {
                    let ones: Vec<Nat> =
                        p.s.get(b)
                            .map(|m| m.pairs().filter(|&(_, v)| v == 1).map(|(k, _)| k).collect())
                            .unwrap_or_default();
                    for k in ones {
                        if value_of(&cur.s, a, k).is_none() {
                            cur = checked_add(&cur, a, k, 0, rho)?;
                        }
                    }
                }
            }
        }
    }
    if !leq(&cur, p, rho)? {
        return Err(ExtensionError::Contract("padding does not extend the input".into()));
    }
    let mut out = p.strong_restrict(a0, rho);
    out.s = cur.s.restrict(a0);
    Ok(out)
}

fn inverse_seq(app: &[Letter]) -> Vec<Letter> {
    app.iter().rev().map(|l| l.inverse()).collect()
}

/// `(s^p ∪ s^t, F^p ∪ F^t)` for `t` below the strong reduction of `p` to
/// `A₀` whose material off `A₀` avoids the generators of `p`.
pub fn canonical_extension(
    p: &Condition,
    t: &Condition,
    a0: &BTreeSet<Gen>,
    rho: &GroundRep,
) -> Result<Condition, ExtensionError> {
    let reduction = strong_reduction(p, a0, rho)?;
    if !leq(t, &reduction, rho)? {
        return Err(ExtensionError::Precondition(
            "t does not extend the strong reduction".into(),
        ));
    }
    let outside: BTreeSet<Gen> = p.oc(rho).difference(a0).copied().collect();
    let clash: Vec<Gen> = t.oc(rho).intersection(&outside).copied().collect();
    if !clash.is_empty() {
        return Err(ExtensionError::Precondition(format!(
            "t uses generators {clash:?} of p outside A0"
        )));
    }
    let s =
        p.s.union(&t.s)
            .map_err(|e| ExtensionError::Contract(format!("union is not a function: {e}")))?;
    let out = Condition::new(p.mode, s, p.f.union(&t.f).cloned().collect());
    if out.validate(rho).is_err() || !leq(&out, p, rho)? || !leq(&out, t, rho)? {
        return Err(ExtensionError::Contract(
            "canonical extension fails to extend both inputs".into(),
        ));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HitOutcome {
    Accepted(Condition),
    Rejected,
}

/// Tries to add `(a₀, n, σ(n))`.
pub fn hit_extend(
    p: &Condition,
    a0: Gen,
    sigma: &GroundPermutation,
    n: Nat,
    rho: &GroundRep,
) -> Result<HitOutcome, ExtensionError> {
    if p.mode != PosetMode::Cofinitary {
        return Err(ExtensionError::Unsupported {
            op: "hitting",
            mode: p.mode,
        });
    }
    require_generic(a0, rho)?;
    let m = sigma.apply(n);
    let map = p.s.get(a0);
    if map.is_some_and(|x| x.in_domain(n)) {
        return Err(ExtensionError::AlreadyInDomain { gen: a0, n });
    }
    if map.is_some_and(|x| x.in_range(m)) {
        return Err(ExtensionError::AlreadyInRange { gen: a0, m });
    }
    let mut q = p.clone();
    q.s.insert(a0, n, m).map_err(PosetError::from)?;
    Ok(if leq(&q, p, rho)? {
        HitOutcome::Accepted(q)
    } else {
        HitOutcome::Rejected
    })
}

/// First `n ∈ [from, from + window)` where hitting succeeds, skipping points
/// that violate the preconditions.
pub fn hit_search(
    p: &Condition,
    a0: Gen,
    sigma: &GroundPermutation,
    from: Nat,
    window: Nat,
    rho: &GroundRep,
) -> Result<Option<(Nat, Condition)>, ExtensionError> {
    for n in from..from.saturating_add(window) {
        match hit_extend(p, a0, sigma, n, rho) {
            Ok(HitOutcome::Accepted(q)) => return Ok(Some((n, q))),
            Ok(HitOutcome::Rejected)
            | Err(ExtensionError::AlreadyInDomain { .. })
            | Err(ExtensionError::AlreadyInRange { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// A point beyond which every hit is accepted, when it can be computed
/// exactly: `σ` has fixed-point-free powers and every side word using `a₀`
/// is a power of `a₀`. Then a new fixed point needs a cycle through the new
/// pair, which cannot close once `n` lies outside `dom ∪ ran` of `s_{a₀}` and
/// `σ(n)` outside its range.
pub fn hit_threshold(p: &Condition, a0: Gen, sigma: &GroundPermutation) -> Option<Nat> {
    if !sigma.powers_fixed_point_free() {
        return None;
    }
    let pure =
        p.f.iter()
            .filter(|w| w.contains_gen(a0))
            .all(|w| w.syllables().len() == 1);
    if !pure {
        return None;
    }
    let Some(map) = p.s.get(a0) else {
        return Some(0);
    };
    map.domain()
        .chain(map.range())
        .chain(map.range().map(|m| sigma.unapply(m)))
        .max()
        .map_or(Some(0), |top| Some(top + 1))
}
