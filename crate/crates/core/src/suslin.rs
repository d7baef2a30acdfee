//! Localization and Hechler conditions with finitely described infinite
//! parts, their orders and meet constructors, and seeded n-Suslin trials.
//!
//! Tails are affine: a natural sequence is eventually `i ↦ a·i + b`, a set
//! sequence eventually `i ↦ {a_k·i + b_k}`. Two distinct affine terms cross
//! at most once, so past a computable index every comparison is settled by
//! the terms alone and all orders below are decided exactly.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuslinError {
    #[error("invalid condition: {0}")]
    Invalid(String),
    #[error("{reals} reals exceed the width budget {budget}")]
    WidthOverflow { reals: usize, budget: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub slope: u64,
    pub offset: u64,
}

impl Affine {
    pub fn constant(value: u64) -> Self {
        Affine {
            slope: 0,
            offset: value,
        }
    }

    pub fn at(&self, i: u64) -> u64 {
        self.slope.saturating_mul(i).saturating_add(self.offset)
    }
}

/// Least `i₀` past which `t(i) − u(i)` keeps one sign (and is nonzero
/// unless `t = u`).
fn settle(t: Affine, u: Affine) -> u64 {
    let da = t.slope as i128 - u.slope as i128;
    let db = t.offset as i128 - u.offset as i128;
    if da == 0 {
        return 0;
    }
    let (num, den) = if da > 0 { (-db, da) } else { (db, -da) };
    if num < 0 {
        0
    } else {
        (num.div_euclid(den) + 1) as u64
    }
}

fn settle_all<'a, I: IntoIterator<Item = &'a Affine>>(terms: I) -> u64 {
    let terms: Vec<&Affine> = terms.into_iter().collect();
    let mut out = 0;
    for (i, t) in terms.iter().enumerate() {
        for u in &terms[i + 1..] {
            out = out.max(settle(**t, **u));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NatRule {
    Constant { value: u64 },
    Affine { slope: u64, offset: u64 },
}

impl NatRule {
    pub fn term(&self) -> Affine {
        match *self {
            NatRule::Constant { value } => Affine::constant(value),
            NatRule::Affine { slope, offset } => Affine { slope, offset },
        }
    }

    fn from_term(t: Affine) -> Self {
        if t.slope == 0 {
            NatRule::Constant { value: t.offset }
        } else {
            NatRule::Affine {
                slope: t.slope,
                offset: t.offset,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetRule {
    /// Eventually this finite set.
    Constant {
        values: BTreeSet<u64>,
    },
    Affine {
        terms: BTreeSet<Affine>,
    },
}

impl SetRule {
    pub fn terms(&self) -> BTreeSet<Affine> {
        match self {
            SetRule::Constant { values } => values.iter().map(|&v| Affine::constant(v)).collect(),
            SetRule::Affine { terms } => terms.clone(),
        }
    }

    fn from_terms(terms: BTreeSet<Affine>) -> Self {
        if terms.iter().all(|t| t.slope == 0) {
            SetRule::Constant {
                values: terms.iter().map(|t| t.offset).collect(),
            }
        } else {
            SetRule::Affine { terms }
        }
    }
}

/// A total natural sequence: finitely many exceptions over a default rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NatSeq {
    #[serde(default)]
    pub exceptions: BTreeMap<u64, u64>,
    pub default: NatRule,
}

impl NatSeq {
    pub fn rule(default: NatRule) -> Self {
        NatSeq {
            exceptions: BTreeMap::new(),
            default,
        }
    }

    pub fn at(&self, i: u64) -> u64 {
        self.exceptions
            .get(&i)
            .copied()
            .unwrap_or_else(|| self.default.term().at(i))
    }

    /// One past the last exception.
    pub fn bound(&self) -> u64 {
        self.exceptions.keys().next_back().map_or(0, |&k| k + 1)
    }
}

/// A total sequence of finite sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSeq {
    #[serde(default)]
    pub exceptions: BTreeMap<u64, BTreeSet<u64>>,
    pub default: SetRule,
}

impl SetSeq {
    pub fn at(&self, i: u64) -> BTreeSet<u64> {
        match self.exceptions.get(&i) {
            Some(s) => s.clone(),
            None => self.default.terms().iter().map(|t| t.at(i)).collect(),
        }
    }

    pub fn bound(&self) -> u64 {
        self.exceptions.keys().next_back().map_or(0, |&k| k + 1)
    }

    /// Index from which values are the default terms, all distinct.
    fn generic_from(&self) -> u64 {
        self.bound().max(settle_all(&self.default.terms()))
    }
}

/// `ψ(i) ⊆ φ(i)` for every `i`.
pub fn set_seq_leq(psi: &SetSeq, phi: &SetSeq) -> bool {
    let (tp, tf) = (psi.default.terms(), phi.default.terms());
    let k = psi.bound().max(phi.bound()).max(settle_all(tp.iter().chain(&tf)));
    (0..k).all(|i| psi.at(i).is_subset(&phi.at(i))) && tp.is_subset(&tf)
}

/// `g(i) ≤ f(i)` for every `i`.
pub fn nat_seq_leq(g: &NatSeq, f: &NatSeq) -> bool {
    let (tg, tf) = (g.default.term(), f.default.term());
    let k = g.bound().max(f.bound()).max(settle(tg, tf));
    (0..k).all(|i| g.at(i) <= f.at(i)) && tg.at(k) <= tf.at(k) && tg.slope <= tf.slope
}

/// How the finite part `σ` sits inside `φ` below `|σ|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlalomReading {
    /// `φ(i) = σ(i)` for `i < |σ|`.
    #[default]
    Pinned,
    /// `σ(i) ⊆ φ(i)` for `i < |σ|`.
    Pointwise,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocCondition {
    pub sigma: Vec<BTreeSet<u64>>,
    pub phi: SetSeq,
}

impl LocCondition {
    pub fn len(&self) -> u64 {
        self.sigma.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn validate(&self, reading: SlalomReading) -> Result<(), SuslinError> {
        let bad = |m: String| Err(SuslinError::Invalid(m));
        let k = self.len();
        for (i, s) in self.sigma.iter().enumerate() {
            if s.len() != i {
                return bad(format!("sigma({i}) has {} elements", s.len()));
            }
            let p = self.phi.at(i as u64);
            let ok = match reading {
                SlalomReading::Pinned => p == *s,
                SlalomReading::Pointwise => s.is_subset(&p),
            };
            if !ok {
                return bad(format!("phi({i}) does not carry sigma({i})"));
            }
        }
        let g = self.phi.generic_from();
        if let Some(i) = (0..g).find(|&i| self.phi.at(i).len() as u64 > k) {
            return bad(format!("phi({i}) is wider than {k}"));
        }
        if self.phi.default.terms().len() as u64 > k {
            return bad(format!("phi is eventually wider than {k}"));
        }
        Ok(())
    }
}

/// `p ≤ q`: `σ_p` end-extends `σ_q` and `φ_q(i) ⊆ φ_p(i)` everywhere.
pub fn loc_leq(p: &LocCondition, q: &LocCondition) -> bool {
    p.sigma.len() >= q.sigma.len() && p.sigma[..q.sigma.len()] == q.sigma[..] && set_seq_leq(&q.phi, &p.phi)
}

fn union_seq(a: &SetSeq, b: &SetSeq, from: u64, upto: u64) -> SetSeq {
    let exceptions = (from..upto)
        .map(|i| (i, a.at(i).union(&b.at(i)).copied().collect()))
        .collect();
    SetSeq {
        exceptions,
        default: SetRule::from_terms(a.default.terms().union(&b.default.terms()).copied().collect()),
    }
}

/// Greatest common extension under the pinned reading, or `None` when the
/// two conditions are incompatible. The finite part is the longer `σ`,
/// lengthened until the union of the slaloms fits under the width bound.
pub fn loc_meet(p: &LocCondition, q: &LocCondition) -> Option<LocCondition> {
    let (long, short) = if p.sigma.len() >= q.sigma.len() { (p, q) } else { (q, p) };
    if long.sigma[..short.sigma.len()] != short.sigma[..] {
        return None;
    }
    let k = long.len();
    for i in short.len()..k {
        if !short.phi.at(i).is_subset(&long.sigma[i as usize]) {
            return None;
        }
    }
    let terms: BTreeSet<Affine> = long
        .phi
        .default
        .terms()
        .union(&short.phi.default.terms())
        .copied()
        .collect();
    let generic = long.phi.bound().max(short.phi.bound()).max(settle_all(&terms)).max(k);
    let width = |i: u64| long.phi.at(i).union(&short.phi.at(i)).count() as u64;
    // Each level i ≥ |σ| must fit into a new σ(i) of size i, and the final
    // length must bound every later width.
    let tail = terms.len() as u64;
    if (k..generic).any(|i| width(i) > i) || tail > generic {
        return None;
    }
    let new_len = (k..generic).map(width).chain([tail, k]).max().expect("nonempty");
    let mut sigma = long.sigma.clone();
    for i in k..new_len {
        let mut level: BTreeSet<u64> = long.phi.at(i).union(&short.phi.at(i)).copied().collect();
        let mut fill = 0;
        while (level.len() as u64) < i {
            level.insert(fill);
            fill += 1;
        }
        sigma.push(level);
    }
    let mut phi = union_seq(&long.phi, &short.phi, new_len, generic.max(new_len));
    for (i, s) in sigma.iter().enumerate() {
        phi.exceptions.insert(i as u64, s.clone());
    }
    Some(LocCondition { sigma, phi })
}

/// Least `m` with `f(n) ∈ φ(n)` for all `n ≥ m`, or `None` if there is none.
pub fn localizes(phi: &SetSeq, f: &NatSeq) -> Option<u64> {
    let tf = f.default.term();
    let terms = phi.default.terms();
    if !terms.contains(&tf) {
        return None;
    }
    let generic = phi.bound().max(f.bound()).max(settle_all(terms.iter().chain([&tf])));
    let last_miss = (0..generic).rev().find(|&n| !phi.at(n).contains(&f.at(n)));
    Some(last_miss.map_or(0, |n| n + 1))
}

/// A slalom of length `|reals|` catching every real from its length on.
pub fn build_localizing_slalom(reals: &[NatSeq], width_budget: usize) -> Result<LocCondition, SuslinError> {
    if reals.len() > width_budget {
        return Err(SuslinError::WidthOverflow {
            reals: reals.len(),
            budget: width_budget,
        });
    }
    let k = reals.len() as u64;
    let sigma: Vec<BTreeSet<u64>> = (0..k).map(|i| (0..i).collect()).collect();
    let upto = reals.iter().map(NatSeq::bound).max().unwrap_or(0);
    let mut exceptions: BTreeMap<u64, BTreeSet<u64>> = (k..upto)
        .map(|i| (i, reals.iter().map(|f| f.at(i)).collect()))
        .collect();
    for (i, s) in sigma.iter().enumerate() {
        exceptions.insert(i as u64, s.clone());
    }
    let phi = SetSeq {
        exceptions,
        default: SetRule::from_terms(reals.iter().map(|f| f.default.term()).collect()),
    };
    let out = LocCondition { sigma, phi };
    out.validate(SlalomReading::Pinned)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HechlerCondition {
    pub stem: Vec<u64>,
    pub f: NatSeq,
}

impl HechlerCondition {
    pub fn validate(&self) -> Result<(), SuslinError> {
        match (0..self.stem.len()).find(|&i| self.f.at(i as u64) != self.stem[i]) {
            Some(i) => Err(SuslinError::Invalid(format!("f({i}) leaves the stem"))),
            None => Ok(()),
        }
    }
}

/// `p ≤ q`: the stem of `p` end-extends that of `q` and `f_q ≤ f_p`.
pub fn hechler_leq(p: &HechlerCondition, q: &HechlerCondition) -> bool {
    p.stem.len() >= q.stem.len() && p.stem[..q.stem.len()] == q.stem[..] && nat_seq_leq(&q.f, &p.f)
}

/// Longer stem with the pointwise maximum of the two functions, when the
/// longer stem already dominates the other function.
pub fn hechler_meet(p: &HechlerCondition, q: &HechlerCondition) -> Option<HechlerCondition> {
    let (long, short) = if p.stem.len() >= q.stem.len() { (p, q) } else { (q, p) };
    if long.stem[..short.stem.len()] != short.stem[..] {
        return None;
    }
    let k = long.stem.len();
    if (short.stem.len()..k).any(|i| long.stem[i] < short.f.at(i as u64)) {
        return None;
    }
    let (ta, tb) = (long.f.default.term(), short.f.default.term());
    let generic = long.f.bound().max(short.f.bound()).max(settle(ta, tb)).max(k as u64);
    let top = if ta.at(generic) >= tb.at(generic) { ta } else { tb };
    let mut exceptions: BTreeMap<u64, u64> = (0..generic).map(|i| (i, long.f.at(i).max(short.f.at(i)))).collect();
    for (i, &v) in long.stem.iter().enumerate() {
        exceptions.insert(i as u64, v);
    }
    Some(HechlerCondition {
        stem: long.stem.clone(),
        f: NatSeq {
            exceptions,
            default: NatRule::from_term(top),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuslinPoset {
    Hechler,
    Localization,
}

impl std::str::FromStr for SuslinPoset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hechler" | "H" => Ok(SuslinPoset::Hechler),
            "localization" | "L" => Ok(SuslinPoset::Localization),
            _ => Err(format!("unknown poset {s}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub seed: u64,
    /// `incompatible` when no meet was found, `unsound` when the meet
    /// failed to extend an input.
    pub kind: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialReport {
    pub poset: SuslinPoset,
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub failures: u64,
    pub unsound_meets: u64,
    /// The first few failing trials, replayable from their seeds.
    pub examples: Vec<TrialFailure>,
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn random_set<R: Rng>(rng: &mut R, size: usize, values: u64) -> BTreeSet<u64> {
    let mut s = BTreeSet::new();
    while s.len() < size {
        s.insert(rng.gen_range(0..values));
    }
    s
}

fn random_term<R: Rng>(rng: &mut R) -> Affine {
    Affine {
        slope: rng.gen_range(0..3),
        offset: rng.gen_range(0..40),
    }
}

const VALUES: u64 = 60;

/// A localization condition of length `len` whose tail is random with
/// width at most `len`.
fn random_loc<R: Rng>(rng: &mut R, len: u64) -> LocCondition {
    let sigma: Vec<BTreeSet<u64>> = (0..len).map(|i| random_set(rng, i as usize, VALUES)).collect();
    let mut terms = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=len) {
        terms.insert(random_term(rng));
    }
    let mut exceptions: BTreeMap<u64, BTreeSet<u64>> = (len..len + rng.gen_range(0..6))
        .map(|i| {
            let width = rng.gen_range(0..=len) as usize;
            (i, random_set(rng, width, VALUES))
        })
        .collect();
    for (i, s) in sigma.iter().enumerate() {
        exceptions.insert(i as u64, s.clone());
    }
    LocCondition {
        sigma,
        phi: SetSeq {
            exceptions,
            default: SetRule::from_terms(terms),
        },
    }
}

/// A random `(σ, φ) ≤ q` of length `len`, often filling every slalom level
/// to full width.
fn random_loc_extension<R: Rng>(rng: &mut R, q: &LocCondition, len: u64) -> LocCondition {
    let full = rng.gen_bool(0.5);
    let mut sigma = q.sigma.clone();
    for i in q.len()..len {
        let mut level = q.phi.at(i);
        while (level.len() as u64) < i {
            level.insert(rng.gen_range(0..VALUES));
        }
        sigma.push(level);
    }
    let mut terms = q.phi.default.terms();
    while (terms.len() as u64) < len && (full || rng.gen_bool(0.5)) {
        terms.insert(random_term(rng));
    }
    let upto = q.phi.bound().max(len) + rng.gen_range(0..6);
    let mut exceptions = BTreeMap::new();
    for i in len..upto {
        let mut s = q.phi.at(i);
        let target = if full { len } else { rng.gen_range(s.len() as u64..=len) };
        while (s.len() as u64) < target {
            s.insert(rng.gen_range(0..VALUES));
        }
        exceptions.insert(i, s);
    }
    for (i, s) in sigma.iter().enumerate() {
        exceptions.insert(i as u64, s.clone());
    }
    LocCondition {
        sigma,
        phi: SetSeq {
            exceptions,
            default: SetRule::from_terms(terms),
        },
    }
}

/// `(τ, χ)` agreeing with `q = (τ, ψ)` below `agree` and random above,
/// often at full width.
fn random_loc_variant<R: Rng>(rng: &mut R, q: &LocCondition, agree: u64) -> LocCondition {
    let len = q.len();
    let full = rng.gen_bool(0.5);
    let mut terms = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=len) {
        terms.insert(random_term(rng));
    }
    let mut exceptions: BTreeMap<u64, BTreeSet<u64>> = (0..agree).map(|i| (i, q.phi.at(i))).collect();
    for i in agree..agree + rng.gen_range(0..6) {
        let width = if full { len } else { rng.gen_range(0..=len) };
        exceptions.insert(i, random_set(rng, width as usize, VALUES));
    }
    LocCondition {
        sigma: q.sigma.clone(),
        phi: SetSeq {
            exceptions,
            default: SetRule::from_terms(terms),
        },
    }
}

fn random_nat_seq<R: Rng>(rng: &mut R, from: u64, extra: u64) -> NatSeq {
    NatSeq {
        exceptions: (from..from + extra).map(|i| (i, rng.gen_range(0..VALUES))).collect(),
        default: NatRule::from_term(random_term(rng)),
    }
}

fn random_hechler<R: Rng>(rng: &mut R, len: usize) -> HechlerCondition {
    let stem: Vec<u64> = (0..len).map(|_| rng.gen_range(0..20)).collect();
    let extra = rng.gen_range(0..5);
    let mut f = random_nat_seq(rng, len as u64, extra);
    for (i, &v) in stem.iter().enumerate() {
        f.exceptions.insert(i as u64, v);
    }
    HechlerCondition { stem, f }
}

fn random_hechler_extension<R: Rng>(rng: &mut R, q: &HechlerCondition, len: usize) -> HechlerCondition {
    let mut stem = q.stem.clone();
    for i in q.stem.len()..len {
        stem.push(q.f.at(i as u64) + rng.gen_range(0..5));
    }
    let tq = q.f.default.term();
    let top = Affine {
        slope: tq.slope + rng.gen_range(0..2),
        offset: tq.offset + rng.gen_range(0..5),
    };
    let upto = q.f.bound().max(len as u64) + rng.gen_range(0..5);
    let mut exceptions: BTreeMap<u64, u64> = (len as u64..upto)
        .map(|i| (i, q.f.at(i) + rng.gen_range(0..5)))
        .collect();
    for (i, &v) in stem.iter().enumerate() {
        exceptions.insert(i as u64, v);
    }
    HechlerCondition {
        stem,
        f: NatSeq {
            exceptions,
            default: NatRule::from_term(top),
        },
    }
}

fn random_hechler_variant<R: Rng>(rng: &mut R, q: &HechlerCondition, agree: u64) -> HechlerCondition {
    let extra = rng.gen_range(0..5);
    let mut h = random_nat_seq(rng, agree, extra);
    for i in 0..agree {
        h.exceptions.insert(i, q.f.at(i));
    }
    HechlerCondition {
        stem: q.stem.clone(),
        f: h,
    }
}

/// Outcome of one trial: `Ok(())`, or the failure kind.
fn one_trial(poset: SuslinPoset, n: u64, seed: u64) -> Result<(), &'static str> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match poset {
        SuslinPoset::Hechler => {
            let t = rng.gen_range(0..5);
            let q = random_hechler(&mut rng, t);
            let extra = rng.gen_range(0..4);
            let p = random_hechler_extension(&mut rng, &q, t + extra);
            let r = random_hechler_variant(&mut rng, &q, n * p.stem.len() as u64);
            debug_assert!(p.validate().is_ok() && q.validate().is_ok() && r.validate().is_ok());
            debug_assert!(hechler_leq(&p, &q));
            match hechler_meet(&p, &r) {
                None => Err("incompatible"),
                Some(m) if m.validate().is_ok() && hechler_leq(&m, &p) && hechler_leq(&m, &r) => Ok(()),
                Some(_) => Err("unsound"),
            }
        }
        SuslinPoset::Localization => {
            let t = rng.gen_range(0..5);
            let q = random_loc(&mut rng, t);
            let extra = rng.gen_range(0..4);
            let p = random_loc_extension(&mut rng, &q, t + extra);
            let r = random_loc_variant(&mut rng, &q, n * p.len());
            debug_assert!(q.validate(SlalomReading::Pinned).is_ok());
            debug_assert!(p.validate(SlalomReading::Pinned).is_ok());
            debug_assert!(r.validate(SlalomReading::Pinned).is_ok());
            debug_assert!(loc_leq(&p, &q));
            match loc_meet(&p, &r) {
                None => Err("incompatible"),
                Some(m) if m.validate(SlalomReading::Pinned).is_ok() && loc_leq(&m, &p) && loc_leq(&m, &r) => Ok(()),
                Some(_) => Err("unsound"),
            }
        }
    }
}

/// Random triples `p ≤ q`, `r` agreeing with `q` below `n·|p|`; counts the
/// trials where the meet constructor finds no common extension of `p` and
/// `r`, or returns one that does not extend both.
pub fn n_suslin_trial(poset: SuslinPoset, n: u64, samples: u64, seed: u64) -> TrialReport {
    let mut report = TrialReport {
        poset,
        n,
        samples,
        seed,
        failures: 0,
        unsound_meets: 0,
        examples: Vec::new(),
    };
    for trial in 0..samples {
        let s = trial_seed(seed, trial);
        if let Err(kind) = one_trial(poset, n, s) {
            report.failures += 1;
            if kind == "unsound" {
                report.unsound_meets += 1;
            }
            if report.examples.len() < 10 {
                report.examples.push(TrialFailure { trial, seed: s, kind });
            }
        }
    }
    report
}

/// The sampled conditions of a trial, for replaying it.
pub fn replay_loc(n: u64, seed: u64) -> (LocCondition, LocCondition, LocCondition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(0..5);
    let q = random_loc(&mut rng, t);
    let extra = rng.gen_range(0..4);
    let p = random_loc_extension(&mut rng, &q, t + extra);
    let r = random_loc_variant(&mut rng, &q, n * p.len());
    (p, q, r)
}
