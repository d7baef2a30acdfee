//! Partial injections per generator, ground permutations, and word evaluation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Gen, Letter, Word};

pub type Nat = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("{gen}: {n} is already mapped to {old}, cannot map it to {new}")]
    NotFunctional { gen: Gen, n: Nat, old: Nat, new: Nat },
    #[error("table-over-zshift table is not a finite modification of the shift")]
    BadTable,
}

/// A finite partial function on naturals, with a reverse index.
///
/// Injectivity is tracked rather than enforced, since one poset variant works
/// with plain finite functions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialMap {
    fwd: BTreeMap<Nat, Nat>,
    bwd: BTreeMap<Nat, BTreeSet<Nat>>,
}

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Nat, Nat)>>(pairs: I) -> Option<Self> {
        let mut map = PartialMap::new();
        for (n, m) in pairs {
            match map.fwd.get(&n) {
                Some(&old) if old != m => return None,
                _ => map.insert_unchecked(n, m),
            }
        }
        Some(map)
    }

    fn insert_unchecked(&mut self, n: Nat, m: Nat) {
        self.fwd.insert(n, m);
        self.bwd.entry(m).or_default().insert(n);
    }

    pub fn get(&self, n: Nat) -> Option<Nat> {
        self.fwd.get(&n).copied()
    }

    /// The least preimage of `m`; the unique one when the map is injective.
    pub fn preimage(&self, m: Nat) -> Option<Nat> {
        self.bwd.get(&m).and_then(|s| s.first().copied())
    }

    pub fn preimages(&self, m: Nat) -> impl Iterator<Item = Nat> + '_ {
        self.bwd.get(&m).into_iter().flatten().copied()
    }

    pub fn contains_pair(&self, n: Nat, m: Nat) -> bool {
        self.get(n) == Some(m)
    }

    pub fn in_domain(&self, n: Nat) -> bool {
        self.fwd.contains_key(&n)
    }

    pub fn in_range(&self, m: Nat) -> bool {
        self.bwd.contains_key(&m)
    }

    pub fn is_injective(&self) -> bool {
        self.fwd.len() == self.bwd.len()
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Nat, Nat)> + '_ {
        self.fwd.iter().map(|(&n, &m)| (n, m))
    }

    pub fn domain(&self) -> impl Iterator<Item = Nat> + '_ {
        self.fwd.keys().copied()
    }

    pub fn range(&self) -> impl Iterator<Item = Nat> + '_ {
        self.bwd.keys().copied()
    }

    /// Swaps every pair. Only meaningful for injective maps.
    pub fn inverted(&self) -> PartialMap {
        let mut out = PartialMap::new();
        for (n, m) in self.pairs() {
            out.insert_unchecked(m, n);
        }
        out
    }

    pub fn is_subset_of(&self, other: &PartialMap) -> bool {
        self.pairs().all(|(n, m)| other.contains_pair(n, m))
    }
}

/// `s`: a finite partial map for each generic generator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    maps: BTreeMap<Gen, PartialMap>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples<I: IntoIterator<Item = (Gen, Nat, Nat)>>(triples: I) -> Result<Self, MapError> {
        let mut s = Assignment::new();
        for (g, n, m) in triples {
            s.insert(g, n, m)?;
        }
        Ok(s)
    }

    pub fn get(&self, g: Gen) -> Option<&PartialMap> {
        self.maps.get(&g)
    }

    /// Adds `(g, n, m)`. Re-adding an existing pair is a no-op.
    pub fn insert(&mut self, g: Gen, n: Nat, m: Nat) -> Result<(), MapError> {
        let map = self.maps.entry(g).or_default();
        match map.get(n) {
            Some(old) if old == m => Ok(()),
            Some(old) => Err(MapError::NotFunctional { gen: g, n, old, new: m }),
            None => {
                map.insert_unchecked(n, m);
                Ok(())
            }
        }
    }

    pub fn with(&self, g: Gen, n: Nat, m: Nat) -> Result<Assignment, MapError> {
        let mut out = self.clone();
        out.insert(g, n, m)?;
        Ok(out)
    }

    pub fn contains(&self, g: Gen, n: Nat, m: Nat) -> bool {
        self.get(g).is_some_and(|map| map.contains_pair(n, m))
    }

    /// Generators with a nonempty map.
    pub fn support(&self) -> BTreeSet<Gen> {
        self.maps
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(g, _)| *g)
            .collect()
    }

    pub fn maps(&self) -> impl Iterator<Item = (Gen, &PartialMap)> {
        self.maps.iter().filter(|(_, m)| !m.is_empty()).map(|(g, m)| (*g, m))
    }

    pub fn triples(&self) -> impl Iterator<Item = (Gen, Nat, Nat)> + '_ {
        self.maps
            .iter()
            .flat_map(|(&g, map)| map.pairs().map(move |(n, m)| (g, n, m)))
    }

    pub fn len(&self) -> usize {
        self.maps.values().map(PartialMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.maps.iter().all(|(g, map)| match other.get(*g) {
            Some(o) => map.is_subset_of(o),
            None => map.is_empty(),
        })
    }

    /// Triples of `self` missing from `other`.
    pub fn difference(&self, other: &Assignment) -> Vec<(Gen, Nat, Nat)> {
        self.triples().filter(|&(g, n, m)| !other.contains(g, n, m)).collect()
    }

    pub fn union(&self, other: &Assignment) -> Result<Assignment, MapError> {
        let mut out = self.clone();
        for (g, n, m) in other.triples() {
            out.insert(g, n, m)?;
        }
        Ok(out)
    }

    pub fn restrict(&self, gens: &BTreeSet<Gen>) -> Assignment {
        Assignment {
            maps: self
                .maps
                .iter()
                .filter(|(g, m)| gens.contains(g) && !m.is_empty())
                .map(|(g, m)| (*g, m.clone()))
                .collect(),
        }
    }

    /// The assignment with `g`'s map replaced by its inverse.
    pub fn inverted_at(&self, g: Gen) -> Assignment {
        let mut out = self.clone();
        if let Some(map) = out.maps.get_mut(&g) {
            *map = map.inverted();
        }
        out
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        // Keys follow generator order, so g10 comes after g9.
        let mut out = serializer.serialize_map(None)?;
        for (g, map) in self.maps() {
            let pairs: Vec<[Nat; 2]> = map.pairs().map(|(n, m)| [n, m]).collect();
            out.serialize_entry(&g.to_string(), &pairs)?;
        }
        out.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let table: BTreeMap<Gen, Vec<[Nat; 2]>> = BTreeMap::deserialize(deserializer)?;
        let mut s = Assignment::new();
        for (g, pairs) in table {
            for [n, m] in pairs {
                s.insert(g, n, m).map_err(serde::de::Error::custom)?;
            }
        }
        Ok(s)
    }
}

/// Naturals enumerate the integers as 0, −1, 1, −2, 2, …
pub fn nat_to_int(k: Nat) -> i64 {
    if k.is_multiple_of(2) {
        (k / 2) as i64
    } else {
        -(k.div_ceil(2) as i64)
    }
}

pub fn int_to_nat(z: i64) -> Nat {
    if z >= 0 {
        2 * z as Nat
    } else {
        2 * z.unsigned_abs() - 1
    }
}

/// A computable permutation of the naturals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundPermutation {
    Identity,
    /// `z ↦ z + 1` on the integers, transported along the standard pairing.
    ZShift,
    /// The shift with finitely many points rerouted. `table` and `inverse`
    /// agree with each other, and the table's range equals the shift image of
    /// its domain, so the result is still a bijection.
    TableOverZShift {
        table: BTreeMap<Nat, Nat>,
        inverse: BTreeMap<Nat, Nat>,
    },
}

fn shift(n: Nat) -> Nat {
    int_to_nat(nat_to_int(n) + 1)
}

fn unshift(n: Nat) -> Nat {
    int_to_nat(nat_to_int(n) - 1)
}

impl GroundPermutation {
    pub fn table_over_zshift<I: IntoIterator<Item = (Nat, Nat)>>(pairs: I) -> Result<Self, MapError> {
        let mut table = BTreeMap::new();
        let mut inverse = BTreeMap::new();
        for (n, m) in pairs {
            if table.insert(n, m).is_some() || inverse.insert(m, n).is_some() {
                return Err(MapError::BadTable);
            }
        }
        let image: BTreeSet<Nat> = table.keys().map(|&n| shift(n)).collect();
        let range: BTreeSet<Nat> = inverse.keys().copied().collect();
        if image != range {
            return Err(MapError::BadTable);
        }
        Ok(GroundPermutation::TableOverZShift { table, inverse })
    }

    pub fn apply(&self, n: Nat) -> Nat {
        match self {
            GroundPermutation::Identity => n,
            GroundPermutation::ZShift => shift(n),
            GroundPermutation::TableOverZShift { table, .. } => table.get(&n).copied().unwrap_or_else(|| shift(n)),
        }
    }

    pub fn unapply(&self, m: Nat) -> Nat {
        match self {
            GroundPermutation::Identity => m,
            GroundPermutation::ZShift => unshift(m),
            GroundPermutation::TableOverZShift { inverse, .. } => {
                inverse.get(&m).copied().unwrap_or_else(|| unshift(m))
            }
        }
    }

    /// True when every nonzero power is known to be fixed-point free.
    pub fn powers_fixed_point_free(&self) -> bool {
        matches!(self, GroundPermutation::ZShift)
    }
}

/// Config form of a ground permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermutationSpec {
    Identity,
    Zshift,
    TableOverZshift { table: Vec<[Nat; 2]> },
}

impl TryFrom<&PermutationSpec> for GroundPermutation {
    type Error = MapError;

    fn try_from(spec: &PermutationSpec) -> Result<Self, MapError> {
        match spec {
            PermutationSpec::Identity => Ok(GroundPermutation::Identity),
            PermutationSpec::Zshift => Ok(GroundPermutation::ZShift),
            PermutationSpec::TableOverZshift { table } => {
                GroundPermutation::table_over_zshift(table.iter().map(|[n, m]| (*n, *m)))
            }
        }
    }
}

impl From<&GroundPermutation> for PermutationSpec {
    fn from(p: &GroundPermutation) -> Self {
        match p {
            GroundPermutation::Identity => PermutationSpec::Identity,
            GroundPermutation::ZShift => PermutationSpec::Zshift,
            GroundPermutation::TableOverZShift { table, .. } => PermutationSpec::TableOverZshift {
                table: table.iter().map(|(&n, &m)| [n, m]).collect(),
            },
        }
    }
}

pub const DEFAULT_HORIZON: Nat = 10_000;

/// The ground generators and the permutations they stand for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRep {
    table: BTreeMap<Gen, GroundPermutation>,
    /// Caller's promise that every nonidentity word over the ground
    /// generators has finitely many fixed points. Only checked by scanning.
    pub cofinitary_promise: bool,
    pub horizon: Nat,
}

impl Default for GroundRep {
    fn default() -> Self {
        GroundRep {
            table: BTreeMap::new(),
            cofinitary_promise: true,
            horizon: DEFAULT_HORIZON,
        }
    }
}

impl GroundRep {
    /// No ground generators at all.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with(mut self, g: Gen, p: GroundPermutation) -> Self {
        self.table.insert(g, p);
        self
    }

    pub fn get(&self, g: Gen) -> Option<&GroundPermutation> {
        self.table.get(&g)
    }

    pub fn is_ground(&self, g: Gen) -> bool {
        self.table.contains_key(&g)
    }

    pub fn generators(&self) -> BTreeSet<Gen> {
        self.table.keys().copied().collect()
    }

    pub fn has_generic_letter(&self, w: &Word) -> bool {
        w.letters().iter().any(|l| !self.is_ground(l.gen))
    }

    /// Generic generators occurring in `w`.
    pub fn generic_occurrences(&self, w: &Word) -> BTreeSet<Gen> {
        w.letters()
            .iter()
            .map(|l| l.gen)
            .filter(|g| !self.is_ground(*g))
            .collect()
    }

    /// Scans `[0, horizon)` for fixed points of every nonidentity ground word
    /// up to `max_len`; returns the first word found with points at or above
    /// `horizon / 2` (a sign that its fixed set may be infinite).
    pub fn check_promise(&self, max_len: usize) -> Option<Word> {
        let gens: Vec<Gen> = self.table.keys().copied().collect();
        let empty = Assignment::new();
        Word::enumerate_up_to(&gens, max_len)
            .into_iter()
            .skip(1)
            .find(|w| (self.horizon / 2..self.horizon).any(|n| eval(w, &empty, self, n) == Some(n)))
    }
}

/// Read access to the generic pairs, so evaluation can run over other
/// representations than [`Assignment`].
pub trait PairTable {
    fn forward(&self, g: Gen, n: Nat) -> Option<Nat>;
    fn backward(&self, g: Gen, m: Nat) -> Option<Nat>;
}

impl PairTable for Assignment {
    fn forward(&self, g: Gen, n: Nat) -> Option<Nat> {
        self.get(g)?.get(n)
    }

    fn backward(&self, g: Gen, m: Nat) -> Option<Nat> {
        self.get(g)?.preimage(m)
    }
}

/// Applies one letter.
pub fn step<T: PairTable + ?Sized>(l: Letter, s: &T, rho: &GroundRep, x: Nat) -> Option<Nat> {
    if let Some(p) = rho.get(l.gen) {
        return Some(if l.inv { p.unapply(x) } else { p.apply(x) });
    }
    if l.inv {
        s.backward(l.gen, x)
    } else {
        s.forward(l.gen, x)
    }
}

/// `e_w[s, ρ](n)`, applying the rightmost letter first.
pub fn eval<T: PairTable + ?Sized>(w: &Word, s: &T, rho: &GroundRep, n: Nat) -> Option<Nat> {
    w.letters().iter().rev().try_fold(n, |x, &l| step(l, s, rho, x))
}

/// The points of `probe` where `w` is defined.
pub fn eval_domain(w: &Word, s: &Assignment, rho: &GroundRep, probe: &BTreeSet<Nat>) -> BTreeSet<Nat> {
    probe
        .iter()
        .copied()
        .filter(|&n| eval(w, s, rho, n).is_some())
        .collect()
}

/// The image of `probe` under `w`.
pub fn eval_range(w: &Word, s: &Assignment, rho: &GroundRep, probe: &BTreeSet<Nat>) -> BTreeSet<Nat> {
    probe.iter().filter_map(|&n| eval(w, s, rho, n)).collect()
}

/// The full domain of `w`, finite whenever `w` has a generic letter.
///
/// The first generic letter in application order has a finite domain; every
/// point of `dom(e_w)` is carried into it by the ground prefix before it.
pub fn exact_domain(w: &Word, s: &Assignment, rho: &GroundRep) -> Option<BTreeSet<Nat>> {
    let letters = w.letters();
    let pos = letters.iter().rposition(|l| !rho.is_ground(l.gen))?;
    let first = letters[pos];
    let entry: Vec<Nat> = match s.get(first.gen) {
        None => Vec::new(),
        Some(map) if first.inv => map.range().collect(),
        Some(map) => map.domain().collect(),
    };
    // Ground letters applied before `first`, undone in reverse order.
    let prefix = &letters[pos + 1..];
    let mut out = BTreeSet::new();
    for x in entry {
        let start = prefix
            .iter()
            .try_fold(x, |y, &l| step(l.inverse(), s, rho, y))
            .expect("ground letters are total");
        if eval(w, s, rho, start).is_some() {
            out.insert(start);
        }
    }
    Some(out)
}

pub fn exact_range(w: &Word, s: &Assignment, rho: &GroundRep) -> Option<BTreeSet<Nat>> {
    exact_domain(&w.inverse(), s, rho)
}

/// The graph of `w` as a finite relation, when `w` has a generic letter.
pub fn exact_graph(w: &Word, s: &Assignment, rho: &GroundRep) -> Option<BTreeMap<Nat, Nat>> {
    let dom = exact_domain(w, s, rho)?;
    Some(
        dom.into_iter()
            .map(|n| (n, eval(w, s, rho, n).expect("domain point")))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixSet {
    Exact {
        set: BTreeSet<Nat>,
    },
    /// Fixed points found below `horizon`; more may exist beyond it.
    Horizon {
        set: BTreeSet<Nat>,
        horizon: Nat,
    },
}

impl FixSet {
    pub fn set(&self) -> &BTreeSet<Nat> {
        match self {
            FixSet::Exact { set } | FixSet::Horizon { set, .. } => set,
        }
    }

    pub fn into_set(self) -> BTreeSet<Nat> {
        match self {
            FixSet::Exact { set } | FixSet::Horizon { set, .. } => set,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, FixSet::Exact { .. })
    }
}

/// `fix(e_w[s, ρ])`. Exact when `w` has a generic letter or is a nonzero
/// power of a single fixed-point-free ground generator; otherwise a scan.
pub fn fix_points(w: &Word, s: &Assignment, rho: &GroundRep) -> FixSet {
    if let Some(dom) = exact_domain(w, s, rho) {
        let set = dom.into_iter().filter(|&n| eval(w, s, rho, n) == Some(n)).collect();
        return FixSet::Exact { set };
    }
    let syl = w.syllables();
    if let [(g, k)] = syl.as_slice() {
        if *k != 0 && rho.get(*g).is_some_and(GroundPermutation::powers_fixed_point_free) {
            return FixSet::Exact { set: BTreeSet::new() };
        }
    }
    if w.is_empty() {
        // Every point; report the scan window.
        return FixSet::Horizon {
            set: (0..rho.horizon).collect(),
            horizon: rho.horizon,
        };
    }
    FixSet::Horizon {
        set: (0..rho.horizon).filter(|&n| eval(w, s, rho, n) == Some(n)).collect(),
        horizon: rho.horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const A: Gen = Gen(0);
    const B: Gen = Gen(1);
    const Z: Gen = Gen(9);

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn s(triples: &[(Gen, Nat, Nat)]) -> Assignment {
        Assignment::from_triples(triples.iter().copied()).unwrap()
    }

    fn shift_rho() -> GroundRep {
        GroundRep::empty().with(Z, GroundPermutation::ZShift)
    }

    /// The evaluation relation built by relational composition, letter by
    /// letter from the right, over the finite universe `0..bound`.
    fn relation_oracle(w: &Word, s: &Assignment, bound: Nat) -> BTreeSet<(Nat, Nat)> {
        let mut rel: BTreeSet<(Nat, Nat)> = (0..bound).map(|n| (n, n)).collect();
        for l in w.letters().iter().rev() {
            let map = s.get(l.gen).cloned().unwrap_or_default();
            let letter_rel: BTreeSet<(Nat, Nat)> = if l.inv {
                map.pairs().map(|(n, m)| (m, n)).collect()
            } else {
                map.pairs().collect()
            };
            rel = rel
                .iter()
                .flat_map(|&(n, k)| {
                    letter_rel
                        .iter()
                        .filter(move |&&(k2, _)| k2 == k)
                        .map(move |&(_, m)| (n, m))
                })
                .collect();
        }
        rel
    }

    fn random_injection(rng: &mut ChaCha8Rng, pairs: usize, bound: Nat) -> Vec<(Nat, Nat)> {
        let mut dom: Vec<Nat> = (0..bound).collect();
        let mut ran: Vec<Nat> = (0..bound).collect();
        let mut out = Vec::new();
        for _ in 0..pairs.min(bound as usize) {
            let n = dom.swap_remove(rng.gen_range(0..dom.len()));
            let m = ran.swap_remove(rng.gen_range(0..ran.len()));
            out.push((n, m));
        }
        out
    }

    #[test]
    fn eval_examples() {
        let sa = s(&[(A, 0, 1), (A, 1, 2)]);
        assert_eq!(eval(&w("g0^2"), &sa, &GroundRep::empty(), 0), Some(2));
        let sa = s(&[(A, 0, 1)]);
        assert_eq!(eval(&w("g0^-1"), &sa, &GroundRep::empty(), 1), Some(0));
        assert_eq!(eval(&w("g0^-1"), &sa, &GroundRep::empty(), 0), None);
        // Rightmost letter first: g1 g0 sends 0 through a then b.
        let sab = s(&[(A, 0, 1), (B, 1, 5)]);
        assert_eq!(eval(&w("g1 g0"), &sab, &GroundRep::empty(), 0), Some(5));
        assert_eq!(eval(&w("g0 g1"), &sab, &GroundRep::empty(), 0), None);
    }

    #[test]
    fn eval_matches_relational_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let words = Word::enumerate_up_to(&[A, B], 5);
        for _ in 0..60 {
            let mut triples = Vec::new();
            for g in [A, B] {
                let k = rng.gen_range(0..=6);
                triples.extend(random_injection(&mut rng, k, 8).into_iter().map(|(n, m)| (g, n, m)));
            }
            let sa = s(&triples);
            for word in &words {
                let oracle = relation_oracle(word, &sa, 8);
                let ours: BTreeSet<(Nat, Nat)> = (0..8)
                    .filter_map(|n| eval(word, &sa, &GroundRep::empty(), n).map(|m| (n, m)))
                    .collect();
                assert_eq!(ours, oracle, "word {word}");
                if !word.is_empty() {
                    let graph = exact_graph(word, &sa, &GroundRep::empty()).unwrap();
                    assert_eq!(graph.into_iter().collect::<BTreeSet<_>>(), oracle);
                }
            }
        }
    }

    #[test]
    fn domains_and_ranges() {
        let sa = s(&[(A, 3, 5)]);
        let rho = GroundRep::empty();
        assert_eq!(exact_domain(&w("g0"), &sa, &rho), Some(BTreeSet::from([3])));
        assert_eq!(exact_range(&w("g0"), &sa, &rho), Some(BTreeSet::from([5])));
        let probe: BTreeSet<Nat> = (0..50).collect();
        let rho = shift_rho();
        assert_eq!(eval_domain(&w("g9"), &sa, &rho, &probe), probe);
        assert_eq!(exact_domain(&w("g9"), &sa, &rho), None);
    }

    #[test]
    fn mixed_domain_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = shift_rho();
        let words = Word::enumerate_up_to(&[A, B, Z], 4);
        let probe: BTreeSet<Nat> = (0..200).collect();
        for _ in 0..20 {
            let mut triples = Vec::new();
            for g in [A, B] {
                triples.extend(random_injection(&mut rng, 5, 12).into_iter().map(|(n, m)| (g, n, m)));
            }
            let sa = s(&triples);
            for word in &words {
                let Some(dom) = exact_domain(word, &sa, &rho) else {
                    assert!(!rho.has_generic_letter(word));
                    continue;
                };
                assert!(dom.iter().all(|&n| n < 200), "probe too small for {word}");
                assert_eq!(dom, eval_domain(word, &sa, &rho, &probe), "word {word}");
                let fix = fix_points(word, &sa, &rho);
                let scanned: BTreeSet<Nat> = probe
                    .iter()
                    .copied()
                    .filter(|&n| eval(word, &sa, &rho, n) == Some(n))
                    .collect();
                assert_eq!(fix, FixSet::Exact { set: scanned });
            }
        }
    }

    #[test]
    fn fix_point_examples() {
        let sa = s(&[(A, 2, 2), (A, 3, 4)]);
        assert_eq!(
            fix_points(&w("g0"), &sa, &GroundRep::empty()),
            FixSet::Exact {
                set: BTreeSet::from([2])
            }
        );
        let rho = shift_rho();
        assert_eq!(
            fix_points(&w("g9^3"), &Assignment::new(), &rho),
            FixSet::Exact { set: BTreeSet::new() }
        );
    }

    #[test]
    fn zshift_powers_have_no_fixed_points_to_horizon() {
        let p = GroundPermutation::ZShift;
        for n in 0..DEFAULT_HORIZON {
            assert_eq!(p.unapply(p.apply(n)), n);
            let mut x = n;
            for _ in 0..6 {
                x = p.apply(x);
                assert_ne!(x, n);
            }
        }
        let rho = GroundRep {
            horizon: DEFAULT_HORIZON,
            ..shift_rho()
        };
        let scan = fix_points(&w("g9 g9"), &Assignment::new(), &GroundRep { ..rho.clone() });
        assert!(scan.set().is_empty());
        assert_eq!(rho.check_promise(3), None);
    }

    #[test]
    fn pairing_is_a_bijection() {
        for k in 0..1000 {
            assert_eq!(int_to_nat(nat_to_int(k)), k);
        }
        assert_eq!(nat_to_int(1), -1);
        assert_eq!(nat_to_int(2), 1);
        assert_eq!(shift(0), 2);
        assert_eq!(shift(1), 0);
        assert_eq!(shift(3), 1);
    }

    #[test]
    fn table_over_shift() {
        // Reroute 0 ↦ 2 and 2 ↦ 4 as 0 ↦ 4, 2 ↦ 2.
        let p = GroundPermutation::table_over_zshift([(0, 4), (2, 2)]).unwrap();
        for n in 0..500 {
            assert_eq!(p.unapply(p.apply(n)), n);
        }
        assert_eq!(p.apply(2), 2);
        assert!(GroundPermutation::table_over_zshift([(0, 5)]).is_err());
        let spec: PermutationSpec =
            serde_json::from_str(r#"{"kind":"table-over-zshift","table":[[0,4],[2,2]]}"#).unwrap();
        assert_eq!(GroundPermutation::try_from(&spec).unwrap(), p);
        let spec: PermutationSpec = serde_json::from_str(r#"{"kind":"zshift"}"#).unwrap();
        assert_eq!(GroundPermutation::try_from(&spec).unwrap(), GroundPermutation::ZShift);
    }

    #[test]
    fn assignment_json_round_trip() {
        let sa = s(&[(A, 0, 1), (Gen(10), 3, 4), (B, 2, 2)]);
        let text = serde_json::to_string(&sa).unwrap();
        assert_eq!(text, r#"{"g0":[[0,1]],"g1":[[2,2]],"g10":[[3,4]]}"#);
        let back: Assignment = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sa);
        assert!(serde_json::from_str::<Assignment>(r#"{"g0":[[0,1],[0,2]]}"#).is_err());
    }

    #[test]
    fn non_injective_maps_are_tracked() {
        let sa = s(&[(A, 0, 1), (A, 1, 1)]);
        assert!(!sa.get(A).unwrap().is_injective());
        assert!(s(&[(A, 0, 1), (A, 1, 0)]).get(A).unwrap().is_injective());
    }
}
