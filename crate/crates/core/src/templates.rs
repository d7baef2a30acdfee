//! Finite two-sided templates: a linear order, an ideal family `I` and a
//! split `L = L0 ⊔ L1`, with the axiom checker, `L0`-closure, depth and
//! rank, restriction, and the Brendle layout over surrogate cardinals.
//!
//! Elements are stored in increasing order, so `x < y` is index order and
//! `L_x` is the prefix `[0, x)`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ELEMENT_CAP: usize = 5000;
pub const DEFAULT_IDEAL_CAP: usize = 1 << 18;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("order is not a strict total order at {0} / {1}")]
    NotTotalOrder(String, String),
    #[error("L0 and L1 do not partition the elements at {0}")]
    NotPartition(String),
    #[error("set is not a member of I")]
    NotInIdeal,
    #[error("{what} exceeds the cap of {cap}")]
    TooLarge { what: &'static str, cap: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause")]
pub enum AxiomViolation {
    /// `I` lacks ∅ or `L`, or is not closed under `∪` / `∩`.
    #[serde(rename = "1")]
    Lattice {
        detail: String,
        a: Vec<String>,
        b: Vec<String>,
    },
    /// No member of `I` below `y` contains `x`.
    #[serde(rename = "2")]
    Cover { x: String, y: String },
    /// `A ∩ L_x ∉ I`.
    #[serde(rename = "3")]
    Cut { a: Vec<String>, x: String },
    /// An `L1`-trace whose depth exceeds its size.
    #[serde(rename = "4")]
    IllFounded { a: Vec<String>, b: Vec<String> },
    /// A member of `I` that is not `L0`-closed.
    #[serde(rename = "5")]
    NotClosed { a: Vec<String>, missing: String },
}

impl AxiomViolation {
    pub fn clause(&self) -> u8 {
        match self {
            AxiomViolation::Lattice { .. } => 1,
            AxiomViolation::Cover { .. } => 2,
            AxiomViolation::Cut { .. } => 3,
            AxiomViolation::IllFounded { .. } => 4,
            AxiomViolation::NotClosed { .. } => 5,
        }
    }
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Lattice { detail, a, b } => write!(f, "clause 1: {detail} of {a:?} and {b:?}"),
            AxiomViolation::Cover { x, y } => write!(f, "clause 2: no member below {y} contains {x}"),
            AxiomViolation::Cut { a, x } => write!(f, "clause 3: {a:?} cut below {x} is not in I"),
            AxiomViolation::IllFounded { a, b } => write!(f, "clause 4: {a:?} / {b:?}"),
            AxiomViolation::NotClosed { a, missing } => write!(f, "clause 5: {a:?} lacks {missing}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TemplateOrder {
    labels: Vec<String>,
    l1: FixedBitSet,
    ideal: Vec<FixedBitSet>,
    members: HashSet<FixedBitSet>,
}

impl PartialEq for TemplateOrder {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.l1 == other.l1 && self.ideal == other.ideal
    }
}

fn prefix(n: usize, end: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..end);
    s
}

impl TemplateOrder {
    /// `labels` in increasing order; `ideal` is deduplicated and sorted.
    pub fn new(labels: Vec<String>, l1: FixedBitSet, ideal: Vec<FixedBitSet>) -> Result<Self, TemplateError> {
        let n = labels.len();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(TemplateError::DuplicateElement(l.clone()));
            }
        }
        let mut l1 = l1;
        l1.grow(n);
        if l1.len() != n {
            return Err(TemplateError::BadParams(
                "L1 mentions positions beyond the order".into(),
            ));
        }
        let mut members = HashSet::with_capacity(ideal.len());
        let mut sets = Vec::with_capacity(ideal.len());
        for mut s in ideal {
            s.grow(n);
            if s.len() != n {
                return Err(TemplateError::BadParams(
                    "member of I mentions positions beyond the order".into(),
                ));
            }
            if members.insert(s.clone()) {
                sets.push(s);
            }
        }
        sets.sort_by(|a, b| a.count_ones(..).cmp(&b.count_ones(..)).then_with(|| a.cmp(b)));
        Ok(TemplateOrder {
            labels,
            l1,
            ideal: sets,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn l1(&self) -> &FixedBitSet {
        &self.l1
    }

    pub fn l0(&self) -> FixedBitSet {
        let mut s = prefix(self.len(), self.len());
        s.difference_with(&self.l1);
        s
    }

    pub fn ideal(&self) -> &[FixedBitSet] {
        &self.ideal
    }

    pub fn contains(&self, a: &FixedBitSet) -> bool {
        self.members.contains(a)
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn whole(&self) -> FixedBitSet {
        prefix(self.len(), self.len())
    }

    /// `L_x = {z : z < x}`.
    pub fn below(&self, x: usize) -> FixedBitSet {
        prefix(self.len(), x)
    }

    pub fn set_of<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Result<FixedBitSet, TemplateError> {
        let mut s = self.empty_set();
        for name in names {
            let i = self
                .labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| TemplateError::UnknownElement(name.into()))?;
            s.insert(i);
        }
        Ok(s)
    }

    pub fn names(&self, a: &FixedBitSet) -> Vec<String> {
        a.ones().map(|i| self.labels[i].clone()).collect()
    }

    /// Least `B ⊇ A` with `L_x ∩ L0 ⊆ B` for every `x ∈ B`. Because each
    /// `L_x` is a prefix, one pass up to `max A` reaches the fixpoint.
    pub fn closure(&self, a: &FixedBitSet) -> FixedBitSet {
        let mut out = a.clone();
        out.grow(self.len());
        if let Some(top) = a.maximum() {
            let mut low = self.below(top);
            low.difference_with(&self.l1);
            out.union_with(&low);
        }
        out
    }

    fn trace(&self, a: &FixedBitSet) -> FixedBitSet {
        let mut t = a.clone();
        t.intersect_with(&self.l1);
        t
    }

    /// Depth of every distinct `L1`-trace, longest strict-inclusion chain
    /// below it.
    fn trace_depths(&self) -> (Vec<FixedBitSet>, Vec<usize>) {
        let mut traces: Vec<FixedBitSet> = self.ideal.iter().map(|a| self.trace(a)).collect();
        traces.sort_by(|a, b| a.count_ones(..).cmp(&b.count_ones(..)).then_with(|| a.cmp(b)));
        traces.dedup();
        let counts: Vec<usize> = traces.iter().map(|t| t.count_ones(..)).collect();
        let mut depth = vec![0usize; traces.len()];
        for i in 0..traces.len() {
            let mut d = 0;
            for j in 0..i {
                if counts[j] < counts[i] && depth[j] + 1 > d && traces[j].is_subset(&traces[i]) {
                    d = depth[j] + 1;
                }
            }
            depth[i] = d;
        }
        (traces, depth)
    }

    /// `Dp(A)`: 0 on `L0`-sets, else one more than the deepest member whose
    /// `L1`-trace is strictly inside that of `A`.
    pub fn depth(&self, a: &FixedBitSet) -> Result<usize, TemplateError> {
        if !self.contains(a) {
            return Err(TemplateError::NotInIdeal);
        }
        let t = self.trace(a);
        let (traces, depth) = self.trace_depths();
        let i = traces.iter().position(|s| *s == t).expect("trace of a member");
        Ok(depth[i])
    }

    pub fn rank(&self) -> Result<usize, TemplateError> {
        self.depth(&self.whole())
    }

    /// Induced template on `A`: `I↾A = {A ∩ B : B ∈ I}`.
    pub fn restrict(&self, a: &FixedBitSet) -> TemplateOrder {
        let keep: Vec<usize> = a.ones().filter(|&i| i < self.len()).collect();
        let m = keep.len();
        let squeeze = |s: &FixedBitSet| -> FixedBitSet {
            let mut out = FixedBitSet::with_capacity(m);
            for (j, &i) in keep.iter().enumerate() {
                if s.contains(i) {
                    out.insert(j);
                }
            }
            out
        };
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let ideal = self.ideal.iter().map(&squeeze).collect();
        TemplateOrder::new(labels, squeeze(&self.l1), ideal).expect("restriction of a valid template")
    }

    /// All five template clauses, scanned exhaustively. At most one witness
    /// per clause.
    pub fn check_axioms(&self) -> Result<(), Vec<AxiomViolation>> {
        let mut out = Vec::new();
        if let Some(v) = self.clause_lattice() {
            out.push(v);
        }
        if let Some(v) = self.clause_cover() {
            out.push(v);
        }
        if let Some(v) = self.clause_cut() {
            out.push(v);
        }
        if let Some(v) = self.clause_well_founded() {
            out.push(v);
        }
        if let Some(v) = self.clause_closed() {
            out.push(v);
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn clause_lattice(&self) -> Option<AxiomViolation> {
        let empty = self.empty_set();
        for (s, what) in [(&empty, "missing empty set"), (&self.whole(), "missing whole order")] {
            if !self.contains(s) {
                return Some(AxiomViolation::Lattice {
                    detail: what.into(),
                    a: self.names(s),
                    b: Vec::new(),
                });
            }
        }
        // Every member is a union of join-irreducibles and an intersection
        // of meet-irreducibles, so closing against those suffices.
        let (joins, meets) = self.irreducibles();
        let mut buf = self.empty_set();
        for a in &self.ideal {
            for &g in &joins {
                buf.clone_from(a);
                buf.union_with(&self.ideal[g]);
                if !self.members.contains(&buf) {
                    return Some(AxiomViolation::Lattice {
                        detail: "union".into(),
                        a: self.names(a),
                        b: self.names(&self.ideal[g]),
                    });
                }
            }
            for &m in &meets {
                buf.clone_from(a);
                buf.intersect_with(&self.ideal[m]);
                if !self.members.contains(&buf) {
                    return Some(AxiomViolation::Lattice {
                        detail: "intersection".into(),
                        a: self.names(a),
                        b: self.names(&self.ideal[m]),
                    });
                }
            }
        }
        None
    }

    /// Members that are not the union of the members strictly inside them,
    /// and members that are not the intersection of those strictly
    /// containing them.
    fn irreducibles(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.ideal.len();
        let counts: Vec<usize> = self.ideal.iter().map(|a| a.count_ones(..)).collect();
        let mut joins = Vec::new();
        let mut meets = Vec::new();
        for i in 0..n {
            let mut below = self.empty_set();
            let mut above = self.whole();
            for j in 0..n {
                if counts[j] < counts[i] && self.ideal[j].is_subset(&self.ideal[i]) {
                    below.union_with(&self.ideal[j]);
                } else if counts[j] > counts[i] && self.ideal[i].is_subset(&self.ideal[j]) {
                    above.intersect_with(&self.ideal[j]);
                }
            }
            if below != self.ideal[i] {
                joins.push(i);
            }
            if above != self.ideal[i] {
                meets.push(i);
            }
        }
        (joins, meets)
    }

    fn clause_cover(&self) -> Option<AxiomViolation> {
        for y in self.l1.ones() {
            let mut reach = self.empty_set();
            for a in &self.ideal {
                if a.maximum().is_none_or(|m| m < y) {
                    reach.union_with(a);
                }
            }
            if let Some(x) = (0..y).find(|&x| !reach.contains(x)) {
                return Some(AxiomViolation::Cover {
                    x: self.labels[x].clone(),
                    y: self.labels[y].clone(),
                });
            }
        }
        None
    }

    fn clause_cut(&self) -> Option<AxiomViolation> {
        let mut buf = self.empty_set();
        for a in &self.ideal {
            for x in self.l1.ones().filter(|&x| !a.contains(x)) {
                buf.clone_from(a);
                buf.remove_range(x..);
                if !self.members.contains(&buf) {
                    return Some(AxiomViolation::Cut {
                        a: self.names(a),
                        x: self.labels[x].clone(),
                    });
                }
            }
        }
        None
    }

    /// Depths are computed along increasing trace size, so a strict chain
    /// of traces can never be longer than the trace at its top.
    fn clause_well_founded(&self) -> Option<AxiomViolation> {
        let (traces, depth) = self.trace_depths();
        for (t, d) in traces.iter().zip(&depth) {
            if *d > t.count_ones(..) {
                return Some(AxiomViolation::IllFounded {
                    a: self.names(t),
                    b: Vec::new(),
                });
            }
        }
        None
    }

    fn clause_closed(&self) -> Option<AxiomViolation> {
        for a in &self.ideal {
            let c = self.closure(a);
            if let Some(m) = c.difference(a).next() {
                return Some(AxiomViolation::NotClosed {
                    a: self.names(a),
                    missing: self.labels[m].clone(),
                });
            }
        }
        None
    }
}

/// Smallest family containing `generators`, ∅ and `L` that is closed
/// under `∪` and `∩`. Unions are closed by a worklist over generators;
/// intersections of generators are fed back until they are all unions,
/// after which distributivity closes the family under `∩`.
pub fn lattice_closure(n: usize, generators: Vec<FixedBitSet>, cap: usize) -> Result<Vec<FixedBitSet>, TemplateError> {
    let mut gens: Vec<FixedBitSet> = Vec::new();
    let mut gen_set: HashSet<FixedBitSet> = HashSet::new();
    let mut push_gen = |s: FixedBitSet, gens: &mut Vec<FixedBitSet>| {
        if !s.is_clear() && gen_set.insert(s.clone()) {
            gens.push(s);
        }
    };
    for g in generators {
        push_gen(g, &mut gens);
    }
    push_gen(prefix(n, n), &mut gens);
    loop {
        let mut family: HashSet<FixedBitSet> = HashSet::new();
        let mut work = vec![FixedBitSet::with_capacity(n)];
        family.insert(work[0].clone());
        while let Some(s) = work.pop() {
            for g in &gens {
                if g.is_subset(&s) {
                    continue;
                }
                let mut t = s.clone();
                t.union_with(g);
                if family.insert(t.clone()) {
                    if family.len() > cap {
                        return Err(TemplateError::TooLarge {
                            what: "ideal family",
                            cap,
                        });
                    }
                    work.push(t);
                }
            }
        }
        let mut fresh = Vec::new();
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                let mut t = a.clone();
                t.intersect_with(b);
                if !family.contains(&t) {
                    fresh.push(t);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(family.into_iter().collect());
        }
        for t in fresh {
            push_gen(t, &mut gens);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LessSpec {
    Pairs(Vec<(String, String)>),
    Named(String),
}

/// JSON shape of a template: ids, the order as `"by-rank"` (listing order)
/// or explicit `[x, y]` pairs meaning `x < y`, and the family and split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateFile {
    pub elements: Vec<String>,
    pub less: LessSpec,
    #[serde(rename = "I")]
    pub ideal: Vec<Vec<String>>,
    #[serde(rename = "L0")]
    pub l0: Vec<String>,
    #[serde(rename = "L1")]
    pub l1: Vec<String>,
}

impl TemplateFile {
    pub fn from_template(t: &TemplateOrder) -> Self {
        TemplateFile {
            elements: t.labels.clone(),
            less: LessSpec::Named("by-rank".into()),
            ideal: t.ideal.iter().map(|a| t.names(a)).collect(),
            l0: t.names(&t.l0()),
            l1: t.names(&t.l1),
        }
    }

    pub fn into_template(self) -> Result<TemplateOrder, TemplateError> {
        let n = self.elements.len();
        let labels = match &self.less {
            LessSpec::Named(s) if s == "by-rank" => self.elements.clone(),
            LessSpec::Named(s) => return Err(TemplateError::BadParams(format!("unknown order {s}"))),
            LessSpec::Pairs(pairs) => sort_by_pairs(&self.elements, pairs)?,
        };
        let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        if index.len() != n {
            return Err(TemplateError::DuplicateElement("in element list".into()));
        }
        let to_set = |names: &[String]| -> Result<FixedBitSet, TemplateError> {
            let mut s = FixedBitSet::with_capacity(n);
            for name in names {
                s.insert(
                    *index
                        .get(name.as_str())
                        .ok_or_else(|| TemplateError::UnknownElement(name.clone()))?,
                );
            }
            Ok(s)
        };
        let l0 = to_set(&self.l0)?;
        let l1 = to_set(&self.l1)?;
        if let Some(i) = (0..n).find(|&i| l0.contains(i) == l1.contains(i)) {
            return Err(TemplateError::NotPartition(labels[i].clone()));
        }
        let ideal = self.ideal.iter().map(|a| to_set(a)).collect::<Result<Vec<_>, _>>()?;
        TemplateOrder::new(labels, l1, ideal)
    }
}

fn sort_by_pairs(elements: &[String], pairs: &[(String, String)]) -> Result<Vec<String>, TemplateError> {
    let n = elements.len();
    let index: HashMap<&str, usize> = elements.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut less = vec![vec![false; n]; n];
    for (x, y) in pairs {
        let i = *index
            .get(x.as_str())
            .ok_or_else(|| TemplateError::UnknownElement(x.clone()))?;
        let j = *index
            .get(y.as_str())
            .ok_or_else(|| TemplateError::UnknownElement(y.clone()))?;
        less[i][j] = true;
    }
    // A strict total order is exactly one where ranking by predecessor
    // count is a bijection consistent with every pair.
    let rank: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| less[i][j]).count()).collect();
    for i in 0..n {
        for j in 0..n {
            let ok = if i == j {
                !less[i][j]
            } else {
                less[i][j] == (rank[i] < rank[j]) && less[i][j] != less[j][i]
            };
            if !ok || (i != j && rank[i] == rank[j]) {
                return Err(TemplateError::NotTotalOrder(elements[i].clone(), elements[j].clone()));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| rank[i]);
    Ok(order.into_iter().map(|i| elements[i].clone()).collect())
}

/// A value of `λ* ∪ λ`. Negatives come first and run in reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signed {
    pub value: u32,
    pub neg: bool,
}

impl Signed {
    pub fn pos(value: u32) -> Self {
        Signed { value, neg: false }
    }

    pub fn neg(value: u32) -> Self {
        Signed { value, neg: true }
    }
}

impl Ord for Signed {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.neg, other.neg) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.value.cmp(&other.value),
            (true, true) => other.value.cmp(&self.value),
        }
    }
}

impl PartialOrd for Signed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Signed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "-{}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BrendlePosition(pub Vec<Signed>);

impl BrendlePosition {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncate(&self, len: usize) -> BrendlePosition {
        BrendlePosition(self.0[..len].to_vec())
    }

    fn is_proper_prefix_of(&self, other: &BrendlePosition) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }
}

impl Ord for BrendlePosition {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else if self.is_proper_prefix_of(other) {
            if other.0[self.len()].neg {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else if other.is_proper_prefix_of(self) {
            if self.0[other.len()].neg {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        } else {
            let n = (0..).find(|&k| self.0[k] != other.0[k]).expect("neither is a prefix");
            self.0[n].cmp(&other.0[n])
        }
    }
}

impl PartialOrd for BrendlePosition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BrendlePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Surrogate sizes `λ_0 < λ_1 < …`, a surrogate for `ω₁`, the size of the
/// union `λ` (at least the largest level), and for each level `n` a class
/// map `λ_n* → ω₁` that agrees with every lower level on its domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrendleParams {
    pub lambdas: Vec<u32>,
    pub omega1: u32,
    #[serde(default)]
    pub lambda: Option<u32>,
    pub partitions: Vec<Vec<u32>>,
}

impl BrendleParams {
    /// Class maps drawn once over the top level and restricted downwards.
    pub fn seeded(lambdas: Vec<u32>, omega1: u32, seed: u64) -> Result<Self, TemplateError> {
        if omega1 == 0 {
            return Err(TemplateError::BadParams("omega1 surrogate must be at least 1".into()));
        }
        let top = lambdas.iter().copied().max().unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes: Vec<u32> = (0..top).map(|_| rng.gen_range(0..omega1)).collect();
        let partitions = lambdas.iter().map(|&l| classes[..l as usize].to_vec()).collect();
        let p = BrendleParams {
            lambdas,
            omega1,
            lambda: None,
            partitions,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        let bad = |m: &str| Err(TemplateError::BadParams(m.into()));
        if self.lambdas.is_empty() {
            return bad("need at least one level");
        }
        if self.lambdas[0] == 0 {
            return bad("level sizes must be at least 1");
        }
        if self.lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("level sizes must strictly increase");
        }
        if self.omega1 == 0 {
            return bad("omega1 surrogate must be at least 1");
        }
        if self.lambda.is_some_and(|l| l < self.top()) {
            return bad("union size is below the largest level");
        }
        if self.partitions.len() != self.lambdas.len() {
            return bad("need one class map per level");
        }
        for (n, part) in self.partitions.iter().enumerate() {
            if part.len() != self.lambdas[n] as usize {
                return bad("class map size differs from its level");
            }
            if part.iter().any(|&c| c >= self.omega1) {
                return bad("class beyond the omega1 surrogate");
            }
            if n > 0 && part[..self.partitions[n - 1].len()] != self.partitions[n - 1][..] {
                return bad("class maps are not coherent across levels");
            }
        }
        Ok(())
    }

    fn top(&self) -> u32 {
        *self.lambdas.last().expect("validated")
    }

    /// Size of the union `λ`.
    pub fn union(&self) -> u32 {
        self.lambda.unwrap_or(self.top())
    }

    pub fn levels(&self) -> usize {
        self.lambdas.len()
    }

    fn in_level(&self, n: usize, v: Signed) -> bool {
        v.value < self.lambdas[n]
    }

    /// Values admitted as the last entry of a sequence of length `len ≥ 2`.
    fn last_values(&self, len: usize, prev: Signed) -> Vec<Signed> {
        let level = self.lambdas[len - 1];
        let (negs, poss) = if prev.neg {
            (self.union(), level)
        } else {
            (level, self.union())
        };
        (0..negs).map(Signed::neg).chain((0..poss).map(Signed::pos)).collect()
    }

    /// Class of `v ∈ λ_n*`.
    fn class(&self, n: usize, v: Signed) -> u32 {
        self.partitions[n][v.value as usize]
    }
}

/// The positions of the Brendle order in increasing order with their split.
#[derive(Clone, Debug)]
pub struct BrendleLayout {
    pub params: BrendleParams,
    pub positions: Vec<BrendlePosition>,
    pub l1: FixedBitSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingViolation {
    pub x: String,
    pub y: String,
    pub detail: String,
}

impl BrendleLayout {
    /// Every sequence whose last entry refers to an existing level, i.e.
    /// of length at most the level count.
    pub fn new(params: &BrendleParams, cap: usize) -> Result<Self, TemplateError> {
        params.validate()?;
        let mut all: Vec<BrendlePosition> = Vec::new();
        let too_large = TemplateError::TooLarge {
            what: "position count",
            cap,
        };
        // Prefixes whose entries all lie in their own level; any of them
        // can be continued.
        let mut inner: Vec<BrendlePosition> = (0..params.lambdas[0])
            .map(|v| BrendlePosition(vec![Signed::pos(v)]))
            .collect();
        all.extend(inner.iter().cloned());
        for len in 2..=params.levels() {
            let mut next_inner = Vec::new();
            for x in &inner {
                let prev = *x.0.last().expect("nonempty");
                for v in params.last_values(len, prev) {
                    let mut y = x.clone();
                    y.0.push(v);
                    if params.in_level(len - 1, v) {
                        next_inner.push(y.clone());
                    }
                    all.push(y);
                    if all.len() > cap {
                        return Err(too_large);
                    }
                }
            }
            inner = next_inner;
        }
        all.sort();
        let mut l1 = FixedBitSet::with_capacity(all.len());
        for (i, x) in all.iter().enumerate() {
            let last = *x.0.last().expect("nonempty");
            if x.len() == 1 || params.in_level(x.len() - 1, last) {
                l1.insert(i);
            }
        }
        Ok(BrendleLayout {
            params: params.clone(),
            positions: all,
            l1,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn index_of(&self, x: &BrendlePosition) -> Option<usize> {
        self.positions.binary_search(x).ok()
    }

    /// Membership in `L0` read off the last two entries alone.
    pub fn in_l0_by_tail(&self, x: &BrendlePosition) -> bool {
        if x.len() < 2 {
            return false;
        }
        let n = x.len() - 1;
        let last = x.0[n];
        let lam = self.params.lambdas[n];
        let lam_u = self.params.union();
        if x.0[n - 1].neg {
            last.neg && last.value >= lam && last.value < lam_u
        } else {
            !last.neg && last.value >= lam && last.value < lam_u
        }
    }

    /// Odd length ≥ 3, alternating negative/positive entries within their
    /// levels, last entry below `ω₁`, and classes strictly decreasing along
    /// the negative predecessors of later `ω₁`-entries at even places ≥ 2.
    pub fn relevant(&self, x: &BrendlePosition) -> bool {
        let len = x.len();
        if len < 3 || len.is_multiple_of(2) {
            return false;
        }
        let p = &self.params;
        for (n, v) in x.0.iter().enumerate() {
            if v.neg != (n % 2 == 1) || !p.in_level(n, *v) {
                return false;
            }
        }
        if x.0[len - 1].value >= p.omega1 {
            return false;
        }
        let small: Vec<usize> = (2..len).step_by(2).filter(|&n| x.0[n].value < p.omega1).collect();
        for (i, &n) in small.iter().enumerate() {
            for &m in &small[i + 1..] {
                if p.class(n - 1, x.0[n - 1]) <= p.class(m - 1, x.0[m - 1]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn relevant_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.relevant(&self.positions[i])).collect()
    }

    /// `J_x = {z : x↾(|x|−1) ≤ z < x}` as an index range.
    pub fn interval_j(&self, x: usize) -> std::ops::Range<usize> {
        let pos = &self.positions[x];
        let start = self
            .index_of(&pos.truncate(pos.len() - 1))
            .expect("prefixes are positions");
        start..x
    }

    fn range_set(&self, r: std::ops::Range<usize>) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.len());
        s.insert_range(r);
        s
    }

    /// For relevant `x < y`, `J_x` and `J_y` are disjoint or `J_x ⊆ J_y`,
    /// and in the second case `|y| ≤ |x|`, the two agree below `|y| − 1`,
    /// and `x(|y|−1) ≤ y(|y|−1)`.
    pub fn nesting_violations(&self) -> Vec<NestingViolation> {
        let rel = self.relevant_indices();
        let mut out = Vec::new();
        for (i, &x) in rel.iter().enumerate() {
            let jx = self.interval_j(x);
            for &y in &rel[i + 1..] {
                let jy = self.interval_j(y);
                let disjoint = jx.end <= jy.start || jy.end <= jx.start;
                let inside = jy.start <= jx.start && jx.end <= jy.end;
                let viol = |detail: &str| NestingViolation {
                    x: self.positions[x].to_string(),
                    y: self.positions[y].to_string(),
                    detail: detail.into(),
                };
                if !disjoint && !inside {
                    out.push(viol("intervals overlap without nesting"));
                    continue;
                }
                if inside && !disjoint {
                    let (px, py) = (&self.positions[x], &self.positions[y]);
                    let k = py.len() - 1;
                    if py.len() > px.len() {
                        out.push(viol("outer position is longer"));
                    } else if px.0[..k] != py.0[..k] {
                        out.push(viol("positions differ below the outer tail"));
                    } else if px.0[k] > py.0[k] {
                        out.push(viol("inner entry exceeds the outer tail"));
                    }
                }
            }
        }
        out
    }

    /// `cl(A) = A ∪ (L_{max A} ∩ L0)`.
    fn closure(&self, a: &FixedBitSet) -> FixedBitSet {
        let mut out = a.clone();
        if let Some(top) = a.maximum() {
            let mut low = self.range_set(0..top);
            low.difference_with(&self.l1);
            out.union_with(&low);
        }
        out
    }

    /// Generators of `I`: the sets `{x : x(0) < α}` for `α ≤ λ_0`, `cl(J_x)`
    /// for relevant `x`, and `cl({x})` and `L_x ∩ L0` for `x ∈ L1`.
    pub fn ideal_generators(&self) -> Vec<FixedBitSet> {
        let mut gens = Vec::new();
        for alpha in 0..=self.params.lambdas[0] {
            let end = self.positions.partition_point(|x| x.0[0].value < alpha);
            gens.push(self.range_set(0..end));
        }
        for x in self.relevant_indices() {
            gens.push(self.closure(&self.range_set(self.interval_j(x))));
        }
        for x in self.l1.ones() {
            gens.push(self.closure(&self.range_set(x..x + 1)));
            let mut low = self.range_set(0..x);
            low.difference_with(&self.l1);
            gens.push(low);
        }
        gens
    }

    pub fn template(&self, ideal_cap: usize) -> Result<TemplateOrder, TemplateError> {
        let ideal = lattice_closure(self.len(), self.ideal_generators(), ideal_cap)?;
        let labels = self.positions.iter().map(|x| x.to_string()).collect();
        TemplateOrder::new(labels, self.l1.clone(), ideal)
    }
}

/// Layout and template for `params` under the default caps.
pub fn brendle_build(params: &BrendleParams) -> Result<(BrendleLayout, TemplateOrder), TemplateError> {
    let layout = BrendleLayout::new(params, DEFAULT_ELEMENT_CAP)?;
    let t = layout.template(DEFAULT_IDEAL_CAP)?;
    Ok((layout, t))
}
