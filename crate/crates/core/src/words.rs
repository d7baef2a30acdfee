//! Free-group words over a signed alphabet of opaque generators.
//!
//! A [`Word`] is always freely reduced. Letters are written left to right and
//! act right to left, so the rightmost letter of a word is applied first.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Opaque generator id. Ground generators and generic generators share one
/// namespace; which is which is decided by the ground representation in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(pub u32);

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

impl FromStr for Gen {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('g')
            .ok_or_else(|| WordError::Parse(format!("generator token `{s}` must look like g<n>")))?;
        digits
            .parse::<u32>()
            .map(Gen)
            .map_err(|_| WordError::Parse(format!("bad generator index in `{s}`")))
    }
}

impl Serialize for Gen {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gen {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    /// `true` for the inverse letter `g^-1`.
    pub inv: bool,
}

impl Letter {
    pub fn pos(gen: Gen) -> Self {
        Letter { gen, inv: false }
    }

    pub fn neg(gen: Gen) -> Self {
        Letter { gen, inv: true }
    }

    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator {0} does not occur in the word")]
    MissingGenerator(Gen),
    #[error("operation needs a nonempty word")]
    EmptyWord,
    #[error("cannot parse word: {0}")]
    Parse(String),
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

/// `w = conjugator⁻¹ · core · conjugator` with `core` in the hat set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugation {
    pub conjugator: Word,
    pub core: Word,
}

/// `w = a^{k_j} u_j ⋯ a^{k_1} u_1`. `blocks[0]` is `(k_1, u_1)`, the block
/// applied first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodDecomposition {
    pub gen: Gen,
    pub blocks: Vec<(i64, Word)>,
}

impl GoodDecomposition {
    pub fn rank(&self) -> usize {
        self.blocks.len()
    }

    pub fn recompose(&self) -> Word {
        let mut letters = Vec::new();
        for (k, u) in self.blocks.iter().rev() {
            letters.extend(Word::power(self.gen, *k).letters);
            letters.extend(u.letters.iter().copied());
        }
        Word::reduce(letters)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ADecomposition {
    Good(GoodDecomposition),
    /// `w = prefix · good · a^power` without cancellation; `prefix` is free of
    /// `a` and `good` is `a`-good or empty.
    NotGood {
        prefix: Word,
        good: Word,
        power: i64,
    },
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Free reduction by a single left-to-right stack pass.
    pub fn reduce<I: IntoIterator<Item = Letter>>(seq: I) -> Self {
        let mut letters: Vec<Letter> = Vec::new();
        for l in seq {
            match letters.last() {
                Some(&top) if top.cancels(l) => {
                    letters.pop();
                }
                _ => letters.push(l),
            }
        }
        Word { letters }
    }

    pub fn letter(l: Letter) -> Self {
        Word { letters: vec![l] }
    }

    pub fn gen(g: Gen) -> Self {
        Word::letter(Letter::pos(g))
    }

    /// `g^k`; `k = 0` gives the empty word.
    pub fn power(g: Gen, k: i64) -> Self {
        let l = if k < 0 { Letter::neg(g) } else { Letter::pos(g) };
        Word {
            letters: vec![l; k.unsigned_abs() as usize],
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Syllables `(gen, exponent)` left to right.
    pub fn syllables(&self) -> Vec<(Gen, i64)> {
        let mut out: Vec<(Gen, i64)> = Vec::new();
        for l in &self.letters {
            match out.last_mut() {
                Some((g, k)) if *g == l.gen => *k += l.sign(),
                _ => out.push((l.gen, l.sign())),
            }
        }
        out
    }

    pub fn contains_gen(&self, g: Gen) -> bool {
        self.letters.iter().any(|l| l.gen == g)
    }

    pub fn occurrences(&self) -> BTreeSet<Gen> {
        self.letters.iter().map(|l| l.gen).collect()
    }

    pub fn occurrences_in(&self, within: &BTreeSet<Gen>) -> BTreeSet<Gen> {
        self.letters
            .iter()
            .map(|l| l.gen)
            .filter(|g| within.contains(g))
            .collect()
    }

    /// Membership in the hat set: a nonzero power of one generator, or first
    /// and last letters on distinct generators.
    pub fn is_hat(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => f.gen != l.gen || self.letters.iter().all(|x| x.gen == f.gen),
            _ => false,
        }
    }

    /// Writes `w = u⁻¹ ŵ u` with `ŵ` in the hat set and `u` shortest.
    ///
    /// Matching first/last pairs are peeled first (cyclic reduction). If the
    /// cyclic core still starts and ends on the same generator, the shorter of
    /// its leading and trailing syllables is rotated to the other end.
    pub fn conjugate_decompose(&self) -> Result<Conjugation, WordError> {
        if self.is_empty() {
            return Err(WordError::EmptyWord);
        }
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo].cancels(self.letters[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        // A reduced nonempty word never cyclically reduces to nothing.
        assert!(hi > lo, "reduced nonempty word has empty cyclic core");
        // w = peel⁻¹ c peel, peel = (letters[lo-1] ⋯ letters[0])⁻¹
        let peel = Word {
            letters: self.letters[..lo].to_vec(),
        }
        .inverse();
        let core = Word {
            letters: self.letters[lo..hi].to_vec(),
        };
        if core.is_hat() {
            return Ok(Conjugation { conjugator: peel, core });
        }
        let syl = core.syllables();
        let (g, head) = syl[0];
        let (_, tail) = *syl.last().expect("nonempty core");
        let body_start = head.unsigned_abs() as usize;
        let body_end = core.len() - tail.unsigned_abs() as usize;
        let body = &core.letters[body_start..body_end];
        let (rot, hat) = if tail.unsigned_abs() <= head.unsigned_abs() {
            // c = v g^tail  ->  ŵ = g^tail v, c = g^-tail ŵ g^tail
            let mut letters = Word::power(g, tail).letters;
            letters.extend_from_slice(&core.letters[..body_end]);
            (Word::power(g, tail), Word { letters })
        } else {
            // c = g^head v  ->  ŵ = v g^head, c = g^head ŵ g^-head
            let mut letters = body.to_vec();
            letters.extend(core.letters[body_end..].iter().copied());
            letters.extend(Word::power(g, head).letters);
            (Word::power(g, -head), Word { letters })
        };
        Ok(Conjugation {
            conjugator: rot.concat(&peel),
            core: hat,
        })
    }

    /// Splits `w` relative to generator `a`, following the a-good shape
    /// `a^{k_j} u_j ⋯ a^{k_1} u_1` when possible.
    pub fn good_decompose(&self, a: Gen) -> Result<ADecomposition, WordError> {
        if !self.contains_gen(a) {
            return Err(WordError::MissingGenerator(a));
        }
        let n = self.letters.len();
        let prefix_len = self.letters.iter().take_while(|l| l.gen != a).count();
        let suffix_len = self.letters.iter().rev().take_while(|l| l.gen == a).count();
        if prefix_len == 0 && suffix_len == 0 {
            let mut blocks = Vec::new();
            let mut letters: Vec<Letter> = Vec::new();
            let mut k = 0i64;
            for l in &self.letters {
                if l.gen == a {
                    if !letters.is_empty() {
                        blocks.push((k, Word { letters }));
                        letters = Vec::new();
                        k = 0;
                    }
                    k += l.sign();
                } else {
                    letters.push(*l);
                }
            }
            blocks.push((k, Word { letters }));
            blocks.reverse();
            return Ok(ADecomposition::Good(GoodDecomposition { gen: a, blocks }));
        }
        let power = self.letters[n - suffix_len..].iter().map(|l| l.sign()).sum();
        let good_end = if prefix_len == n { n } else { n - suffix_len };
        Ok(ADecomposition::NotGood {
            prefix: Word {
                letters: self.letters[..prefix_len.min(good_end)].to_vec(),
            },
            good: Word {
                letters: self.letters[prefix_len.min(good_end)..good_end].to_vec(),
            },
            power,
        })
    }

    /// Replaces each `a^{±1}` by `replacement^{±1}` and reduces.
    pub fn substitute(&self, a: Gen, replacement: Letter) -> Word {
        Word::reduce(self.letters.iter().map(|l| {
            if l.gen == a {
                if l.inv {
                    replacement.inverse()
                } else {
                    replacement
                }
            } else {
                *l
            }
        }))
    }

    /// Cyclic rotation by `k` letters to the left. The result is reduced only
    /// when `self` is cyclically reduced.
    pub fn rotate_left(&self, k: usize) -> Word {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        Word { letters }
    }

    /// Every reduced word of length exactly `len` over `gens`, in lexicographic
    /// letter order.
    pub fn enumerate(gens: &[Gen], len: usize) -> Vec<Word> {
        let alphabet: Vec<Letter> = gens.iter().flat_map(|&g| [Letter::pos(g), Letter::neg(g)]).collect();
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * alphabet.len());
            for w in &out {
                for &l in &alphabet {
                    if w.last().is_some_and(|x| x.cancels(l)) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(Word { letters });
                }
            }
            out = next;
        }
        out
    }

    /// Every reduced word of length at most `max_len`, shortest first.
    pub fn enumerate_up_to(gens: &[Gen], max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|len| Word::enumerate(gens, len)).collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for (i, (g, k)) in self.syllables().into_iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if k == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{k}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(WordError::Parse("empty input (the identity is `e`)".into()));
        }
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let (gen, exp) = match token.split_once('^') {
                Some((g, k)) => {
                    let k: i64 = k
                        .parse()
                        .map_err(|_| WordError::Parse(format!("bad exponent in `{token}`")))?;
                    if k == 0 {
                        return Err(WordError::Parse(format!("zero exponent in `{token}`")));
                    }
                    (g.parse::<Gen>()?, k)
                }
                None => (token.parse::<Gen>()?, 1),
            };
            letters.extend(Word::power(gen, exp).letters);
        }
        Ok(Word::reduce(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
