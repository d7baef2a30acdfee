//! Greedy finite-stage generic: meets domain, range, freezing and hitting
//! goals in a fixed order, recording what each frozen word looked like.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{eval, fix_points, GroundPermutation, GroundRep, Nat, PermutationSpec};
use crate::extension::{extend_domain, extend_range, hit_search, ExtensionError};
use crate::poset::{agreement, leq, make_pair_word, Condition, PosetMode};
use crate::words::{Gen, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitGoal {
    pub gen: Gen,
    pub sigma: PermutationSpec,
    pub from: Nat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DenseGoal {
    DomainAt { gen: Gen, n: Nat },
    RangeAt { gen: Gen, n: Nat },
    FreezeWord { word: Word },
    Hit(HitGoal),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The value chosen for a new pair.
    Chosen {
        value: Nat,
    },
    /// The goal already held with this value.
    Present {
        value: Nat,
    },
    Frozen,
    Hit {
        n: Nat,
        value: Nat,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoalRecord {
    pub stage: usize,
    pub goal: DenseGoal,
    pub witness: Witness,
}

/// The protected set of a side entry at the stage it was frozen: fixed
/// points for hat words, agreement points for pair words, common 1-points
/// for pairs of mad letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Frozen {
    pub stage: usize,
    pub fix: BTreeSet<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub mode: PosetMode,
    pub generators: Vec<Gen>,
    pub point_budget: Nat,
    pub word_budget: usize,
    pub seed: u64,
    #[serde(rename = "final")]
    pub final_condition: Condition,
    pub goal_log: Vec<GoalRecord>,
    pub frozen_fix: BTreeMap<Word, Frozen>,
}

impl BuildReport {
    /// `word,stage,|fix|` lines.
    pub fn csv_summary(&self) -> String {
        let mut out = String::from("word,stage,fix_size\n");
        for (w, f) in &self.frozen_fix {
            out.push_str(&format!("{w},{},{}\n", f.stage, f.fix.len()));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub mode: PosetMode,
    pub generators: u32,
    pub point_budget: Nat,
    pub word_budget: usize,
    pub seed: u64,
    /// Largest value a chooser may return; defaults to `16·points + 1024`.
    #[serde(default)]
    pub value_ceiling: Option<Nat>,
    #[serde(default)]
    pub hits: Vec<HitGoal>,
}

impl BuildConfig {
    pub fn new(mode: PosetMode, generators: u32, point_budget: Nat, word_budget: usize, seed: u64) -> Self {
        BuildConfig {
            mode,
            generators,
            point_budget,
            word_budget,
            seed,
            value_ceiling: None,
            hits: Vec::new(),
        }
    }

    fn ceiling(&self) -> Nat {
        self.value_ceiling.unwrap_or(16 * self.point_budget + 1024)
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("goal {goal:?} needs a value beyond the ceiling {ceiling}")]
    BudgetExhausted {
        goal: DenseGoal,
        ceiling: Nat,
        partial: Box<BuildReport>,
    },
    #[error("goal {goal:?} failed: {source}")]
    Goal {
        goal: DenseGoal,
        source: ExtensionError,
        partial: Box<BuildReport>,
    },
    #[error("stage {stage} does not extend its predecessor")]
    ChainBroken { stage: usize },
}

impl BuildError {
    pub fn partial(&self) -> Option<&BuildReport> {
        match self {
            BuildError::BudgetExhausted { partial, .. } | BuildError::Goal { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Generic generators `g0 … g{k-1}`, numbered after any ground generators.
pub fn generic_generators(count: u32, rho: &GroundRep) -> Vec<Gen> {
    let offset = rho.generators().last().map_or(0, |g| g.0 + 1);
    (offset..offset + count).map(Gen).collect()
}

struct Builder<'a> {
    rho: &'a GroundRep,
    config: &'a BuildConfig,
    rng: ChaCha8Rng,
    report: BuildReport,
    /// Stage at which each mad letter entered the side set.
    letter_stage: BTreeMap<Gen, usize>,
}

impl Builder<'_> {
    fn fail(&self, goal: &DenseGoal, source: ExtensionError) -> BuildError {
        match source {
            ExtensionError::NoAdmissibleValue => BuildError::BudgetExhausted {
                goal: goal.clone(),
                ceiling: self.config.ceiling(),
                partial: Box::new(self.report.clone()),
            },
            source => BuildError::Goal {
                goal: goal.clone(),
                source,
                partial: Box::new(self.report.clone()),
            },
        }
    }

    fn commit(&mut self, next: Condition, goal: DenseGoal, witness: Witness) -> Result<(), BuildError> {
        let stage = self.report.goal_log.len();
        let cur = &self.report.final_condition;
        if !leq(&next, cur, self.rho).map_err(|_| BuildError::ChainBroken { stage })? {
            return Err(BuildError::ChainBroken { stage });
        }
        if let Witness::Chosen { value } | Witness::Hit { value, .. } = witness {
            if value > self.config.ceiling() {
                return Err(BuildError::BudgetExhausted {
                    goal,
                    ceiling: self.config.ceiling(),
                    partial: Box::new(self.report.clone()),
                });
            }
        }
        self.report.final_condition = next;
        self.report.goal_log.push(GoalRecord { stage, goal, witness });
        Ok(())
    }

    fn floor(&mut self) -> Nat {
        match self.config.mode {
            PosetMode::Mad => self.rng.gen_range(0..2),
            _ => self.rng.gen_range(0..self.config.point_budget),
        }
    }

    fn domain_at(&mut self, gen: Gen, n: Nat) -> Result<(), BuildError> {
        let goal = DenseGoal::DomainAt { gen, n };
        let floor = self.floor();
        let cur = &self.report.final_condition;
        if let Some(value) = cur.s.get(gen).and_then(|m| m.get(n)) {
            let next = cur.clone();
            return self.commit(next, goal, Witness::Present { value });
        }
        let (next, value) = extend_domain(cur, gen, n, floor, self.rho).map_err(|e| self.fail(&goal, e))?;
        self.commit(next, goal, Witness::Chosen { value })
    }

    fn range_at(&mut self, gen: Gen, m: Nat) -> Result<(), BuildError> {
        let goal = DenseGoal::RangeAt { gen, n: m };
        let floor = self.floor();
        let cur = &self.report.final_condition;
        if let Some(value) = cur.s.get(gen).and_then(|map| map.preimage(m)) {
            let next = cur.clone();
            return self.commit(next, goal, Witness::Present { value });
        }
        let (next, value) = extend_range(cur, gen, m, floor, self.rho).map_err(|e| self.fail(&goal, e))?;
        self.commit(next, goal, Witness::Chosen { value })
    }

    fn freeze(&mut self, word: Word) -> Result<(), BuildError> {
        let goal = DenseGoal::FreezeWord { word: word.clone() };
        let next = self
            .report
            .final_condition
            .add_words([&word], self.rho)
            .map_err(|e| self.fail(&goal, e.into()))?;
        self.commit(next, goal, Witness::Frozen)?;
        let stage = self.report.goal_log.len() - 1;
        let cond = &self.report.final_condition;
        match self.config.mode {
            PosetMode::Cofinitary | PosetMode::Adp | PosetMode::Edf => {
                let fix = cond.frozen_set(&word, self.rho);
                self.report.frozen_fix.insert(word, Frozen { stage, fix });
            }
            PosetMode::Mad => {
                let a = word.letters()[0].gen;
                self.letter_stage.insert(a, stage);
                for (&b, _) in self.letter_stage.iter().filter(|(&b, _)| b != a) {
                    let (x, y) = if a < b { (a, b) } else { (b, a) };
                    let key = make_pair_word(x, y);
                    let fix = agreement(&cond.s, x, y, Some(1));
                    self.report.frozen_fix.insert(key, Frozen { stage, fix });
                }
            }
        }
        Ok(())
    }

    fn hit(&mut self, goal: HitGoal) -> Result<(), BuildError> {
        let wrapped = DenseGoal::Hit(goal.clone());
        let sigma = GroundPermutation::try_from(&goal.sigma).map_err(|e| BuildError::InvalidConfig(e.to_string()))?;
        let window = self.config.ceiling().saturating_sub(goal.from).max(1);
        let found = hit_search(
            &self.report.final_condition,
            goal.gen,
            &sigma,
            goal.from,
            window,
            self.rho,
        )
        .map_err(|e| self.fail(&wrapped, e))?;
        match found {
            Some((n, next)) => {
                let value = sigma.apply(n);
                self.commit(next, wrapped, Witness::Hit { n, value })
            }
            None => Err(self.fail(&wrapped, ExtensionError::NoAdmissibleValue)),
        }
    }
}

fn freeze_schedule(config: &BuildConfig, gens: &[Gen], rho: &GroundRep) -> BTreeMap<Nat, Vec<Word>> {
    let mut by_point: BTreeMap<Nat, Vec<Word>> = BTreeMap::new();
    match config.mode {
        PosetMode::Cofinitary => {
            let mut alphabet: Vec<Gen> = gens.to_vec();
            alphabet.extend(rho.generators());
            alphabet.sort();
            for len in 1..=config.word_budget {
                let words = Word::enumerate(&alphabet, len)
                    .into_iter()
                    .filter(|w| w.is_hat() && rho.has_generic_letter(w));
                by_point.entry(4 * (len as Nat - 1)).or_default().extend(words);
            }
        }
        PosetMode::Adp | PosetMode::Edf => {
            let words = gens
                .iter()
                .flat_map(|&a| gens.iter().filter(move |&&b| a < b).map(move |&b| make_pair_word(a, b)));
            by_point.entry(4).or_default().extend(words);
        }
        PosetMode::Mad => {
            by_point
                .entry(4)
                .or_default()
                .extend(gens.iter().map(|&a| Word::gen(a)));
        }
    }
    by_point
}

/// Runs the greedy construction from the empty condition.
pub fn build(config: &BuildConfig, rho: &GroundRep) -> Result<BuildReport, BuildError> {
    if config.point_budget == 0 {
        return Err(BuildError::InvalidConfig("point budget must be at least 1".into()));
    }
    if config.word_budget == 0 {
        return Err(BuildError::InvalidConfig("word budget must be at least 1".into()));
    }
    if config.generators == 0 {
        return Err(BuildError::InvalidConfig("need at least one generator".into()));
    }
    if !config.hits.is_empty() && config.mode != PosetMode::Cofinitary {
        return Err(BuildError::InvalidConfig("hit goals need cofinitary mode".into()));
    }
    let gens = generic_generators(config.generators, rho);
    for h in &config.hits {
        if !gens.contains(&h.gen) {
            return Err(BuildError::InvalidConfig(format!(
                "hit generator {} is not generic",
                h.gen
            )));
        }
        GroundPermutation::try_from(&h.sigma).map_err(|e| BuildError::InvalidConfig(e.to_string()))?;
    }
    let mut b = Builder {
        rho,
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        report: BuildReport {
            mode: config.mode,
            generators: gens.clone(),
            point_budget: config.point_budget,
            word_budget: config.word_budget,
            seed: config.seed,
            final_condition: Condition::empty(config.mode),
            goal_log: Vec::new(),
            frozen_fix: BTreeMap::new(),
        },
        letter_stage: BTreeMap::new(),
    };
    let mut freezes = freeze_schedule(config, &gens, rho);
    let mut hits: BTreeMap<Nat, Vec<HitGoal>> = BTreeMap::new();
    for h in &config.hits {
        hits.entry(h.from).or_default().push(h.clone());
    }
    let ranges = matches!(config.mode, PosetMode::Cofinitary | PosetMode::Adp);
    for n in 0..config.point_budget {
        for w in freezes.remove(&n).unwrap_or_default() {
            b.freeze(w)?;
        }
        for h in hits.remove(&n).unwrap_or_default() {
            b.hit(h)?;
        }
        for &a in &gens {
            b.domain_at(a, n)?;
            if ranges {
                b.range_at(a, n)?;
            }
        }
    }
    for w in freezes.into_values().flatten() {
        b.freeze(w)?;
    }
    for h in hits.into_values().flatten() {
        b.hit(h)?;
    }
    Ok(b.report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Error)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixViolation {
    #[error("{word}: frozen set was {recorded:?} at stage {stage}, is now {now:?}")]
    FrozenChanged {
        word: Word,
        stage: usize,
        recorded: BTreeSet<Nat>,
        now: BTreeSet<Nat>,
    },
    #[error("{word}: fixed set not exactly computable")]
    NotExact { word: Word },
    #[error("{word}: fixed point {n} is not carried into the fixed set of its core {core}")]
    Transport { word: Word, core: Word, n: Nat },
    #[error("{word}: fixed set differs from the pull-back of its core {core}")]
    PullBack { word: Word, core: Word },
    #[error("{core}: core of {word} was never frozen")]
    CoreNotFrozen { word: Word, core: Word },
    #[error("{gen}: {n} missing from the {side}")]
    NotCovering { gen: Gen, n: Nat, side: &'static str },
    #[error("{gen}: map is not injective")]
    NotInjective { gen: Gen },
    #[error("{gen} and {hit}: no agreement at or above {from}")]
    HitMissing { gen: Gen, hit: String, from: Nat },
}

fn check_frozen(report: &BuildReport, rho: &GroundRep, out: &mut Vec<FixViolation>) {
    for (word, frozen) in &report.frozen_fix {
        let now = report.final_condition.frozen_set(word, rho);
        if now != frozen.fix {
            out.push(FixViolation::FrozenChanged {
                word: word.clone(),
                stage: frozen.stage,
                recorded: frozen.fix.clone(),
                now,
            });
        }
    }
}

/// Domain and range of every map contain `[0, point_budget)`; injective
/// maps stay injective.
pub fn check_totality(report: &BuildReport) -> Vec<FixViolation> {
    let mut out = Vec::new();
    let s = &report.final_condition.s;
    let ranges = matches!(report.mode, PosetMode::Cofinitary | PosetMode::Adp);
    for &gen in &report.generators {
        let map = s.get(gen);
        for n in 0..report.point_budget {
            if !map.is_some_and(|m| m.in_domain(n)) {
                out.push(FixViolation::NotCovering { gen, n, side: "domain" });
            }
            if ranges && !map.is_some_and(|m| m.in_range(n)) {
                out.push(FixViolation::NotCovering { gen, n, side: "range" });
            }
        }
        if ranges && map.is_some_and(|m| !m.is_injective()) {
            out.push(FixViolation::NotInjective { gen });
        }
    }
    out
}

/// Frozen-set law for every frozen word, plus for every nonidentity word up
/// to the word budget with a generic letter: its fixed set is exact, and
/// the conjugator `u` of `w = u⁻¹ ŵ u` carries it injectively into the
/// frozen fixed set of the core `ŵ` (onto the pull-back when `w` is
/// literally `u⁻¹ ŵ u`).
pub fn verify_cofinitary(report: &BuildReport, rho: &GroundRep) -> Result<(), Vec<FixViolation>> {
    let mut out = Vec::new();
    check_frozen(report, rho, &mut out);
    let s = &report.final_condition.s;
    let mut alphabet = report.generators.clone();
    alphabet.extend(rho.generators());
    alphabet.sort();
    for word in Word::enumerate_up_to(&alphabet, report.word_budget).into_iter().skip(1) {
        if !rho.has_generic_letter(&word) {
            continue;
        }
        let fix = fix_points(&word, s, rho);
        if !fix.is_exact() {
            out.push(FixViolation::NotExact { word });
            continue;
        }
        let conj = word.conjugate_decompose().expect("nonempty");
        if rho.has_generic_letter(&conj.core) && !report.frozen_fix.contains_key(&conj.core) {
            out.push(FixViolation::CoreNotFrozen {
                word: word.clone(),
                core: conj.core.clone(),
            });
        }
        let core_fix = fix_points(&conj.core, s, rho).into_set();
        for &n in fix.set() {
            if !eval(&conj.conjugator, s, rho, n).is_some_and(|x| core_fix.contains(&x)) {
                out.push(FixViolation::Transport {
                    word: word.clone(),
                    core: conj.core.clone(),
                    n,
                });
            }
        }
        let literal = 2 * conj.conjugator.len() + conj.core.len() == word.len();
        if literal {
            let back = conj.conjugator.inverse();
            let pulled: BTreeSet<Nat> = core_fix.iter().filter_map(|&x| eval(&back, s, rho, x)).collect();
            if &pulled != fix.set() {
                out.push(FixViolation::PullBack {
                    word: word.clone(),
                    core: conj.core.clone(),
                });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Frozen agreement or 1-intersection sets for a variant build.
pub fn verify_variant(report: &BuildReport, rho: &GroundRep) -> Result<(), Vec<FixViolation>> {
    let mut out = Vec::new();
    check_frozen(report, rho, &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Every hit goal of `config` is met in the final assignment.
pub fn check_hits(report: &BuildReport, config: &BuildConfig) -> Vec<FixViolation> {
    let mut out = Vec::new();
    for h in &config.hits {
        let Ok(sigma) = GroundPermutation::try_from(&h.sigma) else {
            continue;
        };
        let met = report
            .final_condition
            .s
            .get(h.gen)
            .is_some_and(|m| m.pairs().any(|(n, v)| n >= h.from && sigma.apply(n) == v));
        if !met {
            out.push(FixViolation::HitMissing {
                gen: h.gen,
                hit: format!("{:?}", h.sigma),
                from: h.from,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: PosetMode, gens: u32, points: Nat, words: usize, seed: u64) -> BuildConfig {
        BuildConfig::new(mode, gens, points, words, seed)
    }

    #[test]
    fn single_generator_build() {
        let rho = GroundRep::empty();
        let report = build(&cfg(PosetMode::Cofinitary, 1, 3, 1, 0), &rho).unwrap();
        assert!(check_totality(&report).is_empty());
        let a = "g0".parse::<Word>().unwrap();
        let frozen = &report.frozen_fix[&a];
        assert_eq!(frozen.fix, fix_points(&a, &report.final_condition.s, &rho).into_set());
        verify_cofinitary(&report, &rho).unwrap();
    }

    #[test]
    fn zero_budget_rejected() {
        let rho = GroundRep::empty();
        assert!(matches!(
            build(&cfg(PosetMode::Cofinitary, 2, 0, 1, 0), &rho),
            Err(BuildError::InvalidConfig(_))
        ));
    }

    #[test]
    fn small_builds_verify() {
        let rho = GroundRep::empty();
        for seed in 0..5 {
            let report = build(&cfg(PosetMode::Cofinitary, 3, 30, 3, seed), &rho).unwrap();
            assert!(check_totality(&report).is_empty());
            verify_cofinitary(&report, &rho).unwrap();
            let stages: Vec<usize> = report.goal_log.iter().map(|r| r.stage).collect();
            assert!(stages.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn builds_are_deterministic() {
        let rho = GroundRep::empty();
        let c = cfg(PosetMode::Cofinitary, 2, 20, 3, 9);
        let one = serde_json::to_string(&build(&c, &rho).unwrap()).unwrap();
        let two = serde_json::to_string(&build(&c, &rho).unwrap()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn corrupted_report_is_caught() {
        let rho = GroundRep::empty();
        let mut report = build(&cfg(PosetMode::Cofinitary, 2, 10, 2, 3), &rho).unwrap();
        let a = Gen(0);
        let k = 1000;
        report.final_condition.s.insert(a, k, k).unwrap();
        let violations = verify_cofinitary(&report, &rho).unwrap_err();
        let word: Word = "g0".parse().unwrap();
        assert!(violations
            .iter()
            .any(|v| matches!(v, FixViolation::FrozenChanged { word: w, .. } if *w == word)));
    }

    #[test]
    fn builds_over_a_ground_shift() {
        let rho = GroundRep::empty().with(Gen(0), GroundPermutation::ZShift);
        let report = build(&cfg(PosetMode::Cofinitary, 2, 20, 3, 1), &rho).unwrap();
        assert_eq!(report.generators, vec![Gen(1), Gen(2)]);
        assert!(check_totality(&report).is_empty());
        verify_cofinitary(&report, &rho).unwrap();
    }

    #[test]
    fn hit_goals_are_met() {
        let rho = GroundRep::empty();
        let mut c = cfg(PosetMode::Cofinitary, 2, 20, 2, 4);
        c.hits = vec![
            HitGoal {
                gen: Gen(0),
                sigma: PermutationSpec::Zshift,
                from: 7,
            },
            HitGoal {
                gen: Gen(1),
                sigma: PermutationSpec::Zshift,
                from: 40,
            },
        ];
        let report = build(&c, &rho).unwrap();
        assert!(check_hits(&report, &c).is_empty());
        verify_cofinitary(&report, &rho).unwrap();
    }

    #[test]
    fn variant_builds_freeze_their_sets() {
        let rho = GroundRep::empty();
        for mode in [PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
            let report = build(&cfg(mode, 3, 40, 1, 2), &rho).unwrap();
            assert_eq!(report.frozen_fix.len(), 3, "{mode}");
            verify_variant(&report, &rho).unwrap();
            assert!(check_totality(&report).is_empty());
        }
    }

    #[test]
    fn edf_builds_may_be_non_injective() {
        let rho = GroundRep::empty();
        let report = build(&cfg(PosetMode::Edf, 2, 40, 1, 5), &rho).unwrap();
        assert!(report.final_condition.validate(&rho).is_ok());
    }

    #[test]
    fn ceiling_overflow_reports_the_goal() {
        let rho = GroundRep::empty();
        let mut c = cfg(PosetMode::Cofinitary, 2, 20, 2, 1);
        c.value_ceiling = Some(3);
        match build(&c, &rho) {
            Err(e @ BuildError::BudgetExhausted { .. }) => assert!(e.partial().is_some()),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
