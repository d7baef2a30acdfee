//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cofin::builder::{self, BuildConfig, BuildReport};
use cofin::eval::{eval, Assignment, GroundRep, Nat};
use cofin::extension;
use cofin::poset::{self, Condition, PosetMode};
use cofin::sample;
use cofin::suites;
use cofin::suslin::{self, SuslinPoset};
use cofin::templates::{self, BrendleParams};
use cofin::words::{Gen, Letter, Word};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:.1?}, limit {limit:?}"))
}

// Independent evaluation: relations as pair tables, composed letter by letter.

/// Pairs of every generator, forward and backward.
struct Pairs {
    fwd: HashMap<(Gen, Nat), Nat>,
    bwd: HashMap<(Gen, Nat), Nat>,
    max: Nat,
}

impl Pairs {
    fn of(s: &Assignment) -> Self {
        let mut p = Pairs {
            fwd: HashMap::new(),
            bwd: HashMap::new(),
            max: 0,
        };
        for (g, n, m) in s.triples() {
            p.fwd.insert((g, n), m);
            p.bwd.insert((g, m), n);
            p.max = p.max.max(n).max(m);
        }
        p
    }

    fn apply(&self, w: &Word, n: Nat) -> Option<Nat> {
        let mut x = n;
        for l in w.letters().iter().rev() {
            let table = if l.inv { &self.bwd } else { &self.fwd };
            x = *table.get(&(l.gen, x))?;
        }
        Some(x)
    }

    /// Every fixed point lies in some domain, so scanning up to the largest
    /// value is exhaustive when all letters are generic.
    fn fix(&self, w: &Word) -> BTreeSet<Nat> {
        (0..=self.max).filter(|&n| self.apply(w, n) == Some(n)).collect()
    }
}

fn agreement_by_scan(s: &Assignment, a: Gen, b: Gen, only: Option<Nat>) -> BTreeSet<Nat> {
    let p = Pairs::of(s);
    (0..=p.max)
        .filter(|&n| match (p.fwd.get(&(a, n)), p.fwd.get(&(b, n))) {
            (Some(x), Some(y)) => x == y && only.is_none_or(|v| *x == v),
            _ => false,
        })
        .collect()
}

// Criterion 1 and 2: all partial injections on six points with at most four
// pairs, taken up to simultaneous relabelling of the points.

const POINTS: usize = 6;
const NONE: u8 = POINTS as u8;

type Map6 = [u8; POINTS];

fn code(m: &Map6) -> u32 {
    m.iter().fold(0, |acc, &v| acc * (POINTS as u32 + 1) + v as u32)
}

fn conjugate(m: &Map6, perm: &Map6) -> Map6 {
    let mut out = [NONE; POINTS];
    for (i, &v) in m.iter().enumerate() {
        if v != NONE {
            out[perm[i] as usize] = perm[v as usize];
        }
    }
    out
}

fn permutations() -> Vec<Map6> {
    fn go(prefix: &mut Vec<u8>, out: &mut Vec<Map6>) {
        if prefix.len() == POINTS {
            out.push(prefix.as_slice().try_into().unwrap());
            return;
        }
        for v in 0..POINTS as u8 {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut out);
    out
}

fn injections(max_pairs: usize) -> Vec<Map6> {
    fn go(i: usize, m: &mut Map6, pairs: usize, max_pairs: usize, out: &mut Vec<Map6>) {
        if i == POINTS {
            out.push(*m);
            return;
        }
        go(i + 1, m, pairs, max_pairs, out);
        if pairs < max_pairs {
            for v in 0..POINTS as u8 {
                if !m[..i].contains(&v) {
                    m[i] = v;
                    go(i + 1, m, pairs + 1, max_pairs, out);
                    m[i] = NONE;
                }
            }
        }
    }
    let mut out = Vec::new();
    go(0, &mut [NONE; POINTS], 0, max_pairs, &mut out);
    out
}

/// Bit `j` of row `i` is set when the relation holds between `i` and `j`.
type Rel = [u8; POINTS];

fn relation(m: &Map6, inverse: bool) -> Rel {
    let mut r = [0; POINTS];
    for (i, &v) in m.iter().enumerate() {
        if v != NONE {
            if inverse {
                r[v as usize] |= 1 << i;
            } else {
                r[i] |= 1 << v;
            }
        }
    }
    r
}

/// `outer ∘ inner`: first `inner`, then `outer`.
fn compose(outer: &Rel, inner: &Rel) -> Rel {
    let mut r = [0; POINTS];
    for i in 0..POINTS {
        let mut row = inner[i];
        while row != 0 {
            let j = row.trailing_zeros() as usize;
            r[i] |= outer[j];
            row &= row - 1;
        }
    }
    r
}

struct WordTable {
    words: Vec<Word>,
    /// Index of the word without its first (last-applied) letter.
    tail: Vec<usize>,
    /// `(v, vu)` for every split `w = uv` of a hat word.
    splits: Vec<Vec<(usize, usize)>>,
    /// `(u, u⁻¹, core, literal)` for `w = u⁻¹ · core · u`.
    conj: Vec<Option<(usize, usize, usize, bool)>>,
}

impl WordTable {
    fn new(gens: &[Gen], max_len: usize) -> Self {
        let words = Word::enumerate_up_to(gens, max_len);
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let at = |w: &Word| index[w];
        let mut tail = Vec::new();
        let mut splits = Vec::new();
        let mut conj = Vec::new();
        for w in &words {
            let ls = w.letters();
            tail.push(if ls.is_empty() {
                0
            } else {
                at(&Word::reduce(ls[1..].iter().copied()))
            });
            let mut sp = Vec::new();
            if w.is_hat() {
                for k in 1..ls.len() {
                    let v = Word::reduce(ls[k..].iter().copied());
                    let vu = Word::reduce(ls[k..].iter().chain(&ls[..k]).copied());
                    sp.push((at(&v), at(&vu)));
                }
            }
            splits.push(sp);
            conj.push(w.conjugate_decompose().ok().map(|c| {
                let literal = 2 * c.conjugator.len() + c.core.len() == w.len();
                (at(&c.conjugator), at(&c.conjugator.inverse()), at(&c.core), literal)
            }));
        }
        WordTable {
            words,
            tail,
            splits,
            conj,
        }
    }
}

fn to_assignment(a: &Map6, b: &Map6) -> Assignment {
    let mut s = Assignment::new();
    for (g, m) in [(Gen(0), a), (Gen(1), b)] {
        for (i, &v) in m.iter().enumerate() {
            if v != NONE {
                s.insert(g, i as Nat, v as Nat).expect("injective");
            }
        }
    }
    s
}

struct WordSpace {
    /// Orbit representatives `(a, b)` with the number of pairs each covers.
    reps: Vec<(Map6, Map6, u64)>,
    total: u64,
}

fn word_space() -> WordSpace {
    let perms = permutations();
    let maps = injections(4);
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    let mut covered = 0;
    for a in &maps {
        let canon = perms.iter().map(|p| code(&conjugate(a, p))).min().unwrap();
        if canon != code(a) || !seen.insert(canon) {
            continue;
        }
        let stab: Vec<&Map6> = perms.iter().filter(|p| conjugate(a, p) == *a).collect();
        let orbit_a = (perms.len() / stab.len()) as u64;
        for b in &maps {
            let c = code(b);
            let mut fixing = 0;
            let mut minimal = true;
            for p in &stab {
                let img = code(&conjugate(b, p));
                if img < c {
                    minimal = false;
                    break;
                }
                fixing += (img == c) as usize;
            }
            if minimal {
                let weight = orbit_a * (stab.len() / fixing) as u64;
                covered += weight;
                reps.push((*a, *b, weight));
            }
        }
    }
    let total = (maps.len() * maps.len()) as u64;
    assert_eq!(covered, total, "orbit representatives must cover every assignment");
    WordSpace { reps, total }
}

/// Library values of every word at every point, checked against the
/// relational composition. Returns the number of disagreements.
fn evaluate_all(table: &WordTable, a: &Map6, b: &Map6, values: &mut [[u8; POINTS]]) -> u64 {
    let s = to_assignment(a, b);
    let rho = GroundRep::empty();
    let letter_rel = |l: Letter| relation(if l.gen == Gen(0) { a } else { b }, l.inv);
    let mut rels: Vec<Rel> = Vec::with_capacity(table.words.len());
    let mut bad = 0;
    for (i, w) in table.words.iter().enumerate() {
        let rel = match w.first() {
            None => std::array::from_fn(|k| 1 << k),
            Some(l) => compose(&letter_rel(l), &rels[table.tail[i]]),
        };
        rels.push(rel);
        for n in 0..POINTS {
            let lib = eval(w, &s, &rho, n as Nat);
            let expected = match rel[n] {
                0 => None,
                row if row.is_power_of_two() => Some(row.trailing_zeros() as Nat),
                _ => {
                    bad += 1;
                    continue;
                }
            };
            if lib != expected {
                bad += 1;
            }
            values[i][n] = lib.map_or(NONE, |v| v as u8);
        }
    }
    bad
}

fn fix_mask(values: &[u8; POINTS]) -> u8 {
    (0..POINTS).filter(|&n| values[n] == n as u8).fold(0, |m, n| m | 1 << n)
}

/// Splitting: `e_v` is a bijection `fix(uv) → fix(vu)`. Conjugation: `e_u`
/// carries `fix(u⁻¹ ŵ u)` injectively into `fix(ŵ)`, onto the pull-back when
/// the decomposition is literal.
fn check_laws(table: &WordTable, values: &[[u8; POINTS]]) -> (u64, u64) {
    let image = |w: usize, mask: u8| -> Option<u8> {
        let mut out = 0u8;
        for n in (0..POINTS).filter(|n| mask >> n & 1 == 1) {
            let v = values[w][n];
            if v == NONE || out >> v & 1 == 1 {
                return None;
            }
            out |= 1 << v;
        }
        Some(out)
    };
    let mut split_bad = 0;
    let mut conj_bad = 0;
    for (w, splits) in table.splits.iter().enumerate() {
        let fw = fix_mask(&values[w]);
        for &(v, vu) in splits {
            if image(v, fw) != Some(fix_mask(&values[vu])) {
                split_bad += 1;
            }
        }
        if let Some((u, u_inv, core, literal)) = table.conj[w] {
            let fc = fix_mask(&values[core]);
            match image(u, fw) {
                Some(img) if img & !fc == 0 => {}
                _ => conj_bad += 1,
            }
            if literal {
                let pulled = (0..POINTS)
                    .filter(|&x| fc >> x & 1 == 1)
                    .filter_map(|x| Some(values[u_inv][x]).filter(|&y| y != NONE))
                    .fold(0u8, |m, y| m | 1 << y);
                if pulled != fw {
                    conj_bad += 1;
                }
            }
        }
    }
    (split_bad, conj_bad)
}

struct WordRun {
    elapsed: Duration,
    classes: usize,
    total: u64,
    words: usize,
    eval_bad: u64,
    split_checks: usize,
    split_bad: u64,
    conj_bad: u64,
}

fn run_word_space() -> WordRun {
    let start = Instant::now();
    let table = WordTable::new(&[Gen(0), Gen(1)], 5);
    let space = word_space();
    let mut values = vec![[NONE; POINTS]; table.words.len()];
    let (mut eval_bad, mut split_bad, mut conj_bad) = (0, 0, 0);
    for (a, b, _) in &space.reps {
        eval_bad += evaluate_all(&table, a, b, &mut values);
        let (s, c) = check_laws(&table, &values);
        split_bad += s;
        conj_bad += c;
    }
    WordRun {
        elapsed: start.elapsed(),
        classes: space.reps.len(),
        total: space.total,
        words: table.words.len(),
        eval_bad,
        split_checks: table.splits.iter().map(Vec::len).sum(),
        split_bad,
        conj_bad,
    }
}

fn criterion_1(run: &WordRun) -> Outcome {
    ensure(run.eval_bad == 0, || {
        format!("{} disagreements with the relational oracle", run.eval_bad)
    })?;
    ensure(run.elapsed < Duration::from_secs(60), || {
        format!("took {:.1?}", run.elapsed)
    })?;
    Ok(format!(
        "{} words × {} assignments ({} relabelling classes), 0 disagreements",
        run.words, run.total, run.classes
    ))
}

fn criterion_2(run: &WordRun) -> Outcome {
    ensure(run.split_bad == 0, || format!("{} splitting failures", run.split_bad))?;
    ensure(run.conj_bad == 0, || format!("{} conjugation failures", run.conj_bad))?;
    Ok(format!(
        "{} splits and {} conjugations per class, 0 failures",
        run.split_checks,
        run.words - 1
    ))
}

/// `(s ∪ {(a, n, m)}, F) ≤ (s, F)` decided by brute force.
fn one_pair_extends(p: &Condition, a: Gen, n: Nat, m: Nat) -> bool {
    if p.s.get(a).is_some_and(|map| map.in_range(m)) {
        return false;
    }
    let before = Pairs::of(&p.s);
    let after = Pairs::of(&p.s.with(a, n, m).expect("fresh point"));
    p.f.iter().all(|w| before.fix(w) == after.fix(w))
}

fn criterion_3() -> Outcome {
    let rho = GroundRep::empty();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut unsound, mut rejected, mut tested) = (0, 0, 0);
    for _ in 0..500 {
        let k = rng.gen_range(1..=3);
        let gens: Vec<Gen> = (0..k).map(Gen).collect();
        let p = sample::condition(&mut rng, PosetMode::Cofinitary, &gens, 6, 3, 4, 10);
        let a = gens[rng.gen_range(0..k as usize)];
        let n = loop {
            let n = rng.gen_range(0..12);
            if !p.s.get(a).is_some_and(|m| m.in_domain(n)) {
                break n;
            }
        };
        let cert = extension::domain_extend(&p, a, n, &rho).map_err(|e| e.to_string())?;
        ensure(cert.exact, || "certificate not exact with no ground letters".into())?;
        for m in 0..200 {
            let truth = one_pair_extends(&p, a, n, m);
            tested += 1;
            match (cert.admits(m), truth) {
                (true, false) => unsound += 1,
                (false, true) => rejected += 1,
                _ => {}
            }
        }
    }
    ensure(unsound == 0, || format!("{unsound} admitted values fail the order"))?;
    Ok(format!(
        "{tested} values, 0 admitted-but-failing; {rejected} forbidden values would extend"
    ))
}

fn criterion_4() -> Outcome {
    let rho = GroundRep::empty();
    let mut total = 0;
    for mode in [PosetMode::Cofinitary, PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..500 {
            let (p, a0, t) = sample::embedding_triple(&mut rng, mode, &rho).map_err(|e| format!("{mode} #{i}: {e}"))?;
            let r = extension::canonical_extension(&p, &t, &a0, &rho).map_err(|e| format!("{mode} #{i}: {e}"))?;
            let both = |f: &dyn Fn(&Condition, &Condition) -> bool| f(&r, &p) && f(&r, &t);
            ensure(both(&|x, y| poset::leq(x, y, &rho).unwrap_or(false)), || {
                format!("{mode} #{i}: result does not extend both inputs")
            })?;
            ensure(both(&|x, y| suites::leq_by_definition(x, y, &rho)), || {
                format!("{mode} #{i}: definition check failed")
            })?;
            total += 1;
        }
    }
    Ok(format!("{total} triples over four modes, 0 failures"))
}

fn covers(report: &BuildReport, ranges: bool) -> Result<(), String> {
    let s = &report.final_condition.s;
    for &g in &report.generators {
        let map = s.get(g).ok_or_else(|| format!("{g} is empty"))?;
        for n in 0..report.point_budget {
            ensure(map.in_domain(n), || format!("{n} not in the domain of {g}"))?;
            ensure(!ranges || map.in_range(n), || format!("{n} not in the range of {g}"))?;
        }
        ensure(!ranges || map.is_injective(), || format!("{g} is not injective"))?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let rho = GroundRep::empty();
    let report =
        builder::build(&BuildConfig::new(PosetMode::Cofinitary, 4, 200, 4, 7), &rho).map_err(|e| e.to_string())?;
    covers(&report, true)?;
    let pairs = Pairs::of(&report.final_condition.s);
    for (w, frozen) in &report.frozen_fix {
        ensure(pairs.fix(w) == frozen.fix, || {
            format!("fixed set of {w} moved after stage {}", frozen.stage)
        })?;
    }
    builder::verify_cofinitary(&report, &rho).map_err(|v| format!("{} violations, first {}", v.len(), v[0]))?;
    within(start, Duration::from_secs(300), "build")?;
    Ok(format!(
        "{} frozen words unchanged, 4 bijections cover [0, 200), {:.1?}",
        report.frozen_fix.len(),
        start.elapsed()
    ))
}

fn criterion_6() -> Outcome {
    let report = suites::hit_density_suite(3, 4, 50, 64, 100, 6);
    ensure(report.not_found == 0 && report.errors == 0, || {
        format!(
            "{} not found, {} errors: {:?}",
            report.not_found,
            report.errors,
            report.misses.first()
        )
    })?;
    Ok(format!(
        "{} searches, 0 not found, largest offset {}",
        report.searches, report.max_offset
    ))
}

fn criterion_7() -> Outcome {
    let rho = GroundRep::empty();
    let mut lines = Vec::new();
    for mode in [PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
        let report = builder::build(&BuildConfig::new(mode, 3, 100, 2, 7), &rho).map_err(|e| format!("{mode}: {e}"))?;
        covers(&report, mode == PosetMode::Adp).map_err(|e| format!("{mode}: {e}"))?;
        let only = (mode == PosetMode::Mad).then_some(1);
        let gens = &report.generators;
        for (i, &a) in gens.iter().enumerate() {
            for &b in &gens[i + 1..] {
                let (key, frozen) = report
                    .frozen_fix
                    .iter()
                    .find(|(w, _)| w.occurrences() == BTreeSet::from([a, b]))
                    .ok_or_else(|| format!("{mode}: pair {a} {b} never frozen"))?;
                let now = agreement_by_scan(&report.final_condition.s, a, b, only);
                ensure(now == frozen.fix, || {
                    format!("{mode}: set of {key} moved after stage {}", frozen.stage)
                })?;
            }
        }
        lines.push(format!("{mode} {} pairs", gens.len() * (gens.len() - 1) / 2));
    }
    Ok(format!("{}; all frozen sets unchanged", lines.join(", ")))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let params = BrendleParams::seeded(vec![2, 3], 2, 1).map_err(|e| e.to_string())?;
    let (layout, t) = templates::brendle_build(&params).map_err(|e| e.to_string())?;
    t.check_axioms()
        .map_err(|v| format!("{} violations, first {}", v.len(), v[0]))?;
    let nesting = layout.nesting_violations();
    ensure(nesting.is_empty(), || format!("{} nesting violations", nesting.len()))?;
    let rank = t.rank().map_err(|e| e.to_string())?;
    let (_, again) = templates::brendle_build(&params).map_err(|e| e.to_string())?;
    let rerun = again.rank().map_err(|e| e.to_string())?;
    ensure(rank == rerun, || format!("rank {rank} then {rerun}"))?;

    let deeper = BrendleParams::seeded(vec![2, 3, 4], 2, 1).map_err(|e| e.to_string())?;
    let deep = templates::BrendleLayout::new(&deeper, templates::DEFAULT_ELEMENT_CAP).map_err(|e| e.to_string())?;
    let deep_nesting = deep.nesting_violations();
    ensure(deep_nesting.is_empty(), || {
        format!("(2,3,4): {} nesting violations", deep_nesting.len())
    })?;
    within(start, Duration::from_secs(60), "template checks")?;
    Ok(format!(
        "{} positions, |I| = {}, rank {rank} twice; nesting also holds on (2,3,4) with {} relevant positions, {:.1?}",
        layout.len(),
        t.ideal().len(),
        deep.relevant_indices().len(),
        start.elapsed()
    ))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for (poset, n) in [(SuslinPoset::Hechler, 1), (SuslinPoset::Localization, 2)] {
        let r = suslin::n_suslin_trial(poset, n, 10_000, 9);
        ensure(r.failures == 0 && r.unsound_meets == 0, || {
            format!(
                "{poset:?} n={n}: {} failures, {} unsound, {:?}",
                r.failures,
                r.unsound_meets,
                r.examples.first()
            )
        })?;
        parts.push(format!("{poset:?} {n}-Suslin 0/10000"));
    }
    Ok(parts.join(", "))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<PathBuf, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cofin"))
        .args(args)
        .env("COFIN_REPORT_DIR", dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    let path = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok(PathBuf::from(path.trim()))
}

fn criterion_10() -> Outcome {
    let commands: [&[&str]; 5] = [
        &[
            "build-group",
            "--mode",
            "cofinitary",
            "--generators",
            "3",
            "--points",
            "60",
            "--max-word-len",
            "3",
            "--seed",
            "7",
            "--csv",
        ],
        &["template", "--lambdas", "2,3", "--omega1", "2", "--seed", "1"],
        &[
            "suslin",
            "--poset",
            "localization",
            "--n",
            "2",
            "--samples",
            "2000",
            "--seed",
            "3",
        ],
        &["ffp-suite", "--mode", "mad", "--samples", "200", "--seed", "9"],
        &[
            "hit-density",
            "--generators",
            "3",
            "--words",
            "4",
            "--maxN",
            "20",
            "--window",
            "64",
            "--samples",
            "20",
            "--seed",
            "5",
        ],
    ];
    let root = std::env::temp_dir().join(format!("cofin-acceptance-{}", std::process::id()));
    let dirs = [root.join("first"), root.join("second")];
    let mut compared = 0;
    for args in commands {
        let paths: Vec<PathBuf> = dirs.iter().map(|d| run_cli(d, args)).collect::<Result<_, _>>()?;
        let mut files = vec![(paths[0].clone(), paths[1].clone())];
        if args.contains(&"--csv") {
            files.push((paths[0].with_extension("csv"), paths[1].with_extension("csv")));
        }
        for (x, y) in files {
            let (bx, by) = (
                std::fs::read(&x).map_err(|e| e.to_string())?,
                std::fs::read(&y).map_err(|e| e.to_string())?,
            );
            ensure(bx == by, || format!("{} and {} differ", x.display(), y.display()))?;
            ensure(x.file_name() == y.file_name(), || "report names differ".into())?;
            compared += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    Ok(format!("{compared} report files byte-identical across reruns"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, start: Instant, outcome: Outcome| {
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{t:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {why} [{t:.1?}]");
            }
        }
    };
    let start = Instant::now();
    let words = run_word_space();
    report(
        1,
        "evaluation matches relational composition",
        start,
        criterion_1(&words),
    );
    report(2, "splitting and conjugation laws", start, criterion_2(&words));
    let checks: [Check; 8] = [
        ("one-pair domain extensions are sound", criterion_3),
        ("strong embedding contract", criterion_4),
        ("frozen fixed sets survive the build", criterion_5),
        ("shift hits are dense", criterion_6),
        ("variant builds keep agreement sets", criterion_7),
        ("Brendle template axioms and nesting", criterion_8),
        ("Suslin meet constructors", criterion_9),
        ("CLI reports are deterministic", criterion_10),
    ];
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let start = Instant::now();
        report(i + 3, name, start, check());
    }
    if failed == 0 {
        println!("all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
