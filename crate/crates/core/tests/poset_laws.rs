use std::collections::BTreeSet;

use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cofin::eval::GroundRep;
use cofin::extension;
use cofin::poset::{leq, Condition, PosetMode};
use cofin::sample;
use cofin::suites::leq_by_definition;
use cofin::words::Gen;

const MODES: [PosetMode; 4] = [PosetMode::Cofinitary, PosetMode::Adp, PosetMode::Edf, PosetMode::Mad];
const GENS: [Gen; 3] = [Gen(0), Gen(1), Gen(2)];

fn sampled(seed: u64) -> (ChaCha8Rng, PosetMode, Condition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = MODES[rng.gen_range(0..4)];
    let p = sample::condition(&mut rng, mode, &GENS, 4, 3, 4, 10);
    (rng, mode, p)
}

/// A chain `p₂ ≤ p₁ ≤ p₀` built from certified one-pair extensions.
fn chain(rng: &mut ChaCha8Rng, p: &Condition, rho: &GroundRep) -> Vec<Condition> {
    let mut out = vec![p.clone()];
    let mut cur = p.clone();
    for _ in 0..6 {
        let a = GENS[rng.gen_range(0..3)];
        let floor = if p.mode == PosetMode::Mad {
            rng.gen_range(0..2)
        } else {
            rng.gen_range(0..14)
        };
        if let Ok((next, _)) = extension::extend_domain(&cur, a, rng.gen_range(0..14), floor, rho) {
            cur = next;
            out.push(cur.clone());
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn order_is_reflexive(seed in any::<u64>()) {
        let rho = GroundRep::empty();
        let (_, _, p) = sampled(seed);
        prop_assert!(leq(&p, &p, &rho).unwrap());
    }

    #[test]
    fn order_matches_definition(seed in any::<u64>()) {
        let rho = GroundRep::empty();
        let (mut rng, _, q) = sampled(seed);
        let p = sample::random_extension(&mut rng, &q, 3, 10);
        if p.validate(&rho).is_ok() {
            prop_assert_eq!(leq(&p, &q, &rho).unwrap(), leq_by_definition(&p, &q, &rho));
        }
    }

    #[test]
    fn certified_chains_are_transitive(seed in any::<u64>()) {
        let rho = GroundRep::empty();
        let (mut rng, _, p) = sampled(seed);
        let c = chain(&mut rng, &p, &rho);
        for (i, lo) in c.iter().enumerate() {
            for hi in &c[..i] {
                prop_assert!(leq(lo, hi, &rho).unwrap());
            }
        }
    }

    #[test]
    fn strong_restriction_is_monotone(seed in any::<u64>(), mask in 0u8..8) {
        let rho = GroundRep::empty();
        let (mut rng, _, q) = sampled(seed);
        let b: BTreeSet<Gen> = GENS.iter().copied().filter(|g| mask >> g.0 & 1 == 1).collect();
        let p = chain(&mut rng, &q, &rho).pop().unwrap();
        prop_assert!(leq(&p.strong_restrict(&b, &rho), &q.strong_restrict(&b, &rho), &rho).unwrap());
        prop_assert!(leq(&p.restrict(&b), &p.strong_restrict(&b, &rho), &rho).unwrap());
    }

    #[test]
    fn canonical_extension_extends_both(seed in any::<u64>()) {
        let rho = GroundRep::empty();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode = MODES[rng.gen_range(0..4)];
        let (p, a0, t) = sample::embedding_triple(&mut rng, mode, &rho).unwrap();
        let r = extension::canonical_extension(&p, &t, &a0, &rho).unwrap();
        prop_assert!(leq(&r, &p, &rho).unwrap() && leq(&r, &t, &rho).unwrap());
    }
}
