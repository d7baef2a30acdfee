use cofin::builder::{
    build, check_hits, check_totality, verify_cofinitary, verify_variant, BuildConfig, BuildError, FixViolation,
    HitGoal,
};
use cofin::eval::{GroundPermutation, GroundRep, PermutationSpec};
use cofin::poset::PosetMode;
use cofin::words::{Gen, Word};

#[test]
fn cofinitary_build_with_hits_verifies() {
    let rho = GroundRep::empty();
    let mut config = BuildConfig::new(PosetMode::Cofinitary, 3, 60, 3, 11);
    config.hits = vec![
        HitGoal {
            gen: Gen(0),
            sigma: PermutationSpec::Zshift,
            from: 40,
        },
        HitGoal {
            gen: Gen(2),
            sigma: PermutationSpec::Zshift,
            from: 90,
        },
    ];
    let report = build(&config, &rho).unwrap();
    assert!(check_totality(&report).is_empty());
    assert!(check_hits(&report, &config).is_empty());
    verify_cofinitary(&report, &rho).unwrap();
}

#[test]
fn builds_over_a_shifted_ground_letter() {
    let rho = GroundRep::empty().with(Gen(9), GroundPermutation::ZShift);
    let report = build(&BuildConfig::new(PosetMode::Cofinitary, 2, 30, 3, 4), &rho).unwrap();
    assert!(check_totality(&report).is_empty());
    verify_cofinitary(&report, &rho).unwrap();
}

#[test]
fn injected_fixed_point_is_named() {
    let rho = GroundRep::empty();
    let mut report = build(&BuildConfig::new(PosetMode::Cofinitary, 2, 20, 2, 1), &rho).unwrap();
    let k = 500;
    report.final_condition.s.insert(Gen(1), k, k).unwrap();
    let violations = verify_cofinitary(&report, &rho).unwrap_err();
    let a = Word::gen(Gen(1));
    assert!(violations
        .iter()
        .any(|v| matches!(v, FixViolation::FrozenChanged { word, .. } if *word == a)));
}

#[test]
fn variant_builds_verify() {
    let rho = GroundRep::empty();
    for mode in [PosetMode::Adp, PosetMode::Edf, PosetMode::Mad] {
        let report = build(&BuildConfig::new(mode, 3, 50, 2, 2), &rho).unwrap();
        assert!(check_totality(&report).is_empty(), "{mode}");
        verify_variant(&report, &rho).unwrap();
    }
}

#[test]
fn tight_ceiling_keeps_the_partial_report() {
    let rho = GroundRep::empty();
    let mut config = BuildConfig::new(PosetMode::Cofinitary, 3, 50, 3, 3);
    config.value_ceiling = Some(10);
    let err = build(&config, &rho).unwrap_err();
    assert!(matches!(err, BuildError::BudgetExhausted { .. }), "{err}");
    assert!(!err.partial().unwrap().goal_log.is_empty());
}

#[test]
fn same_seed_same_report() {
    let rho = GroundRep::empty();
    let config = BuildConfig::new(PosetMode::Cofinitary, 3, 40, 3, 8);
    let a = serde_json::to_string(&build(&config, &rho).unwrap()).unwrap();
    let b = serde_json::to_string(&build(&config, &rho).unwrap()).unwrap();
    assert_eq!(a, b);
}
