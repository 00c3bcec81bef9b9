use proptest::prelude::*;
use trace_rel_core::random::random_robust_instance;
use trace_rel_core::robust::*;
use trace_rel_core::verdict::Status;
use trace_rel_core::QuantConfig;

fn mask(ids: &[usize]) -> u64 {
    ids.iter().fold(0, |m, &i| m | 1 << i)
}

fn tau(ri: &RobustInstance, p: u64) -> u64 {
    let r = ri.relation();
    let mut out = 0;
    for s in (0..r.source().len()).filter(|s| p >> s & 1 == 1) {
        for t in 0..r.target().len() {
            if r.contains(s, t) {
                out |= 1 << t;
            }
        }
    }
    out
}

fn rtc_oracle(ri: &RobustInstance) -> bool {
    let r = ri.relation();
    (0..ri.programs().len()).all(|p| {
        (0..ri.target_contexts().len()).all(|ct| {
            ri.target_run(p, ct)
                .ids()
                .iter()
                .all(|&t| (0..ri.source_contexts().len()).any(|cs| ri.source_run(p, cs).ids().iter().any(|&s| r.contains(s, t))))
        })
    })
}

fn rtp_tau_oracle(ri: &RobustInstance) -> bool {
    let ns = ri.relation().source().len();
    (0..ri.programs().len()).all(|p| {
        (0u64..1 << ns).all(|pi| {
            let src_ok = (0..ri.source_contexts().len()).all(|c| mask(ri.source_run(p, c).ids()) & !pi == 0);
            !src_ok || (0..ri.target_contexts().len()).all(|c| mask(ri.target_run(p, c).ids()) & !tau(ri, pi) == 0)
        })
    })
}

fn rhc_oracle(ri: &RobustInstance) -> bool {
    (0..ri.programs().len()).all(|p| {
        (0..ri.target_contexts().len()).all(|ct| {
            let bt = mask(ri.target_run(p, ct).ids());
            (0..ri.source_contexts().len()).any(|cs| tau(ri, mask(ri.source_run(p, cs).ids())) == bt)
        })
    })
}

#[test]
fn robust_checkers_match_oracles() {
    let cfg = QuantConfig::default();
    let mut seen = [0usize; 2];
    for seed in 0..150 {
        let ri = random_robust_instance(seed, 3 + (seed as usize % 3), 3).unwrap();
        let rtc = rtc_oracle(&ri);
        let st = |ok: bool| if ok { Status::Pass } else { Status::Fail };
        assert_eq!(check_rtc_tilde(&ri, WitnessMode::Search).unwrap().status, st(rtc), "seed {seed}");
        assert_eq!(rtc, rtp_tau_oracle(&ri), "seed {seed}");
        assert!(check_robust_trinity(&ri, &cfg, WitnessMode::Search).unwrap().passed(), "seed {seed}");
        assert!(check_robust_safety_trinity(&ri, &cfg, WitnessMode::Search).unwrap().passed(), "seed {seed}");
        assert_eq!(check_rhc_tilde(&ri, WitnessMode::Search).unwrap().status, st(rhc_oracle(&ri)), "seed {seed}");
        seen[rtc as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn witness_context_reported() {
    let ri = random_robust_instance(7, 4, 2).unwrap();
    let v = check_rtc_tilde(&ri, WitnessMode::Search).unwrap();
    if v.passed() {
        assert!(v.witness_context.is_some());
    }
    let json = serde_json::to_value(&v).unwrap();
    assert!(json.get("criterion").is_some());
}

proptest! {
    #[test]
    fn constructive_pass_implies_search_pass(seed in any::<u64>(), size in 3usize..=5) {
        let ri = random_robust_instance(seed, size, 3).unwrap();
        for check in [check_rtc_tilde, check_rsc_tilde, check_rhc_tilde] {
            let c = check(&ri, WitnessMode::Constructive).unwrap();
            let s = check(&ri, WitnessMode::Search).unwrap();
            prop_assert!(!c.passed() || s.passed());
        }
    }

    #[test]
    fn robust_trinities_agree(seed in any::<u64>(), size in 3usize..=6) {
        let ri = random_robust_instance(seed, size, 3).unwrap();
        let cfg = QuantConfig::default();
        prop_assert!(check_robust_trinity(&ri, &cfg, WitnessMode::Search).unwrap().passed());
        prop_assert!(check_robust_safety_trinity(&ri, &cfg, WitnessMode::Search).unwrap().passed());
    }
}
