use proptest::prelude::*;
use trace_rel_core::config::QuantConfig;
use trace_rel_core::criteria::{check_cc_tilde, check_sc_tilde};
use trace_rel_core::galois::{existential_image, universal_image};
use trace_rel_core::property::{is_safety, TraceProperty};
use trace_rel_core::verdict::CriterionVerdict;
use trace_rel_instances::models::*;

const SIGMAS: [&[&str]; 2] = [&["a"], &["a", "b"]];

// the |Σ| = 2, max_len 3 sweep (2^30 properties) runs in the acceptance suite
fn lengths(sigma: &[&str]) -> std::ops::RangeInclusive<usize> {
    0..=if sigma.len() == 1 { 3 } else { 2 }
}

#[test]
fn ub_closed_forms_match_generic_images() {
    for sigma in SIGMAS {
        for len in lengths(sigma) {
            let m = UbModel::new(sigma, &[], len, 1 << 12).unwrap();
            let r = ub_relation(&m);
            let start = std::time::Instant::now();
            for v in [sweep_closed_form(&ub_tau_form(&m), &r, 32).unwrap(), sweep_closed_form(&ub_sigma_form(&m), &r, 32).unwrap()] {
                assert!(v.passed(), "|Σ|={} len {len}: {v:?}", sigma.len());
            }
            eprintln!("ub |Σ|={} len {len}: {}+{} traces, {:?}", sigma.len(), m.source().len(), m.target().len(), start.elapsed());
        }
    }
}

#[test]
fn res_closed_forms_match_generic_images() {
    for sigma in SIGMAS {
        for len in lengths(sigma) {
            let m = ResModel::new(sigma, len, 0, 1 << 12).unwrap();
            let r = res_relation(&m);
            let start = std::time::Instant::now();
            for v in [sweep_closed_form(&res_tau_form(&m), &r, 32).unwrap(), sweep_closed_form(&res_sigma_form(&m), &r, 32).unwrap()] {
                assert!(v.passed(), "|Σ|={} len {len}: {v:?}", sigma.len());
            }
            eprintln!("res |Σ|={} len {len}: {}+{} traces, {:?}", sigma.len(), m.source().len(), m.target().len(), start.elapsed());
        }
    }
}

#[test]
fn ub_examples() {
    let m = UbModel::new(&["e1", "e2"], &[], 2, 1000).unwrap();
    let full_t = TraceProperty::full(m.target());
    assert_eq!(ub_sigma_closed(&m, &full_t).unwrap(), TraceProperty::full(m.source()));
    assert_eq!(ub_sigma_closed(&m, &full_t).unwrap(), universal_image(&ub_relation(&m), &full_t).unwrap());
}

#[test]
fn res_sigma_without_limit_traces_is_empty() {
    let m = ResModel::new(&["a", "b"], 2, 0, 1000).unwrap();
    let t = m.target();
    let no_limit = TraceProperty::from_ids(t, (0..t.len()).filter(|&i| !t.trace(i).is_terminated()));
    assert!(res_sigma_closed(&m, &no_limit).unwrap().is_empty());
}

#[test]
fn extra_target_event_demands_no_undefined_behavior() {
    let m = UbModel::new(&["a"], &["x"], 3, 1000).unwrap();
    let t = m.target();
    let never_x = TraceProperty::from_ids(t, (0..t.len()).filter(|&i| t.trace(i).labels().iter().all(|l| l != "x")));
    let img = ub_sigma_closed(&m, &never_x).unwrap();
    assert_eq!(img, universal_image(&ub_relation(&m), &never_x).unwrap());
    let s = m.source();
    for id in 0..s.len() {
        let tr = s.trace(id);
        // m·Goes_wrong with m at the length bound has no proper extension in the bounded target universe
        let wrong_with_room = tr.is_terminated() && tr.regular_len() < 3;
        assert_eq!(img.contains_id(id), !wrong_with_room, "{tr}");
    }
}

#[test]
fn fuel_instance_is_correct_for_every_fuel() {
    for fuel in 0..=6 {
        let ci = fuel_compiler_instance(&FuelConfig { fuel, ..FuelConfig::default() }).unwrap();
        assert!(ci.programs().len() > 100);
        assert!(check_cc_tilde(&ci).passed(), "fuel {fuel}");
        assert!(check_sc_tilde(&ci).unwrap().passed(), "fuel {fuel}");
        let union = union_relation(ci.relation(), &fuel_ub_relation(&ci)).unwrap();
        let under_union = check_cc_tilde(&ci.with_relation(union).unwrap());
        let v = CriterionVerdict::implication("CC~ res => CC~ union", &check_cc_tilde(&ci), &under_union);
        assert!(v.passed(), "fuel {fuel}: {v:?}");
    }
}

#[test]
fn fuel_truncation_is_related_to_the_full_run() {
    let ci = fuel_compiler_instance(&FuelConfig { fuel: 1, ..FuelConfig::default() }).unwrap();
    let p = ci.programs().iter().find(|p| p.id == "(seq (emit e1) (emit e2))").unwrap();
    let s = p.source.traces().next().unwrap().to_string();
    let t = p.target.traces().next().unwrap().to_string();
    assert_eq!((s.as_str(), t.as_str()), ("e1·e2", "e1·Resource_Limit_Hit"));
    let zero = fuel_compiler_instance(&FuelConfig { fuel: 0, ..FuelConfig::default() }).unwrap();
    let p = zero.programs().iter().find(|p| p.id == "(emit e1)").unwrap();
    assert_eq!(p.target.traces().next().unwrap().to_string(), "Resource_Limit_Hit");
}

#[test]
fn union_contains_both_relations() {
    let ci = fuel_compiler_instance(&FuelConfig { max_size: 1, max_steps: 2, ..FuelConfig::default() }).unwrap();
    let res = ci.relation().clone();
    let ub = fuel_ub_relation(&ci);
    let u = union_relation(&res, &ub).unwrap();
    for (s, t) in res.pairs().chain(ub.pairs()) {
        assert!(u.contains(s, t));
    }
    assert_eq!(u.len(), res.pairs().chain(ub.pairs()).collect::<std::collections::BTreeSet<_>>().len());
    assert_eq!(union_relation(&res, &res).unwrap(), res);
}

#[test]
fn resource_safety_round_trip() {
    let cfg = QuantConfig::default();
    for (sigma, len) in [(&["a"][..], 3), (&["a", "b"][..], 1), (&["a"][..], 2)] {
        let m = ResModel::new(sigma, len, 0, 1000).unwrap();
        assert!(m.source().len() <= 12 && m.target().len() <= 12);
        let v = res_safety_roundtrip(&m, &cfg).unwrap();
        assert!(v.passed(), "{v:?}");
        assert!(v.stats["safety properties"] > 0);
    }
}

#[test]
fn non_safety_image_is_outside_the_claim() {
    // a non-safety source property can still map to a non-safety target property
    let m = ResModel::new(&["a"], 2, 0, 1000).unwrap();
    let s = m.source();
    let only_long = TraceProperty::from_ids(s, [s.parse_trace(&["a", "a"]).unwrap()]);
    assert!(!is_safety(&only_long).unwrap());
    let img = res_tau_closed(&m, &only_long).unwrap();
    assert_eq!(img, existential_image(&res_relation(&m), &only_long).unwrap());
}

proptest! {
    #[test]
    fn closed_forms_agree_on_property_sets(bits in any::<u32>(), tbits in any::<u16>()) {
        let ub = UbModel::new(&["a", "b"], &["x"], 2, 1000).unwrap();
        let r = ub_relation(&ub);
        let ps = TraceProperty::from_ids(ub.source(), (0..ub.source().len()).filter(|&i| bits >> (i % 32) & 1 == 1));
        let pt = TraceProperty::from_ids(ub.target(), (0..ub.target().len()).filter(|&i| tbits >> (i % 16) & 1 == 1));
        prop_assert_eq!(ub_tau_closed(&ub, &ps).unwrap(), existential_image(&r, &ps).unwrap());
        prop_assert_eq!(ub_sigma_closed(&ub, &pt).unwrap(), universal_image(&r, &pt).unwrap());

        let res = ResModel::new(&["a", "b"], 2, 0, 1000).unwrap();
        let r = res_relation(&res);
        let ps = TraceProperty::from_ids(res.source(), (0..res.source().len()).filter(|&i| tbits >> (i % 16) & 1 == 1));
        let pt = TraceProperty::from_ids(res.target(), (0..res.target().len()).filter(|&i| bits >> (i % 32) & 1 == 1));
        prop_assert_eq!(res_tau_closed(&res, &ps).unwrap(), existential_image(&r, &ps).unwrap());
        prop_assert_eq!(res_sigma_closed(&res, &pt).unwrap(), universal_image(&r, &pt).unwrap());
    }
}
