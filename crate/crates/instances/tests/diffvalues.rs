use trace_rel_core::criteria::check_cc_tilde;
use trace_rel_core::galois::universal_image;
use trace_rel_core::property::TraceProperty;
use trace_rel_core::trace::Payload;
use trace_rel_instances::diffvalues::*;

fn small(depth: usize, variant: Variant) -> DvConfig {
    DvConfig { depth, max_nodes: 9, nats: vec![0, 1], variant }
}

#[test]
fn correct_compiler_small_depths() {
    for depth in 0..=2 {
        let ci = dv_instance(&small(depth, Variant::Correct)).unwrap();
        let v = check_cc_tilde(&ci);
        assert!(v.passed(), "depth {depth}: {v:?}");
    }
}

#[test]
fn mutant_fails_with_witness() {
    let ci = dv_instance(&small(1, Variant::NoBranchSwap)).unwrap();
    let v = check_cc_tilde(&ci);
    assert!(v.failed());
    let cx = v.counterexample.unwrap();
    let program = Expr::parse(cx.program.as_deref().unwrap()).unwrap();
    assert!(matches!(program, Expr::If(..)));
    assert!(cx.trace.is_some());
}

#[test]
fn relation_agrees_with_run_predicate() {
    let ci = dv_instance(&small(2, Variant::Correct)).unwrap();
    let r = ci.relation();
    let decode = |t: &trace_rel_core::trace::Trace| t.events().iter().map(|e| e.payload().cloned().unwrap()).collect::<Vec<_>>();
    let to_s = |p: &Payload| match p {
        Payload::Nat(n) => Some(SVal::Nat(*n)),
        Payload::Bool(b) => Some(SVal::Bool(*b)),
        _ => None,
    };
    let to_t = |p: &Payload| match p {
        Payload::Nat(n) => *n,
        _ => unreachable!(),
    };
    for s in 0..r.source().len() {
        let sp = decode(r.source().trace(s));
        let sr = SrcRun { inputs: sp[..sp.len() - 1].iter().map(|p| to_s(p).unwrap()).collect(), result: to_s(sp.last().unwrap()) };
        for t in 0..r.target().len() {
            let tp = decode(r.target().trace(t));
            let tr = TgtRun { inputs: tp[..tp.len() - 1].iter().map(to_t).collect(), result: to_t(tp.last().unwrap()) };
            assert_eq!(r.contains(s, t), runs_related(&sr, &tr), "{sr:?} {tr:?}");
        }
    }
}

#[test]
fn well_typed_programs_never_error() {
    for e in enumerate_programs(3, 9, &[0, 1, 2]) {
        assert!(src_runs(&e, &[0, 1, 2]).iter().all(|r| r.result.is_some()), "{e}");
    }
}

#[test]
fn zero_result_replaceable_by_zero_and_false() {
    let ci = dv_instance(&small(1, Variant::Correct)).unwrap();
    let r = ci.relation();
    let tu = r.target();
    let zero = TraceProperty::from_ids(tu, (0..tu.len()).filter(|&t| tu.trace(t).events().last().unwrap().payload() == Some(&Payload::Nat(0))));
    let img = universal_image(r, &zero).unwrap();
    let su = r.source();
    for s in 0..su.len() {
        let res = su.trace(s).events().last().unwrap().payload().cloned().unwrap();
        let zero_like = matches!(res, Payload::Nat(0) | Payload::Bool(false));
        // a source trace is kept iff its result is zero-like and all its related targets exist in the zero property
        if img.contains_id(s) {
            assert!(zero_like || r.targets_of(s).is_empty(), "{}", su.trace(s));
        } else {
            assert!(!zero_like || r.targets_of(s).iter().any(|&t| !zero.contains_id(t)));
        }
    }
    assert!((0..su.len()).any(|s| img.contains_id(s) && su.trace(s).events().last().unwrap().payload() == Some(&Payload::Bool(false))));
}

#[test]
fn default_depth_three_is_correct() {
    let start = std::time::Instant::now();
    let ci = dv_instance(&DvConfig::default()).unwrap();
    let v = check_cc_tilde(&ci);
    eprintln!("diffvalues depth 3: {} programs, {:?}", ci.programs().len(), start.elapsed());
    assert!(v.passed(), "{v:?}");
}
