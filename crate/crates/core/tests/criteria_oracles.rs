//! Criterion checkers against brute-force oracles on small random instances.

use proptest::prelude::*;
use trace_rel_core::criteria::{self as crit, *};
use trace_rel_core::galois::{existential_image, universal_image, PropertyMapping};
use trace_rel_core::property::{safe_closure, TraceProperty};
use trace_rel_core::random::random_instance;
use trace_rel_core::verdict::Status;
use trace_rel_core::QuantConfig;

struct Raw {
    ns: usize,
    nt: usize,
    rel: Vec<Vec<bool>>,
    progs: Vec<(u64, u64)>,
    parent_t: Vec<Option<usize>>,
}

fn raw(ci: &CompilationInstance) -> Raw {
    let su = ci.source_universe();
    let tu = ci.target_universe();
    let rel = (0..su.len()).map(|s| (0..tu.len()).map(|t| ci.relation().contains(s, t)).collect()).collect();
    let mask = |ids: &[usize]| ids.iter().fold(0u64, |m, &i| m | 1 << i);
    let progs = ci.programs().iter().map(|p| (mask(p.source.ids()), mask(p.target.ids()))).collect();
    let parent_t = (0..tu.len())
        .map(|t| {
            let tr = tu.trace(t);
            if tr.is_empty() {
                None
            } else {
                tu.id_of(&tr.prefix(tr.len() - 1))
            }
        })
        .collect();
    Raw { ns: su.len(), nt: tu.len(), rel, progs, parent_t }
}

impl Raw {
    fn tau(&self, p: u64) -> u64 {
        let mut out = 0;
        for s in 0..self.ns {
            for t in 0..self.nt {
                if p >> s & 1 == 1 && self.rel[s][t] {
                    out |= 1 << t;
                }
            }
        }
        out
    }

    fn sigma(&self, p: u64) -> u64 {
        (0..self.ns).filter(|&s| (0..self.nt).all(|t| !self.rel[s][t] || p >> t & 1 == 1)).fold(0, |m, s| m | 1 << s)
    }

    fn cc(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| bt & !self.tau(bs) == 0)
    }

    fn tp_tau(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| (0u64..1 << self.ns).filter(|&p| bs & !p == 0).all(|p| bt & !self.tau(p) == 0))
    }

    fn tp_sigma(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| (0u64..1 << self.nt).filter(|&p| bs & !self.sigma(p) == 0).all(|p| bt & !p == 0))
    }

    fn hc(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| bt == self.tau(bs))
    }

    fn hp_sigma(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| (0u64..1 << self.nt).filter(|&p| self.sigma(p) == bs).all(|p| p == bt))
    }

    fn is_prefix(&self, m: usize, t: usize) -> bool {
        let mut cur = Some(t);
        while let Some(c) = cur {
            if c == m {
                return true;
            }
            cur = self.parent_t[c];
        }
        false
    }

    /// Every excluded trace has a prefix none of whose extensions are included.
    fn is_safety_t(&self, p: u64) -> bool {
        (0..self.nt).filter(|&t| p >> t & 1 == 0).all(|t| {
            (0..self.nt).filter(|&m| self.is_prefix(m, t)).any(|m| (0..self.nt).filter(|&e| self.is_prefix(m, e)).all(|e| p >> e & 1 == 0))
        })
    }

    fn safe_t(&self, p: u64) -> u64 {
        (0u64..1 << self.nt).filter(|&q| p & !q == 0 && self.is_safety_t(q)).fold((1u64 << self.nt) - 1, |acc, q| acc & q)
    }

    fn sp_sigma(&self) -> bool {
        self.progs
            .iter()
            .all(|&(bs, bt)| (0u64..1 << self.nt).filter(|&p| self.is_safety_t(p) && bs & !self.sigma(p) == 0).all(|p| bt & !p == 0))
    }

    fn sp_safe_tau(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| (0u64..1 << self.ns).filter(|&p| bs & !p == 0).all(|p| bt & !self.safe_t(self.tau(p)) == 0))
    }

    fn sc(&self) -> bool {
        self.progs.iter().all(|&(bs, bt)| {
            let good = self.tau(bs);
            (0..self.nt).filter(|&t| bt >> t & 1 == 1).all(|t| {
                (0..self.nt).filter(|&m| self.is_prefix(m, t)).all(|m| (0..self.nt).any(|e| self.is_prefix(m, e) && good >> e & 1 == 1))
            })
        })
    }
}

fn downsets(n: usize) -> Vec<Vec<u64>> {
    let props = 1usize << n;
    let mut out = Vec::new();
    for fam in 0u64..1 << props {
        let members: Vec<u64> = (0..props as u64).filter(|&p| fam >> p & 1 == 1).collect();
        let closed = members.iter().all(|&p| (0..props as u64).filter(|&q| q & !p == 0).all(|q| fam >> q & 1 == 1));
        if closed {
            out.push(members);
        }
    }
    out
}

fn closure_has(gens: &[u64], x: u64) -> bool {
    gens.iter().any(|&g| x & !g == 0)
}

fn instances(sizes: std::ops::RangeInclusive<usize>, per_size: u64) -> Vec<CompilationInstance> {
    let mut out = Vec::new();
    for size in sizes {
        for seed in 0..per_size {
            out.push(random_instance(seed * 31 + size as u64, size).unwrap());
        }
    }
    out
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[test]
fn tp_checkers_match_oracles() {
    let cfg = QuantConfig::default();
    let mut seen = [0usize; 2];
    for ci in instances(3..=5, 40) {
        let o = raw(&ci);
        let tau = PropertyMapping::existential(ci.relation());
        let sigma = PropertyMapping::universal(ci.relation());
        assert_eq!(check_cc_tilde(&ci).status, status(o.cc()), "{}", ci.name());
        for strategy in [crit::Strategy::Auto, crit::Strategy::Exhaustive] {
            assert_eq!(check_tp_tau(&ci, &tau, &cfg, strategy).unwrap().status, status(o.tp_tau()), "{}", ci.name());
            assert_eq!(check_tp_sigma(&ci, &sigma, &cfg, strategy).unwrap().status, status(o.tp_sigma()), "{}", ci.name());
        }
        assert!(check_trinity(&ci, &cfg).unwrap().passed());
        seen[o.cc() as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "instances cover both outcomes: {seen:?}");
}

#[test]
fn hyper_checkers_match_oracles() {
    let cfg = QuantConfig::default();
    let mut hp_fail = 0;
    for ci in instances(3..=5, 40) {
        let o = raw(&ci);
        assert_eq!(check_hc_tilde(&ci).unwrap().status, status(o.hc()), "{}", ci.name());
        assert_eq!(check_hp_tau(&ci, &cfg).unwrap().status, status(o.hc()), "{}", ci.name());
        for strategy in [crit::Strategy::Auto, crit::Strategy::Exhaustive] {
            assert_eq!(check_hp_sigma(&ci, &cfg, strategy).unwrap().status, status(o.hp_sigma()), "{}", ci.name());
        }
        hp_fail += !o.hp_sigma() as usize;
        for v in check_hp_variants(&ci, &cfg).unwrap() {
            assert_ne!(v.status, Status::Fail, "{}: {v:?}", ci.name());
        }
    }
    assert!(hp_fail > 0);
}

#[test]
fn schp_matches_all_subset_closed_families() {
    let cfg = QuantConfig::default();
    let families_s = downsets(3);
    assert_eq!(families_s.len(), 20);
    for seed in 0..60 {
        let ci = random_instance(seed, 3).unwrap();
        let o = raw(&ci);
        let families_t = downsets(o.nt);
        let schp_tau = o.progs.iter().all(|&(bs, bt)| {
            families_s.iter().filter(|h| h.contains(&bs)).all(|h| {
                let lifted: Vec<u64> = h.iter().map(|&p| o.tau(p)).collect();
                closure_has(&lifted, bt)
            })
        });
        let schp_sigma = o.progs.iter().all(|&(bs, bt)| {
            families_t.iter().all(|h| {
                let lifted: Vec<u64> = h.iter().map(|&p| o.sigma(p)).collect();
                !closure_has(&lifted, bs) || h.contains(&bt)
            })
        });
        assert_eq!(schp_tau, o.cc(), "seed {seed}");
        assert_eq!(schp_sigma, o.cc(), "seed {seed}");
        assert_eq!(check_schp_tau(&ci, &cfg).unwrap().status, status(schp_tau), "seed {seed}");
        assert_eq!(check_schp_sigma(&ci, &cfg).unwrap().status, status(schp_sigma), "seed {seed}");
        assert!(check_schp(&ci, &cfg).unwrap().passed());
    }
}

#[test]
fn safety_checkers_match_oracles() {
    let cfg = QuantConfig::default();
    let mut seen = [0usize; 2];
    for ci in instances(3..=5, 40) {
        let o = raw(&ci);
        assert_eq!(check_sc_tilde(&ci).unwrap().status, status(o.sc()), "{}", ci.name());
        for strategy in [crit::Strategy::Auto, crit::Strategy::Exhaustive] {
            assert_eq!(check_sp_sigma(&ci, &cfg, strategy).unwrap().status, status(o.sp_sigma()), "{}", ci.name());
            assert_eq!(check_sp_safe_tau(&ci, &cfg, strategy).unwrap().status, status(o.sp_safe_tau()), "{}", ci.name());
        }
        assert!(check_safety_trinity(&ci, &cfg).unwrap().passed());
        seen[o.sc() as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn safe_closure_is_least_safety_superset() {
    for seed in 0..30 {
        let ci = random_instance(seed, 5).unwrap();
        let o = raw(&ci);
        let tu = ci.target_universe();
        for m in 0u64..1 << o.nt {
            let p = TraceProperty::from_mask(tu, m).unwrap();
            assert_eq!(safe_closure(&p).unwrap().mask().unwrap(), o.safe_t(m));
        }
    }
}

#[test]
fn cc_eq_on_shared_universe() {
    let ci = random_instance(3, 4).unwrap();
    assert!(check_cc_eq(&ci).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trinity_agrees(seed in any::<u64>(), size in 3usize..=6) {
        let ci = random_instance(seed, size).unwrap();
        let cfg = QuantConfig::default().with_seed(seed);
        prop_assert!(check_trinity(&ci, &cfg).unwrap().passed());
        prop_assert!(check_safety_trinity(&ci, &cfg).unwrap().passed());
        prop_assert!(check_schp(&ci, &cfg).unwrap().passed());
    }

    #[test]
    fn images_are_adjoint(seed in any::<u64>(), size in 3usize..=5, a in any::<u64>(), b in any::<u64>()) {
        let ci = random_instance(seed, size).unwrap();
        let su = ci.source_universe();
        let tu = ci.target_universe();
        let x = TraceProperty::from_mask(su, a & ((1 << su.len()) - 1)).unwrap();
        let y = TraceProperty::from_mask(tu, b & ((1 << tu.len()) - 1)).unwrap();
        let lhs = existential_image(ci.relation(), &x).unwrap().is_subset(&y).unwrap();
        let rhs = x.is_subset(&universal_image(ci.relation(), &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
