//! Whole-program, hyperproperty and safety criteria over a compilation instance.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::QuantConfig;
use crate::error::{cap_exceeded, Error, Result};
use crate::galois::{existential_image, is_insertion, is_reflection, universal_image, GaloisConnection, PropertyMapping, TraceRelation};
use crate::property::{cone_complement, is_safety, safe_closure, Behavior, TraceProperty};
use crate::trace::{TraceId, Universe};
use crate::verdict::{Counterexample, CriterionVerdict};

/// A source program, its compiled counterpart, and both behaviors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramPair {
    pub id: String,
    pub compiled: String,
    pub source: Behavior,
    pub target: Behavior,
}

/// Finitely many programs with their source and target behaviors, and a trace relation.
#[derive(Debug, Clone)]
pub struct CompilationInstance {
    name: String,
    relation: TraceRelation,
    programs: Vec<ProgramPair>,
}

impl CompilationInstance {
    pub fn new(name: impl Into<String>, relation: TraceRelation, programs: Vec<ProgramPair>) -> Result<Self> {
        let name = name.into();
        for p in &programs {
            relation.source().require_same(p.source.universe())?;
            relation.target().require_same(p.target.universe())?;
            if p.source.is_empty() || p.target.is_empty() {
                return Err(Error::InvalidInstance(format!("program `{}` of `{name}` has an empty behavior", p.id)));
            }
        }
        Ok(CompilationInstance { name, relation, programs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relation(&self) -> &TraceRelation {
        &self.relation
    }

    pub fn programs(&self) -> &[ProgramPair] {
        &self.programs
    }

    pub fn source_universe(&self) -> &Universe {
        self.relation.source()
    }

    pub fn target_universe(&self) -> &Universe {
        self.relation.target()
    }

    /// The same programs under another relation over the same universes.
    pub fn with_relation(&self, relation: TraceRelation) -> Result<Self> {
        Self::new(self.name.clone(), relation, self.programs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Closed-form fast path when applicable, exhaustive otherwise.
    Auto,
    /// Quantify over every property; fails with a cap error on large universes.
    Exhaustive,
}

fn first_outside(beh: &Behavior, p: &TraceProperty) -> Option<TraceId> {
    beh.ids().iter().copied().find(|&t| !p.contains_id(t))
}

fn labels(p: &TraceProperty) -> Vec<String> {
    p.labels()
}

fn behavior_labels(b: &Behavior) -> Vec<String> {
    b.traces().map(|t| t.to_string()).collect()
}

fn mask_of(u: &Universe, ids: &[TraceId]) -> u64 {
    debug_assert!(u.len() <= 64);
    ids.iter().fold(0, |m, &i| m | 1 << i)
}

fn require_small(u: &Universe, cfg: &QuantConfig, what: &str) -> Result<()> {
    if u.len() > cfg.cap_bits as usize || u.len() > 63 {
        return Err(cap_exceeded(format!("{what} over `{}`", u.name()), format!("2^{}", u.len()), format!("2^{}", cfg.cap_bits)));
    }
    Ok(())
}

/// `CC=`: target behaviors are included in source behaviors over a shared universe.
pub fn check_cc_eq(ci: &CompilationInstance) -> Result<CriterionVerdict> {
    ci.source_universe().require_same(ci.target_universe())?;
    let mut checked = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        for &t in p.target.ids() {
            checked += 1;
            if !p.source.contains_id(t) {
                let cx = Counterexample::new("target trace is not a source trace")
                    .program(i, &p.id)
                    .trace(t, ci.target_universe().trace(t));
                return Ok(CriterionVerdict::fail("CC=", cx).stat("target_traces", checked));
            }
        }
    }
    Ok(CriterionVerdict::pass("CC=").stat("programs", ci.programs.len() as u64).stat("target_traces", checked))
}

/// `CC~`: every target trace is related to some source trace of the same program.
pub fn check_cc_tilde(ci: &CompilationInstance) -> CriterionVerdict {
    let r = &ci.relation;
    let mut checked = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        for &t in p.target.ids() {
            checked += 1;
            if !r.sources_of(t).iter().any(|&s| p.source.contains_id(s)) {
                let cx = Counterexample::new("no related source trace")
                    .program(i, &p.id)
                    .trace(t, ci.target_universe().trace(t));
                return CriterionVerdict::fail("CC~", cx).stat("target_traces", checked);
            }
        }
    }
    CriterionVerdict::pass("CC~").stat("programs", ci.programs.len() as u64).stat("target_traces", checked)
}

fn use_fast_path(map: &PropertyMapping, cfg: &QuantConfig, strategy: Strategy) -> Result<bool> {
    let small = map.input().len() <= cfg.cap_bits as usize && map.input().len() <= 63;
    match strategy {
        Strategy::Exhaustive => {
            require_small(map.input(), cfg, "exhaustive property scan")?;
            Ok(false)
        }
        Strategy::Auto if map.monotone_by_construction() => Ok(true),
        Strategy::Auto if small => map.is_monotone(cfg),
        Strategy::Auto => Err(cap_exceeded(
            format!("property scan for non-monotone `{}`", map.name()),
            format!("2^{}", map.input().len()),
            format!("2^{}", cfg.cap_bits),
        )),
    }
}

/// `TP^τ`: `beh_S ⊆ π ⇒ beh_T ⊆ τ(π)` for every source property `π`.
pub fn check_tp_tau(ci: &CompilationInstance, tau: &PropertyMapping, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    tau.input().require_same(ci.source_universe())?;
    tau.output().require_same(ci.target_universe())?;
    let name = format!("TP^{}", tau.name());
    if use_fast_path(tau, cfg, strategy)? {
        for (i, p) in ci.programs.iter().enumerate() {
            let img = tau.apply(&p.source.to_property())?;
            if let Some(t) = first_outside(&p.target, &img) {
                let cx = Counterexample::new("target trace escapes the image of the source behavior")
                    .program(i, &p.id)
                    .trace(t, ci.target_universe().trace(t))
                    .property(behavior_labels(&p.source));
                return Ok(CriterionVerdict::fail(name, cx).stat("mode_exhaustive", 0));
            }
        }
        return Ok(CriterionVerdict::pass(name).stat("mode_exhaustive", 0).stat("programs", ci.programs.len() as u64));
    }
    let su = ci.source_universe();
    let images = (0u64..1 << su.len()).map(|m| tau.apply(&TraceProperty::from_mask(su, m)?)).collect::<Result<Vec<_>>>()?;
    let mut checked = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        let b = mask_of(su, p.source.ids());
        for (m, img) in images.iter().enumerate() {
            if m as u64 & b != b {
                continue;
            }
            checked += 1;
            if let Some(t) = first_outside(&p.target, img) {
                let cx = Counterexample::new("source property holds but its image fails on the target")
                    .program(i, &p.id)
                    .trace(t, ci.target_universe().trace(t))
                    .property(labels(&TraceProperty::from_mask(su, m as u64)?));
                return Ok(CriterionVerdict::fail(name, cx).stat("mode_exhaustive", 1).stat("properties_checked", checked));
            }
        }
    }
    Ok(CriterionVerdict::pass(name).stat("mode_exhaustive", 1).stat("properties_checked", checked))
}

/// `TP^σ`: `beh_S ⊆ σ(π) ⇒ beh_T ⊆ π` for every target property `π`.
pub fn check_tp_sigma(ci: &CompilationInstance, sigma: &PropertyMapping, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    sigma.input().require_same(ci.target_universe())?;
    sigma.output().require_same(ci.source_universe())?;
    let name = format!("TP^{}", sigma.name());
    let tu = ci.target_universe();
    if use_fast_path(sigma, cfg, strategy)? {
        for (i, p) in ci.programs.iter().enumerate() {
            for &t in p.target.ids() {
                let mut pi = TraceProperty::full(tu);
                pi.remove(t);
                if first_outside(&p.source, &sigma.apply(&pi)?).is_none() {
                    let cx = Counterexample::new("source satisfies the image of a property the target violates")
                        .program(i, &p.id)
                        .trace(t, tu.trace(t))
                        .property(labels(&pi));
                    return Ok(CriterionVerdict::fail(name, cx).stat("mode_exhaustive", 0));
                }
            }
        }
        return Ok(CriterionVerdict::pass(name).stat("mode_exhaustive", 0).stat("programs", ci.programs.len() as u64));
    }
    let images = (0u64..1 << tu.len()).map(|m| sigma.apply(&TraceProperty::from_mask(tu, m)?)).collect::<Result<Vec<_>>>()?;
    let mut checked = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        let bt = mask_of(tu, p.target.ids());
        for (m, img) in images.iter().enumerate() {
            if first_outside(&p.source, img).is_some() {
                continue;
            }
            checked += 1;
            if bt & !(m as u64) != 0 {
                let t = (bt & !(m as u64)).trailing_zeros() as usize;
                let cx = Counterexample::new("source satisfies the image of a property the target violates")
                    .program(i, &p.id)
                    .trace(t, tu.trace(t))
                    .property(labels(&TraceProperty::from_mask(tu, m as u64)?));
                return Ok(CriterionVerdict::fail(name, cx).stat("mode_exhaustive", 1).stat("properties_checked", checked));
            }
        }
    }
    Ok(CriterionVerdict::pass(name).stat("mode_exhaustive", 1).stat("properties_checked", checked))
}

/// `CC~`, `TP^τ̃` and `TP^σ̃` for the instance relation; passes when all three agree.
pub fn check_trinity(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    check_trinity_with(ci, cfg, Strategy::Auto)
}

pub fn check_trinity_with(ci: &CompilationInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let cc = check_cc_tilde(ci);
    let tau = check_tp_tau(ci, &PropertyMapping::existential(&ci.relation), cfg, strategy)?;
    let sigma = check_tp_sigma(ci, &PropertyMapping::universal(&ci.relation), cfg, strategy)?;
    Ok(CriterionVerdict::agreement("trinity", vec![cc, tau, sigma]))
}

/// A subset-closed hyperproperty given by generators: `Cl⊆({g₁, …, gₖ})`.
type Family = Vec<Vec<TraceProperty>>;

fn random_property(u: &Universe, rng: &mut ChaCha8Rng) -> TraceProperty {
    TraceProperty::from_ids(u, (0..u.len()).filter(|_| rng.random::<bool>()))
}

fn random_families(u: &Universe, anchor: Option<&TraceProperty>, count: usize, rng: &mut ChaCha8Rng) -> Result<Family> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut gens: Vec<TraceProperty> = (0..1 + k % 3).map(|_| random_property(u, rng)).collect();
        if let (Some(a), true) = (anchor, k % 2 == 0) {
            gens[0] = gens[0].union(a)?;
        }
        out.push(gens);
    }
    Ok(out)
}

fn singleton_family(u: &Universe) -> Result<Family> {
    (0u64..1 << u.len()).map(|m| Ok(vec![TraceProperty::from_mask(u, m)?])).collect()
}

const RANDOM_FAMILIES: usize = 64;

/// `SCHP^τ̃` over singleton closures and seeded random subset-closed hyperproperties.
pub fn check_schp_tau(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    let r = &ci.relation;
    let su = ci.source_universe();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shared = if su.len() <= cfg.cap_bits as usize && su.len() <= 63 { singleton_family(su)? } else { Vec::new() };
    let mut families = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        let bs = p.source.to_property();
        let mut local = random_families(su, Some(&bs), RANDOM_FAMILIES, &mut rng)?;
        if shared.is_empty() {
            local.push(vec![bs.clone()]);
        }
        for gens in shared.iter().chain(local.iter()) {
            families += 1;
            let holds_source = gens.iter().any(|g| bs.is_subset(g).unwrap_or(false));
            if !holds_source {
                continue;
            }
            let mut holds_target = false;
            for g in gens {
                if first_outside(&p.target, &existential_image(r, g)?).is_none() {
                    holds_target = true;
                    break;
                }
            }
            if !holds_target {
                let cx = Counterexample::new("target behavior outside the closure of the lifted hyperproperty")
                    .program(i, &p.id)
                    .property(labels(&gens[0]));
                return Ok(CriterionVerdict::fail("SCHP^tau", cx).stat("families", families).seeded(cfg.seed));
            }
        }
    }
    Ok(CriterionVerdict::pass("SCHP^tau").stat("families", families).seeded(cfg.seed))
}

/// `SCHP^σ̃` over singleton closures and seeded random subset-closed target hyperproperties.
pub fn check_schp_sigma(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    let r = &ci.relation;
    let tu = ci.target_universe();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5c4e);
    let shared = if tu.len() <= cfg.cap_bits as usize && tu.len() <= 63 { singleton_family(tu)? } else { Vec::new() };
    let mut families = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        let bs = p.source.to_property();
        let img = existential_image(r, &bs)?;
        let mut local = random_families(tu, Some(&img), RANDOM_FAMILIES, &mut rng)?;
        if shared.is_empty() {
            for &t in p.target.ids() {
                let mut g = TraceProperty::full(tu);
                g.remove(t);
                local.push(vec![g]);
            }
        }
        for gens in shared.iter().chain(local.iter()) {
            families += 1;
            let mut holds_source = false;
            for g in gens {
                if bs.is_subset(&universal_image(r, g)?)? {
                    holds_source = true;
                    break;
                }
            }
            if holds_source && !gens.iter().any(|g| first_outside(&p.target, g).is_none()) {
                let cx = Counterexample::new("source satisfies the lifted hyperproperty but the target escapes it")
                    .program(i, &p.id)
                    .property(labels(&gens[0]));
                return Ok(CriterionVerdict::fail("SCHP^sigma", cx).stat("families", families).seeded(cfg.seed));
            }
        }
    }
    Ok(CriterionVerdict::pass("SCHP^sigma").stat("families", families).seeded(cfg.seed))
}

/// `SCHP^τ̃`, `SCHP^σ̃` and `CC~`; passes when all three agree.
pub fn check_schp(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    let cc = check_cc_tilde(ci);
    let t = check_schp_tau(ci, cfg)?;
    let s = check_schp_sigma(ci, cfg)?;
    Ok(CriterionVerdict::agreement("schp-trinity", vec![cc, t, s]).seeded(cfg.seed))
}

/// `HC~`: each target behavior is exactly the existential image of its source behavior.
pub fn check_hc_tilde(ci: &CompilationInstance) -> Result<CriterionVerdict> {
    for (i, p) in ci.programs.iter().enumerate() {
        let img = existential_image(&ci.relation, &p.source.to_property())?;
        let bt = p.target.to_property();
        if img != bt {
            let diff = img.difference(&bt)?.union(&bt.difference(&img)?)?;
            let t = diff.ids().next().expect("nonempty difference");
            let cx = Counterexample::new("target behavior differs from the image of the source behavior")
                .program(i, &p.id)
                .trace(t, ci.target_universe().trace(t))
                .property(labels(&img));
            return Ok(CriterionVerdict::fail("HC~", cx));
        }
    }
    Ok(CriterionVerdict::pass("HC~").stat("programs", ci.programs.len() as u64))
}

/// `HP^τ̃`: `beh_S ∈ H ⇒ beh_T ∈ τ̃(H)`, over `{beh_S}` and seeded supersets of it.
pub fn check_hp_tau(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    let su = ci.source_universe();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut families = 0u64;
    for (i, p) in ci.programs.iter().enumerate() {
        let bs = p.source.to_property();
        let bt = p.target.to_property();
        for k in 0..RANDOM_FAMILIES {
            let mut h = vec![bs.clone()];
            h.extend((0..k % 4).map(|_| random_property(su, &mut rng)));
            families += 1;
            let mut member = false;
            for pi in &h {
                if existential_image(&ci.relation, pi)? == bt {
                    member = true;
                    break;
                }
            }
            if !member {
                let cx = Counterexample::new("target behavior is not the image of any member")
                    .program(i, &p.id)
                    .property(labels(&bs));
                return Ok(CriterionVerdict::fail("HP^tau", cx).stat("families", families).seeded(cfg.seed));
            }
        }
    }
    Ok(CriterionVerdict::pass("HP^tau").stat("families", families).seeded(cfg.seed))
}

/// `HP^σ̃`: every target property whose universal image is `beh_S` equals `beh_T`.
pub fn check_hp_sigma(ci: &CompilationInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let r = &ci.relation;
    let tu = ci.target_universe();
    let fail = |i: usize, p: &ProgramPair, pi: &TraceProperty| {
        let cx = Counterexample::new("a target property other than the target behavior maps onto the source behavior")
            .program(i, &p.id)
            .property(labels(pi));
        CriterionVerdict::fail("HP^sigma", cx)
    };
    if strategy == Strategy::Exhaustive {
        require_small(tu, cfg, "exhaustive HP^sigma")?;
        let images = (0u64..1 << tu.len()).map(|m| universal_image(r, &TraceProperty::from_mask(tu, m)?)).collect::<Result<Vec<_>>>()?;
        for (i, p) in ci.programs.iter().enumerate() {
            let bs = p.source.to_property();
            let bt = p.target.to_property();
            for (m, img) in images.iter().enumerate() {
                let pi = TraceProperty::from_mask(tu, m as u64)?;
                if *img == bs && pi != bt {
                    return Ok(fail(i, p, &pi).stat("mode_exhaustive", 1));
                }
            }
        }
        return Ok(CriterionVerdict::pass("HP^sigma").stat("mode_exhaustive", 1));
    }
    for (i, p) in ci.programs.iter().enumerate() {
        let bs = p.source.to_property();
        let bt = p.target.to_property();
        let mut least = TraceProperty::empty(tu);
        for &s in p.source.ids() {
            for &t in r.targets_of(s) {
                least.insert(t);
            }
        }
        if universal_image(r, &least)? != bs {
            continue;
        }
        if least != bt {
            return Ok(fail(i, p, &least).stat("mode_exhaustive", 0));
        }
        for t in (0..tu.len()).filter(|&t| !least.contains_id(t)) {
            let mut bigger = least.clone();
            bigger.insert(t);
            if universal_image(r, &bigger)? == bs {
                return Ok(fail(i, p, &bigger).stat("mode_exhaustive", 0));
            }
        }
    }
    Ok(CriterionVerdict::pass("HP^sigma").stat("mode_exhaustive", 0).stat("programs", ci.programs.len() as u64))
}

/// `HC~ ⟺ HP^τ̃`, and the insertion / reflection gated implications with `HP^σ̃`.
pub fn check_hp_variants(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<Vec<CriterionVerdict>> {
    let hc = check_hc_tilde(ci)?;
    let hpt = check_hp_tau(ci, cfg)?;
    let hps = check_hp_sigma(ci, cfg, Strategy::Auto)?;
    let gc = GaloisConnection::induced(&ci.relation);
    let insertion = if is_insertion(&gc, cfg)? {
        CriterionVerdict::implication("insertion: HC~ => HP^sigma", &hc, &hps)
    } else {
        CriterionVerdict::skipped("insertion: HC~ => HP^sigma", "relation does not induce an insertion")
    };
    let reflection = if is_reflection(&gc, cfg)? {
        CriterionVerdict::implication("reflection: HP^sigma => HC~", &hps, &hc)
    } else {
        CriterionVerdict::skipped("reflection: HP^sigma => HC~", "relation does not induce a reflection")
    };
    Ok(vec![CriterionVerdict::agreement("HC~ <=> HP^tau", vec![hc, hpt]), insertion, reflection])
}

/// `SC~`: every prefix of a target trace extends to a target trace related to the source behavior.
pub fn check_sc_tilde(ci: &CompilationInstance) -> Result<CriterionVerdict> {
    let tu = ci.target_universe();
    tu.require_prefix_closed()?;
    let r = &ci.relation;
    for (i, p) in ci.programs.iter().enumerate() {
        let mut reaches = vec![false; tu.len()];
        for t in 0..tu.len() {
            if r.sources_of(t).iter().any(|&s| p.source.contains_id(s)) {
                let mut cur = Some(t);
                while let Some(c) = cur {
                    if reaches[c] {
                        break;
                    }
                    reaches[c] = true;
                    cur = tu.parent(c);
                }
            }
        }
        for &t in p.target.ids() {
            if let Some(m) = tu.prefix_ids(t).into_iter().find(|&m| !reaches[m]) {
                let cx = Counterexample::new("prefix of a target trace cannot be completed to a related trace")
                    .program(i, &p.id)
                    .trace(t, tu.trace(t))
                    .prefix(tu.trace(m));
                return Ok(CriterionVerdict::fail("SC~", cx));
            }
        }
    }
    Ok(CriterionVerdict::pass("SC~").stat("programs", ci.programs.len() as u64))
}

/// All safety properties of a small prefix-closed universe, in mask order.
pub fn safety_properties(u: &Universe, cfg: &QuantConfig) -> Result<Vec<TraceProperty>> {
    require_small(u, cfg, "safety property enumeration")?;
    u.require_prefix_closed()?;
    let mut out = Vec::new();
    for m in 0u64..1 << u.len() {
        let p = TraceProperty::from_mask(u, m)?;
        if is_safety(&p)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// `SP^σ̃`: for every target safety property `π`, `beh_S ⊆ σ̃(π) ⇒ beh_T ⊆ π`.
pub fn check_sp_sigma(ci: &CompilationInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let tu = ci.target_universe();
    tu.require_prefix_closed()?;
    let r = &ci.relation;
    let fail = |i: usize, p: &ProgramPair, t: TraceId, pi: &TraceProperty| {
        let cx = Counterexample::new("source satisfies the image of a target safety property the target violates")
            .program(i, &p.id)
            .trace(t, tu.trace(t))
            .property(labels(pi));
        CriterionVerdict::fail("SP^sigma", cx)
    };
    if strategy == Strategy::Exhaustive {
        let safeties = safety_properties(tu, cfg)?;
        let images = safeties.iter().map(|pi| universal_image(r, pi)).collect::<Result<Vec<_>>>()?;
        for (i, p) in ci.programs.iter().enumerate() {
            for (pi, img) in safeties.iter().zip(&images) {
                if first_outside(&p.source, img).is_none() {
                    if let Some(t) = first_outside(&p.target, pi) {
                        return Ok(fail(i, p, t, pi).stat("mode_exhaustive", 1));
                    }
                }
            }
        }
        return Ok(CriterionVerdict::pass("SP^sigma").stat("mode_exhaustive", 1).stat("safety_properties", safeties.len() as u64));
    }
    for (i, p) in ci.programs.iter().enumerate() {
        for &t in p.target.ids() {
            for m in tu.prefix_ids(t) {
                let pi = cone_complement(tu, m);
                if first_outside(&p.source, &universal_image(r, &pi)?).is_none() {
                    return Ok(fail(i, p, t, &pi).stat("mode_exhaustive", 0));
                }
            }
        }
    }
    Ok(CriterionVerdict::pass("SP^sigma").stat("mode_exhaustive", 0).stat("programs", ci.programs.len() as u64))
}

/// `SP^(Safe∘τ̃)`: `beh_S ⊆ π ⇒ beh_T ⊆ Safe(τ̃(π))` for every source property.
pub fn check_sp_safe_tau(ci: &CompilationInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let su = ci.source_universe();
    let tu = ci.target_universe();
    tu.require_prefix_closed()?;
    let r = &ci.relation;
    let check = |i: usize, p: &ProgramPair, pi: &TraceProperty| -> Result<Option<CriterionVerdict>> {
        let img = safe_closure(&existential_image(r, pi)?)?;
        Ok(first_outside(&p.target, &img).map(|t| {
            let cx = Counterexample::new("target trace escapes the safety closure of the image")
                .program(i, &p.id)
                .trace(t, tu.trace(t))
                .property(labels(pi));
            CriterionVerdict::fail("SP^safe-tau", cx)
        }))
    };
    if strategy == Strategy::Exhaustive {
        require_small(su, cfg, "exhaustive SP^safe-tau")?;
        for (i, p) in ci.programs.iter().enumerate() {
            let b = mask_of(su, p.source.ids());
            for m in (0u64..1 << su.len()).filter(|m| m & b == b) {
                if let Some(v) = check(i, p, &TraceProperty::from_mask(su, m)?)? {
                    return Ok(v.stat("mode_exhaustive", 1));
                }
            }
        }
        return Ok(CriterionVerdict::pass("SP^safe-tau").stat("mode_exhaustive", 1));
    }
    for (i, p) in ci.programs.iter().enumerate() {
        if let Some(v) = check(i, p, &p.source.to_property())? {
            return Ok(v.stat("mode_exhaustive", 0));
        }
    }
    Ok(CriterionVerdict::pass("SP^safe-tau").stat("mode_exhaustive", 0).stat("programs", ci.programs.len() as u64))
}

/// `SC~`, `SP^σ̃` and `SP^(Safe∘τ̃)`; passes when all three agree.
pub fn check_safety_trinity(ci: &CompilationInstance, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    check_safety_trinity_with(ci, cfg, Strategy::Auto)
}

pub fn check_safety_trinity_with(ci: &CompilationInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let sc = check_sc_tilde(ci)?;
    let sig = check_sp_sigma(ci, cfg, strategy)?;
    let tau = check_sp_safe_tau(ci, cfg, strategy)?;
    Ok(CriterionVerdict::agreement("safety-trinity", vec![sc, sig, tau]))
}
