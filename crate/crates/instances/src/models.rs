//! Undefined-behavior and resource-exhaustion trace models, their closed-form
//! property mappings, and a fuel-bounded identity compiler.

use std::fmt;
use std::sync::Arc;

use trace_rel_core::config::QuantConfig;
use trace_rel_core::criteria::{safety_properties, CompilationInstance, ProgramPair};
use trace_rel_core::galois::{RelationMasks, TraceRelation};
use trace_rel_core::property::{is_safety, Behavior, TraceProperty};
use trace_rel_core::trace::{events_prefix, same_events, Alphabet, Event, Trace, TraceId, TraceUniverse, Universe};
use trace_rel_core::verdict::{Counterexample, CriterionVerdict};
use trace_rel_core::{Error, Result};

pub const GOES_WRONG: &str = "Goes_wrong";
pub const RESOURCE_LIMIT_HIT: &str = "Resource_Limit_Hit";

fn ends_with(t: &Trace, label: &str) -> bool {
    t.events().last().is_some_and(|e| e.is_terminal() && e.label() == label)
}

fn body(t: &Trace) -> &[Event] {
    &t.events()[..t.len() - 1]
}

/// Source traces may stop with `Goes_wrong`; the target may have extra events `Σ′`.
#[derive(Debug, Clone)]
pub struct UbModel {
    sigma: Vec<String>,
    extra: Vec<String>,
    source: Universe,
    target: Universe,
}

impl UbModel {
    /// `max_len` bounds the regular events of a source trace; `Goes_wrong` may follow.
    pub fn new(sigma: &[&str], extra: &[&str], max_len: usize, cap: usize) -> Result<Self> {
        let sa = Alphabet::new("ub-src", sigma.iter().map(Event::regular).chain([Event::terminal(GOES_WRONG)]))?;
        let ta = Alphabet::new("ub-tgt", sigma.iter().chain(extra).map(Event::regular))?;
        Ok(UbModel {
            sigma: sigma.iter().map(|s| s.to_string()).collect(),
            extra: extra.iter().map(|s| s.to_string()).collect(),
            source: TraceUniverse::enumerate_terminated("ub-src", sa, max_len, cap)?,
            target: TraceUniverse::enumerate("ub-tgt", ta, max_len, cap)?,
        })
    }

    pub fn sigma(&self) -> &[String] {
        &self.sigma
    }

    pub fn extra(&self) -> &[String] {
        &self.extra
    }

    pub fn source(&self) -> &Universe {
        &self.source
    }

    pub fn target(&self) -> &Universe {
        &self.target
    }
}

/// `s ∼ t` iff `s = t` or `s = m·Goes_wrong` with `m ≤ t`.
pub fn ub_related(s: &Trace, t: &Trace) -> bool {
    if ends_with(s, GOES_WRONG) {
        events_prefix(body(s), t.events())
    } else {
        same_events(s.events(), t.events())
    }
}

pub fn ub_relation(model: &UbModel) -> TraceRelation {
    TraceRelation::from_predicate(&model.source, &model.target, ub_related)
}

/// Target traces extending `m`, that is, the bounded reading of `{t | m ≤ t}`.
fn cone(target: &Universe, m: &[Event]) -> Vec<TraceId> {
    target.id_of_events(m).map(|id| target.extension_ids(id)).unwrap_or_default()
}

fn copy(to: &Universe, t: &Trace) -> Vec<TraceId> {
    to.id_of_events(t.events()).into_iter().collect()
}

/// `σ̃(π_T) = {s ∈ π_T | s ≠ m·Goes_wrong} ∪ {m·Goes_wrong | ∀t. m ≤ t ⇒ t ∈ π_T}`.
pub fn ub_sigma_form(model: &UbModel) -> ClosedForm {
    let parts = model
        .source
        .traces()
        .iter()
        .map(|s| if ends_with(s, GOES_WRONG) { cone(&model.target, body(s)) } else { copy(&model.target, s) })
        .collect();
    ClosedForm::new("ub σ̃ closed form", Shape::Universal, &model.target, &model.source, parts)
}

/// `τ̃(π_S) = {t ∈ π_S} ∪ {t | ∃m ≤ t. m·Goes_wrong ∈ π_S}`.
pub fn ub_tau_form(model: &UbModel) -> ClosedForm {
    let parts = model
        .source
        .traces()
        .iter()
        .map(|s| if ends_with(s, GOES_WRONG) { cone(&model.target, body(s)) } else { copy(&model.target, s) })
        .collect();
    ClosedForm::new("ub τ̃ closed form", Shape::Existential, &model.source, &model.target, parts)
}

pub fn ub_sigma_closed(model: &UbModel, p_t: &TraceProperty) -> Result<TraceProperty> {
    ub_sigma_form(model).apply(p_t)
}

pub fn ub_tau_closed(model: &UbModel, p_s: &TraceProperty) -> Result<TraceProperty> {
    ub_tau_form(model).apply(p_s)
}

/// Target traces may be cut short by `Resource_Limit_Hit`.
#[derive(Debug, Clone)]
pub struct ResModel {
    sigma: Vec<String>,
    fuel: u32,
    source: Universe,
    target: Universe,
}

impl ResModel {
    /// `max_len` bounds the regular events on both sides; `Resource_Limit_Hit` may follow.
    pub fn new(sigma: &[&str], max_len: usize, fuel: u32, cap: usize) -> Result<Self> {
        let sa = Alphabet::new("res-src", sigma.iter().map(Event::regular))?;
        let ta = Alphabet::new("res-tgt", sigma.iter().map(Event::regular).chain([Event::terminal(RESOURCE_LIMIT_HIT)]))?;
        Ok(ResModel {
            sigma: sigma.iter().map(|s| s.to_string()).collect(),
            fuel,
            source: TraceUniverse::enumerate("res-src", sa, max_len, cap)?,
            target: TraceUniverse::enumerate_terminated("res-tgt", ta, max_len, cap)?,
        })
    }

    pub fn sigma(&self) -> &[String] {
        &self.sigma
    }

    pub fn fuel(&self) -> u32 {
        self.fuel
    }

    pub fn source(&self) -> &Universe {
        &self.source
    }

    pub fn target(&self) -> &Universe {
        &self.target
    }
}

/// `s ∼ t` iff `s = t` or `t = m·Resource_Limit_Hit` with `m ≤ s`.
pub fn res_related(s: &Trace, t: &Trace) -> bool {
    if ends_with(t, RESOURCE_LIMIT_HIT) {
        events_prefix(body(t), s.events())
    } else {
        same_events(s.events(), t.events())
    }
}

pub fn res_relation(model: &ResModel) -> TraceRelation {
    TraceRelation::from_predicate(&model.source, &model.target, res_related)
}

/// `s` itself together with `m·Resource_Limit_Hit` for every prefix `m ≤ s`.
fn truncations(target: &Universe, s: &Trace) -> Vec<TraceId> {
    let rlh = Event::terminal(RESOURCE_LIMIT_HIT);
    let mut out = copy(target, s);
    for n in 0..=s.len() {
        let mut events = s.events()[..n].to_vec();
        events.push(rlh.clone());
        out.extend(target.id_of_events(&events));
    }
    out
}

/// `σ̃(π_T) = {s ∈ π_T} ∩ {s | ∀m ≤ s. m·Resource_Limit_Hit ∈ π_T}`.
pub fn res_sigma_form(model: &ResModel) -> ClosedForm {
    let parts = model.source.traces().iter().map(|s| truncations(&model.target, s)).collect();
    ClosedForm::new("res σ̃ closed form", Shape::Universal, &model.target, &model.source, parts)
}

/// `τ̃(π_S) = π_S ∪ {m·Resource_Limit_Hit | ∃s ∈ π_S. m ≤ s}`.
pub fn res_tau_form(model: &ResModel) -> ClosedForm {
    let parts = model.source.traces().iter().map(|s| truncations(&model.target, s)).collect();
    ClosedForm::new("res τ̃ closed form", Shape::Existential, &model.source, &model.target, parts)
}

pub fn res_sigma_closed(model: &ResModel, p_t: &TraceProperty) -> Result<TraceProperty> {
    res_sigma_form(model).apply(p_t)
}

pub fn res_tau_closed(model: &ResModel, p_s: &TraceProperty) -> Result<TraceProperty> {
    res_tau_form(model).apply(p_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Union of the parts of the members.
    Existential,
    /// Source traces whose part lies inside the property.
    Universal,
}

/// A property mapping given by one trace set per source trace.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    name: String,
    shape: Shape,
    input: Universe,
    output: Universe,
    parts: Vec<Vec<TraceId>>,
}

impl ClosedForm {
    fn new(name: &str, shape: Shape, input: &Universe, output: &Universe, parts: Vec<Vec<TraceId>>) -> Self {
        ClosedForm { name: name.into(), shape, input: input.clone(), output: output.clone(), parts }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, p: &TraceProperty) -> Result<TraceProperty> {
        self.input.require_same(p.universe())?;
        Ok(match self.shape {
            Shape::Existential => TraceProperty::from_ids(&self.output, p.ids().flat_map(|s| self.parts[s].iter().copied())),
            Shape::Universal => {
                TraceProperty::from_ids(&self.output, (0..self.output.len()).filter(|&s| self.parts[s].iter().all(|&t| p.contains_id(t))))
            }
        })
    }

    fn part_masks(&self) -> Vec<u64> {
        self.parts.iter().map(|v| v.iter().fold(0u64, |m, &i| m | 1 << i)).collect()
    }
}

fn mask_apply(shape: Shape, parts: &[u64], mask: u64) -> u64 {
    match shape {
        Shape::Existential => {
            let (mut out, mut rest) = (0, mask);
            while rest != 0 {
                out |= parts[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            out
        }
        Shape::Universal => parts.iter().enumerate().fold(0, |acc, (s, &need)| if need & !mask == 0 { acc | 1 << s } else { acc }),
    }
}

/// Compares a closed form with the generic image of `r` on every property of its input side.
pub fn sweep_closed_form(form: &ClosedForm, r: &TraceRelation, max_bits: u32) -> Result<CriterionVerdict> {
    let criterion = format!("{} = generic image", form.name);
    let bits = form.input.len();
    if bits > max_bits as usize {
        return Err(trace_rel_core::error::cap_exceeded(format!("property sweep over `{}`", form.input.name()), 1u128 << bits.min(127), 1usize << max_bits.min(63)));
    }
    let (sides_ok, generic): (bool, Box<dyn Fn(&RelationMasks, u64) -> u64>) = match form.shape {
        Shape::Existential => (form.input.same_as(r.source()) && form.output.same_as(r.target()), Box::new(|m, p| m.existential(p))),
        Shape::Universal => (form.input.same_as(r.target()) && form.output.same_as(r.source()), Box::new(|m, p| m.universal(p))),
    };
    if !sides_ok {
        return Err(Error::Precondition(format!("`{}` and the relation range over different universes", form.name)));
    }
    let masks = r.masks().ok_or_else(|| Error::Precondition("mask sweep needs universes of at most 64 traces".into()))?;
    let parts = form.part_masks();
    let total: u64 = 1 << bits;
    let bad = (0..total).find(|&p| mask_apply(form.shape, &parts, p) != generic(&masks, p));
    let cx = bad.map(|p| {
        let prop = TraceProperty::from_mask(&form.input, p).expect("mask within universe");
        Counterexample::new("closed form and generic image differ").property(prop.labels())
    });
    Ok(CriterionVerdict::from_outcome(criterion, cx).stat("properties", total))
}

/// Images of safety properties under the closed forms, in both directions, are safety.
pub fn res_safety_roundtrip(model: &ResModel, cfg: &QuantConfig) -> Result<CriterionVerdict> {
    let tau = res_tau_form(model);
    let sigma = res_sigma_form(model);
    let mut checked = 0u64;
    for (form, side) in [(&tau, &model.source), (&sigma, &model.target)] {
        for p in safety_properties(side, cfg)? {
            checked += 1;
            let img = form.apply(&p)?;
            if !is_safety(&img)? {
                let cx = Counterexample::new(format!("{} of a safety property is not safety", form.name)).property(p.labels());
                return Ok(CriterionVerdict::fail("resource safety round-trip", cx).stat("safety properties", checked));
            }
        }
    }
    Ok(CriterionVerdict::pass("resource safety round-trip").stat("safety properties", checked))
}

/// Pairwise union of two relations over the same universes.
pub fn union_relation(r1: &TraceRelation, r2: &TraceRelation) -> Result<TraceRelation> {
    r1.union(r2)
}

/// Loop-free commands emitting events; `Repeat` unrolls its body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FCmd {
    Skip,
    Emit(Arc<str>),
    Seq(Arc<FCmd>, Arc<FCmd>),
    Ifz(u64, Arc<FCmd>, Arc<FCmd>),
    Repeat(u32, Arc<FCmd>),
}

impl fmt::Display for FCmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FCmd::Skip => f.write_str("skip"),
            FCmd::Emit(e) => write!(f, "(emit {e})"),
            FCmd::Seq(a, b) => write!(f, "(seq {a} {b})"),
            FCmd::Ifz(n, a, b) => write!(f, "(ifz {n} {a} {b})"),
            FCmd::Repeat(n, c) => write!(f, "(repeat {n} {c})"),
        }
    }
}

impl FCmd {
    pub fn size(&self) -> usize {
        match self {
            FCmd::Skip | FCmd::Emit(_) => 1,
            FCmd::Seq(a, b) | FCmd::Ifz(_, a, b) => 1 + a.size() + b.size(),
            FCmd::Repeat(_, c) => 1 + c.size(),
        }
    }

    /// Events emitted by an unbounded run.
    pub fn run(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        self.emit_into(&mut out);
        out
    }

    fn emit_into(&self, out: &mut Vec<Arc<str>>) {
        match self {
            FCmd::Skip => {}
            FCmd::Emit(e) => out.push(e.clone()),
            FCmd::Seq(a, b) => {
                a.emit_into(out);
                b.emit_into(out);
            }
            FCmd::Ifz(n, a, b) => if *n == 0 { a } else { b }.emit_into(out),
            FCmd::Repeat(n, c) => {
                for _ in 0..*n {
                    c.emit_into(out);
                }
            }
        }
    }

    /// Run with `fuel` emission steps; the flag is set when the fuel ran out.
    pub fn run_with_fuel(&self, fuel: u32) -> (Vec<Arc<str>>, bool) {
        let full = self.run();
        if full.len() <= fuel as usize {
            (full, false)
        } else {
            (full[..fuel as usize].to_vec(), true)
        }
    }
}

/// Commands with at most `max_size` constructors and at most `max_steps` emissions.
pub fn enumerate_fuel_programs(sigma: &[&str], max_size: usize, max_steps: usize) -> Vec<FCmd> {
    let mut by_size: Vec<Vec<FCmd>> = vec![Vec::new(); max_size + 1];
    for size in 1..=max_size {
        let mut here = Vec::new();
        if size == 1 {
            here.push(FCmd::Skip);
            here.extend(sigma.iter().map(|e| FCmd::Emit(Arc::from(*e))));
        }
        for left in 1..size.saturating_sub(1) {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    here.push(FCmd::Seq(a.clone().into(), b.clone().into()));
                    for n in [0, 1] {
                        here.push(FCmd::Ifz(n, a.clone().into(), b.clone().into()));
                    }
                }
            }
        }
        if size >= 2 {
            for c in &by_size[size - 1] {
                here.push(FCmd::Repeat(2, c.clone().into()));
            }
        }
        here.retain(|c| c.run().len() <= max_steps);
        by_size[size] = here;
    }
    by_size.into_iter().flatten().collect()
}

/// Universes shared by the fuel instance: sources may go wrong, targets may run out of fuel.
pub fn fuel_universes(sigma: &[&str], max_steps: usize, cap: usize) -> Result<(Universe, Universe)> {
    let sa = Alphabet::new("fuel-src", sigma.iter().map(Event::regular).chain([Event::terminal(GOES_WRONG)]))?;
    let ta = Alphabet::new("fuel-tgt", sigma.iter().map(Event::regular).chain([Event::terminal(RESOURCE_LIMIT_HIT)]))?;
    Ok((TraceUniverse::enumerate_terminated("fuel-src", sa, max_steps, cap)?, TraceUniverse::enumerate_terminated("fuel-tgt", ta, max_steps, cap)?))
}

#[derive(Debug, Clone)]
pub struct FuelConfig {
    pub sigma: Vec<String>,
    pub max_size: usize,
    pub max_steps: usize,
    pub fuel: u32,
}

impl Default for FuelConfig {
    fn default() -> Self {
        FuelConfig { sigma: vec!["e1".into(), "e2".into()], max_size: 5, max_steps: 5, fuel: 3 }
    }
}

/// Identity compiler whose target runs are bounded by fuel, under the resource relation.
pub fn fuel_compiler_instance(cfg: &FuelConfig) -> Result<CompilationInstance> {
    let sigma: Vec<&str> = cfg.sigma.iter().map(String::as_str).collect();
    let (su, tu) = fuel_universes(&sigma, cfg.max_steps, 1 << 20)?;
    let relation = TraceRelation::from_predicate(&su, &tu, res_related);
    let to_events = |es: &[Arc<str>]| es.iter().map(|e| Event::regular(e)).collect::<Vec<_>>();
    let programs = enumerate_fuel_programs(&sigma, cfg.max_size, cfg.max_steps)
        .into_iter()
        .map(|c| {
            let s = su.id_of_events(&to_events(&c.run())).ok_or_else(|| Error::Precondition(format!("`{c}` leaves the source universe")))?;
            let (prefix, out_of_fuel) = c.run_with_fuel(cfg.fuel);
            let mut events = to_events(&prefix);
            if out_of_fuel {
                events.push(Event::terminal(RESOURCE_LIMIT_HIT));
            }
            let t = tu.id_of_events(&events).ok_or_else(|| Error::Precondition(format!("`{c}` leaves the target universe")))?;
            Ok(ProgramPair { id: c.to_string(), compiled: c.to_string(), source: Behavior::new(&su, [s]), target: Behavior::new(&tu, [t]) })
        })
        .collect::<Result<Vec<_>>>()?;
    CompilationInstance::new(format!("fuel-{}", cfg.fuel), relation, programs)
}

/// The undefined-behavior relation over the fuel universes.
pub fn fuel_ub_relation(ci: &CompilationInstance) -> TraceRelation {
    TraceRelation::from_predicate(ci.source_universe(), ci.target_universe(), ub_related)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shown(p: &TraceProperty) -> Vec<String> {
        p.traces().map(|t| t.to_string()).collect()
    }

    #[test]
    fn ub_relation_examples() {
        let m = UbModel::new(&["a", "b"], &[], 2, 1000).unwrap();
        let s = m.source().parse_trace(&["a", GOES_WRONG]).unwrap();
        let t = m.target().parse_trace(&["a", "b"]).unwrap();
        let r = ub_relation(&m);
        assert!(r.contains(s, t));
        let s2 = m.source().parse_trace(&["a", "b"]).unwrap();
        assert!(r.contains(s2, t));
        let t2 = m.target().parse_trace(&["a"]).unwrap();
        assert!(!r.contains(s2, t2));
    }

    #[test]
    fn ub_sigma_of_single_trace() {
        let m = UbModel::new(&["e1", "e2"], &[], 2, 1000).unwrap();
        let p = TraceProperty::from_ids(m.target(), [m.target().parse_trace(&["e1", "e2"]).unwrap()]);
        let out = ub_sigma_closed(&m, &p).unwrap();
        assert_eq!(shown(&out), ["e1·e2", "e1·e2·Goes_wrong"]);
        let gw = TraceProperty::from_ids(m.source(), [m.source().parse_trace(&[GOES_WRONG]).unwrap()]);
        assert_eq!(ub_tau_closed(&m, &gw).unwrap(), TraceProperty::full(m.target()));
    }

    #[test]
    fn res_tau_of_single_trace() {
        let m = ResModel::new(&["e1", "e2"], 2, 0, 1000).unwrap();
        let p = TraceProperty::from_ids(m.source(), [m.source().parse_trace(&["e1", "e2"]).unwrap()]);
        let mut out = shown(&res_tau_closed(&m, &p).unwrap());
        out.sort();
        let mut want = vec!["e1·e2", "Resource_Limit_Hit", "e1·Resource_Limit_Hit", "e1·e2·Resource_Limit_Hit"];
        want.sort();
        assert_eq!(out, want);
    }

    #[test]
    fn fuel_truncates_runs() {
        let c = FCmd::Seq(FCmd::Emit("e1".into()).into(), FCmd::Emit("e2".into()).into());
        assert_eq!(c.run_with_fuel(2), (vec![Arc::from("e1"), Arc::from("e2")], false));
        assert_eq!(c.run_with_fuel(1), (vec![Arc::from("e1")], true));
        assert_eq!(c.run_with_fuel(0), (vec![], true));
        assert_eq!(c.to_string(), "(seq (emit e1) (emit e2))");
    }
}
