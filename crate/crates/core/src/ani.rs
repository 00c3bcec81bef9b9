//! Noninterference and abstract noninterference over traces split into inputs and outputs,
//! and their transport along a split trace relation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::config::QuantConfig;
use crate::criteria::{check_cc_tilde, CompilationInstance, ProgramPair};
use crate::error::{cap_exceeded, Error, Result};
use crate::galois::{existential_image, TraceRelation};
use crate::property::{Hyperproperty, TraceProperty};
use crate::trace::{Alphabet, Event, Payload, Trace, TraceId, TraceUniverse, Universe};
use crate::verdict::{Counterexample, CriterionVerdict};

/// Which event labels carry private payloads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labeling {
    private: BTreeSet<String>,
}

impl Labeling {
    pub fn new(private: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Labeling { private: private.into_iter().map(Into::into).collect() }
    }

    pub fn is_private(&self, e: &Event) -> bool {
        self.private.contains(e.label())
    }

    /// The attacker's view: private payloads hidden, positions and labels kept.
    pub fn low_view(&self, events: &[Event]) -> Vec<(String, Option<Payload>)> {
        events
            .iter()
            .map(|e| (e.label().to_string(), if self.is_private(e) { None } else { e.payload().cloned() }))
            .collect()
    }

    pub fn low_equivalent(&self, a: &Trace, b: &Trace) -> bool {
        self.low_view(a.events()) == self.low_view(b.events())
    }
}

/// All traces of `u` low-equivalent to trace `id`.
pub fn low_equiv_class(u: &Universe, labeling: &Labeling, id: TraceId) -> TraceProperty {
    let x = u.trace(id);
    let ids: Vec<TraceId> = (0..u.len()).filter(|&j| labeling.low_equivalent(x, u.trace(j))).collect();
    TraceProperty::from_ids(u, ids)
}

/// Traces made of an input part followed by an output part.
#[derive(Debug, Clone)]
pub struct SplitUniverse {
    full: Universe,
    inputs: Universe,
    outputs: Universe,
    split: Vec<(TraceId, TraceId)>,
}

impl SplitUniverse {
    pub fn new(name: &str, alphabet: Arc<Alphabet>, traces: &[(Vec<Event>, Vec<Event>)]) -> Result<Self> {
        let mk = |events: Vec<Event>| Trace::new(alphabet.clone(), events);
        let full_traces = traces
            .iter()
            .map(|(i, o)| mk(i.iter().chain(o).cloned().collect()))
            .collect::<Result<Vec<_>>>()?;
        let ins = traces.iter().map(|(i, _)| mk(i.clone())).collect::<Result<Vec<_>>>()?;
        let outs = traces.iter().map(|(_, o)| mk(o.clone())).collect::<Result<Vec<_>>>()?;
        let full = TraceUniverse::from_explicit(name, alphabet.clone(), full_traces.iter().cloned())?;
        let inputs = TraceUniverse::from_explicit(format!("{name}°"), alphabet.clone(), ins.iter().cloned())?;
        let outputs = TraceUniverse::from_explicit(format!("{name}•"), alphabet.clone(), outs.iter().cloned())?;
        let mut split = vec![(0, 0); full.len()];
        for ((t, i), o) in full_traces.iter().zip(&ins).zip(&outs) {
            let id = full.require(t)?;
            split[id] = (inputs.require(i)?, outputs.require(o)?);
        }
        if full.len() != traces.len() {
            return Err(Error::InvalidInstance(format!("split universe `{name}` has ambiguous input/output boundaries")));
        }
        Ok(SplitUniverse { full, inputs, outputs, split })
    }

    pub fn full(&self) -> &Universe {
        &self.full
    }

    pub fn inputs(&self) -> &Universe {
        &self.inputs
    }

    pub fn outputs(&self) -> &Universe {
        &self.outputs
    }

    pub fn input_of(&self, t: TraceId) -> TraceId {
        self.split[t].0
    }

    pub fn output_of(&self, t: TraceId) -> TraceId {
        self.split[t].1
    }

    /// The full trace with the given projections, if any.
    pub fn join(&self, input: TraceId, output: TraceId) -> Option<TraceId> {
        self.split.iter().position(|&p| p == (input, output))
    }
}

const UCO_MAX: usize = 16;

/// A map on the powerset of a small universe, given as a table of masks.
#[derive(Clone, PartialEq, Eq)]
pub struct UcoOperator {
    name: String,
    universe: Universe,
    table: Arc<Vec<u64>>,
}

impl fmt::Debug for UcoOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UcoOperator({} on `{}`)", self.name, self.universe.name())
    }
}

fn require_uco_size(u: &Universe) -> Result<()> {
    if u.len() > UCO_MAX {
        return Err(cap_exceeded(format!("operator table over `{}`", u.name()), format!("2^{}", u.len()), format!("2^{UCO_MAX}")));
    }
    Ok(())
}

impl UcoOperator {
    pub fn from_mask_fn(name: impl Into<String>, universe: &Universe, f: impl Fn(u64) -> u64) -> Result<Self> {
        require_uco_size(universe)?;
        let table = (0u64..1 << universe.len()).map(f).collect();
        Ok(UcoOperator { name: name.into(), universe: universe.clone(), table: Arc::new(table) })
    }

    /// `λπ. ⋃_{x ∈ π} [x]` for the equivalence classes of `same`.
    pub fn from_equivalence(name: impl Into<String>, universe: &Universe, same: impl Fn(&Trace, &Trace) -> bool) -> Result<Self> {
        require_uco_size(universe)?;
        let classes: Vec<u64> = (0..universe.len())
            .map(|i| (0..universe.len()).filter(|&j| same(universe.trace(i), universe.trace(j))).fold(0, |m, j| m | 1 << j))
            .collect();
        Self::from_mask_fn(name, universe, |m| (0..universe.len()).filter(|i| m >> i & 1 == 1).fold(0, |acc, i| acc | classes[i]))
    }

    pub fn low_equivalence(universe: &Universe, labeling: &Labeling) -> Result<Self> {
        Self::from_equivalence("low", universe, |a, b| labeling.low_equivalent(a, b))
    }

    pub fn identity(universe: &Universe) -> Result<Self> {
        Self::from_mask_fn("id", universe, |m| m)
    }

    /// Maps every nonempty set to the whole universe.
    pub fn top(universe: &Universe) -> Result<Self> {
        let full = if universe.len() == 64 { u64::MAX } else { (1u64 << universe.len()) - 1 };
        Self::from_mask_fn("top", universe, move |m| if m == 0 { 0 } else { full })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn apply_mask(&self, m: u64) -> u64 {
        self.table[m as usize]
    }

    pub fn apply(&self, p: &TraceProperty) -> Result<TraceProperty> {
        self.universe.require_same(p.universe())?;
        TraceProperty::from_mask(&self.universe, self.apply_mask(p.mask().expect("small universe")))
    }

    /// Image of a single trace.
    pub fn of(&self, id: TraceId) -> u64 {
        self.table[1usize << id]
    }

    pub fn is_monotone(&self) -> bool {
        let n = self.universe.len();
        (0..self.table.len()).all(|x| (0..n).filter(|i| x >> i & 1 == 0).all(|i| self.table[x] & !self.table[x | 1 << i] == 0))
    }

    pub fn is_extensive(&self) -> bool {
        self.table.iter().enumerate().all(|(m, &img)| m as u64 & !img == 0)
    }

    pub fn is_idempotent(&self) -> bool {
        self.table.iter().all(|&img| self.table[img as usize] == img)
    }

    /// Monotone, extensive and idempotent.
    pub fn is_uco(&self) -> bool {
        self.is_monotone() && self.is_extensive() && self.is_idempotent()
    }

    /// Checks monotonicity, extensivity and idempotence, naming the first failing law and input.
    pub fn check(&self) -> CriterionVerdict {
        let name = format!("uco {}", self.name);
        let n = self.universe.len();
        let shown = |m: u64| TraceProperty::from_mask(&self.universe, m).map(|p| p.labels()).unwrap_or_default();
        for x in 0..self.table.len() {
            for i in (0..n).filter(|i| x >> i & 1 == 0) {
                if self.table[x] & !self.table[x | 1 << i] != 0 {
                    return CriterionVerdict::fail(name, Counterexample::new("not monotone").property(shown(x as u64)));
                }
            }
        }
        if let Some(m) = (0..self.table.len()).find(|&m| m as u64 & !self.table[m] != 0) {
            return CriterionVerdict::fail(name, Counterexample::new("not extensive").property(shown(m as u64)));
        }
        if let Some(m) = (0..self.table.len()).find(|&m| self.table[self.table[m] as usize] != self.table[m]) {
            return CriterionVerdict::fail(name, Counterexample::new("not idempotent").property(shown(m as u64)));
        }
        CriterionVerdict::pass(name).stat("sets", self.table.len() as u64)
    }

    fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `π ∈ ANI(φ, ρ)`: whenever `φ` identifies two inputs, `ρ` identifies the outputs.
pub fn ani_membership(su: &SplitUniverse, p: &TraceProperty, phi: &UcoOperator, rho: &UcoOperator) -> Result<bool> {
    Ok(ani_violation(su, p, phi, rho)?.is_none())
}

fn ani_violation(su: &SplitUniverse, p: &TraceProperty, phi: &UcoOperator, rho: &UcoOperator) -> Result<Option<(TraceId, TraceId)>> {
    su.full.require_same(p.universe())?;
    su.inputs.require_same(&phi.universe)?;
    su.outputs.require_same(&rho.universe)?;
    let ids: Vec<TraceId> = p.ids().collect();
    for &a in &ids {
        for &b in &ids {
            if phi.of(su.input_of(a)) == phi.of(su.input_of(b)) && rho.of(su.output_of(a)) != rho.of(su.output_of(b)) {
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// All properties of the split universe belonging to `ANI(φ, ρ)`.
pub fn ani_hyperproperty(su: &SplitUniverse, phi: &UcoOperator, rho: &UcoOperator, cfg: &QuantConfig) -> Result<Hyperproperty> {
    let u = su.full.clone();
    if u.len() > cfg.cap_bits as usize || u.len() > 63 {
        return Err(cap_exceeded("hyperproperty enumeration", format!("2^{}", u.len()), format!("2^{}", cfg.cap_bits)));
    }
    let mut members = Vec::new();
    for m in 0u64..1 << u.len() {
        let p = TraceProperty::from_mask(&u, m)?;
        if ani_membership(su, &p, phi, rho)? {
            members.push(p);
        }
    }
    Hyperproperty::new(&u, members)
}

/// Standard noninterference: low-equivalent inputs give low-equivalent outputs.
pub fn ni_hyperproperty(su: &SplitUniverse, labeling: &Labeling, cfg: &QuantConfig) -> Result<Hyperproperty> {
    let phi = UcoOperator::low_equivalence(&su.inputs, labeling)?;
    let rho = UcoOperator::low_equivalence(&su.outputs, labeling)?;
    ani_hyperproperty(su, &phi, &rho, cfg)
}

/// A pair of relations: source inputs to target inputs and source outputs to target outputs.
#[derive(Debug, Clone)]
pub struct SplitRelation {
    pub inputs: TraceRelation,
    pub outputs: TraceRelation,
}

impl SplitRelation {
    /// `s ∼ t` iff `s° ∼° t°` and `s• ∼• t•`.
    pub fn combined(&self, source: &SplitUniverse, target: &SplitUniverse) -> Result<TraceRelation> {
        self.inputs.source().require_same(&source.inputs)?;
        self.inputs.target().require_same(&target.inputs)?;
        self.outputs.source().require_same(&source.outputs)?;
        self.outputs.target().require_same(&target.outputs)?;
        let mut pairs = Vec::new();
        for s in 0..source.full.len() {
            for t in 0..target.full.len() {
                if self.inputs.contains(source.input_of(s), target.input_of(t))
                    && self.outputs.contains(source.output_of(s), target.output_of(t))
                {
                    pairs.push((s, t));
                }
            }
        }
        TraceRelation::from_id_pairs(&source.full, &target.full, pairs)
    }
}

/// Every target element is related to exactly one source element.
pub fn is_total_map_target_to_source(r: &TraceRelation) -> bool {
    (0..r.target().len()).all(|t| r.sources_of(t).len() == 1)
}

/// Every source element is related to some target element.
pub fn covers_source(r: &TraceRelation) -> bool {
    (0..r.source().len()).all(|s| !r.targets_of(s).is_empty())
}

/// Every source element is related to exactly one target element.
pub fn is_total_map_source_to_target(r: &TraceRelation) -> bool {
    (0..r.source().len()).all(|s| r.targets_of(s).len() == 1)
}

pub fn covers_target(r: &TraceRelation) -> bool {
    (0..r.target().len()).all(|t| !r.sources_of(t).is_empty())
}

fn masks(r: &TraceRelation) -> Result<crate::galois::RelationMasks> {
    r.masks().ok_or_else(|| cap_exceeded("mask relation", r.source().len().max(r.target().len()), 64))
}

/// `g ∘ op ∘ f` with `f(π_T) = {s | ∃t ∈ π_T. s ∼ t}` and `g(π_S) = {t | ∀s. s ∼ t ⇒ s ∈ π_S}`.
pub fn transport_to_target(r: &TraceRelation, op: &UcoOperator) -> Result<UcoOperator> {
    r.source().require_same(&op.universe)?;
    let inv = masks(&r.inverse())?;
    UcoOperator::from_mask_fn(format!("{}#", op.name), r.target(), |m| inv.universal(op.apply_mask(inv.existential(m))))
}

/// `σ̃ ∘ op ∘ τ̃` along `r`.
pub fn transport_to_source(r: &TraceRelation, op: &UcoOperator) -> Result<UcoOperator> {
    r.target().require_same(&op.universe)?;
    let rm = masks(r)?;
    UcoOperator::from_mask_fn(format!("{}#", op.name), r.source(), |m| rm.universal(op.apply_mask(rm.existential(m))))
}

/// `(φ#, ρ#)` for the target, requiring both relations to be total maps from target to
/// source and the input relation to be surjective.
pub fn derive_target_ani(split: &SplitRelation, phi_s: &UcoOperator, rho_s: &UcoOperator) -> Result<(UcoOperator, UcoOperator)> {
    if !is_total_map_target_to_source(&split.inputs) || !is_total_map_target_to_source(&split.outputs) {
        return Err(Error::Precondition("input and output relations must be total maps from target to source".into()));
    }
    if !covers_source(&split.inputs) {
        return Err(Error::Precondition("input relation must be surjective onto source inputs".into()));
    }
    Ok((transport_to_target(&split.inputs, phi_s)?, transport_to_target(&split.outputs, rho_s)?))
}

/// Two split universes, a split relation, and compiled programs over the full universes.
#[derive(Debug, Clone)]
pub struct AniSetting {
    pub source: SplitUniverse,
    pub target: SplitUniverse,
    pub split: SplitRelation,
    pub instance: CompilationInstance,
}

impl AniSetting {
    /// Builds the instance from `(id, source behavior ids, target behavior ids)` triples.
    pub fn new(source: SplitUniverse, target: SplitUniverse, split: SplitRelation, programs: Vec<(String, Vec<TraceId>, Vec<TraceId>)>) -> Result<Self> {
        let relation = split.combined(&source, &target)?;
        let programs = programs
            .into_iter()
            .map(|(id, s, t)| ProgramPair {
                compiled: format!("{id}↓"),
                id,
                source: crate::property::Behavior::new(&source.full, s),
                target: crate::property::Behavior::new(&target.full, t),
            })
            .collect();
        let instance = CompilationInstance::new("ani", relation, programs)?;
        Ok(AniSetting { source, target, split, instance })
    }
}

fn preservation(
    setting: &AniSetting,
    name: &str,
    source_ops: (&UcoOperator, &UcoOperator),
    target_ops: (&UcoOperator, &UcoOperator),
) -> Result<CriterionVerdict> {
    let mut premises = 0u64;
    for (i, p) in setting.instance.programs().iter().enumerate() {
        if !ani_membership(&setting.source, &p.source.to_property(), source_ops.0, source_ops.1)? {
            continue;
        }
        premises += 1;
        if let Some((a, b)) = ani_violation(&setting.target, &p.target.to_property(), target_ops.0, target_ops.1)? {
            let tu = setting.target.full();
            let cx = Counterexample::new(format!("target traces {} and {} break the derived noninterference", tu.trace(a), tu.trace(b)))
                .program(i, &p.id)
                .trace(a, tu.trace(a));
            return Ok(CriterionVerdict::fail(name, cx).stat("noninterfering_sources", premises));
        }
    }
    Ok(CriterionVerdict::pass(name).stat("noninterfering_sources", premises).stat("programs", setting.instance.programs().len() as u64))
}

fn uco_verdict(name: &str, ops: &[&UcoOperator]) -> CriterionVerdict {
    match ops.iter().find(|o| !o.is_uco()) {
        None => CriterionVerdict::pass(name),
        Some(o) => CriterionVerdict::fail(name, Counterexample::new(format!("`{}` is not an upper closure operator", o.name))),
    }
}

/// Result of a noninterference transport check, with the operators it derived.
#[derive(Debug, Clone)]
pub struct AniReport {
    pub verdicts: Vec<CriterionVerdict>,
    /// Derived operators; absent when a hypothesis did not hold.
    pub phi: Option<UcoOperator>,
    pub rho: Option<UcoOperator>,
}

impl AniReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed())
    }

    pub fn applicable(&self) -> bool {
        self.phi.is_some()
    }

    fn not_applicable(name: &str, reason: impl Into<String>) -> Self {
        AniReport { verdicts: vec![CriterionVerdict::skipped(name, reason)], phi: None, rho: None }
    }
}

/// Derives `(φ#, ρ#)`, checks they are upper closures, checks preservation on the instance,
/// and, when the output relation is surjective, that `ANI(φ#, ρ#) ⊆ Cl⊆(τ̃(ANI(φ_S, ρ_S)))`.
pub fn check_compiling_ani(setting: &AniSetting, phi_s: &UcoOperator, rho_s: &UcoOperator, cfg: &QuantConfig) -> Result<AniReport> {
    let (phi, rho) = match derive_target_ani(&setting.split, phi_s, rho_s) {
        Ok(ops) => ops,
        Err(Error::Precondition(why)) => return Ok(AniReport::not_applicable("compiling ANI", why)),
        Err(e) => return Err(e),
    };
    let phi = phi.renamed("phi#");
    let rho = rho.renamed("rho#");
    let cc = check_cc_tilde(&setting.instance);
    let kept = preservation(setting, "ANI preserved", (phi_s, rho_s), (&phi, &rho))?;
    let mut verdicts = vec![uco_verdict("derived operators are ucos", &[&phi, &rho]), CriterionVerdict::implication("CC~ => ANI preserved", &cc, &kept)];
    verdicts.push(if covers_target_outputs(&setting.split) {
        strength_verdict(setting, phi_s, rho_s, &phi, &rho, cfg)?
    } else {
        CriterionVerdict::skipped("ANI# within Cl(tau(ANI_S))", "output relation is not surjective")
    });
    Ok(AniReport { verdicts, phi: Some(phi), rho: Some(rho) })
}

fn covers_target_outputs(split: &SplitRelation) -> bool {
    covers_source(&split.outputs)
}

fn strength_verdict(
    setting: &AniSetting,
    phi_s: &UcoOperator,
    rho_s: &UcoOperator,
    phi: &UcoOperator,
    rho: &UcoOperator,
    cfg: &QuantConfig,
) -> Result<CriterionVerdict> {
    let name = "ANI# within Cl(tau(ANI_S))";
    let src = ani_hyperproperty(&setting.source, phi_s, rho_s, cfg)?;
    let tgt = ani_hyperproperty(&setting.target, phi, rho, cfg)?;
    let r = setting.instance.relation();
    let images = src.members().map(|p| existential_image(r, p)).collect::<Result<Vec<_>>>()?;
    let lifted = Hyperproperty::new(setting.target.full(), images)?;
    for p in tgt.members() {
        if !lifted.closure_contains(p) {
            let cx = Counterexample::new("target property in the derived hyperproperty is not below any image").property(p.labels());
            return Ok(CriterionVerdict::fail(name, cx));
        }
    }
    Ok(CriterionVerdict::pass(name).stat("target_members", tgt.len() as u64))
}

/// Allows any output relation; `rho_candidate` must satisfy
/// `s• ∼• t• ⇒ ρ#(t•) = ρ#(τ̃•(ρ_S(s•)))`.
pub fn check_relaxed_ani(setting: &AniSetting, phi_s: &UcoOperator, rho_s: &UcoOperator, rho_candidate: &UcoOperator) -> Result<AniReport> {
    let split = &setting.split;
    if !is_total_map_target_to_source(&split.inputs) || !covers_source(&split.inputs) {
        return Ok(AniReport::not_applicable("relaxed compiling ANI", "input relation must be a total surjective map from target to source"));
    }
    let phi = transport_to_target(&split.inputs, phi_s)?.renamed("phi#");
    let out = masks(&split.outputs)?;
    let mut side = CriterionVerdict::pass("side condition on rho#");
    'outer: for s in 0..split.outputs.source().len() {
        for &t in split.outputs.targets_of(s) {
            let lhs = rho_candidate.of(t);
            let rhs = rho_candidate.apply_mask(out.existential(rho_s.of(s)));
            if lhs != rhs {
                let cx = Counterexample::new(format!(
                    "rho# differs on {} and on the image of {}",
                    split.outputs.target().trace(t),
                    split.outputs.source().trace(s)
                ));
                side = CriterionVerdict::fail("side condition on rho#", cx);
                break 'outer;
            }
        }
    }
    let cc = check_cc_tilde(&setting.instance);
    let kept = preservation(setting, "ANI preserved", (phi_s, rho_s), (&phi, rho_candidate))?;
    let verdicts = vec![uco_verdict("derived operators are ucos", &[&phi, rho_candidate]), side, CriterionVerdict::implication("CC~ => ANI preserved", &cc, &kept)];
    Ok(AniReport { verdicts, phi: Some(phi), rho: Some(rho_candidate.clone()) })
}

/// Source obligations `(σ̃°∘φ_T∘τ̃°, σ̃•∘ρ_T∘τ̃•)` guaranteeing `ANI(φ_T, ρ_T)` after compilation.
pub fn check_src_ani(setting: &AniSetting, phi_t: &UcoOperator, rho_t: &UcoOperator) -> Result<AniReport> {
    let split = &setting.split;
    if !is_total_map_source_to_target(&split.outputs) || !covers_target(&split.outputs) {
        return Ok(AniReport::not_applicable("target ANI by source ANI", "output relation must be a total surjective map from source to target"));
    }
    let inputs = masks(&split.inputs)?;
    for s in 0..split.inputs.source().len() {
        for &t in split.inputs.targets_of(s) {
            if phi_t.of(t) != phi_t.apply_mask(inputs.existential(1 << s)) {
                let why = format!(
                    "phi_T separates {} from the other images of {}",
                    split.inputs.target().trace(t),
                    split.inputs.source().trace(s)
                );
                return Ok(AniReport::not_applicable("target ANI by source ANI", why));
            }
        }
    }
    let phi = transport_to_source(&split.inputs, phi_t)?.renamed("phi#_S");
    let rho = transport_to_source(&split.outputs, rho_t)?.renamed("rho#_S");
    let cc = check_cc_tilde(&setting.instance);
    let kept = preservation(setting, "target ANI obtained", (&phi, &rho), (phi_t, rho_t))?;
    let verdicts = vec![CriterionVerdict::implication("CC~ => target ANI obtained", &cc, &kept)];
    Ok(AniReport { verdicts, phi: Some(phi), rho: Some(rho) })
}

/// A time observation attached to target outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Time {
    Steps(u64),
    Diverges,
}

impl Time {
    fn payload(self) -> Payload {
        match self {
            Time::Steps(n) => Payload::Nat(n),
            Time::Diverges => Payload::tag("ω"),
        }
    }
}

/// How a timing compilation assigns times to a source trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingCompiler {
    /// Every run takes the first time value.
    Constant,
    /// The run takes the time indexed by the secret input.
    SecretDependent,
    /// Any time value may be observed.
    AnyTime,
}

/// Source traces `hi:h · lo:l` with a private input `h` and a public output `l`; target traces
/// append a public `time` event to the output. Inputs relate by equality and outputs by
/// forgetting the time.
pub fn timing_setting(secrets: &[u64], outputs: &[u64], times: &[Time], compilers: &[TimingCompiler]) -> Result<AniSetting> {
    let hi = |v: u64| Event::regular("hi").with_payload(Payload::Nat(v));
    let lo = |v: u64| Event::regular("lo").with_payload(Payload::Nat(v));
    let time = |t: Time| Event::regular("time").with_payload(t.payload());
    let src_alpha = Alphabet::new("timing-src", secrets.iter().map(|&v| hi(v)).chain(outputs.iter().map(|&v| lo(v))))?;
    let tgt_alpha = Alphabet::new(
        "timing-tgt",
        secrets.iter().map(|&v| hi(v)).chain(outputs.iter().map(|&v| lo(v))).chain(times.iter().map(|&t| time(t))),
    )?;
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    for &h in secrets {
        for &l in outputs {
            src.push((vec![hi(h)], vec![lo(l)]));
            for &t in times {
                tgt.push((vec![hi(h)], vec![lo(l), time(t)]));
            }
        }
    }
    let source = SplitUniverse::new("timing-src", src_alpha, &src)?;
    let target = SplitUniverse::new("timing-tgt", tgt_alpha, &tgt)?;
    let same_prefix = |a: &Trace, b: &Trace| crate::trace::events_prefix(a.events(), b.events());
    let split = SplitRelation {
        inputs: TraceRelation::from_predicate(source.inputs(), target.inputs(), |a, b| crate::trace::same_events(a.events(), b.events())),
        outputs: TraceRelation::from_predicate(source.outputs(), target.outputs(), |a, b| b.len() == a.len() + 1 && same_prefix(a, b)),
    };
    let programs = timing_programs(&source, &target, secrets, times, compilers)?;
    AniSetting::new(source, target, split, programs)
}

fn timing_programs(
    source: &SplitUniverse,
    target: &SplitUniverse,
    secrets: &[u64],
    times: &[Time],
    compilers: &[TimingCompiler],
) -> Result<Vec<(String, Vec<TraceId>, Vec<TraceId>)>> {
    let n = source.full().len();
    if n > 16 {
        return Err(cap_exceeded("timing programs", format!("2^{n}"), "2^16"));
    }
    let tgt_index: HashMap<Vec<Event>, TraceId> = target.full().traces().iter().enumerate().map(|(i, t)| (t.events().to_vec(), i)).collect();
    let mut out = Vec::new();
    for &c in compilers {
        for m in 1u64..1 << n {
            let src_ids: Vec<TraceId> = (0..n).filter(|i| m >> i & 1 == 1).collect();
            let mut tgt_ids = Vec::new();
            for &s in &src_ids {
                let st = source.full().trace(s);
                let secret = match st.events()[0].payload() {
                    Some(Payload::Nat(v)) => *v,
                    _ => 0,
                };
                let chosen: Vec<Time> = match c {
                    TimingCompiler::Constant => vec![times[0]],
                    TimingCompiler::SecretDependent => {
                        let k = secrets.iter().position(|&v| v == secret).unwrap_or(0);
                        vec![times[k % times.len()]]
                    }
                    TimingCompiler::AnyTime => times.to_vec(),
                };
                for t in chosen {
                    let mut events = st.events().to_vec();
                    events.push(Event::regular("time").with_payload(t.payload()));
                    let id = tgt_index.get(&events).copied().ok_or_else(|| Error::InvalidInstance("timed trace missing".into()))?;
                    tgt_ids.push(id);
                }
            }
            out.push((format!("{c:?}/{m:#x}"), src_ids, tgt_ids));
        }
    }
    Ok(out)
}

/// Outputs may end in `Goes_wrong` on the source side; a source output ending in
/// `Goes_wrong` after `m` relates to every target output extending `m`.
pub fn undefined_output_setting(secrets: &[u64], outputs: &[u64]) -> Result<AniSetting> {
    let hi = |v: u64| Event::regular("hi").with_payload(Payload::Nat(v));
    let lo = |v: u64| Event::regular("lo").with_payload(Payload::Nat(v));
    let gw = Event::terminal("Goes_wrong");
    let src_alpha = Alphabet::new("ub-src", secrets.iter().map(|&v| hi(v)).chain(outputs.iter().map(|&v| lo(v))).chain([gw.clone()]))?;
    let tgt_alpha = Alphabet::new("ub-tgt", secrets.iter().map(|&v| hi(v)).chain(outputs.iter().map(|&v| lo(v))))?;
    let mut src_outs: Vec<Vec<Event>> = vec![vec![], vec![gw.clone()]];
    let mut tgt_outs: Vec<Vec<Event>> = vec![vec![]];
    for &l in outputs {
        src_outs.push(vec![lo(l)]);
        src_outs.push(vec![lo(l), gw.clone()]);
        tgt_outs.push(vec![lo(l)]);
    }
    let src: Vec<_> = secrets.iter().flat_map(|&h| src_outs.iter().map(move |o| (vec![hi(h)], o.clone()))).collect();
    let tgt: Vec<_> = secrets.iter().flat_map(|&h| tgt_outs.iter().map(move |o| (vec![hi(h)], o.clone()))).collect();
    let source = SplitUniverse::new("ub-src", src_alpha, &src)?;
    let target = SplitUniverse::new("ub-tgt", tgt_alpha, &tgt)?;
    let split = SplitRelation {
        inputs: TraceRelation::from_predicate(source.inputs(), target.inputs(), |a, b| crate::trace::same_events(a.events(), b.events())),
        outputs: TraceRelation::from_predicate(source.outputs(), target.outputs(), |s, t| {
            if s.is_terminated() {
                crate::trace::events_prefix(&s.events()[..s.len() - 1], t.events())
            } else {
                crate::trace::same_events(s.events(), t.events())
            }
        }),
    };
    let n = source.full().len().min(10);
    let mut programs = Vec::new();
    for s in 0..n {
        let related: Vec<TraceId> = (0..target.full().len()).filter(|&t| split.outputs.contains(source.output_of(s), target.output_of(t)) && split.inputs.contains(source.input_of(s), target.input_of(t))).collect();
        if let Some(&t) = related.first() {
            programs.push((format!("single-{s}"), vec![s], vec![t]));
        }
    }
    AniSetting::new(source, target, split, programs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_equivalence_is_uco() {
        let s = timing_setting(&[0, 1], &[0, 1], &[Time::Steps(0), Time::Diverges], &[TimingCompiler::Constant]).unwrap();
        let labeling = Labeling::new(["hi"]);
        let phi = UcoOperator::low_equivalence(s.source.inputs(), &labeling).unwrap();
        assert!(phi.is_uco());
        assert_eq!(phi.of(0), 0b11);
        assert!(UcoOperator::top(s.source.inputs()).unwrap().is_uco());
    }

    #[test]
    fn non_uco_detected() {
        let s = timing_setting(&[0, 1], &[0], &[Time::Steps(0)], &[]).unwrap();
        let shrink = UcoOperator::from_mask_fn("shrink", s.source.inputs(), |_| 0).unwrap();
        assert!(!shrink.is_extensive());
        assert!(!shrink.is_uco());
    }

    #[test]
    fn derive_requires_total_maps() {
        let s = undefined_output_setting(&[0, 1], &[0]).unwrap();
        let labeling = Labeling::new(["hi"]);
        let phi = UcoOperator::low_equivalence(s.source.inputs(), &labeling).unwrap();
        let rho = UcoOperator::low_equivalence(s.source.outputs(), &labeling).unwrap();
        assert!(matches!(derive_target_ani(&s.split, &phi, &rho), Err(Error::Precondition(_))));
    }
}
