//! Trace relations, their induced property mappings, and Galois-connection checks.

use std::fmt;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::QuantConfig;
use crate::error::{cap_exceeded, Error, Result};
use crate::property::{Hyperproperty, TraceProperty};
use crate::trace::{Trace, TraceId, Universe};

/// A finite relation `∼ ⊆ source × target`, stored as adjacency lists both ways.
#[derive(Debug, Clone)]
pub struct TraceRelation {
    source: Universe,
    target: Universe,
    forward: Vec<Vec<TraceId>>,
    backward: Vec<Vec<TraceId>>,
}

impl PartialEq for TraceRelation {
    fn eq(&self, other: &Self) -> bool {
        self.source.same_as(&other.source) && self.target.same_as(&other.target) && self.forward == other.forward
    }
}

impl Eq for TraceRelation {}

impl TraceRelation {
    pub fn from_id_pairs(source: &Universe, target: &Universe, pairs: impl IntoIterator<Item = (TraceId, TraceId)>) -> Result<Self> {
        let mut forward = vec![Vec::new(); source.len()];
        let mut backward = vec![Vec::new(); target.len()];
        for (s, t) in pairs {
            if s >= source.len() || t >= target.len() {
                return Err(Error::Precondition(format!("pair ({s}, {t}) outside `{}` × `{}`", source.name(), target.name())));
            }
            forward[s].push(t);
            backward[t].push(s);
        }
        for v in forward.iter_mut().chain(backward.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        Ok(TraceRelation { source: source.clone(), target: target.clone(), forward, backward })
    }

    pub fn from_pairs<'a>(source: &Universe, target: &Universe, pairs: impl IntoIterator<Item = (&'a Trace, &'a Trace)>) -> Result<Self> {
        let ids = pairs
            .into_iter()
            .map(|(s, t)| Ok((source.require(s)?, target.require(t)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_id_pairs(source, target, ids)
    }

    pub fn from_predicate(source: &Universe, target: &Universe, related: impl Fn(&Trace, &Trace) -> bool) -> Self {
        let mut pairs = Vec::new();
        for (s, st) in source.traces().iter().enumerate() {
            for (t, tt) in target.traces().iter().enumerate() {
                if related(st, tt) {
                    pairs.push((s, t));
                }
            }
        }
        Self::from_id_pairs(source, target, pairs).expect("ids in range")
    }

    pub fn identity(universe: &Universe) -> Self {
        Self::from_id_pairs(universe, universe, (0..universe.len()).map(|i| (i, i))).expect("ids in range")
    }

    pub fn source(&self) -> &Universe {
        &self.source
    }

    pub fn target(&self) -> &Universe {
        &self.target
    }

    pub fn contains(&self, s: TraceId, t: TraceId) -> bool {
        self.forward[s].binary_search(&t).is_ok()
    }

    pub fn targets_of(&self, s: TraceId) -> &[TraceId] {
        &self.forward[s]
    }

    pub fn sources_of(&self, t: TraceId) -> &[TraceId] {
        &self.backward[t]
    }

    pub fn len(&self) -> usize {
        self.forward.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs in (source id, target id) order.
    pub fn pairs(&self) -> impl Iterator<Item = (TraceId, TraceId)> + '_ {
        self.forward.iter().enumerate().flat_map(|(s, ts)| ts.iter().map(move |&t| (s, t)))
    }

    pub fn inverse(&self) -> TraceRelation {
        TraceRelation {
            source: self.target.clone(),
            target: self.source.clone(),
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    pub fn union(&self, other: &TraceRelation) -> Result<TraceRelation> {
        self.source.require_same(&other.source)?;
        self.target.require_same(&other.target)?;
        Self::from_id_pairs(&self.source, &self.target, self.pairs().chain(other.pairs()))
    }

    /// `self ; other`: `s ∼ u` iff some `t` has `s ∼₁ t` and `t ∼₂ u`.
    pub fn compose(&self, other: &TraceRelation) -> Result<TraceRelation> {
        self.target.require_same(&other.source)?;
        let mut pairs = Vec::new();
        for (s, ts) in self.forward.iter().enumerate() {
            for &t in ts {
                pairs.extend(other.forward[t].iter().map(|&u| (s, u)));
            }
        }
        Self::from_id_pairs(&self.source, &other.target, pairs)
    }

    /// Bit masks of rows and columns, for universes of at most 64 traces.
    pub fn masks(&self) -> Option<RelationMasks> {
        if self.source.len() > 64 || self.target.len() > 64 {
            return None;
        }
        let to_mask = |v: &Vec<TraceId>| v.iter().fold(0u64, |m, &i| m | 1 << i);
        Some(RelationMasks { rows: self.forward.iter().map(to_mask).collect(), cols: self.backward.iter().map(to_mask).collect() })
    }
}

/// Mask form of a relation over small universes.
#[derive(Debug, Clone)]
pub struct RelationMasks {
    rows: Vec<u64>,
    cols: Vec<u64>,
}

impl RelationMasks {
    pub fn existential(&self, source: u64) -> u64 {
        self.cols.iter().enumerate().fold(0, |acc, (t, &c)| if c & source != 0 { acc | 1 << t } else { acc })
    }

    pub fn universal(&self, target: u64) -> u64 {
        self.rows.iter().enumerate().fold(0, |acc, (s, &r)| if r & !target == 0 { acc | 1 << s } else { acc })
    }

    pub fn row(&self, s: TraceId) -> u64 {
        self.rows[s]
    }

    pub fn col(&self, t: TraceId) -> u64 {
        self.cols[t]
    }
}

/// `τ̃(π) = {t | ∃s ∈ π. s ∼ t}`.
pub fn existential_image(r: &TraceRelation, p: &TraceProperty) -> Result<TraceProperty> {
    r.source.require_same(p.universe())?;
    let mut out = TraceProperty::empty(&r.target);
    for s in p.ids() {
        for &t in &r.forward[s] {
            out.insert(t);
        }
    }
    Ok(out)
}

/// `σ̃(π) = {s | ∀t. s ∼ t ⇒ t ∈ π}`.
pub fn universal_image(r: &TraceRelation, p: &TraceProperty) -> Result<TraceProperty> {
    r.target.require_same(p.universe())?;
    Ok(TraceProperty::from_ids(&r.source, (0..r.source.len()).filter(|&s| r.forward[s].iter().all(|&t| p.contains_id(t)))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    SourceToTarget,
    TargetToSource,
}

type MapFn = Arc<dyn Fn(&TraceProperty) -> TraceProperty + Send + Sync>;

#[derive(Clone)]
enum Imp {
    Rule(MapFn),
    Table(Arc<Vec<TraceProperty>>),
}

/// A total function from the properties of one universe to those of another.
#[derive(Clone)]
pub struct PropertyMapping {
    name: String,
    direction: Direction,
    input: Universe,
    output: Universe,
    monotone_by_construction: bool,
    imp: Imp,
}

impl fmt::Debug for PropertyMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PropertyMapping")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .field("input", &self.input.name())
            .field("output", &self.output.name())
            .finish()
    }
}

impl PropertyMapping {
    pub fn from_fn(
        name: impl Into<String>,
        direction: Direction,
        input: &Universe,
        output: &Universe,
        f: impl Fn(&TraceProperty) -> TraceProperty + Send + Sync + 'static,
    ) -> Self {
        PropertyMapping {
            name: name.into(),
            direction,
            input: input.clone(),
            output: output.clone(),
            monotone_by_construction: false,
            imp: Imp::Rule(Arc::new(f)),
        }
    }

    /// `table[m]` is the image of the property with mask `m`.
    pub fn from_table(
        name: impl Into<String>,
        direction: Direction,
        input: &Universe,
        output: &Universe,
        table: Vec<TraceProperty>,
    ) -> Result<Self> {
        if input.len() >= 32 || table.len() != 1usize << input.len() {
            return Err(Error::Precondition(format!("table for `{}` needs 2^{} entries", input.name(), input.len())));
        }
        for p in &table {
            output.require_same(p.universe())?;
        }
        Ok(PropertyMapping {
            name: name.into(),
            direction,
            input: input.clone(),
            output: output.clone(),
            monotone_by_construction: false,
            imp: Imp::Table(Arc::new(table)),
        })
    }

    /// `τ̃` induced by `r`.
    pub fn existential(r: &TraceRelation) -> Self {
        let rel = r.clone();
        let mut m = Self::from_fn("tau", Direction::SourceToTarget, &r.source, &r.target, move |p| {
            existential_image(&rel, p).expect("universe checked by apply")
        });
        m.monotone_by_construction = true;
        m
    }

    /// `σ̃` induced by `r`.
    pub fn universal(r: &TraceRelation) -> Self {
        let rel = r.clone();
        let mut m = Self::from_fn("sigma", Direction::TargetToSource, &r.target, &r.source, move |p| {
            universal_image(&rel, p).expect("universe checked by apply")
        });
        m.monotone_by_construction = true;
        m
    }

    /// Marks the mapping as monotone without checking; used for mappings that are monotone by construction.
    pub fn assume_monotone(mut self) -> Self {
        self.monotone_by_construction = true;
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn input(&self) -> &Universe {
        &self.input
    }

    pub fn output(&self) -> &Universe {
        &self.output
    }

    pub fn monotone_by_construction(&self) -> bool {
        self.monotone_by_construction
    }

    pub fn apply(&self, p: &TraceProperty) -> Result<TraceProperty> {
        self.input.require_same(p.universe())?;
        Ok(match &self.imp {
            Imp::Rule(f) => f(p),
            Imp::Table(t) => t[p.mask().expect("table inputs are small") as usize].clone(),
        })
    }

    /// `self` then `next`.
    pub fn then(&self, next: &PropertyMapping) -> Result<PropertyMapping> {
        self.output.require_same(&next.input)?;
        let (a, b) = (self.clone(), next.clone());
        let mut m = Self::from_fn(format!("{}∘{}", next.name, self.name), self.direction, &self.input, &next.output, move |p| {
            b.apply(&a.apply(p).expect("composed universes match")).expect("composed universes match")
        });
        m.monotone_by_construction = self.monotone_by_construction && next.monotone_by_construction;
        Ok(m)
    }

    /// Images of every input mask, as output masks.
    pub fn mask_table(&self, cap_bits: u32) -> Result<Vec<u64>> {
        if self.input.len() > cap_bits as usize || self.input.len() > 30 {
            return Err(cap_exceeded(format!("tabulating `{}`", self.name), format!("2^{}", self.input.len()), format!("2^{cap_bits}")));
        }
        if self.output.len() > 64 {
            return Err(cap_exceeded(format!("mask output of `{}`", self.name), self.output.len(), 64));
        }
        (0u64..1 << self.input.len())
            .map(|m| Ok(self.apply(&TraceProperty::from_mask(&self.input, m)?)?.mask().expect("small output")))
            .collect()
    }

    /// Materializes the mapping as a table.
    pub fn tabulate(&self, cap_bits: u32) -> Result<PropertyMapping> {
        let masks = self.mask_table(cap_bits)?;
        let table = masks.into_iter().map(|m| TraceProperty::from_mask(&self.output, m)).collect::<Result<Vec<_>>>()?;
        let mut t = Self::from_table(self.name.clone(), self.direction, &self.input, &self.output, table)?;
        t.monotone_by_construction = self.monotone_by_construction;
        Ok(t)
    }

    /// Exhaustive monotonicity check on covering pairs `x ⊂ x ∪ {i}`.
    pub fn is_monotone(&self, cfg: &QuantConfig) -> Result<bool> {
        let table = self.mask_table(cfg.cap_bits)?;
        let n = self.input.len();
        Ok((0..table.len()).all(|x| (0..n).filter(|i| x >> i & 1 == 0).all(|i| table[x] & !table[x | 1 << i] == 0)))
    }

    /// Extensional equality over all inputs.
    pub fn equals(&self, other: &PropertyMapping, cfg: &QuantConfig) -> Result<bool> {
        self.input.require_same(&other.input)?;
        self.output.require_same(&other.output)?;
        Ok(self.mask_table(cfg.cap_bits)? == other.mask_table(cfg.cap_bits)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Unverified,
    /// Induced by a relation, hence a connection by construction.
    Induced,
    Exhaustive,
    Sampled,
}

/// A pair `(τ, σ)` with `τ : P(X) → P(Y)` and `σ : P(Y) → P(X)`.
#[derive(Debug, Clone)]
pub struct GaloisConnection {
    lower: PropertyMapping,
    upper: PropertyMapping,
    verification: Verification,
}

impl GaloisConnection {
    pub fn new(lower: PropertyMapping, upper: PropertyMapping) -> Result<Self> {
        lower.input.require_same(&upper.output)?;
        lower.output.require_same(&upper.input)?;
        Ok(GaloisConnection { lower, upper, verification: Verification::Unverified })
    }

    pub fn induced(r: &TraceRelation) -> Self {
        GaloisConnection {
            lower: PropertyMapping::existential(r),
            upper: PropertyMapping::universal(r),
            verification: Verification::Induced,
        }
    }

    /// Checks the adjunction law and marks the connection verified, or fails with the counterexample.
    pub fn verify(mut self, cfg: &QuantConfig) -> Result<Self> {
        let v = check_adjunction(&self, cfg)?;
        if let Some(w) = &v.counterexample {
            return Err(Error::NotAGaloisConnection(w.to_string()));
        }
        self.verification = match v.coverage {
            Coverage::Exhaustive { .. } => Verification::Exhaustive,
            Coverage::Sampled { .. } => Verification::Sampled,
        };
        Ok(self)
    }

    pub fn lower(&self) -> &PropertyMapping {
        &self.lower
    }

    pub fn upper(&self) -> &PropertyMapping {
        &self.upper
    }

    pub fn verification(&self) -> Verification {
        self.verification
    }

    fn x(&self) -> &Universe {
        &self.lower.input
    }

    fn y(&self) -> &Universe {
        &self.lower.output
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    Adjunction,
    LowerMonotone,
    UpperMonotone,
    Extensive,
    Reductive,
    LowerPreservesUnions,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::Adjunction => "adjunction",
            Law::LowerMonotone => "lower-monotone",
            Law::UpperMonotone => "upper-monotone",
            Law::Extensive => "extensive",
            Law::Reductive => "reductive",
            Law::LowerPreservesUnions => "lower-preserves-unions",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive { cases: u64 },
    Sampled { samples: u64, seed: u64 },
}

/// Properties witnessing a failed law; `xs` range over `X`, `ys` over `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawWitness {
    pub law: Law,
    pub xs: Vec<TraceProperty>,
    pub ys: Vec<TraceProperty>,
}

impl fmt::Display for LawWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.xs.iter().map(|p| p.to_string()).collect();
        let ys: Vec<String> = self.ys.iter().map(|p| p.to_string()).collect();
        write!(f, "{} fails at x = [{}], y = [{}]", self.law, xs.join(", "), ys.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawVerdict {
    pub law: Law,
    pub coverage: Coverage,
    pub counterexample: Option<LawWitness>,
}

impl LawVerdict {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn masks_to_props(u: &Universe, ms: &[u64]) -> Vec<TraceProperty> {
    ms.iter().map(|&m| TraceProperty::from_mask(u, m).expect("mask in range")).collect()
}

fn random_property(u: &Universe, rng: &mut ChaCha8Rng) -> TraceProperty {
    TraceProperty::from_ids(u, (0..u.len()).filter(|_| rng.random::<bool>()))
}

fn flip_random(p: &TraceProperty, rng: &mut ChaCha8Rng) -> TraceProperty {
    let mut q = p.clone();
    if !p.universe().is_empty() {
        let i = rng.random_range(0..p.universe().len());
        if q.contains_id(i) {
            q.remove(i);
        } else {
            q.insert(i);
        }
    }
    q
}

fn least(found: Vec<LawWitness>) -> Option<LawWitness> {
    found.into_iter().min_by(|a, b| a.xs.cmp(&b.xs).then_with(|| a.ys.cmp(&b.ys)))
}

/// `τ(x) ⊆ y ⟺ x ⊆ σ(y)` over all pairs, or over seeded samples beyond `pair_cap_bits`.
pub fn check_adjunction(gc: &GaloisConnection, cfg: &QuantConfig) -> Result<LawVerdict> {
    let (n, m) = (gc.x().len(), gc.y().len());
    if n + m <= cfg.pair_cap_bits as usize {
        let tau = gc.lower.mask_table(cfg.pair_cap_bits)?;
        let sig = gc.upper.mask_table(cfg.pair_cap_bits)?;
        for (x, &tx) in tau.iter().enumerate() {
            for (y, &sy) in sig.iter().enumerate() {
                let (x, y) = (x as u64, y as u64);
                if (tx & !y == 0) != (x & !sy == 0) {
                    let w = LawWitness { law: Law::Adjunction, xs: masks_to_props(gc.x(), &[x]), ys: masks_to_props(gc.y(), &[y]) };
                    return Ok(LawVerdict { law: Law::Adjunction, coverage: Coverage::Exhaustive { cases: 1 << (n + m) }, counterexample: Some(w) });
                }
            }
        }
        return Ok(LawVerdict { law: Law::Adjunction, coverage: Coverage::Exhaustive { cases: 1 << (n + m) }, counterexample: None });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found = Vec::new();
    for k in 0..cfg.samples {
        let x = random_property(gc.x(), &mut rng);
        let tx = gc.lower.apply(&x)?;
        let y = if k % 2 == 0 { random_property(gc.y(), &mut rng) } else { flip_random(&tx, &mut rng) };
        let sy = gc.upper.apply(&y)?;
        if tx.is_subset(&y)? != x.is_subset(&sy)? {
            found.push(LawWitness { law: Law::Adjunction, xs: vec![x], ys: vec![y] });
        }
    }
    Ok(LawVerdict {
        law: Law::Adjunction,
        coverage: Coverage::Sampled { samples: cfg.samples as u64, seed: cfg.seed },
        counterexample: least(found),
    })
}

fn monotone_verdict(map: &PropertyMapping, law: Law, on_x: bool, cfg: &QuantConfig, rng: &mut ChaCha8Rng) -> Result<LawVerdict> {
    let u = map.input().clone();
    let n = u.len();
    let wrap = |a: TraceProperty, b: TraceProperty| {
        if on_x {
            LawWitness { law, xs: vec![a, b], ys: vec![] }
        } else {
            LawWitness { law, xs: vec![], ys: vec![a, b] }
        }
    };
    if n <= cfg.cap_bits as usize {
        let table = map.mask_table(cfg.cap_bits)?;
        for x in 0..table.len() {
            for i in (0..n).filter(|i| x >> i & 1 == 0) {
                if table[x] & !table[x | 1 << i] != 0 {
                    let w = wrap(TraceProperty::from_mask(&u, x as u64)?, TraceProperty::from_mask(&u, (x | 1 << i) as u64)?);
                    return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases: (table.len() * n) as u64 }, counterexample: Some(w) });
                }
            }
        }
        return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases: (table.len() * n) as u64 }, counterexample: None });
    }
    let mut found = Vec::new();
    for _ in 0..cfg.samples {
        let x = random_property(&u, rng);
        let bigger = x.union(&random_property(&u, rng))?;
        if !map.apply(&x)?.is_subset(&map.apply(&bigger)?)? {
            found.push(wrap(x, bigger));
        }
    }
    Ok(LawVerdict { law, coverage: Coverage::Sampled { samples: cfg.samples as u64, seed: cfg.seed }, counterexample: least(found) })
}

/// Checks `z ⊆ outer(inner(z))`, or the reverse inclusion when `reductive`.
fn closure_verdict(
    inner: &PropertyMapping,
    outer: &PropertyMapping,
    law: Law,
    reductive: bool,
    cfg: &QuantConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LawVerdict> {
    let u = inner.input().clone();
    let wrap = |z: TraceProperty| {
        if reductive {
            LawWitness { law, xs: vec![], ys: vec![z] }
        } else {
            LawWitness { law, xs: vec![z], ys: vec![] }
        }
    };
    let holds = |z: &TraceProperty| -> Result<bool> {
        let back = outer.apply(&inner.apply(z)?)?;
        if reductive {
            back.is_subset(z)
        } else {
            z.is_subset(&back)
        }
    };
    if u.len() <= cfg.cap_bits as usize {
        let cases = 1u64 << u.len();
        for m in 0..cases {
            let z = TraceProperty::from_mask(&u, m)?;
            if !holds(&z)? {
                return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases }, counterexample: Some(wrap(z)) });
            }
        }
        return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases }, counterexample: None });
    }
    let mut found = Vec::new();
    for _ in 0..cfg.samples {
        let z = random_property(&u, rng);
        if !holds(&z)? {
            found.push(wrap(z));
        }
    }
    Ok(LawVerdict { law, coverage: Coverage::Sampled { samples: cfg.samples as u64, seed: cfg.seed }, counterexample: least(found) })
}

fn unions_verdict(tau: &PropertyMapping, cfg: &QuantConfig, rng: &mut ChaCha8Rng) -> Result<LawVerdict> {
    let law = Law::LowerPreservesUnions;
    let u = tau.input().clone();
    let n = u.len();
    let empty = TraceProperty::empty(&u);
    if !tau.apply(&empty)?.is_empty() {
        let w = LawWitness { law, xs: vec![], ys: vec![] };
        return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases: 1 }, counterexample: Some(w) });
    }
    if 2 * n <= cfg.pair_cap_bits as usize {
        let table = tau.mask_table(cfg.pair_cap_bits)?;
        let cases = (table.len() * table.len()) as u64;
        for a in 0..table.len() {
            for b in 0..table.len() {
                if table[a | b] != table[a] | table[b] {
                    let w = LawWitness { law, xs: masks_to_props(&u, &[a as u64, b as u64]), ys: vec![] };
                    return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases }, counterexample: Some(w) });
                }
            }
        }
        return Ok(LawVerdict { law, coverage: Coverage::Exhaustive { cases }, counterexample: None });
    }
    let mut found = Vec::new();
    for k in 0..cfg.samples {
        let family: Vec<TraceProperty> = (0..2 + k % 3).map(|_| random_property(&u, rng)).collect();
        let mut joined = TraceProperty::empty(&u);
        let mut images = TraceProperty::empty(tau.output());
        for p in &family {
            joined = joined.union(p)?;
            images = images.union(&tau.apply(p)?)?;
        }
        if tau.apply(&joined)? != images {
            found.push(LawWitness { law, xs: family, ys: vec![] });
        }
    }
    Ok(LawVerdict { law, coverage: Coverage::Sampled { samples: cfg.samples as u64, seed: cfg.seed }, counterexample: least(found) })
}

/// Both maps monotone, `x ⊆ σ(τ(x))`, `τ(σ(y)) ⊆ y`, and `τ` preserves unions.
pub fn check_characteristic(gc: &GaloisConnection, cfg: &QuantConfig) -> Result<Vec<LawVerdict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(vec![
        monotone_verdict(&gc.lower, Law::LowerMonotone, true, cfg, &mut rng)?,
        monotone_verdict(&gc.upper, Law::UpperMonotone, false, cfg, &mut rng)?,
        closure_verdict(&gc.lower, &gc.upper, Law::Extensive, false, cfg, &mut rng)?,
        closure_verdict(&gc.upper, &gc.lower, Law::Reductive, true, cfg, &mut rng)?,
        unions_verdict(&gc.lower, cfg, &mut rng)?,
    ])
}

/// `s ∼ t ⟺ t ∈ τ({s})`, for a verified connection.
pub fn relation_of_connection(gc: &GaloisConnection) -> Result<TraceRelation> {
    if gc.verification == Verification::Unverified {
        return Err(Error::Unverified(format!("{}/{}", gc.lower.name, gc.upper.name)));
    }
    let x = gc.x().clone();
    let mut pairs = Vec::new();
    for s in 0..x.len() {
        let img = gc.lower.apply(&TraceProperty::from_ids(&x, [s]))?;
        pairs.extend(img.ids().map(|t| (s, t)));
    }
    TraceRelation::from_id_pairs(&x, gc.y(), pairs)
}

pub fn compose_relations(r1: &TraceRelation, r2: &TraceRelation) -> Result<TraceRelation> {
    r1.compose(r2)
}

fn identity_on(inner: &PropertyMapping, outer: &PropertyMapping, cfg: &QuantConfig) -> Result<bool> {
    let u = inner.input().clone();
    if u.len() <= cfg.cap_bits as usize {
        for m in 0u64..1 << u.len() {
            let z = TraceProperty::from_mask(&u, m)?;
            if outer.apply(&inner.apply(&z)?)? != z {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let z = random_property(&u, &mut rng);
        if outer.apply(&inner.apply(&z)?)? != z {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `τ ∘ σ = id`.
pub fn is_insertion(gc: &GaloisConnection, cfg: &QuantConfig) -> Result<bool> {
    identity_on(&gc.upper, &gc.lower, cfg)
}

/// `σ ∘ τ = id`.
pub fn is_reflection(gc: &GaloisConnection, cfg: &QuantConfig) -> Result<bool> {
    identity_on(&gc.lower, &gc.upper, cfg)
}

/// The pointwise lift of a property mapping to hyperproperties.
#[derive(Debug, Clone)]
pub struct HyperMapping {
    mapping: PropertyMapping,
}

pub fn lift_mapping_to_hyper(m: &PropertyMapping) -> HyperMapping {
    HyperMapping { mapping: m.clone() }
}

impl HyperMapping {
    pub fn mapping(&self) -> &PropertyMapping {
        &self.mapping
    }

    pub fn apply(&self, h: &Hyperproperty) -> Result<Hyperproperty> {
        self.mapping.input.require_same(h.universe())?;
        let images = h.members().map(|p| self.mapping.apply(p)).collect::<Result<Vec<_>>>()?;
        Hyperproperty::new(&self.mapping.output, images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{Alphabet, Event, TraceUniverse};

    fn abc() -> Universe {
        let a = Alphabet::new("abc", [Event::regular("a"), Event::regular("b"), Event::regular("c")]).unwrap();
        TraceUniverse::enumerate("abc1", a, 1, 100).unwrap()
    }

    #[test]
    fn images_of_identity() {
        let u = abc();
        let r = TraceRelation::identity(&u);
        let p = TraceProperty::from_mask(&u, 0b0110).unwrap();
        assert_eq!(existential_image(&r, &p).unwrap(), p);
        assert_eq!(universal_image(&r, &p).unwrap(), p);
    }

    #[test]
    fn unrelated_source_lands_in_every_universal_image() {
        let u = abc();
        let r = TraceRelation::from_id_pairs(&u, &u, [(0, 1)]).unwrap();
        let empty = TraceProperty::empty(&u);
        assert_eq!(universal_image(&r, &empty).unwrap().mask(), Some(0b1110));
    }

    #[test]
    fn induced_connection_roundtrip() {
        let u = abc();
        let r = TraceRelation::from_id_pairs(&u, &u, [(0, 1), (0, 2), (3, 3)]).unwrap();
        let gc = GaloisConnection::induced(&r);
        assert_eq!(relation_of_connection(&gc).unwrap(), r);
        assert!(check_adjunction(&gc, &QuantConfig::default()).unwrap().holds());
    }

    #[test]
    fn unverified_connection_has_no_relation() {
        let u = abc();
        let id = PropertyMapping::from_fn("id", Direction::SourceToTarget, &u, &u, |p| p.clone());
        let gc = GaloisConnection::new(id.clone(), id).unwrap();
        assert!(matches!(relation_of_connection(&gc), Err(Error::Unverified(_))));
        let gc = gc.verify(&QuantConfig::default()).unwrap();
        assert_eq!(gc.verification(), Verification::Exhaustive);
        assert_eq!(relation_of_connection(&gc).unwrap(), TraceRelation::identity(&u));
    }

    #[test]
    fn constant_full_is_not_lower_adjoint() {
        let u = abc();
        let full = TraceProperty::full(&u);
        let f = full.clone();
        let tau = PropertyMapping::from_fn("top", Direction::SourceToTarget, &u, &u, move |_| f.clone());
        let sig = PropertyMapping::from_fn("top", Direction::TargetToSource, &u, &u, move |_| full.clone());
        let gc = GaloisConnection::new(tau, sig).unwrap();
        let v = check_adjunction(&gc, &QuantConfig::default()).unwrap();
        let w = v.counterexample.unwrap();
        assert_eq!(w.xs[0].mask(), Some(0));
        assert_eq!(w.ys[0].mask(), Some(0));
    }

    #[test]
    fn compose_and_union() {
        let u = abc();
        let r1 = TraceRelation::from_id_pairs(&u, &u, [(0, 1)]).unwrap();
        let r2 = TraceRelation::from_id_pairs(&u, &u, [(1, 2), (1, 3)]).unwrap();
        assert_eq!(r1.compose(&r2).unwrap().pairs().collect::<Vec<_>>(), vec![(0, 2), (0, 3)]);
        assert_eq!(r1.union(&r2).unwrap().len(), 3);
    }
}
