//! Trace properties, behaviors, hyperproperties and safety over a finite universe.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{cap_exceeded, Error, Result};
use crate::trace::{Trace, TraceId, Universe};

/// A set of traces drawn from one universe.
#[derive(Debug, Clone)]
pub struct TraceProperty {
    universe: Universe,
    bits: FixedBitSet,
}

impl TraceProperty {
    pub fn empty(universe: &Universe) -> Self {
        TraceProperty { universe: universe.clone(), bits: FixedBitSet::with_capacity(universe.len()) }
    }

    pub fn full(universe: &Universe) -> Self {
        let mut p = Self::empty(universe);
        p.bits.insert_range(..);
        p
    }

    pub fn from_ids(universe: &Universe, ids: impl IntoIterator<Item = TraceId>) -> Self {
        let mut p = Self::empty(universe);
        for id in ids {
            p.bits.insert(id);
        }
        p
    }

    pub fn from_traces<'a>(universe: &Universe, traces: impl IntoIterator<Item = &'a Trace>) -> Result<Self> {
        let mut p = Self::empty(universe);
        for t in traces {
            p.bits.insert(universe.require(t)?);
        }
        Ok(p)
    }

    /// Bit `i` of `mask` selects trace id `i`.
    pub fn from_mask(universe: &Universe, mask: u64) -> Result<Self> {
        if universe.len() > 64 {
            return Err(cap_exceeded("mask-encoded property", universe.len(), 64));
        }
        if universe.len() < 64 && mask >> universe.len() != 0 {
            return Err(Error::Precondition(format!("mask {mask:#x} exceeds universe `{}`", universe.name())));
        }
        Ok(Self::from_ids(universe, (0..universe.len()).filter(|i| mask >> i & 1 == 1)))
    }

    pub fn mask(&self) -> Option<u64> {
        (self.universe.len() <= 64).then(|| self.bits.ones().fold(0u64, |m, i| m | 1 << i))
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn contains_id(&self, id: TraceId) -> bool {
        self.bits.contains(id)
    }

    pub fn contains(&self, trace: &Trace) -> bool {
        self.universe.id_of(trace).is_some_and(|id| self.bits.contains(id))
    }

    pub fn insert(&mut self, id: TraceId) {
        self.bits.insert(id);
    }

    pub fn remove(&mut self, id: TraceId) {
        self.bits.set(id, false);
    }

    pub fn ids(&self) -> impl Iterator<Item = TraceId> + '_ {
        self.bits.ones()
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> + '_ {
        self.bits.ones().map(|i| self.universe.trace(i))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn labels(&self) -> Vec<String> {
        self.traces().map(|t| t.to_string()).collect()
    }

    fn same_universe(&self, other: &TraceProperty) -> Result<()> {
        self.universe.require_same(&other.universe)
    }

    pub fn is_subset(&self, other: &TraceProperty) -> Result<bool> {
        self.same_universe(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    pub fn union(&self, other: &TraceProperty) -> Result<TraceProperty> {
        self.same_universe(other)?;
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        Ok(out)
    }

    pub fn intersection(&self, other: &TraceProperty) -> Result<TraceProperty> {
        self.same_universe(other)?;
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        Ok(out)
    }

    pub fn difference(&self, other: &TraceProperty) -> Result<TraceProperty> {
        self.same_universe(other)?;
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        Ok(out)
    }

    pub fn complement(&self) -> TraceProperty {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    /// Every subset of this property, in mask order. Fails beyond `cap_bits` members.
    pub fn subsets(&self, cap_bits: u32) -> Result<Vec<TraceProperty>> {
        let ids: Vec<TraceId> = self.ids().collect();
        if ids.len() > cap_bits as usize {
            return Err(cap_exceeded("subset enumeration", format!("2^{}", ids.len()), format!("2^{cap_bits}")));
        }
        Ok((0u64..1 << ids.len())
            .map(|m| TraceProperty::from_ids(&self.universe, ids.iter().enumerate().filter(|(j, _)| m >> j & 1 == 1).map(|(_, &i)| i)))
            .collect())
    }
}

/// All properties of a universe in mask order.
pub fn all_properties(universe: &Universe, cap_bits: u32) -> Result<impl Iterator<Item = TraceProperty> + '_> {
    if universe.len() > cap_bits as usize || universe.len() > 63 {
        return Err(cap_exceeded(
            format!("property enumeration over `{}`", universe.name()),
            format!("2^{}", universe.len()),
            format!("2^{cap_bits}"),
        ));
    }
    Ok((0u64..1 << universe.len()).map(move |m| TraceProperty::from_mask(universe, m).expect("mask in range")))
}

impl PartialEq for TraceProperty {
    fn eq(&self, other: &Self) -> bool {
        self.universe.same_as(&other.universe) && self.bits == other.bits
    }
}

impl Eq for TraceProperty {}

impl PartialOrd for TraceProperty {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Mask order: compares membership vectors as binary numbers, trace id 0 least significant.
impl Ord for TraceProperty {
    fn cmp(&self, other: &Self) -> Ordering {
        self.universe
            .name()
            .cmp(other.universe.name())
            .then_with(|| self.bits.len().cmp(&other.bits.len()))
            .then_with(|| self.bits.as_slice().iter().rev().cmp(other.bits.as_slice().iter().rev()))
    }
}

impl std::hash::Hash for TraceProperty {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.universe.name().hash(state);
        self.bits.hash(state);
    }
}

impl fmt::Display for TraceProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(", "))
    }
}

/// The finite set of traces a program may produce; ids kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behavior {
    universe: Universe,
    ids: Vec<TraceId>,
}

impl Behavior {
    pub fn new(universe: &Universe, ids: impl IntoIterator<Item = TraceId>) -> Self {
        let mut ids: Vec<TraceId> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Behavior { universe: universe.clone(), ids }
    }

    pub fn from_traces<'a>(universe: &Universe, traces: impl IntoIterator<Item = &'a Trace>) -> Result<Self> {
        let ids = traces.into_iter().map(|t| universe.require(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(universe, ids))
    }

    pub fn from_property(p: &TraceProperty) -> Self {
        Behavior { universe: p.universe.clone(), ids: p.ids().collect() }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn ids(&self) -> &[TraceId] {
        &self.ids
    }

    pub fn contains_id(&self, id: TraceId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> + '_ {
        self.ids.iter().map(|&i| self.universe.trace(i))
    }

    pub fn to_property(&self) -> TraceProperty {
        TraceProperty::from_ids(&self.universe, self.ids.iter().copied())
    }

    /// Union of behaviors over one universe.
    pub fn union_all<'a>(universe: &Universe, parts: impl IntoIterator<Item = &'a Behavior>) -> Self {
        Self::new(universe, parts.into_iter().flat_map(|b| b.ids.iter().copied()))
    }
}

/// `beh ⊆ π`.
pub fn satisfies(beh: &Behavior, p: &TraceProperty) -> Result<bool> {
    beh.universe.require_same(&p.universe)?;
    Ok(beh.ids.iter().all(|&i| p.contains_id(i)))
}

/// `beh ∈ H`.
pub fn satisfies_hyper(beh: &Behavior, h: &Hyperproperty) -> Result<bool> {
    beh.universe.require_same(&h.universe)?;
    Ok(h.contains(&beh.to_property()))
}

/// A finite set of properties over one universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperproperty {
    universe: Universe,
    members: BTreeSet<TraceProperty>,
}

impl Hyperproperty {
    pub fn new(universe: &Universe, members: impl IntoIterator<Item = TraceProperty>) -> Result<Self> {
        let mut h = Hyperproperty { universe: universe.clone(), members: BTreeSet::new() };
        for p in members {
            h.insert(p)?;
        }
        Ok(h)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn insert(&mut self, p: TraceProperty) -> Result<bool> {
        self.universe.require_same(&p.universe)?;
        Ok(self.members.insert(p))
    }

    pub fn contains(&self, p: &TraceProperty) -> bool {
        self.members.contains(p)
    }

    pub fn members(&self) -> impl Iterator<Item = &TraceProperty> + '_ {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `Cl⊆(H)`: every subset of every member.
    pub fn subset_closure(&self, cap_bits: u32) -> Result<Hyperproperty> {
        let mut out = Hyperproperty { universe: self.universe.clone(), members: BTreeSet::new() };
        for p in &self.members {
            out.members.extend(p.subsets(cap_bits)?);
        }
        Ok(out)
    }

    pub fn is_subset_closed(&self) -> bool {
        self.members.iter().all(|p| {
            p.ids().all(|i| {
                let mut q = p.clone();
                q.remove(i);
                self.members.contains(&q)
            })
        })
    }

    /// `x ∈ Cl⊆(H)` without materializing the closure.
    pub fn closure_contains(&self, x: &TraceProperty) -> bool {
        self.members.iter().any(|p| x.bits.is_subset(&p.bits))
    }
}

/// Safety relative to a finite prefix-closed universe: every excluded trace has a
/// prefix none of whose extensions are in the property.
pub fn is_safety(p: &TraceProperty) -> Result<bool> {
    let u = &p.universe;
    u.require_prefix_closed()?;
    Ok((0..u.len()).filter(|&t| !p.contains_id(t)).all(|t| {
        u.prefix_ids(t).into_iter().any(|m| u.extension_ids(m).into_iter().all(|x| !p.contains_id(x)))
    }))
}

/// The least safety property containing `p`: traces all of whose prefixes extend into `p`.
pub fn safe_closure(p: &TraceProperty) -> Result<TraceProperty> {
    let u = &p.universe;
    u.require_prefix_closed()?;
    let mut reaches = FixedBitSet::with_capacity(u.len());
    for t in p.ids() {
        let mut cur = Some(t);
        while let Some(c) = cur {
            if reaches.put(c) {
                break;
            }
            cur = u.parent(c);
        }
    }
    let mut out = TraceProperty::empty(u);
    for t in 0..u.len() {
        let parent_ok = u.parent(t).is_none_or(|q| out.contains_id(q));
        if parent_ok && reaches.contains(t) {
            out.insert(t);
        }
    }
    Ok(out)
}

/// The largest safety property excluding every extension of `m`.
pub fn cone_complement(u: &Universe, m: TraceId) -> TraceProperty {
    let mut p = TraceProperty::full(u);
    for x in u.extension_ids(m) {
        p.remove(x);
    }
    p
}
