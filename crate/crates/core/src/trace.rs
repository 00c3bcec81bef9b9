//! Events, alphabets, finite traces and bounded trace universes.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{cap_exceeded, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    Nat(u64),
    Bool(bool),
    Tag(Arc<str>),
}

impl Payload {
    pub fn tag(s: impl AsRef<str>) -> Self {
        Payload::Tag(Arc::from(s.as_ref()))
    }

    /// Parses the textual form used in fixtures: integers, `true`/`false`, else a tag.
    pub fn parse(s: &str) -> Self {
        if let Ok(n) = s.parse::<u64>() {
            Payload::Nat(n)
        } else if s == "true" {
            Payload::Bool(true)
        } else if s == "false" {
            Payload::Bool(false)
        } else {
            Payload::tag(s)
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Nat(n) => write!(f, "{n}"),
            Payload::Bool(b) => write!(f, "{b}"),
            Payload::Tag(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    label: Arc<str>,
    payload: Option<Payload>,
    terminal: bool,
}

impl Event {
    pub fn regular(label: impl AsRef<str>) -> Self {
        Event { label: Arc::from(label.as_ref()), payload: None, terminal: false }
    }

    pub fn terminal(label: impl AsRef<str>) -> Self {
        Event { label: Arc::from(label.as_ref()), payload: None, terminal: true }
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn payload(&self) -> Option<&Payload> {
        self.payload.as_ref()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Same label and payload, ignoring the terminal flag.
    pub fn same_name(&self, other: &Event) -> bool {
        self.label == other.label && self.payload == other.payload
    }

    fn name_cmp(&self, other: &Event) -> Ordering {
        self.label.cmp(&other.label).then_with(|| self.payload.cmp(&other.payload))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Some(p) => write!(f, "{}:{}", self.label, p),
            None => f.write_str(&self.label),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Alphabet {
    name: String,
    events: Vec<Event>,
    lookup: HashMap<(Arc<str>, Option<Payload>), usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.events == other.events
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(name: impl Into<String>, events: impl IntoIterator<Item = Event>) -> Result<Arc<Self>> {
        let name = name.into();
        let mut events: Vec<Event> = events.into_iter().collect();
        if events.is_empty() {
            return Err(Error::EmptyAlphabet(name));
        }
        events.sort_by(|a, b| a.name_cmp(b));
        let mut lookup = HashMap::with_capacity(events.len());
        for (i, e) in events.iter().enumerate() {
            if lookup.insert((e.label.clone(), e.payload.clone()), i).is_some() {
                return Err(Error::DuplicateEvent { alphabet: name, event: e.to_string() });
            }
        }
        Ok(Arc::new(Alphabet { name, events, lookup }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn regular(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.terminal)
    }

    pub fn terminals(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.terminal)
    }

    pub fn find(&self, label: &str, payload: Option<&Payload>) -> Option<&Event> {
        self.lookup.get(&(Arc::from(label), payload.cloned())).map(|&i| &self.events[i])
    }

    pub fn contains(&self, event: &Event) -> bool {
        self.lookup
            .get(&(event.label.clone(), event.payload.clone()))
            .is_some_and(|&i| self.events[i].terminal == event.terminal)
    }

    /// Resolves `label` or `label:payload` to an event of this alphabet.
    pub fn parse_event(&self, text: &str) -> Result<Event> {
        let exact = self.find(text, None);
        let found = exact.or_else(|| {
            let (label, payload) = text.split_once(':')?;
            self.find(label, Some(&Payload::parse(payload)))
        });
        found.cloned().ok_or_else(|| Error::UnknownEvent { alphabet: self.name.clone(), event: text.to_string() })
    }

    pub fn parse_trace(self: &Arc<Self>, labels: &[impl AsRef<str>]) -> Result<Trace> {
        let events = labels.iter().map(|l| self.parse_event(l.as_ref())).collect::<Result<Vec<_>>>()?;
        Trace::new(self.clone(), events)
    }
}

/// A finite sequence of events; a terminal event may only appear last.
#[derive(Debug, Clone)]
pub struct Trace {
    alphabet: Arc<Alphabet>,
    events: Vec<Event>,
}

impl Trace {
    pub fn new(alphabet: Arc<Alphabet>, events: Vec<Event>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !alphabet.contains(e) {
                return Err(Error::UnknownEvent { alphabet: alphabet.name.clone(), event: e.to_string() });
            }
            if e.terminal && i + 1 != events.len() {
                return Err(Error::TerminalNotLast(e.to_string()));
            }
        }
        Ok(Trace { alphabet, events })
    }

    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Trace { alphabet, events: Vec::new() }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_terminated(&self) -> bool {
        self.events.last().is_some_and(|e| e.terminal)
    }

    /// Number of non-terminal events.
    pub fn regular_len(&self) -> usize {
        self.events.len() - usize::from(self.is_terminated())
    }

    pub fn extend(&self, event: Event) -> Result<Trace> {
        if let Some(last) = self.events.last().filter(|e| e.terminal) {
            return Err(Error::TerminalNotLast(last.to_string()));
        }
        if !self.alphabet.contains(&event) {
            return Err(Error::UnknownEvent { alphabet: self.alphabet.name.clone(), event: event.to_string() });
        }
        let mut events = self.events.clone();
        events.push(event);
        Ok(Trace { alphabet: self.alphabet.clone(), events })
    }

    pub fn concat(&self, other: &Trace) -> Result<Trace> {
        check_alphabets(self, other)?;
        if let Some(last) = self.events.last().filter(|e| e.terminal) {
            if !other.is_empty() {
                return Err(Error::TerminalNotLast(last.to_string()));
            }
        }
        let mut events = self.events.clone();
        events.extend(other.events.iter().cloned());
        Ok(Trace { alphabet: self.alphabet.clone(), events })
    }

    pub fn prefix(&self, len: usize) -> Trace {
        Trace { alphabet: self.alphabet.clone(), events: self.events[..len.min(self.len())].to_vec() }
    }

    /// All prefixes, shortest first, including ε and the trace itself.
    pub fn prefixes(&self) -> Vec<Trace> {
        (0..=self.len()).map(|n| self.prefix(n)).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.events.iter().map(|e| e.to_string()).collect()
    }
}

fn check_alphabets(a: &Trace, b: &Trace) -> Result<()> {
    if a.alphabet.name != b.alphabet.name {
        return Err(Error::AlphabetMismatch { left: a.alphabet.name.clone(), right: b.alphabet.name.clone() });
    }
    Ok(())
}

/// `m ≤ t`: `m` is a prefix of `t`. Both traces must share an alphabet.
pub fn is_prefix(m: &Trace, t: &Trace) -> Result<bool> {
    check_alphabets(m, t)?;
    Ok(events_prefix(&m.events, &t.events))
}

/// Prefix test on raw event sequences, comparing labels and payloads only.
pub fn events_prefix(m: &[Event], t: &[Event]) -> bool {
    m.len() <= t.len() && m.iter().zip(t).all(|(a, b)| a.same_name(b))
}

pub fn same_events(a: &[Event], b: &[Event]) -> bool {
    a.len() == b.len() && events_prefix(a, b)
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events && self.alphabet.name == other.alphabet.name
    }
}

impl Eq for Trace {}

impl Hash for Trace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.events.hash(state);
    }
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: by length, then lexicographically by event label and payload.
impl Ord for Trace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                self.events
                    .iter()
                    .zip(&other.events)
                    .map(|(a, b)| a.name_cmp(b).then_with(|| a.terminal.cmp(&b.terminal)))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.alphabet.name.cmp(&other.alphabet.name))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.events.is_empty() {
            return f.write_str("ε");
        }
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub type TraceId = usize;
pub type Universe = Arc<TraceUniverse>;

/// A finite, canonically ordered set of traces. Ids are positions in that order.
#[derive(Debug)]
pub struct TraceUniverse {
    name: String,
    alphabet: Arc<Alphabet>,
    max_len: usize,
    traces: Vec<Trace>,
    index: HashMap<Trace, TraceId>,
    parent: Vec<Option<TraceId>>,
    children: Vec<Vec<TraceId>>,
    prefix_closed: bool,
}

impl PartialEq for TraceUniverse {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for TraceUniverse {}

fn checked_geometric(base: u128, upto: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for i in 0..=upto {
        total = total.checked_add(pow)?;
        if i < upto {
            pow = pow.checked_mul(base)?;
        }
    }
    Some(total)
}

impl TraceUniverse {
    /// All traces of at most `max_len` events (terminals included in the count).
    pub fn enumerate(name: impl Into<String>, alphabet: Arc<Alphabet>, max_len: usize, cap: usize) -> Result<Universe> {
        let name = name.into();
        let r = alphabet.regular().count() as u128;
        let k = alphabet.terminals().count() as u128;
        let size = checked_geometric(r, max_len)
            .and_then(|all| {
                let shorter = if max_len == 0 { Some(0) } else { checked_geometric(r, max_len - 1) }?;
                all.checked_add(k.checked_mul(shorter)?)
            })
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(cap_exceeded(format!("universe `{name}`"), size, cap));
        }
        let traces = Self::grow(&alphabet, max_len, true);
        Ok(Self::build(name, alphabet, max_len, traces, true))
    }

    /// All traces of at most `max_regular` regular events, optionally closed by one terminal.
    pub fn enumerate_terminated(
        name: impl Into<String>,
        alphabet: Arc<Alphabet>,
        max_regular: usize,
        cap: usize,
    ) -> Result<Universe> {
        let name = name.into();
        let r = alphabet.regular().count() as u128;
        let k = alphabet.terminals().count() as u128;
        let size = checked_geometric(r, max_regular).and_then(|g| g.checked_mul(k + 1)).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(cap_exceeded(format!("universe `{name}`"), size, cap));
        }
        let max_len = max_regular + usize::from(k > 0);
        Ok(Self::build(name, alphabet.clone(), max_len, Self::grow(&alphabet, max_regular, false), true))
    }

    fn grow(alphabet: &Arc<Alphabet>, depth: usize, terminal_counts: bool) -> Vec<Trace> {
        let regular: Vec<Event> = alphabet.regular().cloned().collect();
        let terminals: Vec<Event> = alphabet.terminals().cloned().collect();
        let mut out = Vec::new();
        let mut frontier = vec![Trace::empty(alphabet.clone())];
        for level in 0..=depth {
            let mut next = Vec::new();
            for t in &frontier {
                let room = level < depth;
                if room || !terminal_counts {
                    for e in &terminals {
                        let mut events = t.events.clone();
                        events.push(e.clone());
                        out.push(Trace { alphabet: alphabet.clone(), events });
                    }
                }
                if room {
                    for e in &regular {
                        let mut events = t.events.clone();
                        events.push(e.clone());
                        next.push(Trace { alphabet: alphabet.clone(), events });
                    }
                }
            }
            out.append(&mut frontier);
            frontier = next;
        }
        out
    }

    /// The prefix closure of the given traces.
    pub fn from_traces(name: impl Into<String>, alphabet: Arc<Alphabet>, traces: impl IntoIterator<Item = Trace>) -> Result<Universe> {
        let name = name.into();
        let mut set: HashSet<Trace> = HashSet::new();
        set.insert(Trace::empty(alphabet.clone()));
        for t in traces {
            if t.alphabet.name != alphabet.name {
                return Err(Error::AlphabetMismatch { left: alphabet.name.clone(), right: t.alphabet.name.clone() });
            }
            for n in (0..=t.len()).rev() {
                if !set.insert(t.prefix(n)) {
                    break;
                }
            }
        }
        let max_len = set.iter().map(Trace::len).max().unwrap_or(0);
        Ok(Self::build(name, alphabet, max_len, set.into_iter().collect(), true))
    }

    /// Exactly the given traces, without prefix closure. Safety operations reject such universes.
    pub fn from_explicit(name: impl Into<String>, alphabet: Arc<Alphabet>, traces: impl IntoIterator<Item = Trace>) -> Result<Universe> {
        let name = name.into();
        let mut set: HashSet<Trace> = HashSet::new();
        for t in traces {
            if t.alphabet.name != alphabet.name {
                return Err(Error::AlphabetMismatch { left: alphabet.name.clone(), right: t.alphabet.name.clone() });
            }
            set.insert(t);
        }
        let closed = set.iter().all(|t| t.is_empty() || set.contains(&t.prefix(t.len() - 1)))
            && set.contains(&Trace::empty(alphabet.clone()));
        let max_len = set.iter().map(Trace::len).max().unwrap_or(0);
        Ok(Self::build(name, alphabet, max_len, set.into_iter().collect(), closed))
    }

    fn build(name: String, alphabet: Arc<Alphabet>, max_len: usize, mut traces: Vec<Trace>, prefix_closed: bool) -> Universe {
        traces.sort();
        traces.dedup();
        let index: HashMap<Trace, TraceId> = traces.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut parent = Vec::with_capacity(traces.len());
        let mut children = vec![Vec::new(); traces.len()];
        for (i, t) in traces.iter().enumerate() {
            let p = if t.is_empty() { None } else { index.get(&t.prefix(t.len() - 1)).copied() };
            if let Some(p) = p {
                children[p].push(i);
            }
            parent.push(p);
        }
        Arc::new(TraceUniverse { name, alphabet, max_len, traces, index, parent, children, prefix_closed })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.prefix_closed
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn trace(&self, id: TraceId) -> &Trace {
        &self.traces[id]
    }

    pub fn id_of(&self, trace: &Trace) -> Option<TraceId> {
        if trace.alphabet.name != self.alphabet.name {
            return None;
        }
        self.index.get(trace).copied()
    }

    pub fn require(&self, trace: &Trace) -> Result<TraceId> {
        self.id_of(trace)
            .ok_or_else(|| Error::NotInUniverse { universe: self.name.clone(), trace: trace.to_string() })
    }

    /// Looks up a trace by raw events, ignoring alphabet identity.
    pub fn id_of_events(&self, events: &[Event]) -> Option<TraceId> {
        let resolved = events
            .iter()
            .map(|e| self.alphabet.find(e.label(), e.payload()).cloned())
            .collect::<Option<Vec<_>>>()?;
        self.index.get(&Trace { alphabet: self.alphabet.clone(), events: resolved }).copied()
    }

    pub fn parse_trace(&self, labels: &[impl AsRef<str>]) -> Result<TraceId> {
        let t = self.alphabet.parse_trace(labels)?;
        self.require(&t)
    }

    pub fn parent(&self, id: TraceId) -> Option<TraceId> {
        self.parent[id]
    }

    pub fn children(&self, id: TraceId) -> &[TraceId] {
        &self.children[id]
    }

    /// Ids of all prefixes of `id` present in the universe, shortest first.
    pub fn prefix_ids(&self, id: TraceId) -> Vec<TraceId> {
        if self.prefix_closed {
            let mut out = vec![id];
            let mut cur = id;
            while let Some(p) = self.parent[cur] {
                out.push(p);
                cur = p;
            }
            out.reverse();
            out
        } else {
            let t = &self.traces[id];
            (0..=t.len()).filter_map(|n| self.index.get(&t.prefix(n)).copied()).collect()
        }
    }

    /// Ids of all traces having `id` as a prefix, including `id` itself, in id order.
    pub fn extension_ids(&self, id: TraceId) -> Vec<TraceId> {
        let mut out = Vec::new();
        if self.prefix_closed {
            let mut stack = vec![id];
            while let Some(x) = stack.pop() {
                out.push(x);
                stack.extend(self.children[x].iter().copied());
            }
        } else {
            let m = &self.traces[id];
            out.extend((0..self.traces.len()).filter(|&i| events_prefix(&m.events, &self.traces[i].events)));
        }
        out.sort_unstable();
        out
    }

    pub fn is_prefix_id(&self, m: TraceId, t: TraceId) -> bool {
        events_prefix(&self.traces[m].events, &self.traces[t].events)
    }

    /// Same name and the same traces.
    pub fn same_as(&self, other: &TraceUniverse) -> bool {
        std::ptr::eq(self, other) || (self.name == other.name && self.traces == other.traces)
    }

    pub fn require_same(&self, other: &TraceUniverse) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::UniverseMismatch { left: self.name.clone(), right: other.name.clone() })
        }
    }

    pub fn require_prefix_closed(&self) -> Result<()> {
        if self.prefix_closed {
            Ok(())
        } else {
            Err(Error::NotPrefixClosed(self.name.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ag() -> Arc<Alphabet> {
        Alphabet::new("ag", [Event::regular("a"), Event::terminal("G")]).unwrap()
    }

    #[test]
    fn enumerate_counts_terminal_toward_length() {
        let u = TraceUniverse::enumerate("u", ag(), 1, 100).unwrap();
        let shown: Vec<String> = u.traces().iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["ε", "G", "a"]);
    }

    #[test]
    fn terminated_universe_allows_terminal_after_max_len() {
        let u = TraceUniverse::enumerate_terminated("u", ag(), 1, 100).unwrap();
        let shown: Vec<String> = u.traces().iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["ε", "G", "a", "a·G"]);
        assert_eq!(u.max_len(), 2);
    }

    #[test]
    fn terminal_must_be_last() {
        let a = ag();
        let g = Event::terminal("G");
        let r = Trace::new(a.clone(), vec![g.clone(), Event::regular("a")]);
        assert!(matches!(r, Err(Error::TerminalNotLast(_))));
        let t = Trace::new(a, vec![g]).unwrap();
        assert!(t.extend(Event::regular("a")).is_err());
    }

    #[test]
    fn unknown_event_rejected() {
        assert!(matches!(Trace::new(ag(), vec![Event::regular("z")]), Err(Error::UnknownEvent { .. })));
        assert!(matches!(Alphabet::new("x", []), Err(Error::EmptyAlphabet(_))));
        assert!(Alphabet::new("x", [Event::regular("a"), Event::terminal("a")]).is_err());
    }

    #[test]
    fn prefix_requires_same_alphabet() {
        let other = Alphabet::new("other", [Event::regular("a")]).unwrap();
        let a = Trace::empty(ag());
        let b = Trace::empty(other);
        assert!(matches!(is_prefix(&a, &b), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn cap_is_enforced_before_allocation() {
        let a = Alphabet::new("big", (0..10).map(|i| Event::regular(format!("e{i}")))).unwrap();
        assert!(matches!(TraceUniverse::enumerate("u", a, 12, 1 << 20), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn payload_events_parse() {
        let a = Alphabet::new("p", [Event::regular("in").with_payload(Payload::Nat(3)), Event::terminal("res").with_payload(Payload::Bool(true))])
            .unwrap();
        let t = a.parse_trace(&["in:3", "res:true"]).unwrap();
        assert_eq!(t.to_string(), "in:3·res:true");
        assert!(a.parse_event("in:4").is_err());
    }

    #[test]
    fn from_traces_closes_under_prefixes() {
        let a = Alphabet::new("ab", [Event::regular("a"), Event::regular("b")]).unwrap();
        let t = a.parse_trace(&["a", "b", "a"]).unwrap();
        let u = TraceUniverse::from_traces("u", a, [t]).unwrap();
        assert_eq!(u.len(), 4);
        assert!(u.is_prefix_closed());
        let top = u.len() - 1;
        assert_eq!(u.prefix_ids(top), vec![0, 1, 2, 3]);
        assert_eq!(u.extension_ids(1), vec![1, 2, 3]);
    }
}
