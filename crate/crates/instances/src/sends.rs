//! Commands sending nested pairs, compiled to commands that send one natural at a time.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use trace_rel_core::ani::{AniSetting, SplitRelation, SplitUniverse};
use trace_rel_core::criteria::{CompilationInstance, ProgramPair};
use trace_rel_core::galois::TraceRelation;
use trace_rel_core::property::Behavior;
use trace_rel_core::trace::{same_events, Alphabet, Event, Payload, Trace, TraceUniverse, Universe};
use trace_rel_core::verdict::{Counterexample, CriterionVerdict};
use trace_rel_core::{Error, Result};

use crate::sexpr::{arity, Sexp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mul,
}

/// Expressions shared by both languages; target sends only accept naturals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Nat(u64),
    Bin(Op, Arc<Expr>, Arc<Expr>),
    Pair(Arc<Expr>, Arc<Expr>),
    Fst(Arc<Expr>),
    Snd(Arc<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    N,
    Pair(Box<Ty>, Box<Ty>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(u64),
    Pair(Box<Value>, Box<Value>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cmd {
    Skip,
    Seq(Arc<Cmd>, Arc<Cmd>),
    Ifz(Arc<Expr>, Arc<Cmd>, Arc<Cmd>),
    Send(Arc<Expr>),
}

impl Expr {
    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn nodes(&self) -> usize {
        match self {
            Expr::Nat(_) => 1,
            Expr::Bin(_, a, b) | Expr::Pair(a, b) => 1 + a.nodes() + b.nodes(),
            Expr::Fst(a) | Expr::Snd(a) => 1 + a.nodes(),
        }
    }

    fn from_sexp(s: &Sexp) -> Result<Expr> {
        let (head, args) = s.form()?;
        let sub = |i: usize| Self::from_sexp(&args[i]).map(Arc::new);
        match head {
            "+" | "*" => {
                arity(head, args, 2)?;
                Ok(Expr::Bin(if head == "+" { Op::Add } else { Op::Mul }, sub(0)?, sub(1)?))
            }
            "pair" => {
                arity(head, args, 2)?;
                Ok(Expr::Pair(sub(0)?, sub(1)?))
            }
            "fst" => arity(head, args, 1).and_then(|_| Ok(Expr::Fst(sub(0)?))),
            "snd" => arity(head, args, 1).and_then(|_| Ok(Expr::Snd(sub(0)?))),
            n if matches!(s, Sexp::Atom(_)) => n.parse().map(Expr::Nat).map_err(|_| Error::Parse(format!("unknown atom `{n}`"))),
            other => Err(Error::Parse(format!("unknown expression form `{other}`"))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nat(n) => write!(f, "{n}"),
            Expr::Bin(Op::Add, a, b) => write!(f, "(+ {a} {b})"),
            Expr::Bin(Op::Mul, a, b) => write!(f, "(* {a} {b})"),
            Expr::Pair(a, b) => write!(f, "(pair {a} {b})"),
            Expr::Fst(a) => write!(f, "(fst {a})"),
            Expr::Snd(a) => write!(f, "(snd {a})"),
        }
    }
}

impl Cmd {
    pub fn parse(text: &str) -> Result<Cmd> {
        Self::from_sexp(&Sexp::parse(text)?)
    }

    fn from_sexp(s: &Sexp) -> Result<Cmd> {
        let (head, args) = s.form()?;
        let sub = |i: usize| Self::from_sexp(&args[i]).map(Arc::new);
        match head {
            "skip" => arity(head, args, 0).map(|_| Cmd::Skip),
            "seq" => {
                arity(head, args, 2)?;
                Ok(Cmd::Seq(sub(0)?, sub(1)?))
            }
            "ifz" => {
                arity(head, args, 3)?;
                Ok(Cmd::Ifz(Arc::new(Expr::from_sexp(&args[0])?), sub(1)?, sub(2)?))
            }
            "send" => {
                arity(head, args, 1)?;
                Ok(Cmd::Send(Arc::new(Expr::from_sexp(&args[0])?)))
            }
            other => Err(Error::Parse(format!("unknown command form `{other}`"))),
        }
    }

    /// Number of command constructors.
    pub fn size(&self) -> usize {
        match self {
            Cmd::Skip | Cmd::Send(_) => 1,
            Cmd::Seq(a, b) | Cmd::Ifz(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl fmt::Display for Cmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cmd::Skip => f.write_str("skip"),
            Cmd::Seq(a, b) => write!(f, "(seq {a} {b})"),
            Cmd::Ifz(e, a, b) => write!(f, "(ifz {e} {a} {b})"),
            Cmd::Send(e) => write!(f, "(send {e})"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Pair(a, b) => write!(f, "<{a},{b}>"),
        }
    }
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn ty(&self) -> Ty {
        match self {
            Value::Nat(_) => Ty::N,
            Value::Pair(a, b) => Ty::Pair(Box::new(a.ty()), Box::new(b.ty())),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Nat(n) => Expr::Nat(*n),
            Value::Pair(a, b) => Expr::pair(a.to_expr(), b.to_expr()),
        }
    }

    /// Parses `<a,b>` text as printed by `Display`.
    pub fn parse(text: &str) -> Result<Value> {
        fn go(s: &[u8], pos: &mut usize) -> Option<Value> {
            if s.get(*pos) == Some(&b'<') {
                *pos += 1;
                let a = go(s, pos)?;
                (s.get(*pos) == Some(&b',')).then_some(())?;
                *pos += 1;
                let b = go(s, pos)?;
                (s.get(*pos) == Some(&b'>')).then_some(())?;
                *pos += 1;
                Some(Value::pair(a, b))
            } else {
                let start = *pos;
                while s.get(*pos).is_some_and(u8::is_ascii_digit) {
                    *pos += 1;
                }
                std::str::from_utf8(&s[start..*pos]).ok()?.parse().ok().map(Value::Nat)
            }
        }
        let mut pos = 0;
        match go(text.as_bytes(), &mut pos) {
            Some(v) if pos == text.len() => Ok(v),
            _ => Err(Error::Parse(format!("bad value `{text}`"))),
        }
    }
}

pub fn type_of(e: &Expr) -> Option<Ty> {
    match e {
        Expr::Nat(_) => Some(Ty::N),
        Expr::Bin(_, a, b) => (type_of(a)? == Ty::N && type_of(b)? == Ty::N).then_some(Ty::N),
        Expr::Pair(a, b) => Some(Ty::Pair(Box::new(type_of(a)?), Box::new(type_of(b)?))),
        Expr::Fst(a) => match type_of(a)? {
            Ty::Pair(l, _) => Some(*l),
            Ty::N => None,
        },
        Expr::Snd(a) => match type_of(a)? {
            Ty::Pair(_, r) => Some(*r),
            Ty::N => None,
        },
    }
}

/// Source commands send pairs; conditions are naturals.
pub fn well_typed_source(c: &Cmd) -> bool {
    match c {
        Cmd::Skip => true,
        Cmd::Seq(a, b) => well_typed_source(a) && well_typed_source(b),
        Cmd::Ifz(e, a, b) => type_of(e) == Some(Ty::N) && well_typed_source(a) && well_typed_source(b),
        Cmd::Send(e) => matches!(type_of(e), Some(Ty::Pair(..))),
    }
}

pub fn well_typed_target(c: &Cmd) -> bool {
    match c {
        Cmd::Skip => true,
        Cmd::Seq(a, b) => well_typed_target(a) && well_typed_target(b),
        Cmd::Ifz(e, a, b) => type_of(e) == Some(Ty::N) && well_typed_target(a) && well_typed_target(b),
        Cmd::Send(e) => type_of(e) == Some(Ty::N),
    }
}

pub fn eval(e: &Expr) -> Value {
    match e {
        Expr::Nat(n) => Value::Nat(*n),
        Expr::Bin(op, a, b) => match (eval(a), eval(b)) {
            (Value::Nat(x), Value::Nat(y)) => Value::Nat(if *op == Op::Add { x + y } else { x * y }),
            _ => panic!("ill-typed arithmetic in {e}"),
        },
        Expr::Pair(a, b) => Value::pair(eval(a), eval(b)),
        Expr::Fst(a) | Expr::Snd(a) => match eval(a) {
            Value::Pair(l, r) => *if matches!(e, Expr::Fst(_)) { l } else { r },
            Value::Nat(_) => panic!("projection of a natural in {e}"),
        },
    }
}

/// Sends in execution order; the command must be well-typed.
pub fn run(c: &Cmd) -> Vec<Value> {
    fn go(c: &Cmd, out: &mut Vec<Value>) {
        match c {
            Cmd::Skip => {}
            Cmd::Seq(a, b) => {
                go(a, out);
                go(b, out);
            }
            Cmd::Ifz(e, a, b) => go(if eval(e) == Value::Nat(0) { a } else { b }, out),
            Cmd::Send(e) => out.push(eval(e)),
        }
    }
    let mut out = Vec::new();
    go(c, &mut out);
    out
}

pub fn run_target(c: &Cmd) -> Vec<u64> {
    run(c)
        .into_iter()
        .map(|v| match v {
            Value::Nat(n) => n,
            Value::Pair(..) => panic!("target send of a pair"),
        })
        .collect()
}

/// Sends each natural component of `e`, left to right, by type-directed projection.
pub fn gensend(e: &Expr, ty: &Ty) -> Cmd {
    match ty {
        Ty::N => Cmd::Send(Arc::new(e.clone())),
        Ty::Pair(l, r) => Cmd::Seq(
            Arc::new(gensend(&Expr::Fst(Arc::new(e.clone())), l)),
            Arc::new(gensend(&Expr::Snd(Arc::new(e.clone())), r)),
        ),
    }
}

/// Homomorphic except for sends, which become `gensend`.
pub fn compile(c: &Cmd) -> Result<Cmd> {
    if !well_typed_source(c) {
        return Err(Error::InvalidInstance(format!("ill-typed source command {c}")));
    }
    fn go(c: &Cmd) -> Cmd {
        match c {
            Cmd::Skip => Cmd::Skip,
            Cmd::Seq(a, b) => Cmd::Seq(Arc::new(go(a)), Arc::new(go(b))),
            Cmd::Ifz(e, a, b) => Cmd::Ifz(e.clone(), Arc::new(go(a)), Arc::new(go(b))),
            Cmd::Send(e) => gensend(e, &type_of(e).expect("typed")),
        }
    }
    Ok(go(c))
}

/// The structural message rules: a pair of naturals sends both; nested pairs split the target
/// sequence into related segments.
pub fn message_related(m: &Value, t: &[u64]) -> bool {
    let Value::Pair(a, b) = m else { return false };
    match (&**a, &**b) {
        (Value::Nat(x), Value::Nat(y)) => t == [*x, *y],
        (Value::Nat(x), inner @ Value::Pair(..)) => t.first() == Some(x) && message_related(inner, &t[1..]),
        (inner @ Value::Pair(..), Value::Nat(y)) => t.last() == Some(y) && message_related(inner, &t[..t.len() - 1]),
        (l, r) => (1..t.len()).any(|k| message_related(l, &t[..k]) && message_related(r, &t[k..])),
    }
}

/// Messages relate to consecutive target segments, in order; empty relates to empty.
pub fn trace_related(s: &[Value], t: &[u64]) -> bool {
    // reach[j]: the messages seen so far relate to t[..j]
    let mut reach = vec![false; t.len() + 1];
    reach[0] = true;
    for m in s {
        let mut next = vec![false; t.len() + 1];
        for i in (0..=t.len()).filter(|&i| reach[i]) {
            for (j, slot) in next.iter_mut().enumerate().skip(i + 1) {
                if !*slot && message_related(m, &t[i..j]) {
                    *slot = true;
                }
            }
        }
        reach = next;
    }
    reach[t.len()]
}

/// Natural leaves of a value, left to right.
pub fn flatten(v: &Value) -> Vec<u64> {
    match v {
        Value::Nat(n) => vec![*n],
        Value::Pair(a, b) => [flatten(a), flatten(b)].concat(),
    }
}

/// All values of every type with nesting depth ≤ `depth` over `nats`; depth 0 is the naturals.
pub fn values_up_to(depth: usize, nats: &[u64]) -> Vec<Value> {
    let mut levels: Vec<Vec<Value>> = vec![nats.iter().map(|&n| Value::Nat(n)).collect()];
    for _ in 0..depth {
        let prev: Vec<Value> = levels.iter().flatten().cloned().collect();
        let deepest = levels.last().expect("nonempty").clone();
        let mut next = Vec::new();
        for a in &prev {
            for b in &prev {
                if deepest.contains(a) || deepest.contains(b) {
                    next.push(Value::pair(a.clone(), b.clone()));
                }
            }
        }
        levels.push(next);
    }
    levels.into_iter().flatten().collect()
}

/// For each pair value of nesting depth ≤ `depth`, `gensend` of its literal sends a trace related to it.
pub fn check_gensend_lemma(depth: usize, nats: &[u64], send: impl Fn(&Expr, &Ty) -> Cmd) -> CriterionVerdict {
    let mut checked = 0u64;
    for v in values_up_to(depth, nats).into_iter().filter(|v| matches!(v, Value::Pair(..))) {
        checked += 1;
        let t = run_target(&send(&v.to_expr(), &v.ty()));
        if !message_related(&v, &t) {
            let shown: Vec<String> = t.iter().map(u64::to_string).collect();
            let cx = Counterexample::new(format!("value {v} sends {} which is unrelated", shown.join("·")));
            return CriterionVerdict::fail("gensend lemma", cx).stat("values", checked);
        }
    }
    CriterionVerdict::pass("gensend lemma").stat("values", checked)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SendsConfig {
    /// Bound on command constructors.
    pub max_size: usize,
    /// Node bound for send payloads.
    pub payload_nodes: usize,
    /// Node bound for `ifz` conditions.
    pub condition_nodes: usize,
    pub nats: Vec<u64>,
}

impl Default for SendsConfig {
    fn default() -> Self {
        SendsConfig { max_size: 4, payload_nodes: 5, condition_nodes: 3, nats: vec![0, 1, 2] }
    }
}

/// Well-typed expressions by exact node count.
fn expressions(max_nodes: usize, nats: &[u64]) -> Vec<Vec<Arc<Expr>>> {
    let mut by_size: Vec<Vec<Arc<Expr>>> = vec![Vec::new(); max_nodes + 1];
    if max_nodes == 0 {
        return by_size;
    }
    by_size[1] = nats.iter().map(|&n| Arc::new(Expr::Nat(n))).collect();
    for n in 2..=max_nodes {
        let mut out = Vec::new();
        for e in &by_size[n - 1] {
            out.push(Arc::new(Expr::Fst(e.clone())));
            out.push(Arc::new(Expr::Snd(e.clone())));
        }
        for na in 1..n - 1 {
            for a in &by_size[na] {
                for b in &by_size[n - 1 - na] {
                    out.push(Arc::new(Expr::Bin(Op::Add, a.clone(), b.clone())));
                    out.push(Arc::new(Expr::Bin(Op::Mul, a.clone(), b.clone())));
                    out.push(Arc::new(Expr::Pair(a.clone(), b.clone())));
                }
            }
        }
        out.retain(|e| type_of(e).is_some());
        by_size[n] = out;
    }
    by_size
}

pub fn payload_pool(cfg: &SendsConfig) -> Vec<Arc<Expr>> {
    expressions(cfg.payload_nodes, &cfg.nats).into_iter().flatten().filter(|e| matches!(type_of(e), Some(Ty::Pair(..)))).collect()
}

pub fn condition_pool(cfg: &SendsConfig) -> Vec<Arc<Expr>> {
    expressions(cfg.condition_nodes, &cfg.nats).into_iter().flatten().filter(|e| type_of(e) == Some(Ty::N)).collect()
}

/// Well-typed source commands with at most `max_size` constructors, smallest first.
pub fn enumerate_commands(cfg: &SendsConfig) -> Vec<Arc<Cmd>> {
    let payloads = payload_pool(cfg);
    let conditions = condition_pool(cfg);
    let mut by_size: Vec<Vec<Arc<Cmd>>> = vec![Vec::new(); cfg.max_size + 1];
    if cfg.max_size == 0 {
        return Vec::new();
    }
    by_size[1] = std::iter::once(Arc::new(Cmd::Skip)).chain(payloads.iter().map(|e| Arc::new(Cmd::Send(e.clone())))).collect();
    for n in 2..=cfg.max_size {
        let mut out = Vec::new();
        for na in 1..n - 1 {
            let nb = n - 1 - na;
            for a in &by_size[na] {
                for b in &by_size[nb] {
                    out.push(Arc::new(Cmd::Seq(a.clone(), b.clone())));
                }
            }
            for e in &conditions {
                for a in &by_size[na] {
                    for b in &by_size[nb] {
                        out.push(Arc::new(Cmd::Ifz(e.clone(), a.clone(), b.clone())));
                    }
                }
            }
        }
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

fn msg_event(v: &Value) -> Event {
    Event::regular("msg").with_payload(Payload::tag(v.to_string()))
}

fn send_event(n: u64) -> Event {
    Event::regular("send").with_payload(Payload::Nat(n))
}

/// Decodes a source universe trace back to its messages.
pub fn messages_of(t: &Trace) -> Result<Vec<Value>> {
    t.events()
        .iter()
        .map(|e| match e.payload() {
            Some(Payload::Tag(s)) => Value::parse(s),
            _ => Err(Error::Parse(format!("not a message event: {e}"))),
        })
        .collect()
}

pub fn naturals_of(t: &Trace) -> Result<Vec<u64>> {
    t.events()
        .iter()
        .map(|e| match e.payload() {
            Some(Payload::Nat(n)) => Ok(*n),
            _ => Err(Error::Parse(format!("not a send event: {e}"))),
        })
        .collect()
}

/// Prefix-closed universes over message / natural sequences and the rule-based relation between them.
pub fn sends_universes(src: &BTreeSet<Vec<Value>>, tgt: &BTreeSet<Vec<u64>>) -> Result<(Universe, Universe, TraceRelation)> {
    let msgs: BTreeSet<&Value> = src.iter().flatten().collect();
    let nats: BTreeSet<u64> = tgt.iter().flatten().copied().chain(msgs.iter().flat_map(|v| flatten(v))).collect();
    let sa = Alphabet::new("sends-src", msgs.iter().map(|v| msg_event(v)))?;
    let ta = Alphabet::new("sends-tgt", nats.iter().map(|&n| send_event(n)))?;
    let straces = src.iter().map(|s| Trace::new(sa.clone(), s.iter().map(msg_event).collect())).collect::<Result<Vec<_>>>()?;
    let ttraces = tgt.iter().map(|t| Trace::new(ta.clone(), t.iter().map(|&n| send_event(n)).collect())).collect::<Result<Vec<_>>>()?;
    let su = TraceUniverse::from_traces("sends-src", sa, straces)?;
    let tu = TraceUniverse::from_traces("sends-tgt", ta, ttraces)?;
    let mut pairs = Vec::new();
    for s in 0..su.len() {
        let ms = messages_of(su.trace(s))?;
        // the rules admit exactly the flattening, so it is the only candidate worth testing
        let candidate: Vec<u64> = ms.iter().flat_map(flatten).collect();
        let events: Vec<Event> = candidate.iter().map(|&n| send_event(n)).collect();
        if let Some(t) = tu.id_of_events(&events) {
            if trace_related(&ms, &candidate) {
                pairs.push((s, t));
            }
        }
    }
    let relation = TraceRelation::from_id_pairs(&su, &tu, pairs)?;
    Ok((su, tu, relation))
}

/// Every well-typed command within the bounds with its compilation; behaviors are singletons.
pub fn sends_instance(cfg: &SendsConfig) -> Result<CompilationInstance> {
    sends_instance_from(format!("sends-size{}", cfg.max_size), enumerate_commands(cfg))
}

/// The instance over the given commands.
pub fn sends_instance_from(name: String, cmds: Vec<Arc<Cmd>>) -> Result<CompilationInstance> {
    if let Some(c) = cmds.iter().find(|c| !well_typed_source(c)) {
        return Err(Error::Parse(format!("command `{c}` is not well-typed")));
    }
    let runs: Vec<(Cmd, Vec<Value>, Vec<u64>)> = cmds
        .par_iter()
        .map(|c| {
            let tc = compile(c).expect("commands are well-typed");
            let (s, t) = (run(c), run_target(&tc));
            (tc, s, t)
        })
        .collect();
    let src: BTreeSet<Vec<Value>> = runs.iter().map(|r| r.1.clone()).collect();
    let tgt: BTreeSet<Vec<u64>> = runs.iter().map(|r| r.2.clone()).collect();
    let (su, tu, relation) = sends_universes(&src, &tgt)?;
    let sid: HashMap<&Vec<Value>, usize> =
        src.iter().map(|s| (s, su.id_of_events(&s.iter().map(msg_event).collect::<Vec<_>>()).expect("present"))).collect();
    let tid: HashMap<&Vec<u64>, usize> =
        tgt.iter().map(|t| (t, tu.id_of_events(&t.iter().map(|&n| send_event(n)).collect::<Vec<_>>()).expect("present"))).collect();
    let programs = cmds
        .iter()
        .zip(&runs)
        .map(|(c, (tc, s, t))| ProgramPair {
            id: c.to_string(),
            compiled: tc.to_string(),
            source: Behavior::new(&su, [sid[s]]),
            target: Behavior::new(&tu, [tid[t]]),
        })
        .collect();
    CompilationInstance::new(name, relation, programs)
}

/// Programs reading a secret `hi:h` and sending one message chosen by `h`, under the split
/// relation that keeps inputs and forgets how output pairs are nested.
pub fn sends_ani_setting(secrets: &[u64], payloads: &[Value]) -> Result<AniSetting> {
    let hi = |h: u64| Event::regular("hi").with_payload(Payload::Nat(h));
    let flat: BTreeSet<Vec<u64>> = payloads.iter().map(flatten).collect();
    let nats: BTreeSet<u64> = flat.iter().flatten().copied().collect();
    let sa = Alphabet::new("sends-ani-src", secrets.iter().map(|&h| hi(h)).chain(payloads.iter().map(msg_event)))?;
    let ta = Alphabet::new("sends-ani-tgt", secrets.iter().map(|&h| hi(h)).chain(nats.iter().map(|&n| send_event(n))))?;
    let sends = |ns: &[u64]| ns.iter().map(|&n| send_event(n)).collect::<Vec<_>>();
    let src: Vec<(Vec<Event>, Vec<Event>)> = secrets.iter().flat_map(|&h| payloads.iter().map(move |v| (vec![hi(h)], vec![msg_event(v)]))).collect();
    let tgt: Vec<(Vec<Event>, Vec<Event>)> = secrets.iter().flat_map(|&h| flat.iter().map(move |f| (vec![hi(h)], sends(f)))).collect();
    let source = SplitUniverse::new("sends-ani-src", sa, &src)?;
    let target = SplitUniverse::new("sends-ani-tgt", ta, &tgt)?;
    let split = SplitRelation {
        inputs: TraceRelation::from_predicate(source.inputs(), target.inputs(), |a, b| same_events(a.events(), b.events())),
        outputs: TraceRelation::from_predicate(source.outputs(), target.outputs(), |a, b| {
            matches!((messages_of(a), naturals_of(b)), (Ok(ms), Ok(ns)) if trace_related(&ms, &ns))
        }),
    };
    let mut programs = Vec::new();
    let mut choice = vec![0usize; secrets.len()];
    loop {
        let mut sids = Vec::new();
        let mut tids = Vec::new();
        let mut name = Vec::new();
        for (&h, &k) in secrets.iter().zip(&choice) {
            let cmd = Cmd::Send(payloads[k].to_expr().into());
            let out = run_target(&compile(&cmd)?);
            let find = |u: &Universe, events: Vec<Event>| u.id_of_events(&events).ok_or_else(|| Error::InvalidInstance(format!("run of `{cmd}` outside the universe")));
            sids.push(find(source.full(), [vec![hi(h)], run(&cmd).iter().map(msg_event).collect()].concat())?);
            tids.push(find(target.full(), [vec![hi(h)], sends(&out)].concat())?);
            name.push(format!("{h}->{cmd}"));
        }
        programs.push((name.join(" "), sids, tids));
        let Some(i) = choice.iter().position(|&k| k + 1 < payloads.len()) else { break };
        choice[i] += 1;
        choice[..i].iter_mut().for_each(|k| *k = 0);
    }
    AniSetting::new(source, target, split, programs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Value {
        Value::parse(s).unwrap()
    }

    #[test]
    fn gensend_unfolds_by_type() {
        let e = v("<1,<2,3>>").to_expr();
        let c = gensend(&e, &type_of(&e).unwrap());
        assert_eq!(run_target(&c), vec![1, 2, 3]);
        let e = v("<<1,2>,3>").to_expr();
        let c = gensend(&e, &type_of(&e).unwrap());
        assert_eq!(
            c.to_string(),
            "(seq (seq (send (fst (fst (pair (pair 1 2) 3)))) (send (snd (fst (pair (pair 1 2) 3))))) (send (snd (pair (pair 1 2) 3))))"
        );
    }

    #[test]
    fn relation_examples() {
        assert!(trace_related(&[v("<4,6>"), v("<5,7>")], &[4, 6, 5, 7]));
        assert!(trace_related(&[v("<4,<6,<5,7>>>")], &[4, 6, 5, 7]));
        assert!(!trace_related(&[v("<1,2>")], &[2, 1]));
        assert!(trace_related(&[], &[]));
        assert!(!trace_related(&[], &[1]));
        assert!(message_related(&v("<<1,2>,<3,4>>"), &[1, 2, 3, 4]));
        assert!(!message_related(&Value::Nat(1), &[1]));
    }

    #[test]
    fn commands() {
        let c = Cmd::parse("(seq skip (send (pair 1 2)))").unwrap();
        assert_eq!(run(&c), vec![v("<1,2>")]);
        assert_eq!(run_target(&compile(&c).unwrap()), vec![1, 2]);
        assert_eq!(compile(&Cmd::Skip).unwrap(), Cmd::Skip);
        assert!(compile(&Cmd::parse("(send 1)").unwrap()).is_err());
        let c = Cmd::parse("(ifz (+ 0 0) (send (pair 1 2)) skip)").unwrap();
        assert_eq!(run(&c).len(), 1);
    }

    #[test]
    fn value_text_roundtrip() {
        for s in ["<1,<2,3>>", "7", "<<0,0>,<1,2>>"] {
            assert_eq!(v(s).to_string(), s);
        }
        assert!(Value::parse("<1,2").is_err());
    }

    #[test]
    fn pools() {
        let cfg = SendsConfig::default();
        assert_eq!(condition_pool(&cfg).len(), 21);
        assert!(payload_pool(&cfg).iter().all(|e| e.nodes() <= 5));
    }
}
