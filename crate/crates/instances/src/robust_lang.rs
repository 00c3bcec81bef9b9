//! Partial programs and contexts over an expression language with public (`out_L`) and
//! target-only (`out_H`) outputs, linked whole programs, the filtering relation and the
//! back-translation that cleans target contexts.
//!
//! The operational rules are a reconstruction: `out_L e` and `out_H e` emit the value of
//! `e` and evaluate to it, `e1; e2` discards the first value, `if0` picks its first
//! branch on zero, and calls nested deeper than the bound end the run with `bound`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use trace_rel_core::galois::TraceRelation;
use trace_rel_core::property::Behavior;
use trace_rel_core::robust::RobustInstance;
use trace_rel_core::trace::{Alphabet, Event, Payload, Trace, TraceUniverse, Universe};
use trace_rel_core::verdict::{Counterexample, CriterionVerdict};
use trace_rel_core::{Error, Result};

use crate::sexpr::{arity, Sexp};

pub const OUT_L: &str = "out_L";
pub const OUT_H: &str = "out_H";
pub const RESULT: &str = "res";
pub const BOUND: &str = "bound";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RExpr {
    Nat(u64),
    Arg,
    Add(Arc<RExpr>, Arc<RExpr>),
    Seq(Arc<RExpr>, Arc<RExpr>),
    If0(Arc<RExpr>, Arc<RExpr>, Arc<RExpr>),
    Call(Arc<str>, Arc<RExpr>),
    OutL(Arc<RExpr>),
    OutH(Arc<RExpr>),
}

impl RExpr {
    pub fn size(&self) -> usize {
        match self {
            RExpr::Nat(_) | RExpr::Arg => 1,
            RExpr::Add(a, b) | RExpr::Seq(a, b) => 1 + a.size() + b.size(),
            RExpr::If0(c, a, b) => 1 + c.size() + a.size() + b.size(),
            RExpr::Call(_, e) | RExpr::OutL(e) | RExpr::OutH(e) => 1 + e.size(),
        }
    }

    pub fn parse(text: &str) -> Result<RExpr> {
        Self::from_sexp(&Sexp::parse(text)?)
    }

    fn from_sexp(s: &Sexp) -> Result<RExpr> {
        let (head, args) = s.form()?;
        let sub = |i: usize| Self::from_sexp(&args[i]).map(Arc::new);
        Ok(match head {
            "arg" if matches!(s, Sexp::Atom(_)) => RExpr::Arg,
            "+" => {
                arity(head, args, 2)?;
                RExpr::Add(sub(0)?, sub(1)?)
            }
            "seq" => {
                arity(head, args, 2)?;
                RExpr::Seq(sub(0)?, sub(1)?)
            }
            "if0" => {
                arity(head, args, 3)?;
                RExpr::If0(sub(0)?, sub(1)?, sub(2)?)
            }
            "call" => {
                arity(head, args, 2)?;
                match &args[0] {
                    Sexp::Atom(f) => RExpr::Call(Arc::from(f.as_str()), sub(1)?),
                    other => return Err(Error::Parse(format!("function name expected, found {other}"))),
                }
            }
            OUT_L => {
                arity(head, args, 1)?;
                RExpr::OutL(sub(0)?)
            }
            OUT_H => {
                arity(head, args, 1)?;
                RExpr::OutH(sub(0)?)
            }
            n if matches!(s, Sexp::Atom(_)) => RExpr::Nat(n.parse().map_err(|_| Error::Parse(format!("unknown atom `{n}`")))?),
            other => return Err(Error::Parse(format!("unknown form `{other}`"))),
        })
    }

    fn calls(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            RExpr::Nat(_) | RExpr::Arg => {}
            RExpr::Add(a, b) | RExpr::Seq(a, b) => {
                a.calls(out);
                b.calls(out);
            }
            RExpr::If0(c, a, b) => {
                c.calls(out);
                a.calls(out);
                b.calls(out);
            }
            RExpr::Call(f, e) => {
                out.insert(f.clone());
                e.calls(out);
            }
            RExpr::OutL(e) | RExpr::OutH(e) => e.calls(out),
        }
    }

    pub fn has_out_h(&self) -> bool {
        match self {
            RExpr::Nat(_) | RExpr::Arg => false,
            RExpr::Add(a, b) | RExpr::Seq(a, b) => a.has_out_h() || b.has_out_h(),
            RExpr::If0(c, a, b) => c.has_out_h() || a.has_out_h() || b.has_out_h(),
            RExpr::Call(_, e) | RExpr::OutL(e) => e.has_out_h(),
            RExpr::OutH(_) => true,
        }
    }

    fn map_out_h(&self, f: &impl Fn(&Arc<RExpr>) -> RExpr) -> RExpr {
        let m = |e: &Arc<RExpr>| Arc::new(e.map_out_h(f));
        match self {
            RExpr::Nat(_) | RExpr::Arg => self.clone(),
            RExpr::Add(a, b) => RExpr::Add(m(a), m(b)),
            RExpr::Seq(a, b) => RExpr::Seq(m(a), m(b)),
            RExpr::If0(c, a, b) => RExpr::If0(m(c), m(a), m(b)),
            RExpr::Call(g, e) => RExpr::Call(g.clone(), m(e)),
            RExpr::OutL(e) => RExpr::OutL(m(e)),
            RExpr::OutH(e) => f(&m(e)),
        }
    }
}

impl fmt::Display for RExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RExpr::Nat(n) => write!(f, "{n}"),
            RExpr::Arg => f.write_str("arg"),
            RExpr::Add(a, b) => write!(f, "(+ {a} {b})"),
            RExpr::Seq(a, b) => write!(f, "(seq {a} {b})"),
            RExpr::If0(c, a, b) => write!(f, "(if0 {c} {a} {b})"),
            RExpr::Call(g, e) => write!(f, "(call {g} {e})"),
            RExpr::OutL(e) => write!(f, "({OUT_L} {e})"),
            RExpr::OutH(e) => write!(f, "({OUT_H} {e})"),
        }
    }
}

/// A set of named functions, plus a main expression for contexts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RPart {
    pub functions: BTreeMap<Arc<str>, RExpr>,
    pub main: Option<RExpr>,
}

impl RPart {
    pub fn program(functions: impl IntoIterator<Item = (&'static str, RExpr)>) -> RPart {
        RPart { functions: functions.into_iter().map(|(n, b)| (Arc::from(n), b)).collect(), main: None }
    }

    pub fn context(functions: impl IntoIterator<Item = (&'static str, RExpr)>, main: RExpr) -> RPart {
        RPart { main: Some(main), ..Self::program(functions) }
    }

    /// `(program (fun f body) ...)` or `(context (fun g body) ... (main e))`.
    pub fn parse(text: &str) -> Result<RPart> {
        let s = Sexp::parse(text)?;
        let (head, args) = s.form()?;
        let is_context = match head {
            "program" => false,
            "context" => true,
            other => return Err(Error::Parse(format!("expected `program` or `context`, found `{other}`"))),
        };
        let mut part = RPart { functions: BTreeMap::new(), main: None };
        for item in args {
            let (h, a) = item.form()?;
            match (h, a) {
                ("fun", [Sexp::Atom(name), body]) => {
                    if part.functions.insert(Arc::from(name.as_str()), RExpr::from_sexp(body)?).is_some() {
                        return Err(Error::Parse(format!("function `{name}` defined twice")));
                    }
                }
                ("main", [body]) if is_context && part.main.is_none() => part.main = Some(RExpr::from_sexp(body)?),
                _ => return Err(Error::Parse(format!("unexpected item {item} in {head}"))),
            }
        }
        if is_context && part.main.is_none() {
            return Err(Error::Parse("context without `main`".into()));
        }
        Ok(part)
    }

    pub fn has_out_h(&self) -> bool {
        self.functions.values().chain(&self.main).any(RExpr::has_out_h)
    }
}

impl fmt::Display for RPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.main.is_some() { "(context" } else { "(program" })?;
        for (n, b) in &self.functions {
            write!(f, " (fun {n} {b})")?;
        }
        if let Some(m) = &self.main {
            write!(f, " (main {m})")?;
        }
        f.write_str(")")
    }
}

/// A linked whole program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Whole {
    pub functions: BTreeMap<Arc<str>, RExpr>,
    pub main: RExpr,
}

pub fn link(context: &RPart, partial: &RPart) -> Result<Whole> {
    let main = context.main.clone().ok_or_else(|| Error::Precondition("the context has no main expression".into()))?;
    if partial.main.is_some() {
        return Err(Error::Precondition("a partial program has no main expression".into()));
    }
    let mut functions = context.functions.clone();
    for (n, b) in &partial.functions {
        if functions.insert(n.clone(), b.clone()).is_some() {
            return Err(Error::Precondition(format!("function `{n}` is defined by both parts")));
        }
    }
    let mut called = BTreeSet::new();
    main.calls(&mut called);
    functions.values().for_each(|b| b.calls(&mut called));
    if let Some(f) = called.iter().find(|f| !functions.contains_key(*f)) {
        return Err(Error::Precondition(format!("call to undefined function `{f}`")));
    }
    Ok(Whole { functions, main })
}

/// Observable outcome of a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ROut {
    Low(u64),
    High(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RRun {
    pub outputs: Vec<ROut>,
    /// `None` when the call-depth bound was hit.
    pub result: Option<u64>,
}

struct BoundHit;

fn eval(w: &Whole, e: &RExpr, arg: u64, depth: usize, bound: usize, out: &mut Vec<ROut>) -> std::result::Result<u64, BoundHit> {
    Ok(match e {
        RExpr::Nat(n) => *n,
        RExpr::Arg => arg,
        RExpr::Add(a, b) => {
            let x = eval(w, a, arg, depth, bound, out)?;
            x.saturating_add(eval(w, b, arg, depth, bound, out)?)
        }
        RExpr::Seq(a, b) => {
            eval(w, a, arg, depth, bound, out)?;
            eval(w, b, arg, depth, bound, out)?
        }
        RExpr::If0(c, a, b) => {
            let branch = if eval(w, c, arg, depth, bound, out)? == 0 { a } else { b };
            eval(w, branch, arg, depth, bound, out)?
        }
        RExpr::Call(f, e) => {
            let v = eval(w, e, arg, depth, bound, out)?;
            if depth >= bound {
                return Err(BoundHit);
            }
            eval(w, &w.functions[f], v, depth + 1, bound, out)?
        }
        RExpr::OutL(e) => {
            let v = eval(w, e, arg, depth, bound, out)?;
            out.push(ROut::Low(v));
            v
        }
        RExpr::OutH(e) => {
            let v = eval(w, e, arg, depth, bound, out)?;
            out.push(ROut::High(v));
            v
        }
    })
}

/// Big-step run of `main` with `arg = 0`; calls nested deeper than `call_bound` end the run.
pub fn r_semantics(w: &Whole, call_bound: usize) -> RRun {
    let mut outputs = Vec::new();
    let result = eval(w, &w.main, 0, 0, call_bound, &mut outputs).ok();
    RRun { outputs, result }
}

impl RRun {
    pub fn filtered(&self) -> RRun {
        RRun { outputs: self.outputs.iter().filter(|o| matches!(o, ROut::Low(_))).cloned().collect(), result: self.result }
    }

    pub fn events(&self) -> Vec<Event> {
        let mut ev: Vec<Event> = self
            .outputs
            .iter()
            .map(|o| match o {
                ROut::Low(n) => Event::regular(OUT_L).with_payload(Payload::Nat(*n)),
                ROut::High(n) => Event::regular(OUT_H).with_payload(Payload::Nat(*n)),
            })
            .collect();
        ev.push(match self.result {
            Some(n) => Event::terminal(RESULT).with_payload(Payload::Nat(n)),
            None => Event::terminal(BOUND),
        });
        ev
    }
}

/// Erases the events whose labels are not kept.
pub fn filter_trace(t: &Trace, keep: &Arc<Alphabet>) -> Result<Trace> {
    Trace::new(keep.clone(), t.events().iter().filter(|e| keep.contains(e)).cloned().collect())
}

/// Pairs every target trace with its filtered image, when that image is a source trace.
pub fn robust_relation(source: &Universe, target: &Universe) -> Result<TraceRelation> {
    let keep = source.alphabet().clone();
    let mut pairs = Vec::new();
    for t in 0..target.len() {
        if let Some(s) = source.id_of(&filter_trace(target.trace(t), &keep)?) {
            pairs.push((s, t));
        }
    }
    TraceRelation::from_id_pairs(source, target, pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackTranslation {
    /// `out_H e` becomes `e`.
    Clean,
    /// `out_H e` becomes `0`; loses the events and value of `e`.
    Zero,
}

pub fn backtranslate(c: &RPart, how: BackTranslation) -> RPart {
    let f = |e: &Arc<RExpr>| match how {
        BackTranslation::Clean => (**e).clone(),
        BackTranslation::Zero => RExpr::Nat(0),
    };
    RPart { functions: c.functions.iter().map(|(n, b)| (n.clone(), b.map_out_h(&f))).collect(), main: c.main.as_ref().map(|m| m.map_out_h(&f)) }
}

/// All expressions of at most `max_size` constructors over the given literals and callees.
pub fn enumerate_exprs(max_size: usize, literals: &[u64], with_arg: bool, callees: &[&str], with_high: bool) -> Vec<RExpr> {
    let mut by_size: Vec<Vec<RExpr>> = vec![Vec::new(); max_size + 1];
    for size in 1..=max_size {
        let mut here = Vec::new();
        if size == 1 {
            here.extend(literals.iter().map(|&n| RExpr::Nat(n)));
            if with_arg {
                here.push(RExpr::Arg);
            }
        }
        if size >= 2 {
            for e in &by_size[size - 1] {
                let e = Arc::new(e.clone());
                here.extend(callees.iter().map(|f| RExpr::Call(Arc::from(*f), e.clone())));
                here.push(RExpr::OutL(e.clone()));
                if with_high {
                    here.push(RExpr::OutH(e));
                }
            }
        }
        for a in 1..size.saturating_sub(1) {
            let b = size - 1 - a;
            for x in &by_size[a] {
                for y in &by_size[b] {
                    here.push(RExpr::Add(x.clone().into(), y.clone().into()));
                    here.push(RExpr::Seq(x.clone().into(), y.clone().into()));
                }
            }
        }
        for a in 1..size.saturating_sub(2) {
            for b in 1..size - 1 - a {
                let c = size - 1 - a - b;
                for x in &by_size[a] {
                    for y in &by_size[b] {
                        for z in &by_size[c] {
                            here.push(RExpr::If0(x.clone().into(), y.clone().into(), z.clone().into()));
                        }
                    }
                }
            }
        }
        by_size[size] = here;
    }
    by_size.into_iter().flatten().collect()
}

#[derive(Debug, Clone)]
pub struct RobustConfig {
    /// Size bound of the partial program's function body.
    pub program_size: usize,
    /// Size bound of the context's main expression.
    pub context_size: usize,
    pub literals: Vec<u64>,
    pub call_bound: usize,
    pub back_translation: BackTranslation,
}

impl Default for RobustConfig {
    fn default() -> Self {
        RobustConfig { program_size: 3, context_size: 3, literals: vec![0, 1], call_bound: 8, back_translation: BackTranslation::Clean }
    }
}

/// Partial programs define `f`; contexts are a main expression that may call it.
pub fn enumerate_parts(cfg: &RobustConfig) -> (Vec<RPart>, Vec<RPart>, Vec<RPart>) {
    let programs = enumerate_exprs(cfg.program_size, &cfg.literals, true, &["f"], false).into_iter().map(|b| RPart::program([("f", b)])).collect();
    let contexts = |high| enumerate_exprs(cfg.context_size, &cfg.literals, false, &["f"], high).into_iter().map(|m| RPart::context([], m));
    (programs, contexts(false).collect(), contexts(true).collect())
}

/// Identity compilation with enumerated contexts on both sides and back-translation as the
/// constructive witness; runs are deterministic, so behaviors are singletons.
pub fn robust_instance(cfg: &RobustConfig) -> Result<RobustInstance> {
    let (programs, mut source_contexts, target_contexts) = enumerate_parts(cfg);
    let translated: Vec<RPart> = target_contexts.iter().map(|c| backtranslate(c, cfg.back_translation)).collect();
    let known: BTreeSet<RPart> = source_contexts.iter().cloned().collect();
    let extra: BTreeSet<RPart> = translated.iter().filter(|c| !known.contains(*c)).cloned().collect();
    source_contexts.extend(extra);
    let index: HashMap<&RPart, usize> = source_contexts.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let bt: Vec<usize> = translated.iter().map(|c| index[c]).collect();

    let runs = |contexts: &[RPart]| -> Result<Vec<Vec<RRun>>> {
        programs.par_iter().map(|p| contexts.iter().map(|c| Ok(r_semantics(&link(c, p)?, cfg.call_bound))).collect()).collect()
    };
    let src_runs = runs(&source_contexts)?;
    let tgt_runs = runs(&target_contexts)?;
    if src_runs.iter().flatten().any(|r| r.outputs.iter().any(|o| matches!(o, ROut::High(_)))) {
        return Err(Error::InvalidInstance("a source run emitted a target-only event".into()));
    }

    let all: Vec<&RRun> = src_runs.iter().chain(&tgt_runs).flatten().collect();
    let mut payloads: BTreeSet<u64> = BTreeSet::new();
    for r in &all {
        payloads.extend(r.result);
        payloads.extend(r.outputs.iter().map(|o| match o {
            ROut::Low(n) | ROut::High(n) => *n,
        }));
    }
    let low = |n: u64| Event::regular(OUT_L).with_payload(Payload::Nat(n));
    let res = |n: u64| Event::terminal(RESULT).with_payload(Payload::Nat(n));
    let src_events: Vec<Event> = payloads.iter().flat_map(|&n| [low(n), res(n)]).chain([Event::terminal(BOUND)]).collect();
    let high = payloads.iter().map(|&n| Event::regular(OUT_H).with_payload(Payload::Nat(n)));
    let sa = Alphabet::new("robust-src", src_events.clone())?;
    let ta = Alphabet::new("robust-tgt", src_events.into_iter().chain(high))?;
    let to_trace = |a: &Arc<Alphabet>, r: &RRun| Trace::new(a.clone(), r.events());
    let tgt_traces = tgt_runs.iter().flatten().map(|r| to_trace(&ta, r)).collect::<Result<Vec<_>>>()?;
    let src_traces = src_runs.iter().flatten().chain(tgt_runs.iter().flatten()).map(|r| to_trace(&sa, &r.filtered())).collect::<Result<Vec<_>>>()?;
    let su = TraceUniverse::from_traces("robust-src", sa.clone(), src_traces)?;
    let tu = TraceUniverse::from_traces("robust-tgt", ta.clone(), tgt_traces)?;
    let relation = robust_relation(&su, &tu)?;

    let behaviors = |u: &Universe, a: &Arc<Alphabet>, table: &[Vec<RRun>]| -> Result<Vec<Vec<Behavior>>> {
        table.iter().map(|row| row.iter().map(|r| Ok(Behavior::new(u, [u.require(&to_trace(a, r)?)?]))).collect()).collect()
    };
    RobustInstance::new(
        format!("robust-p{}-c{}", cfg.program_size, cfg.context_size),
        relation,
        programs.iter().map(ToString::to_string).collect(),
        source_contexts.iter().map(ToString::to_string).collect(),
        target_contexts.iter().map(ToString::to_string).collect(),
        behaviors(&su, &sa, &src_runs)?,
        behaviors(&tu, &ta, &tgt_runs)?,
        Some(bt),
    )
}

/// For every program and target context, the back-translated context produces exactly the
/// filtered target run.
pub fn validate_back_translation(cfg: &RobustConfig) -> Result<CriterionVerdict> {
    let (programs, _, target_contexts) = enumerate_parts(cfg);
    let mut checked = 0u64;
    for p in &programs {
        for c in &target_contexts {
            checked += 1;
            let target = r_semantics(&link(c, p)?, cfg.call_bound);
            let cleaned = backtranslate(c, cfg.back_translation);
            let source = r_semantics(&link(&cleaned, p)?, cfg.call_bound);
            if source != target.filtered() {
                let cx = Counterexample::new(format!("back-translated context `{cleaned}` does not reproduce the filtered run"))
                    .program(0, &p.to_string())
                    .context(c.to_string());
                return Ok(CriterionVerdict::fail("back-translation", cx).stat("pairs", checked));
            }
        }
    }
    Ok(CriterionVerdict::pass("back-translation").stat("pairs", checked))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn whole(main: &str) -> Whole {
        link(&RPart::context([], RExpr::parse(main).unwrap()), &RPart::program([])).unwrap()
    }

    #[test]
    fn semantics_examples() {
        let r = r_semantics(&whole("(seq (out_L 1) 2)"), 8);
        assert_eq!(r, RRun { outputs: vec![ROut::Low(1)], result: Some(2) });
        let r = r_semantics(&whole("(seq (out_H 9) 0)"), 8);
        assert_eq!(r, RRun { outputs: vec![ROut::High(9)], result: Some(0) });
        assert_eq!(r_semantics(&whole("5"), 8).result, Some(5));
    }

    #[test]
    fn recursion_hits_bound() {
        let p = RPart::program([("f", RExpr::parse("(seq (out_L arg) (call f (+ arg 1)))").unwrap())]);
        let c = RPart::context([], RExpr::parse("(call f 0)").unwrap());
        let r = r_semantics(&link(&c, &p).unwrap(), 3);
        assert_eq!(r.result, None);
        assert_eq!(r.outputs, vec![ROut::Low(0), ROut::Low(1), ROut::Low(2)]);
    }

    #[test]
    fn linking_checks_names() {
        let p = RPart::program([("f", RExpr::Arg)]);
        let clash = RPart::context([("f", RExpr::Nat(0))], RExpr::Nat(1));
        assert!(link(&clash, &p).is_err());
        let unresolved = RPart::context([], RExpr::parse("(call g 1)").unwrap());
        assert!(link(&unresolved, &p).is_err());
        let ok = RPart::context([], RExpr::parse("(call f 3)").unwrap());
        assert_eq!(r_semantics(&link(&ok, &p).unwrap(), 8).result, Some(3));
    }

    #[test]
    fn parts_roundtrip() {
        for text in ["(program (fun f (+ arg 1)))", "(context (fun g (out_H arg)) (main (call g (if0 0 1 2))))"] {
            assert_eq!(RPart::parse(text).unwrap().to_string(), text);
        }
        assert!(RPart::parse("(context (fun f 1))").is_err());
        assert!(RPart::parse("(program (fun f 1) (fun f 2))").is_err());
    }

    #[test]
    fn back_translation_examples() {
        let c = RPart::context([], RExpr::parse("(seq (out_H 9) (out_L 1))").unwrap());
        assert_eq!(backtranslate(&c, BackTranslation::Clean).main.unwrap().to_string(), "(seq 9 (out_L 1))");
        let nested = RPart::context([], RExpr::parse("(out_H (out_L 2))").unwrap());
        assert_eq!(backtranslate(&nested, BackTranslation::Clean).main.unwrap().to_string(), "(out_L 2)");
        let plain = RPart::context([], RExpr::parse("(out_L 2)").unwrap());
        assert_eq!(backtranslate(&plain, BackTranslation::Clean), plain);
    }
}
