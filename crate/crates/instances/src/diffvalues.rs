//! Typed source expressions over booleans and naturals compiled to a natural-only target.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use trace_rel_core::criteria::{CompilationInstance, ProgramPair};
use trace_rel_core::galois::TraceRelation;
use trace_rel_core::property::Behavior;
use trace_rel_core::trace::{Alphabet, Event, Payload, Trace, TraceUniverse, Universe};
use trace_rel_core::{Error, Result};

use crate::sexpr::{arity, Sexp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Mul,
    Le,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Nat(u64),
    Bool(bool),
    Bin(Op, Arc<Expr>, Arc<Expr>),
    If(Arc<Expr>, Arc<Expr>, Arc<Expr>),
    InB,
    InN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    N,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type error at {:?}: {}", self.path, self.message)
    }
}

impl From<TypeError> for Error {
    fn from(e: TypeError) -> Self {
        Error::InvalidInstance(e.to_string())
    }
}

impl Expr {
    pub fn bin(op: Op, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Arc::new(a), Arc::new(b))
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::If(Arc::new(c), Arc::new(a), Arc::new(b))
    }

    pub fn nodes(&self) -> usize {
        match self {
            Expr::Bin(_, a, b) => 1 + a.nodes() + b.nodes(),
            Expr::If(c, a, b) => 1 + c.nodes() + a.nodes() + b.nodes(),
            _ => 1,
        }
    }

    /// Leaves have height 0.
    pub fn height(&self) -> usize {
        match self {
            Expr::Bin(_, a, b) => 1 + a.height().max(b.height()),
            Expr::If(c, a, b) => 1 + c.height().max(a.height()).max(b.height()),
            _ => 0,
        }
    }

    pub fn parse(text: &str) -> Result<Expr> {
        Self::from_sexp(&Sexp::parse(text)?)
    }

    fn from_sexp(s: &Sexp) -> Result<Expr> {
        let (head, args) = s.form()?;
        let sub = |i: usize| Self::from_sexp(&args[i]);
        match head {
            "true" | "false" if matches!(s, Sexp::Atom(_)) => Ok(Expr::Bool(head == "true")),
            "in_b" => arity(head, args, 0).map(|_| Expr::InB),
            "in_n" => arity(head, args, 0).map(|_| Expr::InN),
            "+" | "add" | "*" | "mul" | "le" | "<=" => {
                arity(head, args, 2)?;
                let op = match head {
                    "+" | "add" => Op::Add,
                    "*" | "mul" => Op::Mul,
                    _ => Op::Le,
                };
                Ok(Expr::bin(op, sub(0)?, sub(1)?))
            }
            "if" => {
                arity(head, args, 3)?;
                Ok(Expr::ite(sub(0)?, sub(1)?, sub(2)?))
            }
            n if matches!(s, Sexp::Atom(_)) => n.parse().map(Expr::Nat).map_err(|_| Error::Parse(format!("unknown atom `{n}`"))),
            other => Err(Error::Parse(format!("unknown form `{other}`"))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nat(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Bin(op, a, b) => {
                let name = match op {
                    Op::Add => "+",
                    Op::Mul => "*",
                    Op::Le => "le",
                };
                write!(f, "({name} {a} {b})")
            }
            Expr::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Expr::InB => f.write_str("(in_b)"),
            Expr::InN => f.write_str("(in_n)"),
        }
    }
}

pub fn typecheck(e: &Expr) -> std::result::Result<Ty, TypeError> {
    fn go(e: &Expr, path: &mut Vec<usize>) -> std::result::Result<Ty, TypeError> {
        let err = |path: &Vec<usize>, message: String| TypeError { path: path.clone(), message };
        let child = |i: usize, e: &Expr, path: &mut Vec<usize>| {
            path.push(i);
            let t = go(e, path);
            path.pop();
            t
        };
        match e {
            Expr::Nat(_) | Expr::InN => Ok(Ty::N),
            Expr::Bool(_) | Expr::InB => Ok(Ty::B),
            Expr::Bin(op, a, b) => {
                let (ta, tb) = (child(0, a, path)?, child(1, b, path)?);
                if ta != Ty::N || tb != Ty::N {
                    return Err(err(path, format!("operands of {op:?} must be naturals")));
                }
                Ok(if *op == Op::Le { Ty::B } else { Ty::N })
            }
            Expr::If(c, a, b) => {
                if child(0, c, path)? != Ty::B {
                    return Err(err(path, "condition must be a boolean".into()));
                }
                let (ta, tb) = (child(1, a, path)?, child(2, b, path)?);
                if ta != tb {
                    return Err(err(path, "branches have different types".into()));
                }
                Ok(ta)
            }
        }
    }
    go(e, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TExpr {
    Nat(u64),
    Add(Arc<TExpr>, Arc<TExpr>),
    Mul(Arc<TExpr>, Arc<TExpr>),
    /// `if a ≤ b then c else d`
    IfLe(Arc<TExpr>, Arc<TExpr>, Arc<TExpr>, Arc<TExpr>),
    InN,
}

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TExpr::Nat(n) => write!(f, "{n}"),
            TExpr::Add(a, b) => write!(f, "(+ {a} {b})"),
            TExpr::Mul(a, b) => write!(f, "(* {a} {b})"),
            TExpr::IfLe(a, b, c, d) => write!(f, "(ifle {a} {b} {c} {d})"),
            TExpr::InN => f.write_str("(in_n)"),
        }
    }
}

/// Compiler variants; everything but `Correct` is a deliberate mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Correct,
    /// Conditionals keep their branch order.
    NoBranchSwap,
}

pub fn compile(e: &Expr, variant: Variant) -> std::result::Result<TExpr, TypeError> {
    typecheck(e)?;
    Ok(compile_typed(e, variant))
}

fn compile_typed(e: &Expr, variant: Variant) -> TExpr {
    let c = |x: &Expr| Arc::new(compile_typed(x, variant));
    match e {
        Expr::Nat(n) => TExpr::Nat(*n),
        Expr::Bool(b) => TExpr::Nat(u64::from(*b)),
        Expr::InB | Expr::InN => TExpr::InN,
        Expr::Bin(Op::Add, a, b) => TExpr::Add(c(a), c(b)),
        Expr::Bin(Op::Mul, a, b) => TExpr::Mul(c(a), c(b)),
        Expr::Bin(Op::Le, a, b) => TExpr::IfLe(c(a), c(b), Arc::new(TExpr::Nat(1)), Arc::new(TExpr::Nat(0))),
        Expr::If(g, a, b) => match variant {
            Variant::Correct => TExpr::IfLe(c(g), Arc::new(TExpr::Nat(0)), c(b), c(a)),
            Variant::NoBranchSwap => TExpr::IfLe(c(g), Arc::new(TExpr::Nat(0)), c(a), c(b)),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SVal {
    Nat(u64),
    Bool(bool),
}

/// A source run: inputs read, then a value or `None` for the error result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SrcRun {
    pub inputs: Vec<SVal>,
    pub result: Option<SVal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TgtRun {
    pub inputs: Vec<u64>,
    pub result: u64,
}

type Partial<V> = Vec<(Vec<V>, Option<V>)>;

/// All runs of `e` with each input node resolved over `nats` (or both booleans).
pub fn src_runs(e: &Expr, nats: &[u64]) -> Vec<SrcRun> {
    fn go(e: &Expr, nats: &[u64]) -> Partial<SVal> {
        match e {
            Expr::Nat(n) => vec![(vec![], Some(SVal::Nat(*n)))],
            Expr::Bool(b) => vec![(vec![], Some(SVal::Bool(*b)))],
            Expr::InN => nats.iter().map(|&n| (vec![SVal::Nat(n)], Some(SVal::Nat(n)))).collect(),
            Expr::InB => [true, false].iter().map(|&b| (vec![SVal::Bool(b)], Some(SVal::Bool(b)))).collect(),
            Expr::Bin(op, a, b) => {
                let mut out = Vec::new();
                for (ia, ra) in go(a, nats) {
                    let Some(va) = ra else {
                        out.push((ia, None));
                        continue;
                    };
                    for (ib, rb) in go(b, nats) {
                        let inputs = [ia.as_slice(), &ib].concat();
                        let r = rb.and_then(|vb| match (op, va, vb) {
                            (Op::Add, SVal::Nat(x), SVal::Nat(y)) => Some(SVal::Nat(x + y)),
                            (Op::Mul, SVal::Nat(x), SVal::Nat(y)) => Some(SVal::Nat(x * y)),
                            (Op::Le, SVal::Nat(x), SVal::Nat(y)) => Some(SVal::Bool(x <= y)),
                            _ => None,
                        });
                        out.push((inputs, r));
                    }
                }
                out
            }
            Expr::If(c, a, b) => {
                let mut out = Vec::new();
                for (ic, rc) in go(c, nats) {
                    let branch = match rc {
                        Some(SVal::Bool(true)) => a,
                        Some(SVal::Bool(false)) => b,
                        _ => {
                            out.push((ic, None));
                            continue;
                        }
                    };
                    for (ib, rb) in go(branch, nats) {
                        out.push(([ic.as_slice(), &ib].concat(), rb));
                    }
                }
                out
            }
        }
    }
    go(e, nats).into_iter().map(|(inputs, result)| SrcRun { inputs, result }).collect()
}

pub fn tgt_runs(e: &TExpr, nats: &[u64]) -> Vec<TgtRun> {
    fn go(e: &TExpr, nats: &[u64]) -> Vec<(Vec<u64>, u64)> {
        let seq = |a: &TExpr, b: &TExpr, f: &dyn Fn(u64, u64) -> u64| {
            let mut out = Vec::new();
            for (ia, va) in go(a, nats) {
                for (ib, vb) in go(b, nats) {
                    out.push(([ia.as_slice(), &ib].concat(), f(va, vb)));
                }
            }
            out
        };
        match e {
            TExpr::Nat(n) => vec![(vec![], *n)],
            TExpr::InN => nats.iter().map(|&n| (vec![n], n)).collect(),
            TExpr::Add(a, b) => seq(a, b, &|x, y| x + y),
            TExpr::Mul(a, b) => seq(a, b, &|x, y| x * y),
            TExpr::IfLe(a, b, c, d) => {
                let mut out = Vec::new();
                for (ia, va) in go(a, nats) {
                    for (ib, vb) in go(b, nats) {
                        let branch = if va <= vb { c } else { d };
                        for (ic, vc) in go(branch, nats) {
                            out.push(([ia.as_slice(), &ib, &ic].concat(), vc));
                        }
                    }
                }
                out
            }
        }
    }
    go(e, nats).into_iter().map(|(inputs, result)| TgtRun { inputs, result }).collect()
}

/// `n ∼ n`, `true ∼ n` for `n > 0`, `false ∼ 0`.
pub fn value_related(s: SVal, n: u64) -> bool {
    match s {
        SVal::Nat(m) => m == n,
        SVal::Bool(b) => b == (n > 0),
    }
}

/// Inputs related pointwise and results related; the error result relates to nothing.
pub fn runs_related(s: &SrcRun, t: &TgtRun) -> bool {
    s.inputs.len() == t.inputs.len()
        && s.inputs.iter().zip(&t.inputs).all(|(&a, &b)| value_related(a, b))
        && s.result.is_some_and(|r| value_related(r, t.result))
}

fn related_sources(t: &TgtRun) -> Vec<SrcRun> {
    let options = |n: u64| [SVal::Nat(n), SVal::Bool(n > 0)];
    let mut partial: Vec<Vec<SVal>> = vec![vec![]];
    for &n in &t.inputs {
        partial = partial.into_iter().flat_map(|p| options(n).map(|v| [p.as_slice(), &[v]].concat())).collect();
    }
    partial
        .into_iter()
        .flat_map(|inputs| options(t.result).map(move |r| SrcRun { inputs: inputs.clone(), result: Some(r) }))
        .collect()
}

fn sval_payload(v: SVal) -> Payload {
    match v {
        SVal::Nat(n) => Payload::Nat(n),
        SVal::Bool(b) => Payload::Bool(b),
    }
}

impl SrcRun {
    pub fn events(&self) -> Vec<Event> {
        let mut out: Vec<Event> = self.inputs.iter().map(|&v| Event::regular("in").with_payload(sval_payload(v))).collect();
        let res = match self.result {
            Some(v) => sval_payload(v),
            None => Payload::tag("error"),
        };
        out.push(Event::terminal("res").with_payload(res));
        out
    }
}

impl TgtRun {
    pub fn events(&self) -> Vec<Event> {
        let mut out: Vec<Event> = self.inputs.iter().map(|&n| Event::regular("in").with_payload(Payload::Nat(n))).collect();
        out.push(Event::terminal("res").with_payload(Payload::Nat(self.result)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DvConfig {
    /// Maximal AST height; literals and inputs have height 0.
    pub depth: usize,
    pub max_nodes: usize,
    pub nats: Vec<u64>,
    pub variant: Variant,
}

impl Default for DvConfig {
    fn default() -> Self {
        DvConfig { depth: 3, max_nodes: 9, nats: vec![0, 1, 2], variant: Variant::Correct }
    }
}

/// All well-typed expressions within the bounds, ordered by node count, then type, then shape.
pub fn enumerate_programs(depth: usize, max_nodes: usize, nats: &[u64]) -> Vec<Expr> {
    // table[ty][h][n]: expressions of type ty, height ≤ h, exactly n nodes
    let mut table: Vec<Vec<Vec<Vec<Arc<Expr>>>>> = vec![vec![vec![Vec::new(); max_nodes + 1]; depth + 1]; 2];
    let leaves = |ty: usize| -> Vec<Arc<Expr>> {
        if ty == 0 {
            nats.iter().map(|&n| Expr::Nat(n)).chain([Expr::InN]).map(Arc::new).collect()
        } else {
            [Expr::Bool(true), Expr::Bool(false), Expr::InB].into_iter().map(Arc::new).collect()
        }
    };
    for h in 0..=depth {
        for ty in 0..2 {
            if max_nodes >= 1 {
                table[ty][h][1] = leaves(ty);
            }
        }
        if h == 0 {
            continue;
        }
        for n in 2..=max_nodes {
            for ty in 0..2 {
                let mut out = Vec::new();
                // binary forms: N op N
                let ops: &[Op] = if ty == 0 { &[Op::Add, Op::Mul] } else { &[Op::Le] };
                for &op in ops {
                    for na in 1..n - 1 {
                        let nb = n - 1 - na;
                        for a in &table[0][h - 1][na] {
                            for b in &table[0][h - 1][nb] {
                                out.push(Arc::new(Expr::Bin(op, a.clone(), b.clone())));
                            }
                        }
                    }
                }
                for nc in 1..n.saturating_sub(2) {
                    for na in 1..n - 1 - nc {
                        let nb = n - 1 - nc - na;
                        for c in &table[1][h - 1][nc] {
                            for a in &table[ty][h - 1][na] {
                                for b in &table[ty][h - 1][nb] {
                                    out.push(Arc::new(Expr::If(c.clone(), a.clone(), b.clone())));
                                }
                            }
                        }
                    }
                }
                table[ty][h][n] = out;
            }
        }
    }
    let mut all = Vec::new();
    for n in 1..=max_nodes {
        for ty in 0..2 {
            all.extend(table[ty][depth][n].iter().map(|e| (**e).clone()));
        }
    }
    all
}

/// Every well-typed program within the bounds, compiled, with both behaviors and the value relation.
pub fn dv_instance(cfg: &DvConfig) -> Result<CompilationInstance> {
    let programs = enumerate_programs(cfg.depth, cfg.max_nodes, &cfg.nats);
    let name = format!("diffvalues-d{}-n{}{}", cfg.depth, cfg.max_nodes, if cfg.variant == Variant::Correct { "" } else { "-mutant" });
    dv_instance_from(name, programs, cfg)
}

/// The instance over the given programs; `cfg` supplies the input domain and compiler variant.
pub fn dv_instance_from(name: String, programs: Vec<Expr>, cfg: &DvConfig) -> Result<CompilationInstance> {
    for e in &programs {
        typecheck(e)?;
    }
    let runs: Vec<(Vec<SrcRun>, TExpr, Vec<TgtRun>)> = programs
        .par_iter()
        .map(|e| {
            let te = compile(e, cfg.variant).expect("programs are well-typed");
            let t = tgt_runs(&te, &cfg.nats);
            (src_runs(e, &cfg.nats), te, t)
        })
        .collect();
    let src_set: BTreeSet<&SrcRun> = runs.iter().flat_map(|r| &r.0).collect();
    let tgt_set: BTreeSet<&TgtRun> = runs.iter().flat_map(|r| &r.2).collect();
    let su = src_universe(src_set.iter().copied(), &cfg.nats)?;
    let tu = tgt_universe(tgt_set.iter().copied(), &cfg.nats)?;
    let src_ids: HashMap<&SrcRun, usize> = src_set.iter().map(|&r| Ok((r, id_of(&su, &r.events())?))).collect::<Result<_>>()?;
    let tgt_ids: HashMap<&TgtRun, usize> = tgt_set.iter().map(|&r| Ok((r, id_of(&tu, &r.events())?))).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (&t, &tid) in &tgt_ids {
        for s in related_sources(t) {
            if let Some(&sid) = src_ids.get(&s) {
                pairs.push((sid, tid));
            }
        }
    }
    let relation = TraceRelation::from_id_pairs(&su, &tu, pairs)?;
    let pairs = programs
        .iter()
        .zip(&runs)
        .map(|(e, (s, te, t))| ProgramPair {
            id: e.to_string(),
            compiled: te.to_string(),
            source: Behavior::new(&su, s.iter().map(|r| src_ids[r])),
            target: Behavior::new(&tu, t.iter().map(|r| tgt_ids[r])),
        })
        .collect();
    CompilationInstance::new(name, relation, pairs)
}

fn id_of(u: &Universe, events: &[Event]) -> Result<usize> {
    u.id_of_events(events).ok_or_else(|| Error::InvalidInstance("run missing from its universe".into()))
}

fn nat_events(nats: impl IntoIterator<Item = u64>, label: &str, terminal: bool) -> Vec<Event> {
    nats.into_iter()
        .map(|n| if terminal { Event::terminal(label) } else { Event::regular(label) }.with_payload(Payload::Nat(n)))
        .collect()
}

fn src_universe<'a>(runs: impl Iterator<Item = &'a SrcRun> + Clone, nats: &[u64]) -> Result<Universe> {
    let results: BTreeSet<u64> = runs.clone().filter_map(|r| match r.result {
        Some(SVal::Nat(n)) => Some(n),
        _ => None,
    }).collect();
    let mut events = nat_events(nats.iter().copied(), "in", false);
    events.extend([true, false].map(|b| Event::regular("in").with_payload(Payload::Bool(b))));
    events.extend(nat_events(results, "res", true));
    events.extend([true, false].map(|b| Event::terminal("res").with_payload(Payload::Bool(b))));
    events.push(Event::terminal("res").with_payload(Payload::tag("error")));
    let alphabet = Alphabet::new("dv-src", events)?;
    let traces = runs.map(|r| Trace::new(alphabet.clone(), r.events())).collect::<Result<Vec<_>>>()?;
    TraceUniverse::from_explicit("dv-src", alphabet, traces)
}

fn tgt_universe<'a>(runs: impl Iterator<Item = &'a TgtRun> + Clone, nats: &[u64]) -> Result<Universe> {
    let results: BTreeSet<u64> = runs.clone().map(|r| r.result).collect();
    let mut events = nat_events(nats.iter().copied(), "in", false);
    events.extend(nat_events(results, "res", true));
    let alphabet = Alphabet::new("dv-tgt", events)?;
    let traces = runs.map(|r| Trace::new(alphabet.clone(), r.events())).collect::<Result<Vec<_>>>()?;
    TraceUniverse::from_explicit("dv-tgt", alphabet, traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn typing() {
        assert_eq!(typecheck(&p("true")), Ok(Ty::B));
        assert!(typecheck(&p("(+ 1 true)")).is_err());
        assert_eq!(typecheck(&p("(if (in_b) 1 2)")), Ok(Ty::N));
        let err = typecheck(&p("(if 1 2 3)")).unwrap_err();
        assert!(err.path.is_empty());
        let err = typecheck(&p("(+ 1 (if true 2 false))")).unwrap_err();
        assert_eq!(err.path, vec![1]);
    }

    #[test]
    fn compile_table() {
        assert_eq!(compile(&p("true"), Variant::Correct).unwrap(), TExpr::Nat(1));
        assert_eq!(compile(&p("(if (in_b) 1 2)"), Variant::Correct).unwrap().to_string(), "(ifle (in_n) 0 2 1)");
        assert_eq!(compile(&p("(le 1 2)"), Variant::Correct).unwrap().to_string(), "(ifle 1 2 1 0)");
        assert_eq!(compile(&p("(if (in_b) 1 2)"), Variant::NoBranchSwap).unwrap().to_string(), "(ifle (in_n) 0 1 2)");
    }

    #[test]
    fn semantics() {
        let runs = src_runs(&p("(in_b)"), &[0, 1, 2]);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0], SrcRun { inputs: vec![SVal::Bool(true)], result: Some(SVal::Bool(true)) });
        assert_eq!(tgt_runs(&TExpr::InN, &[0, 1, 2]).len(), 3);
        assert_eq!(src_runs(&p("(+ 1 2)"), &[0]), vec![SrcRun { inputs: vec![], result: Some(SVal::Nat(3)) }]);
        // untaken branches read nothing
        let runs = src_runs(&p("(if true 1 (in_n))"), &[0, 1]);
        assert_eq!(runs, vec![SrcRun { inputs: vec![], result: Some(SVal::Nat(1)) }]);
        // ill-typed programs reach the error result
        assert_eq!(src_runs(&p("(+ 1 true)"), &[0])[0].result, None);
    }

    #[test]
    fn relation_examples() {
        let s = |i: SVal, r: SVal| SrcRun { inputs: vec![i], result: Some(r) };
        let t = |i: u64, r: u64| TgtRun { inputs: vec![i], result: r };
        assert!(runs_related(&s(SVal::Bool(true), SVal::Bool(true)), &t(2, 2)));
        assert!(runs_related(&s(SVal::Bool(false), SVal::Bool(false)), &t(0, 0)));
        assert!(!runs_related(&s(SVal::Bool(true), SVal::Bool(true)), &t(0, 0)));
        assert!(!runs_related(&SrcRun { inputs: vec![], result: None }, &TgtRun { inputs: vec![], result: 0 }));
        let cands = related_sources(&t(2, 0));
        assert_eq!(cands.len(), 4);
        assert!(cands.iter().all(|c| runs_related(c, &t(2, 0))));
    }

    #[test]
    fn enumeration_bounds() {
        let progs = enumerate_programs(1, 9, &[0, 1]);
        assert!(progs.iter().all(|e| e.height() <= 1 && e.nodes() <= 9 && typecheck(e).is_ok()));
        // leaves: 0 1 in_n true false in_b
        assert_eq!(progs.iter().filter(|e| e.height() == 0).count(), 6);
        let unique: std::collections::HashSet<_> = progs.iter().collect();
        assert_eq!(unique.len(), progs.len());
    }

    #[test]
    fn parse_print_roundtrip() {
        for s in ["(if (le (in_n) 1) true false)", "(* 2 (+ (in_n) 0))"] {
            assert_eq!(p(s).to_string(), s);
        }
    }
}
