//! Check suites and demos, run as ordered jobs on a thread pool.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use trace_rel_core::ani::{
    ani_hyperproperty, check_compiling_ani, check_relaxed_ani, check_src_ani, derive_target_ani, ni_hyperproperty, timing_setting,
    undefined_output_setting, AniReport, Labeling, Time, TimingCompiler, UcoOperator,
};
use trace_rel_core::criteria::{
    check_cc_tilde, check_hc_tilde, check_hp_variants, check_safety_trinity, check_sc_tilde, check_schp, check_tp_sigma, check_tp_tau,
    check_trinity, CompilationInstance, ProgramPair, Strategy,
};
use trace_rel_core::galois::{check_adjunction, check_characteristic, existential_image, relation_of_connection, universal_image, Coverage, GaloisConnection, LawVerdict, PropertyMapping, TraceRelation};
use trace_rel_core::property::{satisfies, Behavior, Hyperproperty, TraceProperty};
use trace_rel_core::random::{random_instance, random_robust_instance};
use trace_rel_core::robust::{check_robust_safety_trinity, check_robust_trinity, check_rsc_tilde, check_rtc_tilde, RobustInstance, WitnessMode};
use trace_rel_core::trace::Universe;
use trace_rel_core::verdict::{Counterexample, CriterionVerdict};
use trace_rel_core::{Error, QuantConfig, Result as CoreResult};
use trace_rel_instances::diffvalues::{self as dv, DvConfig, Variant};
use trace_rel_instances::models::{
    fuel_compiler_instance, fuel_ub_relation, res_relation, res_safety_roundtrip, res_sigma_form, res_tau_form, sweep_closed_form, ub_relation,
    ub_sigma_form, ub_tau_form, union_relation, FuelConfig, ResModel, UbModel,
};
use trace_rel_instances::robust_lang::{robust_instance, validate_back_translation, RobustConfig};
use trace_rel_instances::sends::{self, check_gensend_lemma, gensend, sends_ani_setting, SendsConfig, Value};

use crate::fixture::{self, FixtureError, ProgramEntry};
use crate::report::{group, Report};
use crate::{CliError, Demo, InstanceKind, Options, Suite};

type Check = Box<dyn Fn() -> CoreResult<CriterionVerdict> + Send + Sync>;

/// A named check; the name is the criterion reported when the check does not apply.
pub struct Job {
    pub name: String,
    pub run: Check,
}

fn job(name: impl Into<String>, run: impl Fn() -> CoreResult<CriterionVerdict> + Send + Sync + 'static) -> Job {
    Job { name: name.into(), run: Box::new(run) }
}

/// Largest side swept exhaustively by the closed-form comparisons.
const SWEEP_BITS: u32 = 32;

pub fn quant(opts: &Options) -> QuantConfig {
    QuantConfig::default().with_seed(opts.seed)
}

/// Runs the jobs on `threads` workers; results keep job order.
pub fn run_jobs(jobs: Vec<Job>, threads: usize) -> Result<Vec<(CriterionVerdict, Duration)>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| CliError::Failed(e.to_string()))?;
    let results: Vec<(CoreResult<CriterionVerdict>, Duration)> = pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let start = Instant::now();
                let v = (j.run)();
                (v, start.elapsed())
            })
            .collect()
    });
    let mut out = Vec::with_capacity(results.len());
    for (j, (v, t)) in jobs.iter().zip(results) {
        let v = match v {
            Ok(v) => v,
            Err(Error::NotPrefixClosed(u)) => CriterionVerdict::skipped(j.name.clone(), format!("universe `{u}` is not prefix-closed")),
            Err(e) => return Err(e.into()),
        };
        out.push((v, t));
    }
    Ok(out)
}

fn assemble(command: String, opts: &Options, mut config: std::collections::BTreeMap<String, serde_json::Value>, results: Vec<(CriterionVerdict, Duration)>) -> Report {
    config.extend(opts.echo());
    let (verdicts, times): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Report { command, config, seed: opts.seed, verdicts, timings: opts.timings.then_some(times) }
}

fn renamed(mut v: CriterionVerdict, name: impl Into<String>) -> CriterionVerdict {
    v.criterion = name.into();
    v
}

fn sigma_names(n: u32) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

fn require_cap(what: &str, needed: usize, cap: u64) -> Result<(), CliError> {
    if needed as u64 > cap {
        return Err(trace_rel_core::error::cap_exceeded(what, needed, cap).into());
    }
    Ok(())
}

fn fixture_error(path: &Path, location: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Fixture(FixtureError { path: path.to_path_buf(), location: location.into(), message: message.to_string() })
}

fn source_programs(path: &Path, language: &str) -> Result<Vec<String>, CliError> {
    let set = fixture::load_programs(path)?;
    if let Some(l) = &set.language {
        if l != language {
            return Err(fixture_error(path, "language", format!("expected `{language}`, found `{l}`")));
        }
    }
    set.programs
        .into_iter()
        .enumerate()
        .map(|(i, p)| match p {
            ProgramEntry::Source(s) => Ok(s),
            ProgramEntry::Behaviors(_) => Err(fixture_error(path, format!("programs[{i}]"), "expected source text for this instance")),
        })
        .collect()
}

fn dv_instance(opts: &Options, variant: Variant) -> Result<CompilationInstance, CliError> {
    let cfg = DvConfig { depth: opts.depth.unwrap_or(3) as usize, variant, ..DvConfig::default() };
    let Some(path) = &opts.programs else {
        return Ok(dv::dv_instance(&cfg)?);
    };
    let mut exprs = Vec::new();
    for (i, text) in source_programs(path, "diffvalues")?.iter().enumerate() {
        let e = dv::Expr::parse(text).map_err(|e| fixture_error(path, format!("programs[{i}]"), e))?;
        dv::typecheck(&e).map_err(|e| fixture_error(path, format!("programs[{i}]"), e))?;
        exprs.push(e);
    }
    let name = if variant == Variant::Correct { "diffvalues-fixture" } else { "diffvalues-fixture-mutant" };
    Ok(dv::dv_instance_from(name.into(), exprs, &cfg)?)
}

fn sends_instance(opts: &Options) -> Result<CompilationInstance, CliError> {
    let Some(path) = &opts.programs else {
        return Ok(sends::sends_instance(&SendsConfig { max_size: opts.depth.unwrap_or(4) as usize, ..SendsConfig::default() })?);
    };
    let mut cmds = Vec::new();
    for (i, text) in source_programs(path, "sends")?.iter().enumerate() {
        let c = sends::Cmd::parse(text).map_err(|e| fixture_error(path, format!("programs[{i}]"), e))?;
        if !sends::well_typed_source(&c) {
            return Err(fixture_error(path, format!("programs[{i}]"), format!("command `{c}` is not well-typed")));
        }
        cmds.push(Arc::new(c));
    }
    Ok(sends::sends_instance_from("sends-fixture".into(), cmds)?)
}

fn fuel_config(opts: &Options) -> FuelConfig {
    FuelConfig { fuel: opts.fuel.unwrap_or(3), max_steps: opts.max_trace_len.unwrap_or(5) as usize, ..FuelConfig::default() }
}

fn robust_config(opts: &Options) -> RobustConfig {
    RobustConfig {
        program_size: opts.depth.unwrap_or(3) as usize,
        context_size: opts.context_size.unwrap_or(3) as usize,
        ..RobustConfig::default()
    }
}

fn no_programs_fixture(opts: &Options, kind: &str) -> Result<(), CliError> {
    match &opts.programs {
        Some(p) => Err(CliError::Usage(format!("--programs {} is not supported by the {kind} instance", p.display()))),
        None => Ok(()),
    }
}

fn robust_for(kind: InstanceKind, opts: &Options) -> Result<RobustInstance, CliError> {
    no_programs_fixture(opts, "robust")?;
    match kind {
        InstanceKind::Robust => Ok(robust_instance(&robust_config(opts))?),
        InstanceKind::Random => Ok(random_robust_instance(opts.seed, opts.size.unwrap_or(4) as usize, 3)?),
        other => Err(CliError::Usage(format!("the robust suite needs --instance robust or random, not {other:?}"))),
    }
}

fn compilation_instance(kind: InstanceKind, opts: &Options) -> Result<CompilationInstance, CliError> {
    match kind {
        InstanceKind::Dv => dv_instance(opts, Variant::Correct),
        InstanceKind::DvMutant => dv_instance(opts, Variant::NoBranchSwap),
        InstanceKind::Sends => sends_instance(opts),
        InstanceKind::Fuel => {
            no_programs_fixture(opts, "fuel")?;
            Ok(fuel_compiler_instance(&fuel_config(opts))?)
        }
        InstanceKind::Random => {
            no_programs_fixture(opts, "random")?;
            Ok(random_instance(opts.seed, opts.size.unwrap_or(4) as usize)?)
        }
        InstanceKind::Robust => Ok(robust_for(kind, opts)?.union_instance()?),
    }
}

fn check_sizes(su: &Universe, tu: &Universe, programs: usize, cap: u64) -> Result<(), CliError> {
    require_cap(&format!("universe `{}`", su.name()), su.len(), cap)?;
    require_cap(&format!("universe `{}`", tu.name()), tu.len(), cap)?;
    require_cap("programs", programs, cap)
}

fn replacement_relation(opts: &Options, su: &Universe, tu: &Universe) -> Result<Option<TraceRelation>, CliError> {
    let Some(path) = &opts.relation else { return Ok(None) };
    let r = fixture::load_relation(path, &[su.clone(), tu.clone()])?;
    if !r.source().same_as(su) || !r.target().same_as(tu) {
        return Err(fixture_error(path, "source_universe", "relation must go from the instance source to the instance target"));
    }
    Ok(Some(r))
}

fn save_relation(opts: &Options, r: &TraceRelation) -> Result<(), CliError> {
    if let Some(p) = &opts.save_relation {
        fixture::save_json(p, &fixture::relation_file(r)).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

/// Universes, relation and optional behavior-only programs, all from fixtures.
fn fixture_instance(opts: &Options) -> Result<CompilationInstance, CliError> {
    let mut universes = Vec::new();
    for p in &opts.universe {
        universes.push(fixture::load_universe(p, opts.cap.min(usize::MAX as u64) as usize)??);
    }
    let Some(rpath) = &opts.relation else {
        return Err(CliError::Usage("checking fixtures needs --relation".into()));
    };
    let r = fixture::load_relation(rpath, &universes)?;
    let mut programs = Vec::new();
    if let Some(path) = &opts.programs {
        let set = fixture::load_programs(path)?;
        for (i, p) in set.programs.into_iter().enumerate() {
            let ProgramEntry::Behaviors(b) = p else {
                return Err(fixture_error(path, format!("programs[{i}]"), "expected {id, source, target} behaviors"));
            };
            let side = |traces: &[Vec<String>], u: &Universe, field: &str| -> Result<Behavior, CliError> {
                let f = fixture::PropertyFile { universe: u.name().to_string(), traces: traces.to_vec() };
                let p = fixture::resolve_property(path, &f, std::slice::from_ref(u)).map_err(|e| fixture_error(path, format!("programs[{i}].{field}: {}", e.location), e.message))?;
                if p.is_empty() {
                    return Err(fixture_error(path, format!("programs[{i}].{field}"), "behavior is empty"));
                }
                Ok(Behavior::from_property(&p))
            };
            let source = side(&b.source, r.source(), "source")?;
            let target = side(&b.target, r.target(), "target")?;
            programs.push(ProgramPair { compiled: format!("{}↓", b.id), id: b.id, source, target });
        }
    }
    Ok(CompilationInstance::new("fixture", r, programs)?)
}

fn law_verdict(l: LawVerdict) -> CriterionVerdict {
    let name = format!("galois {}", l.law);
    let v = match &l.counterexample {
        None => CriterionVerdict::pass(name),
        Some(w) => CriterionVerdict::fail(name, Counterexample::new(w.to_string())),
    };
    match l.coverage {
        Coverage::Exhaustive { cases } => v.stat("cases", cases),
        Coverage::Sampled { samples, seed } => v.stat("samples", samples).seeded(seed),
    }
}

fn galois_jobs(r: Arc<TraceRelation>, q: QuantConfig) -> Vec<Job> {
    let r1 = r.clone();
    let r2 = r.clone();
    vec![
        job("galois adjunction", move || Ok(law_verdict(check_adjunction(&GaloisConnection::induced(&r1), &q)?))),
        job("galois characteristic laws", move || {
            let laws = check_characteristic(&GaloisConnection::induced(&r2), &q)?;
            Ok(group("galois characteristic laws", laws.into_iter().map(law_verdict).collect()))
        }),
        job("relation recovered from images", move || {
            let back = relation_of_connection(&GaloisConnection::induced(&r))?;
            let cx = (back != *r).then(|| Counterexample::new(format!("recovered {} pairs, expected {}", back.len(), r.len())));
            Ok(CriterionVerdict::from_outcome("relation recovered from images", cx).stat("pairs", r.len() as u64))
        }),
    ]
}

/// `beh_S ⊆ π ⇒ beh_T ⊆ τ̃(π)` for a source property, `beh_S ⊆ σ̃(π) ⇒ beh_T ⊆ π` for a target one.
fn property_preserved(ci: &CompilationInstance, name: &str, p: &TraceProperty) -> CoreResult<CriterionVerdict> {
    let r = ci.relation();
    let from_source = p.universe().same_as(r.source());
    let (criterion, src_prop, tgt_prop) = if from_source {
        (format!("TP^tau~ for {name}"), p.clone(), existential_image(r, p)?)
    } else {
        (format!("TP^sigma~ for {name}"), universal_image(r, p)?, p.clone())
    };
    let mut holding = 0u64;
    for (i, prog) in ci.programs().iter().enumerate() {
        if !satisfies(&prog.source, &src_prop)? {
            continue;
        }
        holding += 1;
        if let Some(&t) = prog.target.ids().iter().find(|&&t| !tgt_prop.contains_id(t)) {
            let cx = Counterexample::new("source satisfies the property but the target does not satisfy its image")
                .program(i, &prog.id)
                .trace(t, r.target().trace(t));
            return Ok(CriterionVerdict::fail(criterion, cx).stat("programs_satisfying", holding));
        }
    }
    Ok(CriterionVerdict::pass(criterion).stat("programs_satisfying", holding))
}

fn suite_jobs(suite: Suite, ci: Arc<CompilationInstance>, q: QuantConfig, props: Vec<(String, TraceProperty)>) -> Vec<Job> {
    let c = move || ci.clone();
    match suite {
        Suite::Cc => {
            let ci = c();
            vec![job("CC~", move || Ok(check_cc_tilde(&ci)))]
        }
        Suite::Tp => {
            let (a, b) = (c(), c());
            let mut jobs = vec![
                job("TP^tau~", move || check_tp_tau(&a, &PropertyMapping::existential(a.relation()), &q, Strategy::Auto)),
                job("TP^sigma~", move || check_tp_sigma(&b, &PropertyMapping::universal(b.relation()), &q, Strategy::Auto)),
            ];
            for (name, p) in props {
                let ci = c();
                jobs.push(job(format!("TP for {name}"), move || property_preserved(&ci, &name, &p)));
            }
            jobs
        }
        Suite::Trinity => {
            let ci = c();
            vec![job("trinity", move || check_trinity(&ci, &q))]
        }
        Suite::Schp => {
            let ci = c();
            vec![job("SCHP", move || check_schp(&ci, &q))]
        }
        Suite::Hc => {
            let (a, b) = (c(), c());
            vec![
                job("HC~", move || check_hc_tilde(&a)),
                job("HP variants", move || Ok(group("HP variants", check_hp_variants(&b, &q)?))),
            ]
        }
        Suite::Safety => {
            let (a, b) = (c(), c());
            vec![job("SC~", move || check_sc_tilde(&a)), job("safety trinity", move || check_safety_trinity(&b, &q))]
        }
        Suite::Robust => unreachable!("robust suite runs on robust instances"),
    }
}

fn robust_jobs(ri: Arc<RobustInstance>, q: QuantConfig, back_translation: Option<RobustConfig>) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (mode, tag) in [(WitnessMode::Constructive, "constructive"), (WitnessMode::Search, "search")] {
        let (a, b) = (ri.clone(), ri.clone());
        jobs.push(job(format!("RTC~ ({tag})"), move || Ok(renamed(check_rtc_tilde(&a, mode)?, format!("RTC~ ({tag})")))));
        jobs.push(job(format!("RSC~ ({tag})"), move || Ok(renamed(check_rsc_tilde(&b, mode)?, format!("RSC~ ({tag})")))));
    }
    let (a, b) = (ri.clone(), ri);
    jobs.push(job("robust trinity", move || check_robust_trinity(&a, &q, WitnessMode::Search)));
    jobs.push(job("robust safety trinity", move || check_robust_safety_trinity(&b, &q, WitnessMode::Search)));
    if let Some(cfg) = back_translation {
        jobs.push(job("back-translation", move || validate_back_translation(&cfg)));
    }
    jobs
}

fn instance_echo(name: &str, su: &Universe, tu: &Universe, programs: usize) -> std::collections::BTreeMap<String, serde_json::Value> {
    let mut m = std::collections::BTreeMap::new();
    m.insert("instance_name".into(), name.into());
    m.insert("source_traces".into(), su.len().into());
    m.insert("target_traces".into(), tu.len().into());
    m.insert("program_count".into(), programs.into());
    m
}

pub fn check(suite: Suite, opts: &Options) -> Result<Report, CliError> {
    let q = quant(opts);
    let from_fixtures = opts.instance.is_none() && (!opts.universe.is_empty() || opts.relation.is_some());
    let command = format!("check {}", crate::name_of(suite));
    if suite == Suite::Robust {
        if from_fixtures {
            return Err(CliError::Usage("the robust suite needs an instance".into()));
        }
        let kind = opts.instance.unwrap_or(InstanceKind::Robust);
        let mut ri = robust_for(kind, opts)?;
        let (su, tu) = (ri.relation().source().clone(), ri.relation().target().clone());
        check_sizes(&su, &tu, ri.programs().len() * ri.target_contexts().len(), opts.cap)?;
        if let Some(r) = replacement_relation(opts, &su, &tu)? {
            ri = ri.with_relation(r)?;
        }
        save_relation(opts, ri.relation())?;
        let echo = instance_echo(ri.name(), &su, &tu, ri.programs().len());
        let bt = (kind == InstanceKind::Robust && opts.relation.is_none()).then(|| robust_config(opts));
        let results = run_jobs(robust_jobs(Arc::new(ri), q, bt), opts.jobs as usize)?;
        return Ok(assemble(command, opts, echo, results));
    }
    let ci = if from_fixtures {
        fixture_instance(opts)?
    } else {
        if !opts.universe.is_empty() {
            return Err(CliError::Usage("--universe describes fixture relations and cannot be combined with --instance".into()));
        }
        let ci = compilation_instance(opts.instance.unwrap_or(InstanceKind::Dv), opts)?;
        match replacement_relation(opts, ci.source_universe(), ci.target_universe())? {
            Some(r) => ci.with_relation(r)?,
            None => ci,
        }
    };
    let (su, tu) = (ci.source_universe().clone(), ci.target_universe().clone());
    check_sizes(&su, &tu, ci.programs().len(), opts.cap)?;
    save_relation(opts, ci.relation())?;
    let mut props = Vec::new();
    for p in &opts.property {
        props.push((p.display().to_string(), fixture::load_property(p, &[su.clone(), tu.clone()])?));
    }
    if !props.is_empty() && suite != Suite::Tp {
        return Err(CliError::Usage("--property is only used by the tp suite".into()));
    }
    let echo = instance_echo(ci.name(), &su, &tu, ci.programs().len());
    let ci = Arc::new(ci);
    let mut jobs = Vec::new();
    if from_fixtures {
        jobs.extend(galois_jobs(Arc::new(ci.relation().clone()), q));
    }
    jobs.extend(suite_jobs(suite, ci, q, props));
    let results = run_jobs(jobs, opts.jobs as usize)?;
    Ok(assemble(command, opts, echo, results))
}

fn diffvalues_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    let ci = Arc::new(dv_instance(opts, Variant::Correct)?);
    let mutant = Arc::new(dv_instance(opts, Variant::NoBranchSwap)?);
    check_sizes(ci.source_universe(), ci.target_universe(), ci.programs().len(), opts.cap)?;
    let a = ci.clone();
    Ok(vec![
        job("CC~", move || Ok(check_cc_tilde(&a))),
        job("mutant without branch swap is rejected", move || {
            let v = check_cc_tilde(&mutant);
            let name = "mutant without branch swap is rejected";
            let mut out = if v.failed() && v.counterexample.as_ref().is_some_and(|c| c.program.is_some()) {
                CriterionVerdict::pass(name)
            } else {
                CriterionVerdict::fail(name, Counterexample::new("CC~ holds for the mutant"))
            };
            out.components = vec![renamed(v, format!("CC~ [{}]", mutant.name()))];
            Ok(out)
        }),
    ])
}

fn sends_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    let ci = Arc::new(sends_instance(opts)?);
    check_sizes(ci.source_universe(), ci.target_universe(), ci.programs().len(), opts.cap)?;
    let nats: Vec<u64> = vec![0, 1, 2];
    Ok(vec![
        job("CC~", move || Ok(check_cc_tilde(&ci))),
        job("gensend lemma", move || Ok(check_gensend_lemma(3, &nats, gensend))),
    ])
}

fn model_bounds(opts: &Options) -> (Vec<String>, usize, usize) {
    (sigma_names(opts.sigma.unwrap_or(2)), opts.max_trace_len.unwrap_or(3) as usize, opts.cap.min(usize::MAX as u64) as usize)
}

fn ub_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    let (sigma, len, cap) = model_bounds(opts);
    let sigma: Vec<&str> = sigma.iter().map(String::as_str).collect();
    let m = UbModel::new(&sigma, &[], len, cap)?;
    let r = Arc::new(ub_relation(&m));
    let (tau, sig) = (ub_tau_form(&m), ub_sigma_form(&m));
    let r2 = r.clone();
    Ok(vec![
        job(format!("{} = generic image", tau.name()), move || sweep_closed_form(&tau, &r, SWEEP_BITS)),
        job(format!("{} = generic image", sig.name()), move || sweep_closed_form(&sig, &r2, SWEEP_BITS)),
    ])
}

/// Model sizes whose safety properties can be listed exhaustively.
pub const ROUNDTRIP_MODELS: [(u32, usize); 3] = [(1, 3), (2, 1), (1, 2)];

fn resource_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    let (sigma, len, cap) = model_bounds(opts);
    let names: Vec<&str> = sigma.iter().map(String::as_str).collect();
    let m = ResModel::new(&names, len, 0, cap)?;
    let r = Arc::new(res_relation(&m));
    let (tau, sig) = (res_tau_form(&m), res_sigma_form(&m));
    let r2 = r.clone();
    let q = quant(opts);
    let mut jobs = vec![
        job(format!("{} = generic image", tau.name()), move || sweep_closed_form(&tau, &r, SWEEP_BITS)),
        job(format!("{} = generic image", sig.name()), move || sweep_closed_form(&sig, &r2, SWEEP_BITS)),
    ];
    for (n, len) in ROUNDTRIP_MODELS {
        let names = sigma_names(n);
        let name = format!("resource safety round-trip (|Σ|={n}, max_len {len})");
        jobs.push(job(name.clone(), move || {
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            Ok(renamed(res_safety_roundtrip(&ResModel::new(&names, len, 0, cap)?, &q)?, name.clone()))
        }));
    }
    let ci = Arc::new(fuel_compiler_instance(&fuel_config(opts))?);
    let tag = ci.name().to_string();
    let (a, b) = (ci.clone(), ci);
    jobs.push(job(format!("CC~ [{tag}]"), {
        let tag = tag.clone();
        move || Ok(renamed(check_cc_tilde(&a), format!("CC~ [{tag}]")))
    }));
    jobs.push(job(format!("SC~ [{tag}]"), {
        let tag = tag.clone();
        let a = b.clone();
        move || Ok(renamed(check_sc_tilde(&a)?, format!("SC~ [{tag}]")))
    }));
    jobs.push(job(format!("CC~ under the resource relation implies CC~ under its union with undefined behavior [{tag}]"), move || {
        let union = union_relation(b.relation(), &fuel_ub_relation(&b))?;
        let premise = check_cc_tilde(&b);
        let conclusion = renamed(check_cc_tilde(&b.with_relation(union)?), "CC~ under the union");
        Ok(CriterionVerdict::implication(format!("CC~ under the resource relation implies CC~ under its union with undefined behavior [{tag}]"), &premise, &conclusion))
    }));
    Ok(jobs)
}

fn robust_demo_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    no_programs_fixture(opts, "robust")?;
    let cfg = robust_config(opts);
    let ri = robust_instance(&cfg)?;
    check_sizes(ri.relation().source(), ri.relation().target(), ri.programs().len() * ri.target_contexts().len(), opts.cap)?;
    let ri = Arc::new(ri);
    let mut jobs = Vec::new();
    for (mode, tag) in [(WitnessMode::Constructive, "constructive"), (WitnessMode::Search, "search")] {
        let (a, b) = (ri.clone(), ri.clone());
        jobs.push(job(format!("RTC~ ({tag})"), move || Ok(renamed(check_rtc_tilde(&a, mode)?, format!("RTC~ ({tag})")))));
        jobs.push(job(format!("RSC~ ({tag})"), move || Ok(renamed(check_rsc_tilde(&b, mode)?, format!("RSC~ ({tag})")))));
    }
    jobs.push(job("back-translation", move || validate_back_translation(&cfg)));
    Ok(jobs)
}

pub const ALL_TIMES: [Time; 4] = [Time::Steps(0), Time::Steps(1), Time::Steps(2), Time::Diverges];

/// `Cl⊆(τ̃(NI_S)) = ANI(φ#, ρ#)` on the timing model.
pub fn timing_equality(q: &QuantConfig) -> CoreResult<CriterionVerdict> {
    let name = "timing: Cl(tau~(NI_S)) = ANI(phi#, rho#)";
    let s = timing_setting(&[0, 1], &[0, 1], &ALL_TIMES, &[])?;
    let labeling = Labeling::new(["hi"]);
    let phi_s = UcoOperator::low_equivalence(s.source.inputs(), &labeling)?;
    let rho_s = UcoOperator::low_equivalence(s.source.outputs(), &labeling)?;
    let (phi, rho) = derive_target_ani(&s.split, &phi_s, &rho_s)?;
    let ni_s = ni_hyperproperty(&s.source, &labeling, q)?;
    let images = ni_s.members().map(|p| existential_image(s.instance.relation(), p)).collect::<CoreResult<Vec<_>>>()?;
    let lifted = Hyperproperty::new(s.target.full(), images)?.subset_closure(q.cap_bits)?;
    let derived = ani_hyperproperty(&s.target, &phi, &rho, q)?;
    let only = |a: &Hyperproperty, b: &Hyperproperty| a.members().find(|p| !b.contains(p)).cloned();
    let cx = match (only(&lifted, &derived), only(&derived, &lifted)) {
        (Some(p), _) => Some(Counterexample::new("in the lifted source hyperproperty only").property(p.labels())),
        (None, Some(p)) => Some(Counterexample::new("in the derived target hyperproperty only").property(p.labels())),
        (None, None) => None,
    };
    Ok(CriterionVerdict::from_outcome(name, cx)
        .stat("source_traces", s.source.full().len() as u64)
        .stat("target_traces", s.target.full().len() as u64)
        .stat("members", derived.len() as u64))
}

/// Membership of small sets of timed traces in target NI, with `s1`, `s2` low-equivalent.
pub fn timing_memberships(q: &QuantConfig) -> CoreResult<Vec<CriterionVerdict>> {
    let s = timing_setting(&[0, 1], &[0], &[Time::Steps(42), Time::Steps(43)], &[])?;
    let labeling = Labeling::new(["hi"]);
    let ni_s = ni_hyperproperty(&s.source, &labeling, q)?;
    let ni_t = ni_hyperproperty(&s.target, &labeling, q)?;
    let images = ni_s.members().map(|p| existential_image(s.instance.relation(), p)).collect::<CoreResult<Vec<_>>>()?;
    let lifted = Hyperproperty::new(s.target.full(), images)?;
    let src = |ts: &[&[&str]]| -> CoreResult<TraceProperty> {
        Ok(TraceProperty::from_ids(s.source.full(), ts.iter().map(|t| s.source.full().parse_trace(t)).collect::<CoreResult<Vec<_>>>()?))
    };
    let tgt = |ts: &[&[&str]]| -> CoreResult<TraceProperty> {
        Ok(TraceProperty::from_ids(s.target.full(), ts.iter().map(|t| s.target.full().parse_trace(t)).collect::<CoreResult<Vec<_>>>()?))
    };
    let (s1, s2): (&[&str], &[&str]) = (&["hi:0", "lo:0"], &["hi:1", "lo:0"]);
    let s1_42: &[&str] = &["hi:0", "lo:0", "time:42"];
    let s2_42: &[&str] = &["hi:1", "lo:0", "time:42"];
    let s1_43: &[&str] = &["hi:0", "lo:0", "time:43"];
    let s2_43: &[&str] = &["hi:1", "lo:0", "time:43"];
    let four = tgt(&[s1_42, s2_42, s1_43, s2_43])?;
    let rows = [
        ("{s1, s2} ∈ NI_S", ni_s.contains(&src(&[s1, s2])?), true),
        ("{(s1,42), (s1,42)} ∈ NI_T", ni_t.contains(&tgt(&[s1_42, s1_42])?), true),
        ("{(s1,42), (s2,43)} ∉ NI_T", ni_t.contains(&tgt(&[s1_42, s2_43])?), false),
        ("{(s1,42), (s2,42), (s1,43), (s2,43)} ∉ NI_T", ni_t.contains(&four), false),
        ("{(s1,42), (s2,42), (s1,43), (s2,43)} ∈ Cl(tau~(NI_S))", lifted.closure_contains(&four), true),
    ];
    Ok(rows
        .into_iter()
        .map(|(name, got, want)| {
            let cx = (got != want).then(|| Counterexample::new(format!("membership is {got}")));
            CriterionVerdict::from_outcome(name, cx)
        })
        .collect())
}

fn ani_group(name: &str, report: AniReport) -> CriterionVerdict {
    group(name, report.verdicts)
}

fn ani_jobs(opts: &Options) -> Result<Vec<Job>, CliError> {
    let q = quant(opts);
    Ok(vec![
        job("timing: Cl(tau~(NI_S)) = ANI(phi#, rho#)", move || timing_equality(&q)),
        job("timing membership examples", move || Ok(group("timing membership examples", timing_memberships(&q)?))),
        job("compiling ANI on timing compilers", move || {
            let compilers = [TimingCompiler::Constant, TimingCompiler::SecretDependent, TimingCompiler::AnyTime];
            let s = timing_setting(&[0, 1], &[0, 1], &ALL_TIMES, &compilers)?;
            let labeling = Labeling::new(["hi"]);
            let phi_s = UcoOperator::low_equivalence(s.source.inputs(), &labeling)?;
            let rho_s = UcoOperator::low_equivalence(s.source.outputs(), &labeling)?;
            Ok(ani_group("compiling ANI on timing compilers", check_compiling_ani(&s, &phi_s, &rho_s, &q)?))
        }),
        job("relaxed ANI with undefined outputs", move || {
            let s = undefined_output_setting(&[0, 1], &[0, 1])?;
            let labeling = Labeling::new(["hi"]);
            let phi_s = UcoOperator::low_equivalence(s.source.inputs(), &labeling)?;
            let rho_s = UcoOperator::low_equivalence(s.source.outputs(), &labeling)?;
            let top = UcoOperator::top(s.target.outputs())?;
            Ok(ani_group("relaxed ANI with undefined outputs", check_relaxed_ani(&s, &phi_s, &rho_s, &top)?))
        }),
        job("target ANI from source obligations on sends", move || {
            let payloads = ["<<0,0>,1>", "<0,<0,1>>", "<0,1>", "<1,0>"]
                .iter()
                .map(|t| Value::parse(t))
                .collect::<CoreResult<Vec<_>>>()?;
            let s = sends_ani_setting(&[0, 1], &payloads)?;
            let phi_t = UcoOperator::top(s.target.inputs())?;
            let rho_t = UcoOperator::identity(s.target.outputs())?;
            Ok(ani_group("target ANI from source obligations on sends", check_src_ani(&s, &phi_t, &rho_t)?))
        }),
    ])
}

pub fn demo_jobs(demo: Demo, opts: &Options) -> Result<Vec<Job>, CliError> {
    match demo {
        Demo::Diffvalues => diffvalues_jobs(opts),
        Demo::Sends => sends_jobs(opts),
        Demo::Ub => ub_jobs(opts),
        Demo::Resource => resource_jobs(opts),
        Demo::Robust => robust_demo_jobs(opts),
        Demo::Ani => ani_jobs(opts),
    }
}

pub fn demo(demo: Demo, opts: &Options) -> Result<Report, CliError> {
    let results = run_jobs(demo_jobs(demo, opts)?, opts.jobs as usize)?;
    Ok(assemble(format!("demo {}", crate::name_of(demo)), opts, Default::default(), results))
}

pub fn report_all(opts: &Options) -> Result<Report, CliError> {
    let mut jobs = Vec::new();
    for d in Demo::ALL {
        let tag = crate::name_of(d);
        for j in demo_jobs(d, opts)? {
            let name = format!("{tag}: {}", j.name);
            let run = j.run;
            let shown = name.clone();
            jobs.push(job(name, move || Ok(renamed(run()?, shown.clone()))));
        }
    }
    let results = run_jobs(jobs, opts.jobs as usize)?;
    Ok(assemble("report".into(), opts, Default::default(), results))
}
