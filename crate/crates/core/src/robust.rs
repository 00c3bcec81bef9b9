//! Criteria that quantify over adversarial linking contexts.

use crate::config::QuantConfig;
use crate::criteria::{self, CompilationInstance, ProgramPair, Strategy};
use crate::error::{Error, Result};
use crate::galois::{existential_image, PropertyMapping, TraceRelation};
use crate::property::{Behavior, TraceProperty};
use crate::verdict::{Counterexample, CriterionVerdict};

/// Partial programs, finite context sets on both sides, and the behavior of every linked pair.
#[derive(Debug, Clone)]
pub struct RobustInstance {
    name: String,
    relation: TraceRelation,
    programs: Vec<String>,
    source_contexts: Vec<String>,
    target_contexts: Vec<String>,
    source_runs: Vec<Vec<Behavior>>,
    target_runs: Vec<Vec<Behavior>>,
    back_translation: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessMode {
    /// Scan every source context.
    Search,
    /// Use the instance's back-translation of the target context.
    Constructive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl RobustInstance {
    /// `source_runs[p][c]` is the behavior of source context `c` linked with program `p`; likewise for targets.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        relation: TraceRelation,
        programs: Vec<String>,
        source_contexts: Vec<String>,
        target_contexts: Vec<String>,
        source_runs: Vec<Vec<Behavior>>,
        target_runs: Vec<Vec<Behavior>>,
        back_translation: Option<Vec<usize>>,
    ) -> Result<Self> {
        let name = name.into();
        let shape_ok = source_runs.len() == programs.len()
            && target_runs.len() == programs.len()
            && source_runs.iter().all(|r| r.len() == source_contexts.len())
            && target_runs.iter().all(|r| r.len() == target_contexts.len());
        if !shape_ok || source_contexts.is_empty() {
            return Err(Error::InvalidInstance(format!("run tables of `{name}` do not match programs × contexts")));
        }
        for b in source_runs.iter().flatten() {
            relation.source().require_same(b.universe())?;
            if b.is_empty() {
                return Err(Error::InvalidInstance(format!("empty source behavior in `{name}`")));
            }
        }
        for b in target_runs.iter().flatten() {
            relation.target().require_same(b.universe())?;
            if b.is_empty() {
                return Err(Error::InvalidInstance(format!("empty target behavior in `{name}`")));
            }
        }
        if let Some(bt) = &back_translation {
            if bt.len() != target_contexts.len() || bt.iter().any(|&c| c >= source_contexts.len()) {
                return Err(Error::InvalidInstance(format!("back-translation of `{name}` is out of range")));
            }
        }
        Ok(RobustInstance { name, relation, programs, source_contexts, target_contexts, source_runs, target_runs, back_translation })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relation(&self) -> &TraceRelation {
        &self.relation
    }

    pub fn programs(&self) -> &[String] {
        &self.programs
    }

    pub fn source_contexts(&self) -> &[String] {
        &self.source_contexts
    }

    pub fn target_contexts(&self) -> &[String] {
        &self.target_contexts
    }

    pub fn source_run(&self, program: usize, context: usize) -> &Behavior {
        &self.source_runs[program][context]
    }

    pub fn target_run(&self, program: usize, context: usize) -> &Behavior {
        &self.target_runs[program][context]
    }

    pub fn back_translation(&self) -> Option<&[usize]> {
        self.back_translation.as_deref()
    }

    pub fn with_relation(&self, relation: TraceRelation) -> Result<Self> {
        let mut out = self.clone();
        relation.source().require_same(self.relation.source())?;
        relation.target().require_same(self.relation.target())?;
        out.relation = relation;
        Ok(out)
    }

    /// One program per partial program, whose behaviors are the unions over all contexts.
    pub fn union_instance(&self) -> Result<CompilationInstance> {
        let programs = (0..self.programs.len())
            .map(|p| ProgramPair {
                id: self.programs[p].clone(),
                compiled: format!("{}↓", self.programs[p]),
                source: Behavior::union_all(self.relation.source(), &self.source_runs[p]),
                target: Behavior::union_all(self.relation.target(), &self.target_runs[p]),
            })
            .collect();
        CompilationInstance::new(format!("{}/unions", self.name), self.relation.clone(), programs)
    }

    fn witness_candidates(&self, ct: usize, mode: WitnessMode) -> Result<Vec<usize>> {
        match mode {
            WitnessMode::Search => Ok((0..self.source_contexts.len()).collect()),
            WitnessMode::Constructive => {
                let bt = self
                    .back_translation
                    .as_ref()
                    .ok_or_else(|| Error::Precondition(format!("`{}` has no back-translation", self.name)))?;
                Ok(vec![bt[ct]])
            }
        }
    }
}

/// Every linked behavior of `program` on the given side satisfies `p`.
pub fn robustly_satisfies(ri: &RobustInstance, program: usize, p: &TraceProperty, side: Side) -> Result<bool> {
    let runs = match side {
        Side::Source => &ri.source_runs[program],
        Side::Target => &ri.target_runs[program],
    };
    for b in runs {
        if !crate::property::satisfies(b, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn rename(mut v: CriterionVerdict, name: &str) -> CriterionVerdict {
    v.criterion = name.to_string();
    v
}

fn mode_stat(v: CriterionVerdict, mode: WitnessMode) -> CriterionVerdict {
    v.stat("constructive", u64::from(mode == WitnessMode::Constructive))
}

/// `RTC~`: each trace of a target context linked with `P↓` is related to a trace of some
/// source context linked with `P`.
pub fn check_rtc_tilde(ri: &RobustInstance, mode: WitnessMode) -> Result<CriterionVerdict> {
    let r = &ri.relation;
    let mut representative = None;
    let mut checked = 0u64;
    for p in 0..ri.programs.len() {
        for ct in 0..ri.target_contexts.len() {
            let candidates = ri.witness_candidates(ct, mode)?;
            for &t in ri.target_runs[p][ct].ids() {
                checked += 1;
                let found = candidates
                    .iter()
                    .copied()
                    .find(|&cs| r.sources_of(t).iter().any(|&s| ri.source_runs[p][cs].contains_id(s)));
                match found {
                    Some(cs) => {
                        representative.get_or_insert_with(|| ri.source_contexts[cs].clone());
                    }
                    None => {
                        let cx = Counterexample::new("no source context produces a related trace")
                            .program(p, &ri.programs[p])
                            .context(ri.target_contexts[ct].clone())
                            .trace(t, r.target().trace(t));
                        let mut v = CriterionVerdict::fail("RTC~", cx).stat("target_traces", checked);
                        if mode == WitnessMode::Constructive {
                            v.witness_context = Some(ri.source_contexts[candidates[0]].clone());
                        }
                        return Ok(mode_stat(v, mode));
                    }
                }
            }
        }
    }
    let mut v = CriterionVerdict::pass("RTC~").stat("target_traces", checked);
    v.witness_context = representative;
    Ok(mode_stat(v, mode))
}

pub fn check_rtp_tau(ri: &RobustInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let ui = ri.union_instance()?;
    Ok(rename(criteria::check_tp_tau(&ui, &PropertyMapping::existential(&ri.relation), cfg, strategy)?, "RTP^tau"))
}

pub fn check_rtp_sigma(ri: &RobustInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    let ui = ri.union_instance()?;
    Ok(rename(criteria::check_tp_sigma(&ui, &PropertyMapping::universal(&ri.relation), cfg, strategy)?, "RTP^sigma"))
}

/// `RTC~`, `RTP^τ̃` and `RTP^σ̃`; passes when all three agree.
pub fn check_robust_trinity(ri: &RobustInstance, cfg: &QuantConfig, mode: WitnessMode) -> Result<CriterionVerdict> {
    let rtc = check_rtc_tilde(ri, mode)?;
    let tau = check_rtp_tau(ri, cfg, Strategy::Auto)?;
    let sigma = check_rtp_sigma(ri, cfg, Strategy::Auto)?;
    Ok(CriterionVerdict::agreement("robust-trinity", vec![rtc, tau, sigma]))
}

/// `RSC~`: every prefix of a target run extends to a trace related to some source run.
pub fn check_rsc_tilde(ri: &RobustInstance, mode: WitnessMode) -> Result<CriterionVerdict> {
    let tu = ri.relation.target().clone();
    tu.require_prefix_closed()?;
    let r = &ri.relation;
    for p in 0..ri.programs.len() {
        for ct in 0..ri.target_contexts.len() {
            let candidates = ri.witness_candidates(ct, mode)?;
            let mut reaches = vec![false; tu.len()];
            for t in 0..tu.len() {
                let related = r.sources_of(t).iter().any(|&s| candidates.iter().any(|&cs| ri.source_runs[p][cs].contains_id(s)));
                if related {
                    for m in tu.prefix_ids(t) {
                        reaches[m] = true;
                    }
                }
            }
            for &t in ri.target_runs[p][ct].ids() {
                if let Some(m) = tu.prefix_ids(t).into_iter().find(|&m| !reaches[m]) {
                    let cx = Counterexample::new("prefix of a target run cannot be completed to a related trace")
                        .program(p, &ri.programs[p])
                        .context(ri.target_contexts[ct].clone())
                        .trace(t, tu.trace(t))
                        .prefix(tu.trace(m));
                    return Ok(mode_stat(CriterionVerdict::fail("RSC~", cx), mode));
                }
            }
        }
    }
    Ok(mode_stat(CriterionVerdict::pass("RSC~"), mode))
}

pub fn check_rsp_sigma(ri: &RobustInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    Ok(rename(criteria::check_sp_sigma(&ri.union_instance()?, cfg, strategy)?, "RSP^sigma"))
}

pub fn check_rsp_safe_tau(ri: &RobustInstance, cfg: &QuantConfig, strategy: Strategy) -> Result<CriterionVerdict> {
    Ok(rename(criteria::check_sp_safe_tau(&ri.union_instance()?, cfg, strategy)?, "RSP^safe-tau"))
}

/// `RSC~`, `RSP^σ̃` and `RSP^(Safe∘τ̃)`; passes when all three agree.
pub fn check_robust_safety_trinity(ri: &RobustInstance, cfg: &QuantConfig, mode: WitnessMode) -> Result<CriterionVerdict> {
    let rsc = check_rsc_tilde(ri, mode)?;
    let sig = check_rsp_sigma(ri, cfg, Strategy::Auto)?;
    let tau = check_rsp_safe_tau(ri, cfg, Strategy::Auto)?;
    Ok(CriterionVerdict::agreement("robust-safety-trinity", vec![rsc, sig, tau]))
}

/// `RHC~`: for every target context some source context has a behavior whose image is exactly the target behavior.
pub fn check_rhc_tilde(ri: &RobustInstance, mode: WitnessMode) -> Result<CriterionVerdict> {
    let r = &ri.relation;
    let mut representative = None;
    for p in 0..ri.programs.len() {
        for ct in 0..ri.target_contexts.len() {
            let bt = ri.target_runs[p][ct].to_property();
            let candidates = ri.witness_candidates(ct, mode)?;
            let mut found = None;
            for &cs in &candidates {
                if existential_image(r, &ri.source_runs[p][cs].to_property())? == bt {
                    found = Some(cs);
                    break;
                }
            }
            match found {
                Some(cs) => {
                    representative.get_or_insert_with(|| ri.source_contexts[cs].clone());
                }
                None => {
                    let cx = Counterexample::new("no source context's behavior maps exactly onto the target behavior")
                        .program(p, &ri.programs[p])
                        .context(ri.target_contexts[ct].clone())
                        .property(bt.labels());
                    let mut v = CriterionVerdict::fail("RHC~", cx);
                    if mode == WitnessMode::Constructive {
                        v.witness_context = Some(ri.source_contexts[candidates[0]].clone());
                    }
                    return Ok(mode_stat(v, mode));
                }
            }
        }
    }
    let mut v = CriterionVerdict::pass("RHC~");
    v.witness_context = representative;
    Ok(mode_stat(v, mode))
}
