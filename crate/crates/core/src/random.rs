//! Seeded random finite instances.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{CompilationInstance, ProgramPair};
use crate::error::Result;
use crate::galois::{existential_image, TraceRelation};
use crate::property::{Behavior, TraceProperty};
use crate::robust::RobustInstance;
use crate::trace::{Alphabet, Event, Trace, TraceId, TraceUniverse, Universe};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A prefix-closed universe of exactly `size` traces over `labels`, grown as a random tree from ε.
pub fn random_universe(name: &str, labels: &[&str], size: usize, rng: &mut ChaCha8Rng) -> Result<Universe> {
    let alphabet = Alphabet::new(name, labels.iter().map(Event::regular))?;
    let mut traces = vec![Trace::empty(alphabet.clone())];
    let mut attempts = 0;
    while traces.len() < size && attempts < 10_000 {
        attempts += 1;
        let parent = traces[rng.random_range(0..traces.len())].clone();
        let e = &alphabet.events()[rng.random_range(0..alphabet.events().len())];
        let t = parent.extend(e.clone())?;
        if !traces.contains(&t) {
            traces.push(t);
        }
    }
    TraceUniverse::from_traces(name, alphabet, traces)
}

pub fn random_relation(source: &Universe, target: &Universe, density: f64, rng: &mut ChaCha8Rng) -> Result<TraceRelation> {
    let mut pairs = Vec::new();
    for s in 0..source.len() {
        for t in 0..target.len() {
            if rng.random_bool(density) {
                pairs.push((s, t));
            }
        }
    }
    TraceRelation::from_id_pairs(source, target, pairs)
}

fn random_nonempty(u: &Universe, rng: &mut ChaCha8Rng) -> Vec<TraceId> {
    let mut ids: Vec<TraceId> = (0..u.len()).filter(|_| rng.random_bool(0.35)).collect();
    if ids.is_empty() {
        ids.push(rng.random_range(0..u.len()));
    }
    ids
}

/// Random nonempty subset of `within`, or of the whole universe when `within` is empty.
fn random_subset_of(u: &Universe, within: &TraceProperty, rng: &mut ChaCha8Rng) -> Vec<TraceId> {
    let pool: Vec<TraceId> = within.ids().collect();
    if pool.is_empty() {
        return random_nonempty(u, rng);
    }
    let mut ids: Vec<TraceId> = pool.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    if ids.is_empty() {
        ids.push(pool[rng.random_range(0..pool.len())]);
    }
    ids
}

/// Target behavior drawn either inside the existential image (a correct compilation) or anywhere.
fn random_target(relation: &TraceRelation, source: &Behavior, rng: &mut ChaCha8Rng) -> Result<Behavior> {
    let tu = relation.target();
    let ids = if rng.random_bool(0.5) {
        let img = existential_image(relation, &source.to_property())?;
        random_subset_of(tu, &img, rng)
    } else {
        random_nonempty(tu, rng)
    };
    Ok(Behavior::new(tu, ids))
}

/// A random instance with universes of `size` traces and one to four programs.
pub fn random_instance(seed: u64, size: usize) -> Result<CompilationInstance> {
    let mut rng = rng(seed);
    let su = random_universe("rs", &["a", "b"], size, &mut rng)?;
    let tu = random_universe("rt", &["x", "y"], size, &mut rng)?;
    let density = [0.2, 0.35, 0.5][rng.random_range(0..3)];
    let relation = random_relation(&su, &tu, density, &mut rng)?;
    let n = rng.random_range(1..=4);
    let mut programs = Vec::with_capacity(n);
    for i in 0..n {
        let source = Behavior::new(&su, random_nonempty(&su, &mut rng));
        let target = random_target(&relation, &source, &mut rng)?;
        programs.push(ProgramPair { id: format!("p{i}"), compiled: format!("p{i}↓"), source, target });
    }
    CompilationInstance::new(format!("random-{seed}-{size}"), relation, programs)
}

/// A random robust instance with universes of at most `size` traces and up to `contexts` contexts per side.
pub fn random_robust_instance(seed: u64, size: usize, contexts: usize) -> Result<RobustInstance> {
    let mut rng = rng(seed);
    let su = random_universe("rs", &["a", "b"], size, &mut rng)?;
    let tu = random_universe("rt", &["x", "y"], size, &mut rng)?;
    let relation = random_relation(&su, &tu, 0.4, &mut rng)?;
    let np = rng.random_range(1..=2);
    let ncs = rng.random_range(1..=contexts.max(1));
    let nct = rng.random_range(1..=contexts.max(1));
    let back: Vec<usize> = (0..nct).map(|_| rng.random_range(0..ncs)).collect();
    let mut source_runs = Vec::new();
    let mut target_runs = Vec::new();
    for _ in 0..np {
        let srow: Vec<Behavior> = (0..ncs).map(|_| Behavior::new(&su, random_nonempty(&su, &mut rng))).collect();
        let mut trow = Vec::new();
        for &cs in &back {
            trow.push(random_target(&relation, &srow[cs], &mut rng)?);
        }
        source_runs.push(srow);
        target_runs.push(trow);
    }
    RobustInstance::new(
        format!("random-robust-{seed}"),
        relation,
        (0..np).map(|i| format!("P{i}")).collect(),
        (0..ncs).map(|i| format!("Cs{i}")).collect(),
        (0..nct).map(|i| format!("Ct{i}")).collect(),
        source_runs,
        target_runs,
        Some(back),
    )
}
