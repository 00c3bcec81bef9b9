//! JSON fixtures: universes, properties, relations and program sets.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use trace_rel_core::galois::TraceRelation;
use trace_rel_core::property::TraceProperty;
use trace_rel_core::trace::{Alphabet, Event, Payload, Trace, TraceId, TraceUniverse, Universe};

/// A fixture that failed to parse or refers to something outside its universes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureError {
    pub path: PathBuf,
    pub location: String,
    pub message: String,
}

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.path.display(), self.location, self.message)
    }
}

impl std::error::Error for FixtureError {}

fn error(path: &Path, location: impl Into<String>, message: impl ToString) -> FixtureError {
    FixtureError { path: path.to_path_buf(), location: location.into(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub label: String,
    #[serde(default)]
    pub terminal: bool,
}

/// All traces over `events` of at most `max_len` events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseFile {
    pub name: String,
    pub events: Vec<EventSpec>,
    pub max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyFile {
    pub universe: String,
    pub traces: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationFile {
    pub source_universe: String,
    pub target_universe: String,
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
}

/// A program given by its source and target behaviors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorEntry {
    pub id: String,
    pub source: Vec<Vec<String>>,
    pub target: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProgramEntry {
    /// S-expression source text, compiled by the instance's compiler.
    Source(String),
    Behaviors(BehaviorEntry),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramSetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    pub programs: Vec<ProgramEntry>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FixtureError> {
    let text = std::fs::read_to_string(path).map_err(|e| error(path, "file", e))?;
    serde_json::from_str(&text).map_err(|e| error(path, format!("line {} column {}", e.line(), e.column()), e))
}

pub fn event_of(spec: &EventSpec) -> Event {
    let (label, payload) = match spec.label.split_once(':') {
        Some((l, p)) => (l, Some(Payload::parse(p))),
        None => (spec.label.as_str(), None),
    };
    let e = if spec.terminal { Event::terminal(label) } else { Event::regular(label) };
    match payload {
        Some(p) => e.with_payload(p),
        None => e,
    }
}

/// Enumerates the universe described by `file`; fails with a cap error beyond `cap` traces.
pub fn universe_of(file: &UniverseFile, cap: usize) -> trace_rel_core::Result<Universe> {
    let alphabet = Alphabet::new(file.name.clone(), file.events.iter().map(event_of))?;
    TraceUniverse::enumerate(file.name.clone(), alphabet, file.max_len, cap)
}

pub fn load_universe(path: &Path, cap: usize) -> Result<Result<Universe, trace_rel_core::Error>, FixtureError> {
    let file: UniverseFile = read_json(path)?;
    match universe_of(&file, cap) {
        Err(e @ trace_rel_core::Error::CapExceeded { .. }) => Ok(Err(e)),
        Err(e) => Err(error(path, "events", e)),
        Ok(u) => Ok(Ok(u)),
    }
}

fn find<'a>(path: &Path, universes: &'a [Universe], name: &str, field: &str) -> Result<&'a Universe, FixtureError> {
    universes.iter().find(|u| u.name() == name).ok_or_else(|| {
        let known: Vec<&str> = universes.iter().map(|u| u.name()).collect();
        error(path, field, format!("unknown universe `{name}` (known: {})", known.join(", ")))
    })
}

fn resolve(path: &Path, u: &Universe, labels: &[String], location: String) -> Result<TraceId, FixtureError> {
    let trace = u.alphabet().parse_trace(labels).map_err(|e| error(path, location.clone(), e))?;
    u.require(&trace).map_err(|e| error(path, location, e))
}

pub fn resolve_property(path: &Path, file: &PropertyFile, universes: &[Universe]) -> Result<TraceProperty, FixtureError> {
    let u = find(path, universes, &file.universe, "universe")?;
    let ids = file.traces.iter().enumerate().map(|(i, t)| resolve(path, u, t, format!("traces[{i}]"))).collect::<Result<Vec<_>, _>>()?;
    Ok(TraceProperty::from_ids(u, ids))
}

pub fn load_property(path: &Path, universes: &[Universe]) -> Result<TraceProperty, FixtureError> {
    resolve_property(path, &read_json(path)?, universes)
}

pub fn resolve_relation(path: &Path, file: &RelationFile, universes: &[Universe]) -> Result<TraceRelation, FixtureError> {
    let su = find(path, universes, &file.source_universe, "source_universe")?;
    let tu = find(path, universes, &file.target_universe, "target_universe")?;
    let mut pairs = Vec::with_capacity(file.pairs.len());
    for (i, (s, t)) in file.pairs.iter().enumerate() {
        pairs.push((resolve(path, su, s, format!("pairs[{i}][0]"))?, resolve(path, tu, t, format!("pairs[{i}][1]"))?));
    }
    TraceRelation::from_id_pairs(su, tu, pairs).map_err(|e| error(path, "pairs", e))
}

pub fn load_relation(path: &Path, universes: &[Universe]) -> Result<TraceRelation, FixtureError> {
    resolve_relation(path, &read_json(path)?, universes)
}

pub fn load_programs(path: &Path) -> Result<ProgramSetFile, FixtureError> {
    read_json(path)
}

pub fn trace_labels(t: &Trace) -> Vec<String> {
    t.events().iter().map(|e| e.to_string()).collect()
}

pub fn relation_file(r: &TraceRelation) -> RelationFile {
    let (su, tu) = (r.source(), r.target());
    RelationFile {
        source_universe: su.name().to_string(),
        target_universe: tu.name().to_string(),
        pairs: r.pairs().map(|(s, t)| (trace_labels(su.trace(s)), trace_labels(tu.trace(t)))).collect(),
    }
}

pub fn property_file(p: &TraceProperty) -> PropertyFile {
    PropertyFile { universe: p.universe().name().to_string(), traces: p.traces().map(trace_labels).collect() }
}

pub fn universe_file(u: &Universe) -> UniverseFile {
    UniverseFile {
        name: u.name().to_string(),
        events: u.alphabet().events().iter().map(|e| EventSpec { label: e.to_string(), terminal: e.is_terminal() }).collect(),
        max_len: u.max_len(),
    }
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn universes(dir: &Path) -> Vec<Universe> {
        let s = write(dir, "s.json", r#"{"name":"S","events":[{"label":"a","terminal":false},{"label":"G","terminal":true}],"max_len":1}"#);
        let t = write(dir, "t.json", r#"{"name":"T","events":[{"label":"x:1"},{"label":"x:2"}],"max_len":1}"#);
        vec![load_universe(&s, 100).unwrap().unwrap(), load_universe(&t, 100).unwrap().unwrap()]
    }

    #[test]
    fn universe_with_terminal_and_payloads() {
        let dir = tempfile::tempdir().unwrap();
        let us = universes(dir.path());
        assert_eq!(us[0].traces().iter().map(|t| t.to_string()).collect::<Vec<_>>(), ["ε", "G", "a"]);
        assert_eq!(us[1].len(), 3);
        assert_eq!(universe_of(&universe_file(&us[1]), 100).unwrap().traces(), us[1].traces());
    }

    #[test]
    fn relation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let us = universes(dir.path());
        let r = write(dir.path(), "r.json", r#"{"source_universe":"S","target_universe":"T","pairs":[[["a"],["x:1"]],[[],[]]]}"#);
        let rel = load_relation(&r, &us).unwrap();
        assert_eq!(rel.len(), 2);
        let back = dir.path().join("back.json");
        save_json(&back, &relation_file(&rel)).unwrap();
        assert_eq!(load_relation(&back, &us).unwrap(), rel);
    }

    #[test]
    fn empty_pairs_is_an_empty_relation() {
        let dir = tempfile::tempdir().unwrap();
        let us = universes(dir.path());
        let r = write(dir.path(), "r.json", r#"{"source_universe":"S","target_universe":"T","pairs":[]}"#);
        assert!(load_relation(&r, &us).unwrap().is_empty());
    }

    #[test]
    fn unknown_trace_is_an_integrity_error() {
        let dir = tempfile::tempdir().unwrap();
        let us = universes(dir.path());
        let r = write(dir.path(), "r.json", r#"{"source_universe":"S","target_universe":"T","pairs":[[["a"],["x:1"]],[["a","a"],["x:2"]]]}"#);
        let e = load_relation(&r, &us).unwrap_err();
        assert_eq!(e.location, "pairs[1][0]");
        let r = write(dir.path(), "r2.json", r#"{"source_universe":"S","target_universe":"T","pairs":[[["b"],[]]]}"#);
        assert!(load_relation(&r, &us).unwrap_err().message.contains("`b`"));
        let r = write(dir.path(), "r3.json", r#"{"source_universe":"Q","target_universe":"T","pairs":[]}"#);
        assert_eq!(load_relation(&r, &us).unwrap_err().location, "source_universe");
    }

    #[test]
    fn strict_schema() {
        let dir = tempfile::tempdir().unwrap();
        let us = universes(dir.path());
        let r = write(dir.path(), "r.json", r#"{"source_universe":"S","target_universe":"T","pairs":[],"extra":1}"#);
        assert!(load_relation(&r, &us).unwrap_err().message.contains("unknown field"));
        let p = write(dir.path(), "p.json", r#"{"universe":"S","traces":[["a"],["G"]]}"#);
        assert_eq!(load_property(&p, &us).unwrap().len(), 2);
        let p = write(dir.path(), "p2.json", r#"{"universe":"S","traces":[["G","a"]]}"#);
        assert!(load_property(&p, &us).unwrap_err().message.contains("terminal"));
    }

    #[test]
    fn program_sets() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "p.json", r#"{"language":"diffvalues","programs":["(add 1 (in_n))",{"id":"q","source":[["a"]],"target":[[]]}]}"#);
        let set = load_programs(&p).unwrap();
        assert_eq!(set.programs.len(), 2);
        assert!(matches!(&set.programs[1], ProgramEntry::Behaviors(b) if b.id == "q"));
    }

    #[test]
    fn universe_cap_is_not_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let s = write(dir.path(), "s.json", r#"{"name":"S","events":[{"label":"a"},{"label":"b"}],"max_len":10}"#);
        assert!(matches!(load_universe(&s, 100).unwrap(), Err(trace_rel_core::Error::CapExceeded { .. })));
        let s = write(dir.path(), "d.json", r#"{"name":"S","events":[{"label":"a"},{"label":"a"}],"max_len":1}"#);
        assert!(load_universe(&s, 100).is_err());
    }
}
