//! Reports: ordered verdicts with the configuration that produced them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde_json::{json, Value};
use trace_rel_core::verdict::{Counterexample, CriterionVerdict, Status};

pub const TOOL: &str = "trace-rel";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Md,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub seed: u64,
    pub verdicts: Vec<CriterionVerdict>,
    /// Wall-clock per verdict, emitted only when requested.
    pub timings: Option<Vec<Duration>>,
}

impl Report {
    /// Fail when any top-level verdict fails; skipped verdicts do not count.
    pub fn status(&self) -> Status {
        if self.verdicts.iter().any(|v| v.failed()) {
            Status::Fail
        } else {
            Status::Pass
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Fail => 1,
            _ => 0,
        }
    }

    fn count(&self, s: Status) -> usize {
        self.verdicts.iter().filter(|v| v.status == s).count()
    }

    /// Keys are emitted in sorted order at every level.
    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "status": self.status(),
            "summary": {
                "pass": self.count(Status::Pass),
                "fail": self.count(Status::Fail),
                "not-applicable": self.count(Status::Skipped),
            },
            "verdicts": self.verdicts,
        });
        if let Some(ts) = &self.timings {
            let rows: Vec<Value> = self
                .verdicts
                .iter()
                .zip(ts)
                .map(|(v, t)| json!({"criterion": v.criterion, "ms": t.as_secs_f64() * 1e3}))
                .collect();
            v["wall_clock"] = Value::Array(rows);
        }
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {TOOL} {}\n", self.command);
        let _ = writeln!(out, "- version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "- seed: {}", self.seed);
        let _ = writeln!(out, "- status: {}\n", status_text(self.status()));
        if !self.config.is_empty() {
            let _ = writeln!(out, "| setting | value |\n|---|---|");
            for (k, v) in &self.config {
                let _ = writeln!(out, "| {k} | {} |", cell(&v.to_string()));
            }
            out.push('\n');
        }
        let timed = self.timings.is_some();
        let _ = writeln!(out, "| criterion | status | stats | counterexample |{}", if timed { " ms |" } else { "" });
        let _ = writeln!(out, "|---|---|---|---|{}", if timed { "---|" } else { "" });
        for (i, v) in self.verdicts.iter().enumerate() {
            let ms = self.timings.as_ref().map(|ts| format!(" {:.1} |", ts[i].as_secs_f64() * 1e3)).unwrap_or_default();
            rows(&mut out, v, 0, &ms);
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Md => self.to_markdown(),
        }
    }
}

pub fn status_text(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skipped => "not-applicable",
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn rows(out: &mut String, v: &CriterionVerdict, depth: usize, ms: &str) {
    let name = format!("{}{}", "&nbsp;&nbsp;".repeat(depth), v.criterion);
    let stats: Vec<String> = v.stats.iter().map(|(k, n)| format!("{k}={n}")).collect();
    let cx = v.counterexample.as_ref().map(render_counterexample).unwrap_or_default();
    let _ = writeln!(out, "| {} | {} | {} | {} |{ms}", cell(&name), status_text(v.status), stats.join(", "), cell(&cx));
    for c in &v.components {
        rows(out, c, depth + 1, if ms.is_empty() { "" } else { " |" });
    }
}

pub fn render_counterexample(cx: &Counterexample) -> String {
    let mut parts = vec![cx.detail.clone()];
    if let Some(p) = &cx.program {
        parts.push(format!("program `{p}`"));
    }
    if let Some(c) = &cx.context {
        parts.push(format!("context `{c}`"));
    }
    if let Some(t) = &cx.trace {
        parts.push(format!("trace {t}"));
    }
    if let Some(m) = &cx.prefix {
        parts.push(format!("prefix {m}"));
    }
    if let Some(p) = &cx.property {
        parts.push(format!("property {{{}}}", p.join(", ")));
    }
    parts.join("; ")
}

/// Passes when every non-skipped member passes.
pub fn group(criterion: impl Into<String>, members: Vec<CriterionVerdict>) -> CriterionVerdict {
    let criterion = criterion.into();
    let failing: Vec<&str> = members.iter().filter(|m| m.failed()).map(|m| m.criterion.as_str()).collect();
    let mut v = if failing.is_empty() {
        CriterionVerdict::pass(criterion)
    } else {
        CriterionVerdict::fail(criterion, Counterexample::new(format!("failing: {}", failing.join(", "))))
    };
    v.components = members;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(verdicts: Vec<CriterionVerdict>) -> Report {
        Report { command: "check cc".into(), config: BTreeMap::new(), seed: 7, verdicts, timings: None }
    }

    #[test]
    fn pass_report() {
        let r = report(vec![CriterionVerdict::pass("CC~")]);
        assert!(r.to_json().contains("\"status\": \"pass\""));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn failure_embeds_witness() {
        let cx = Counterexample::new("no related source trace").trace(3, "a·b");
        let r = report(vec![CriterionVerdict::pass("x"), CriterionVerdict::fail("CC~", cx)]);
        let j = r.to_json();
        assert!(j.contains("\"trace\": \"a·b\""));
        assert_eq!(r.exit_code(), 1);
        assert!(r.to_markdown().contains("trace a·b"));
    }

    #[test]
    fn skipped_is_not_applicable_and_does_not_fail() {
        let r = report(vec![CriterionVerdict::skipped("ANI", "hypothesis fails"), CriterionVerdict::pass("CC~")]);
        let v = r.to_value();
        assert_eq!(v["verdicts"][0]["status"], "not-applicable");
        assert_eq!(v["summary"]["not-applicable"], 1);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn keys_are_sorted() {
        let r = report(vec![CriterionVerdict::pass("CC~").stat("z", 1).stat("a", 2)]);
        let j = r.to_json();
        let pos = |k: &str| j.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("command") < pos("config") && pos("config") < pos("seed") && pos("seed") < pos("verdicts"));
        assert!(pos("a") < pos("z"));
        assert!(!j.contains("wall_clock"));
    }

    #[test]
    fn timings_only_on_request() {
        let mut r = report(vec![CriterionVerdict::pass("CC~")]);
        r.timings = Some(vec![Duration::from_millis(5)]);
        assert!(r.to_json().contains("wall_clock"));
        assert!(r.to_markdown().contains("5.0"));
    }

    #[test]
    fn group_ignores_skipped_members() {
        let g = group("g", vec![CriterionVerdict::pass("a"), CriterionVerdict::skipped("b", "n/a")]);
        assert!(g.passed());
        let g = group("g", vec![CriterionVerdict::pass("a"), CriterionVerdict::fail("c", Counterexample::new("x"))]);
        assert!(g.failed());
    }
}
