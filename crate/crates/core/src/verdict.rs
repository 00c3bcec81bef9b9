//! Verdicts produced by the criterion checkers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    #[serde(rename = "not-applicable")]
    Skipped,
}

/// What made a criterion fail. Ids refer to the instance the verdict was computed on.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub program: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub program_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub context: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_id: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prefix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub property: Option<Vec<String>>,
    pub detail: String,
}

impl Counterexample {
    pub fn new(detail: impl Into<String>) -> Self {
        Counterexample { detail: detail.into(), ..Default::default() }
    }

    pub fn program(mut self, index: usize, id: &str) -> Self {
        self.program_index = Some(index);
        self.program = Some(id.to_string());
        self
    }

    pub fn trace(mut self, id: usize, shown: impl ToString) -> Self {
        self.trace_id = Some(id);
        self.trace = Some(shown.to_string());
        self
    }

    pub fn property(mut self, labels: Vec<String>) -> Self {
        self.property = Some(labels);
        self
    }

    pub fn prefix(mut self, shown: impl ToString) -> Self {
        self.prefix = Some(shown.to_string());
        self
    }

    pub fn context(mut self, shown: impl Into<String>) -> Self {
        self.context = Some(shown.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: String,
    pub status: Status,
    pub counterexample: Option<Counterexample>,
    pub stats: BTreeMap<String, u64>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_context: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub components: Vec<CriterionVerdict>,
}

impl CriterionVerdict {
    pub fn pass(criterion: impl Into<String>) -> Self {
        CriterionVerdict {
            criterion: criterion.into(),
            status: Status::Pass,
            counterexample: None,
            stats: BTreeMap::new(),
            seed: None,
            witness_context: None,
            components: Vec::new(),
        }
    }

    pub fn fail(criterion: impl Into<String>, cx: Counterexample) -> Self {
        CriterionVerdict { status: Status::Fail, counterexample: Some(cx), ..Self::pass(criterion) }
    }

    pub fn skipped(criterion: impl Into<String>, reason: impl Into<String>) -> Self {
        CriterionVerdict { status: Status::Skipped, counterexample: Some(Counterexample::new(reason)), ..Self::pass(criterion) }
    }

    pub fn from_outcome(criterion: impl Into<String>, cx: Option<Counterexample>) -> Self {
        match cx {
            Some(cx) => Self::fail(criterion, cx),
            None => Self::pass(criterion),
        }
    }

    pub fn stat(mut self, key: &str, value: u64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// Passes when all non-skipped components share one status.
    pub fn agreement(criterion: impl Into<String>, components: Vec<CriterionVerdict>) -> Self {
        let criterion = criterion.into();
        let live: Vec<&CriterionVerdict> = components.iter().filter(|c| c.status != Status::Skipped).collect();
        let agree = live.windows(2).all(|w| w[0].status == w[1].status);
        let mut v = if agree {
            Self::pass(criterion)
        } else {
            let shown: Vec<String> = live.iter().map(|c| format!("{}={:?}", c.criterion, c.status).to_lowercase()).collect();
            Self::fail(criterion, Counterexample::new(format!("components disagree: {}", shown.join(", "))))
        };
        v.stats.insert("components_passing".into(), live.iter().filter(|c| c.passed()).count() as u64);
        v.stats.insert("components".into(), live.len() as u64);
        v.components = components;
        v
    }

    /// `premise ⇒ conclusion` over two verdicts.
    pub fn implication(criterion: impl Into<String>, premise: &CriterionVerdict, conclusion: &CriterionVerdict) -> Self {
        let criterion = criterion.into();
        let mut v = if !premise.passed() || conclusion.passed() {
            Self::pass(criterion)
        } else {
            Self::fail(
                criterion,
                Counterexample::new(format!("{} holds but {} fails", premise.criterion, conclusion.criterion)),
            )
        };
        v.components = vec![premise.clone(), conclusion.clone()];
        v
    }
}
