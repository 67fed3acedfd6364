//! The six boundary classifiers behind one train/predict interface.

pub mod maxent;
pub mod rules;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Instance};
use crate::error::{BunsetsuError, Result};
use crate::rulebase::{build_rule_table, RuleTable};

pub use maxent::{MaxEntModel, MaxEntParams};
pub use rules::{
    decision_list, predict_decision_list, predict_example_based, predict_method1, predict_method2,
    DecisionListEntry,
};
pub use tree::{DecisionTreeModel, TreeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    DecisionTree,
    MaxEntropy,
    ExampleBased,
    DecisionList,
    Method1,
    Method2,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::DecisionTree,
        MethodKind::MaxEntropy,
        MethodKind::ExampleBased,
        MethodKind::DecisionList,
        MethodKind::Method1,
        MethodKind::Method2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::DecisionTree => "decision_tree",
            MethodKind::MaxEntropy => "max_entropy",
            MethodKind::ExampleBased => "example_based",
            MethodKind::DecisionList => "decision_list",
            MethodKind::Method1 => "method1",
            MethodKind::Method2 => "method2",
        }
    }

    /// Kinds whose model is a [`RuleTable`].
    pub fn is_rule_family(self) -> bool {
        matches!(
            self,
            MethodKind::ExampleBased
                | MethodKind::DecisionList
                | MethodKind::Method1
                | MethodKind::Method2
        )
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = BunsetsuError;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        MethodKind::ALL
            .into_iter()
            .find(|k| k.name() == normalized)
            .ok_or_else(|| BunsetsuError::invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub maxent: MaxEntParams,
    pub tree: TreeParams,
}

#[derive(Clone, Debug)]
pub enum Model {
    Tree(DecisionTreeModel),
    MaxEnt(MaxEntModel),
    Rules(RuleTable),
}

/// A trained classifier of one kind.
#[derive(Clone, Debug)]
pub struct Learner {
    pub kind: MethodKind,
    pub model: Model,
}

impl Learner {
    pub fn train(kind: MethodKind, corpus: &Corpus, params: &TrainParams) -> Result<Self> {
        Self::train_instances(kind, &corpus.instances(), params)
    }

    pub fn train_instances(
        kind: MethodKind,
        instances: &[Instance],
        params: &TrainParams,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(BunsetsuError::invalid("corpus has no labeled spaces"));
        }
        let model = match kind {
            MethodKind::DecisionTree => {
                Model::Tree(DecisionTreeModel::train(instances, &params.tree)?)
            }
            MethodKind::MaxEntropy => Model::MaxEnt(MaxEntModel::train(instances, &params.maxent)?),
            _ => Model::Rules(build_rule_table(instances)?),
        };
        Ok(Self { kind, model })
    }

    /// The embedded rule table of rule-family kinds.
    pub fn rule_table(&self) -> Option<&RuleTable> {
        match &self.model {
            Model::Rules(t) => Some(t),
            _ => None,
        }
    }

    pub fn predict(&self, instance: &Instance) -> bool {
        match (&self.model, self.kind) {
            (Model::Tree(m), _) => m.predict(instance),
            (Model::MaxEnt(m), _) => m.predict(instance),
            (Model::Rules(t), MethodKind::ExampleBased) => predict_example_based(t, instance),
            (Model::Rules(t), MethodKind::DecisionList) => predict_decision_list(t, instance),
            (Model::Rules(t), MethodKind::Method1) => predict_method1(t, instance),
            (Model::Rules(t), _) => predict_method2(t, instance),
        }
    }

    pub fn predict_all(&self, instances: &[Instance]) -> Vec<bool> {
        instances.iter().map(|i| self.predict(i)).collect()
    }
}
