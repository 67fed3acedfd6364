//! Self-describing model files.
//!
//! A model file is one JSON document tagged with the format name, version,
//! template-table hash and method kind. Rule-family and maximum-entropy models
//! embed their training instances; the per-pattern records stored beside them
//! are checked against a rebuild on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{BunsetsuError, Result};
use crate::learners::maxent::GisModel;
use crate::learners::{DecisionTreeModel, Learner, MaxEntModel, MaxEntParams, MethodKind, Model};
use crate::patterns::{template_table_hash, templates};
use crate::rulebase::{build_rule_table, RuleTable};

pub const MODEL_FORMAT: &str = "bunsetsu-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    template_hash: String,
    kind: MethodKind,
    body: Body,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Body {
    Tree(DecisionTreeModel),
    MaxEnt(MaxEntRecord),
    Rules(RuleTableRecord),
}

#[derive(Serialize, Deserialize)]
struct KeyRecord {
    tokens: Vec<String>,
    partition: u32,
    non_partition: u32,
}

#[derive(Serialize, Deserialize)]
struct TemplateRecord {
    template_id: usize,
    keys: Vec<KeyRecord>,
}

#[derive(Serialize, Deserialize)]
struct RuleTableRecord {
    default_category: bool,
    instances: Vec<Instance>,
    patterns: Vec<TemplateRecord>,
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    template_id: usize,
    tokens: Vec<String>,
    non_partition: Option<f64>,
    partition: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct MaxEntRecord {
    params: MaxEntParams,
    instances: Vec<Instance>,
    slack_weight: f64,
    correction: u32,
    iterations: u32,
    converged: bool,
    weights: Vec<WeightRecord>,
}

fn sorted_keys(table: &RuleTable, template_id: usize) -> Vec<(Vec<String>, u32, u32)> {
    let mut keys: Vec<_> = table
        .rules_of(template_id)
        .map(|(k, s)| {
            (
                table.pattern_key(template_id, k).tokens,
                s.count_partition,
                s.count_non_partition,
            )
        })
        .collect();
    keys.sort();
    keys
}

fn table_record(table: &RuleTable) -> RuleTableRecord {
    RuleTableRecord {
        default_category: table.default_category(),
        instances: table.instances().to_vec(),
        patterns: templates()
            .iter()
            .map(|t| TemplateRecord {
                template_id: t.id,
                keys: sorted_keys(table, t.id)
                    .into_iter()
                    .map(|(tokens, partition, non_partition)| KeyRecord {
                        tokens,
                        partition,
                        non_partition,
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn restore_table(record: RuleTableRecord) -> Result<RuleTable> {
    let table = build_rule_table(&record.instances)?;
    if table.default_category() != record.default_category {
        return Err(BunsetsuError::Model(
            "default category does not match instances".into(),
        ));
    }
    if record.patterns.len() != templates().len() {
        return Err(BunsetsuError::Model(format!(
            "{} pattern records, expected {}",
            record.patterns.len(),
            templates().len()
        )));
    }
    for (t, rec) in templates().iter().zip(&record.patterns) {
        let stored: Vec<_> = rec
            .keys
            .iter()
            .map(|k| (k.tokens.clone(), k.partition, k.non_partition))
            .collect();
        if rec.template_id != t.id || stored != sorted_keys(&table, t.id) {
            return Err(BunsetsuError::Model(format!(
                "records of template {} do not match the embedded instances",
                t.id
            )));
        }
    }
    Ok(table)
}

fn maxent_record(model: &MaxEntModel) -> MaxEntRecord {
    let table = model.table();
    let mut weights = Vec::with_capacity(model.gis.weights.len());
    for t in templates() {
        let mut keys: Vec<_> = table.rules_of(t.id).map(|(k, _)| *k).collect();
        keys.sort_unstable();
        for k in keys {
            let [non_partition, partition] = model.gis.weights[weights.len()];
            weights.push(WeightRecord {
                template_id: t.id,
                tokens: table.pattern_key(t.id, &k).tokens,
                non_partition,
                partition,
            });
        }
    }
    MaxEntRecord {
        params: model.params,
        instances: table.instances().to_vec(),
        slack_weight: model.gis.slack_weight,
        correction: model.gis.correction,
        iterations: model.gis.iterations,
        converged: model.gis.converged,
        weights,
    }
}

fn restore_maxent(record: MaxEntRecord) -> Result<MaxEntModel> {
    let table = build_rule_table(&record.instances)?;
    let mut expected = Vec::new();
    for t in templates() {
        let mut keys: Vec<_> = table.rules_of(t.id).map(|(k, _)| *k).collect();
        keys.sort_unstable();
        expected.extend(keys.iter().map(|k| table.pattern_key(t.id, k)));
    }
    if expected.len() != record.weights.len()
        || expected
            .iter()
            .zip(&record.weights)
            .any(|(k, w)| k.template_id != w.template_id || k.tokens != w.tokens)
    {
        return Err(BunsetsuError::Model(
            "weight records do not match the embedded instances".into(),
        ));
    }
    let gis = GisModel {
        weights: record
            .weights
            .iter()
            .map(|w| [w.non_partition, w.partition])
            .collect(),
        slack_weight: record.slack_weight,
        correction: record.correction,
        iterations: record.iterations,
        converged: record.converged,
    };
    MaxEntModel::from_parts(record.params, table, gis)
}

impl Learner {
    /// Serializes to the model file format. Output is byte-identical for
    /// identical models.
    pub fn to_model_string(&self) -> Result<String> {
        let body = match &self.model {
            Model::Tree(m) => Body::Tree(m.clone()),
            Model::MaxEnt(m) => Body::MaxEnt(maxent_record(m)),
            Model::Rules(t) => Body::Rules(table_record(t)),
        };
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            template_hash: template_table_hash(),
            kind: self.kind,
            body,
        };
        let mut text = serde_json::to_string(&file)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_model_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(BunsetsuError::Model(format!(
                "not a model file: {:?}",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(BunsetsuError::Model(format!(
                "unsupported version {}",
                file.version
            )));
        }
        if file.template_hash != template_table_hash() {
            return Err(BunsetsuError::Model("template table hash mismatch".into()));
        }
        let model = match (file.kind, file.body) {
            (MethodKind::DecisionTree, Body::Tree(m)) => Model::Tree(m),
            (MethodKind::MaxEntropy, Body::MaxEnt(r)) => Model::MaxEnt(restore_maxent(r)?),
            (k, Body::Rules(r)) if k.is_rule_family() => Model::Rules(restore_table(r)?),
            (k, _) => {
                return Err(BunsetsuError::Model(format!(
                    "body does not match method kind {k}"
                )))
            }
        };
        Ok(Self {
            kind: file.kind,
            model,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_model_string()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_model_str(&std::fs::read_to_string(path)?)
    }
}
