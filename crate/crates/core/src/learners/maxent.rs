//! Two-category maximum-entropy classification trained by generalized
//! iterative scaling.
//!
//! A feature is a (predicate, category) pair. Pairs seen fewer than `cutoff`
//! times in training are dropped. A slack feature tops every (event,
//! category) up to the same active-feature total so the scaling updates stay
//! valid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{BunsetsuError, Result};
use crate::patterns::templates;
use crate::rulebase::{build_rule_table, compact_key, CompactKey, FeatureCodes, RuleTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntParams {
    /// Minimum training frequency of a retained (feature, category) pair.
    pub cutoff: u32,
    pub max_iterations: u32,
    /// Largest relative gap between model and empirical feature counts
    /// accepted as converged.
    pub tolerance: f64,
}

impl Default for MaxEntParams {
    fn default() -> Self {
        Self {
            cutoff: 1,
            max_iterations: 200,
            tolerance: 1e-4,
        }
    }
}

/// One training observation: the predicates that hold, and its category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub predicates: Vec<u32>,
    pub label: bool,
}

/// Weights of a fitted model, indexed `[predicate][category]`, with
/// `category` 0 = non-partition and 1 = partition. `None` marks a pair that
/// was not retained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GisModel {
    pub weights: Vec<[Option<f64>; 2]>,
    pub slack_weight: f64,
    /// Constant total of feature values per (event, category).
    pub correction: u32,
    pub iterations: u32,
    pub converged: bool,
}

/// Training frequency of every (predicate, category) pair.
pub fn empirical_counts(events: &[Event], n_predicates: usize) -> Vec<[u32; 2]> {
    let mut counts = vec![[0u32; 2]; n_predicates];
    for e in events {
        for &p in &e.predicates {
            counts[p as usize][e.label as usize] += 1;
        }
    }
    counts
}

impl GisModel {
    /// Category probabilities `[non-partition, partition]` for a predicate set.
    /// Predicates outside the model are ignored.
    pub fn probabilities(&self, predicates: &[u32]) -> [f64; 2] {
        let mut score = [0.0f64; 2];
        for (c, s) in score.iter_mut().enumerate() {
            let mut n_active = 0usize;
            for &p in predicates {
                if let Some(Some(w)) = self.weights.get(p as usize).map(|w| w[c]) {
                    *s += w;
                    n_active += 1;
                }
            }
            *s += self.slack_weight * (self.correction as f64 - n_active as f64);
        }
        let m = score[0].max(score[1]);
        let z0 = (score[0] - m).exp();
        let z1 = (score[1] - m).exp();
        [z0 / (z0 + z1), z1 / (z0 + z1)]
    }

    /// Model-expected count of every retained pair over `events`.
    pub fn expected_counts(&self, events: &[Event]) -> Vec<[f64; 2]> {
        let mut expected = vec![[0.0f64; 2]; self.weights.len()];
        for e in events {
            let probs = self.probabilities(&e.predicates);
            for &p in &e.predicates {
                for c in 0..2 {
                    if self.weights[p as usize][c].is_some() {
                        expected[p as usize][c] += probs[c];
                    }
                }
            }
        }
        expected
    }
}

pub fn train_gis(events: &[Event], n_predicates: usize, params: &MaxEntParams) -> Result<GisModel> {
    if events.is_empty() {
        return Err(BunsetsuError::invalid("empty training set"));
    }
    if params.cutoff == 0 {
        return Err(BunsetsuError::invalid("cutoff must be at least 1"));
    }
    if let Some(p) = events
        .iter()
        .flat_map(|e| e.predicates.iter())
        .find(|&&p| p as usize >= n_predicates)
    {
        return Err(BunsetsuError::invalid(format!(
            "predicate {p} out of range for {n_predicates} predicates"
        )));
    }

    let counts = empirical_counts(events, n_predicates);
    let mut weights: Vec<[Option<f64>; 2]> = counts
        .iter()
        .map(|c| c.map(|n| (n >= params.cutoff).then_some(0.0)))
        .collect();

    // retained feature ids per (event, category)
    let feature_id = |p: u32, c: usize| 2 * p as usize + c;
    let mut event_features: Vec<[Vec<usize>; 2]> = Vec::with_capacity(events.len());
    let mut max_active = 0;
    for e in events {
        let per_cat = [0, 1].map(|c| {
            e.predicates
                .iter()
                .filter(|&&p| weights[p as usize][c].is_some())
                .map(|&p| feature_id(p, c))
                .collect::<Vec<_>>()
        });
        max_active = max_active.max(per_cat[0].len()).max(per_cat[1].len());
        event_features.push(per_cat);
    }
    let correction = max_active + 1;
    let slack = |feats: &Vec<usize>| (correction - feats.len()) as f64;

    let mut lambda = vec![0.0f64; 2 * n_predicates];
    let mut slack_lambda = 0.0f64;
    let empirical: Vec<f64> = (0..2 * n_predicates)
        .map(|f| counts[f / 2][f % 2] as f64)
        .collect();
    let empirical_slack: f64 = events
        .iter()
        .zip(&event_features)
        .map(|(e, feats)| slack(&feats[e.label as usize]))
        .sum();
    let retained: Vec<usize> = (0..2 * n_predicates)
        .filter(|&f| weights[f / 2][f % 2].is_some())
        .collect();

    let mut expected = vec![0.0f64; 2 * n_predicates];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        expected.iter_mut().for_each(|x| *x = 0.0);
        let mut expected_slack = 0.0;
        for feats in &event_features {
            let score = [0, 1].map(|c| {
                feats[c].iter().map(|&f| lambda[f]).sum::<f64>() + slack_lambda * slack(&feats[c])
            });
            let m = score[0].max(score[1]);
            let z = [(score[0] - m).exp(), (score[1] - m).exp()];
            let norm = z[0] + z[1];
            for c in 0..2 {
                let p = z[c] / norm;
                for &f in &feats[c] {
                    expected[f] += p;
                }
                expected_slack += p * slack(&feats[c]);
            }
        }

        let gap = retained
            .iter()
            .map(|&f| (expected[f] - empirical[f]).abs() / empirical[f])
            .chain(std::iter::once(
                (expected_slack - empirical_slack).abs() / empirical_slack,
            ))
            .fold(0.0f64, f64::max);
        if gap <= params.tolerance {
            converged = true;
            break;
        }
        if iterations >= params.max_iterations {
            break;
        }
        iterations += 1;
        let step = 1.0 / correction as f64;
        for &f in &retained {
            lambda[f] += step * (empirical[f] / expected[f]).ln();
        }
        slack_lambda += step * (empirical_slack / expected_slack).ln();
    }

    for &f in &retained {
        weights[f / 2][f % 2] = Some(lambda[f]);
    }
    Ok(GisModel {
        weights,
        slack_weight: slack_lambda,
        correction: correction as u32,
        iterations,
        converged,
    })
}

/// Maximum-entropy classifier over the 152 instantiated patterns.
#[derive(Clone, Debug)]
pub struct MaxEntModel {
    pub params: MaxEntParams,
    pub default_category: bool,
    /// Pattern vocabulary and counts of the training set.
    table: RuleTable,
    /// Predicate id of each instantiated pattern, per template.
    predicates: Vec<HashMap<CompactKey, u32>>,
    pub gis: GisModel,
}

impl MaxEntModel {
    pub fn train(instances: &[Instance], params: &MaxEntParams) -> Result<Self> {
        let table = build_rule_table(instances)?;
        let (predicates, next) = predicate_index(&table);
        let events: Vec<Event> = (0..instances.len())
            .map(|id| Event {
                predicates: pattern_predicates(&predicates, table.training_codes(id)),
                label: table.labels()[id],
            })
            .collect();
        let gis = train_gis(&events, next as usize, params)?;
        Ok(Self {
            params: *params,
            default_category: table.default_category(),
            table,
            predicates,
            gis,
        })
    }

    pub fn converged(&self) -> bool {
        self.gis.converged
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    pub(crate) fn from_parts(
        params: MaxEntParams,
        table: RuleTable,
        gis: GisModel,
    ) -> Result<Self> {
        let (predicates, next) = predicate_index(&table);
        if next as usize != gis.weights.len() {
            return Err(BunsetsuError::Model(format!(
                "{} weights for {} patterns",
                gis.weights.len(),
                next
            )));
        }
        Ok(Self {
            params,
            default_category: table.default_category(),
            table,
            predicates,
            gis,
        })
    }

    /// Training events in predicate form, for inspecting the fit.
    pub fn training_events(&self) -> Vec<Event> {
        (0..self.table.instances().len())
            .map(|id| Event {
                predicates: pattern_predicates(&self.predicates, self.table.training_codes(id)),
                label: self.table.labels()[id],
            })
            .collect()
    }

    /// `[P(non-partition), P(partition)]`.
    pub fn probabilities(&self, instance: &Instance) -> [f64; 2] {
        let codes = self.table.encode(instance);
        self.gis
            .probabilities(&pattern_predicates(&self.predicates, &codes))
    }

    pub fn predict(&self, instance: &Instance) -> bool {
        let [p_non, p_part] = self.probabilities(instance);
        if p_part > p_non {
            true
        } else if p_non > p_part {
            false
        } else {
            self.default_category
        }
    }
}

/// Numbers every stored pattern, template by template in key order.
fn predicate_index(table: &RuleTable) -> (Vec<HashMap<CompactKey, u32>>, u32) {
    let mut predicates = Vec::with_capacity(templates().len());
    let mut next = 0u32;
    for t in templates() {
        let mut keys: Vec<&CompactKey> = table.rules_of(t.id).map(|(k, _)| k).collect();
        keys.sort_unstable();
        let mut map = HashMap::with_capacity(keys.len());
        for k in keys {
            map.insert(*k, next);
            next += 1;
        }
        predicates.push(map);
    }
    (predicates, next)
}

fn pattern_predicates(predicates: &[HashMap<CompactKey, u32>], codes: &FeatureCodes) -> Vec<u32> {
    templates()
        .iter()
        .filter_map(|t| predicates[t.id].get(&compact_key(t, codes)).copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BoundaryRule, SyntheticConfig};

    fn event(predicates: &[u32], label: bool) -> Event {
        Event {
            predicates: predicates.to_vec(),
            label,
        }
    }

    #[test]
    fn single_predicate_matches_frequencies() {
        // predicate 0: 7 of 10 partition; predicate 1: 2 of 8 partition
        let mut events = Vec::new();
        for i in 0..10 {
            events.push(event(&[0], i < 7));
        }
        for i in 0..8 {
            events.push(event(&[1], i < 2));
        }
        let params = MaxEntParams {
            max_iterations: 10_000,
            tolerance: 1e-9,
            ..Default::default()
        };
        let model = train_gis(&events, 2, &params).unwrap();
        assert!(model.converged);
        assert!((model.probabilities(&[0])[1] - 0.7).abs() < 1e-4);
        assert!((model.probabilities(&[1])[1] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn uniform_model_is_a_tie() {
        let model = GisModel {
            weights: vec![[Some(0.0), Some(0.0)]],
            slack_weight: 0.0,
            correction: 2,
            iterations: 0,
            converged: true,
        };
        assert_eq!(model.probabilities(&[0]), [0.5, 0.5]);
    }

    #[test]
    fn positive_weight_favors_partition() {
        let model = GisModel {
            weights: vec![[None, Some(1.5)]],
            slack_weight: 0.0,
            correction: 2,
            iterations: 0,
            converged: true,
        };
        let p = model.probabilities(&[0]);
        assert!(p[1] > p[0]);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_drops_rare_pairs() {
        let events = vec![event(&[0], true), event(&[0], true), event(&[0], false)];
        let params = MaxEntParams {
            cutoff: 2,
            ..Default::default()
        };
        let model = train_gis(&events, 1, &params).unwrap();
        assert!(model.weights[0][1].is_some());
        assert!(model.weights[0][0].is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(train_gis(&[], 1, &MaxEntParams::default()).is_err());
        assert!(train_gis(&[event(&[3], true)], 1, &MaxEntParams::default()).is_err());
        let zero = MaxEntParams {
            cutoff: 0,
            ..Default::default()
        };
        assert!(train_gis(&[event(&[0], true)], 1, &zero).is_err());
    }

    #[test]
    fn pattern_model_normalizes_and_is_deterministic() {
        let corpus = SyntheticConfig {
            n_sentences: 20,
            rule: BoundaryRule::PosTable {
                partition_rate: 0.5,
                flip_rate: 0.1,
            },
            ..SyntheticConfig::default()
        }
        .generate(9)
        .unwrap();
        let instances = corpus.instances();
        let params = MaxEntParams {
            max_iterations: 30,
            ..Default::default()
        };
        let a = MaxEntModel::train(&instances, &params).unwrap();
        let b = MaxEntModel::train(&instances, &params).unwrap();
        assert_eq!(a.gis, b.gis);
        for inst in &instances {
            let p = a.probabilities(inst);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
        }
    }
}
