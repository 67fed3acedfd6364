//! Predictors that read the shared [`RuleTable`]: the example-based method,
//! the decision list, and the two category-exclusive-rule methods.

use std::cmp::Ordering;

use crate::corpus::Instance;
use crate::patterns::{templates, PatternKey};
use crate::rulebase::{FeatureCodes, MatchedRule, RuleStats, RuleTable};

/// Most similar matched pattern wins; examples of all patterns at that
/// similarity vote when several share it.
pub fn predict_example_based(table: &RuleTable, instance: &Instance) -> bool {
    example_based_codes(table, &table.encode(instance))
}

pub(crate) fn example_based_codes(table: &RuleTable, codes: &FeatureCodes) -> bool {
    let rules = table.applicable_rules_for_codes(codes);
    let Some(best) = rules.iter().map(|r| r.similarity).max() else {
        return table.default_category();
    };
    table.union_vote(rules.iter().filter(|r| r.similarity == best))
}

/// One ranked rule of the decision list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionListEntry {
    pub key: PatternKey,
    pub category: bool,
    /// Occurrences carrying `category`.
    pub support: u32,
    pub frequency: u32,
}

impl DecisionListEntry {
    pub fn probability(&self) -> f64 {
        self.support as f64 / self.frequency as f64
    }
}

/// Probability descending, then frequency descending, then template id.
fn rank(
    a_stats: &RuleStats,
    a_template: usize,
    b_stats: &RuleStats,
    b_template: usize,
) -> Ordering {
    b_stats
        .cmp_probability(a_stats)
        .then(b_stats.frequency().cmp(&a_stats.frequency()))
        .then(a_template.cmp(&b_template))
}

/// The full ranked list. Entries tied on probability, frequency and template
/// are ordered by their key tokens.
pub fn decision_list(table: &RuleTable) -> Vec<DecisionListEntry> {
    let default = table.default_category();
    let mut rows: Vec<(&RuleStats, PatternKey)> = templates()
        .iter()
        .flat_map(|t| {
            table
                .rules_of(t.id)
                .map(move |(key, stats)| (stats, table.pattern_key(t.id, key)))
        })
        .collect();
    rows.sort_by(|(sa, ka), (sb, kb)| {
        rank(sa, ka.template_id, sb, kb.template_id).then_with(|| ka.tokens.cmp(&kb.tokens))
    });
    rows.into_iter()
        .map(|(stats, key)| {
            let category = stats.majority(default);
            DecisionListEntry {
                key,
                category,
                support: if category {
                    stats.count_partition
                } else {
                    stats.count_non_partition
                },
                frequency: stats.frequency(),
            }
        })
        .collect()
}

/// Category of the first rule in list order that applies.
///
/// At most one key per template can apply, so the token tie-break of
/// [`decision_list`] never decides between applicable rules.
pub fn predict_decision_list(table: &RuleTable, instance: &Instance) -> bool {
    decision_list_codes(table, &table.encode(instance))
}

pub(crate) fn decision_list_codes(table: &RuleTable, codes: &FeatureCodes) -> bool {
    table
        .applicable_rules_for_codes(codes)
        .iter()
        .min_by(|a, b| rank(a.stats, a.template_id, b.stats, b.template_id))
        .map_or(table.default_category(), |r| {
            r.stats.majority(table.default_category())
        })
}

fn at_max_probability<'a>(rules: &'a [MatchedRule<'a>]) -> Vec<&'a MatchedRule<'a>> {
    let Some(best) = rules.iter().max_by(|a, b| a.stats.cmp_probability(b.stats)) else {
        return Vec::new();
    };
    rules
        .iter()
        .filter(|r| r.stats.cmp_probability(best.stats) == Ordering::Equal)
        .collect()
}

/// Gold-label majority over every example covered by the applicable rules
/// of maximum probability.
pub fn predict_method1(table: &RuleTable, instance: &Instance) -> bool {
    method1_codes(table, &table.encode(instance))
}

pub(crate) fn method1_codes(table: &RuleTable, codes: &FeatureCodes) -> bool {
    let rules = table.applicable_rules_for_codes(codes);
    let top = at_max_probability(&rules);
    if top.is_empty() {
        return table.default_category();
    }
    table.union_vote(top)
}

/// Like method 1, but rules of maximum probability are narrowed to those of
/// maximum similarity first. Exclusive rules seen once are dropped whenever an
/// exclusive rule seen more than once applies.
pub fn predict_method2(table: &RuleTable, instance: &Instance) -> bool {
    method2_codes(table, &table.encode(instance))
}

pub(crate) fn method2_codes(table: &RuleTable, codes: &FeatureCodes) -> bool {
    let mut rules = table.applicable_rules_for_codes(codes);
    if rules
        .iter()
        .any(|r| r.stats.is_exclusive() && r.stats.frequency() > 1)
    {
        rules.retain(|r| !(r.stats.is_exclusive() && r.stats.frequency() == 1));
        debug_assert!(!rules.is_empty());
    }
    let top = at_max_probability(&rules);
    let Some(best) = top.iter().map(|r| r.similarity).max() else {
        return table.default_category();
    };
    let finalists: Vec<_> = top.into_iter().filter(|r| r.similarity == best).collect();
    if let [only] = finalists.as_slice() {
        return only.stats.majority(table.default_category());
    }
    table.union_vote(finalists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BoundaryRule, SyntheticConfig};
    use crate::rulebase::build_rule_table;

    fn noisy(seed: u64) -> Vec<Instance> {
        SyntheticConfig {
            n_sentences: 40,
            n_words: 15,
            rule: BoundaryRule::PosTable {
                partition_rate: 0.5,
                flip_rate: 0.15,
            },
            ..SyntheticConfig::default()
        }
        .generate(seed)
        .unwrap()
        .instances()
    }

    #[test]
    fn list_is_sorted() {
        let table = build_rule_table(&noisy(1)).unwrap();
        let list = decision_list(&table);
        let total: usize = templates().iter().map(|t| table.n_keys(t.id)).sum();
        assert_eq!(list.len(), total);
        for w in list.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let lhs = a.support as u64 * b.frequency as u64;
            let rhs = b.support as u64 * a.frequency as u64;
            assert!(lhs > rhs || (lhs == rhs && a.frequency >= b.frequency));
        }
    }

    #[test]
    fn shortcut_matches_linear_scan() {
        let instances = noisy(2);
        let table = build_rule_table(&instances[..200]).unwrap();
        let list = decision_list(&table);
        for inst in &instances[200..] {
            let scanned = list
                .iter()
                .find(|e| {
                    crate::patterns::instantiate(&templates()[e.key.template_id], inst) == e.key
                })
                .map_or(table.default_category(), |e| e.category);
            assert_eq!(predict_decision_list(&table, inst), scanned);
        }
    }

    #[test]
    fn method2_reduces_to_method1_with_single_similarity() {
        let instances = noisy(3);
        let table = build_rule_table(&instances[..300]).unwrap();
        let mut checked = 0;
        for inst in &instances[300..] {
            let rules = table.applicable_rules(inst);
            let has_multi_exclusive = rules
                .iter()
                .any(|r| r.stats.is_exclusive() && r.stats.frequency() > 1);
            let has_single_exclusive = rules
                .iter()
                .any(|r| r.stats.is_exclusive() && r.stats.frequency() == 1);
            let top = at_max_probability(&rules);
            let same_sim = top.windows(2).all(|w| w[0].similarity == w[1].similarity);
            if same_sim && !(has_multi_exclusive && has_single_exclusive) {
                checked += 1;
                assert_eq!(predict_method2(&table, inst), predict_method1(&table, inst));
            }
        }
        assert!(checked > 0);
    }
}
