//! Per-pattern category counts and covered-example indexes.
//!
//! Every training instance instantiates each of the 152 templates exactly
//! once. Keys are stored in a compact interned form; [`PatternKey`] is the
//! readable equivalent and converts both ways.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::corpus::Instance;
use crate::error::{BunsetsuError, Result};
use crate::patterns::{templates, PatternKey, PatternTemplate, N_TEMPLATES};

/// Interned field codes of one instance: far left (major, minor), left (major,
/// minor, semantic, word), right (same), far right (major, minor).
pub type FeatureCodes = [u32; 12];

/// Interned rule key; positions the template does not consult hold [`UNUSED`].
pub type CompactKey = [u32; 12];

pub const UNUSED: u32 = u32::MAX;
/// Code of a string never seen in training. Never part of a stored key.
pub const UNKNOWN: u32 = u32::MAX - 1;

const SLOT_OFFSETS: [usize; 4] = [0, 2, 6, 10];

/// String interner shared by all fields; slot position keeps fields apart.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    strings: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }

    pub fn get(&self, s: &str) -> u32 {
        self.ids.get(s).copied().unwrap_or(UNKNOWN)
    }

    pub fn resolve(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

fn fields(instance: &Instance) -> [&str; 12] {
    let [fl, l, r, fr] = instance.slots();
    [
        fl.major_pos(),
        fl.minor_pos(),
        l.major_pos(),
        l.minor_pos(),
        l.semantic_token(),
        l.word(),
        r.major_pos(),
        r.minor_pos(),
        r.semantic_token(),
        r.word(),
        fr.major_pos(),
        fr.minor_pos(),
    ]
}

pub fn compact_key(template: &PatternTemplate, codes: &FeatureCodes) -> CompactKey {
    let mut key = [UNUSED; 12];
    for (slot, level) in template.levels.iter().enumerate() {
        if let Some(level) = level {
            let start = SLOT_OFFSETS[slot];
            let end = start + level.width();
            key[start..end].copy_from_slice(&codes[start..end]);
        }
    }
    key
}

/// Counts and covered examples of one instantiated pattern.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleStats {
    pub count_partition: u32,
    pub count_non_partition: u32,
    /// Sorted indices into the training instances.
    pub example_ids: Vec<u32>,
}

impl RuleStats {
    /// Number of training occurrences.
    pub fn frequency(&self) -> u32 {
        self.count_partition + self.count_non_partition
    }

    fn majority_count(&self) -> u32 {
        self.count_partition.max(self.count_non_partition)
    }

    /// Majority share, in `[0.5, 1]`.
    pub fn probability(&self) -> f64 {
        self.majority_count() as f64 / self.frequency() as f64
    }

    /// Exact comparison of [`probability`](Self::probability) values.
    pub fn cmp_probability(&self, other: &RuleStats) -> Ordering {
        let lhs = self.majority_count() as u64 * other.frequency() as u64;
        let rhs = other.majority_count() as u64 * self.frequency() as u64;
        lhs.cmp(&rhs)
    }

    /// All occurrences share one category.
    pub fn is_exclusive(&self) -> bool {
        self.count_partition == 0 || self.count_non_partition == 0
    }

    pub fn majority(&self, default_category: bool) -> bool {
        match self.count_partition.cmp(&self.count_non_partition) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => default_category,
        }
    }
}

/// A rule that applies to a queried instance.
#[derive(Clone, Copy, Debug)]
pub struct MatchedRule<'a> {
    pub template_id: usize,
    pub similarity: u32,
    pub key: CompactKey,
    pub stats: &'a RuleStats,
}

#[derive(Clone, Debug)]
pub struct RuleTable {
    vocab: Vocabulary,
    instances: Vec<Instance>,
    labels: Vec<bool>,
    codes: Vec<FeatureCodes>,
    rules: Vec<HashMap<CompactKey, RuleStats>>,
    default_category: bool,
}

/// Builds the table over labeled training instances.
pub fn build_rule_table(instances: &[Instance]) -> Result<RuleTable> {
    if instances.is_empty() {
        return Err(BunsetsuError::invalid("empty training set"));
    }
    let labels = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            inst.label.ok_or_else(|| {
                BunsetsuError::invalid(format!("training instance {i} is unlabeled"))
            })
        })
        .collect::<Result<Vec<bool>>>()?;

    let mut vocab = Vocabulary::default();
    let codes: Vec<FeatureCodes> = instances
        .iter()
        .map(|inst| fields(inst).map(|s| vocab.intern(s)))
        .collect();

    let mut rules: Vec<HashMap<CompactKey, RuleStats>> = vec![HashMap::new(); N_TEMPLATES];
    for template in templates() {
        let map = &mut rules[template.id];
        for (id, (c, &label)) in codes.iter().zip(&labels).enumerate() {
            let stats = map.entry(compact_key(template, c)).or_default();
            if label {
                stats.count_partition += 1;
            } else {
                stats.count_non_partition += 1;
            }
            stats.example_ids.push(id as u32);
        }
    }

    let partitions = labels.iter().filter(|&&l| l).count();
    Ok(RuleTable {
        vocab,
        instances: instances.to_vec(),
        default_category: 2 * partitions >= labels.len(),
        labels,
        codes,
        rules,
    })
}

impl RuleTable {
    pub fn default_category(&self) -> bool {
        self.default_category
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n_keys(&self, template_id: usize) -> usize {
        self.rules[template_id].len()
    }

    /// Stored keys of one template with their statistics, in arbitrary order.
    pub fn rules_of(&self, template_id: usize) -> impl Iterator<Item = (&CompactKey, &RuleStats)> {
        self.rules[template_id].iter()
    }

    /// Field codes of an instance under this table's vocabulary.
    pub fn encode(&self, instance: &Instance) -> FeatureCodes {
        fields(instance).map(|s| self.vocab.get(s))
    }

    /// Codes of training instance `id`.
    pub fn training_codes(&self, id: usize) -> &FeatureCodes {
        &self.codes[id]
    }

    pub fn lookup(&self, key: &PatternKey) -> Option<&RuleStats> {
        let template = templates().get(key.template_id)?;
        let mut compact = [UNUSED; 12];
        let mut tokens = key.tokens.iter();
        for (slot, level) in template.levels.iter().enumerate() {
            if let Some(level) = level {
                let start = SLOT_OFFSETS[slot];
                for code in &mut compact[start..start + level.width()] {
                    *code = self.vocab.get(tokens.next()?);
                }
            }
        }
        if tokens.next().is_some() {
            return None;
        }
        self.rules[key.template_id].get(&compact)
    }

    /// Readable form of a stored key.
    pub fn pattern_key(&self, template_id: usize, key: &CompactKey) -> PatternKey {
        PatternKey {
            template_id,
            tokens: key
                .iter()
                .filter(|&&c| c != UNUSED)
                .map(|&c| self.vocab.resolve(c).to_string())
                .collect(),
        }
    }

    pub fn applicable_rules_for_codes(&self, codes: &FeatureCodes) -> Vec<MatchedRule<'_>> {
        templates()
            .iter()
            .filter_map(|t| {
                let key = compact_key(t, codes);
                self.rules[t.id].get(&key).map(|stats| MatchedRule {
                    template_id: t.id,
                    similarity: t.similarity,
                    key,
                    stats,
                })
            })
            .collect()
    }

    /// Rules whose key the instance instantiates, ordered by template id.
    pub fn applicable_rules(&self, instance: &Instance) -> Vec<MatchedRule<'_>> {
        self.applicable_rules_for_codes(&self.encode(instance))
    }

    /// Majority gold label over the deduplicated union of the rules' examples;
    /// ties go to the default category.
    pub fn union_vote<'a>(&self, rules: impl IntoIterator<Item = &'a MatchedRule<'a>>) -> bool {
        let mut ids: Vec<u32> = rules
            .into_iter()
            .flat_map(|r| r.stats.example_ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let partitions = ids.iter().filter(|&&id| self.labels[id as usize]).count();
        match (2 * partitions).cmp(&ids.len()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.default_category,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

/// How many instances have at least one applicable category-exclusive rule.
pub fn exclusive_coverage(table: &RuleTable, instances: &[Instance]) -> Coverage {
    let covered = instances
        .iter()
        .filter(|inst| {
            table
                .applicable_rules(inst)
                .iter()
                .any(|r| r.stats.is_exclusive())
        })
        .count();
    Coverage {
        covered,
        total: instances.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BoundaryRule, Morpheme, SyntheticConfig};
    use crate::patterns::instantiate;

    fn synthetic(seed: u64) -> Vec<Instance> {
        SyntheticConfig {
            n_sentences: 30,
            n_words: 20,
            rule: BoundaryRule::PosTable {
                partition_rate: 0.5,
                flip_rate: 0.2,
            },
            ..SyntheticConfig::default()
        }
        .generate(seed)
        .unwrap()
        .instances()
    }

    #[test]
    fn probability_of_ten_of_thirteen() {
        let s = RuleStats {
            count_partition: 10,
            count_non_partition: 3,
            example_ids: (0..13).collect(),
        };
        assert_eq!(format!("{:.1}", 100.0 * s.probability()), "76.9");
        assert!(s.majority(false));
        assert_eq!(s.frequency(), 13);
        let t = RuleStats {
            count_partition: 90,
            count_non_partition: 33,
            example_ids: (0..123).collect(),
        };
        assert_eq!(s.cmp_probability(&t), Ordering::Greater);
    }

    #[test]
    fn tie_uses_default() {
        let s = RuleStats {
            count_partition: 2,
            count_non_partition: 2,
            example_ids: vec![0, 1, 2, 3],
        };
        assert_eq!(s.probability(), 0.5);
        assert!(s.majority(true));
        assert!(!s.majority(false));
    }

    #[test]
    fn single_instance_table() {
        let inst = synthetic(1).remove(0);
        let table = build_rule_table(std::slice::from_ref(&inst)).unwrap();
        for t in templates() {
            assert_eq!(table.n_keys(t.id), 1);
            let (_, stats) = table.rules_of(t.id).next().unwrap();
            assert_eq!(stats.example_ids, [0]);
        }
        assert_eq!(table.applicable_rules(&inst).len(), 152);
    }

    #[test]
    fn counts_partition_the_instances() {
        let instances = synthetic(2);
        let table = build_rule_table(&instances).unwrap();
        for t in templates() {
            let total: u32 = table.rules_of(t.id).map(|(_, s)| s.frequency()).sum();
            assert_eq!(total as usize, instances.len());
            for (key, stats) in table.rules_of(t.id) {
                assert_eq!(stats.frequency() as usize, stats.example_ids.len());
                assert!(stats.probability() >= 0.5);
                assert_eq!(stats.probability() == 1.0, stats.is_exclusive());
                let readable = table.pattern_key(t.id, key);
                for &id in &stats.example_ids {
                    assert_eq!(instantiate(t, &instances[id as usize]), readable);
                }
                assert_eq!(table.lookup(&readable), Some(stats));
            }
        }
    }

    #[test]
    fn every_training_instance_finds_itself() {
        let instances = synthetic(3);
        let table = build_rule_table(&instances).unwrap();
        for (i, inst) in instances.iter().enumerate() {
            let rules = table.applicable_rules(inst);
            assert_eq!(rules.len(), 152);
            assert!(rules
                .iter()
                .all(|r| r.stats.example_ids.binary_search(&(i as u32)).is_ok()));
        }
    }

    #[test]
    fn unseen_left_pos_matches_no_left_only_rule() {
        let instances = synthetic(4);
        let table = build_rule_table(&instances).unwrap();
        let mut query = instances[0].clone();
        query.left = Morpheme::new("zzz", "NeverSeen", "m0", None).unwrap();
        let rules = table.applicable_rules(&query);
        assert!(rules
            .iter()
            .all(|r| templates()[r.template_id].left().is_none()));
        assert!(rules.len() == 4);
    }

    #[test]
    fn rejects_bad_training_sets() {
        assert!(build_rule_table(&[]).is_err());
        let mut inst = synthetic(5).remove(0);
        inst.label = None;
        assert!(build_rule_table(&[inst]).is_err());
    }

    #[test]
    fn default_category_tie_is_partition() {
        let mut instances = synthetic(6);
        instances.truncate(2);
        instances[0].label = Some(true);
        instances[1].label = Some(false);
        assert!(build_rule_table(&instances).unwrap().default_category());
    }

    #[test]
    fn coverage_of_unmatched_instance() {
        let instances = synthetic(7);
        let table = build_rule_table(&instances).unwrap();
        let alien = Morpheme::new("x", "Alien", "Alien", None).unwrap();
        let query = Instance {
            far_left: alien.clone(),
            left: alien.clone(),
            right: alien.clone(),
            far_right: alien,
            label: None,
        };
        assert!(table.applicable_rules(&query).is_empty());
        let cov = exclusive_coverage(&table, &[query]);
        assert_eq!((cov.covered, cov.total), (0, 1));
    }
}
