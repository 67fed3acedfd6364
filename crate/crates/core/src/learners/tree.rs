//! Gain-ratio decision tree over the twelve categorical window features.
//!
//! Feature values seen fewer than `rare_threshold` times in training are
//! folded into a shared `<OTHERS>` value before induction. Splits are
//! multiway on one feature, and a feature is tested at most once per path.
//! Optional pessimistic pruning replaces a subtree by a leaf when the leaf's
//! estimated error is no worse.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{BunsetsuError, Result};

pub const OTHERS: &str = "<OTHERS>";

pub const FEATURE_NAMES: [&str; 12] = [
    "far-left major POS",
    "far-left minor POS",
    "left major POS",
    "left minor POS",
    "left semantic",
    "left word",
    "right major POS",
    "right minor POS",
    "right semantic",
    "right word",
    "far-right major POS",
    "far-right minor POS",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub rare_threshold: u32,
    /// A split needs at least two branches with this many cases.
    pub min_objects: u32,
    pub prune: bool,
    /// Confidence level of the pessimistic error estimate.
    pub confidence: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            rare_threshold: 10,
            min_objects: 2,
            prune: true,
            confidence: 0.25,
        }
    }
}

/// The twelve feature values of an instance, in [`FEATURE_NAMES`] order.
pub fn feature_values(instance: &Instance) -> [&str; 12] {
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

/// Entropy in bits of a label distribution.
pub fn entropy(counts: [u32; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitScore {
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

/// Information gain and gain ratio of splitting `labels` by `values`.
pub fn split_score<V: Ord>(values: &[V], labels: &[bool]) -> SplitScore {
    let mut total = [0u32; 2];
    let mut branches: BTreeMap<&V, [u32; 2]> = BTreeMap::new();
    for (v, &l) in values.iter().zip(labels) {
        total[l as usize] += 1;
        branches.entry(v).or_default()[l as usize] += 1;
    }
    score_branches(total, branches.values())
}

fn score_branches<'a>(total: [u32; 2], branches: impl Iterator<Item = &'a [u32; 2]>) -> SplitScore {
    let n = (total[0] + total[1]) as f64;
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for b in branches {
        let w = (b[0] + b[1]) as f64 / n;
        if w > 0.0 {
            remainder += w * entropy(*b);
            split_info -= w * w.log2();
        }
    }
    let gain = entropy(total) - remainder;
    SplitScore {
        gain,
        split_info,
        gain_ratio: if split_info > 0.0 {
            gain / split_info
        } else {
            0.0
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        category: bool,
        /// `[non-partition, partition]` training counts.
        counts: [u32; 2],
    },
    Split {
        feature: usize,
        category: bool,
        counts: [u32; 2],
        children: BTreeMap<String, Node>,
    },
}

impl Node {
    pub fn category(&self) -> bool {
        match self {
            Node::Leaf { category, .. } | Node::Split { category, .. } => *category,
        }
    }

    pub fn counts(&self) -> [u32; 2] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => *counts,
        }
    }

    pub fn n_splits(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { children, .. } => {
                1 + children.values().map(Node::n_splits).sum::<usize>()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { children, .. } => {
                1 + children.values().map(Node::depth).max().unwrap_or(0)
            }
        }
    }

    fn errors(&self) -> u32 {
        let c = self.counts();
        if self.category() {
            c[0]
        } else {
            c[1]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub params: TreeParams,
    /// Values kept as themselves, per feature; the rest map to `<OTHERS>`.
    pub kept_values: Vec<BTreeSet<String>>,
    pub root: Node,
    pub default_category: bool,
}

fn majority(counts: [u32; 2], tie: bool) -> bool {
    match counts[1].cmp(&counts[0]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => tie,
    }
}

struct Builder<'a> {
    rows: &'a [[u32; 12]],
    labels: &'a [bool],
    names: &'a [Vec<String>],
    params: &'a TreeParams,
}

impl Builder<'_> {
    fn build(&self, subset: &[usize], used: u16, inherited: bool) -> Node {
        let mut counts = [0u32; 2];
        for &i in subset {
            counts[self.labels[i] as usize] += 1;
        }
        let category = majority(counts, inherited);
        let leaf = Node::Leaf { category, counts };
        if counts[0] == 0 || counts[1] == 0 || subset.len() < 2 * self.params.min_objects as usize {
            return leaf;
        }

        let mut candidates: Vec<(usize, SplitScore)> = Vec::new();
        for f in (0..12).filter(|f| used & (1 << f) == 0) {
            let mut branches: HashMap<u32, [u32; 2]> = HashMap::new();
            for &i in subset {
                branches.entry(self.rows[i][f]).or_default()[self.labels[i] as usize] += 1;
            }
            if branches.len() < 2 {
                continue;
            }
            let big = branches
                .values()
                .filter(|b| b[0] + b[1] >= self.params.min_objects)
                .count();
            if big < 2 {
                continue;
            }
            let mut ordered: Vec<[u32; 2]> = branches.into_values().collect();
            ordered.sort_unstable();
            let score = score_branches(counts, ordered.iter());
            if score.gain > 1e-12 {
                candidates.push((f, score));
            }
        }
        if candidates.is_empty() {
            return leaf;
        }

        // best gain ratio among splits with at least average gain
        let avg_gain =
            candidates.iter().map(|(_, s)| s.gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<(usize, SplitScore)> = None;
        for &(f, s) in &candidates {
            if s.gain + 1e-12 < avg_gain {
                continue;
            }
            if best.is_none_or(|(_, b)| s.gain_ratio > b.gain_ratio + 1e-12) {
                best = Some((f, s));
            }
        }
        let (feature, _) = best.expect("the highest-gain candidate is always eligible");

        let mut parts: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &i in subset {
            parts.entry(self.rows[i][feature]).or_default().push(i);
        }
        let children = parts
            .into_iter()
            .map(|(v, part)| {
                let child = self.build(&part, used | (1 << feature), category);
                (self.names[feature][v as usize].clone(), child)
            })
            .collect();
        let node = Node::Split {
            feature,
            category,
            counts,
            children,
        };
        if self.params.prune {
            prune(node, self.params.confidence)
        } else {
            node
        }
    }
}

/// Normal deviates for upper-tail probabilities, interpolated as in C4.5.
fn confidence_deviate(cf: f64) -> f64 {
    const VAL: [f64; 9] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00];
    const DEV: [f64; 9] = [4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00];
    let mut i = 0;
    while i + 1 < VAL.len() && cf > VAL[i] {
        i += 1;
    }
    if i == 0 {
        return DEV[0];
    }
    DEV[i - 1] + (DEV[i] - DEV[i - 1]) * (cf - VAL[i - 1]) / (VAL[i] - VAL[i - 1])
}

/// Extra errors beyond `e` observed among `n` cases at the upper confidence
/// limit.
pub fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    if e < 1e-6 {
        n * (1.0 - (cf.ln() / n).exp())
    } else if e < 0.9999 {
        let base = n * (1.0 - (cf.ln() / n).exp());
        base + e * (added_errors(n, 1.0, cf) - base)
    } else if e + 0.5 >= n {
        0.67 * (n - e)
    } else {
        let coeff = confidence_deviate(cf).powi(2);
        let upper = (e
            + 0.5
            + coeff / 2.0
            + (coeff * ((e + 0.5) * (1.0 - (e + 0.5) / n) + coeff / 4.0)).sqrt())
            / (n + coeff);
        n * upper - e
    }
}

fn estimated_errors(node: &Node, cf: f64) -> f64 {
    match node {
        Node::Leaf { counts, .. } => {
            let n = (counts[0] + counts[1]) as f64;
            let e = node.errors() as f64;
            e + added_errors(n, e, cf)
        }
        Node::Split { children, .. } => children.values().map(|c| estimated_errors(c, cf)).sum(),
    }
}

/// Children are already pruned when this runs.
fn prune(node: Node, cf: f64) -> Node {
    let Node::Split {
        category, counts, ..
    } = &node
    else {
        return node;
    };
    let leaf = Node::Leaf {
        category: *category,
        counts: *counts,
    };
    if estimated_errors(&leaf, cf) <= estimated_errors(&node, cf) + 0.1 {
        leaf
    } else {
        node
    }
}

impl DecisionTreeModel {
    pub fn train(instances: &[Instance], params: &TreeParams) -> Result<Self> {
        if instances.is_empty() {
            return Err(BunsetsuError::invalid("empty training set"));
        }
        if params.rare_threshold == 0 || params.min_objects == 0 {
            return Err(BunsetsuError::invalid(
                "rare_threshold and min_objects must be at least 1",
            ));
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

        let mut freq: Vec<HashMap<&str, u32>> = vec![HashMap::new(); 12];
        for inst in instances {
            for (f, v) in feature_values(inst).into_iter().enumerate() {
                *freq[f].entry(v).or_default() += 1;
            }
        }
        let kept_values: Vec<BTreeSet<String>> = freq
            .iter()
            .map(|m| {
                m.iter()
                    .filter(|(_, &n)| n >= params.rare_threshold)
                    .map(|(v, _)| v.to_string())
                    .collect()
            })
            .collect();

        // value ids: kept values in sorted order, then OTHERS
        let names: Vec<Vec<String>> = kept_values
            .iter()
            .map(|kept| {
                kept.iter()
                    .cloned()
                    .chain(std::iter::once(OTHERS.to_string()))
                    .collect()
            })
            .collect();
        let ids: Vec<HashMap<&str, u32>> = names
            .iter()
            .map(|vals| {
                vals.iter()
                    .enumerate()
                    .map(|(i, v)| (v.as_str(), i as u32))
                    .collect()
            })
            .collect();
        let rows: Vec<[u32; 12]> = instances
            .iter()
            .map(|inst| {
                let vals = feature_values(inst);
                std::array::from_fn(|f| {
                    ids[f]
                        .get(vals[f])
                        .copied()
                        .unwrap_or((names[f].len() - 1) as u32)
                })
            })
            .collect();

        let partitions = labels.iter().filter(|&&l| l).count();
        let default_category = 2 * partitions >= labels.len();
        let builder = Builder {
            rows: &rows,
            labels: &labels,
            names: &names,
            params,
        };
        let all: Vec<usize> = (0..instances.len()).collect();
        let root = builder.build(&all, 0, default_category);
        Ok(Self {
            params: *params,
            kept_values,
            root,
            default_category,
        })
    }

    /// Feature values after rare-value folding.
    pub fn bucketed_values<'a>(&self, instance: &'a Instance) -> [&'a str; 12] {
        let vals = feature_values(instance);
        std::array::from_fn(|f| {
            if self.kept_values[f].contains(vals[f]) {
                vals[f]
            } else {
                OTHERS
            }
        })
    }

    pub fn predict(&self, instance: &Instance) -> bool {
        let vals = self.bucketed_values(instance);
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { category, .. } => return *category,
                Node::Split {
                    feature,
                    category,
                    children,
                    ..
                } => {
                    match children
                        .get(vals[*feature])
                        .or_else(|| children.get(OTHERS))
                    {
                        Some(child) => node = child,
                        None => return *category,
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Morpheme;

    fn m(word: &str, major: &str) -> Morpheme {
        Morpheme::new(word, major, "x", None).unwrap()
    }

    fn inst(left_major: &str, right_word: &str, label: bool) -> Instance {
        Instance {
            far_left: m("a", "N"),
            left: m("b", left_major),
            right: m(right_word, "V"),
            far_right: m("d", "S"),
            label: Some(label),
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy([5, 5]), 1.0);
        assert_eq!(entropy([4, 0]), 0.0);
        assert!((entropy([1, 3]) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn c45_added_errors() {
        // zero observed errors: n * (1 - cf^(1/n))
        assert!((added_errors(6.0, 0.0, 0.25) - 1.237_8).abs() < 1e-3);
        assert!((added_errors(9.0, 0.0, 0.25) - 1.284_8).abs() < 1e-3);
        assert!((added_errors(1.0, 0.0, 0.25) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unseen_value_without_others_branch_uses_node_majority() {
        let mut data = Vec::new();
        for _ in 0..6 {
            data.push(inst("Particle", "r", true));
            data.push(inst("Noun", "r", false));
            data.push(inst("Noun", "r", false));
        }
        let params = TreeParams {
            rare_threshold: 1,
            prune: false,
            ..Default::default()
        };
        let model = DecisionTreeModel::train(&data, &params).unwrap();
        assert_eq!(model.root.n_splits(), 1);
        // "Verb" is bucketed to OTHERS, which has no branch: root majority
        let q = inst("Verb", "r", true);
        assert!(!model.predict(&q));
    }

    #[test]
    fn rare_values_fold_into_others() {
        let mut data = Vec::new();
        for i in 0..30 {
            data.push(inst("Particle", &format!("w{i}"), true));
            data.push(inst("Noun", &format!("v{i}"), false));
        }
        let model = DecisionTreeModel::train(&data, &TreeParams::default()).unwrap();
        assert!(model.kept_values[9].is_empty());
        assert_eq!(model.bucketed_values(&data[0])[9], OTHERS);
        assert_eq!(model.bucketed_values(&data[0])[2], "Particle");
    }

    #[test]
    fn rejects_empty_and_unlabeled() {
        assert!(DecisionTreeModel::train(&[], &TreeParams::default()).is_err());
        let mut i = inst("N", "r", true);
        i.label = None;
        assert!(DecisionTreeModel::train(&[i], &TreeParams::default()).is_err());
    }
}
