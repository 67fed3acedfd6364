//! Fixture builders and brute-force reference implementations shared by the
//! acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeSet;

use bunsetsu::{InfoLevel, Instance, Morpheme, PatternTemplate};

/// A query window with a distinct value in every field.
pub fn query() -> Instance {
    let slot = |tag: &str, sem: &str| {
        Morpheme::new(
            format!("{tag}-word"),
            format!("{tag}-MAJOR"),
            format!("{tag}-minor"),
            Some(sem.to_string()),
        )
        .unwrap()
    };
    Instance {
        far_left: slot("fl", "101"),
        left: slot("l", "102"),
        right: slot("r", "103"),
        far_right: slot("fr", "104"),
        label: None,
    }
}

/// A morpheme sharing the first `depth` of (major, minor, semantic, word)
/// with `q`; every later field gets a value unique to `salt`.
fn agree(q: &Morpheme, depth: usize, salt: usize) -> Morpheme {
    let other = |field: &str| format!("{field}-x{salt}");
    Morpheme::new(
        if depth >= 4 {
            q.word().to_string()
        } else {
            other("w")
        },
        if depth >= 1 {
            q.major_pos().to_string()
        } else {
            other("M")
        },
        if depth >= 2 {
            q.minor_pos().to_string()
        } else {
            other("m")
        },
        Some(if depth >= 3 {
            q.semantic_token().to_string()
        } else {
            other("s")
        }),
    )
    .unwrap()
}

/// Appends `partitions + non_partitions` windows agreeing with [`query`] to
/// the given per-slot depths.
pub fn group(
    depths: [usize; 4],
    partitions: usize,
    non_partitions: usize,
    out: &mut Vec<Instance>,
) {
    let q = query();
    for k in 0..partitions + non_partitions {
        let salt = out.len() + k;
        out.push(Instance {
            far_left: agree(&q.far_left, depths[0], salt),
            left: agree(&q.left, depths[1], salt),
            right: agree(&q.right, depths[2], salt),
            far_right: agree(&q.far_right, depths[3], salt),
            label: Some(k < partitions),
        });
    }
}

pub fn levels_of(label: &str) -> [Option<InfoLevel>; 4] {
    let mut out = [None; 4];
    for (slot, c) in out.iter_mut().zip(label.chars()) {
        *slot = match c {
            'A' => Some(InfoLevel::A),
            'B' => Some(InfoLevel::B),
            'C' => Some(InfoLevel::C),
            'D' => Some(InfoLevel::D),
            _ => None,
        };
    }
    out
}

pub fn template(label: &str) -> &'static PatternTemplate {
    let levels = levels_of(label);
    bunsetsu::patterns::templates()
        .iter()
        .find(|t| t.levels == levels)
        .unwrap_or_else(|| panic!("no template {label}"))
}

// ---------------------------------------------------------------------------
// reference implementations

/// Score of one slot level, straight from the definition.
pub fn slot_value(level: Option<InfoLevel>) -> u64 {
    match level {
        None => 1,
        Some(InfoLevel::A) => 2,
        Some(InfoLevel::B) => 3,
        Some(InfoLevel::C) => 4,
        Some(InfoLevel::D) => 5,
    }
}

pub fn similarity(levels: &[Option<InfoLevel>; 4]) -> u64 {
    slot_value(levels[1]) * slot_value(levels[2]) * 10_000
        + slot_value(levels[0]) * slot_value(levels[3])
}

/// Every template the window scheme admits, as level tuples.
pub fn all_level_tuples() -> BTreeSet<[Option<InfoLevel>; 4]> {
    let outer = [Some(InfoLevel::A), Some(InfoLevel::B)];
    let inner = [
        Some(InfoLevel::A),
        Some(InfoLevel::B),
        Some(InfoLevel::C),
        Some(InfoLevel::D),
    ];
    let mut out = BTreeSet::new();
    let opt_outer: Vec<Option<InfoLevel>> = std::iter::once(None).chain(outer).collect();
    let opt_inner: Vec<Option<InfoLevel>> = std::iter::once(None).chain(inner).collect();
    for &fl in &opt_outer {
        for &l in &opt_inner {
            for &r in &opt_inner {
                for &fr in &opt_outer {
                    // both middle slots: any outer slots; one middle slot: alone
                    let shape_ok = match (l.is_some(), r.is_some()) {
                        (true, true) => true,
                        (true, false) | (false, true) => fl.is_none() && fr.is_none(),
                        (false, false) => false,
                    };
                    if shape_ok {
                        out.insert([fl, l, r, fr]);
                    }
                }
            }
        }
    }
    out
}

fn same_at(a: &Morpheme, b: &Morpheme, level: InfoLevel) -> bool {
    let fa = [a.major_pos(), a.minor_pos(), a.semantic_token(), a.word()];
    let fb = [b.major_pos(), b.minor_pos(), b.semantic_token(), b.word()];
    let n = match level {
        InfoLevel::A => 1,
        InfoLevel::B => 2,
        InfoLevel::C => 3,
        InfoLevel::D => 4,
    };
    fa[..n] == fb[..n]
}

fn matches(levels: &[Option<InfoLevel>; 4], a: &Instance, b: &Instance) -> bool {
    let (sa, sb) = (
        [&a.far_left, &a.left, &a.right, &a.far_right],
        [&b.far_left, &b.left, &b.right, &b.far_right],
    );
    (0..4).all(|k| levels[k].is_none_or(|lv| same_at(sa[k], sb[k], lv)))
}

/// A rule as seen by one query: the training ids its pattern covers.
#[derive(Debug, Clone)]
pub struct OracleRule {
    pub template_id: usize,
    pub similarity: u64,
    pub ids: Vec<usize>,
    pub partition: usize,
    pub non_partition: usize,
}

impl OracleRule {
    pub fn frequency(&self) -> usize {
        self.partition + self.non_partition
    }

    pub fn exclusive(&self) -> bool {
        self.partition == 0 || self.non_partition == 0
    }

    /// Majority share as an unreduced fraction.
    pub fn probability(&self) -> (usize, usize) {
        (self.partition.max(self.non_partition), self.frequency())
    }
}

fn frac_cmp(a: (usize, usize), b: (usize, usize)) -> std::cmp::Ordering {
    (a.0 * b.1).cmp(&(b.0 * a.1))
}

/// Rescans the whole training set for every template.
pub struct Oracle<'a> {
    pub train: &'a [Instance],
    pub default: bool,
}

impl<'a> Oracle<'a> {
    pub fn new(train: &'a [Instance]) -> Self {
        let p = train.iter().filter(|i| i.label == Some(true)).count();
        Self {
            train,
            default: 2 * p >= train.len(),
        }
    }

    pub fn rules(&self, q: &Instance) -> Vec<OracleRule> {
        let mut out = Vec::new();
        for t in bunsetsu::patterns::templates() {
            let ids: Vec<usize> = (0..self.train.len())
                .filter(|&i| matches(&t.levels, q, &self.train[i]))
                .collect();
            if ids.is_empty() {
                continue;
            }
            let partition = ids
                .iter()
                .filter(|&&i| self.train[i].label == Some(true))
                .count();
            out.push(OracleRule {
                template_id: t.id,
                similarity: similarity(&t.levels),
                partition,
                non_partition: ids.len() - partition,
                ids,
            });
        }
        out
    }

    pub fn vote(&self, rules: &[&OracleRule]) -> bool {
        let ids: BTreeSet<usize> = rules.iter().flat_map(|r| r.ids.iter().copied()).collect();
        let p = ids
            .iter()
            .filter(|&&i| self.train[i].label == Some(true))
            .count();
        let n = ids.len() - p;
        match p.cmp(&n) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => self.default,
        }
    }

    fn at_max_probability<'r>(rules: &[&'r OracleRule]) -> Vec<&'r OracleRule> {
        let Some(best) = rules
            .iter()
            .map(|r| r.probability())
            .max_by(|a, b| frac_cmp(*a, *b))
        else {
            return Vec::new();
        };
        rules
            .iter()
            .copied()
            .filter(|r| frac_cmp(r.probability(), best).is_eq())
            .collect()
    }

    pub fn method1(&self, rules: &[OracleRule]) -> bool {
        let all: Vec<&OracleRule> = rules.iter().collect();
        let top = Self::at_max_probability(&all);
        if top.is_empty() {
            return self.default;
        }
        self.vote(&top)
    }

    pub fn method2(&self, rules: &[OracleRule]) -> bool {
        let mut kept: Vec<&OracleRule> = rules.iter().collect();
        if kept.iter().any(|r| r.exclusive() && r.frequency() > 1) {
            kept.retain(|r| !(r.exclusive() && r.frequency() == 1));
        }
        let top = Self::at_max_probability(&kept);
        let Some(best_sim) = top.iter().map(|r| r.similarity).max() else {
            return self.default;
        };
        let finalists: Vec<&OracleRule> = top
            .into_iter()
            .filter(|r| r.similarity == best_sim)
            .collect();
        self.vote(&finalists)
    }

    pub fn has_exclusive_rule(&self, q: &Instance) -> bool {
        self.rules(q).iter().any(OracleRule::exclusive)
    }
}
