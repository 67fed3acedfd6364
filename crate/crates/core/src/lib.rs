//! Chunk-boundary (bunsetsu) identification between adjacent morphemes.
//!
//! Every space between two tagged morphemes is classified as partition or
//! non-partition from the two morphemes on each side. Six methods share one
//! lattice of 152 pattern templates over that window:
//!
//! * a gain-ratio decision tree over the twelve raw window features,
//! * a maximum-entropy model whose features are the instantiated patterns,
//! * an example-based method ranking patterns by similarity,
//! * a decision list ranked by rule probability and frequency,
//! * method 1, which pools the examples of every maximum-probability rule,
//! * method 2, which narrows those rules by similarity and drops
//!   category-exclusive rules seen only once.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod learners;
pub mod model;
pub mod patterns;
pub mod rulebase;

pub use corpus::{
    extract_instances, parse_corpus, write_corpus, Corpus, Instance, Morpheme, Sentence,
};
pub use error::{BunsetsuError, Result};
pub use eval::{run_experiment, score, EvalReport, ExperimentTable, Split};
pub use learners::{Learner, MethodKind, TrainParams};
pub use patterns::{
    enumerate_templates, instantiate, project, InfoLevel, PatternKey, PatternTemplate,
};
pub use rulebase::{build_rule_table, exclusive_coverage, RuleStats, RuleTable};
