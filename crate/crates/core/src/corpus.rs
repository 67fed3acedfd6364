//! Tagged corpora and the per-space classification instances cut from them.
//!
//! The on-disk format is line oriented UTF-8:
//!
//! ```text
//! bun  Noun  NormalNoun  NONE
//! *
//! wo  Particle  CaseParticle  NONE
//! kugiru  Verb  NormalForm  217
//! *
//! .  Symbol  Punctuation  NONE
//!
//! ```
//!
//! Each morpheme line carries `word`, `major_pos`, `minor_pos` and `semantic`
//! separated by tabs, with `NONE` for a morpheme that has no semantic code. A
//! line holding only `*` inserts a partition mark in the space that follows
//! it, and a blank line terminates the sentence.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BunsetsuError, Result};

/// Semantic token used when a morpheme has no dictionary entry.
pub const NONE_TOKEN: &str = "NONE";
/// Field value of every slot of the sentinel before the first morpheme.
pub const BOS_TOKEN: &str = "<BOS>";
/// Field value of every slot of the sentinel after the last morpheme.
pub const EOS_TOKEN: &str = "<EOS>";
/// Partition line in the corpus format.
pub const BOUNDARY_LINE: &str = "*";

/// One tagged token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Morpheme {
    word: String,
    major_pos: String,
    minor_pos: String,
    semantic: Option<String>,
}

fn check_field(name: &str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Err(BunsetsuError::invalid(format!("{name} is empty")));
    }
    if value.contains(['\t', '\n', '\r']) {
        return Err(BunsetsuError::invalid(format!(
            "{name} {value:?} contains a tab or line break"
        )));
    }
    if value == BOS_TOKEN || value == EOS_TOKEN {
        return Err(BunsetsuError::invalid(format!(
            "{name} uses the reserved sentinel token {value}"
        )));
    }
    Ok(())
}

impl Morpheme {
    pub fn new(
        word: impl Into<String>,
        major_pos: impl Into<String>,
        minor_pos: impl Into<String>,
        semantic: Option<String>,
    ) -> Result<Self> {
        let m = Self {
            word: word.into(),
            major_pos: major_pos.into(),
            minor_pos: minor_pos.into(),
            semantic,
        };
        check_field("word", &m.word)?;
        check_field("major POS", &m.major_pos)?;
        check_field("minor POS", &m.minor_pos)?;
        if let Some(code) = &m.semantic {
            check_field("semantic code", code)?;
            if code == NONE_TOKEN {
                return Err(BunsetsuError::invalid(
                    "semantic code NONE is reserved for a missing code",
                ));
            }
        }
        Ok(m)
    }

    fn sentinel(token: &str) -> Self {
        Self {
            word: token.to_string(),
            major_pos: token.to_string(),
            minor_pos: token.to_string(),
            semantic: Some(token.to_string()),
        }
    }

    /// The sentinel standing in for positions before the first morpheme.
    pub fn bos() -> Self {
        Self::sentinel(BOS_TOKEN)
    }

    /// The sentinel standing in for positions after the last morpheme.
    pub fn eos() -> Self {
        Self::sentinel(EOS_TOKEN)
    }

    pub fn is_sentinel(&self) -> bool {
        self.word == BOS_TOKEN || self.word == EOS_TOKEN
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn major_pos(&self) -> &str {
        &self.major_pos
    }

    pub fn minor_pos(&self) -> &str {
        &self.minor_pos
    }

    pub fn semantic(&self) -> Option<&str> {
        self.semantic.as_deref()
    }

    /// The semantic code, or `NONE` when the morpheme has none.
    pub fn semantic_token(&self) -> &str {
        self.semantic.as_deref().unwrap_or(NONE_TOKEN)
    }
}

impl fmt::Display for Morpheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.word,
            self.major_pos,
            self.minor_pos,
            self.semantic_token()
        )
    }
}

/// A morpheme sequence and the partition flags of the spaces between them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    morphemes: Vec<Morpheme>,
    boundaries: Vec<bool>,
}

impl Sentence {
    pub fn new(morphemes: Vec<Morpheme>, boundaries: Vec<bool>) -> Result<Self> {
        if morphemes.is_empty() {
            return Err(BunsetsuError::invalid("sentence has no morphemes"));
        }
        if boundaries.len() + 1 != morphemes.len() {
            return Err(BunsetsuError::invalid(format!(
                "{} morphemes need {} boundary flags, got {}",
                morphemes.len(),
                morphemes.len() - 1,
                boundaries.len()
            )));
        }
        Ok(Self {
            morphemes,
            boundaries,
        })
    }

    /// A sentence with every space unmarked, for input awaiting prediction.
    pub fn unmarked(morphemes: Vec<Morpheme>) -> Result<Self> {
        let n = morphemes.len().saturating_sub(1);
        Self::new(morphemes, vec![false; n])
    }

    pub fn morphemes(&self) -> &[Morpheme] {
        &self.morphemes
    }

    pub fn boundaries(&self) -> &[bool] {
        &self.boundaries
    }

    pub fn n_spaces(&self) -> usize {
        self.boundaries.len()
    }

    /// Same morphemes, new partition flags.
    pub fn with_boundaries(&self, boundaries: Vec<bool>) -> Result<Self> {
        Self::new(self.morphemes.clone(), boundaries)
    }
}

/// The four-morpheme window around one space, with its gold label if known.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    pub far_left: Morpheme,
    pub left: Morpheme,
    pub right: Morpheme,
    pub far_right: Morpheme,
    pub label: Option<bool>,
}

impl Instance {
    pub fn slots(&self) -> [&Morpheme; 4] {
        [&self.far_left, &self.left, &self.right, &self.far_right]
    }
}

/// One instance per space, in order, padded with `BOS`/`EOS` sentinels.
pub fn extract_instances(sentence: &Sentence) -> Vec<Instance> {
    let ms = &sentence.morphemes;
    (0..sentence.n_spaces())
        .map(|k| Instance {
            far_left: if k == 0 {
                Morpheme::bos()
            } else {
                ms[k - 1].clone()
            },
            left: ms[k].clone(),
            right: ms[k + 1].clone(),
            far_right: ms.get(k + 2).cloned().unwrap_or_else(Morpheme::eos),
            label: Some(sentence.boundaries[k]),
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Self {
            sentences,
            provenance: String::new(),
        }
    }

    pub fn n_morphemes(&self) -> usize {
        self.sentences.iter().map(|s| s.morphemes.len()).sum()
    }

    pub fn n_spaces(&self) -> usize {
        self.sentences.iter().map(Sentence::n_spaces).sum()
    }

    /// All instances of all sentences, sentence by sentence.
    pub fn instances(&self) -> Vec<Instance> {
        self.sentences.iter().flat_map(extract_instances).collect()
    }

    /// Gold flags of every space, in instance order.
    pub fn gold(&self) -> Vec<bool> {
        self.sentences
            .iter()
            .flat_map(|s| s.boundaries.iter().copied())
            .collect()
    }

    /// Replaces every sentence's flags from one flat list in instance order.
    pub fn relabel(&self, flags: &[bool]) -> Result<Self> {
        if flags.len() != self.n_spaces() {
            return Err(BunsetsuError::invalid(format!(
                "{} flags for {} spaces",
                flags.len(),
                self.n_spaces()
            )));
        }
        let mut rest = flags;
        let mut sentences = Vec::with_capacity(self.sentences.len());
        for s in &self.sentences {
            let (head, tail) = rest.split_at(s.n_spaces());
            sentences.push(s.with_boundaries(head.to_vec())?);
            rest = tail;
        }
        Ok(Self {
            sentences,
            provenance: self.provenance.clone(),
        })
    }
}

/// Parses corpus text. Errors carry the 1-based line number.
pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut morphemes: Vec<Morpheme> = Vec::new();
    let mut boundaries: Vec<bool> = Vec::new();
    let mut pending_mark = false;
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        if line.is_empty() {
            if morphemes.is_empty() {
                return Err(BunsetsuError::parse(lineno, "empty sentence"));
            }
            if pending_mark {
                return Err(BunsetsuError::parse(
                    lineno,
                    "partition mark at the end of a sentence",
                ));
            }
            sentences.push(Sentence {
                morphemes: std::mem::take(&mut morphemes),
                boundaries: std::mem::take(&mut boundaries),
            });
            continue;
        }
        if line == BOUNDARY_LINE {
            if morphemes.is_empty() {
                return Err(BunsetsuError::parse(
                    lineno,
                    "partition mark at the start of a sentence",
                ));
            }
            if pending_mark {
                return Err(BunsetsuError::parse(lineno, "repeated partition mark"));
            }
            pending_mark = true;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(BunsetsuError::parse(
                lineno,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let semantic = (fields[3] != NONE_TOKEN).then(|| fields[3].to_string());
        let m = Morpheme::new(fields[0], fields[1], fields[2], semantic)
            .map_err(|e| BunsetsuError::parse(lineno, e.to_string()))?;
        if !morphemes.is_empty() {
            boundaries.push(pending_mark);
        }
        pending_mark = false;
        morphemes.push(m);
    }

    if pending_mark {
        return Err(BunsetsuError::parse(
            last_line,
            "partition mark at the end of a sentence",
        ));
    }
    if !morphemes.is_empty() {
        sentences.push(Sentence {
            morphemes,
            boundaries,
        });
    }
    Ok(Corpus::new(sentences))
}

pub fn write_sentence(out: &mut String, sentence: &Sentence) {
    for (k, m) in sentence.morphemes.iter().enumerate() {
        if k > 0 && sentence.boundaries[k - 1] {
            out.push_str(BOUNDARY_LINE);
            out.push('\n');
        }
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out.push('\n');
}

/// Renders a corpus in the canonical line format.
pub fn write_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        write_sentence(&mut out, s);
    }
    out
}

/// Latent labelling rule of the synthetic generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryRule {
    Always,
    Never,
    /// A random table over (left major POS, left minor POS, right major POS)
    /// decides each space; the decision is then flipped with `flip_rate`.
    PosTable {
        partition_rate: f64,
        flip_rate: f64,
    },
}

impl BoundaryRule {
    pub fn is_deterministic(&self) -> bool {
        match self {
            Self::Always | Self::Never => true,
            Self::PosTable { flip_rate, .. } => *flip_rate == 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_sentences: u32,
    pub min_len: u32,
    pub max_len: u32,
    pub n_major: u32,
    pub n_minor: u32,
    pub n_semantic: u32,
    pub n_words: u32,
    /// Fraction of morphemes that carry a semantic code.
    pub semantic_rate: f64,
    pub rule: BoundaryRule,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_sentences: 100,
            min_len: 4,
            max_len: 16,
            n_major: 6,
            n_minor: 4,
            n_semantic: 20,
            n_words: 200,
            semantic_rate: 0.5,
            rule: BoundaryRule::PosTable {
                partition_rate: 0.4,
                flip_rate: 0.0,
            },
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let sizes = [
            ("n_sentences", self.n_sentences),
            ("min_len", self.min_len),
            ("n_major", self.n_major),
            ("n_minor", self.n_minor),
            ("n_semantic", self.n_semantic),
            ("n_words", self.n_words),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(BunsetsuError::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.max_len < self.min_len {
            return Err(BunsetsuError::invalid("max_len is below min_len"));
        }
        let mut rates = vec![("semantic_rate", self.semantic_rate)];
        if let BoundaryRule::PosTable {
            partition_rate,
            flip_rate,
        } = self.rule
        {
            rates.push(("partition_rate", partition_rate));
            rates.push(("flip_rate", flip_rate));
        }
        for (name, r) in rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(BunsetsuError::invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Generates a corpus; identical `(self, seed)` pairs give identical corpora.
    pub fn generate(&self, seed: u64) -> Result<Corpus> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // latent table: (left major, left minor, right major) -> partition
        let mut table = BTreeMap::new();
        if let BoundaryRule::PosTable { partition_rate, .. } = self.rule {
            for lm in 0..self.n_major {
                for ln in 0..self.n_minor {
                    for rm in 0..self.n_major {
                        table.insert((lm, ln, rm), rng.gen_bool(partition_rate));
                    }
                }
            }
        }

        let mut sentences = Vec::with_capacity(self.n_sentences as usize);
        for _ in 0..self.n_sentences {
            let len = rng.gen_range(self.min_len..=self.max_len);
            let mut codes = Vec::with_capacity(len as usize);
            let mut morphemes = Vec::with_capacity(len as usize);
            for _ in 0..len {
                let major = rng.gen_range(0..self.n_major);
                let minor = rng.gen_range(0..self.n_minor);
                let word = rng.gen_range(0..self.n_words);
                let semantic = rng
                    .gen_bool(self.semantic_rate)
                    .then(|| format!("{:03}", rng.gen_range(0..self.n_semantic)));
                codes.push((major, minor));
                morphemes.push(Morpheme {
                    word: format!("w{word}"),
                    major_pos: format!("P{major}"),
                    minor_pos: format!("m{minor}"),
                    semantic,
                });
            }
            let boundaries = codes
                .windows(2)
                .map(|w| match self.rule {
                    BoundaryRule::Always => true,
                    BoundaryRule::Never => false,
                    BoundaryRule::PosTable { flip_rate, .. } => {
                        let base = table[&(w[0].0, w[0].1, w[1].0)];
                        if flip_rate > 0.0 && rng.gen_bool(flip_rate) {
                            !base
                        } else {
                            base
                        }
                    }
                })
                .collect();
            sentences.push(Sentence {
                morphemes,
                boundaries,
            });
        }

        let mut provenance = format!("synthetic seed={seed} config={}", json_line(self));
        if !table.is_empty() {
            let marked: Vec<String> = table
                .iter()
                .filter(|(_, &v)| v)
                .map(|((lm, ln, rm), _)| format!("P{lm}/m{ln}|P{rm}"))
                .collect();
            provenance.push_str(" partition_contexts=");
            provenance.push_str(&marked.join(","));
        }
        Ok(Corpus {
            sentences,
            provenance,
        })
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_default()
}
