//! The 152 pattern templates over the four-morpheme window.
//!
//! A template assigns an information level to each slot it consults. The
//! outer slots only ever use levels A or B, and only six occupancy shapes are
//! allowed, which gives 64 + 32 + 32 + 16 + 4 + 4 = 152 templates.

use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Instance, Morpheme};

/// Weight of the middle-slot product in [`PatternTemplate::similarity`].
pub const MIDDLE_WEIGHT: u32 = 10_000;
pub const N_TEMPLATES: usize = 152;

/// Nested projections of a morpheme, from least to most specific.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InfoLevel {
    /// major POS
    A,
    /// + minor POS
    B,
    /// + semantic code
    C,
    /// + word
    D,
}

impl InfoLevel {
    pub const ALL: [InfoLevel; 4] = [InfoLevel::A, InfoLevel::B, InfoLevel::C, InfoLevel::D];
    pub const OUTER: [InfoLevel; 2] = [InfoLevel::A, InfoLevel::B];

    /// Morphological similarity of a slot matched at this level.
    pub fn score(self) -> u32 {
        match self {
            InfoLevel::A => 2,
            InfoLevel::B => 3,
            InfoLevel::C => 4,
            InfoLevel::D => 5,
        }
    }

    /// Number of morpheme fields the level consults.
    pub fn width(self) -> usize {
        self as usize + 1
    }

    fn letter(self) -> char {
        (b'A' + self as u8) as char
    }
}

/// Slot score with an unused slot counting as 1.
pub fn slot_score(level: Option<InfoLevel>) -> u32 {
    level.map_or(1, InfoLevel::score)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    FarLeft,
    Left,
    Right,
    FarRight,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::FarLeft, Slot::Left, Slot::Right, Slot::FarRight];
}

/// Which slots a template consults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Full,
    NoFarLeft,
    NoFarRight,
    Middle,
    LeftOnly,
    RightOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Full,
        Scheme::NoFarLeft,
        Scheme::NoFarRight,
        Scheme::Middle,
        Scheme::LeftOnly,
        Scheme::RightOnly,
    ];

    /// Occupancy of (far left, left, right, far right).
    pub fn occupancy(self) -> [bool; 4] {
        match self {
            Scheme::Full => [true, true, true, true],
            Scheme::NoFarLeft => [false, true, true, true],
            Scheme::NoFarRight => [true, true, true, false],
            Scheme::Middle => [false, true, true, false],
            Scheme::LeftOnly => [false, true, false, false],
            Scheme::RightOnly => [false, false, true, false],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Full => "full",
            Scheme::NoFarLeft => "no-far-left",
            Scheme::NoFarRight => "no-far-right",
            Scheme::Middle => "middle",
            Scheme::LeftOnly => "left-only",
            Scheme::RightOnly => "right-only",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternTemplate {
    pub id: usize,
    pub scheme: Scheme,
    /// Levels of (far left, left, right, far right); `None` for unused slots.
    pub levels: [Option<InfoLevel>; 4],
    pub similarity: u32,
}

impl PatternTemplate {
    pub fn far_left(&self) -> Option<InfoLevel> {
        self.levels[0]
    }

    pub fn left(&self) -> Option<InfoLevel> {
        self.levels[1]
    }

    pub fn right(&self) -> Option<InfoLevel> {
        self.levels[2]
    }

    pub fn far_right(&self) -> Option<InfoLevel> {
        self.levels[3]
    }

    pub fn level(&self, slot: Slot) -> Option<InfoLevel> {
        self.levels[slot as usize]
    }

    /// Compact label such as `B D C A` or `- D - -`.
    pub fn label(&self) -> String {
        self.levels
            .iter()
            .map(|l| l.map_or('-', InfoLevel::letter).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `s(left)·s(right)·10000 + s(far left)·s(far right)`.
pub fn template_similarity(levels: &[Option<InfoLevel>; 4]) -> u32 {
    let [fl, l, r, fr] = levels.map(slot_score);
    l * r * MIDDLE_WEIGHT + fl * fr
}

fn choices(occupied: bool, outer: bool) -> Vec<Option<InfoLevel>> {
    match (occupied, outer) {
        (false, _) => vec![None],
        (true, true) => InfoLevel::OUTER.iter().copied().map(Some).collect(),
        (true, false) => InfoLevel::ALL.iter().copied().map(Some).collect(),
    }
}

/// All templates, scheme-major and level-lexicographic within a scheme.
pub fn enumerate_templates() -> Vec<PatternTemplate> {
    let mut out = Vec::with_capacity(N_TEMPLATES);
    for scheme in Scheme::ALL {
        let [ofl, ol, or, ofr] = scheme.occupancy();
        for fl in choices(ofl, true) {
            for l in choices(ol, false) {
                for r in choices(or, false) {
                    for fr in choices(ofr, true) {
                        let levels = [fl, l, r, fr];
                        out.push(PatternTemplate {
                            id: out.len(),
                            scheme,
                            levels,
                            similarity: template_similarity(&levels),
                        });
                    }
                }
            }
        }
    }
    out
}

static TEMPLATES: LazyLock<Vec<PatternTemplate>> = LazyLock::new(enumerate_templates);

/// Shared, precomputed template table.
pub fn templates() -> &'static [PatternTemplate] {
    &TEMPLATES
}

/// Tab-separated listing: id, scheme, levels, similarity.
pub fn template_listing() -> String {
    let mut out = String::from("id\tscheme\tlevels\tsimilarity\n");
    for t in templates() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            t.id,
            t.scheme.name(),
            t.label(),
            t.similarity
        ));
    }
    out
}

/// SHA-256 of [`template_listing`], stamped into model files.
pub fn template_table_hash() -> String {
    let digest = Sha256::digest(template_listing().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Field values of `m` consulted at `level`, least specific first.
pub fn project(m: &Morpheme, level: InfoLevel) -> Vec<&str> {
    let fields = [m.major_pos(), m.minor_pos(), m.semantic_token(), m.word()];
    fields[..level.width()].to_vec()
}

/// An instantiated template: the rule key an instance produces.
///
/// The template fixes how many tokens each slot contributes, so the flat token
/// list is unambiguous without delimiters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternKey {
    pub template_id: usize,
    pub tokens: Vec<String>,
}

impl PatternKey {
    /// Tokens grouped per window slot; unused slots are `None`.
    pub fn slot_groups(&self) -> [Option<&[String]>; 4] {
        let t = &templates()[self.template_id];
        let mut rest = self.tokens.as_slice();
        t.levels.map(|level| {
            level.map(|l| {
                let (head, tail) = rest.split_at(l.width());
                rest = tail;
                head
            })
        })
    }
}

impl fmt::Display for PatternKey {
    /// Renders like `Noun: NormalNoun; Particle: CaseParticle: NONE: wo; ...`,
    /// with `---` for unused slots.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .slot_groups()
            .iter()
            .map(|g| g.map_or_else(|| "---".to_string(), |toks| toks.join(": ")))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn instantiate(template: &PatternTemplate, instance: &Instance) -> PatternKey {
    let mut tokens = Vec::new();
    for (level, m) in template.levels.iter().zip(instance.slots()) {
        if let Some(level) = level {
            tokens.extend(project(m, *level).into_iter().map(str::to_string));
        }
    }
    PatternKey {
        template_id: template.id,
        tokens,
    }
}
