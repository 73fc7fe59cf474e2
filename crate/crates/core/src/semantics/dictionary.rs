//! Keyword dictionary for size, position and alignment attributes.
//!
//! Longer keys are matched first and consume the words they cover, so "bottom left" is
//! never also read as "bottom" and "left".

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Tiny,
    Small,
    Medium,
    Large,
    Huge,
}

impl SizeClass {
    pub const ALL: [SizeClass; 5] = [SizeClass::Tiny, SizeClass::Small, SizeClass::Medium, SizeClass::Large, SizeClass::Huge];

    /// Default distance between the palms, meters.
    pub fn default_separation(self) -> f64 {
        match self {
            SizeClass::Tiny => 0.05,
            SizeClass::Small => 0.15,
            SizeClass::Medium => 0.25,
            SizeClass::Large => 0.38,
            SizeClass::Huge => 0.50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionClass {
    Left,
    Right,
    Bottom,
    Top,
    TopLeft,
    TopRight,
    MiddleLeft,
    MiddleRight,
    BottomLeft,
    BottomRight,
}

impl PositionClass {
    pub const ALL: [PositionClass; 10] = [
        PositionClass::Left,
        PositionClass::Right,
        PositionClass::Bottom,
        PositionClass::Top,
        PositionClass::TopLeft,
        PositionClass::TopRight,
        PositionClass::MiddleLeft,
        PositionClass::MiddleRight,
        PositionClass::BottomLeft,
        PositionClass::BottomRight,
    ];

    /// Normalized image-plane location: x in [-1, 1] (viewer's left to right), y in [-1, 1]
    /// (bottom to top).
    pub fn image_anchor(self) -> (f64, f64) {
        match self {
            PositionClass::Left => (-1.0, 0.0),
            PositionClass::Right => (1.0, 0.0),
            PositionClass::Bottom => (0.0, -1.0),
            PositionClass::Top => (0.0, 1.0),
            PositionClass::TopLeft => (-1.0, 1.0),
            PositionClass::TopRight => (1.0, 1.0),
            PositionClass::MiddleLeft => (-0.6, 0.0),
            PositionClass::MiddleRight => (0.6, 0.0),
            PositionClass::BottomLeft => (-1.0, -1.0),
            PositionClass::BottomRight => (1.0, -1.0),
        }
    }
}

impl fmt::Display for PositionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attribute {
    Size(SizeClass),
    Position(PositionClass),
    Alignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryMatch {
    /// Word range `[start, end)` within the annotated text.
    pub start: usize,
    pub end: usize,
    pub key: String,
    pub attribute: Attribute,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Annotation {
    pub size: Option<SizeClass>,
    pub position: Option<PositionClass>,
    pub alignment: bool,
    /// Every accepted match, in text order.
    pub matches: Vec<DictionaryMatch>,
}

/// Lowercase, trims surrounding punctuation.
pub fn normalize_word(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric() && c != '-').to_lowercase()
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(normalize_word).filter(|w| !w.is_empty()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationDictionary {
    /// Keys as word sequences, sorted by descending length (characters), then alphabetically.
    entries: Vec<(Vec<String>, String, Attribute)>,
}

impl Default for AnnotationDictionary {
    fn default() -> Self {
        use PositionClass as P;
        use SizeClass as S;
        let mut e: Vec<(&str, Attribute)> = Vec::new();
        for (k, s) in [
            ("tiny", S::Tiny),
            ("minuscule", S::Tiny),
            ("very small", S::Tiny),
            ("small", S::Small),
            ("little", S::Small),
            ("medium", S::Medium),
            ("medium-sized", S::Medium),
            ("mid-sized", S::Medium),
            ("large", S::Large),
            ("big", S::Large),
            ("huge", S::Huge),
            ("enormous", S::Huge),
            ("giant", S::Huge),
            ("massive", S::Huge),
            ("very large", S::Huge),
            ("very big", S::Huge),
        ] {
            e.push((k, Attribute::Size(s)));
        }
        for (k, p) in [
            ("left", P::Left),
            ("right", P::Right),
            ("bottom", P::Bottom),
            ("top", P::Top),
            ("top left", P::TopLeft),
            ("upper left", P::TopLeft),
            ("top right", P::TopRight),
            ("upper right", P::TopRight),
            ("middle left", P::MiddleLeft),
            ("center left", P::MiddleLeft),
            ("middle right", P::MiddleRight),
            ("center right", P::MiddleRight),
            ("bottom left", P::BottomLeft),
            ("lower left", P::BottomLeft),
            ("bottom right", P::BottomRight),
            ("lower right", P::BottomRight),
        ] {
            e.push((k, Attribute::Position(p)));
        }
        for k in [
            "in a row",
            "in a line",
            "in a circle",
            "lined up",
            "arranged horizontally",
            "arranged vertically",
            "aligned",
            "row",
            "circle",
            "scattered",
            "arranged",
        ] {
            e.push((k, Attribute::Alignment));
        }
        AnnotationDictionary::new(e.into_iter().map(|(k, a)| (k.to_string(), a)))
    }
}

impl AnnotationDictionary {
    pub fn new(entries: impl IntoIterator<Item = (String, Attribute)>) -> Self {
        let mut entries: Vec<(Vec<String>, String, Attribute)> =
            entries.into_iter().map(|(k, a)| (tokenize(&k), k.to_lowercase(), a)).filter(|(t, _, _)| !t.is_empty()).collect();
        entries.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.1.cmp(&b.1)));
        AnnotationDictionary { entries }
    }

    /// Matches over a token sequence; longer keys first, each match consuming its words.
    pub fn match_tokens(&self, tokens: &[String]) -> Vec<DictionaryMatch> {
        let mut used = vec![false; tokens.len()];
        let mut out = Vec::new();
        for (key, text, attr) in &self.entries {
            let k = key.len();
            if k > tokens.len() {
                continue;
            }
            let mut i = 0;
            while i + k <= tokens.len() {
                if !used[i..i + k].iter().any(|&u| u) && tokens[i..i + k] == key[..] {
                    used[i..i + k].iter_mut().for_each(|u| *u = true);
                    out.push(DictionaryMatch { start: i, end: i + k, key: text.clone(), attribute: attr.clone() });
                    i += k;
                } else {
                    i += 1;
                }
            }
        }
        out.sort_by_key(|m| m.start);
        out
    }

    /// First size and first position (in text order) among the consumed matches.
    pub fn annotate(&self, text: &str) -> Annotation {
        let matches = self.match_tokens(&tokenize(text));
        let mut a = Annotation::default();
        for m in &matches {
            match &m.attribute {
                Attribute::Size(s) if a.size.is_none() => a.size = Some(*s),
                Attribute::Position(p) if a.position.is_none() => a.position = Some(*p),
                Attribute::Alignment => a.alignment = true,
                _ => {}
            }
        }
        a.matches = matches;
        a
    }
}
