use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Word {
    pub text: String,
    pub start: f64,
    pub end: f64,
}

/// A pre-marked phrase: words `start..end` with the head noun at `focus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhraseSpan {
    pub start: usize,
    pub end: usize,
    pub focus: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedTranscript {
    pub words: Vec<Word>,
    /// Index of the first word of each sentence. Empty means one sentence.
    #[serde(default)]
    pub sentences: Vec<usize>,
    /// Word ranges `[start, end)` holding a grammatical object.
    #[serde(default)]
    pub objects: Vec<[usize; 2]>,
    /// Pre-marked phrases. When empty, phrases are found by the fallback chunker.
    #[serde(default)]
    pub phrases: Vec<PhraseSpan>,
}

impl TimedTranscript {
    pub fn from_json(text: &str, file: &str) -> Result<Self> {
        let t: TimedTranscript = serde_json::from_str(text).map_err(|e| Error::json(file, e))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.words.len();
        let mut prev = f64::NEG_INFINITY;
        for (i, w) in self.words.iter().enumerate() {
            if !(w.start.is_finite() && w.end.is_finite()) || w.end < w.start {
                return Err(Error::Transcript(format!("word {i} `{}` has bad times", w.text)));
            }
            if w.start < prev {
                return Err(Error::Transcript(format!("word {i} `{}` starts before word {}", w.text, i - 1)));
            }
            prev = w.start;
        }
        if let Some(&first) = self.sentences.first() {
            if first != 0 {
                return Err(Error::Transcript("first sentence must start at word 0".into()));
            }
        }
        for w in self.sentences.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Transcript("sentence boundaries must be strictly increasing".into()));
            }
        }
        if self.sentences.last().is_some_and(|&s| s >= n) {
            return Err(Error::Transcript("sentence boundary past the last word".into()));
        }
        for o in &self.objects {
            if o[0] >= o[1] || o[1] > n {
                return Err(Error::Transcript(format!("object span {o:?} out of range")));
            }
        }
        for p in &self.phrases {
            if p.start >= p.end || p.end > n || !(p.start..p.end).contains(&p.focus) {
                return Err(Error::Transcript(format!("phrase {p:?} out of range")));
            }
            let (s, e) = self.sentence_of(p.start);
            if p.end > e + 1 || p.start < s {
                return Err(Error::Transcript(format!("phrase {p:?} crosses a sentence boundary")));
            }
        }
        Ok(())
    }

    /// Inclusive word range `(first, last)` of the sentence holding word `i`.
    pub fn sentence_of(&self, i: usize) -> (usize, usize) {
        let n = self.words.len();
        if self.sentences.is_empty() {
            return (0, n.saturating_sub(1));
        }
        let k = self.sentences.partition_point(|&s| s <= i).max(1) - 1;
        let first = self.sentences[k];
        let last = self.sentences.get(k + 1).map_or(n.saturating_sub(1), |&s| s - 1);
        (first, last)
    }

    /// All sentences as inclusive word ranges.
    pub fn sentence_ranges(&self) -> Vec<(usize, usize)> {
        if self.words.is_empty() {
            return Vec::new();
        }
        if self.sentences.is_empty() {
            return vec![(0, self.words.len() - 1)];
        }
        self.sentences.iter().map(|&s| self.sentence_of(s)).collect()
    }

    pub fn text(&self, start: usize, end: usize) -> String {
        self.words[start..end].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn duration(&self) -> f64 {
        self.words.last().map_or(0.0, |w| w.end)
    }
}
