//! Novelty-based importance scoring.

use super::embedding::{cosine, EmbeddingProvider};

pub const RELEVANCE_WEIGHT: f64 = 0.65;
pub const POSITION_WEIGHT: f64 = 0.25;
pub const BONUS_WEIGHT: f64 = 0.1;
/// Phrases scoring below this do not trigger automatic gestures.
pub const IMPORTANCE_GATE: f64 = 0.5;

/// One minus the largest cosine similarity to any earlier phrase, with negative
/// similarities counted as zero. An empty history gives 1.
pub fn relevance(embedding: &[f64], history: &[Vec<f64>]) -> f64 {
    let max_sim = history.iter().map(|h| cosine(embedding, h).max(0.0)).fold(0.0, f64::max);
    (1.0 - max_sim).clamp(0.0, 1.0)
}

/// Where the phrase ends within its sentence: 0 after the first word, 1 after the last.
/// `end` is the index of the phrase's last word; `first..=last` is the sentence.
pub fn position_score(end: usize, first: usize, last: usize) -> f64 {
    if last <= first {
        return 1.0;
    }
    let end = end.clamp(first, last);
    (end - first) as f64 / (last - first) as f64
}

pub fn importance(relevance: f64, position: f64, bonus: f64) -> f64 {
    RELEVANCE_WEIGHT * relevance + POSITION_WEIGHT * position + BONUS_WEIGHT * bonus
}

pub fn passes_gate(importance: f64) -> bool {
    importance >= IMPORTANCE_GATE
}

/// Relevance against every phrase scored so far in the session.
#[derive(Debug, Clone, Default)]
pub struct NoveltyScorer {
    history: Vec<Vec<f64>>,
}

impl NoveltyScorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scores `text` and then adds it to the history.
    pub fn score(&mut self, provider: &dyn EmbeddingProvider, text: &str) -> f64 {
        let e = provider.embed(text);
        let r = relevance(&e, &self.history);
        self.history.push(e);
        r
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }
}
