//! Phrase annotation, novelty scoring and object binding.

mod dictionary;
mod embedding;
mod scoring;
mod transcript;

use serde::{Deserialize, Serialize};

pub use dictionary::{
    normalize_word, tokenize, Annotation, AnnotationDictionary, Attribute, DictionaryMatch, PositionClass, SizeClass,
};
pub use embedding::{cosine, fnv1a, EmbeddingProvider, FileEmbedding, HashEmbedding};
pub use scoring::{
    importance, passes_gate, position_score, relevance, NoveltyScorer, BONUS_WEIGHT, IMPORTANCE_GATE, POSITION_WEIGHT,
    RELEVANCE_WEIGHT,
};
pub use transcript::{PhraseSpan, TimedTranscript, Word};

use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseAnnotation {
    /// Word range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub focus: usize,
    pub text: String,
    pub focus_word: String,
    /// Onset of the focus word, seconds.
    pub focus_time: f64,
    pub size: Option<SizeClass>,
    pub position: Option<PositionClass>,
    pub mentions_alignment: bool,
    pub alignment_ref: Option<String>,
    pub matched_object: Option<String>,
    pub relevance: f64,
    pub position_score: f64,
    pub bonus: f64,
    pub importance: f64,
    pub gated_in: bool,
}

/// Reduces a word to the form used for label matching: lowercase, punctuation trimmed.
pub fn lemma(word: &str) -> String {
    normalize_word(word)
}

/// Candidate lemmas: the word itself, then simple plural strips.
fn lemma_candidates(word: &str) -> Vec<String> {
    let w = lemma(word);
    let mut out = vec![w.clone()];
    if let Some(s) = w.strip_suffix("ies") {
        out.push(format!("{s}y"));
    }
    if let Some(s) = w.strip_suffix("es") {
        out.push(s.to_string());
    }
    if let Some(s) = w.strip_suffix('s') {
        out.push(s.to_string());
    }
    out
}

fn label_hit(word: &str, labels: &[&str]) -> bool {
    lemma_candidates(word).iter().any(|c| labels.contains(&c.as_str()))
}

/// Fallback phrase finder for transcripts without pre-marked phrases.
///
/// A sentence is cut after every run of words naming a scene label; the run's last word
/// is the focus. Words after the last label join the final phrase. A sentence without a
/// label yields one phrase if it contains a dictionary keyword, focused on its last word.
pub fn chunk_phrases(transcript: &TimedTranscript, labels: &[&str], dict: &AnnotationDictionary) -> Vec<PhraseSpan> {
    let mut out = Vec::new();
    for (first, last) in transcript.sentence_ranges() {
        let words = &transcript.words[first..=last];
        let hits: Vec<bool> = words.iter().map(|w| label_hit(&w.text, labels)).collect();
        let mut spans: Vec<PhraseSpan> = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < words.len() {
            if hits[i] {
                let mut j = i;
                while j + 1 < words.len() && hits[j + 1] {
                    j += 1;
                }
                spans.push(PhraseSpan { start: first + start, end: first + j + 1, focus: first + j });
                start = j + 1;
                i = j + 1;
            } else {
                i += 1;
            }
        }
        if let Some(lastspan) = spans.last_mut() {
            lastspan.end = last + 1;
        } else {
            let text = transcript.text(first, last + 1);
            if !dict.match_tokens(&tokenize(&text)).is_empty() {
                spans.push(PhraseSpan { start: first, end: last + 1, focus: last });
            }
        }
        out.extend(spans);
    }
    out
}

/// Annotates every phrase: dictionary attributes, novelty, position and bonus scores.
///
/// Relevance history lives in `scorer` and spans every call made with it.
pub fn annotate_transcript(
    transcript: &TimedTranscript,
    labels: &[&str],
    dict: &AnnotationDictionary,
    provider: &dyn EmbeddingProvider,
    scorer: &mut NoveltyScorer,
) -> Vec<PhraseAnnotation> {
    let spans = if transcript.phrases.is_empty() {
        chunk_phrases(transcript, labels, dict)
    } else {
        transcript.phrases.clone()
    };
    spans
        .into_iter()
        .map(|span| {
            let text = transcript.text(span.start, span.end);
            let dict_ann = dict.annotate(&text);
            let relevance = scorer.score(provider, &text);
            let (first, last) = transcript.sentence_of(span.start);
            let position_score = position_score(span.end - 1, first, last);
            let bonus = if transcript.objects.iter().any(|o| o[0] < span.end && span.start < o[1]) { 1.0 } else { 0.0 };
            let importance = importance(relevance, position_score, bonus);
            PhraseAnnotation {
                start: span.start,
                end: span.end,
                focus: span.focus,
                text,
                focus_word: lemma(&transcript.words[span.focus].text),
                focus_time: transcript.words[span.focus].start,
                size: dict_ann.size,
                position: dict_ann.position,
                mentions_alignment: dict_ann.alignment,
                alignment_ref: None,
                matched_object: None,
                relevance,
                position_score,
                bonus,
                importance,
                gated_in: passes_gate(importance),
            }
        })
        .collect()
}

/// Binds each annotation's focus word to the most confident object with the same label
/// (ties go to the smaller id), and attaches that object's alignment group when the
/// phrase mentions alignment.
pub fn bind_phrases_to_objects(annotations: &mut [PhraseAnnotation], scene: &Scene) {
    for a in annotations.iter_mut() {
        let candidates = lemma_candidates(&a.focus_word);
        let Some(label) = candidates.iter().find(|c| scene.objects.iter().any(|o| &o.label == *c)) else {
            a.matched_object = None;
            a.alignment_ref = None;
            continue;
        };
        let best = scene
            .objects
            .iter()
            .filter(|o| &o.label == label)
            .max_by(|x, y| x.confidence.total_cmp(&y.confidence).then_with(|| y.id.cmp(&x.id)))
            .expect("label present");
        a.matched_object = Some(best.id.clone());
        a.alignment_ref = if a.mentions_alignment {
            best.derived.as_ref().and_then(|d| d.alignment_group.clone())
        } else {
            None
        };
    }
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;
    use crate::scene::{ImageDims, ObjectRecord};

    fn transcript(text: &str, sentences: Vec<usize>) -> TimedTranscript {
        let words = text
            .split_whitespace()
            .enumerate()
            .map(|(i, w)| Word { text: w.to_string(), start: i as f64 * 0.4, end: i as f64 * 0.4 + 0.3 })
            .collect();
        TimedTranscript { words, sentences, ..Default::default() }
    }

    fn scene(objs: &[(&str, &str, f64)]) -> Scene {
        Scene {
            image: ImageDims { width: 100, height: 100 },
            objects: objs
                .iter()
                .map(|&(id, label, c)| ObjectRecord {
                    id: id.into(),
                    label: label.into(),
                    bbox: [0.0, 0.0, 10.0, 10.0],
                    mask: PathBuf::from("m.pgm"),
                    confidence: c,
                    derived: None,
                })
                .collect(),
            resized: None,
            groups: vec![],
        }
    }

    fn ann(focus: &str) -> PhraseAnnotation {
        PhraseAnnotation {
            start: 0,
            end: 1,
            focus: 0,
            text: focus.into(),
            focus_word: focus.into(),
            focus_time: 0.0,
            size: None,
            position: None,
            mentions_alignment: false,
            alignment_ref: None,
            matched_object: None,
            relevance: 1.0,
            position_score: 1.0,
            bonus: 0.0,
            importance: 0.9,
            gated_in: true,
        }
    }

    #[test]
    fn binding_rules() {
        let s = scene(&[("a1", "apple", 0.7), ("a2", "apple", 0.9), ("t", "tree", 0.8)]);
        let mut v = vec![ann("apple"), ann("car"), ann("apples")];
        bind_phrases_to_objects(&mut v, &s);
        assert_eq!(v[0].matched_object.as_deref(), Some("a2"));
        assert_eq!(v[1].matched_object, None);
        assert_eq!(v[2].matched_object.as_deref(), Some("a2"));
    }

    #[test]
    fn chunker_splits_at_labels() {
        let t = transcript("there is a huge tree at the bottom left . next to it a small house", vec![0, 10]);
        let spans = chunk_phrases(&t, &["tree", "house"], &AnnotationDictionary::default());
        assert_eq!(spans.len(), 2);
        assert_eq!(t.words[spans[0].focus].text, "tree");
        assert_eq!(spans[0].end, 10);
        assert_eq!(t.words[spans[1].focus].text, "house");
    }

    #[test]
    fn chunker_merges_compound_labels() {
        let t = transcript("the apple tree stands there", vec![]);
        let spans = chunk_phrases(&t, &["apple", "tree"], &AnnotationDictionary::default());
        assert_eq!(spans, vec![PhraseSpan { start: 0, end: 5, focus: 2 }]);
    }

    #[test]
    fn annotation_scores_follow_weights() {
        let mut t = transcript("a huge tree on the left", vec![]);
        t.objects = vec![[2, 3]];
        let mut scorer = NoveltyScorer::new();
        let a = annotate_transcript(&t, &["tree"], &AnnotationDictionary::default(), &HashEmbedding::default(), &mut scorer);
        assert_eq!(a.len(), 1);
        let a = &a[0];
        assert_eq!((a.size, a.position), (Some(SizeClass::Huge), Some(PositionClass::Left)));
        assert_eq!((a.relevance, a.position_score, a.bonus), (1.0, 1.0, 1.0));
        assert_eq!(a.importance, importance(1.0, 1.0, 1.0));
        assert!(a.gated_in);
        assert_eq!(a.focus_time, 0.8);
        // Same phrase again: zero novelty.
        let again = annotate_transcript(&t, &["tree"], &AnnotationDictionary::default(), &HashEmbedding::default(), &mut scorer);
        assert!(again[0].relevance.abs() < 1e-12);
        assert!(!again[0].gated_in);
    }
}
