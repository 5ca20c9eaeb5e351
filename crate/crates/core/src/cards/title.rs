use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::segmentation::ProviderError;
use crate::text::tokens;

pub const UNTITLED: &str = "Untitled Segment";
const MAX_TITLE_WORDS: usize = 12;
const FALLBACK_TERMS: usize = 3;

const STOPWORDS: &[&str] = &[
    "about", "after", "again", "all", "also", "and", "any", "are", "because", "been", "but", "can", "could", "did",
    "does", "for", "from", "get", "got", "had", "has", "have", "her", "here", "him", "his", "how", "into", "its",
    "just", "let", "like", "maybe", "more", "not", "now", "okay", "one", "only", "our", "out", "really", "right",
    "she", "should", "some", "that", "the", "their", "them", "then", "there", "these", "they", "think", "this",
    "those", "too", "very", "was", "were", "what", "when", "where", "which", "who", "why", "will", "with", "would",
    "yeah", "yes", "you", "your",
];

/// Produces a short title from a segment's dialogue.
pub trait TitleProvider {
    fn title(&self, dialogue: &str) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TitleSource {
    Provider,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleOutcome {
    pub title: String,
    pub source: TitleSource,
    /// Set when a provider was configured but failed.
    pub provider_error: Option<String>,
}

fn terms(text: &str) -> Vec<String> {
    tokens(text)
        .into_iter()
        .filter(|t| {
            t.chars().count() >= 3 && !t.chars().all(|c| c.is_ascii_digit()) && !STOPWORDS.contains(&t.as_str())
        })
        .collect()
}

fn title_case(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Top TF-IDF terms of `corpus[index]`, with document frequency taken over all
/// of `corpus`, title-cased and joined by " · ".
pub fn fallback_title(corpus: &[&str], index: usize) -> String {
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| terms(d)).collect();
    let Some(doc) = docs.get(index).filter(|d| !d.is_empty()) else {
        return UNTITLED.to_string();
    };
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in &docs {
        for t in d.iter().map(String::as_str).collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
    for t in doc {
        *tf.entry(t.as_str()).or_default() += 1;
    }
    let n = docs.len() as f64;
    let mut scored: Vec<(f64, usize, &str)> = tf
        .iter()
        .map(|(term, count)| (*count as f64 * libm::log(n / df[term] as f64), *count, *term))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    scored
        .iter()
        .take(FALLBACK_TERMS)
        .map(|(_, _, t)| title_case(t))
        .collect::<Vec<_>>()
        .join(" · ")
}

fn clamp_words(title: &str) -> String {
    title
        .split_whitespace()
        .take(MAX_TITLE_WORDS)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Title for `corpus[index]`: the provider's answer when it succeeds,
/// otherwise the TF-IDF fallback.
pub fn generate_title(corpus: &[&str], index: usize, provider: Option<&dyn TitleProvider>) -> TitleOutcome {
    let dialogue = corpus.get(index).copied().unwrap_or("");
    let fallback = |provider_error| TitleOutcome {
        title: fallback_title(corpus, index),
        source: TitleSource::Fallback,
        provider_error,
    };
    if dialogue.trim().is_empty() {
        return fallback(None);
    }
    let Some(provider) = provider else {
        return fallback(None);
    };
    match provider.title(dialogue) {
        Ok(t) if !t.trim().is_empty() => TitleOutcome {
            title: clamp_words(&t),
            source: TitleSource::Provider,
            provider_error: None,
        },
        Ok(_) => fallback(Some("provider returned an empty title".to_string())),
        Err(e) => fallback(Some(e.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo(&'static str);

    impl TitleProvider for Echo {
        fn title(&self, _: &str) -> Result<String, ProviderError> {
            Ok(self.0.into())
        }
    }

    struct Broken;

    impl TitleProvider for Broken {
        fn title(&self, _: &str) -> Result<String, ProviderError> {
            Err(ProviderError("timeout".into()))
        }
    }

    #[test]
    fn empty_dialogue_is_untitled() {
        assert_eq!(generate_title(&[""], 0, None).title, UNTITLED);
        assert_eq!(generate_title(&["  "], 0, Some(&Echo("x"))).title, UNTITLED);
    }

    #[test]
    fn provider_title_stored_verbatim() {
        let out = generate_title(&["some dialogue"], 0, Some(&Echo("From Annotation to Segmentation")));
        assert_eq!(out.title, "From Annotation to Segmentation");
        assert_eq!(out.source, TitleSource::Provider);
    }

    #[test]
    fn long_provider_titles_are_clamped() {
        let out = generate_title(&["x y z"], 0, Some(&Echo("a b c d e f g h i j k l m n")));
        assert_eq!(out.title.split(' ').count(), 12);
    }

    #[test]
    fn failing_provider_falls_back_and_flags() {
        let out = generate_title(&["sticky notes cluster", "budget talk"], 0, Some(&Broken));
        assert_eq!(out.source, TitleSource::Fallback);
        assert_eq!(out.provider_error.as_deref(), Some("timeout"));
        assert!(!out.title.is_empty());
    }

    #[test]
    fn distinctive_term_wins() {
        let corpus = [
            "workshop board notes segmentation workshop board",
            "workshop board notes timeline",
            "workshop board notes budget",
        ];
        let t = fallback_title(&corpus, 0);
        assert!(t.starts_with("Segmentation"), "{t}");
        assert_eq!(t.split(" · ").count(), 3);
    }
}
