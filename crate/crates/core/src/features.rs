//! Tokenization and sparse binary unigram features.
//!
//! Tokens are maximal runs of Unicode letters and digits. Everything else is
//! a separator. Tokens are lowercased, except tokens written entirely in
//! uppercase (at least two characters, at least one letter), which are kept
//! as-is so that entity tags such as `MOVIE` survive a round trip through
//! text.

use std::collections::HashMap;

use crate::error::{NluError, Result};

/// A word of the original text with its byte span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordSpan<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

// Combining diacritics count as word characters so decomposed text
// (e.g. `a` + U+0303) stays in one token.
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || ('\u{300}'..='\u{36f}').contains(&c)
}

/// Splits `text` into words, keeping original casing and byte offsets.
pub fn split_words(text: &str) -> Vec<WordSpan<'_>> {
    let mut words = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                words.push(WordSpan {
                    text: &text[s..i],
                    start: s,
                    end: i,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        words.push(WordSpan {
            text: &text[s..],
            start: s,
            end: text.len(),
        });
    }
    words
}

/// True for words like `MOVIE` or `QT2`: two or more characters, at least one
/// letter, and no lowercase letters.
pub fn is_tag_like(word: &str) -> bool {
    word.chars().count() >= 2
        && word.chars().any(char::is_alphabetic)
        && !word
            .chars()
            .any(|c| c.is_lowercase() || (c.is_alphabetic() && !c.is_uppercase()))
}

/// Feature form of a single word.
pub fn normalize_word(word: &str) -> String {
    if is_tag_like(word) {
        word.to_string()
    } else {
        word.to_lowercase()
    }
}

/// Lowercased word tokens with punctuation dropped and diacritics preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    split_words(text)
        .into_iter()
        .map(|w| normalize_word(w.text))
        .collect()
}

/// Token to feature index map, built from training utterances only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary with indices in first-occurrence order.
    pub fn build<'a, I>(utterances: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut vocab = Vocabulary::default();
        let mut seen_any = false;
        for tokens in utterances {
            seen_any = true;
            for token in tokens {
                vocab.insert(token);
            }
        }
        if !seen_any {
            return Err(NluError::EmptyTrainingSet);
        }
        Ok(vocab)
    }

    /// Rebuilds a vocabulary from its index-ordered token list.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(NluError::ModelFormat(format!(
                    "duplicate vocabulary token `{t}`"
                )));
            }
        }
        Ok(Vocabulary { index, tokens })
    }

    fn insert(&mut self, token: &str) {
        if !self.index.contains_key(token) {
            self.index.insert(token.to_string(), self.tokens.len());
            self.tokens.push(token.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    /// Tokens in index order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Binary presence vector; out-of-vocabulary tokens are dropped.
    pub fn vectorize<S: AsRef<str>>(&self, tokens: &[S]) -> FeatureVector {
        let mut active: Vec<usize> = tokens.iter().filter_map(|t| self.get(t.as_ref())).collect();
        active.sort_unstable();
        active.dedup();
        FeatureVector {
            active,
            dimension: self.len(),
        }
    }
}

/// Sparse binary feature vector: the sorted set of active indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    active: Vec<usize>,
    dimension: usize,
}

impl FeatureVector {
    /// Builds a vector from arbitrary indices, sorting and deduplicating them.
    pub fn new(mut active: Vec<usize>, dimension: usize) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        if let Some(&max) = active.last() {
            if max >= dimension {
                return Err(NluError::DimensionMismatch {
                    expected: dimension,
                    actual: max + 1,
                });
            }
        }
        Ok(FeatureVector { active, dimension })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}
