//! Document text to normalized word tokens.
//!
//! A token is the lowercased fragment with every leading and trailing
//! character that is not a letter or digit removed. Interior punctuation
//! survives, so contractions (`don't`) and hyphenated compounds
//! (`re-elect`) stay whole.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A document as handed to the map stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }

    /// Builds a document from raw bytes, replacing invalid UTF-8 sequences
    /// with U+FFFD.
    pub fn from_bytes(id: impl Into<String>, bytes: &[u8]) -> Self {
        Self::new(id, String::from_utf8_lossy(bytes).into_owned())
    }
}

/// A normalized word. Ordering is byte-wise over the UTF-8 text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordToken(String);

impl WordToken {
    /// Accepts `s` only if it is already in normalized form.
    pub fn new(s: &str) -> Option<Self> {
        match normalize_word(s) {
            Some(tok) if tok.as_str() == s => Some(tok),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for WordToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for WordToken {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for WordToken {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// An ordered run of tokens. `sorted` records whether the canonical
/// ordering is known to hold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList {
    words: Vec<WordToken>,
    sorted: bool,
}

impl WordList {
    pub fn new(words: Vec<WordToken>) -> Self {
        Self {
            words,
            sorted: false,
        }
    }

    /// Wraps words the caller guarantees are already in canonical order.
    pub(crate) fn from_sorted_unchecked(words: Vec<WordToken>) -> Self {
        debug_assert!(words.windows(2).all(|w| w[0] <= w[1]));
        Self {
            words,
            sorted: true,
        }
    }

    /// Parses each string as a token, dropping anything that normalizes to
    /// nothing. Convenient for tests and fixtures.
    pub fn from_strs<S: AsRef<str>>(items: &[S]) -> Self {
        Self::new(
            items
                .iter()
                .filter_map(|s| normalize_word(s.as_ref()))
                .collect(),
        )
    }

    pub fn words(&self) -> &[WordToken] {
        &self.words
    }

    pub fn into_words(self) -> Vec<WordToken> {
        self.words
    }

    /// Lists of zero or one word are trivially sorted.
    pub fn is_sorted(&self) -> bool {
        self.sorted || self.words.len() <= 1
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, WordToken> {
        self.words.iter()
    }

    pub fn extend(&mut self, other: WordList) {
        if !other.is_empty() {
            self.sorted = false;
        }
        self.words.extend(other.words);
    }

    /// Owned word strings, mainly for assertions.
    pub fn to_strings(&self) -> Vec<String> {
        self.words.iter().map(|w| w.0.clone()).collect()
    }
}

impl<'a> IntoIterator for &'a WordList {
    type Item = &'a WordToken;
    type IntoIter = std::slice::Iter<'a, WordToken>;

    fn into_iter(self) -> Self::IntoIter {
        self.words.iter()
    }
}

impl FromIterator<WordToken> for WordList {
    fn from_iter<I: IntoIterator<Item = WordToken>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Lowercases `raw` and trims non-alphanumeric characters from both ends.
/// Returns `None` when nothing is left.
///
/// `raw` is expected to be a single whitespace-free fragment.
pub fn normalize_word(raw: &str) -> Option<WordToken> {
    let lowered: String = raw.chars().flat_map(char::to_lowercase).collect();
    let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else if trimmed.len() == lowered.len() {
        Some(WordToken(lowered))
    } else {
        Some(WordToken(trimmed.to_owned()))
    }
}

/// Splits on Unicode whitespace and normalizes each fragment, in text order.
pub fn tokenize(doc: &RawDocument) -> WordList {
    tokenize_str(&doc.text)
}

pub fn tokenize_str(text: &str) -> WordList {
    WordList::new(text.split_whitespace().filter_map(normalize_word).collect())
}

/// Stable sort under the canonical (byte-wise) ordering.
pub fn sort_words(list: WordList) -> WordList {
    let mut words = list.words;
    if !list.sorted {
        words.sort();
    }
    WordList {
        words,
        sorted: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(s: &str) -> Option<String> {
        normalize_word(s).map(WordToken::into_string)
    }

    // Character-class oracle: walk in from both ends while the char is not a
    // letter or digit, then lowercase what remains.
    fn boundary_strip_oracle(s: &str) -> Option<String> {
        let lowered: Vec<char> = s.chars().flat_map(char::to_lowercase).collect();
        let mut lo = 0;
        let mut hi = lowered.len();
        while lo < hi && !lowered[lo].is_alphanumeric() {
            lo += 1;
        }
        while hi > lo && !lowered[hi - 1].is_alphanumeric() {
            hi -= 1;
        }
        (lo < hi).then(|| lowered[lo..hi].iter().collect())
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(norm("Dog").as_deref(), Some("dog"));
        assert_eq!(norm("dog.").as_deref(), Some("dog"));
        assert_eq!(norm("---"), None);
        assert_eq!(norm("don't").as_deref(), Some("don't"));
        assert_eq!(norm("don't"), boundary_strip_oracle("don't"));
        assert_eq!(norm("\"Re-elect,\"").as_deref(), Some("re-elect"));
        assert_eq!(norm("2021.").as_deref(), Some("2021"));
        assert_eq!(norm(""), None);
    }

    #[test]
    fn tokenize_examples() {
        let d1 = RawDocument::new("1", "I want to test MapReduce");
        assert_eq!(
            tokenize(&d1).to_strings(),
            ["i", "want", "to", "test", "mapreduce"]
        );
        assert!(tokenize(&RawDocument::new("e", "")).is_empty());
        let d2 = RawDocument::new("2", "MapReduce is a cool algorithm to test.");
        let toks = tokenize(&d2);
        assert!(!toks.is_sorted());
        assert_eq!(
            toks.to_strings(),
            ["mapreduce", "is", "a", "cool", "algorithm", "to", "test"]
        );
    }

    #[test]
    fn case_and_punctuation_collapse() {
        let toks = tokenize_str("Dog dog. DOG!");
        assert_eq!(toks.to_strings(), ["dog", "dog", "dog"]);
    }

    #[test]
    fn sort_examples() {
        let s = sort_words(WordList::from_strs(&[
            "i",
            "want",
            "to",
            "test",
            "mapreduce",
        ]));
        assert!(s.is_sorted());
        assert_eq!(s.to_strings(), ["i", "mapreduce", "test", "to", "want"]);
        assert!(sort_words(WordList::default()).is_empty());
        let s = sort_words(WordList::from_strs(&[
            "mapreduce",
            "is",
            "a",
            "cool",
            "algorithm",
            "to",
            "test",
        ]));
        assert_eq!(
            s.to_strings(),
            ["a", "algorithm", "cool", "is", "mapreduce", "test", "to"]
        );
    }

    #[test]
    fn invalid_utf8_replaced() {
        let doc = RawDocument::from_bytes("x", b"hello \xff\xfe world");
        assert_eq!(tokenize(&doc).to_strings(), ["hello", "world"]);
    }

    #[test]
    fn word_token_new_rejects_unnormalized() {
        assert!(WordToken::new("dog").is_some());
        assert!(WordToken::new("Dog").is_none());
        assert!(WordToken::new("dog.").is_none());
        assert!(WordToken::new("").is_none());
    }

    proptest! {
        #[test]
        fn normalize_matches_oracle(s in "\\PC{0,12}") {
            prop_assume!(!s.chars().any(char::is_whitespace));
            prop_assert_eq!(norm(&s), boundary_strip_oracle(&s));
        }

        #[test]
        fn normalize_idempotent(s in "\\PC{0,16}") {
            if let Some(w) = norm(&s) {
                prop_assert_eq!(norm(&w), Some(w.clone()));
            }
        }

        #[test]
        fn ascii_tokens_meet_invariants(s in "[!-~]{0,20}") {
            if let Some(w) = norm(&s) {
                prop_assert!(!w.chars().any(char::is_whitespace));
                prop_assert!(!w.chars().any(char::is_uppercase));
                prop_assert!(w.chars().next().unwrap().is_alphanumeric());
                prop_assert!(w.chars().last().unwrap().is_alphanumeric());
            }
        }

        #[test]
        fn tokenize_never_grows(s in "\\PC{0,64}") {
            prop_assert!(tokenize_str(&s).len() <= s.split_whitespace().count());
        }

        #[test]
        fn sort_is_permutation(words in proptest::collection::vec("[a-e]{1,3}", 0..40)) {
            let list = WordList::from_strs(&words);
            let mut expect = list.to_strings();
            expect.sort();
            let sorted = sort_words(list);
            prop_assert_eq!(sorted.to_strings(), expect);
        }
    }
}
