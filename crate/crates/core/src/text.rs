//! Headline tokenization shared by the hashing embedder and LDA.

use alloc::string::String;
use alloc::vec::Vec;

/// Lowercases `text`, splits on anything that is not alphanumeric and drops
/// tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(|t| t.to_lowercase())
        .collect()
}
