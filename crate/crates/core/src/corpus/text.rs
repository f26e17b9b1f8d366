use std::collections::BTreeSet;

use super::PreprocessConfig;

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// Tokens shorter than `min_token_len` characters and purely numeric tokens
/// are dropped.
pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    tokenize_with(text, config.min_token_len)
}

pub(crate) fn tokenize_with(text: &str, min_token_len: usize) -> Vec<String> {
    // Lowercase first: some characters expand into non-alphanumeric
    // sequences, which would otherwise break re-tokenization.
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| t.chars().count() >= min_token_len)
        .filter(|t| !t.chars().all(char::is_numeric))
        .map(str::to_owned)
        .collect()
}

/// Drops stopwords and geographic words, preserving order.
pub fn remove_filtered(tokens: Vec<String>, config: &PreprocessConfig) -> Vec<String> {
    remove_in(tokens, &config.stopwords, &config.geo_words)
}

fn remove_in(
    tokens: Vec<String>,
    stopwords: &BTreeSet<String>,
    geo_words: &BTreeSet<String>,
) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t) && !geo_words.contains(t))
        .collect()
}
