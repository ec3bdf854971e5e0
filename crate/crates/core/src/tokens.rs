/// Provider-agnostic token estimate: whitespace words × 4/3, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    words_to_tokens(text.split_whitespace().count())
}

pub fn words_to_tokens(words: usize) -> usize {
    (words * 4).div_ceil(3)
}
