//! Inline `[n]` citation markers.

/// Strips bracketed positive-integer markers from a sentence.
///
/// Returns the cleaned text and the cited ids in order of first appearance.
/// Anything that is not `[` digits `]` with a positive value is left as is.
pub fn extract_citations(sentence: &str) -> (String, Vec<u32>) {
    let mut ids: Vec<u32> = Vec::new();
    let mut out = String::with_capacity(sentence.len());
    let mut rest = sentence;
    while let Some(open) = rest.find('[') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let digits = after.bytes().take_while(u8::is_ascii_digit).count();
        let marker = (digits > 0 && after.as_bytes().get(digits) == Some(&b']'))
            .then(|| after[..digits].parse::<u32>().ok())
            .flatten()
            .filter(|&n| n > 0);
        match marker {
            Some(id) => {
                if !ids.contains(&id) {
                    ids.push(id);
                }
                rest = &after[digits + 1..];
                // "word [1] next" and "word [1]." must not leave stray spaces.
                let next = rest.chars().next();
                let next_is_gap = next.is_none_or(|c| c.is_whitespace() || is_closing_punct(c) || c == '[');
                if next_is_gap && out.ends_with(char::is_whitespace) {
                    let trimmed = out.trim_end().len();
                    out.truncate(trimmed);
                    if next.is_some_and(|c| c == '[') {
                        out.push(' ');
                    }
                }
            }
            None => {
                out.push('[');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    (out, ids)
}

fn is_closing_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | ')')
}

/// Renders a clean sentence with its markers placed before the terminal
/// punctuation, e.g. `Built in 2020[2][11].`.
pub fn render_cited(text: &str, ids: &[u32]) -> String {
    if ids.is_empty() {
        return text.to_string();
    }
    let markers: String = ids.iter().map(|i| format!("[{i}]")).collect();
    let body = text.trim_end();
    let split = body
        .char_indices()
        .rev()
        .take_while(|(_, c)| matches!(c, '.' | '!' | '?' | '"' | '\'' | '”' | '’'))
        .last()
        .map(|(i, _)| i);
    match split {
        Some(i) => format!("{}{markers}{}", &body[..i], &body[i..]),
        None => format!("{body}{markers}"),
    }
}
