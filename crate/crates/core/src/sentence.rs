//! Rule-based sentence splitting.
//!
//! A boundary is a run of `.`, `!` or `?` (optionally followed by closing
//! quotes, brackets and `[n]` citation markers) followed by whitespace and
//! a token that starts with an uppercase letter, a digit, or an opening
//! quote or bracket. Blank lines always end a sentence.
//!
//! A period does not end a sentence after a known abbreviation (`No.`,
//! `et al.`, `e.g.`, `i.e.`, titles such as `Dr.`) or inside a run of
//! single-letter initials that leads into a capitalized name
//! (`J. R. R. Tolkien`). Known failure modes: `Plan A. Then ...` is kept as one
//! sentence, and an abbreviation that really does end a sentence
//! (`... and Co. The`) is not split.

const ABBREVIATIONS: &[&str] = &[
    "no", "nos", "e.g", "i.e", "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "cf", "approx", "fig",
    "gen", "gov", "lt", "col", "sgt", "rev", "mt", "ft", "vol", "pp", "ca",
];

/// Splits prose into sentences. Each output is a trimmed slice of the input.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for para in paragraphs(text) {
        split_paragraph(para, &mut out);
    }
    out
}

fn paragraphs(text: &str) -> impl Iterator<Item = &str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut blank_run = false;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let is_blank = line.trim().is_empty();
        if is_blank && !blank_run {
            parts.push(&text[start..offset]);
        }
        if !is_blank && blank_run {
            start = offset;
        }
        blank_run = is_blank;
        offset += line.len();
    }
    if !blank_run {
        parts.push(&text[start..]);
    }
    parts.into_iter().map(str::trim).filter(|p| !p.is_empty())
}

fn split_paragraph(para: &str, out: &mut Vec<String>) {
    let chars: Vec<(usize, char)> = para.char_indices().collect();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (_, c) = chars[i];
        if !matches!(c, '.' | '!' | '?' | '…') {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '…') {
            j += 1;
        }
        let single_period = c == '.' && j == i + 1;
        // Trailing closers and citation markers stay with the sentence.
        loop {
            if j < chars.len() && matches!(chars[j].1, '"' | '\'' | '”' | '’' | ')' | ']') {
                j += 1;
                continue;
            }
            if let Some(end) = marker_end(&chars, j) {
                j = end;
                continue;
            }
            break;
        }
        let end_byte = chars.get(j).map_or(para.len(), |&(b, _)| b);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k == j || k >= chars.len() {
            i = j.max(i + 1);
            continue;
        }
        let next = chars[k].1;
        let opens = next.is_uppercase() || next.is_ascii_digit() || matches!(next, '"' | '\'' | '“' | '‘' | '(' | '[');
        if opens && !(single_period && is_non_terminal_period(para, &chars, start, i, k)) {
            let sentence = para[chars[start].0..end_byte].trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            start = k;
        }
        i = k;
    }
    if start < chars.len() {
        let tail = para[chars[start].0..].trim();
        if !tail.is_empty() {
            out.push(tail.to_string());
        }
    }
}

/// End index (exclusive) of a `[digits]` marker starting at `at`.
fn marker_end(chars: &[(usize, char)], at: usize) -> Option<usize> {
    if chars.get(at)?.1 != '[' {
        return None;
    }
    let mut k = at + 1;
    while k < chars.len() && chars[k].1.is_ascii_digit() {
        k += 1;
    }
    (k > at + 1 && chars.get(k)?.1 == ']').then_some(k + 1)
}

/// The word ending at `dot` (a single `.`), lowercase, without the period.
fn word_before(para: &str, chars: &[(usize, char)], start: usize, dot: usize) -> String {
    let mut b = dot;
    while b > start && !chars[b - 1].1.is_whitespace() {
        b -= 1;
    }
    para[chars[b].0..chars[dot].0].trim_start_matches(['(', '"', '\'']).to_lowercase()
}

fn is_non_terminal_period(para: &str, chars: &[(usize, char)], start: usize, dot: usize, next: usize) -> bool {
    let word = word_before(para, chars, start, dot);
    if ABBREVIATIONS.contains(&word.as_str()) {
        return true;
    }
    if word == "al" {
        let before = chars[start..dot].iter().rposition(|&(_, c)| c.is_whitespace());
        if let Some(ws) = before.map(|p| p + start) {
            if word_before(para, chars, start, ws) == "et" {
                return true;
            }
        }
    }
    if is_initial(&word) {
        return is_name_initial(para, chars, start, dot, next);
    }
    false
}

fn is_initial(word: &str) -> bool {
    let mut cs = word.chars();
    matches!((cs.next(), cs.next()), (Some(c), None) if c.is_alphabetic())
}

fn is_initial_token(tok: &str) -> bool {
    tok.ends_with('.') && {
        let bare = tok.trim_end_matches('.');
        is_initial(bare) && bare.chars().all(char::is_uppercase)
    }
}

fn is_capitalized_word(tok: &str) -> bool {
    let bare = tok.trim_end_matches(['.', ',', ';', ':', '!', '?']);
    bare.chars().next().is_some_and(char::is_uppercase) && bare.chars().count() > 1
}

/// Decides whether the single letter ending at `dot` is part of a name.
///
/// A run of two or more initials followed by a capitalized word is a name
/// (`J. R. R. Tolkien`), as is a lone initial between two capitalized words
/// (`John F. Kennedy`). Anything else ends the sentence (`showed X. Then`).
fn is_name_initial(para: &str, chars: &[(usize, char)], start: usize, dot: usize, next: usize) -> bool {
    let letter = chars[dot - 1].1;
    if !letter.is_uppercase() {
        return false;
    }
    let before: Vec<&str> = para[chars[start].0..chars[dot].0].split_whitespace().collect();
    let prev = &before[..before.len().saturating_sub(1)];
    let prev_initials = prev.iter().rev().take_while(|t| is_initial_token(t)).count();
    let prev_word = prev.iter().rev().nth(prev_initials);

    let mut next_initials = 0;
    let mut followed_by_name = false;
    for tok in para[chars[next].0..].split_whitespace() {
        if is_initial_token(tok) {
            next_initials += 1;
            continue;
        }
        followed_by_name = is_capitalized_word(tok);
        break;
    }
    if !followed_by_name {
        return false;
    }
    prev_initials + 1 + next_initials >= 2 || prev_word.is_some_and(|w| is_capitalized_word(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(s: &str) -> Vec<String> {
        split_sentences(s)
    }

    #[test]
    fn trivial() {
        assert_eq!(split("A. B."), vec!["A.", "B."]);
        assert!(split("").is_empty());
        assert!(split("   \n ").is_empty());
        assert_eq!(split("one"), vec!["one"]);
    }

    #[test]
    fn et_al_does_not_split() {
        assert_eq!(split("Bhatia et al. showed X. Then Y."), vec!["Bhatia et al. showed X.", "Then Y."]);
    }

    #[test]
    fn abbreviations_and_numbers() {
        assert_eq!(split("See No. 5 here. Next one."), vec!["See No. 5 here.", "Next one."]);
        assert_eq!(split("It was No.12847 in 2.5 s. Done."), vec!["It was No.12847 in 2.5 s.", "Done."]);
        assert_eq!(split("Use tools, e.g. Rust. Always."), vec!["Use tools, e.g. Rust.", "Always."]);
        assert_eq!(split("Dr. Who arrived. He left."), vec!["Dr. Who arrived.", "He left."]);
    }

    #[test]
    fn initials() {
        assert_eq!(split("J. R. R. Tolkien wrote it. It sold."), vec!["J. R. R. Tolkien wrote it.", "It sold."]);
        assert_eq!(split("Then John F. Kennedy spoke. Done."), vec!["Then John F. Kennedy spoke.", "Done."]);
        assert_eq!(split("They tested X. Then Y."), vec!["They tested X.", "Then Y."]);
    }

    #[test]
    fn citations_and_quotes_stay_attached() {
        assert_eq!(split("It opened in 2018[1]. It closed[2][3]. Fine."), vec![
            "It opened in 2018[1].",
            "It closed[2][3].",
            "Fine."
        ]);
        assert_eq!(split("Done.[4] Next."), vec!["Done.[4]", "Next."]);
        assert_eq!(split("He said \"stop.\" Then left."), vec!["He said \"stop.\"", "Then left."]);
    }

    #[test]
    fn lowercase_continuation_not_split() {
        assert_eq!(split("Wait... then it ran. OK!"), vec!["Wait... then it ran.", "OK!"]);
        assert_eq!(split("Really?! Yes."), vec!["Really?!", "Yes."]);
    }

    #[test]
    fn blank_lines_split() {
        assert_eq!(split("no period here\n\nsecond para"), vec!["no period here", "second para"]);
    }

    #[test]
    fn five_sentence_fixture() {
        let para = "The Crimean Bridge spans the Kerch Strait. It opened to road traffic in May 2018. \
                    Rail service began on 25 December 2019, according to Bhatia et al. in their survey. \
                    On 8 October 2022 an explosion damaged one of the road spans! \
                    Was the damage repaired by J. K. Smith and colleagues?";
        assert_eq!(split(para).len(), 5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn squash(s: &str) -> String {
            s.chars().filter(|c| !c.is_whitespace()).collect()
        }

        proptest! {
            #[test]
            fn concatenation_reproduces_input(s in "[A-Za-z .!?\\[\\]0-9\n\"]{0,200}") {
                let parts = split_sentences(&s);
                prop_assert_eq!(squash(&parts.concat()), squash(&s));
                prop_assert_eq!(parts.is_empty(), s.trim().is_empty());
            }
        }
    }
}
