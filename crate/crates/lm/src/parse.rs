//! Parsers for the structured replies the prompts ask for.
//!
//! All of them are total: malformed text yields an empty or fallback result.

use percent_encoding::percent_decode_str;
use storm_core::Perspective;

/// What the question asker says when it has nothing left to ask.
pub const END_PHRASE: &str = "Thank you so much for your help!";

/// Parses `<n>. <summary>: <description>` lines. Indices are assigned 1.. in
/// input order; index 0 is reserved for the basic fact writer.
pub fn parse_perspectives(text: &str) -> Vec<Perspective> {
    let mut out = Vec::new();
    for line in text.lines() {
        let Some(body) = strip_number(line.trim()) else { continue };
        let body = body.replace("**", "");
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (summary, description) = match body.split_once(':') {
            Some((s, d)) => (s.trim(), d.trim()),
            None => (body, ""),
        };
        if summary.is_empty() {
            continue;
        }
        out.push(Perspective { summary: summary.into(), description: description.into(), index: out.len() as u32 + 1 });
    }
    out
}

fn strip_number(line: &str) -> Option<&str> {
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')).map(str::trim_start)
}

/// One query per `- ` line, at most `cap`. Falls back to `question` itself
/// when no bullet survives.
pub fn parse_queries(text: &str, question: &str, cap: usize) -> Vec<String> {
    let mut out = bullets(text);
    out.truncate(cap);
    if out.is_empty() && cap > 0 && !question.trim().is_empty() {
        out.push(question.trim().to_string());
    }
    out
}

/// Bulleted or numbered list items, with surrounding quotes removed.
pub fn bullets(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|line| {
            let t = line.trim();
            let body = t
                .strip_prefix("- ")
                .or_else(|| t.strip_prefix("* "))
                .or_else(|| strip_number(t))?;
            let body = body.trim().trim_matches(|c| c == '"' || c == '\'' || c == '`').trim();
            (!body.is_empty()).then(|| body.to_string())
        })
        .collect()
}

/// Page titles from a list of Wikipedia urls or bare titles, deduplicated in
/// order. Non-Wikipedia urls are dropped.
pub fn parse_related_topics(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for line in text.lines() {
        let t = line.trim().trim_start_matches(['-', '*']).trim();
        let t = strip_number(t).unwrap_or(t).trim();
        if t.is_empty() {
            continue;
        }
        let title = if t.contains("://") {
            match wiki_title(t) {
                Some(title) => title,
                None => continue,
            }
        } else {
            t.to_string()
        };
        if !title.is_empty() && !out.contains(&title) {
            out.push(title);
        }
    }
    out
}

fn wiki_title(url: &str) -> Option<String> {
    let (_, rest) = url.split_once("wikipedia.org/wiki/")?;
    let segment = rest.split(['#', '?']).next()?;
    let segment = segment.rsplit('/').next().unwrap_or(segment);
    let decoded = percent_decode_str(segment).decode_utf8_lossy();
    Some(decoded.replace('_', " ").trim().to_string())
}

/// What the question asker produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AskerReply {
    Question(String),
    End,
    Empty,
}

pub fn parse_question(text: &str) -> AskerReply {
    if text.contains(END_PHRASE) {
        return AskerReply::End;
    }
    let lines: Vec<&str> = text.lines().map(strip_label).filter(|l| !l.is_empty()).collect();
    if let Some(q) = lines.iter().find(|l| l.ends_with('?')) {
        return AskerReply::Question(q.to_string());
    }
    let whole = lines.join(" ");
    if whole.is_empty() {
        AskerReply::Empty
    } else {
        AskerReply::Question(whole)
    }
}

fn strip_label(line: &str) -> &str {
    let mut t = line.trim();
    for label in ["Question:", "Wikipedia Writer:"] {
        if let Some(rest) = t.strip_prefix(label) {
            t = rest.trim();
        }
    }
    t
}

/// Leading yes/no of an entailment verdict; anything else is `None`.
pub fn parse_verdict(text: &str) -> Option<bool> {
    let word: String = text.trim().chars().take_while(|c| c.is_alphabetic()).collect::<String>().to_lowercase();
    match word.as_str() {
        "yes" | "true" | "supported" => Some(true),
        "no" | "false" | "unsupported" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perspectives_listing_format() {
        let p = parse_perspectives("1. event planner: logistics focus");
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].summary.as_str(), p[0].description.as_str(), p[0].index), ("event planner", "logistics focus", 1));
        assert!(parse_perspectives("").is_empty());
        let p = parse_perspectives("2. historian");
        assert_eq!((p[0].summary.as_str(), p[0].description.as_str()), ("historian", ""));
    }

    #[test]
    fn perspectives_keep_order_and_skip_noise() {
        let text = "Here are the editors:\n1. **Physicist**: theory: and more\n\n2) Chemist: synthesis\nnot numbered: x\n3. : nothing";
        let p = parse_perspectives(text);
        let got: Vec<_> = p.iter().map(|p| (p.summary.as_str(), p.description.as_str(), p.index)).collect();
        assert_eq!(got, vec![("Physicist", "theory: and more", 1), ("Chemist", "synthesis", 2)]);
    }

    #[test]
    fn queries_cap_and_fallback() {
        assert_eq!(parse_queries("- a\n- b", "q?", 5), vec!["a", "b"]);
        assert_eq!(parse_queries("", "What is X?", 5), vec!["What is X?"]);
        let eight: String = (1..=8).map(|i| format!("- q{i}\n")).collect();
        assert_eq!(parse_queries(&eight, "q", 5), vec!["q1", "q2", "q3", "q4", "q5"]);
        assert_eq!(parse_queries("- \"quoted\"\n-\n  -   spaced  ", "q", 5), vec!["quoted", "spaced"]);
    }

    #[test]
    fn related_topics() {
        assert_eq!(parse_related_topics("https://en.wikipedia.org/wiki/Opening_ceremony"), vec!["Opening ceremony"]);
        assert!(parse_related_topics("").is_empty());
        assert_eq!(parse_related_topics("Foo\nFoo\n"), vec!["Foo"]);
        let text = "1. https://en.wikipedia.org/wiki/Caf%C3%A9_culture#History\n- https://example.com/x\nhttps://en.wikipedia.org/wiki/Caf%C3%A9_culture";
        assert_eq!(parse_related_topics(text), vec!["Café culture"]);
    }

    #[test]
    fn questions() {
        assert_eq!(parse_question("Question: What year?\nmore"), AskerReply::Question("What year?".into()));
        assert_eq!(parse_question("Okay. Thank you so much for your help!"), AskerReply::End);
        assert_eq!(parse_question("  \n"), AskerReply::Empty);
        assert_eq!(parse_question("Tell me about it"), AskerReply::Question("Tell me about it".into()));
    }

    #[test]
    fn verdicts() {
        assert_eq!(parse_verdict("Yes."), Some(true));
        assert_eq!(parse_verdict(" no, because"), Some(false));
        assert_eq!(parse_verdict("maybe"), None);
    }

    proptest! {
        #[test]
        fn parsers_are_total(text in "\\PC{0,300}", cap in 0usize..8) {
            let _ = parse_perspectives(&text);
            prop_assert!(parse_queries(&text, "fallback?", cap).len() <= cap);
            let topics = parse_related_topics(&text);
            let mut dedup = topics.clone();
            dedup.dedup();
            prop_assert_eq!(dedup.len(), topics.len());
            let _ = parse_question(&text);
            let _ = parse_verdict(&text);
        }

        #[test]
        fn perspective_indices_are_sequential(lines in proptest::collection::vec("[a-z ]{1,10}(: [a-z]{0,8})?", 0..8)) {
            let text: String = lines.iter().enumerate().map(|(i, l)| format!("{}. {l}\n", i + 1)).collect();
            let p = parse_perspectives(&text);
            for (i, x) in p.iter().enumerate() {
                prop_assert_eq!(x.index as usize, i + 1);
            }
        }
    }
}
