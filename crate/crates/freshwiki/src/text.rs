//! Plain-text cleanup, heading selection and reference counting.

/// End-of-article sections that hold links and citations, not prose.
const APPENDIX_SECTIONS: &[&str] = &[
    "see also", "references", "notes", "external links", "further reading", "bibliography", "sources", "citations", "footnotes",
    "notes and references", "works cited",
];

pub fn is_appendix_heading(heading: &str) -> bool {
    APPENDIX_SECTIONS.contains(&heading.trim().to_lowercase().as_str())
}

/// `== Heading ==` lines of an extract, as (level, heading) with level 1 for `==`.
fn heading_line(line: &str) -> Option<(usize, &str)> {
    let t = line.trim();
    let open = t.chars().take_while(|c| *c == '=').count();
    let close = t.chars().rev().take_while(|c| *c == '=').count();
    if open < 2 || open != close || t.len() <= open * 2 {
        return None;
    }
    Some((open - 1, t[open..t.len() - close].trim()))
}

fn is_table_residue(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with("{|") || t.starts_with("|}") || t.starts_with("|-") || t.starts_with('|') || t.starts_with('!')
}

/// Body text of a section-formatted extract: heading lines removed,
/// appendix sections and anything nested in them dropped, table rows
/// dropped, runs of blank lines collapsed.
pub fn clean_extract(extract: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    let mut skip_below: Option<usize> = None;
    for line in extract.lines() {
        if let Some((level, heading)) = heading_line(line) {
            match skip_below {
                Some(l) if level > l => {}
                _ => skip_below = is_appendix_heading(heading).then_some(level),
            }
            if !out.last().is_some_and(|l| l.is_empty()) {
                out.push("");
            }
            continue;
        }
        if skip_below.is_some() || is_table_residue(line) {
            continue;
        }
        let t = line.trim_end();
        if t.is_empty() && out.last().is_none_or(|l| l.is_empty()) {
            continue;
        }
        out.push(t);
    }
    out.join("\n").trim().to_string()
}

/// Sections kept as ground truth: (heading, level) with appendix sections
/// and their descendants removed.
pub fn content_headings(toc: &[(String, usize)]) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut skip_below: Option<usize> = None;
    for (heading, level) in toc {
        if let Some(l) = skip_below {
            if *level > l {
                continue;
            }
            skip_below = None;
        }
        if is_appendix_heading(heading) {
            skip_below = Some(*level);
            continue;
        }
        out.push((heading.clone(), *level));
    }
    out
}

/// Footnotes in wikitext: `<ref>` and `<ref name=...>` elements with a
/// body. Self-closing reuses of a named footnote are not counted again.
pub fn count_references(wikitext: &str) -> usize {
    let lower = wikitext.to_lowercase();
    let mut count = 0;
    let mut rest = lower.as_str();
    while let Some(pos) = rest.find("<ref") {
        let after = &rest[pos + 4..];
        let is_ref_tag = after.starts_with('>') || after.starts_with(char::is_whitespace);
        match after.find('>') {
            Some(end) => {
                if is_ref_tag && !after[..end].ends_with('/') {
                    count += 1;
                }
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    count
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extract_cleanup() {
        let raw = "Lead text.\n\n\n== History ==\nFounded in 1901.\n{| class=\"wikitable\"\n|-\n! Year !! Count\n| 1901 || 3\n|}\n=== Early years ===\nSmall beginnings.\n== See also ==\nOther page\n=== Nested ===\nmore links\n== Legacy ==\nStill remembered.\n";
        assert_eq!(clean_extract(raw), "Lead text.\n\nFounded in 1901.\n\nSmall beginnings.\n\nStill remembered.");
    }

    #[test]
    fn heading_lines() {
        assert_eq!(heading_line("== History =="), Some((1, "History")));
        assert_eq!(heading_line("=== A = B ==="), Some((2, "A = B")));
        assert_eq!(heading_line("x == y =="), None);
        assert_eq!(heading_line("===="), None);
    }

    #[test]
    fn appendix_headings_are_dropped_with_children() {
        let toc: Vec<(String, usize)> =
            [("History", 1), ("Early", 2), ("References", 1), ("Sub", 2), ("Legacy", 1)].iter().map(|(h, l)| (h.to_string(), *l)).collect();
        let kept: Vec<String> = content_headings(&toc).into_iter().map(|(h, _)| h).collect();
        assert_eq!(kept, ["History", "Early", "Legacy"]);
    }

    #[test]
    fn reference_counting() {
        let wt = r#"A.<ref>One</ref> B.<ref name="x">Two</ref> C.<ref name="x"/> D.<ref name=y /> E.<REF>Three</REF>
<references/> {{Reflist}} <reference>no</reference>"#;
        assert_eq!(count_references(wt), 3);
    }

    #[test]
    fn words_are_whitespace_tokens() {
        assert_eq!(word_count(" a  b\nc\t"), 3);
    }

    proptest::proptest! {
        #[test]
        fn cleaned_text_has_no_markup_lines(lines in proptest::collection::vec(proptest::prop_oneof![
            "[A-Za-z ]{0,20}\\.",
            "={2,4} [A-Za-z ]{1,12} ={2,4}",
            "== (References|See also|Notes) ==",
            "\\{\\|.*", "\\|-", "\\| [a-z0-9 ]{0,10}", "! [A-Za-z]{0,8}", "",
        ], 0..30)) {
            let cleaned = clean_extract(&lines.join("\n"));
            for line in cleaned.lines() {
                proptest::prop_assert!(heading_line(line).is_none() && !is_table_residue(line), "{line:?}");
            }
            proptest::prop_assert!(!cleaned.contains("\n\n\n"));
            proptest::prop_assert_eq!(clean_extract(&cleaned), cleaned.clone());
        }
    }
}
