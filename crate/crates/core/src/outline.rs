//! Multi-level heading trees in `#` markup.
//!
//! An outline is linearized one heading per line, the number of leading `#`
//! giving the depth. Parsing is total: model output is noisy, so lines that
//! are not headings are skipped and nesting that jumps more than one level is
//! clamped to `parent + 1` rather than rejected.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineNode {
    pub heading: String,
    pub level: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<OutlineNode>,
}

impl OutlineNode {
    pub fn new(heading: impl Into<String>, level: usize) -> Self {
        OutlineNode { heading: heading.into(), level, children: Vec::new() }
    }

    pub fn with_children(mut self, children: Vec<OutlineNode>) -> Self {
        self.children = children;
        self
    }

    /// Headings of every node strictly below this one, preorder.
    pub fn descendant_headings(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a OutlineNode, out: &mut Vec<&'a str>) {
            for c in &node.children {
                out.push(c.heading.as_str());
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    fn preorder<'a>(&'a self, out: &mut Vec<&'a OutlineNode>) {
        out.push(self);
        for c in &self.children {
            c.preorder(out);
        }
    }

    fn shift_levels(&mut self, delta: isize) {
        self.level = (self.level as isize + delta).max(1) as usize;
        for c in &mut self.children {
            c.shift_levels(delta);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub nodes: Vec<OutlineNode>,
}

impl Outline {
    pub fn new(nodes: Vec<OutlineNode>) -> Self {
        Outline { nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Every node in document order.
    pub fn preorder(&self) -> Vec<&OutlineNode> {
        let mut out = Vec::new();
        for n in &self.nodes {
            n.preorder(&mut out);
        }
        out
    }

    /// All-level headings, flattened in document order.
    pub fn headings(&self) -> Vec<String> {
        self.preorder().into_iter().map(|n| n.heading.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.preorder().len()
    }

    /// Checks the structural invariants: non-empty single-line headings,
    /// roots at level 1, children exactly one level below their parent.
    pub fn is_valid(&self) -> bool {
        fn ok(node: &OutlineNode, expected: usize) -> bool {
            let h = node.heading.trim();
            node.level == expected
                && !h.is_empty()
                && h == node.heading
                && !node.heading.contains('\n')
                && !node.heading.starts_with('#')
                && node.children.iter().all(|c| ok(c, expected + 1))
        }
        self.nodes.iter().all(|n| ok(n, 1))
    }

    /// Drops a heading that merely repeats the page title.
    ///
    /// Models often open an outline with `# <topic>`. When that node is the
    /// only root its children are promoted one level; when other roots exist
    /// and it has no children it is removed.
    pub fn strip_title(mut self, title: &str) -> Self {
        let is_title = |n: &OutlineNode| n.heading.trim().eq_ignore_ascii_case(title.trim());
        if self.nodes.len() == 1 && is_title(&self.nodes[0]) && !self.nodes[0].children.is_empty() {
            let root = self.nodes.remove(0);
            self.nodes = root.children;
            for n in &mut self.nodes {
                n.shift_levels(-1);
            }
        } else if self.nodes.len() > 1 {
            self.nodes.retain(|n| !(is_title(n) && n.children.is_empty()));
        }
        self
    }
}

/// Outcome of [`parse_outline`] with a tally of what was repaired or skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutlineParse {
    pub outline: Outline,
    /// Non-blank lines that were not headings.
    pub skipped_lines: usize,
    /// Heading markers with no text after them.
    pub empty_headings: usize,
    /// Headings whose depth was reduced to fit under their parent.
    pub clamped: usize,
}

impl OutlineParse {
    pub fn warnings(&self) -> usize {
        self.skipped_lines + self.empty_headings + self.clamped
    }
}

/// Parses `#`-prefixed heading lines into a tree.
pub fn parse_outline(text: &str) -> OutlineParse {
    let mut report = OutlineParse::default();
    // (heading, level) in document order after clamping.
    let mut flat: Vec<(String, usize)> = Vec::new();
    let mut depth = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let hashes = line.chars().take_while(|&c| c == '#').count();
        if hashes == 0 {
            report.skipped_lines += 1;
            continue;
        }
        let heading = clean_heading(&line[hashes..]);
        if heading.is_empty() {
            report.empty_headings += 1;
            continue;
        }
        let level = if hashes > depth + 1 {
            report.clamped += 1;
            depth + 1
        } else {
            hashes
        };
        depth = level;
        flat.push((heading.to_string(), level));
    }
    report.outline = Outline::new(build_tree(flat));
    report
}

fn clean_heading(raw: &str) -> &str {
    let mut h = raw.trim_start_matches(|c: char| c == '#' || c.is_whitespace()).trim_end();
    // Closing sequence as in `## Title ##`.
    let stripped = h.trim_end_matches('#');
    if stripped.len() < h.len() && stripped.ends_with(char::is_whitespace) {
        h = stripped.trim_end();
    }
    h
}

fn build_tree(flat: Vec<(String, usize)>) -> Vec<OutlineNode> {
    // Stack of open nodes; index i holds the node at level i + 1.
    let mut stack: Vec<OutlineNode> = Vec::new();
    let mut roots = Vec::new();
    fn close(stack: &mut Vec<OutlineNode>, roots: &mut Vec<OutlineNode>, keep: usize) {
        while stack.len() > keep {
            let node = stack.pop().expect("non-empty stack");
            match stack.last_mut() {
                Some(parent) => parent.children.push(node),
                None => roots.push(node),
            }
        }
    }
    for (heading, level) in flat {
        close(&mut stack, &mut roots, level - 1);
        stack.push(OutlineNode::new(heading, level));
    }
    close(&mut stack, &mut roots, 0);
    roots
}

/// Linearizes an outline, one `#`-prefixed heading per line in preorder.
pub fn serialize_outline(outline: &Outline) -> String {
    outline
        .preorder()
        .into_iter()
        .map(|n| format!("{} {}", "#".repeat(n.level), n.heading))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(h: &str, level: usize, children: Vec<OutlineNode>) -> OutlineNode {
        OutlineNode::new(h, level).with_children(children)
    }

    #[test]
    fn parses_two_levels() {
        let p = parse_outline("# History\n## Origins");
        assert_eq!(p.outline.nodes, vec![node("History", 1, vec![node("Origins", 2, vec![])])]);
        assert_eq!(p.warnings(), 0);
    }

    #[test]
    fn empty_input() {
        assert!(parse_outline("").outline.is_empty());
        assert!(parse_outline("no headings here\nat all").outline.is_empty());
    }

    #[test]
    fn deep_first_heading_is_clamped_to_root() {
        let p = parse_outline("### Deep\n# Top");
        assert_eq!(p.outline.nodes, vec![node("Deep", 1, vec![]), node("Top", 1, vec![])]);
        assert_eq!(p.clamped, 1);
    }

    #[test]
    fn skip_levels_clamped_under_parent() {
        let p = parse_outline("# A\n#### B\n## C\n### D");
        assert_eq!(
            p.outline.nodes,
            vec![node("A", 1, vec![node("B", 2, vec![]), node("C", 2, vec![node("D", 3, vec![])])])]
        );
        assert!(p.outline.is_valid());
    }

    #[test]
    fn noise_is_counted() {
        let p = parse_outline("Here is the outline:\n# A\n#\n  ## B  \n");
        assert_eq!(p.skipped_lines, 1);
        assert_eq!(p.empty_headings, 1);
        assert_eq!(p.outline.headings(), vec!["A", "B"]);
    }

    #[test]
    fn serializes_preorder() {
        let o = Outline::new(vec![
            node("A", 1, vec![node("B", 2, vec![node("C", 3, vec![])]), node("D", 2, vec![])]),
            node("E", 1, vec![]),
        ]);
        assert_eq!(serialize_outline(&o), "# A\n## B\n### C\n## D\n# E");
        assert_eq!(serialize_outline(&Outline::default()), "");
        assert_eq!(
            serialize_outline(&parse_outline("# History\n## Origins").outline),
            "# History\n## Origins"
        );
    }

    #[test]
    fn strips_title_root() {
        let o = parse_outline("# LK-99\n## History\n### Discovery\n## Reception").outline;
        let s = o.strip_title("lk-99");
        assert_eq!(serialize_outline(&s), "# History\n## Discovery\n# Reception");
        let o = parse_outline("# LK-99\n# History").outline.strip_title("LK-99");
        assert_eq!(serialize_outline(&o), "# History");
    }

    #[test]
    fn descendants() {
        let o = parse_outline("# A\n## B\n### C\n## D").outline;
        assert_eq!(o.nodes[0].descendant_headings(), vec!["B", "C", "D"]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn heading() -> impl Strategy<Value = String> {
            "[A-Za-z0-9][A-Za-z0-9 ,'()-]{0,20}[A-Za-z0-9]".prop_map(|s| s.trim().to_string())
        }

        fn tree(level: usize, depth: u32) -> BoxedStrategy<OutlineNode> {
            let leaf = heading().prop_map(move |h| OutlineNode::new(h, level));
            if depth == 0 {
                return leaf.boxed();
            }
            (heading(), prop::collection::vec(tree(level + 1, depth - 1), 0..4))
                .prop_map(move |(h, c)| OutlineNode::new(h, level).with_children(c))
                .boxed()
        }

        pub(super) fn outline() -> impl Strategy<Value = Outline> {
            prop::collection::vec(tree(1, 3), 0..6).prop_map(Outline::new)
        }

        proptest! {
            #[test]
            fn round_trip(o in outline()) {
                prop_assert!(o.is_valid());
                let text = serialize_outline(&o);
                let back = parse_outline(&text);
                prop_assert_eq!(back.warnings(), 0);
                prop_assert_eq!(back.outline, o);
            }

            #[test]
            fn parse_is_total(s in "\\PC*") {
                let p = parse_outline(&s);
                prop_assert!(p.outline.is_valid());
            }
        }
    }
}
