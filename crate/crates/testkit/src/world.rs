//! A small fictional subject with enough structure to reward follow-up
//! questions: every facet page mentions two subtopics and every subtopic
//! page mentions one deeper subtopic.

use std::collections::BTreeSet;

use storm_retrieval::{word_tokens, SearchHit};

pub const TOPIC: &str = "Aurora Tidal Barrage";
pub const GROUND_TRUTH_URL: &str = "https://en.wikipedia.org/wiki/Aurora_Tidal_Barrage";

pub struct Facet {
    pub heading: &'static str,
    pub keyword: &'static str,
    /// (subtopic, its deeper subtopic)
    pub subtopics: [(&'static str, &'static str); 2],
}

const fn f(heading: &'static str, keyword: &'static str, a: (&'static str, &'static str), b: (&'static str, &'static str)) -> Facet {
    Facet { heading, keyword, subtopics: [a, b] }
}

/// Facets anyone writing about the subject would ask about first.
pub const BASIC: &[Facet] = &[
    f("History", "founding era", ("Severnmouth survey", "ship Petrel"), ("royal commission", "minority dissent")),
    f("Location", "estuary setting", ("Carrow Sound", "lighthouse relocation"), ("spring tide range", "bore wave")),
    f("Design", "caisson layout", ("bulb turbine", "runner blade"), ("sluice gate", "hoist motors")),
    f("Construction", "building phase", ("cofferdam", "breach inquest"), ("workforce camp", "walkout")),
    f("Operation", "grid dispatch", ("ebb generation", "pumping mode"), ("maintenance schedule", "dry dock")),
];

/// Facets reachable only through a specialised perspective, one per persona.
pub const SPECIALIST: &[(&str, &str, Facet)] = &[
    ("Ecologist", "studies fish migration and the estuary habitat", f("Ecology", "fish migration", ("eel ladder", "elver count"), ("salt marsh loss", "compensation wetland"))),
    ("Energy economist", "examines project financing and electricity prices", f("Economics", "project financing", ("power purchase agreement", "indexation clause"), ("bond issue", "credit rating"))),
    ("Harbour pilot", "knows navigation lock traffic and shipping", f("Shipping", "navigation lock", ("harbourmaster", "vessel queue"), ("dredging", "spoil disposal"))),
    ("Local journalist", "follows local opposition and community life", f("Community", "local opposition", ("fishing cooperative", "hardship fund"), ("visitor centre", "causeway road"))),
    ("Planning lawyer", "tracks planning consent and environmental law", f("Regulation", "planning consent", ("public inquiry", "inspector findings"), ("habitats directive", "derogation case"))),
    ("Climate analyst", "weighs carbon payback and climate adaptation", f("Climate", "carbon payback", ("lifecycle emissions", "cement clinker"), ("sea level rise", "flood defence"))),
    ("Maritime historian", "documents maritime heritage of the estuary", f("Heritage", "maritime heritage", ("wreck dive", "iron hulk"), ("harbour archive", "ledger books"))),
];

pub fn all_facets() -> impl Iterator<Item = &'static Facet> {
    BASIC.iter().chain(SPECIALIST.iter().map(|(_, _, f)| f))
}

/// Every keyword, facet or subtopic, with the facet it belongs to.
pub fn keywords() -> Vec<(&'static str, &'static Facet)> {
    let mut out = Vec::new();
    for facet in all_facets() {
        out.push((facet.keyword, facet));
        for (a, b) in facet.subtopics {
            out.push((a, facet));
            out.push((b, facet));
        }
    }
    out
}

/// Keywords found in `text`, in order of first appearance.
pub fn keywords_in(text: &str) -> Vec<&'static str> {
    let lower = text.to_lowercase();
    let mut found: Vec<(usize, &'static str)> = keywords()
        .into_iter()
        .filter_map(|(k, _)| lower.find(&k.to_lowercase()).map(|p| (p, k)))
        .collect();
    found.sort();
    found.into_iter().map(|(_, k)| k).collect()
}

pub fn facet_of(keyword: &str) -> Option<&'static Facet> {
    keywords().into_iter().find(|(k, _)| k.eq_ignore_ascii_case(keyword)).map(|(_, f)| f)
}

fn slug(text: &str) -> String {
    word_tokens(text).join("-")
}

#[derive(Debug, Clone)]
pub struct Page {
    pub hit: SearchHit,
    terms: BTreeSet<String>,
    prominence: u8,
}

fn page(url: String, title: String, snippet: String, keyword: &str, prominence: u8) -> Page {
    let mut terms: BTreeSet<String> = word_tokens(TOPIC).into_iter().collect();
    terms.extend(word_tokens(keyword));
    // Pages about a facet or its first-level subtopics also match the facet heading.
    if let Some(f) = all_facets().find(|f| f.keyword == keyword || f.subtopics.iter().any(|(a, _)| *a == keyword)) {
        terms.extend(word_tokens(f.heading));
    }
    Page { hit: SearchHit { url, title, description: snippet.clone(), snippets: vec![snippet] }, terms, prominence }
}

/// The whole searchable web of the world.
pub fn pages() -> Vec<Page> {
    let mut out = vec![
        page(GROUND_TRUTH_URL.into(), "Aurora Tidal Barrage - Wikipedia".into(), "The Aurora Tidal Barrage is a tidal power scheme across the Aurora estuary.".into(), "", 3),
        page("https://aurora-barrage-fans.blogspot.com/".into(), "Barrage fan blog".into(), "We love the Aurora Tidal Barrage and post photos every week.".into(), "", 3),
    ];
    let overview = [
        ("https://www.energy-atlas.example/aurora", "Aurora scheme profile", "The Aurora Tidal Barrage spans eleven kilometres of estuary. It is one of the largest tidal schemes in Europe."),
        ("https://www.coastal-review.example/barrages/aurora", "Aurora barrage overview", "The barrage generates power on falling tides. Its operator reports output to the national grid."),
        ("https://news.example.org/aurora-barrage-explained", "The barrage explained", "The Aurora Tidal Barrage took nine years to build. It remains a subject of public debate."),
        ("https://www.engineering-digest.example/aurora", "Aurora at a glance", "Engineers regard the Aurora Tidal Barrage as a landmark civil structure. Annual output exceeds two terawatt hours."),
    ];
    for (url, title, snippet) in overview {
        out.push(page(url.into(), title.into(), snippet.into(), "", 2));
    }
    let sites = ["www.estuary-trust.example", "archive.coastnews.example", "www.power-journal.example"];
    for facet in all_facets() {
        let [(a, a2), (b, b2)] = facet.subtopics;
        out.push(page(
            format!("https://{}/{}", sites[0], slug(facet.keyword)),
            format!("{} of the Aurora barrage", facet.heading),
            format!("The {} of the Aurora Tidal Barrage is well documented. Accounts of the {} often turn to the {} and the {}.", facet.keyword, facet.keyword, a, b),
            facet.keyword,
            1,
        ));
        for (sub, deeper) in [(a, Some(a2)), (b, Some(b2)), (a2, None), (b2, None)] {
            for (i, site) in sites.iter().enumerate() {
                let lead = match i {
                    0 => format!("The {sub} shaped the Aurora Tidal Barrage in lasting ways."),
                    1 => format!("Reporting on the {sub} at Aurora drew wide attention."),
                    _ => format!("Records describe the {sub} of the Aurora scheme in detail."),
                };
                let snippet = match deeper {
                    Some(d) => format!("{lead} Later work examined the {d} as well."),
                    None => format!("{lead} Figures for the {sub} were published in {}.", 1971 + i),
                };
                out.push(page(format!("https://{site}/{}/{}", slug(facet.keyword), slug(sub)), format!("{} ({})", capitalise(sub), facet.heading), snippet, sub, 0));
            }
        }
    }
    out
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Top `k` pages by shared words with `query`, broader pages first on ties.
pub fn search(pages: &[Page], query: &str, k: usize) -> Vec<SearchHit> {
    let q: BTreeSet<String> = word_tokens(query).into_iter().collect();
    let mut scored: Vec<(usize, u8, &Page)> = pages.iter().map(|p| (p.terms.intersection(&q).count(), p.prominence, p)).filter(|(s, _, _)| *s > 0).collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.hit.url.cmp(&b.2.hit.url)));
    scored.into_iter().take(k).map(|(_, _, p)| p.hit.clone()).collect()
}

/// Headings of the human-written article: every facet, with its two
/// subtopics as subsections.
pub fn ground_truth_headings() -> Vec<String> {
    let mut out = Vec::new();
    for facet in all_facets() {
        out.push(facet.heading.to_string());
        out.extend(facet.subtopics.iter().map(|(a, _)| capitalise(a)));
    }
    out
}

/// Plain text of the human-written article.
pub fn ground_truth_text() -> String {
    let mut paras = vec![format!("The {TOPIC} is a tidal power scheme across the Aurora estuary near Carrow Sound.")];
    for facet in all_facets() {
        let [(a, a2), (b, b2)] = facet.subtopics;
        paras.push(format!(
            "The {} of the {TOPIC} is central to its {}. Accounts discuss the {a} and the {a2}. Others focus on the {b} and the {b2}.",
            facet.keyword,
            facet.heading.to_lowercase()
        ));
    }
    paras.join("\n\n")
}
