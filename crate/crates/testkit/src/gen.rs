//! Seeded generators of small metric inputs.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use storm_core::{Article, ArticleSection, CitedSentence, RefId, ReferenceStore, SourceDocument, Topic};

use crate::fixed_time;

const VOCAB: &[&str] = &[
    "history", "early", "life", "career", "design", "construction", "legacy", "reception", "awards", "impact", "economy", "politics",
];

/// `count` (ground truth, prediction) heading pairs. Ground truths have one
/// to six headings, predictions zero to six, headings one to three words.
pub fn heading_sets(seed: u64, count: usize) -> Vec<(Vec<String>, Vec<String>)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let heading = |rng: &mut StdRng| {
        let n = rng.random_range(1..=3);
        (0..n).map(|_| *VOCAB.choose(rng).expect("vocab")).collect::<Vec<_>>().join(" ")
    };
    (0..count)
        .map(|_| {
            let g = rng.random_range(1..=6);
            let p = rng.random_range(0..=6);
            let gs = (0..g).map(|_| heading(&mut rng)).collect();
            let ps = (0..p).map(|_| heading(&mut rng)).collect();
            (gs, ps)
        })
        .collect()
}

/// Articles whose sentences are copied from, cited to the wrong, or absent
/// from the snippets of a small reference store, including uncited
/// sentences, multi-citation sentences and ids that do not resolve.
pub fn citation_articles(seed: u64, count: usize) -> Vec<Article> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|k| citation_article(&mut rng, k)).collect()
}

fn citation_article(rng: &mut StdRng, k: usize) -> Article {
    let doc_count = rng.random_range(2..=5);
    let mut counter = 0;
    let mut fact = |rng: &mut StdRng| {
        counter += 1;
        let words: Vec<&str> = (0..3).map(|_| *VOCAB.choose(rng).expect("vocab")).collect();
        format!("Fact {k}-{counter} about {}.", words.join(" "))
    };
    let mut store = ReferenceStore::new();
    let mut docs: Vec<Vec<String>> = Vec::new();
    for d in 0..doc_count {
        let snippets: Vec<String> = (0..rng.random_range(1..=3)).map(|_| (0..2).map(|_| fact(rng)).collect::<Vec<_>>().join(" ")).collect();
        store
            .insert(SourceDocument {
                url: format!("https://article{k}.example/doc{d}"),
                title: format!("Doc {d}"),
                snippets: snippets.clone(),
                retrieved_at: fixed_time(),
                trusted: true,
            })
            .expect("unique urls");
        docs.push(snippets.join(" ").split_inclusive('.').map(|s| s.trim().to_string()).collect());
    }
    let ids: Vec<RefId> = store.ids().collect();
    let mut sections = Vec::new();
    for s in 0..rng.random_range(1..=3) {
        let mut sec = ArticleSection::new(vec![format!("Section {s}")]);
        for _ in 0..rng.random_range(1..=5) {
            let d = rng.random_range(0..doc_count);
            let own = docs[d].choose(rng).expect("doc sentences").clone();
            let other = ids[(d + 1) % doc_count];
            let sentence = match rng.random_range(0..6) {
                0 => CitedSentence::new(own, vec![ids[d]]),
                1 => CitedSentence::new(own, vec![ids[d], other]),
                2 => CitedSentence::new(own, vec![other]),
                3 => CitedSentence::uncited(own),
                4 => CitedSentence::new(fact(rng), vec![ids[d]]),
                _ => CitedSentence::new(own, vec![ids[d], RefId(99)]),
            };
            sec.sentences.push(sentence);
        }
        sections.push(sec);
    }
    Article {
        topic: Topic::new(format!("Constructed {k}")).expect("topic"),
        lead: vec![CitedSentence::uncited("A lead sentence that is never scored.")],
        sections,
        references: store,
    }
}
