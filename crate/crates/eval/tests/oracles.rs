use proptest::prelude::*;
use storm_core::Article;
use storm_eval::{citation_scores, rouge1, rouge_l, soft_cardinality, soft_count, soft_heading_recall, HeadingSet, SubstringJudge};
use storm_retrieval::{HashEmbedder, TableEmbedder};
use storm_testkit::{gen, oracle};

#[test]
fn soft_recall_matches_brute_force() {
    let e = HashEmbedder::new(8);
    for (g, p) in gen::heading_sets(7, 40) {
        let got = soft_heading_recall(&HeadingSet::new(g.clone()), &HeadingSet::new(p.clone()), &e).unwrap();
        let want = if p.is_empty() { 0.0 } else { oracle::soft_heading_recall(&g, &p, &e) };
        assert!((got - want).abs() < 1e-9, "{g:?} {p:?}: {got} vs {want}");
        let card = soft_cardinality(&HeadingSet::new(g.clone()), &e).unwrap();
        assert!((card - oracle::card(&g, &e)).abs() < 1e-9);
        for i in 0..g.len() {
            assert!((soft_count(&HeadingSet::new(g.clone()), i, &e).unwrap() - oracle::soft_count(&g, i, &e)).abs() < 1e-9);
        }
    }
}

#[test]
fn rouge_matches_brute_force() {
    for (g, p) in gen::heading_sets(11, 60) {
        let cand = g.join(" ");
        let reference = if p.is_empty() { "history".to_string() } else { p.join(" ") };
        let r1 = rouge1(&cand, &reference).unwrap();
        let (r, pr, f) = oracle::rouge1(&cand, &reference);
        assert!((r1.r - r).abs() < 1e-12 && (r1.p - pr).abs() < 1e-12 && (r1.f1 - f).abs() < 1e-12);
        let w: Vec<&str> = cand.split(' ').take(16).collect();
        let cand16 = w.join(" ");
        let rl = rouge_l(&cand16, &reference).unwrap();
        let (r, pr, f) = oracle::rouge_l(&cand16, &reference);
        assert!((rl.r - r).abs() < 1e-12 && (rl.p - pr).abs() < 1e-12 && (rl.f1 - f).abs() < 1e-12);
    }
}

#[test]
fn citation_scores_match_pair_enumeration() {
    let articles: Vec<Article> = gen::citation_articles(3, 10);
    for a in &articles {
        let s = citation_scores(a, &a.references, &SubstringJudge).unwrap();
        assert_eq!((s.recall, s.precision), oracle::citation_scores(a, &a.references), "{}", a.topic.title);
        for v in [s.recall, s.precision].into_iter().flatten() {
            assert!((0.0..=100.0).contains(&v));
        }
    }
}

fn heading() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof!["alpha", "beta", "gamma", "delta", "river", "bridge"], 1..4).prop_map(|w| w.join(" "))
}

/// One-hot vector per distinct heading, so different headings are orthogonal.
fn orthogonal(headings: &[String]) -> TableEmbedder {
    let mut distinct: Vec<&String> = headings.iter().collect();
    distinct.sort();
    distinct.dedup();
    let dim = distinct.len();
    distinct.iter().enumerate().fold(TableEmbedder::new(dim), |t, (i, h)| {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        t.with(h, v)
    })
}

proptest! {
    #[test]
    fn recall_of_itself_is_one(g in proptest::collection::vec(heading(), 1..8)) {
        let set = HeadingSet::new(g);
        let r = soft_heading_recall(&set, &set, &HashEmbedder::default()).unwrap();
        prop_assert_eq!(r, 1.0);
    }

    #[test]
    fn duplicates_have_cardinality_one(h in heading(), k in 1usize..10) {
        let c = soft_cardinality(&HeadingSet::new(vec![h; k]), &HashEmbedder::default()).unwrap();
        prop_assert_eq!(c, 1.0);
    }

    #[test]
    fn adding_an_uncovered_truth_heading_never_hurts(
        g in proptest::collection::vec(heading(), 1..6),
        p in proptest::collection::vec(heading(), 0..6),
    ) {
        let all: Vec<String> = g.iter().chain(&p).cloned().collect();
        let e = orthogonal(&all);
        let before = soft_heading_recall(&HeadingSet::new(g.clone()), &HeadingSet::new(p.clone()), &e).unwrap();
        if let Some(missing) = g.iter().find(|h| !p.contains(h)) {
            let mut more = p.clone();
            more.push(missing.clone());
            let after = soft_heading_recall(&HeadingSet::new(g.clone()), &HeadingSet::new(more), &e).unwrap();
            prop_assert!(after >= before - 1e-12, "{before} -> {after}");
        }
    }

    #[test]
    fn rouge_is_symmetric(a in "[a-d ]{1,30}", b in "[a-d ]{1,30}") {
        prop_assume!(!a.trim().is_empty() && !b.trim().is_empty());
        for f in [rouge1, rouge_l] {
            let ab = f(&a, &b).unwrap();
            let ba = f(&b, &a).unwrap();
            prop_assert_eq!(ab.f1, ba.f1);
            prop_assert_eq!(ab.r, ba.p);
            prop_assert_eq!(ab.p, ba.r);
        }
    }
}
