mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use common::*;
use storm_core::{DialogueTurn, OrderingKey, Outline, OutlineNode, Perspective, ReferenceStore, RunMode, BASIC_FACT_DESCRIPTION};
use storm_lm::{names, ChatRequest, LmError};
use storm_pipeline::prewriting::*;
use storm_pipeline::{PipelineError, PrewritingConfig};

fn cfg(n: usize, m: usize) -> PrewritingConfig {
    PrewritingConfig { n, m, ..PrewritingConfig::default() }
}

fn perspectives_reply(k: usize) -> String {
    (1..=k).map(|i| format!("{i}. Editor {i}: focuses on aspect {i}")).collect::<Vec<_>>().join("\n")
}

#[test]
fn perspectives_truncated_to_n_after_basic_writer() {
    let reply = perspectives_reply(7);
    let s = services_with(move |_| Ok(reply.clone()), no_search());
    let p = discover_perspectives(&topic(), &cfg(5, 5), &s).unwrap();
    assert_eq!(p.len(), 6);
    assert_eq!(p[0].description, BASIC_FACT_DESCRIPTION);
    assert_eq!(p[5].summary, "Editor 5");
    assert_eq!(p.iter().map(|x| x.index).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
}

#[test]
fn perspectives_not_padded() {
    let s = services_with(|_| Ok(perspectives_reply(2)), no_search());
    let p = discover_perspectives(&topic(), &cfg(5, 5), &s).unwrap();
    assert_eq!(p.iter().map(|x| x.summary.as_str()).collect::<Vec<_>>(), vec!["Basic fact writer", "Editor 1", "Editor 2"]);
}

#[test]
fn zero_perspectives_config_needs_no_model() {
    let s = services_with(|_| Err(LmError::Backend("must not be called".into())), no_search());
    assert_eq!(discover_perspectives(&topic(), &cfg(0, 5), &s).unwrap(), vec![Perspective::basic_fact_writer()]);
}

#[test]
fn perspectives_retry_once_then_basic_writer_only() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let s = services_with(
        move |_| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok("I cannot help with that.".into())
        },
        no_search(),
    );
    assert_eq!(discover_perspectives(&topic(), &cfg(5, 5), &s).unwrap().len(), 1);
    assert_eq!(calls.load(Ordering::SeqCst), 2);
}

fn ask(reply: &'static str) -> Question {
    let s = services_with(move |_| Ok(reply.into()), no_search());
    gen_question(&topic(), Some(&Perspective::basic_fact_writer()), &[], 0, &s).unwrap()
}

#[test]
fn question_extraction() {
    assert_eq!(ask("Thank you so much for your help!"), Question::End);
    assert_eq!(ask("What was the budget?"), Question::Ask("What was the budget?".into()));
    assert_eq!(ask("Who designed it?\nWhen did it open?"), Question::Ask("Who designed it?".into()));
    assert_eq!(ask("Great, thanks. Thank you so much for your help!"), Question::End);
}

#[test]
fn empty_question_retried_then_ends() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let s = services_with(
        move |_| {
            c.fetch_add(1, Ordering::SeqCst);
            Ok("   ".into())
        },
        no_search(),
    );
    assert_eq!(gen_question(&topic(), None, &[], 0, &s).unwrap(), Question::End);
    assert_eq!(calls.load(Ordering::SeqCst), 2);
}

#[test]
fn no_perspective_prompt_has_no_persona() {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let s2 = seen.clone();
    let s = services_with(
        move |r: &ChatRequest| {
            s2.lock().unwrap().push((r.template.clone(), r.prompt.clone()));
            Ok("What is it?".into())
        },
        no_search(),
    );
    let p = Perspective { summary: "Engineer".into(), description: "cares about load tests".into(), index: 1 };
    gen_question(&topic(), None, &[], 1, &s).unwrap();
    gen_question(&topic(), Some(&p), &[], 1, &s).unwrap();
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].0, names::GEN_QUESTION_NO_PERSPECTIVE);
    assert!(!seen[0].1.contains("load tests"));
    assert_eq!(seen[1].0, names::GEN_QUESTION);
    assert!(seen[1].1.contains("Engineer: cares about load tests"));
}

fn answer_lm(r: &ChatRequest) -> Result<String, LmError> {
    Ok(match r.template.as_str() {
        names::GEN_QUERIES => "- bridge cost\n- bridge opening".into(),
        names::GEN_ANSWER => "It cost a lot and opened in 1932.".into(),
        other => return Err(LmError::Backend(format!("unexpected {other}"))),
    })
}

#[test]
fn answer_collects_trusted_hits_from_each_query() {
    let search = replay(&[
        ("bridge cost", vec![hit("https://a.example/1", "Cost one."), hit("https://a.example/2", "Cost two.")]),
        ("bridge opening", vec![hit("https://b.example/1", "Opened."), hit("https://b.example/2", "Opened again.")]),
    ]);
    let s = services_with(answer_lm, search);
    let mut store = ReferenceStore::new();
    let a = answer_question(&topic(), "What did it cost?", &cfg(5, 5), &s, &mut store, OrderingKey::new(0, 1, 0)).unwrap();
    assert_eq!(a.source_ids.len(), 4);
    assert_eq!(store.len(), 4);
    assert!(!a.text.is_empty() && a.text != NO_SOURCES_ANSWER);
}

#[test]
fn duplicate_url_across_queries_reuses_id() {
    let search = replay(&[
        ("bridge cost", vec![hit("https://a.example/1", "Cost one."), hit("https://shared.example/x", "Shared.")]),
        ("bridge opening", vec![hit("https://shared.example/x", "Shared."), hit("https://b.example/1", "Opened.")]),
    ]);
    let s = services_with(answer_lm, search);
    let mut store = ReferenceStore::new();
    let a = answer_question(&topic(), "What did it cost?", &cfg(5, 5), &s, &mut store, OrderingKey::new(0, 1, 0)).unwrap();
    assert_eq!(a.source_ids.len(), 3);
    assert_eq!(store.len(), 3);
}

#[test]
fn untrusted_hits_give_sentinel_answer() {
    let search = replay(&[
        ("bridge cost", vec![hit("https://someone.blogspot.com/post", "Rumour.")]),
        ("bridge opening", vec![hit("https://www.reddit.com/r/bridges", "Thread.")]),
    ]);
    let s = services_with(answer_lm, search);
    let mut store = ReferenceStore::new();
    let a = answer_question(&topic(), "What did it cost?", &cfg(5, 5), &s, &mut store, OrderingKey::new(0, 1, 0)).unwrap();
    assert_eq!(a, Answer { text: NO_SOURCES_ANSWER.into(), source_ids: vec![] });
    assert!(store.is_empty());
}

#[test]
fn all_searches_down_is_an_error() {
    let s = services_with(answer_lm, Arc::new(DownSearch));
    let mut store = ReferenceStore::new();
    let err = answer_question(&topic(), "What did it cost?", &cfg(5, 5), &s, &mut store, OrderingKey::new(0, 1, 0)).unwrap_err();
    assert!(matches!(err, PipelineError::Search(_)));
}

/// Asks numbered questions and ends after `end_at - 1` of them.
fn conversation_lm(end_at: usize) -> impl Fn(&ChatRequest) -> Result<String, LmError> + Send + Sync {
    move |r: &ChatRequest| {
        Ok(match r.template.as_str() {
            names::GEN_QUESTION | names::GEN_QUESTION_NO_PERSPECTIVE => {
                let asked = r.prompt.matches("Wikipedia Writer:").count();
                if asked + 1 >= end_at {
                    "Thank you so much for your help!".into()
                } else {
                    format!("Question number {}?", asked + 1)
                }
            }
            names::GEN_QUERIES => "- harbor bridge".into(),
            names::GEN_ANSWER => "An answer.".into(),
            other => return Err(LmError::Backend(format!("unexpected {other}"))),
        })
    }
}

fn bridge_search() -> Arc<dyn storm_retrieval::SearchBackend> {
    replay(&[("harbor bridge", vec![hit("https://a.example/1", "One."), hit("https://a.example/2", "Two.")])])
}

#[test]
fn conversation_ends_on_termination_phrase() {
    let s = services_with(conversation_lm(3), bridge_search());
    let (unit, failed) = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 5), &s);
    assert_eq!(failed, 0);
    assert_eq!(unit.conversation.turns.len(), 2);
    assert!(unit.conversation.terminated_early);
    assert_eq!(unit.conversation.turns[1].question, "Question number 2?");
    assert!(unit.conversation.respects_bounds(5));
}

#[test]
fn conversation_runs_m_rounds_without_end() {
    let s = services_with(conversation_lm(usize::MAX), bridge_search());
    let (unit, _) = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 5), &s);
    assert_eq!(unit.conversation.turns.len(), 5);
    assert!(!unit.conversation.terminated_early);
    assert_eq!(unit.conversation.turns.iter().map(|t| t.round).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    let (unit, _) = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 1), &s);
    assert_eq!(unit.conversation.turns.len(), 1);
}

#[test]
fn failed_round_is_skipped() {
    let s = services_with(conversation_lm(usize::MAX), Arc::new(DownSearch));
    let (unit, failed) = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 3), &s);
    assert!(unit.conversation.turns.is_empty());
    assert_eq!(failed, 3);
}

#[test]
fn draft_outline_examples() {
    let s = services_with(|_| Ok("# A\n## B".into()), no_search());
    let o = draft_outline(&topic(), &s).unwrap();
    assert_eq!(o.headings(), vec!["A", "B"]);
    assert_eq!(o.nodes[0].children.len(), 1);

    let s = services_with(|_| Ok(String::new()), no_search());
    assert_eq!(draft_outline(&topic(), &s).unwrap(), Outline::new(vec![OutlineNode::new("Harbor Bridge", 1)]));

    let s = services_with(|_| Ok("# A\n#### Deep\n## B".into()), no_search());
    let o = draft_outline(&topic(), &s).unwrap();
    assert!(o.is_valid());
    assert_eq!(o.nodes[0].children[0].level, 2);
}

fn long_conversations(n: usize) -> Vec<storm_core::Conversation> {
    let mut c = storm_core::Conversation::new(Perspective::basic_fact_writer());
    for i in 0..n {
        c.turns.push(DialogueTurn { question: format!("Q{i}?"), answer: format!("marker{i} ").repeat(50), source_ids: vec![], round: i as u32 + 1 });
    }
    vec![c]
}

#[test]
fn refine_outline_examples() {
    let draft = Outline::new(vec![OutlineNode::new("A", 1)]);
    let s = services_with(|_| Ok("# A\n## A1\n# B".into()), no_search());
    assert_eq!(refine_outline(&topic(), &draft, &[], &cfg(5, 5), &s).unwrap().headings(), vec!["A", "A1", "B"]);

    let s = services_with(|_| Ok(String::new()), no_search());
    assert_eq!(refine_outline(&topic(), &draft, &[], &cfg(5, 5), &s).unwrap(), draft);

    let prompts = Arc::new(Mutex::new(Vec::new()));
    let p2 = prompts.clone();
    let s = services_with(
        move |r: &ChatRequest| {
            p2.lock().unwrap().push(r.prompt.clone());
            Ok("# A".into())
        },
        no_search(),
    );
    let small = PrewritingConfig { transcript_word_budget: 200, ..cfg(5, 5) };
    refine_outline(&topic(), &draft, &long_conversations(10), &small, &s).unwrap();
    let prompt = prompts.lock().unwrap()[0].clone();
    assert!(!prompt.contains("marker0 "));
    assert!(prompt.contains("marker9 "));
}

#[test]
fn truncation_drops_oldest_whole_turns() {
    let convs = long_conversations(4);
    let t = truncated_transcript(&convs, 120);
    assert!(t.starts_with("Wikipedia Writer: Q2?"));
    assert_eq!(truncated_transcript(&convs, 1), "N/A");
    assert_eq!(truncated_transcript(&convs, usize::MAX).matches("Wikipedia Writer:").count(), 4);
}

#[test]
fn merge_remaps_turn_ids() {
    let s = services_with(conversation_lm(usize::MAX), bridge_search());
    let a = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 1), &s).0;
    let other = replay(&[("harbor bridge", vec![hit("https://c.example/9", "Nine."), hit("https://a.example/2", "Two.")])]);
    let s = services_with(conversation_lm(usize::MAX), other);
    let b = simulate_conversation(&topic(), &Perspective::basic_fact_writer(), true, &cfg(5, 1), &s).0;
    let (convs, store) = merge_units(&topic(), vec![a, b]);
    assert_eq!(store.len(), 3);
    let ids: Vec<Vec<u32>> = convs.iter().map(|c| c.turns[0].source_ids.iter().map(|i| i.0).collect()).collect();
    assert_eq!(ids, vec![vec![1, 2], vec![3, 2]]);
}

fn question_count(mode: RunMode, n: usize, m: usize) -> (usize, usize) {
    let s = storm_testkit::sim_services();
    let r = run_prewriting(&storm_testkit::topic(), &cfg(n, m), mode, &s).unwrap();
    let asks = s.lm.calls().iter().filter(|c| c.template == names::GEN_QUESTION || c.template == names::GEN_QUESTION_NO_PERSPECTIVE).count();
    let batch = s.lm.calls().iter().filter(|c| c.template == names::GEN_QUESTIONS_BATCH).count();
    let turns = r.conversations.iter().map(|c| c.turns.len()).sum();
    assert!(r.conversations.len() <= n + 1, "{mode} N={n}");
    assert!(r.conversations.iter().all(|c| c.respects_bounds(m as u32)), "{mode} M={m}");
    assert!(r.conversations.iter().flat_map(|c| &c.turns).flat_map(|t| &t.source_ids).all(|id| r.references.contains(*id)));
    (turns, if batch > 0 { 0 } else { asks })
}

#[test]
fn run_prewriting_examples() {
    let (storm_turns, _) = question_count(RunMode::Storm, 5, 5);
    assert!(storm_turns <= 30);
    let (batch_turns, asks) = question_count(RunMode::StormNoConversation, 5, 5);
    assert_eq!((batch_turns, asks), (30, 0));
    let (t, _) = question_count(RunMode::StormNoPerspective, 0, 1);
    assert!(t <= 1);
    let s = storm_testkit::sim_services();
    let r = run_prewriting(&storm_testkit::topic(), &cfg(0, 1), RunMode::Storm, &s).unwrap();
    assert_eq!(r.conversations.len(), 1);
}

#[test]
fn batch_questions_capped_at_parity_count() {
    let reply = (1..=50).map(|i| format!("- Q{i}?")).collect::<Vec<_>>().join("\n");
    let s = services_with(move |_| Ok(reply.clone()), no_search());
    let ps = anonymous_perspectives(2);
    assert_eq!(batch_questions(&topic(), &ps, &cfg(2, 3), &s).unwrap().len(), 9);
}

#[test]
fn conversations_are_independent() {
    let s = storm_testkit::sim_services();
    let t = storm_testkit::topic();
    let c = PrewritingConfig::default();
    let ps = discover_perspectives(&t, &c, &s).unwrap();
    let all = run_conversations(&t, &ps, true, &c, &s, &NoSink);
    for skip in 0..ps.len() {
        let subset: Vec<Perspective> = ps.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.clone()).collect();
        let partial = run_conversations(&t, &subset, true, &c, &s, &NoSink);
        let expected: Vec<_> = all.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, u)| &u.0).collect();
        assert_eq!(partial.iter().map(|u| &u.0).collect::<Vec<_>>(), expected);
    }
}

#[test]
fn context_overflow_shrinks_history() {
    use storm_lm::{Endpoint, FnBackend, LmGateway, ModelParams, ModelRole, PromptRegistry};
    let seen = Arc::new(Mutex::new(Vec::<usize>::new()));
    let s2 = seen.clone();
    let backend = Arc::new(FnBackend(move |r: &ChatRequest| {
        s2.lock().unwrap().push(r.prompt.matches("Wikipedia Writer:").count());
        Ok("Next?".to_string())
    }));
    let params = ModelParams { max_tokens: 100, ..ModelParams::new("m") };
    let ep = Endpoint::new(backend, params).with_context_window(1500);
    let gw = LmGateway::new(PromptRegistry::default()).with_endpoint(ModelRole::QuestionAsker, ep);
    let mut s = services_with(|_| Ok(String::new()), no_search());
    s.lm = Arc::new(gw);
    let history = long_conversations(40).remove(0).turns;
    assert_eq!(gen_question(&topic(), None, &history, 0, &s).unwrap(), Question::Ask("Next?".into()));
    let kept = seen.lock().unwrap()[0];
    assert!(kept > 0 && kept < 40, "kept {kept} turns");
}
