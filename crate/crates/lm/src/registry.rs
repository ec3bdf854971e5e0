//! Built-in prompts and file overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::prompt::{PromptTemplate, Slot};

/// Template names.
pub mod names {
    pub const GEN_RELATED_TOPICS: &str = "gen_related_topics";
    pub const GEN_PERSPECTIVES: &str = "gen_perspectives";
    pub const GEN_QUESTION: &str = "gen_question";
    pub const GEN_QUESTION_NO_PERSPECTIVE: &str = "gen_question_no_perspective";
    pub const GEN_QUESTIONS_BATCH: &str = "gen_questions_batch";
    pub const GEN_QUERIES: &str = "gen_queries";
    pub const GEN_ANSWER: &str = "gen_answer";
    pub const DIRECT_GEN_OUTLINE: &str = "direct_gen_outline";
    pub const REFINE_OUTLINE: &str = "refine_outline";
    pub const WRITE_SECTION: &str = "write_section";
    pub const POLISH_ARTICLE: &str = "polish_article";
    pub const WRITE_LEAD: &str = "write_lead";
    pub const WRITE_ARTICLE_FROM_CONVERSATIONS: &str = "write_article_from_conversations";
    pub const DIRECT_GEN_ARTICLE: &str = "direct_gen_article";
    pub const RAG_OUTLINE: &str = "rag_outline";
    pub const RAG_ARTICLE: &str = "rag_article";
    pub const RAG_EXPAND_OUTLINE: &str = "rag_expand_outline";
    pub const JUDGE_ENTAILMENT: &str = "judge_entailment";
}

const OUTLINE_FORMAT: &str = "Here is the format of your writing:
    1. Use \"# Title\" to indicate section title, \"## Title\" to indicate subsection title, \"### Title\" to indicate subsubsection title, and so on.
    2. Do not include other information.";

fn builtins() -> Vec<PromptTemplate> {
    use names::*;
    let t = PromptTemplate::new;
    vec![
        t(
            GEN_RELATED_TOPICS,
            "I'm writing a Wikipedia page for a topic mentioned below. Please identify and recommend some Wikipedia pages on closely related subjects. I'm looking for examples that provide insights into interesting aspects commonly associated with this topic, or examples that help me understand the typical content and structure included in Wikipedia pages for similar topics.
Please list the urls in separate lines.",
            vec![Slot::new("topic", "Topic of interest:")],
            None,
        ),
        t(
            GEN_PERSPECTIVES,
            "You need to select a group of Wikipedia editors who will work together to create a comprehensive article on the topic. Each of them represents a different perspective, role, or affiliation related to this topic. You can use other Wikipedia pages of related topics for inspiration. For each editor, add description of what they will focus on.
Give your answer in the following format: 1. short summary of editor 1: description
2. short summary of editor 2: description
...",
            vec![
                Slot::new("topic", "Topic of interest:"),
                Slot::new("examples", "Wiki page outlines of related topics for inspiration:\n"),
            ],
            None,
        ),
        t(
            GEN_QUESTION,
            "You are an experienced Wikipedia writer and want to edit a specific page. Besides your identity as a Wikipedia writer, you have a specific focus when researching the topic.
Now, you are chatting with an expert to get information. Ask good questions to get more useful information.
When you have no more question to ask, say \"Thank you so much for your help!\" to end the conversation.
Please only ask one question at a time and don't ask what you have asked before. Your questions should be related to the topic you want to write.",
            vec![
                Slot::new("topic", "Topic you want to write: "),
                Slot::new("persona", "Your specific perspective: "),
                Slot::new("conv", "Conversation history:\n"),
            ],
            None,
        ),
        t(
            GEN_QUESTION_NO_PERSPECTIVE,
            "You are an experienced Wikipedia writer and want to edit a specific page.
Now, you are chatting with an expert to get information. Ask good questions to get more useful information.
When you have no more question to ask, say \"Thank you so much for your help!\" to end the conversation.
Please only ask one question at a time and don't ask what you have asked before. Your questions should be related to the topic you want to write.",
            vec![Slot::new("topic", "Topic you want to write: "), Slot::new("conv", "Conversation history:\n")],
            None,
        ),
        t(
            GEN_QUESTIONS_BATCH,
            "You are an experienced Wikipedia writer and want to edit a specific page. You will interview an expert, but you must write all of your questions in advance.
Write exactly the requested number of questions, one per line, each line starting with \"- \". Do not repeat questions.",
            vec![
                Slot::new("topic", "Topic you want to write: "),
                Slot::new("perspectives", "Perspectives to cover:\n"),
                Slot::new("count", "Number of questions: "),
            ],
            Some("Questions:\n"),
        ),
        t(
            GEN_QUERIES,
            "You want to answer the question using Google search. What do you type in the search box?
Write the queries you will use in the following format:- query 1
- query 2
...",
            vec![
                Slot::new("topic", "Topic you are discussing about: "),
                Slot::new("question", "Question you want to answer: "),
            ],
            None,
        ),
        t(
            GEN_ANSWER,
            "You are an expert who can use information effectively. You are chatting with a Wikipedia writer who wants to write a Wikipedia page on topic you know. You have gathered the related information and will now use the information to form a response.
Make your response as informative as possible and make sure every sentence is supported by the gathered information.",
            vec![
                Slot::new("topic", "Topic you are discussing about:"),
                Slot::new("conv", "Question:\n"),
                Slot::new("info", "Gathered information:\n"),
            ],
            Some("Now give your response:\n"),
        ),
        t(
            DIRECT_GEN_OUTLINE,
            &format!("Write an outline for a Wikipedia page.\n{OUTLINE_FORMAT}"),
            vec![Slot::new("topic", "Topic you want to write: ")],
            Some("Write the Wikipedia page outline:\n"),
        ),
        t(
            REFINE_OUTLINE,
            &format!(
                "Improve an outline for a Wikipedia page. You already have a draft outline that covers the general information. Now you want to improve it based on the information learned from an information-seeking conversation to make it more comprehensive.\n{OUTLINE_FORMAT}"
            ),
            vec![
                Slot::new("topic", "Topic you want to write: "),
                Slot::new("conv", "Conversation history:\n"),
                Slot::new("old_outline", "Current outline:\n"),
            ],
            Some("Write the Wikipedia page outline:\n"),
        ),
        t(
            WRITE_SECTION,
            "Write a Wikipedia section based on the collected information.
Here is the format of your writing:
    1. Use \"# Title\" to indicate section title, \"## Title\" to indicate subsection title, and so on, following the given section outline.
    2. Use [1], [2], ..., [n] in line (for example, \"The capital of the United States is Washington, D.C.[1][3].\"). Only cite the numbered information given below. You do not need a References or Sources section.
    3. Every sentence must be supported by the cited information.",
            vec![
                Slot::new("info", "The collected information:\n"),
                Slot::new("topic", "The topic of the page: "),
                Slot::new("section", "The section you need to write: "),
                Slot::new("outline_hint", "The outline of the section:\n"),
            ],
            Some("Write the section with proper inline citations (Start your writing with # section title. Don't include the page title or try to write other sections):\n"),
        ),
        t(
            POLISH_ARTICLE,
            "You are a faithful text editor that is good at finding repeated information in the article and deleting it to make sure there is no repetition in the article. You won't delete any non-repeated part in the article. You will keep the inline citations and article structure (indicated by \"#\", \"##\", etc.) appropriately. Do not add new content or new citations. Do your job for the following article.",
            vec![Slot::new("topic", "The topic of the page: "), Slot::new("draft", "The article:\n")],
            Some("Revised article:\n"),
        ),
        t(
            WRITE_LEAD,
            "Write a lead section for the given Wikipedia page with the following guidelines:
1. The lead should stand on its own as a concise overview of the article's topic. It should identify the topic, establish context, explain why the topic is notable, and summarize the most important points.
2. The lead section should be concise and contain no more than four well-composed paragraphs.
3. Do not include citation markers or headings.",
            vec![Slot::new("topic", "The topic of the page: "), Slot::new("draft", "The draft page:\n")],
            Some("Write the lead section:\n"),
        ),
        t(
            WRITE_ARTICLE_FROM_CONVERSATIONS,
            "Write a full Wikipedia page on the topic based on the information-seeking conversations and the collected information.
Use \"# Title\" to indicate section title, \"## Title\" to indicate subsection title, and so on. Use [1], [2], ..., [n] in line to cite the numbered information. Do not write a References section.",
            vec![
                Slot::new("topic", "The topic of the page: "),
                Slot::new("conv", "Conversation history:\n"),
                Slot::new("info", "The collected information:\n"),
            ],
            Some("Write the page:\n"),
        ),
        t(
            DIRECT_GEN_ARTICLE,
            "Write a full Wikipedia page on the topic following the given outline. Use \"# Title\" to indicate section title, \"## Title\" to indicate subsection title, and so on, exactly as in the outline.",
            vec![Slot::new("topic", "The topic of the page: "), Slot::new("outline", "The outline:\n")],
            Some("Write the page:\n"),
        ),
        t(
            RAG_OUTLINE,
            &format!("Write an outline for a Wikipedia page using the search results below.\n{OUTLINE_FORMAT}"),
            vec![Slot::new("topic", "Topic you want to write: "), Slot::new("info", "Search results:\n")],
            Some("Write the Wikipedia page outline:\n"),
        ),
        t(
            RAG_ARTICLE,
            "Write a full Wikipedia page on the topic following the given outline and using the numbered search results. Use \"# Title\" to indicate section title, \"## Title\" to indicate subsection title, and so on, exactly as in the outline. Use [1], [2], ..., [n] in line to cite the numbered information. Do not write a References section.",
            vec![
                Slot::new("topic", "The topic of the page: "),
                Slot::new("outline", "The outline:\n"),
                Slot::new("info", "Search results:\n"),
            ],
            Some("Write the page:\n"),
        ),
        t(
            RAG_EXPAND_OUTLINE,
            &format!(
                "Improve an outline for a Wikipedia page. You already have an initial outline; use the additional search results below to make it more comprehensive.\n{OUTLINE_FORMAT}"
            ),
            vec![
                Slot::new("topic", "Topic you want to write: "),
                Slot::new("old_outline", "Current outline:\n"),
                Slot::new("info", "Search results:\n"),
            ],
            Some("Write the Wikipedia page outline:\n"),
        ),
        t(
            JUDGE_ENTAILMENT,
            "Decide whether the passage fully supports the claim. Answer with a single word: \"yes\" if every fact in the claim is stated or directly implied by the passage, otherwise \"no\".",
            vec![Slot::new("passage", "Passage:\n"), Slot::new("claim", "Claim: ")],
            Some("Answer:"),
        ),
    ]
}

/// Name-indexed prompt set, built-ins unless overridden.
#[derive(Debug, Clone)]
pub struct PromptRegistry {
    templates: BTreeMap<String, PromptTemplate>,
}

impl Default for PromptRegistry {
    fn default() -> Self {
        let mut templates = BTreeMap::new();
        for t in builtins() {
            let dup = templates.insert(t.name.clone(), t);
            debug_assert!(dup.is_none(), "duplicate built-in prompt name");
        }
        PromptRegistry { templates }
    }
}

impl PromptRegistry {
    pub fn get(&self, name: &str) -> Option<&PromptTemplate> {
        self.templates.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    /// Replaces the text of a known template.
    pub fn set_override(&mut self, name: &str, text: impl Into<String>) -> Result<(), String> {
        let t = self.templates.get_mut(name).ok_or_else(|| format!("no prompt named `{name}`"))?;
        t.override_text = Some(text.into());
        Ok(())
    }

    /// Loads `<name>.txt` files from `dir` as overrides; unknown names are an error.
    pub fn load_overrides(&mut self, dir: &Path) -> Result<usize, String> {
        let mut n = 0;
        let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let mut paths: Vec<_> = entries.filter_map(Result::ok).map(|e| e.path()).collect();
        paths.sort();
        for path in paths {
            if path.extension().and_then(|x| x.to_str()) != Some("txt") {
                continue;
            }
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            self.set_override(&name, text)?;
            n += 1;
        }
        Ok(n)
    }
}
