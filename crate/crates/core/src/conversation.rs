use serde::{Deserialize, Serialize};

use crate::reference::RefId;

/// Summary of the basic-fact writer that always occupies index 0.
pub const BASIC_FACT_WRITER: &str = "Basic fact writer";
pub const BASIC_FACT_DESCRIPTION: &str = "Basic fact writer focusing on broadly covering the basic facts about the topic.";

/// A persona that conditions question asking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perspective {
    pub summary: String,
    pub description: String,
    pub index: u32,
}

impl Perspective {
    pub fn basic_fact_writer() -> Self {
        Perspective { summary: BASIC_FACT_WRITER.into(), description: BASIC_FACT_DESCRIPTION.into(), index: 0 }
    }

    /// The persona line given to the question asker.
    pub fn persona(&self) -> String {
        if self.description.is_empty() {
            self.summary.clone()
        } else if self.index == 0 {
            self.description.clone()
        } else {
            format!("{}: {}", self.summary, self.description)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub question: String,
    pub answer: String,
    pub source_ids: Vec<RefId>,
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub perspective: Perspective,
    pub turns: Vec<DialogueTurn>,
    pub terminated_early: bool,
}

impl Conversation {
    pub fn new(perspective: Perspective) -> Self {
        Conversation { perspective, turns: Vec::new(), terminated_early: false }
    }

    /// Rounds strictly increase from 1 and never exceed `max_rounds`.
    pub fn respects_bounds(&self, max_rounds: u32) -> bool {
        self.turns.len() as u32 <= max_rounds
            && self.turns.iter().all(|t| t.round >= 1 && t.round <= max_rounds)
            && self.turns.windows(2).all(|w| w[0].round < w[1].round)
    }

    /// Writer/expert transcript in the line format the prompts use.
    pub fn transcript(&self) -> String {
        render_history(&self.turns)
    }
}

pub fn render_history(turns: &[DialogueTurn]) -> String {
    if turns.is_empty() {
        return "N/A".into();
    }
    turns
        .iter()
        .map(|t| format!("Wikipedia Writer: {}\nExpert: {}", t.question, t.answer))
        .collect::<Vec<_>>()
        .join("\n")
}
