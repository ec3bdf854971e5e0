use std::fmt;

use serde::{Deserialize, Serialize};

/// Sampling parameters sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model_name: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
}

fn default_temperature() -> f64 {
    1.0
}

fn default_top_p() -> f64 {
    0.9
}

fn default_max_tokens() -> usize {
    1000
}

impl ModelParams {
    pub fn new(model_name: impl Into<String>) -> Self {
        ModelParams {
            model_name: model_name.into(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            max_tokens: default_max_tokens(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(format!("top_p {} outside (0, 1]", self.top_p));
        }
        if self.max_tokens == 0 {
            return Err("max_tokens must be positive".into());
        }
        if self.model_name.trim().is_empty() {
            return Err("model_name is empty".into());
        }
        Ok(())
    }
}

/// Which configured endpoint serves a call: the conversational question
/// asker or the general model used for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelRole {
    QuestionAsker,
    General,
}

impl ModelRole {
    pub const ALL: [ModelRole; 2] = [ModelRole::QuestionAsker, ModelRole::General];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelRole::QuestionAsker => "question_asker",
            ModelRole::General => "general",
        }
    }
}

impl fmt::Display for ModelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = ModelParams::new("m");
        assert_eq!((p.temperature, p.top_p), (1.0, 0.9));
        assert!(p.validate().is_ok());
        let p: ModelParams = serde_json::from_str(r#"{"model_name":"m"}"#).unwrap();
        assert_eq!((p.temperature, p.top_p), (1.0, 0.9));
    }

    #[test]
    fn bounds() {
        let mut p = ModelParams::new("m");
        p.temperature = 2.5;
        assert!(p.validate().is_err());
        p.temperature = 0.0;
        p.top_p = 0.0;
        assert!(p.validate().is_err());
        p.top_p = 1.0;
        assert!(p.validate().is_ok());
    }
}
