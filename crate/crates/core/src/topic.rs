use serde::{Deserialize, Serialize};

use crate::CoreError;

/// The subject of one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub title: String,
    /// Ground-truth page that must never surface as a search result.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_url: Option<String>,
}

impl Topic {
    pub fn new(title: impl Into<String>) -> Result<Self, CoreError> {
        let title = title.into().trim().to_string();
        if title.is_empty() {
            return Err(CoreError::EmptyTopic);
        }
        Ok(Topic { title, exclusion_url: None })
    }

    pub fn with_exclusion(mut self, url: impl Into<String>) -> Self {
        self.exclusion_url = Some(url.into());
        self
    }

    /// Lowercase ascii slug used in file and run names.
    pub fn slug(&self) -> String {
        slugify(&self.title)
    }
}

pub fn slugify(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut dash = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            for l in c.to_lowercase() {
                out.push(l);
            }
            dash = false;
        } else if !dash && !out.is_empty() {
            out.push('-');
            dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("untitled");
    }
    out
}
