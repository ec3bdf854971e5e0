use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("template `{template}` slot `{slot}` is not bound")]
    UnboundSlot { template: String, slot: String },
    #[error("template `{template}` has an unterminated placeholder")]
    Unterminated { template: String },
}

/// One named input of a prompt and the label printed before its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub prefix: String,
}

impl Slot {
    pub fn new(name: &str, prefix: &str) -> Self {
        Slot { name: name.into(), prefix: prefix.into() }
    }
}

/// A prompt: instruction text, labelled input slots, and an optional prefix
/// the model's answer continues from.
///
/// The rendered form is plain text with `{{slot}}` placeholders; an override
/// file replaces that text wholesale but must use the same slot names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub instruction: String,
    pub input_slots: Vec<Slot>,
    pub output_prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub override_text: Option<String>,
}

impl PromptTemplate {
    pub fn new(name: &str, instruction: &str, input_slots: Vec<Slot>, output_prefix: Option<&str>) -> Self {
        PromptTemplate {
            name: name.into(),
            instruction: instruction.into(),
            input_slots,
            output_prefix: output_prefix.map(str::to_string),
            override_text: None,
        }
    }

    /// Placeholder text the slots are substituted into.
    pub fn text(&self) -> String {
        if let Some(t) = &self.override_text {
            return t.clone();
        }
        let mut out = self.instruction.trim().to_string();
        out.push_str("\n\n");
        for slot in &self.input_slots {
            out.push_str(&slot.prefix);
            if !slot.prefix.ends_with(char::is_whitespace) {
                out.push(' ');
            }
            out.push_str(&format!("{{{{{}}}}}\n", slot.name));
        }
        if let Some(p) = &self.output_prefix {
            out.push_str(p);
        }
        out
    }

    pub fn render(&self, bindings: &Bindings) -> Result<String, RenderError> {
        for slot in &self.input_slots {
            if !bindings.0.contains_key(&slot.name) {
                return Err(RenderError::UnboundSlot { template: self.name.clone(), slot: slot.name.clone() });
            }
        }
        substitute(&self.name, &self.text(), bindings)
    }
}

fn substitute(template: &str, text: &str, bindings: &Bindings) -> Result<String, RenderError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let close = after.find("}}").ok_or_else(|| RenderError::Unterminated { template: template.into() })?;
        let name = after[..close].trim();
        let value = bindings
            .0
            .get(name)
            .ok_or_else(|| RenderError::UnboundSlot { template: template.into(), slot: name.into() })?;
        out.push_str(value);
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Slot values for one call.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings(BTreeMap<String, String>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, slot: &str, value: impl Into<String>) -> Self {
        self.0.insert(slot.into(), value.into());
        self
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    /// Stable digest of the bound values, the replay key for a call.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.0 {
            h.update(k.as_bytes());
            h.update([0u8]);
            h.update(v.as_bytes());
            h.update([1u8]);
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}
