use std::collections::BTreeMap;

use storm_lm::PromptTemplate;

/// Recovers slot values from a prompt rendered from `template`'s default text.
pub fn extract(template: &PromptTemplate, prompt: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let body_end = template.output_prefix.as_ref().and_then(|p| prompt.strip_suffix(p.as_str())).map_or(prompt.len(), str::len);
    let mut pos = prompt.find("\n\n").map_or(0, |p| p + 2);
    let slots = &template.input_slots;
    for (i, slot) in slots.iter().enumerate() {
        let mut label = slot.prefix.clone();
        if !label.ends_with(char::is_whitespace) {
            label.push(' ');
        }
        let Some(start) = prompt[pos..].find(&label).map(|p| pos + p + label.len()) else { break };
        let end = match slots.get(i + 1) {
            Some(next) => prompt[start..body_end].find(&format!("\n{}", next.prefix)).map_or(body_end, |p| start + p),
            None => body_end,
        };
        let value = prompt[start..end.max(start)].strip_suffix('\n').unwrap_or(&prompt[start..end.max(start)]);
        out.insert(slot.name.clone(), value.to_string());
        pos = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use storm_lm::{names, Bindings, PromptRegistry};

    #[test]
    fn round_trips_every_builtin() {
        let reg = PromptRegistry::default();
        for name in reg.names() {
            let t = reg.get(name).unwrap();
            let mut b = Bindings::new();
            for (i, s) in t.input_slots.iter().enumerate() {
                b = b.set(&s.name, format!("value {i}\nsecond line {i}"));
            }
            let got = extract(t, &t.render(&b).unwrap());
            for (i, s) in t.input_slots.iter().enumerate() {
                assert_eq!(got[&s.name], format!("value {i}\nsecond line {i}"), "{name}/{}", s.name);
            }
        }
        assert!(reg.get(names::GEN_ANSWER).is_some());
    }
}
