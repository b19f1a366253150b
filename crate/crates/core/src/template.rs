//! Prompt templates with `{name}` placeholders.

use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template is missing placeholder {{{0}}}")]
    MissingPlaceholder(String),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

pub const RELATION_PLACEHOLDERS: [&str; 4] = ["relation", "head_type", "tail_type", "n"];
pub const EXTRACTION_PLACEHOLDERS: [&str; 6] =
    ["relation", "head_type", "tail_type", "demonstrations", "sentence", "format"];

pub const DEFAULT_RELATION_TEMPLATE: &str = include_str!("../templates/relation_list.txt");
pub const DEFAULT_EXTRACTION_TEMPLATE: &str = include_str!("../templates/extraction.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl PromptTemplate {
    /// Checks that every name in `required` appears as `{name}`.
    pub fn new(text: impl Into<String>, required: &[&str]) -> Result<Self, TemplateError> {
        let text = text.into();
        for name in required {
            if !text.contains(&format!("{{{name}}}")) {
                return Err(TemplateError::MissingPlaceholder(name.to_string()));
            }
        }
        Ok(Self { text })
    }

    pub fn load(path: &Path, required: &[&str]) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|e| TemplateError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::new(text, required)
    }

    pub fn relation_default() -> Self {
        Self::new(DEFAULT_RELATION_TEMPLATE, &RELATION_PLACEHOLDERS).expect("built-in relation template")
    }

    pub fn extraction_default() -> Self {
        Self::new(DEFAULT_EXTRACTION_TEMPLATE, &EXTRACTION_PLACEHOLDERS).expect("built-in extraction template")
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Substitutes placeholders in a single left-to-right pass, so values
    /// that themselves contain `{...}` are never re-expanded.
    pub fn render(&self, values: &[(&str, &str)]) -> String {
        let mut out = String::with_capacity(self.text.len());
        let mut rest = self.text.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let replaced = after.find('}').and_then(|close| {
                let name = &after[..close];
                values
                    .iter()
                    .find(|(k, _)| *k == name)
                    .map(|(_, v)| (*v, close))
            });
            match replaced {
                Some((value, close)) => {
                    out.push_str(value);
                    rest = &after[close + 1..];
                }
                None => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        out
    }
}
