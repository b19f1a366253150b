//! Shared domain types.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{char_len, char_slice, normalize_text};

/// An entity type label such as `ORG` or `PRO`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityType(String);

impl EntityType {
    /// Returns `None` for labels that are empty after trimming.
    pub fn new(label: impl AsRef<str>) -> Option<Self> {
        let label = label.as_ref().trim();
        if label.is_empty() {
            None
        } else {
            Some(Self(label.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A typed mention located by character offsets (`end` exclusive) inside
/// one sentence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    pub sentence_id: String,
    pub start: usize,
    pub end: usize,
    pub etype: EntityType,
    pub surface: String,
}

impl EntityMention {
    /// Builds a mention from a span of `text`, reading the surface from the
    /// text itself. Fails when the span is out of range or the slice is not
    /// already in normalized form.
    pub fn from_span(
        sentence_id: &str,
        text: &str,
        start: usize,
        end: usize,
        etype: EntityType,
    ) -> Result<Self, MentionError> {
        let surface = char_slice(text, start, end).ok_or(MentionError::OutOfRange {
            start,
            end,
            len: char_len(text),
        })?;
        if normalize_text(surface) != surface {
            return Err(MentionError::Unnormalized {
                surface: surface.to_string(),
            });
        }
        Ok(Self {
            sentence_id: sentence_id.to_string(),
            start,
            end,
            etype,
            surface: surface.to_string(),
        })
    }

    /// Identity used for deduplication and exact matching.
    pub fn key(&self) -> (&str, &EntityType, usize, usize) {
        (&self.sentence_id, &self.etype, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MentionError {
    #[error("span {start}..{end} is outside a sentence of {len} characters")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("span surface {surface:?} has leading, trailing, or repeated whitespace")]
    Unnormalized { surface: String },
    #[error("surface {expected:?} does not match text {found:?} at {start}..{end}")]
    SurfaceMismatch {
        expected: String,
        found: String,
        start: usize,
        end: usize,
    },
}

/// One sentence with its gold mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub gold: Vec<EntityMention>,
}

impl Sentence {
    /// Sorts gold mentions by span and drops duplicates on `(etype, span)`.
    pub fn new(id: impl Into<String>, text: impl Into<String>, mut gold: Vec<EntityMention>) -> Self {
        gold.sort_by(|a, b| (a.start, a.end, &a.etype).cmp(&(b.start, b.end, &b.etype)));
        gold.dedup_by(|a, b| a.start == b.start && a.end == b.end && a.etype == b.etype);
        Self {
            id: id.into(),
            text: text.into(),
            gold,
        }
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }

    /// Checks that every gold mention lies within the text and carries the
    /// surface found at its span.
    pub fn validate(&self) -> Result<(), MentionError> {
        for m in &self.gold {
            let found = char_slice(&self.text, m.start, m.end).ok_or(MentionError::OutOfRange {
                start: m.start,
                end: m.end,
                len: self.char_len(),
            })?;
            if found != m.surface {
                return Err(MentionError::SurfaceMismatch {
                    expected: m.surface.clone(),
                    found: found.to_string(),
                    start: m.start,
                    end: m.end,
                });
            }
        }
        Ok(())
    }
}

/// A human-declared relation with fixed head and tail entity types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredefinedRelation {
    pub name: String,
    pub head_type: EntityType,
    pub tail_type: EntityType,
}

impl PredefinedRelation {
    pub fn new(name: impl AsRef<str>, head_type: EntityType, tail_type: EntityType) -> Option<Self> {
        let name = normalize_text(name.as_ref());
        if name.is_empty() {
            return None;
        }
        Some(Self {
            name,
            head_type,
            tail_type,
        })
    }
}

/// Position of a slot inside a `(subject, object)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Subject,
    Object,
}

/// One end of an extracted pair. Identity is the normalized surface plus the
/// role, so the same string as subject and as object are distinct slots.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    surface: String,
    role: Role,
}

impl Slot {
    /// Normalizes `surface`; `None` when nothing is left.
    pub fn new(surface: &str, role: Role) -> Option<Self> {
        let surface = normalize_text(surface);
        if surface.is_empty() {
            None
        } else {
            Some(Self { surface, role })
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn role(&self) -> Role {
        self.role
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::Subject => "S",
            Role::Object => "O",
        };
        write!(f, "{}:{}", role, self.surface)
    }
}
