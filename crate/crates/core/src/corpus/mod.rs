//! Annotated corpora: readers, the canonical JSONL format, few-shot sampling
//! and statistics.

mod conll;
mod jsonl;
mod profile;
mod sample;
mod stats;
mod yedda;

use std::collections::HashSet;
use std::path::Path;

pub use conll::{read_conll, write_conll, ConllOptions, TagScheme};
pub use jsonl::{read_jsonl, write_jsonl};
pub(crate) use jsonl::write_sentences;
pub use profile::CorpusProfile;
pub use sample::sample_few_shot;
pub use stats::{corpus_stats, CorpusStats, TokenUnit};
pub use yedda::{import_yedda, write_yedda};

use crate::model::{EntityType, MentionError, Sentence};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: unknown entity type {label:?}")]
    UnknownType { line: usize, label: String },
    #[error("line {line}: tag {tag:?} does not continue an entity")]
    MalformedTag { line: usize, tag: String },
    #[error("unbalanced markup at character {offset}: {message}")]
    UnbalancedMarkup { offset: usize, message: String },
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
    #[error("sentence {sentence_id:?}: {source}")]
    InvalidMention {
        sentence_id: String,
        source: MentionError,
    },
    #[error("sentence {sentence_id:?}: mention type {label:?} is not in the corpus schema")]
    TypeOutsideSchema { sentence_id: String, label: String },
    #[error("cannot sample {k} sentences: {reason}")]
    SampleSize { k: usize, reason: String },
    #[error("invalid profile: {0}")]
    Profile(String),
}

/// An ordered collection of annotated sentences sharing one type schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub profile_name: String,
    /// Entity types in declaration order.
    pub schema: Vec<EntityType>,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    /// Validates unique ids, in-schema mention types and mention spans.
    pub fn new(
        profile_name: impl Into<String>,
        schema: Vec<EntityType>,
        sentences: Vec<Sentence>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for s in &sentences {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateId(s.id.clone()));
            }
            s.validate().map_err(|source| CorpusError::InvalidMention {
                sentence_id: s.id.clone(),
                source,
            })?;
            for m in &s.gold {
                if !schema.contains(&m.etype) {
                    return Err(CorpusError::TypeOutsideSchema {
                        sentence_id: s.id.clone(),
                        label: m.etype.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            profile_name: profile_name.into(),
            schema,
            sentences,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn mention_count(&self) -> usize {
        self.sentences.iter().map(|s| s.gold.len()).sum()
    }

    /// Loads a corpus file, picking the reader from `format` or, when that is
    /// `None`, from the file extension (`.jsonl`, `.conll`/`.bio`/`.bmes`,
    /// `.yedda`/`.ann`). JSONL files without a profile get their schema from
    /// the mention types they contain.
    pub fn load(path: &Path, format: Option<CorpusFormat>, profile: Option<&CorpusProfile>) -> Result<Self, CorpusError> {
        let format = match format {
            Some(f) => f,
            None => CorpusFormat::from_path(path).ok_or_else(|| CorpusError::Format {
                line: 0,
                message: format!("cannot infer corpus format from {}", path.display()),
            })?,
        };
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        let need_profile = || {
            profile.ok_or_else(|| CorpusError::Profile(format!("{format:?} input needs a profile for its type schema")))
        };
        match format {
            CorpusFormat::Jsonl => {
                let (name, schema) = match profile {
                    Some(p) => (p.profile_name.clone(), Some(p.schema.clone())),
                    None => ("custom".to_string(), None),
                };
                read_jsonl(reader, &name, schema)
            }
            CorpusFormat::Conll => {
                let p = need_profile()?;
                read_conll(reader, &p.profile_name, &p.schema, &ConllOptions::default())
            }
            CorpusFormat::Yedda => {
                let p = need_profile()?;
                import_yedda(reader, &p.profile_name, &p.schema)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Conll,
    Yedda,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" => Some(Self::Jsonl),
            "conll" | "bio" | "bmes" | "tsv" => Some(Self::Conll),
            "yedda" | "ann" => Some(Self::Yedda),
            _ => None,
        }
    }
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "conll" => Ok(Self::Conll),
            "yedda" => Ok(Self::Yedda),
            other => Err(format!("unknown corpus format {other:?} (expected jsonl, conll or yedda)")),
        }
    }
}

pub(crate) fn lookup_type(schema: &[EntityType], label: &str, line: usize) -> Result<EntityType, CorpusError> {
    schema
        .iter()
        .find(|t| t.as_str() == label)
        .cloned()
        .ok_or_else(|| CorpusError::UnknownType {
            line,
            label: label.to_string(),
        })
}
