use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::model::{EntityType, PredefinedRelation};

/// A corpus profile: the entity type schema and the predefined relations
/// that drive extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusProfile {
    pub profile_name: String,
    pub schema: Vec<EntityType>,
    #[serde(default)]
    pub relations: Vec<PredefinedRelation>,
}

impl CorpusProfile {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let raw = std::fs::read_to_string(path)?;
        let profile: Self =
            serde_json::from_str(&raw).map_err(|source| CorpusError::Json { line: source.line(), source })?;
        profile.validate()?;
        Ok(profile)
    }

    /// Schema labels are unique and non-empty; relation names are unique and
    /// their head/tail types are declared in the schema. An empty relation
    /// list is accepted here and rejected by relation generation.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.profile_name.trim().is_empty() {
            return Err(CorpusError::Profile("profile_name is empty".into()));
        }
        if self.schema.is_empty() {
            return Err(CorpusError::Profile("schema is empty".into()));
        }
        let mut labels = HashSet::new();
        for t in &self.schema {
            if t.as_str().trim().is_empty() {
                return Err(CorpusError::Profile("empty entity type label".into()));
            }
            if !labels.insert(t.as_str()) {
                return Err(CorpusError::Profile(format!("entity type {t} declared twice")));
            }
        }
        let mut names = HashSet::new();
        for r in &self.relations {
            if r.name.trim().is_empty() {
                return Err(CorpusError::Profile("relation with empty name".into()));
            }
            if !names.insert(r.name.as_str()) {
                return Err(CorpusError::Profile(format!("relation {:?} declared twice", r.name)));
            }
            for t in [&r.head_type, &r.tail_type] {
                if !labels.contains(t.as_str()) {
                    return Err(CorpusError::Profile(format!(
                        "relation {:?} uses type {t} which is not in the schema",
                        r.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }
}
