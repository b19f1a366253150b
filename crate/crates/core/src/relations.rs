//! Relation list generation: each predefined relation is expanded into a
//! list of diversified relation phrases that inherit its head and tail
//! entity types.

use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::PipelineConfig;
use crate::corpus::CorpusProfile;
use crate::gateway::{CompletionRequest, Gateway, GatewayError};
use crate::model::{EntityType, PredefinedRelation};
use crate::template::PromptTemplate;
use crate::text::normalize_text;
use crate::AblationMode;

/// Added to the relation temperature for the single retry after an empty
/// generation.
pub const RETRY_TEMPERATURE_STEP: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiversifiedRelation {
    pub phrase: String,
    pub head_type: EntityType,
    pub tail_type: EntityType,
    /// Name of the predefined relation this phrase was generated from.
    pub parent: String,
}

impl DiversifiedRelation {
    pub fn from_parent(parent: &PredefinedRelation, phrase: String) -> Self {
        Self {
            phrase,
            head_type: parent.head_type.clone(),
            tail_type: parent.tail_type.clone(),
            parent: parent.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationList {
    pub parent: PredefinedRelation,
    pub relations: Vec<DiversifiedRelation>,
}

impl RelationList {
    /// A list holding only the predefined relation itself.
    pub fn parent_only(parent: &PredefinedRelation) -> Self {
        Self {
            parent: parent.clone(),
            relations: vec![DiversifiedRelation::from_parent(parent, parent.name.clone())],
        }
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|r| r.phrase.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("the profile declares no predefined relations")]
    EmptyProfile,
    #[error("no relation phrases could be parsed for {relation:?}")]
    GenerationEmpty { relation: String },
    #[error("backend error for relation {relation:?}: {source}")]
    Gateway {
        relation: String,
        #[source]
        source: GatewayError,
    },
    #[error("relation list file: {0}")]
    File(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFailure {
    pub relation: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationOutcome {
    /// One list per successfully expanded relation, in profile order.
    pub lists: Vec<RelationList>,
    pub failures: Vec<RelationFailure>,
}

/// Builds the zero-shot prompt asking for `n_diverse` relation phrases.
pub fn build_relation_prompt(
    parent: &PredefinedRelation,
    n_diverse: usize,
    template: &PromptTemplate,
    config: &PipelineConfig,
) -> CompletionRequest {
    let n = n_diverse.to_string();
    let user_text = template.render(&[
        ("relation", &parent.name),
        ("head_type", parent.head_type.as_str()),
        ("tail_type", parent.tail_type.as_str()),
        ("n", &n),
    ]);
    CompletionRequest {
        system_text: config.system_prompt.clone(),
        user_text,
        temperature: config.model.relation_temperature,
        max_output_chars: config.model.max_output_chars,
        model_id: config.model.model_id.clone(),
    }
}

fn numbering() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?:\(?\d+\s*[.)、:：．]|[-*•·])\s*").expect("numbering regex"))
}

fn clean_phrase(raw: &str) -> String {
    let trimmed = raw.trim().trim_matches(|c: char| {
        matches!(c, '"' | '\'' | '“' | '”' | '‘' | '’' | '「' | '」' | '`' | '*')
    });
    let trimmed = trimmed.trim_end_matches(['。', '.', ';', '；', ',', '，']);
    normalize_text(trimmed)
}

/// Parses numbered or line-separated phrases. When any line is numbered or
/// bulleted, unnumbered lines are treated as commentary and skipped.
pub fn parse_relation_list(
    text: &str,
    parent: &PredefinedRelation,
    n_diverse: usize,
) -> Result<RelationList, GenerationError> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let any_numbered = lines.iter().any(|l| numbering().is_match(l));
    let mut phrases: Vec<String> = Vec::new();
    for line in lines {
        let body = match numbering().find(line) {
            Some(m) => &line[m.end()..],
            None if any_numbered => continue,
            None => line,
        };
        let phrase = clean_phrase(body);
        if !phrase.is_empty() && !phrases.contains(&phrase) {
            phrases.push(phrase);
        }
    }
    phrases.truncate(n_diverse);
    if phrases.is_empty() {
        return Err(GenerationError::GenerationEmpty {
            relation: parent.name.clone(),
        });
    }
    Ok(RelationList {
        parent: parent.clone(),
        relations: phrases
            .into_iter()
            .map(|p| DiversifiedRelation::from_parent(parent, p))
            .collect(),
    })
}

fn generate_one(
    gateway: &Gateway,
    parent: &PredefinedRelation,
    template: &PromptTemplate,
    config: &PipelineConfig,
) -> Result<RelationList, GenerationError> {
    let gateway_err = |source| GenerationError::Gateway {
        relation: parent.name.clone(),
        source,
    };
    let mut request = build_relation_prompt(parent, config.n_diverse, template, config);
    let text = gateway.complete(&request).map_err(gateway_err)?.text;
    let generated = match parse_relation_list(&text, parent, config.n_diverse) {
        Ok(list) => list,
        Err(GenerationError::GenerationEmpty { .. }) => {
            log::warn!("empty relation list for {:?}; retrying once", parent.name);
            request.temperature += RETRY_TEMPERATURE_STEP;
            let text = gateway.complete(&request).map_err(gateway_err)?.text;
            parse_relation_list(&text, parent, config.n_diverse)?
        }
        Err(e) => return Err(e),
    };
    let mut list = RelationList::parent_only(parent);
    for r in generated.relations {
        if !list.relations.iter().any(|x| x.phrase == r.phrase) {
            list.relations.push(r);
        }
    }
    Ok(list)
}

/// Expands every predefined relation of `profile`. The parent relation is
/// always the first entry of its list; under [`AblationMode::NoRelationList`]
/// lists contain only the parent and the backend is not called.
pub fn generate_relation_lists(
    gateway: &Gateway,
    profile: &CorpusProfile,
    config: &PipelineConfig,
    template: &PromptTemplate,
    mode: AblationMode,
) -> Result<GenerationOutcome, GenerationError> {
    if profile.relations.is_empty() {
        return Err(GenerationError::EmptyProfile);
    }
    if mode == AblationMode::NoRelationList {
        return Ok(GenerationOutcome {
            lists: profile.relations.iter().map(RelationList::parent_only).collect(),
            failures: Vec::new(),
        });
    }
    let results: Vec<Result<RelationList, GenerationError>> = profile
        .relations
        .par_iter()
        .map(|parent| generate_one(gateway, parent, template, config))
        .collect();
    let mut outcome = GenerationOutcome {
        lists: Vec::new(),
        failures: Vec::new(),
    };
    for (parent, result) in profile.relations.iter().zip(results) {
        match result {
            Ok(list) => outcome.lists.push(list),
            Err(e) => {
                log::error!("relation {:?} failed: {e}", parent.name);
                outcome.failures.push(RelationFailure {
                    relation: parent.name.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(outcome)
}

/// Serializes lists as a JSON object mapping parent name to its phrases.
pub fn relation_lists_to_json(lists: &[RelationList]) -> Value {
    let mut map = Map::new();
    for list in lists {
        map.insert(
            list.parent.name.clone(),
            Value::Array(list.phrases().map(|p| Value::String(p.to_string())).collect()),
        );
    }
    Value::Object(map)
}

/// Reads a relation-list JSON object back, taking entity types from the
/// profile. Lists come back in profile order.
pub fn relation_lists_from_json(value: &Value, profile: &CorpusProfile) -> Result<Vec<RelationList>, GenerationError> {
    let map = value
        .as_object()
        .ok_or_else(|| GenerationError::File("expected a JSON object".into()))?;
    for name in map.keys() {
        if profile.relation_index(name).is_none() {
            return Err(GenerationError::File(format!("relation {name:?} is not declared in the profile")));
        }
    }
    let mut lists = Vec::new();
    for parent in &profile.relations {
        let Some(entry) = map.get(&parent.name) else {
            continue;
        };
        let phrases = entry
            .as_array()
            .ok_or_else(|| GenerationError::File(format!("{:?}: expected an array of phrases", parent.name)))?;
        let mut relations: Vec<DiversifiedRelation> = Vec::new();
        for p in phrases {
            let phrase = p
                .as_str()
                .map(normalize_text)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| GenerationError::File(format!("{:?}: phrases must be non-empty strings", parent.name)))?;
            if !relations.iter().any(|r| r.phrase == phrase) {
                relations.push(DiversifiedRelation::from_parent(parent, phrase));
            }
        }
        if relations.is_empty() {
            return Err(GenerationError::File(format!("{:?}: empty phrase list", parent.name)));
        }
        lists.push(RelationList {
            parent: parent.clone(),
            relations,
        });
    }
    Ok(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{MockBackend, MockEntry};
    use std::sync::Arc;

    fn ty(s: &str) -> EntityType {
        EntityType::new(s).unwrap()
    }

    fn production() -> PredefinedRelation {
        PredefinedRelation::new("production", ty("enterprise"), ty("product")).unwrap()
    }

    fn profile(relations: Vec<PredefinedRelation>) -> CorpusProfile {
        CorpusProfile {
            profile_name: "t".into(),
            schema: vec![ty("enterprise"), ty("product"), ty("LOC")],
            relations,
        }
    }

    #[test]
    fn prompt_carries_all_values() {
        let req = build_relation_prompt(&production(), 5, &PromptTemplate::relation_default(), &PipelineConfig::default());
        for needle in ["production", "enterprise", "product", "5"] {
            assert!(req.user_text.contains(needle), "{needle}");
        }
        assert!(!req.user_text.contains("{n}"));
        assert!(!req.user_text.contains("Text:"), "relation prompts carry no demonstrations");
    }

    #[test]
    fn prompt_for_single_phrase() {
        let req = build_relation_prompt(&production(), 1, &PromptTemplate::relation_default(), &PipelineConfig::default());
        assert!(req.user_text.contains("exactly 1 numbered"));
    }

    #[test]
    fn parses_numbered_output() {
        let list = parse_relation_list("1. manufactures\n2. produces\n3. outputs", &production(), 5).unwrap();
        assert_eq!(list.phrases().collect::<Vec<_>>(), vec!["manufactures", "produces", "outputs"]);
        assert!(list
            .relations
            .iter()
            .all(|r| r.head_type == ty("enterprise") && r.tail_type == ty("product")));
    }

    #[test]
    fn dedups_and_truncates() {
        assert_eq!(parse_relation_list("produces\nproduces", &production(), 5).unwrap().len(), 1);
        let seven = "1. a\n2. b\n3. c\n4. d\n5. e\n6. f\n7. g";
        let list = parse_relation_list(seven, &production(), 5).unwrap();
        assert_eq!(list.phrases().collect::<Vec<_>>(), vec!["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn skips_commentary_when_numbered() {
        let text = "Here are the relations:\n1) 生产\n2、 “制造”\n- 出产。\nHope this helps";
        let list = parse_relation_list(text, &production(), 5).unwrap();
        assert_eq!(list.phrases().collect::<Vec<_>>(), vec!["生产", "制造", "出产"]);
    }

    #[test]
    fn empty_output_is_an_error() {
        assert!(matches!(
            parse_relation_list(" \n\n", &production(), 5),
            Err(GenerationError::GenerationEmpty { .. })
        ));
    }

    #[test]
    fn generation_prepends_parent() {
        let locate = PredefinedRelation::new("located_in", ty("enterprise"), ty("LOC")).unwrap();
        let mock = MockBackend::from_entries(vec![
            MockEntry::pattern("\"production\"", "1. makes\n2. produces\n3. outputs"),
            MockEntry::pattern("\"located_in\"", "1. based in\n2. sited in\n3. found in"),
        ])
        .unwrap();
        let gw = Gateway::new(Arc::new(mock), None);
        let p = profile(vec![production(), locate]);
        let out = generate_relation_lists(&gw, &p, &PipelineConfig::default(), &PromptTemplate::relation_default(), AblationMode::Full)
            .unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.lists.len(), 2);
        assert_eq!(out.lists[0].phrases().collect::<Vec<_>>(), vec!["production", "makes", "produces", "outputs"]);
        assert_eq!(out.lists[1].len(), 4);
        assert_eq!(out.lists[1].relations[0].phrase, "located_in");
    }

    #[test]
    fn ablation_uses_parents_only() {
        let gw = Gateway::new(Arc::new(MockBackend::from_entries(vec![]).unwrap()), None);
        let out = generate_relation_lists(
            &gw,
            &profile(vec![production()]),
            &PipelineConfig::default(),
            &PromptTemplate::relation_default(),
            AblationMode::NoRelationList,
        )
        .unwrap();
        assert_eq!(out.lists, vec![RelationList::parent_only(&production())]);
        assert_eq!(gw.stats().backend_calls, 0);
    }

    #[test]
    fn empty_profile_rejected() {
        let gw = Gateway::new(Arc::new(MockBackend::from_entries(vec![]).unwrap()), None);
        let err = generate_relation_lists(&gw, &profile(vec![]), &PipelineConfig::default(), &PromptTemplate::relation_default(), AblationMode::Full)
            .unwrap_err();
        assert!(matches!(err, GenerationError::EmptyProfile));
    }

    #[test]
    fn empty_generation_retries_once_then_fails_only_that_relation() {
        let locate = PredefinedRelation::new("located_in", ty("enterprise"), ty("LOC")).unwrap();
        let mock = Arc::new(
            MockBackend::from_entries(vec![
                MockEntry::pattern("\"production\"", ""),
                MockEntry::pattern("\"production\"", "1. makes"),
                MockEntry::pattern("\"located_in\"", "   "),
            ])
            .unwrap(),
        );
        let gw = Gateway::new(mock.clone(), None);
        let config = PipelineConfig {
            max_concurrency: 1,
            ..PipelineConfig::default()
        };
        let out = generate_relation_lists(
            &gw,
            &profile(vec![production(), locate]),
            &config,
            &PromptTemplate::relation_default(),
            AblationMode::Full,
        )
        .unwrap();
        assert_eq!(out.lists.len(), 1);
        assert_eq!(out.lists[0].phrases().collect::<Vec<_>>(), vec!["production", "makes"]);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].relation, "located_in");
        assert_eq!(mock.call_count(), 4);
    }

    #[test]
    fn list_file_round_trip() {
        let p = profile(vec![production()]);
        let list = RelationList {
            parent: production(),
            relations: vec![
                DiversifiedRelation::from_parent(&production(), "production".into()),
                DiversifiedRelation::from_parent(&production(), "makes".into()),
            ],
        };
        let json = relation_lists_to_json(std::slice::from_ref(&list));
        assert_eq!(json.to_string(), r#"{"production":["production","makes"]}"#);
        assert_eq!(relation_lists_from_json(&json, &p).unwrap(), vec![list]);
        assert!(relation_lists_from_json(&serde_json::json!({"unknown": ["x"]}), &p).is_err());
    }
}
