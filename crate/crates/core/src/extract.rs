//! Relation-driven entity extraction: for each sentence and each diversified
//! relation, prompt with few-shot demonstrations, parse `(subject, object)`
//! pairs and ground them to character spans.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::corpus::Corpus;
use crate::gateway::{CompletionRequest, Gateway};
use crate::model::{PredefinedRelation, Role, Sentence, Slot};
use crate::relations::{DiversifiedRelation, RelationList};
use crate::seeded::ranked_positions;
use crate::template::PromptTemplate;
use crate::text::{find_char_span, normalize_text};

/// Output-format instructions substituted for `{format}`.
pub const PAIR_FORMAT_INSTRUCTIONS: &str = "Answer with a JSON array of objects with the string fields \"subject\" and \"object\", for example [{\"subject\": \"...\", \"object\": \"...\"}]. Answer [] if there is no such pair.";

/// A solved example shown to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub sentence_id: String,
    pub sentence_text: String,
    pub pairs: Vec<(String, String)>,
}

/// A grounded `(subject, object)` pair produced by one diversified relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotPair {
    pub subject: Slot,
    pub object: Slot,
    pub subject_span: (usize, usize),
    pub object_span: (usize, usize),
    pub relation: String,
    pub sentence_id: String,
}

/// Pairs extracted by one diversified relation from one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCandidate {
    pub relation: DiversifiedRelation,
    pub pairs: Vec<SlotPair>,
}

/// All candidates of one relation list for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListCandidates {
    pub parent: PredefinedRelation,
    pub candidates: Vec<RelationCandidate>,
}

/// A parsed pair whose subject or object does not occur in the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallucinatedPair {
    pub sentence_id: String,
    pub parent: String,
    pub relation: String,
    pub subject: String,
    pub object: String,
    pub subject_grounded: bool,
    pub object_grounded: bool,
}

/// A sentence × relation cell whose request or parse failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub sentence_id: String,
    pub parent: String,
    pub relation: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceExtraction {
    pub sentence_id: String,
    pub lists: Vec<ListCandidates>,
    pub hallucinations: Vec<HallucinatedPair>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, thiserror::Error)]
pub enum ExtractionError {
    #[error("no well-formed array of subject/object pairs in the response")]
    ParseFailure,
    #[error("all {cells} extraction cells failed; first failure: {first}")]
    AllCellsFailed { cells: usize, first: String },
}

/// Picks up to `n_demos` training sentences that contain at least one mention
/// of the head type and one of the tail type, ranked by
/// `SHA-256("{seed}:{relation name}:{sentence id}")`. Each selected sentence
/// pairs every head mention with every other tail mention.
pub fn build_demonstrations(
    train: &Corpus,
    relation: &PredefinedRelation,
    n_demos: usize,
    seed: u64,
) -> Vec<Demonstration> {
    let qualifying: Vec<(&Sentence, Vec<(String, String)>)> = train
        .sentences
        .iter()
        .filter_map(|s| {
            let mut pairs = Vec::new();
            for h in s.gold.iter().filter(|m| m.etype == relation.head_type) {
                for t in s.gold.iter().filter(|m| m.etype == relation.tail_type) {
                    if h == t {
                        continue;
                    }
                    let pair = (h.surface.clone(), t.surface.clone());
                    if !pairs.contains(&pair) {
                        pairs.push(pair);
                    }
                }
            }
            (!pairs.is_empty()).then_some((s, pairs))
        })
        .collect();
    if qualifying.is_empty() {
        if n_demos > 0 {
            log::warn!(
                "no training sentence has both {} and {} mentions; {:?} runs zero-shot",
                relation.head_type,
                relation.tail_type,
                relation.name
            );
        }
        return Vec::new();
    }
    ranked_positions(qualifying.iter().map(|(s, _)| s.id.as_str()), seed, &relation.name)
        .into_iter()
        .take(n_demos)
        .map(|i| {
            let (s, pairs) = &qualifying[i];
            Demonstration {
                sentence_id: s.id.clone(),
                sentence_text: s.text.clone(),
                pairs: pairs.clone(),
            }
        })
        .collect()
}

fn pairs_json(pairs: &[(String, String)]) -> String {
    let arr: Vec<Value> = pairs
        .iter()
        .map(|(s, o)| serde_json::json!({"subject": s, "object": o}))
        .collect();
    serde_json::to_string(&arr).expect("pairs serialize")
}

/// Renders demonstrations in selection order, one `Text:`/`Answer:` block
/// each.
pub fn render_demonstrations(demos: &[Demonstration]) -> String {
    let mut out = String::new();
    for d in demos {
        out.push_str("Text: ");
        out.push_str(&d.sentence_text);
        out.push_str("\nAnswer: ");
        out.push_str(&pairs_json(&d.pairs));
        out.push_str("\n\n");
    }
    out
}

pub fn build_extraction_prompt(
    sentence: &Sentence,
    relation: &DiversifiedRelation,
    demos: &[Demonstration],
    template: &PromptTemplate,
    config: &PipelineConfig,
) -> CompletionRequest {
    let demos = render_demonstrations(demos);
    let user_text = template.render(&[
        ("relation", &relation.phrase),
        ("head_type", relation.head_type.as_str()),
        ("tail_type", relation.tail_type.as_str()),
        ("demonstrations", &demos),
        ("sentence", &sentence.text),
        ("format", PAIR_FORMAT_INSTRUCTIONS),
    ]);
    CompletionRequest {
        system_text: config.system_prompt.clone(),
        user_text,
        temperature: config.model.temperature,
        max_output_chars: config.model.max_output_chars,
        model_id: config.model.model_id.clone(),
    }
}

fn as_pairs(value: &Value) -> Option<Vec<(String, String)>> {
    let items = value.as_array()?;
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let obj = item.as_object()?;
        let field = |name: &str| match obj.get(name)? {
            Value::String(s) => Some(s.clone()),
            Value::Null => Some(String::new()),
            _ => None,
        };
        out.push((field("subject")?, field("object")?));
    }
    Some(out)
}

/// Finds the first well-formed JSON array of `{subject, object}` objects in
/// `text`, skipping any surrounding prose. Surfaces are normalized; pairs
/// with an empty field are dropped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ExtractionError> {
    for (pos, _) in text.match_indices('[') {
        let mut stream = serde_json::Deserializer::from_str(&text[pos..]).into_iter::<Value>();
        let Some(Ok(value)) = stream.next() else {
            continue;
        };
        let Some(raw) = as_pairs(&value) else {
            continue;
        };
        return Ok(raw
            .into_iter()
            .map(|(s, o)| (normalize_text(&s), normalize_text(&o)))
            .filter(|(s, o)| !s.is_empty() && !o.is_empty())
            .collect());
    }
    Err(ExtractionError::ParseFailure)
}

/// Leftmost exact occurrence of `surface` in the sentence, in characters.
pub fn ground_span(sentence_text: &str, surface: &str) -> Option<(usize, usize)> {
    find_char_span(sentence_text, surface)
}

enum CellOutcome {
    Pairs(Vec<SlotPair>, Vec<HallucinatedPair>),
    Failed(CellFailure),
}

fn extract_cell(
    gateway: &Gateway,
    sentence: &Sentence,
    relation: &DiversifiedRelation,
    demos: &[Demonstration],
    template: &PromptTemplate,
    config: &PipelineConfig,
) -> CellOutcome {
    let request = build_extraction_prompt(sentence, relation, demos, template, config);
    let fail = |message: String| {
        log::warn!("sentence {:?}, relation {:?}: {message}", sentence.id, relation.phrase);
        CellOutcome::Failed(CellFailure {
            sentence_id: sentence.id.clone(),
            parent: relation.parent.clone(),
            relation: relation.phrase.clone(),
            message,
        })
    };
    let text = match gateway.complete(&request) {
        Ok(r) => r.text,
        Err(e) => return fail(e.to_string()),
    };
    let raw = match parse_pairs(&text) {
        Ok(p) => p,
        Err(e) => return fail(e.to_string()),
    };
    let mut pairs: Vec<SlotPair> = Vec::new();
    let mut hallucinated = Vec::new();
    let mut seen = HashSet::new();
    for (subject, object) in raw {
        if !seen.insert((subject.clone(), object.clone())) {
            continue;
        }
        let s_span = ground_span(&sentence.text, &subject);
        let o_span = ground_span(&sentence.text, &object);
        match (s_span, o_span) {
            (Some(subject_span), Some(object_span)) => pairs.push(SlotPair {
                subject: Slot::new(&subject, Role::Subject).expect("non-empty subject"),
                object: Slot::new(&object, Role::Object).expect("non-empty object"),
                subject_span,
                object_span,
                relation: relation.phrase.clone(),
                sentence_id: sentence.id.clone(),
            }),
            _ => hallucinated.push(HallucinatedPair {
                sentence_id: sentence.id.clone(),
                parent: relation.parent.clone(),
                relation: relation.phrase.clone(),
                subject_grounded: s_span.is_some(),
                object_grounded: o_span.is_some(),
                subject,
                object,
            }),
        }
    }
    CellOutcome::Pairs(pairs, hallucinated)
}

/// Runs every diversified relation of every list against one sentence.
///
/// `demos[i]` are the demonstrations for `lists[i]`. Cells run on the
/// current rayon pool; results are assembled in list and relation order.
/// Failed cells become empty candidates and are reported; the call fails only
/// when every cell failed.
pub fn associate_entities(
    gateway: &Gateway,
    sentence: &Sentence,
    lists: &[RelationList],
    demos: &[Vec<Demonstration>],
    template: &PromptTemplate,
    config: &PipelineConfig,
) -> Result<SentenceExtraction, ExtractionError> {
    let cells: Vec<(usize, &DiversifiedRelation)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.relations.iter().map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(i, relation)| {
            let list_demos = demos.get(i).map(Vec::as_slice).unwrap_or(&[]);
            extract_cell(gateway, sentence, relation, list_demos, template, config)
        })
        .collect();

    let mut result = SentenceExtraction {
        sentence_id: sentence.id.clone(),
        lists: lists
            .iter()
            .map(|l| ListCandidates {
                parent: l.parent.clone(),
                candidates: Vec::with_capacity(l.relations.len()),
            })
            .collect(),
        hallucinations: Vec::new(),
        failures: Vec::new(),
    };
    for ((list_idx, relation), outcome) in cells.iter().zip(outcomes) {
        let pairs = match outcome {
            CellOutcome::Pairs(pairs, hallucinated) => {
                result.hallucinations.extend(hallucinated);
                pairs
            }
            CellOutcome::Failed(f) => {
                result.failures.push(f);
                Vec::new()
            }
        };
        result.lists[*list_idx].candidates.push(RelationCandidate {
            relation: (*relation).clone(),
            pairs,
        });
    }
    if !cells.is_empty() && result.failures.len() == cells.len() {
        return Err(ExtractionError::AllCellsFailed {
            cells: cells.len(),
            first: result.failures[0].message.clone(),
        });
    }
    Ok(result)
}
