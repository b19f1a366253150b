//! Entity screening: slot reliability over the co-occurrence graph of each
//! relation list, consistency of each slot with the source sentence, the
//! combined score, threshold filtering and aggregation into typed mentions.

mod graph;
mod reliability;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use graph::{build_slot_graph, SlotGraph};
pub use reliability::{reliability, weighted_reliability, Reliability};

use crate::config::PipelineConfig;
use crate::extract::{ListCandidates, RelationCandidate};
use crate::model::{EntityMention, EntityType, PredefinedRelation, Role, Sentence, Slot};
use crate::similarity::{SimilarityError, SimilarityProvider};

/// `(λ · reliability) · consistency`.
pub fn combined_score(reliability: f64, consistency: f64, lambda_weight: f64) -> f64 {
    (lambda_weight * reliability) * consistency
}

/// The string compared with the sentence for one pair: subject, relation
/// phrase and object joined by single spaces.
pub fn pair_context(subject: &str, phrase: &str, object: &str) -> String {
    format!("{subject} {phrase} {object}")
}

/// Best similarity between the sentence and the context of any pair of
/// `candidate` that contains `slot`. `None` when the slot is absent.
pub fn consistency(
    slot: &Slot,
    candidate: &RelationCandidate,
    sentence_text: &str,
    provider: &dyn SimilarityProvider,
) -> Result<Option<f64>, SimilarityError> {
    let mut best: Option<f64> = None;
    for pair in &candidate.pairs {
        let contains = match slot.role() {
            Role::Subject => &pair.subject == slot,
            Role::Object => &pair.object == slot,
        };
        if !contains {
            continue;
        }
        let context = pair_context(pair.subject.surface(), &candidate.relation.phrase, pair.object.surface());
        let sim = provider.similarity(&context, sentence_text)?;
        best = Some(best.map_or(sim, |b: f64| b.max(sim)));
    }
    Ok(best)
}

/// Numeric knobs of the screening stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenParams {
    pub beta: f64,
    pub lambda_weight: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub threshold: f64,
    pub weighted_edges: bool,
}

impl Default for ScreenParams {
    fn default() -> Self {
        Self::from(&PipelineConfig::default())
    }
}

impl From<&PipelineConfig> for ScreenParams {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            beta: c.beta,
            lambda_weight: c.lambda_weight,
            max_iters: c.max_iters,
            epsilon: c.epsilon,
            threshold: c.score_threshold,
            weighted_edges: c.weighted_edges,
        }
    }
}

/// A surviving pair. Scores are the combined scores of its slots, absent
/// when screening was bypassed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenedPair {
    pub subject: Slot,
    pub object: Slot,
    pub subject_span: (usize, usize),
    pub object_span: (usize, usize),
    pub subject_score: Option<f64>,
    pub object_score: Option<f64>,
}

impl ScreenedPair {
    fn identity(&self) -> (&Slot, &Slot, (usize, usize), (usize, usize)) {
        (&self.subject, &self.object, self.subject_span, self.object_span)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenedRelation {
    pub parent: PredefinedRelation,
    pub pairs: Vec<ScreenedPair>,
}

/// One line of the score dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotScoreRecord {
    pub sentence_id: String,
    pub parent: String,
    pub surface: String,
    pub role: Role,
    pub reliability: f64,
    pub consistency: f64,
    pub combined: f64,
    pub kept: bool,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScreenOutcome {
    /// Non-empty screened relations in list order.
    pub relations: Vec<ScreenedRelation>,
    pub scores: Vec<SlotScoreRecord>,
    pub warnings: Vec<String>,
}

/// Screens every relation list of one sentence.
pub fn screen(
    lists: &[ListCandidates],
    sentence: &Sentence,
    provider: &dyn SimilarityProvider,
    params: &ScreenParams,
) -> ScreenOutcome {
    let mut outcome = ScreenOutcome::default();
    for list in lists {
        screen_list(list, sentence, provider, params, &mut outcome);
    }
    outcome
}

fn screen_list(
    list: &ListCandidates,
    sentence: &Sentence,
    provider: &dyn SimilarityProvider,
    params: &ScreenParams,
    out: &mut ScreenOutcome,
) {
    let graph = build_slot_graph(&list.candidates);
    if graph.is_empty() {
        return;
    }
    let rel = if params.weighted_edges {
        weighted_reliability(&graph, params.beta, params.max_iters, params.epsilon)
    } else {
        reliability(&graph, params.beta, params.max_iters, params.epsilon)
    };

    // The same context string often recurs across slots; ask the provider once.
    let mut sims: HashMap<String, Option<f64>> = HashMap::new();
    let mut combined = vec![0.0; graph.len()];
    for (i, slot) in graph.nodes().iter().enumerate() {
        let mut best = 0.0f64;
        for candidate in &list.candidates {
            for pair in &candidate.pairs {
                let (own, _) = match slot.role() {
                    Role::Subject => (&pair.subject, &pair.object),
                    Role::Object => (&pair.object, &pair.subject),
                };
                if own != slot {
                    continue;
                }
                let context = pair_context(pair.subject.surface(), &candidate.relation.phrase, pair.object.surface());
                let sim = *sims.entry(context).or_insert_with_key(|ctx| {
                    match provider.similarity(ctx, &sentence.text) {
                        Ok(s) => Some(s),
                        Err(e) => {
                            let msg = format!("sentence {}: similarity failed for {ctx:?}: {e}", sentence.id);
                            log::warn!("{msg}");
                            out.warnings.push(msg);
                            None
                        }
                    }
                });
                best = best.max(sim.unwrap_or(0.0));
            }
        }
        let r = rel.scores[i];
        combined[i] = combined_score(r, best, params.lambda_weight);
        out.scores.push(SlotScoreRecord {
            sentence_id: sentence.id.clone(),
            parent: list.parent.name.clone(),
            surface: slot.surface().to_string(),
            role: slot.role(),
            reliability: r,
            consistency: best,
            combined: combined[i],
            kept: combined[i] >= params.threshold,
            iterations_used: rel.iterations_used,
        });
    }

    let score_of = |slot: &Slot| graph.index_of(slot).map(|i| combined[i]).unwrap_or(0.0);
    let pairs = dedup_pairs(list.candidates.iter().flat_map(|c| &c.pairs).filter_map(|p| {
        let (s, o) = (score_of(&p.subject), score_of(&p.object));
        (s >= params.threshold && o >= params.threshold).then(|| ScreenedPair {
            subject: p.subject.clone(),
            object: p.object.clone(),
            subject_span: p.subject_span,
            object_span: p.object_span,
            subject_score: Some(s),
            object_score: Some(o),
        })
    }));
    if !pairs.is_empty() {
        out.relations.push(ScreenedRelation {
            parent: list.parent.clone(),
            pairs,
        });
    }
}

fn dedup_pairs(pairs: impl Iterator<Item = ScreenedPair>) -> Vec<ScreenedPair> {
    let mut out: Vec<ScreenedPair> = Vec::new();
    for p in pairs {
        if !out.iter().any(|q| q.identity() == p.identity()) {
            out.push(p);
        }
    }
    out
}

/// Bypasses screening: every grounded pair survives without scores.
pub fn pass_through(lists: &[ListCandidates]) -> Vec<ScreenedRelation> {
    lists
        .iter()
        .filter_map(|list| {
            let pairs = dedup_pairs(list.candidates.iter().flat_map(|c| &c.pairs).map(|p| ScreenedPair {
                subject: p.subject.clone(),
                object: p.object.clone(),
                subject_span: p.subject_span,
                object_span: p.object_span,
                subject_score: None,
                object_score: None,
            }));
            (!pairs.is_empty()).then(|| ScreenedRelation {
                parent: list.parent.clone(),
                pairs,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Claim {
    etype: EntityType,
    score: Option<f64>,
    order: usize,
}

impl Claim {
    /// Higher score wins, then the relation declared first. Scores are
    /// either all present or all absent within one run.
    fn beats(&self, other: &Claim) -> bool {
        match self.score.partial_cmp(&other.score) {
            Some(std::cmp::Ordering::Greater) => true,
            Some(std::cmp::Ordering::Less) => false,
            _ => self.order < other.order,
        }
    }
}

/// Turns the surviving pairs of one sentence into typed mentions. Subjects
/// take the parent's head type and objects its tail type; a span claimed
/// with several types keeps the best claim. `relation_order` lists parent
/// names in profile declaration order. Output is sorted.
pub fn aggregate_entities(
    sentence: &Sentence,
    screened: &[ScreenedRelation],
    relation_order: &[String],
) -> Vec<EntityMention> {
    let order_of = |name: &str| relation_order.iter().position(|n| n == name).unwrap_or(usize::MAX);
    let mut best: BTreeMap<(usize, usize), Claim> = BTreeMap::new();
    for rel in screened {
        let order = order_of(&rel.parent.name);
        for p in &rel.pairs {
            for (span, etype, score) in [
                (p.subject_span, &rel.parent.head_type, p.subject_score),
                (p.object_span, &rel.parent.tail_type, p.object_score),
            ] {
                let claim = Claim {
                    etype: etype.clone(),
                    score,
                    order,
                };
                match best.get(&span) {
                    Some(current) if !claim.beats(current) => {}
                    _ => {
                        best.insert(span, claim);
                    }
                }
            }
        }
    }
    let mut seen = HashSet::new();
    let mut out: Vec<EntityMention> = best
        .into_iter()
        .filter_map(|((start, end), claim)| {
            match EntityMention::from_span(&sentence.id, &sentence.text, start, end, claim.etype) {
                Ok(m) => Some(m),
                Err(e) => {
                    log::warn!("sentence {}: dropping span {start}..{end}: {e}", sentence.id);
                    None
                }
            }
        })
        .filter(|m| seen.insert((m.etype.clone(), m.start, m.end)))
        .collect();
    out.sort();
    out
}
