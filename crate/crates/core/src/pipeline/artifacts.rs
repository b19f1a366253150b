use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::config::PipelineConfig;
use crate::corpus::{CorpusError, CorpusProfile};
use crate::extract::{CellFailure, ListCandidates, RelationCandidate, SentenceExtraction, SlotPair};
use crate::gateway::GatewayStats;
use crate::model::{EntityType, Role, Slot};
use crate::relations::{DiversifiedRelation, RelationFailure};
use crate::AblationMode;

pub const RELATION_LISTS_FILE: &str = "relation_lists.json";
pub const CANDIDATES_FILE: &str = "candidates.jsonl";
pub const SCORES_FILE: &str = "scores.jsonl";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TABLE_FILE: &str = "report.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

/// One pair as returned by the backend, with its grounding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpPair {
    pub subject: String,
    pub object: String,
    pub subject_span: Option<(usize, usize)>,
    pub object_span: Option<(usize, usize)>,
    pub grounded: bool,
}

/// One line of the candidate dump: everything a single sentence × relation
/// cell produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub sentence_id: String,
    pub parent: String,
    pub relation: String,
    pub head_type: EntityType,
    pub tail_type: EntityType,
    pub pairs: Vec<DumpPair>,
    /// Set when the request or parse failed.
    pub failure: Option<String>,
}

/// Flattens extractions into dump records, keeping input order
/// throughout.
pub fn candidate_records(extractions: &[SentenceExtraction]) -> Vec<CandidateRecord> {
    let mut out = Vec::new();
    for ex in extractions {
        for list in &ex.lists {
            for cand in &list.candidates {
                let r = &cand.relation;
                let mut pairs: Vec<DumpPair> = cand
                    .pairs
                    .iter()
                    .map(|p| DumpPair {
                        subject: p.subject.surface().to_string(),
                        object: p.object.surface().to_string(),
                        subject_span: Some(p.subject_span),
                        object_span: Some(p.object_span),
                        grounded: true,
                    })
                    .collect();
                pairs.extend(
                    ex.hallucinations
                        .iter()
                        .filter(|h| h.parent == r.parent && h.relation == r.phrase)
                        .map(|h| DumpPair {
                            subject: h.subject.clone(),
                            object: h.object.clone(),
                            subject_span: None,
                            object_span: None,
                            grounded: false,
                        }),
                );
                let failure = ex
                    .failures
                    .iter()
                    .find(|f| f.parent == r.parent && f.relation == r.phrase)
                    .map(|f| f.message.clone());
                out.push(CandidateRecord {
                    sentence_id: ex.sentence_id.clone(),
                    parent: r.parent.clone(),
                    relation: r.phrase.clone(),
                    head_type: r.head_type.clone(),
                    tail_type: r.tail_type.clone(),
                    pairs,
                    failure,
                });
            }
        }
    }
    out
}

/// Rebuilds per-sentence candidates from dump records. Only grounded pairs
/// come back; parents are resolved against the profile.
pub fn extractions_from_records(
    records: &[CandidateRecord],
    profile: &CorpusProfile,
) -> Result<Vec<SentenceExtraction>, PipelineError> {
    let mut out: Vec<SentenceExtraction> = Vec::new();
    for (n, rec) in records.iter().enumerate() {
        let bad = |message: String| PipelineError::Data(CorpusError::Format { line: n + 1, message });
        let parent = profile
            .relations
            .iter()
            .find(|p| p.name == rec.parent)
            .ok_or_else(|| bad(format!("relation {:?} is not declared in the profile", rec.parent)))?;
        if out.last().map(|e| &e.sentence_id) != Some(&rec.sentence_id) {
            out.push(SentenceExtraction {
                sentence_id: rec.sentence_id.clone(),
                lists: Vec::new(),
                hallucinations: Vec::new(),
                failures: Vec::new(),
            });
        }
        let ex = out.last_mut().expect("just pushed");
        if ex.lists.last().map(|l| &l.parent.name) != Some(&parent.name) {
            ex.lists.push(ListCandidates {
                parent: parent.clone(),
                candidates: Vec::new(),
            });
        }
        if let Some(message) = &rec.failure {
            ex.failures.push(CellFailure {
                sentence_id: rec.sentence_id.clone(),
                parent: rec.parent.clone(),
                relation: rec.relation.clone(),
                message: message.clone(),
            });
        }
        let relation = DiversifiedRelation::from_parent(parent, rec.relation.clone());
        let mut pairs = Vec::new();
        for p in rec.pairs.iter().filter(|p| p.grounded) {
            let (Some(subject_span), Some(object_span)) = (p.subject_span, p.object_span) else {
                return Err(bad("grounded pair without spans".into()));
            };
            let (Some(subject), Some(object)) = (Slot::new(&p.subject, Role::Subject), Slot::new(&p.object, Role::Object))
            else {
                return Err(bad("empty pair surface".into()));
            };
            pairs.push(SlotPair {
                subject,
                object,
                subject_span,
                object_span,
                relation: rec.relation.clone(),
                sentence_id: rec.sentence_id.clone(),
            });
        }
        ex.lists.last_mut().expect("just pushed").candidates.push(RelationCandidate { relation, pairs });
    }
    Ok(out)
}

/// Artifact file names relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub relation_lists: String,
    pub candidates: String,
    pub scores: Option<String>,
    pub predictions: String,
    pub report: String,
    pub report_table: String,
}

impl Default for ArtifactPaths {
    fn default() -> Self {
        Self {
            relation_lists: RELATION_LISTS_FILE.into(),
            candidates: CANDIDATES_FILE.into(),
            scores: Some(SCORES_FILE.into()),
            predictions: PREDICTIONS_FILE.into(),
            report: REPORT_FILE.into(),
            report_table: REPORT_TABLE_FILE.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    #[serde(flatten)]
    pub gateway: GatewayStats,
    /// Pairs discarded because a surface does not occur in its sentence.
    pub hallucinated_pairs: usize,
    pub predicted_mentions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceFailure {
    pub sentence_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailures {
    pub relations: Vec<RelationFailure>,
    pub cells: Vec<CellFailure>,
    pub sentences: Vec<SentenceFailure>,
    pub similarity_warnings: usize,
}

/// Wall-clock bounds of a run in seconds since the Unix epoch. Kept apart so
/// that the rest of the manifest can be compared across runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: u64,
    pub finished: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub profile: CorpusProfile,
    pub corpus_sentences: usize,
    pub k: Option<usize>,
    pub mode: AblationMode,
    pub backend_id: String,
    pub cache_state_hash: String,
    pub artifacts: ArtifactPaths,
    pub stats: RunStats,
    pub failures: RunFailures,
    pub timestamps: Timestamps,
}

impl RunManifest {
    /// The manifest with its timestamps zeroed, for run-to-run comparison.
    pub fn without_timestamps(&self) -> Self {
        Self {
            timestamps: Timestamps::default(),
            ..self.clone()
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let raw = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&raw)
            .map_err(|source| PipelineError::Data(CorpusError::Json { line: source.line(), source }))
    }
}

pub(crate) fn now_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| PipelineError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| PipelineError::io(path, e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| PipelineError::io(path, e))
}

pub fn write_jsonl_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| PipelineError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| PipelineError::io(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

pub fn read_jsonl_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|source| PipelineError::Data(CorpusError::Json { line: i + 1, source }))?,
        );
    }
    Ok(out)
}

/// Reads every file of a run directory except the manifest timestamps, for
/// byte-level comparison of two runs.
pub fn run_fingerprint(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, PipelineError> {
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;
    let mut files = BTreeMap::new();
    let a = &manifest.artifacts;
    for name in [&a.relation_lists, &a.candidates, &a.predictions, &a.report, &a.report_table]
        .into_iter()
        .chain(a.scores.as_ref())
    {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
        files.insert(PathBuf::from(name), bytes);
    }
    let manifest = serde_json::to_vec_pretty(&manifest.without_timestamps()).expect("manifest serializes");
    files.insert(PathBuf::from(MANIFEST_FILE), manifest);
    Ok(files)
}
