//! End-to-end runs: generate relation lists, extract candidates, screen,
//! aggregate and evaluate, writing every intermediate artifact to a run
//! directory.

mod artifacts;

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

pub use artifacts::*;

use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::{sample_few_shot, Corpus, CorpusError, CorpusProfile};
use crate::eval::{AblationRow, EvalReport, ReportMetadata};
use crate::extract::{associate_entities, build_demonstrations, Demonstration, SentenceExtraction};
use crate::gateway::{Gateway, GatewayError};
use crate::model::{EntityMention, Sentence};
use crate::relations::{generate_relation_lists, relation_lists_to_json, GenerationError, GenerationOutcome, RelationList};
use crate::screening::{aggregate_entities, pass_through, screen, ScreenParams, SlotScoreRecord};
use crate::similarity::{SimilarityError, SimilarityProvider};
use crate::template::{PromptTemplate, TemplateError, EXTRACTION_PLACEHOLDERS, RELATION_PLACEHOLDERS};
use crate::AblationMode;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{0}")]
    Usage(String),
    #[error("the corpus has no sentences")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Input { path: String, source: CorpusError },
    #[error(transparent)]
    Data(CorpusError),
    #[error(transparent)]
    Generation(GenerationError),
    #[error("{0}")]
    Backend(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Attaches the input path to a corpus error.
    pub fn input(path: &Path, source: CorpusError) -> Self {
        PipelineError::Input {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for usage and configuration problems, 3 for backend failures, 4 for
    /// malformed data.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::Template(_)
            | PipelineError::Usage(_)
            | PipelineError::EmptyCorpus
            | PipelineError::Io { .. } => 2,
            PipelineError::Input { source, .. } | PipelineError::Data(source) => match source {
                CorpusError::Io(_) | CorpusError::SampleSize { .. } => 2,
                _ => 4,
            },
            PipelineError::Generation(e) => match e {
                GenerationError::EmptyProfile => 2,
                GenerationError::File(_) => 4,
                GenerationError::GenerationEmpty { .. } | GenerationError::Gateway { .. } => 3,
            },
            PipelineError::Gateway(e) => match e {
                GatewayError::Script(_) => 4,
                GatewayError::Cache(_) | GatewayError::InvalidRequest(_) => 2,
                _ => 3,
            },
            PipelineError::Similarity(e) => match e {
                SimilarityError::Cache(_) => 2,
                _ => 3,
            },
            PipelineError::Backend(_) => 3,
        }
    }
}

impl From<GenerationError> for PipelineError {
    fn from(e: GenerationError) -> Self {
        PipelineError::Generation(e)
    }
}

/// What one run operates on.
#[derive(Debug, Clone, Copy)]
pub struct RunInputs<'a> {
    pub profile: &'a CorpusProfile,
    /// Sentences to label and score against their gold mentions.
    pub corpus: &'a Corpus,
    /// Pool of annotated sentences for demonstrations. Without one, every
    /// relation runs zero-shot.
    pub train: Option<&'a Corpus>,
    /// When set, demonstrations come from a seeded sample of `k` training
    /// sentences.
    pub k: Option<usize>,
    pub mode: AblationMode,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractionRun {
    /// In corpus order; sentences whose every cell failed are absent.
    pub extractions: Vec<SentenceExtraction>,
    pub sentence_failures: Vec<SentenceFailure>,
}

impl ExtractionRun {
    pub fn hallucinated_pairs(&self) -> usize {
        self.extractions.iter().map(|e| e.hallucinations.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScreeningRun {
    /// Every corpus sentence with its predicted mentions in `gold`.
    pub predictions: Vec<Sentence>,
    /// Empty when screening was bypassed.
    pub scores: Vec<SlotScoreRecord>,
    pub warnings: Vec<String>,
}

impl ScreeningRun {
    pub fn mentions(&self) -> Vec<EntityMention> {
        self.predictions.iter().flat_map(|s| s.gold.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub relation_lists: Vec<RelationList>,
    pub extraction: ExtractionRun,
    pub screening: ScreeningRun,
    pub report: EvalReport,
    pub manifest: RunManifest,
}

pub struct Pipeline {
    config: PipelineConfig,
    gateway: Gateway,
    similarity: Arc<dyn SimilarityProvider>,
    relation_template: PromptTemplate,
    extraction_template: PromptTemplate,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    /// Validates the config and loads the prompt templates it names.
    pub fn new(
        config: PipelineConfig,
        gateway: Gateway,
        similarity: Arc<dyn SimilarityProvider>,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        let relation_template = match &config.relation_template {
            Some(p) => PromptTemplate::load(Path::new(p), &RELATION_PLACEHOLDERS)?,
            None => PromptTemplate::relation_default(),
        };
        let extraction_template = match &config.extraction_template {
            Some(p) => PromptTemplate::load(Path::new(p), &EXTRACTION_PLACEHOLDERS)?,
            None => PromptTemplate::extraction_default(),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.max_concurrency)
            .build()
            .map_err(|e| PipelineError::Usage(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            config,
            gateway,
            similarity,
            relation_template,
            extraction_template,
            pool,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    /// Expands the profile's relations. Fails only when no list survives.
    pub fn generate(&self, profile: &CorpusProfile, mode: AblationMode) -> Result<GenerationOutcome, PipelineError> {
        let outcome = self.pool.install(|| {
            generate_relation_lists(&self.gateway, profile, &self.config, &self.relation_template, mode)
        })?;
        if outcome.lists.is_empty() {
            let first = outcome.failures.first().map(|f| f.message.as_str()).unwrap_or("unknown error");
            return Err(PipelineError::Backend(format!("relation generation failed for every relation; first: {first}")));
        }
        Ok(outcome)
    }

    /// Demonstrations for each list, drawn from `train`.
    pub fn demonstrations(&self, lists: &[RelationList], train: Option<&Corpus>) -> Vec<Vec<Demonstration>> {
        lists
            .iter()
            .map(|l| match train {
                Some(t) => build_demonstrations(t, &l.parent, self.config.n_demos, self.config.seed),
                None => Vec::new(),
            })
            .collect()
    }

    /// Runs every sentence against every diversified relation. A sentence
    /// whose cells all fail is recorded and skipped; the run fails only when
    /// every sentence did.
    pub fn extract(
        &self,
        corpus: &Corpus,
        lists: &[RelationList],
        demos: &[Vec<Demonstration>],
    ) -> Result<ExtractionRun, PipelineError> {
        let results: Vec<_> = self.pool.install(|| {
            corpus
                .sentences
                .par_iter()
                .map(|s| {
                    associate_entities(&self.gateway, s, lists, demos, &self.extraction_template, &self.config)
                })
                .collect()
        });
        let mut run = ExtractionRun::default();
        for (sentence, result) in corpus.sentences.iter().zip(results) {
            match result {
                Ok(ex) => run.extractions.push(ex),
                Err(e) => {
                    log::error!("sentence {:?}: {e}", sentence.id);
                    run.sentence_failures.push(SentenceFailure {
                        sentence_id: sentence.id.clone(),
                        message: e.to_string(),
                    });
                }
            }
        }
        let cells: usize = lists.iter().map(RelationList::len).sum();
        if run.extractions.is_empty() && !corpus.is_empty() && cells > 0 {
            let first = &run.sentence_failures[0].message;
            return Err(PipelineError::Backend(format!("extraction failed for every sentence; first: {first}")));
        }
        Ok(run)
    }

    /// Screens (unless bypassed) and types the candidates of every sentence.
    pub fn screen(
        &self,
        corpus: &Corpus,
        profile: &CorpusProfile,
        extractions: &[SentenceExtraction],
        mode: AblationMode,
    ) -> ScreeningRun {
        let order: Vec<String> = profile.relations.iter().map(|r| r.name.clone()).collect();
        let by_id: HashMap<&str, &SentenceExtraction> =
            extractions.iter().map(|e| (e.sentence_id.as_str(), e)).collect();
        let params = ScreenParams::from(&self.config);
        let per_sentence: Vec<_> = self.pool.install(|| {
            corpus
                .sentences
                .par_iter()
                .map(|s| {
                    let Some(ex) = by_id.get(s.id.as_str()) else {
                        return (Sentence::new(s.id.clone(), s.text.clone(), Vec::new()), Vec::new(), Vec::new());
                    };
                    let (screened, scores, warnings) = if mode == AblationMode::NoEstimate {
                        (pass_through(&ex.lists), Vec::new(), Vec::new())
                    } else {
                        let out = screen(&ex.lists, s, self.similarity.as_ref(), &params);
                        (out.relations, out.scores, out.warnings)
                    };
                    let mentions = aggregate_entities(s, &screened, &order);
                    (Sentence::new(s.id.clone(), s.text.clone(), mentions), scores, warnings)
                })
                .collect()
        });
        let mut run = ScreeningRun::default();
        for (sentence, scores, warnings) in per_sentence {
            run.predictions.push(sentence);
            run.scores.extend(scores);
            run.warnings.extend(warnings);
        }
        run
    }

    /// The whole pipeline. With `out_dir`, every artifact and the manifest
    /// are written there.
    pub fn run(&self, inputs: &RunInputs<'_>, out_dir: Option<&Path>) -> Result<RunOutput, PipelineError> {
        let started = now_secs();
        if inputs.corpus.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let sampled;
        let train = match (inputs.train, inputs.k) {
            (Some(t), Some(k)) => {
                sampled = sample_few_shot(t, k, self.config.seed).map_err(PipelineError::Data)?;
                Some(&sampled)
            }
            (None, Some(_)) => return Err(PipelineError::Usage("a sample size needs a training corpus".into())),
            (t, None) => t,
        };
        if train.is_none() && self.config.n_demos > 0 {
            log::warn!("no training corpus given; extraction runs zero-shot");
        }

        let generation = self.generate(inputs.profile, inputs.mode)?;
        let lists = generation.lists;
        let demos = self.demonstrations(&lists, train);
        let extraction = self.extract(inputs.corpus, &lists, &demos)?;
        let screening = self.screen(inputs.corpus, inputs.profile, &extraction.extractions, inputs.mode);

        let gold: Vec<EntityMention> = inputs.corpus.sentences.iter().flat_map(|s| s.gold.iter().cloned()).collect();
        let predicted = screening.mentions();
        let report = EvalReport::evaluate(
            &gold,
            &predicted,
            ReportMetadata {
                config_hash: Some(self.config.config_hash()),
                mode: Some(inputs.mode),
                profile: Some(inputs.profile.profile_name.clone()),
                k: inputs.k,
                cache_state_hash: Some(self.gateway.transcript_hash()),
            },
        );

        let mut artifacts = ArtifactPaths::default();
        if inputs.mode == AblationMode::NoEstimate {
            artifacts.scores = None;
        }
        let mut cells: Vec<_> = extraction.extractions.iter().flat_map(|e| e.failures.iter().cloned()).collect();
        cells.sort_by(|a, b| (&a.sentence_id, &a.parent, &a.relation).cmp(&(&b.sentence_id, &b.parent, &b.relation)));
        let mut manifest = RunManifest {
            config: self.config.clone(),
            config_hash: self.config.config_hash(),
            profile: inputs.profile.clone(),
            corpus_sentences: inputs.corpus.len(),
            k: inputs.k,
            mode: inputs.mode,
            backend_id: self.gateway.backend_id().to_string(),
            cache_state_hash: self.gateway.transcript_hash(),
            artifacts,
            stats: RunStats {
                gateway: self.gateway.stats(),
                hallucinated_pairs: extraction.hallucinated_pairs(),
                predicted_mentions: predicted.len(),
            },
            failures: RunFailures {
                relations: generation.failures,
                cells,
                sentences: extraction.sentence_failures.clone(),
                similarity_warnings: screening.warnings.len(),
            },
            timestamps: Timestamps { started, finished: 0 },
        };

        if let Some(dir) = out_dir {
            let a = &manifest.artifacts;
            write_json(&dir.join(&a.relation_lists), &relation_lists_to_json(&lists))?;
            write_jsonl_records(&dir.join(&a.candidates), &candidate_records(&extraction.extractions))?;
            if let Some(scores) = &a.scores {
                write_jsonl_records(&dir.join(scores), &screening.scores)?;
            }
            write_predictions(&dir.join(&a.predictions), &screening.predictions)?;
            write_json(&dir.join(&a.report), &report)?;
            write_text(&dir.join(&a.report_table), &report.to_table())?;
            manifest.timestamps.finished = now_secs();
            write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        } else {
            manifest.timestamps.finished = now_secs();
        }

        Ok(RunOutput {
            relation_lists: lists,
            extraction,
            screening,
            report,
            manifest,
        })
    }
}

/// Predicted mentions in the corpus JSONL format, one line per sentence.
pub fn write_predictions(path: &Path, predictions: &[Sentence]) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    crate::corpus::write_sentences(predictions, &mut w).map_err(|e| match e {
        CorpusError::Io(source) => PipelineError::io(path, source),
        other => PipelineError::Data(other),
    })?;
    std::io::Write::flush(&mut w).map_err(|e| PipelineError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    let mut w = create(path)?;
    std::io::Write::write_all(&mut w, text.as_bytes())
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| PipelineError::io(path, e))
}

/// Runs every requested mode and sample size with a fresh gateway each time,
/// so per-run statistics and transcript hashes do not leak between runs.
/// Each run writes to `out_dir/<mode>` or `out_dir/<mode>_k<K>`.
pub fn run_ablation(
    config: &PipelineConfig,
    make_gateway: impl Fn() -> Result<Gateway, PipelineError>,
    similarity: Arc<dyn SimilarityProvider>,
    inputs: &RunInputs<'_>,
    modes: &[AblationMode],
    ks: &[Option<usize>],
    out_dir: Option<&Path>,
) -> Result<Vec<AblationRow>, PipelineError> {
    let mut rows = Vec::new();
    for &k in ks {
        for &mode in modes {
            let pipeline = Pipeline::new(config.clone(), make_gateway()?, similarity.clone())?;
            let run_inputs = RunInputs { k, mode, ..*inputs };
            let dir = out_dir.map(|d| match k {
                Some(k) => d.join(format!("{mode}_k{k}")),
                None => d.join(mode.as_str()),
            });
            let out = pipeline.run(&run_inputs, dir.as_deref())?;
            rows.push(AblationRow {
                mode,
                k,
                report: out.report,
            });
        }
    }
    Ok(rows)
}
