//! Command-line front end. Configuration resolves as defaults, then the
//! `--config` file, then individual flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{PipelineConfig, SimilarityConfig};
use crate::corpus::{corpus_stats, sample_few_shot, write_conll, write_jsonl, write_yedda, ConllOptions};
use crate::corpus::{Corpus, CorpusFormat, CorpusProfile, TokenUnit};
use crate::eval::{ablation_table, EvalReport, ReportMetadata};
use crate::gateway::{CacheSummary, CompletionBackend, DiskCache, Gateway, HttpBackend, HttpTransport, MockBackend, RetryPolicy};
use crate::pipeline::{
    candidate_records, extractions_from_records, read_jsonl_records, run_ablation, write_json, write_jsonl_records,
    write_predictions, Pipeline, PipelineError, RunInputs,
};
use crate::relations::{relation_lists_from_json, relation_lists_to_json};
use crate::similarity::{provider_from_config, SimilarityProvider};
use crate::AblationMode;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "LLM_DER_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "llm-der", version, about = "Relation-driven named entity recognition with LLMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand each predefined relation into a list of relation phrases.
    GenRelations {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "full")]
        mode: ModeArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Extract candidate pairs for every sentence and relation phrase.
    Extract {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Relation list file written by gen-relations.
        #[arg(long)]
        relations: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        /// Candidate dump (JSONL).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Screen a candidate dump and write typed predictions.
    Screen {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        candidates: PathBuf,
        /// Predictions (corpus JSONL).
        #[arg(long)]
        out: PathBuf,
        /// Per-slot score dump (JSONL).
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        mode: ModeArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every stage and write a self-contained run directory.
    Pipeline {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value = "full")]
        mode: ModeArg,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score predictions against gold by exact match.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Needed for CoNLL and YEDDA inputs.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several modes and sample sizes and print an F1 table.
    Ablate {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        train: Option<PathBuf>,
        /// Sample sizes; repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values = ["full", "no_relation_list", "no_estimate"])]
        modes: Vec<ModeArg>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Draw a seeded few-shot sample.
    Sample {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Output format; defaults to the extension of `--out`.
        #[arg(long)]
        out_format: Option<FormatArg>,
    },
    /// Per-type counts and type-token ratio.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "char")]
        unit: UnitArg,
        #[arg(long)]
        json: bool,
    },
    /// Inspect or clear the response cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
        #[arg(long, env = CACHE_DIR_ENV, global = true)]
        cache_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    Inspect,
    Clear,
}

/// Spelled as in run manifests; the dashed forms are accepted too.
#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Full,
    #[value(alias = "no-relation-list")]
    NoRelationList,
    #[value(alias = "no-estimate")]
    NoEstimate,
}

impl From<ModeArg> for AblationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => AblationMode::Full,
            ModeArg::NoRelationList => AblationMode::NoRelationList,
            ModeArg::NoEstimate => AblationMode::NoEstimate,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Conll,
    Yedda,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Conll => CorpusFormat::Conll,
            FormatArg::Yedda => CorpusFormat::Yedda,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Char,
    Word,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimilarityArg {
    Lexical,
    Embedding,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Corpus format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Annotated sentences to draw demonstrations from.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Sample this many training sentences first.
    #[arg(long)]
    pub k: Option<usize>,
}

/// Backend and configuration flags shared by the commands that call
/// a model.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replay a scripted mock instead of calling a remote backend.
    #[arg(long)]
    pub mock: Option<PathBuf>,
    #[arg(long, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

#[derive(Debug, Args, Default)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_weight: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
    #[arg(long)]
    pub n_diverse: Option<usize>,
    #[arg(long)]
    pub n_demos: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_concurrency: Option<usize>,
    #[arg(long)]
    pub weighted_edges: Option<bool>,
    #[arg(long)]
    pub model_id: Option<String>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub relation_temperature: Option<f64>,
    #[arg(long)]
    pub max_output_chars: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long)]
    pub initial_backoff_ms: Option<u64>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    #[arg(long)]
    pub similarity: Option<SimilarityArg>,
    #[arg(long)]
    pub lexical_order: Option<usize>,
    #[arg(long)]
    pub embedding_url: Option<String>,
    #[arg(long)]
    pub embedding_model: Option<String>,
    #[arg(long)]
    pub embedding_dimension: Option<usize>,
    #[arg(long)]
    pub embedding_fallback_lexical: Option<bool>,
    #[arg(long)]
    pub system_prompt: Option<String>,
    #[arg(long)]
    pub relation_template: Option<String>,
    #[arg(long)]
    pub extraction_template: Option<String>,
}

impl ConfigOverrides {
    pub fn apply(&self, c: &mut PipelineConfig) -> Result<(), PipelineError> {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$field { $target = v.clone(); })*
            };
        }
        set! {
            beta => c.beta,
            lambda_weight => c.lambda_weight,
            max_iters => c.max_iters,
            epsilon => c.epsilon,
            score_threshold => c.score_threshold,
            n_diverse => c.n_diverse,
            n_demos => c.n_demos,
            seed => c.seed,
            max_concurrency => c.max_concurrency,
            weighted_edges => c.weighted_edges,
            model_id => c.model.model_id,
            base_url => c.model.base_url,
            temperature => c.model.temperature,
            relation_temperature => c.model.relation_temperature,
            max_output_chars => c.model.max_output_chars,
            max_retries => c.model.max_retries,
            initial_backoff_ms => c.model.initial_backoff_ms,
            timeout_secs => c.model.timeout_secs,
            system_prompt => c.system_prompt,
        }
        if let Some(t) = &self.relation_template {
            c.relation_template = Some(t.clone());
        }
        if let Some(t) = &self.extraction_template {
            c.extraction_template = Some(t.clone());
        }
        match self.similarity {
            Some(SimilarityArg::Lexical) if !matches!(c.similarity, SimilarityConfig::Lexical { .. }) => {
                c.similarity = SimilarityConfig::default();
            }
            Some(SimilarityArg::Embedding) if !matches!(c.similarity, SimilarityConfig::Embedding { .. }) => {
                let missing = || PipelineError::Usage("--similarity embedding needs --embedding-url and --embedding-dimension".into());
                c.similarity = SimilarityConfig::Embedding {
                    base_url: self.embedding_url.clone().ok_or_else(missing)?,
                    model_id: self.embedding_model.clone().unwrap_or_default(),
                    dimension: self.embedding_dimension.ok_or_else(missing)?,
                    fallback_lexical: self.embedding_fallback_lexical.unwrap_or(false),
                };
            }
            _ => {}
        }
        match &mut c.similarity {
            SimilarityConfig::Lexical { order } => {
                if let Some(o) = self.lexical_order {
                    *order = o;
                }
            }
            SimilarityConfig::Embedding {
                base_url,
                model_id,
                dimension,
                fallback_lexical,
            } => {
                if let Some(v) = &self.embedding_url {
                    *base_url = v.clone();
                }
                if let Some(v) = &self.embedding_model {
                    *model_id = v.clone();
                }
                if let Some(v) = self.embedding_dimension {
                    *dimension = v;
                }
                if let Some(v) = self.embedding_fallback_lexical {
                    *fallback_lexical = v;
                }
            }
        }
        Ok(())
    }
}

impl RunArgs {
    pub fn resolve_config(&self) -> Result<PipelineConfig, PipelineError> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_json_file(path)?,
            None => PipelineConfig::default(),
        };
        self.overrides.apply(&mut config)?;
        config.validate()?;
        Ok(config)
    }

    fn cache_dir(&self) -> Option<&Path> {
        if self.no_cache {
            None
        } else {
            self.cache_dir.as_deref()
        }
    }

    fn backend(&self, config: &PipelineConfig) -> Result<Arc<dyn CompletionBackend>, PipelineError> {
        if let Some(path) = &self.mock {
            return Ok(Arc::new(MockBackend::load(path)?));
        }
        let transport = HttpTransport::new(
            &config.model.base_url,
            HttpTransport::api_key_from_env(),
            RetryPolicy {
                max_retries: config.model.max_retries,
                initial_backoff: Duration::from_millis(config.model.initial_backoff_ms),
            },
            Duration::from_secs(config.model.timeout_secs),
        )?;
        Ok(Arc::new(HttpBackend::new(transport)))
    }

    fn gateway_factory(
        &self,
        config: &PipelineConfig,
    ) -> Result<impl Fn() -> Result<Gateway, PipelineError>, PipelineError> {
        let backend = self.backend(config)?;
        let dir = self.cache_dir().map(Path::to_path_buf);
        Ok(move || {
            let cache = match &dir {
                Some(d) => Some(DiskCache::open_completions(d).map_err(|e| PipelineError::io(d, e))?),
                None => None,
            };
            Ok(Gateway::new(backend.clone(), cache))
        })
    }

    fn similarity(&self, config: &PipelineConfig) -> Result<Arc<dyn SimilarityProvider>, PipelineError> {
        Ok(Arc::from(provider_from_config(config, self.cache_dir())?))
    }

    pub fn pipeline(&self) -> Result<Pipeline, PipelineError> {
        let config = self.resolve_config()?;
        let gateway = self.gateway_factory(&config)?()?;
        let similarity = self.similarity(&config)?;
        Pipeline::new(config, gateway, similarity)
    }
}

fn load_profile(path: &Path) -> Result<CorpusProfile, PipelineError> {
    CorpusProfile::load(path).map_err(|e| PipelineError::input(path, e))
}

fn load_corpus(args: &CorpusArgs, profile: Option<&CorpusProfile>) -> Result<Corpus, PipelineError> {
    load_path(&args.corpus, args.format, profile)
}

fn load_path(path: &Path, format: Option<FormatArg>, profile: Option<&CorpusProfile>) -> Result<Corpus, PipelineError> {
    Corpus::load(path, format.map(Into::into), profile).map_err(|e| PipelineError::input(path, e))
}

fn load_train(args: &TrainArgs, profile: &CorpusProfile) -> Result<Option<Corpus>, PipelineError> {
    args.train.as_deref().map(|p| load_path(p, None, Some(profile))).transpose()
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), PipelineError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match cli.command {
        Command::GenRelations { profile, out, mode, run } => {
            let profile = load_profile(&profile)?;
            let pipeline = run.pipeline()?;
            let outcome = pipeline.generate(&profile, mode.into())?;
            write_json(&out, &relation_lists_to_json(&outcome.lists))?;
            for list in &outcome.lists {
                say(format!("{}\t{}", list.parent.name, list.len()));
            }
            for f in &outcome.failures {
                say(format!("{}\tfailed: {}", f.relation, f.message));
            }
        }
        Command::Extract {
            profile,
            corpus,
            relations,
            train,
            out,
            run,
        } => {
            let profile = load_profile(&profile)?;
            let corpus = load_corpus(&corpus, Some(&profile))?;
            if corpus.is_empty() {
                return Err(PipelineError::EmptyCorpus);
            }
            let raw = std::fs::read_to_string(&relations).map_err(|e| PipelineError::io(&relations, e))?;
            let value = serde_json::from_str(&raw)
                .map_err(|e| PipelineError::input(&relations, crate::corpus::CorpusError::Json { line: e.line(), source: e }))?;
            let lists = relation_lists_from_json(&value, &profile)?;
            let pipeline = run.pipeline()?;
            let train = load_train(&train, &profile)?
                .map(|t| match train.k {
                    Some(k) => sample_few_shot(&t, k, pipeline.config().seed).map_err(PipelineError::Data),
                    None => Ok(t),
                })
                .transpose()?;
            let demos = pipeline.demonstrations(&lists, train.as_ref());
            let extraction = pipeline.extract(&corpus, &lists, &demos)?;
            write_jsonl_records(&out, &candidate_records(&extraction.extractions))?;
            let stats = pipeline.gateway().stats();
            say(format!(
                "sentences {}  failed {}  hallucinated pairs {}  cache hits {}  misses {}",
                extraction.extractions.len(),
                extraction.sentence_failures.len(),
                extraction.hallucinated_pairs(),
                stats.cache_hits,
                stats.cache_misses
            ));
        }
        Command::Screen {
            profile,
            corpus,
            candidates,
            out,
            scores,
            mode,
            run,
        } => {
            let profile = load_profile(&profile)?;
            let corpus = load_corpus(&corpus, Some(&profile))?;
            let records = read_jsonl_records(&candidates)?;
            let extractions = extractions_from_records(&records, &profile)?;
            let pipeline = run.pipeline()?;
            let screened = pipeline.screen(&corpus, &profile, &extractions, mode.into());
            write_predictions(&out, &screened.predictions)?;
            if let Some(path) = scores {
                write_jsonl_records(&path, &screened.scores)?;
            }
            let report = EvalReport::evaluate(
                &corpus.sentences.iter().flat_map(|s| s.gold.iter().cloned()).collect::<Vec<_>>(),
                &screened.mentions(),
                ReportMetadata {
                    config_hash: Some(pipeline.config().config_hash()),
                    mode: Some(mode.into()),
                    profile: Some(profile.profile_name.clone()),
                    ..Default::default()
                },
            );
            say(report.to_table());
        }
        Command::Pipeline {
            profile,
            corpus,
            train,
            mode,
            out_dir,
            run,
        } => {
            let profile = load_profile(&profile)?;
            let corpus = load_corpus(&corpus, Some(&profile))?;
            let train_corpus = load_train(&train, &profile)?;
            let pipeline = run.pipeline()?;
            let output = pipeline.run(
                &RunInputs {
                    profile: &profile,
                    corpus: &corpus,
                    train: train_corpus.as_ref(),
                    k: train.k,
                    mode: mode.into(),
                },
                Some(&out_dir),
            )?;
            say(output.report.to_table());
            let s = output.manifest.stats;
            say(format!(
                "cache hits {}  misses {}  backend calls {}  hallucinated pairs {}",
                s.gateway.cache_hits, s.gateway.cache_misses, s.gateway.backend_calls, s.hallucinated_pairs
            ));
        }
        Command::Eval {
            gold,
            pred,
            profile,
            format,
            out,
        } => {
            let profile = profile.as_deref().map(load_profile).transpose()?;
            let gold_corpus = load_path(&gold, format, profile.as_ref())?;
            let pred_corpus = load_path(&pred, format, profile.as_ref())?;
            let mentions = |c: &Corpus| c.sentences.iter().flat_map(|s| s.gold.iter().cloned()).collect::<Vec<_>>();
            let report = EvalReport::evaluate(
                &mentions(&gold_corpus),
                &mentions(&pred_corpus),
                ReportMetadata {
                    profile: profile.map(|p| p.profile_name),
                    ..Default::default()
                },
            );
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            say(report.to_table());
        }
        Command::Ablate {
            profile,
            corpus,
            train,
            k,
            modes,
            out_dir,
            run,
        } => {
            let profile = load_profile(&profile)?;
            let corpus = load_corpus(&corpus, Some(&profile))?;
            let train_corpus = train.as_deref().map(|p| load_path(p, None, Some(&profile))).transpose()?;
            let config = run.resolve_config()?;
            let ks: Vec<Option<usize>> = if k.is_empty() { vec![None] } else { k.into_iter().map(Some).collect() };
            let modes: Vec<AblationMode> = modes.into_iter().map(Into::into).collect();
            let rows = run_ablation(
                &config,
                run.gateway_factory(&config)?,
                run.similarity(&config)?,
                &RunInputs {
                    profile: &profile,
                    corpus: &corpus,
                    train: train_corpus.as_ref(),
                    k: None,
                    mode: AblationMode::Full,
                },
                &modes,
                &ks,
                Some(&out_dir),
            )?;
            write_json(&out_dir.join("ablation.json"), &rows)?;
            let table = ablation_table(&rows);
            crate::pipeline::write_text(&out_dir.join("ablation.txt"), &table)?;
            say(table);
        }
        Command::Sample {
            corpus,
            profile,
            k,
            seed,
            out,
            out_format,
        } => {
            let profile = profile.as_deref().map(load_profile).transpose()?;
            let corpus = load_corpus(&corpus, profile.as_ref())?;
            let sample = sample_few_shot(&corpus, k, seed).map_err(PipelineError::Data)?;
            let format = out_format
                .map(Into::into)
                .or_else(|| CorpusFormat::from_path(&out))
                .unwrap_or(CorpusFormat::Jsonl);
            let mut w = crate::pipeline::create(&out)?;
            let written = match format {
                CorpusFormat::Jsonl => write_jsonl(&sample, &mut w),
                CorpusFormat::Conll => write_conll(&sample, &mut w, &ConllOptions::default()),
                CorpusFormat::Yedda => write_yedda(&sample, &mut w),
            };
            written.map_err(|e| PipelineError::input(&out, e))?;
            w.flush().map_err(|e| PipelineError::io(&out, e))?;
            say(format!("wrote {} of {} sentences to {}", sample.len(), corpus.len(), out.display()));
        }
        Command::Stats {
            corpus,
            profile,
            unit,
            json,
        } => {
            let profile = profile.as_deref().map(load_profile).transpose()?;
            let corpus = load_corpus(&corpus, profile.as_ref())?;
            let unit = match unit {
                UnitArg::Char => TokenUnit::Char,
                UnitArg::Word => TokenUnit::Word,
            };
            let stats = corpus_stats(&corpus, unit);
            if json {
                say(serde_json::to_string_pretty(&stats).expect("stats serialize"));
            } else {
                say(format!("sentences\t{}", stats.sentence_count));
                say(format!("mentions\t{}", stats.mention_count));
                for (t, n) in &stats.per_type_counts {
                    say(format!("{t}\t{n}"));
                }
                say(format!("tokens\t{}", stats.token_count));
                say(format!("distinct tokens\t{}", stats.distinct_token_count));
                if stats.ttr_defined {
                    say(format!("ttr\t{:.4}", stats.ttr));
                } else {
                    say("ttr\tundefined (no tokens)".to_string());
                }
            }
        }
        Command::Cache { action, cache_dir } => {
            let dir = cache_dir.ok_or_else(|| {
                PipelineError::Usage(format!("no cache directory; pass --cache-dir or set {CACHE_DIR_ENV}"))
            })?;
            match action {
                CacheAction::Inspect => {
                    let summary = CacheSummary::inspect(&dir).map_err(|e| PipelineError::io(&dir, e))?;
                    say(serde_json::to_string_pretty(&summary).expect("summary serializes"));
                }
                CacheAction::Clear => {
                    let removed = CacheSummary::clear(&dir).map_err(|e| PipelineError::io(&dir, e))?;
                    say(format!("removed {removed} cache file(s) from {}", dir.display()));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"beta": 0.5, "seed": 7}"#).unwrap();
        let cli = Cli::try_parse_from([
            "llm-der",
            "gen-relations",
            "--profile",
            "p.json",
            "--out",
            "o.json",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
        ])
        .unwrap();
        let Command::GenRelations { run, .. } = cli.command else { panic!() };
        let c = run.resolve_config().unwrap();
        assert_eq!((c.beta, c.seed, c.n_demos), (0.5, 9, 3));
    }

    #[test]
    fn invalid_override_is_a_config_error() {
        let args = RunArgs {
            overrides: ConfigOverrides {
                beta: Some(1.5),
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(args.resolve_config().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["llm-der", "pipeline"]), 2);
        assert_eq!(run(["llm-der", "no-such-command"]), 2);
    }

    #[test]
    fn missing_profile_exits_two() {
        assert_eq!(
            run(["llm-der", "gen-relations", "--profile", "/nonexistent/profile.json", "--out", "/tmp/x.json"]),
            2
        );
    }
}
