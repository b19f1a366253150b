// Compares the full pipeline with its two ablations on the spurious
// fixture. Only the variant without screening lets the noise through.

use std::error::Error;
use std::path::Path;
use std::sync::Arc;

use llm_der::corpus::{Corpus, CorpusProfile};
use llm_der::eval::ablation_table;
use llm_der::gateway::{Gateway, MockBackend};
use llm_der::pipeline::{run_ablation, PipelineError, RunInputs};
use llm_der::similarity::LexicalSimilarity;
use llm_der::{AblationMode, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;
    let config = PipelineConfig::from_json_file(&data.join("config.json"))?;
    let script = data.join("mock_spurious.jsonl");
    let make_gateway = || {
        let backend = MockBackend::load(&script).map_err(|e| PipelineError::Backend(e.to_string()))?;
        Ok(Gateway::new(Arc::new(backend), None))
    };

    let inputs = RunInputs { profile: &profile, corpus: &corpus, train: None, k: None, mode: AblationMode::Full };
    let rows = run_ablation(&config, make_gateway, Arc::new(LexicalSimilarity::default()), &inputs, &AblationMode::ALL, &[None], None)?;
    println!("{}", ablation_table(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
