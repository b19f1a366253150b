// The whole pipeline on the planted corpus, writing every artifact to a
// run directory.

use std::error::Error;
use std::path::Path;
use std::sync::Arc;

use llm_der::corpus::{Corpus, CorpusProfile};
use llm_der::gateway::{Gateway, MockBackend};
use llm_der::pipeline::{Pipeline, RunInputs};
use llm_der::similarity::LexicalSimilarity;
use llm_der::{AblationMode, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;
    let config = PipelineConfig::from_json_file(&data.join("config.json"))?;
    let gateway = Gateway::new(Arc::new(MockBackend::load(&data.join("mock_spurious.jsonl"))?), None);
    let pipeline = Pipeline::new(config, gateway, Arc::new(LexicalSimilarity::default()))?;

    let out_dir = std::env::temp_dir().join(format!("llm-der-run-{}", std::process::id()));
    let inputs = RunInputs { profile: &profile, corpus: &corpus, train: None, k: None, mode: AblationMode::Full };
    let out = pipeline.run(&inputs, Some(&out_dir))?;
    println!("{}", out.report.to_table());
    println!("artifacts in {}", out_dir.display());
    for entry in std::fs::read_dir(&out_dir)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    std::fs::remove_dir_all(&out_dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
