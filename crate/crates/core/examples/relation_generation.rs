// Expands each predefined relation into a list of paraphrases using a
// scripted backend.

use std::error::Error;
use std::path::Path;
use std::sync::Arc;

use llm_der::corpus::CorpusProfile;
use llm_der::gateway::{Gateway, MockBackend};
use llm_der::relations::{generate_relation_lists, relation_lists_to_json};
use llm_der::template::PromptTemplate;
use llm_der::{AblationMode, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let config = PipelineConfig::from_json_file(&data.join("config.json"))?;
    let gateway = Gateway::new(Arc::new(MockBackend::load(&data.join("mock_clean.jsonl"))?), None);
    let template = PromptTemplate::relation_default();

    let outcome = generate_relation_lists(&gateway, &profile, &config, &template, AblationMode::Full)?;
    println!("{}", serde_json::to_string_pretty(&relation_lists_to_json(&outcome.lists))?);
    assert!(outcome.failures.is_empty());

    // Without diversification each list holds only its parent relation.
    let bare = generate_relation_lists(&gateway, &profile, &config, &template, AblationMode::NoRelationList)?;
    assert!(bare.lists.iter().all(|l| l.len() == 1));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
