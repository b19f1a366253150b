// Scores every slot of the spurious fixture, drops low-scoring pairs and
// turns the survivors into typed mentions.

use std::error::Error;
use std::path::Path;
use std::sync::Arc;

use llm_der::corpus::{Corpus, CorpusProfile};
use llm_der::gateway::{Gateway, MockBackend};
use llm_der::pipeline::Pipeline;
use llm_der::screening::{aggregate_entities, screen, ScreenParams};
use llm_der::similarity::LexicalSimilarity;
use llm_der::{AblationMode, PipelineConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;
    let config = PipelineConfig::from_json_file(&data.join("config.json"))?;
    let gateway = Gateway::new(Arc::new(MockBackend::load(&data.join("mock_spurious.jsonl"))?), None);
    let pipeline = Pipeline::new(config.clone(), gateway, Arc::new(LexicalSimilarity::default()))?;

    let lists = pipeline.generate(&profile, AblationMode::Full)?.lists;
    let extraction = pipeline.extract(&corpus, &lists, &pipeline.demonstrations(&lists, None))?;

    let sentence = &corpus.sentences[0];
    let outcome = screen(&extraction.extractions[0].lists, sentence, &LexicalSimilarity::default(), &ScreenParams::from(&config));
    println!("{}", sentence.text);
    for r in &outcome.scores {
        println!(
            "  {:<10} {:<8} {:?} r={:.4} c={:.4} score={:.4} {}",
            r.parent, r.surface, r.role, r.reliability, r.consistency, r.combined,
            if r.kept { "kept" } else { "dropped" }
        );
    }
    let order: Vec<String> = profile.relations.iter().map(|r| r.name.clone()).collect();
    for m in aggregate_entities(sentence, &outcome.relations, &order) {
        println!("  -> {} [{}, {}) {}", m.surface, m.start, m.end, m.etype);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
