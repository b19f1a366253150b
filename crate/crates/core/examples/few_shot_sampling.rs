// Seeded K-shot sampling and per-relation demonstration selection.

use std::error::Error;
use std::path::Path;

use llm_der::corpus::{sample_few_shot, Corpus, CorpusProfile};
use llm_der::extract::{build_demonstrations, render_demonstrations};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;

    let sample = sample_few_shot(&corpus, 5, 42)?;
    let ids: Vec<&str> = sample.sentences.iter().map(|s| s.id.as_str()).collect();
    println!("5-shot sample: {ids:?}");
    // Same seed, same sample.
    assert_eq!(sample, sample_few_shot(&corpus, 5, 42)?);

    for relation in &profile.relations {
        let demos = build_demonstrations(&sample, relation, 2, 42);
        println!("--- {} ---\n{}", relation.name, render_demonstrations(&demos));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
