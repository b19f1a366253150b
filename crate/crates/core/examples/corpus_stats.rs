// Per-type mention counts and type-token ratio of the planted corpus.

use std::error::Error;
use std::path::Path;

use llm_der::corpus::{corpus_stats, Corpus, CorpusProfile, TokenUnit};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;
    let stats = corpus_stats(&corpus, TokenUnit::Char);
    println!("{}", serde_json::to_string_pretty(&stats)?);
    assert_eq!(stats.mention_count, 60);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
