// A persistent completion cache in front of a scripted backend: the second
// gateway answers from disk without touching the backend.

use std::sync::Arc;

use llm_der::gateway::{CacheSummary, CompletionRequest, DiskCache, Gateway, MockBackend, MockEntry};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("llm-der-cache-example-{}", std::process::id()));
    let request = CompletionRequest {
        system_text: String::new(),
        user_text: "List three paraphrases of \"located_in\".".into(),
        temperature: 0.0,
        max_output_chars: 200,
        model_id: "mock".into(),
    };
    let backend = || MockBackend::from_entries(vec![MockEntry::pattern("located_in", "1. 位于\n2. 坐落于\n3. 设在")]);

    let cold = Gateway::new(Arc::new(backend()?), Some(DiskCache::open_completions(&dir)?));
    let first = cold.complete(&request)?;
    println!("cold: from_cache={} stats={:?}", first.from_cache, cold.stats());

    let warm = Gateway::new(Arc::new(backend()?), Some(DiskCache::open_completions(&dir)?));
    let second = warm.complete(&request)?;
    println!("warm: from_cache={} stats={:?}", second.from_cache, warm.stats());
    assert!(second.from_cache && second.text == first.text);
    assert_eq!(cold.transcript_hash(), warm.transcript_hash());

    println!("{:?}", CacheSummary::inspect(&dir)?);
    CacheSummary::clear(&dir)?;
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
