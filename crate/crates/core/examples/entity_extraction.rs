// Asks the backend for (subject, object) pairs per relation phrase and
// grounds them in the sentence. Ungrounded answers are reported, not kept.

use std::error::Error;
use std::path::Path;
use std::sync::Arc;

use llm_der::corpus::{Corpus, CorpusProfile};
use llm_der::extract::associate_entities;
use llm_der::gateway::{Gateway, MockBackend, MockEntry};
use llm_der::model::Sentence;
use llm_der::relations::RelationList;
use llm_der::template::PromptTemplate;
use llm_der::PipelineConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;
    let config = PipelineConfig::from_json_file(&data.join("config.json"))?;
    let template = PromptTemplate::extraction_default();
    let lists: Vec<RelationList> = profile.relations.iter().map(RelationList::parent_only).collect();

    let gateway = Gateway::new(Arc::new(MockBackend::load(&data.join("mock_clean.jsonl"))?), None);
    let sentence = &corpus.sentences[0];
    let ex = associate_entities(&gateway, sentence, &lists, &[], &template, &config)?;
    for list in &ex.lists {
        for cand in &list.candidates {
            for p in &cand.pairs {
                println!("{}: {} -> {} at {:?}/{:?}", cand.relation.phrase, p.subject.surface(), p.object.surface(), p.subject_span, p.object_span);
            }
        }
    }

    // A backend that names an entity absent from the text.
    let liar = MockBackend::from_entries(vec![MockEntry::pattern(".", r#"[{"subject": "宝钢", "object": "钢材"}]"#)])?;
    let gateway = Gateway::new(Arc::new(liar), None);
    let s = Sentence::new("x", "华能集团在北京生产甲醇。", vec![]);
    let ex = associate_entities(&gateway, &s, &lists, &[], &template, &config)?;
    println!("hallucinated: {:?}", ex.hallucinations.iter().map(|h| (&h.subject, &h.object)).collect::<Vec<_>>());
    assert!(ex.lists.iter().all(|l| l.candidates.iter().all(|c| c.pairs.is_empty())));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
