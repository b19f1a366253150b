// Converts the planted corpus between JSONL, BIO and YEDDA markup.

use std::error::Error;
use std::path::Path;

use llm_der::corpus::{import_yedda, read_conll, write_conll, write_yedda, ConllOptions, Corpus, CorpusProfile, TagScheme};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/planted");
    let profile = CorpusProfile::load(&data.join("profile.json"))?;
    let corpus = Corpus::load(&data.join("corpus.jsonl"), None, Some(&profile))?;

    for scheme in [TagScheme::Bio, TagScheme::Bmes] {
        let opts = ConllOptions { scheme, ..ConllOptions::default() };
        let mut buf = Vec::new();
        write_conll(&corpus, &mut buf, &opts)?;
        let back = read_conll(&buf[..], &profile.profile_name, &profile.schema, &opts)?;
        println!("{scheme:?}: {} lines, {} mentions after reading back", buf.split(|b| *b == b'\n').count(), back.mention_count());
        assert_eq!(back.mention_count(), corpus.mention_count());
    }

    let mut marked = Vec::new();
    write_yedda(&corpus, &mut marked)?;
    let first = String::from_utf8_lossy(&marked);
    println!("YEDDA: {}", first.lines().next().unwrap_or(""));
    let back = import_yedda(&marked[..], &profile.profile_name, &profile.schema)?;
    assert_eq!(back.mention_count(), corpus.mention_count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
