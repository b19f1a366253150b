// Lexical n-gram similarity between a pair context and its sentence.

use llm_der::screening::pair_context;
use llm_der::similarity::{LexicalSimilarity, SimilarityProvider};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sentence = "华能集团在北京生产甲醇。";
    let lexical = LexicalSimilarity::default();
    for (s, phrase, o) in [("华能集团", "生产", "甲醇"), ("能", "出产", "甲醇"), ("宝钢", "生产", "钢材")] {
        let ctx = pair_context(s, phrase, o);
        println!("{ctx:<16} {:.4}", lexical.similarity(&ctx, sentence)?);
    }
    assert_eq!(lexical.similarity(sentence, sentence)?, 1.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
