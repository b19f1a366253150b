use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::Corpus;

/// What counts as a token for the type-token ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenUnit {
    /// Every non-whitespace character (Chinese profiles).
    #[default]
    Char,
    /// Whitespace-separated words.
    Word,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_type_counts: BTreeMap<String, usize>,
    pub sentence_count: usize,
    pub mention_count: usize,
    pub token_unit: TokenUnit,
    pub token_count: usize,
    pub distinct_token_count: usize,
    /// `distinct_token_count / token_count`, or 0 when there are no tokens.
    pub ttr: f64,
    /// False when the corpus has no tokens and `ttr` is a placeholder.
    pub ttr_defined: bool,
}

pub fn corpus_stats(corpus: &Corpus, unit: TokenUnit) -> CorpusStats {
    let mut per_type_counts: BTreeMap<String, usize> =
        corpus.schema.iter().map(|t| (t.to_string(), 0)).collect();
    for m in corpus.sentences.iter().flat_map(|s| &s.gold) {
        *per_type_counts.entry(m.etype.to_string()).or_default() += 1;
    }
    let mut token_count = 0usize;
    let mut distinct: HashSet<&str> = HashSet::new();
    for s in &corpus.sentences {
        match unit {
            TokenUnit::Char => {
                for (i, ch) in s.text.char_indices() {
                    if !ch.is_whitespace() {
                        token_count += 1;
                        distinct.insert(&s.text[i..i + ch.len_utf8()]);
                    }
                }
            }
            TokenUnit::Word => {
                for w in s.text.split_whitespace() {
                    token_count += 1;
                    distinct.insert(w);
                }
            }
        }
    }
    let ttr_defined = token_count > 0;
    CorpusStats {
        per_type_counts,
        sentence_count: corpus.len(),
        mention_count: corpus.mention_count(),
        token_unit: unit,
        token_count,
        distinct_token_count: distinct.len(),
        ttr: if ttr_defined {
            distinct.len() as f64 / token_count as f64
        } else {
            0.0
        },
        ttr_defined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EntityMention, EntityType, Sentence};

    #[test]
    fn single_sentence_ttr() {
        let c = Corpus::new("t", vec![], vec![Sentence::new("a", "aba", vec![])]).unwrap();
        let st = corpus_stats(&c, TokenUnit::Char);
        assert_eq!((st.token_count, st.distinct_token_count), (3, 2));
        assert!((st.ttr - 2.0 / 3.0).abs() < 1e-15);
        assert!(st.ttr_defined);
    }

    #[test]
    fn empty_corpus_flags_undefined_ttr() {
        let c = Corpus::new("t", vec![], vec![]).unwrap();
        let st = corpus_stats(&c, TokenUnit::Char);
        assert_eq!(st.token_count, 0);
        assert_eq!(st.ttr, 0.0);
        assert!(!st.ttr_defined);
    }

    #[test]
    fn counts_489_products() {
        let pro = EntityType::new("PRO").unwrap();
        let sentences = (0..489)
            .map(|i| {
                let id = format!("s{i}");
                let m = EntityMention::from_span(&id, "甲醇", 0, 2, pro.clone()).unwrap();
                Sentence::new(id, "甲醇", vec![m])
            })
            .collect();
        let c = Corpus::new("coal", vec![pro, EntityType::new("ORG").unwrap()], sentences).unwrap();
        let st = corpus_stats(&c, TokenUnit::Char);
        assert_eq!(st.per_type_counts["PRO"], 489);
        assert_eq!(st.per_type_counts["ORG"], 0);
        assert_eq!(st.per_type_counts.values().sum::<usize>(), st.mention_count);
    }

    #[test]
    fn word_unit() {
        let c = Corpus::new("t", vec![], vec![Sentence::new("a", "the cat the", vec![])]).unwrap();
        let st = corpus_stats(&c, TokenUnit::Word);
        assert_eq!((st.token_count, st.distinct_token_count), (3, 2));
    }
}
