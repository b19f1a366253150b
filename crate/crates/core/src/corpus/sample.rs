use super::{Corpus, CorpusError};
use crate::seeded::ranked_positions;

/// Draws `k` sentences uniformly without replacement.
///
/// Sentences are ranked by `SHA-256("{seed}:sample:{id}")` and the first `k`
/// are kept, then restored to corpus order. Samples for different `k` with
/// the same seed happen to be nested under this procedure, but callers should
/// not rely on it.
pub fn sample_few_shot(corpus: &Corpus, k: usize, seed: u64) -> Result<Corpus, CorpusError> {
    if k == 0 {
        return Err(CorpusError::SampleSize {
            k,
            reason: "a few-shot training set needs at least one sentence".into(),
        });
    }
    if k > corpus.len() {
        return Err(CorpusError::SampleSize {
            k,
            reason: format!("the corpus has only {} sentences", corpus.len()),
        });
    }
    let mut chosen: Vec<usize> = ranked_positions(corpus.sentences.iter().map(|s| s.id.as_str()), seed, "sample")
        .into_iter()
        .take(k)
        .collect();
    chosen.sort_unstable();
    Ok(Corpus {
        profile_name: corpus.profile_name.clone(),
        schema: corpus.schema.clone(),
        sentences: chosen.into_iter().map(|i| corpus.sentences[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sentence;

    fn corpus(n: usize) -> Corpus {
        let sentences = (0..n).map(|i| Sentence::new(format!("s{i}"), "x", vec![])).collect();
        Corpus::new("t", vec![], sentences).unwrap()
    }

    #[test]
    fn exhaustive_sample_is_identity() {
        let c = corpus(7);
        assert_eq!(sample_few_shot(&c, 7, 3).unwrap(), c);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = corpus(1900);
        let a = sample_few_shot(&c, 250, 42).unwrap();
        let b = sample_few_shot(&c, 250, 42).unwrap();
        assert_eq!(a.len(), 250);
        assert_eq!(a, b);
        assert_ne!(a, sample_few_shot(&c, 250, 43).unwrap());
    }

    #[test]
    fn two_of_four_with_seed_42() {
        // Ranking computed independently with Python's hashlib:
        //   sorted(ids, key=lambda i: hashlib.sha256(f"42:sample:{i}".encode()).digest())
        // gives s0, s3, s2, s1, so K=2 selects {s0, s3}.
        let c = corpus(4);
        let ids: Vec<String> = sample_few_shot(&c, 2, 42).unwrap().sentences.into_iter().map(|s| s.id).collect();
        assert_eq!(ids, vec!["s0", "s3"]);
    }

    #[test]
    fn degenerate_sizes_rejected() {
        let c = corpus(3);
        assert!(matches!(sample_few_shot(&c, 0, 1), Err(CorpusError::SampleSize { k: 0, .. })));
        assert!(matches!(sample_few_shot(&c, 4, 1), Err(CorpusError::SampleSize { k: 4, .. })));
    }
}
