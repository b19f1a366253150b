//! Seeded, language-independent selection.
//!
//! Every item gets the sort key `SHA-256("{seed}:{scope}:{id}")` and items
//! are ranked by that key (ties broken by input position). Taking the first
//! `k` ranked items is a uniform sample without replacement that any
//! implementation with a SHA-256 routine can reproduce exactly.

use sha2::{Digest, Sha256};

pub(crate) fn sort_key(seed: u64, scope: &str, id: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(format!("{seed}:{scope}:{id}").as_bytes());
    hasher.finalize().into()
}

/// Input positions of `ids` in seeded rank order.
pub(crate) fn ranked_positions<'a>(ids: impl IntoIterator<Item = &'a str>, seed: u64, scope: &str) -> Vec<usize> {
    let mut keyed: Vec<([u8; 32], usize)> = ids
        .into_iter()
        .enumerate()
        .map(|(pos, id)| (sort_key(seed, scope, id), pos))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, pos)| pos).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_is_a_permutation() {
        let ids = ["a", "b", "c", "d", "e"];
        let mut order = ranked_positions(ids, 7, "x");
        order.sort();
        assert_eq!(order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn key_matches_plain_sha256() {
        // sha256("42:sample:s1")
        let k = sort_key(42, "sample", "s1");
        assert_eq!(hex::encode(k), hex::encode(Sha256::digest(b"42:sample:s1")));
    }
}
