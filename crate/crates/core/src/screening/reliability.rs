//! PageRank reliability of slots.
//!
//! Every slot starts at `1/N`. Each synchronous step computes
//!
//! ```text
//! R'(s) = β · Σ_{k ∈ N(s)} R(k) / d(k) + (1 − β) / N
//! ```
//!
//! where `d(k)` counts distinct neighbours, and stops when the largest
//! per-slot change drops below ε or after `max_iters` steps. Isolated slots
//! receive only the teleport term.

use serde::{Deserialize, Serialize};

use super::SlotGraph;
use crate::model::Slot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    /// Aligned with `SlotGraph::nodes`.
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl Reliability {
    pub fn get(&self, graph: &SlotGraph, slot: &Slot) -> Option<f64> {
        graph.index_of(slot).map(|i| self.scores[i])
    }
}

pub fn reliability(graph: &SlotGraph, beta: f64, max_iters: usize, epsilon: f64) -> Reliability {
    iterate(graph, beta, max_iters, epsilon, |k| {
        let d = graph.degree(k) as f64;
        Box::new(graph.neighbors(k).map(move |(j, _)| (j, 1.0 / d)))
    })
}

/// Variant where each edge carries its co-occurrence count and a slot
/// spreads its score in proportion to those counts.
pub fn weighted_reliability(graph: &SlotGraph, beta: f64, max_iters: usize, epsilon: f64) -> Reliability {
    iterate(graph, beta, max_iters, epsilon, |k| {
        let total = f64::from(graph.weighted_degree(k));
        Box::new(graph.neighbors(k).map(move |(j, w)| (j, f64::from(w) / total)))
    })
}

type Shares<'a> = Box<dyn Iterator<Item = (usize, f64)> + 'a>;

/// `outgoing(k)` yields `(target, fraction of k's score sent to target)`.
fn iterate<'a>(
    graph: &'a SlotGraph,
    beta: f64,
    max_iters: usize,
    epsilon: f64,
    outgoing: impl Fn(usize) -> Shares<'a>,
) -> Reliability {
    let n = graph.len();
    if n == 0 {
        return Reliability {
            scores: Vec::new(),
            iterations_used: 0,
            converged: true,
        };
    }
    let teleport = (1.0 - beta) / n as f64;
    // shares[s] lists (k, fraction) pairs for the incoming sum of s, in
    // neighbour order.
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for k in 0..n {
        for (s, frac) in outgoing(k) {
            incoming[s].push((k, frac));
        }
    }
    for list in &mut incoming {
        list.sort_by_key(|&(k, _)| k);
    }

    let mut scores = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut iterations_used = 0;
    let mut converged = false;
    while iterations_used < max_iters {
        iterations_used += 1;
        let mut delta = 0.0f64;
        for s in 0..n {
            let sum: f64 = incoming[s].iter().map(|&(k, frac)| scores[k] * frac).sum();
            next[s] = beta * sum + teleport;
            delta = delta.max((next[s] - scores[s]).abs());
        }
        std::mem::swap(&mut scores, &mut next);
        if delta < epsilon {
            converged = true;
            break;
        }
    }
    Reliability {
        scores,
        iterations_used,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Role;

    fn slot(x: &str, role: Role) -> Slot {
        Slot::new(x, role).unwrap()
    }

    #[test]
    fn isolated_slot_gets_teleport_only() {
        // A graph with one node cannot come from pairs, so build a self-pair,
        // which is dropped as a loop.
        let a = slot("A", Role::Subject);
        let g = SlotGraph::from_pairs([(&a, &a)]);
        assert_eq!(g.len(), 1);
        let r = reliability(&g, 0.85, 100, 1e-6);
        assert!((r.scores[0] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn two_slots_split_evenly() {
        let (a, b) = (slot("A", Role::Subject), slot("B", Role::Object));
        let g = SlotGraph::from_pairs([(&a, &b)]);
        let r = reliability(&g, 0.85, 100, 1e-6);
        assert_eq!(r.scores, vec![0.5, 0.5]);
        assert!(r.converged);
        assert_eq!(r.iterations_used, 1);
    }

    #[test]
    fn path_of_three() {
        // Fixed point: a = β b/2 + (1−β)/3, b = 2βa + (1−β)/3
        // => a = 0.07125 / 0.2775 = 0.256757, b = 0.486486
        let (a, b, c) = (slot("A", Role::Subject), slot("B", Role::Object), slot("C", Role::Subject));
        let g = SlotGraph::from_pairs([(&a, &b), (&c, &b)]);
        let r = reliability(&g, 0.85, 100, 1e-10);
        let ra = r.get(&g, &a).unwrap();
        let rb = r.get(&g, &b).unwrap();
        let rc = r.get(&g, &c).unwrap();
        assert!((ra - 0.25676).abs() < 1e-4);
        assert!((rc - 0.25676).abs() < 1e-4);
        assert!((rb - 0.48649).abs() < 1e-4);
        assert!((ra + rb + rc - 1.0).abs() < 1e-9);
    }

    #[test]
    fn truncates_at_max_iters() {
        let (a, b, c) = (slot("A", Role::Subject), slot("B", Role::Object), slot("C", Role::Subject));
        let g = SlotGraph::from_pairs([(&a, &b), (&c, &b)]);
        let r = reliability(&g, 0.85, 2, 1e-12);
        assert_eq!(r.iterations_used, 2);
        assert!(!r.converged);
    }

    #[test]
    fn weighted_matches_unweighted_on_simple_graphs() {
        let (a, b, c) = (slot("A", Role::Subject), slot("B", Role::Object), slot("C", Role::Subject));
        let g = SlotGraph::from_pairs([(&a, &b), (&c, &b)]);
        assert_eq!(reliability(&g, 0.85, 100, 1e-9), weighted_reliability(&g, 0.85, 100, 1e-9));
    }

    #[test]
    fn weighted_favours_repeated_pairs() {
        let (a, b, c) = (slot("A", Role::Subject), slot("B", Role::Object), slot("C", Role::Subject));
        let g = SlotGraph::from_pairs([(&a, &b), (&a, &b), (&a, &b), (&c, &b)]);
        let plain = reliability(&g, 0.85, 100, 1e-9);
        let weighted = weighted_reliability(&g, 0.85, 100, 1e-9);
        assert!((plain.get(&g, &a).unwrap() - plain.get(&g, &c).unwrap()).abs() < 1e-9);
        assert!(weighted.get(&g, &a).unwrap() > weighted.get(&g, &c).unwrap());
    }

    #[test]
    fn empty_graph() {
        let g = SlotGraph::from_pairs(std::iter::empty::<(&Slot, &Slot)>());
        assert!(reliability(&g, 0.85, 100, 1e-6).scores.is_empty());
    }
}
