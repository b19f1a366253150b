use std::collections::{BTreeMap, HashMap};

use crate::extract::RelationCandidate;
use crate::model::Slot;

/// Undirected co-occurrence graph over the slots of one relation list in one
/// sentence. An edge joins the subject and object of every extracted pair;
/// repeated co-occurrences collapse into one edge whose multiplicity is kept
/// for the weighted variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotGraph {
    nodes: Vec<Slot>,
    index: HashMap<Slot, usize>,
    adjacency: Vec<BTreeMap<usize, u32>>,
}

impl SlotGraph {
    /// Nodes are sorted by `(surface, role)` so that iteration order, and
    /// with it floating-point accumulation order, is fixed.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Slot, &'a Slot)> + Clone) -> Self {
        let mut nodes: Vec<Slot> = pairs
            .clone()
            .into_iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        nodes.sort();
        nodes.dedup();
        let index: HashMap<Slot, usize> = nodes.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut adjacency = vec![BTreeMap::new(); nodes.len()];
        for (a, b) in pairs {
            let (i, j) = (index[a], index[b]);
            if i == j {
                continue;
            }
            *adjacency[i].entry(j).or_insert(0) += 1;
            *adjacency[j].entry(i).or_insert(0) += 1;
        }
        Self { nodes, index, adjacency }
    }

    pub fn nodes(&self) -> &[Slot] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, slot: &Slot) -> Option<usize> {
        self.index.get(slot).copied()
    }

    /// Number of distinct neighbours.
    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Sum of co-occurrence counts over incident edges.
    pub fn weighted_degree(&self, node: usize) -> u32 {
        self.adjacency[node].values().sum()
    }

    /// Neighbours with co-occurrence counts, in node order.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.adjacency[node].iter().map(|(&k, &w)| (k, w))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }
}

/// Builds the slot graph of one relation list from its candidates.
pub fn build_slot_graph(candidates: &[RelationCandidate]) -> SlotGraph {
    let pairs: Vec<(&Slot, &Slot)> = candidates
        .iter()
        .flat_map(|c| c.pairs.iter().map(|p| (&p.subject, &p.object)))
        .collect();
    SlotGraph::from_pairs(pairs.iter().copied())
}
