//! Precomputed message-passing structure for one document length.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::mrg::{Mrg, MrgVariant, Relation};
use crate::numerics::Tensor;

/// A graph plus one row-normalized in-adjacency matrix per relation kind.
/// Entry `(i, j)` of a relation's matrix is `1 / |N_i^r|` when node j
/// sends to node i under r, using the task-major node indexing, so
/// multiplying it onto the stacked 3n x d state matrix yields each node's
/// mean incoming message.
#[derive(Debug, Clone)]
pub struct GraphContext {
    pub mrg: Mrg,
    pub adjacency: Vec<(Relation, Tensor)>,
}

impl GraphContext {
    pub fn build(n: usize, gamma: usize, variant: MrgVariant) -> GraphContext {
        let mrg = Mrg::build(n, gamma, variant);
        let size = 3 * n;
        let mut adjacency = Vec::new();
        for relation in Relation::all(gamma, variant) {
            let mut counts = vec![0usize; size];
            for edge in &mrg.edges {
                if edge.relation == relation {
                    counts[mrg.node_index(edge.target)] += 1;
                }
            }
            let mut matrix = Tensor::zeros(size, size);
            for edge in &mrg.edges {
                if edge.relation == relation {
                    let i = mrg.node_index(edge.target);
                    let j = mrg.node_index(edge.source);
                    matrix.set(i, j, 1.0 / counts[i] as f64);
                }
            }
            adjacency.push((relation, matrix));
        }
        GraphContext { mrg, adjacency }
    }
}

/// Cache of graph contexts keyed by clause count; topology depends only on
/// `(n, gamma, variant)`, so one entry serves every document of a length.
#[derive(Debug, Clone)]
pub struct GraphCache {
    gamma: usize,
    variant: MrgVariant,
    by_length: BTreeMap<usize, Arc<GraphContext>>,
}

impl GraphCache {
    pub fn new(gamma: usize, variant: MrgVariant) -> GraphCache {
        GraphCache { gamma, variant, by_length: BTreeMap::new() }
    }

    pub fn get(&mut self, n: usize) -> Arc<GraphContext> {
        self.by_length
            .entry(n)
            .or_insert_with(|| Arc::new(GraphContext::build(n, self.gamma, self.variant)))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrg::{NodeId, Task};

    #[test]
    fn rows_sum_to_one_over_connected_nodes() {
        let ctx = GraphContext::build(4, 2, MrgVariant::Full);
        for (relation, matrix) in &ctx.adjacency {
            for i in 0..matrix.rows() {
                let sum: f64 = matrix.row(i).iter().sum();
                let node = ctx.mrg.nodes().into_iter().find(|v| ctx.mrg.node_index(*v) == i).unwrap();
                let degree = ctx.mrg.neighbors(node, *relation).len();
                if degree == 0 {
                    assert_eq!(sum, 0.0);
                } else {
                    assert!((sum - 1.0).abs() < 1e-12, "row {i} of {relation:?} sums to {sum}");
                }
            }
        }
    }

    #[test]
    fn entries_match_neighbor_counts() {
        let ctx = GraphContext::build(5, 2, MrgVariant::Full);
        let target = NodeId::new(Task::Tag, 3);
        let i = ctx.mrg.node_index(target);
        let (_, matrix) = ctx
            .adjacency
            .iter()
            .find(|(r, _)| *r == Relation::TagTag)
            .unwrap();
        // t3 hears from t1, t2, t4, t5 under the same-task relation
        let neighbors = ctx.mrg.neighbors(target, Relation::TagTag);
        assert_eq!(neighbors.len(), 4);
        for source in neighbors {
            let j = ctx.mrg.node_index(source);
            assert!((matrix.get(i, j) - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn cache_reuses_contexts() {
        let mut cache = GraphCache::new(2, MrgVariant::Full);
        let a = cache.get(3);
        let b = cache.get(3);
        assert!(Arc::ptr_eq(&a, &b));
        let c = cache.get(4);
        assert_eq!(c.mrg.n, 4);
    }
}
