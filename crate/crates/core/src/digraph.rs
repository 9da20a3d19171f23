//! Directed graphs with eagerly computed all-pairs hop distances.

use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

/// Vertex label, dense in `0..node_count`.
pub type Vertex = u32;

/// Attempts made by [`random_strongly_connected`] before giving up.
pub const DEFAULT_GENERATION_ATTEMPTS: usize = 10_000;

/// An immutable digraph with unit edge weights.
///
/// Hop distances between every ordered pair of vertices are computed at
/// construction time. Missing paths are `None`, never a large finite value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    node_count: usize,
    /// Sorted, duplicate-free edge list.
    edges: Vec<(Vertex, Vertex)>,
    /// Sorted out-neighbours per vertex.
    succ: Vec<Vec<Vertex>>,
    /// `hops[from * n + to]`: number of edges on a shortest path from `from` to `to`.
    hops: Vec<Option<u32>>,
}

impl Digraph {
    /// Builds a graph, collapsing duplicate edges.
    ///
    /// Self-loops are rejected: waiting already keeps an agent in place.
    pub fn new(node_count: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Invalid("graph must have at least one node".into()));
        }
        for &(u, v) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(GraphError::Invalid(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{node_count}"
                )));
            }
            if u == v {
                return Err(GraphError::Invalid(format!("self-loop at vertex {u}")));
            }
        }
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();

        let mut succ = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            succ[u as usize].push(v);
        }

        let mut hops = vec![None; node_count * node_count];
        let mut queue = VecDeque::with_capacity(node_count);
        for source in 0..node_count {
            let row = &mut hops[source * node_count..(source + 1) * node_count];
            row[source] = Some(0);
            queue.push_back(source as Vertex);
            while let Some(u) = queue.pop_front() {
                let du = row[u as usize].unwrap();
                for &w in &succ[u as usize] {
                    if row[w as usize].is_none() {
                        row[w as usize] = Some(du + 1);
                        queue.push_back(w);
                    }
                }
            }
        }

        Ok(Self {
            node_count,
            edges,
            succ,
            hops,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        &self.succ[v as usize]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.succ
            .get(u as usize)
            .is_some_and(|s| s.binary_search(&v).is_ok())
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (v as usize) < self.node_count
    }

    /// Length of a shortest path from `from` to `to`.
    #[inline]
    pub fn path_len(&self, from: Vertex, to: Vertex) -> Option<u32> {
        self.hops[from as usize * self.node_count + to as usize]
    }

    /// Distance of `u` from `v`: the length of a shortest path from `v` to `u`.
    ///
    /// Note the argument order; configuration and plan distances are built on
    /// this convention.
    #[inline]
    pub fn dist(&self, u: Vertex, v: Vertex) -> Option<u32> {
        self.path_len(v, u)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.hops.iter().all(Option::is_some)
    }

    /// Maximum out-degree over all vertices.
    pub fn max_out_degree(&self) -> usize {
        self.succ.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices `u` with `dist(u, v) == radius`.
    pub fn border(&self, v: Vertex, radius: u32) -> Vec<Vertex> {
        (0..self.node_count as Vertex)
            .filter(|&u| self.dist(u, v) == Some(radius))
            .collect()
    }
}

/// Samples `edge_count` distinct ordered pairs until the result is strongly
/// connected, drawing every attempt from one seeded stream.
pub fn random_strongly_connected(
    node_count: usize,
    edge_count: usize,
    seed: u64,
) -> Result<Digraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_strongly_connected_with(node_count, edge_count, &mut rng, DEFAULT_GENERATION_ATTEMPTS)
}

/// Like [`random_strongly_connected`], but continues an existing random stream.
pub fn random_strongly_connected_with<R: Rng + ?Sized>(
    node_count: usize,
    edge_count: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<Digraph, GraphError> {
    if node_count == 0 {
        return Err(GraphError::Invalid("graph must have at least one node".into()));
    }
    let pair_count = node_count * (node_count - 1);
    // A strongly connected graph on n > 1 nodes needs at least n edges, and
    // only n(n-1) loop-free ordered pairs exist.
    let feasible = edge_count <= pair_count && (node_count == 1 || edge_count >= node_count);
    if !feasible {
        return Err(GraphError::GenerationFailed { attempts: 0 });
    }

    for _ in 0..max_attempts {
        let edges: Vec<(Vertex, Vertex)> = index::sample(rng, pair_count, edge_count)
            .into_iter()
            .map(|i| pair_from_index(i, node_count))
            .collect();
        let g = Digraph::new(node_count, &edges)?;
        if g.is_strongly_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationFailed {
        attempts: max_attempts,
    })
}

/// Maps `0..n(n-1)` onto loop-free ordered pairs.
fn pair_from_index(i: usize, n: usize) -> (Vertex, Vertex) {
    let u = i / (n - 1);
    let w = i % (n - 1);
    let v = if w < u { w } else { w + 1 };
    (u as Vertex, v as Vertex)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn cycle_distances() {
        let g = c3();
        assert_eq!(g.dist(2, 0), Some(2));
        assert_eq!(g.dist(0, 2), Some(1));
        assert_eq!(g.dist(1, 1), Some(0));
    }

    #[test]
    fn one_way_edge_leaves_unreachable_pair() {
        let g = Digraph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(g.dist(0, 1), None);
        assert_eq!(g.dist(1, 0), Some(1));
        assert!(!g.is_strongly_connected());
    }

    #[test]
    fn rejects_out_of_range_endpoint() {
        assert!(matches!(
            Digraph::new(2, &[(0, 5)]),
            Err(GraphError::Invalid(_))
        ));
    }

    #[test]
    fn rejects_self_loop() {
        assert!(Digraph::new(2, &[(1, 1)]).is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Digraph::new(2, &[(0, 1), (0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.max_out_degree(), 1);
    }

    #[test]
    fn strong_connectivity() {
        assert!(c3().is_strongly_connected());
        assert!(Digraph::new(1, &[]).unwrap().is_strongly_connected());
    }

    #[test]
    fn out_degree() {
        assert_eq!(c3().max_out_degree(), 1);
        let k3 = Digraph::new(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
        assert_eq!(k3.max_out_degree(), 2);
        assert_eq!(Digraph::new(1, &[]).unwrap().max_out_degree(), 0);
    }

    #[test]
    fn pair_indexing_covers_all_loop_free_pairs() {
        let n = 5;
        let mut pairs: Vec<_> = (0..n * (n - 1)).map(|i| pair_from_index(i, n)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!(pairs.len(), n * (n - 1));
        assert!(pairs.iter().all(|&(u, v)| u != v));
    }

    #[test]
    fn random_graph_has_requested_shape() {
        let g = random_strongly_connected(20, 80, 1).unwrap();
        assert_eq!(g.node_count(), 20);
        assert_eq!(g.edge_count(), 80);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn random_graph_is_deterministic() {
        let a = random_strongly_connected(15, 45, 99).unwrap();
        let b = random_strongly_connected(15, 45, 99).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn degenerate_generation_fails() {
        assert!(matches!(
            random_strongly_connected(1, 1, 0),
            Err(GraphError::GenerationFailed { .. })
        ));
        assert!(matches!(
            random_strongly_connected(5, 4, 0),
            Err(GraphError::GenerationFailed { .. })
        ));
    }

    #[test]
    fn random_graphs_satisfy_triangle_inequality_and_border_bound() {
        for seed in 0..100 {
            let n = 6 + (seed as usize % 10);
            let g = random_strongly_connected(n, 2 * n, seed).unwrap();
            assert!(g.is_strongly_connected());
            let n = n as Vertex;
            for u in 0..n {
                for v in 0..n {
                    let duv = g.dist(u, v).unwrap();
                    assert_eq!(duv == 0, u == v);
                    for w in 0..n {
                        assert!(duv <= g.dist(w, v).unwrap() + g.dist(u, w).unwrap());
                    }
                }
            }
            let phi = g.max_out_degree() as u64;
            for v in 0..n {
                for r in 1..=5u32 {
                    assert!(g.border(v, r).len() as u64 <= phi.pow(r));
                }
            }
        }
    }
}
