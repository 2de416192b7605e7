//! Tour incompatibility graph.

use crate::error::{Error, Result};
use crate::instance::FleetInstance;

/// Conflict graph over tour indices; an edge means the two tours cannot share
/// a vehicle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompatibilityGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl IncompatibilityGraph {
    /// Builds a graph from an edge list; duplicate pairs are merged and
    /// self-loops dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let edges = adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect();
        IncompatibilityGraph {
            n,
            edges,
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// True when no two of `nodes` are adjacent.
    pub fn is_independent(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| a != b && !self.is_adjacent(a, b)))
    }
}

/// Two tours conflict unless one of them can be completed, followed by the
/// relocation to the other's departure, before the other departs.
pub fn build_incompatibility_graph(instance: &FleetInstance) -> Result<IncompatibilityGraph> {
    let tours = &instance.tours;
    if let Some(tt) = &instance.travel_time {
        for tour in tours {
            if let Some(loc) = [tour.l_d, tour.l_a].into_iter().flatten().find(|&l| l >= tt.len()) {
                return Err(Error::InvalidInstance(format!(
                    "tour {}: location {loc} outside travel_time of size {}",
                    tour.id,
                    tt.len()
                )));
            }
        }
    }
    let mut edges = Vec::new();
    for (i, a) in tours.iter().enumerate() {
        for (j, b) in tours.iter().enumerate().skip(i + 1) {
            let a_then_b = a.t_a + instance.travel(a.l_a, b.l_d)? <= b.t_d;
            let b_then_a = b.t_a + instance.travel(b.l_a, a.l_d)? <= a.t_d;
            if !a_then_b && !b_then_a {
                edges.push((i, j));
            }
        }
    }
    Ok(IncompatibilityGraph::from_edges(tours.len(), edges))
}
