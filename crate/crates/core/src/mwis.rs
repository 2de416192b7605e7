//! Exact maximum weighted independent set on model-restricted subgraphs.

use crate::error::{Error, Result};
use crate::graph::IncompatibilityGraph;
use crate::instance::FleetInstance;

/// Largest subgraph accepted by [`solve_mwis_exact`].
pub const EXACT_NODE_CAP: usize = 512;
/// Largest subgraph accepted by [`brute_force_mwis`].
pub const BRUTE_FORCE_NODE_CAP: usize = 20;

/// Conflict graph over the tours that admit one vehicle model, weighted by
/// the dual price of each tour minus its operational cost under that model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubgraph {
    /// Tour id of each local node.
    pub node_ids: Vec<usize>,
    pub weights: Vec<f64>,
    /// Induced conflict edges in local indices, `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
}

impl WeightedSubgraph {
    /// Subgraph whose local indices are also its node ids.
    pub fn new(weights: Vec<f64>, edges: Vec<(usize, usize)>) -> Self {
        let node_ids = (0..weights.len()).collect();
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        WeightedSubgraph {
            node_ids,
            weights,
            edges,
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// True when no edge joins two selected local nodes.
    pub fn is_independent(&self, selected: &[bool]) -> bool {
        self.edges.iter().all(|&(a, b)| !(selected[a] && selected[b]))
    }

    /// Weight of a set of local nodes, summed in ascending index order.
    pub fn weight_of(&self, local: &[usize]) -> f64 {
        let mut sorted = local.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&i| self.weights[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwisSolution {
    /// Selected local node indices, ascending.
    pub local: Vec<usize>,
    /// Tour ids of the selected nodes, ascending.
    pub members: Vec<usize>,
    pub value: f64,
}

impl MwisSolution {
    fn from_local(sub: &WeightedSubgraph, mut local: Vec<usize>) -> Self {
        local.sort_unstable();
        let members = local.iter().map(|&i| sub.node_ids[i]).collect();
        let value = sub.weight_of(&local);
        MwisSolution {
            local,
            members,
            value,
        }
    }
}

/// Restricts the conflict graph to the tours that allow `model`, with weights
/// `duals[k] - w[k][model]`.
pub fn restrict_to_model(
    graph: &IncompatibilityGraph,
    instance: &FleetInstance,
    duals: &[f64],
    model: usize,
) -> Result<WeightedSubgraph> {
    if model >= instance.n_models() {
        return Err(Error::Parameter(format!("unknown model {model}")));
    }
    if duals.len() != instance.n_tours() {
        return Err(Error::Parameter(format!(
            "expected {} duals, got {}",
            instance.n_tours(),
            duals.len()
        )));
    }
    let node_ids: Vec<usize> = instance
        .tours
        .iter()
        .filter(|t| t.allows(model))
        .map(|t| t.id)
        .collect();
    let mut local = vec![usize::MAX; instance.n_tours()];
    for (i, &k) in node_ids.iter().enumerate() {
        local[k] = i;
    }
    let weights = node_ids
        .iter()
        .map(|&k| duals[k] - instance.op_cost(k, model))
        .collect();
    let edges = graph
        .edges()
        .iter()
        .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
        .map(|&(a, b)| (local[a], local[b]))
        .collect();
    Ok(WeightedSubgraph {
        node_ids,
        weights,
        edges,
    })
}

#[derive(Clone, PartialEq, Eq)]
struct Bitset(Vec<u64>);

impl Bitset {
    fn empty(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn difference_with(&mut self, other: &Bitset) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn intersection_count(&self, other: &Bitset) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

struct BranchAndBound<'a> {
    weights: &'a [f64],
    adjacency: Vec<Bitset>,
    best_value: f64,
    best_set: Vec<usize>,
}

impl BranchAndBound<'_> {
    fn search(&mut self, mut candidates: Bitset, current: &mut Vec<usize>, value: f64) {
        let potential: f64 = candidates.iter().map(|i| self.weights[i]).sum();
        if value + potential <= self.best_value {
            return;
        }
        // Highest-degree candidate; isolated candidates are taken outright.
        let mut pivot: Option<(usize, u32)> = None;
        let mut isolated = Vec::new();
        for v in candidates.iter() {
            let deg = self.adjacency[v].intersection_count(&candidates);
            if deg == 0 {
                isolated.push(v);
            } else if pivot.is_none_or(|(_, d)| deg > d) {
                pivot = Some((v, deg));
            }
        }
        let mut value = value;
        let taken = isolated.len();
        for &v in &isolated {
            candidates.remove(v);
            current.push(v);
            value += self.weights[v];
        }
        match pivot {
            None => {
                if value > self.best_value {
                    self.best_value = value;
                    self.best_set = current.clone();
                }
            }
            Some((v, _)) => {
                let mut with = candidates.clone();
                with.remove(v);
                with.difference_with(&self.adjacency[v]);
                current.push(v);
                self.search(with, current, value + self.weights[v]);
                current.pop();

                candidates.remove(v);
                self.search(candidates, current, value);
            }
        }
        current.truncate(current.len() - taken);
    }
}

/// Exact MWIS by branching on the highest-degree vertex, bounded by the sum of
/// positive candidate weights. Nodes with non-positive weight are never
/// selected, so the empty set (value 0) is returned when nothing is positive.
pub fn solve_mwis_exact(sub: &WeightedSubgraph) -> Result<MwisSolution> {
    let n = sub.len();
    if n > EXACT_NODE_CAP {
        return Err(Error::Size {
            size: n,
            limit: EXACT_NODE_CAP,
        });
    }
    let mut adjacency = vec![Bitset::empty(n); n];
    for &(a, b) in &sub.edges {
        adjacency[a].insert(b);
        adjacency[b].insert(a);
    }
    let mut candidates = Bitset::empty(n);
    for (i, &w) in sub.weights.iter().enumerate() {
        if w > 0.0 {
            candidates.insert(i);
        }
    }
    let mut bb = BranchAndBound {
        weights: &sub.weights,
        adjacency,
        best_value: 0.0,
        best_set: Vec::new(),
    };
    if !candidates.is_empty() {
        bb.search(candidates, &mut Vec::new(), 0.0);
    }
    Ok(MwisSolution::from_local(sub, bb.best_set))
}

/// Exhaustive MWIS over all subsets; ties go to the smaller set.
pub fn brute_force_mwis(sub: &WeightedSubgraph) -> Result<MwisSolution> {
    let n = sub.len();
    if n > BRUTE_FORCE_NODE_CAP {
        return Err(Error::Size {
            size: n,
            limit: BRUTE_FORCE_NODE_CAP,
        });
    }
    let conflict: Vec<u32> = (0..n)
        .map(|i| {
            sub.edges
                .iter()
                .filter_map(|&(a, b)| match (a == i, b == i) {
                    (true, _) => Some(1 << b),
                    (_, true) => Some(1 << a),
                    _ => None,
                })
                .fold(0, |acc, bit| acc | bit)
        })
        .collect();
    let mut best = (0.0, 0u32);
    for mask in 1u32..(1u32 << n) {
        let independent = (0..n).all(|i| mask >> i & 1 == 0 || conflict[i] & mask == 0);
        if !independent {
            continue;
        }
        let value: f64 = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| sub.weights[i])
            .sum();
        let better = value > best.0
            || (value == best.0 && mask.count_ones() < best.1.count_ones());
        if better {
            best = (value, mask);
        }
    }
    let local = (0..n).filter(|&i| best.1 >> i & 1 == 1).collect();
    Ok(MwisSolution::from_local(sub, local))
}
