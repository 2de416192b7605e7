use serde::{Deserialize, Serialize};

use super::simplex::solve_covering;
use super::Column;

/// Search nodes explored before the incumbent is returned unproven.
const NODE_LIMIT: usize = 20_000_000;

/// Binary solution of the master restricted to the pooled columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedSolution {
    /// Pool indices of the purchased allocations, ascending.
    pub chosen: Vec<usize>,
    /// Tours left uncovered, each charged the rejection cost.
    pub rejected: Vec<usize>,
    pub objective: f64,
    /// False only when the node limit stopped the search early.
    pub proven_optimal: bool,
}

impl RoundedSolution {
    /// Vehicle (position in `chosen`) performing each tour. A tour covered by
    /// several chosen allocations goes to the first of them.
    pub fn assignment(&self, columns: &[Column], n_tours: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n_tours];
        for (vehicle, &idx) in self.chosen.iter().enumerate() {
            for &k in &columns[idx].members {
                owner[k].get_or_insert(vehicle);
            }
        }
        owner
    }
}

struct Search<'a> {
    columns: &'a [Column],
    /// Column indices covering each tour, cheapest first.
    covering: Vec<Vec<usize>>,
    big_r: f64,
    best: f64,
    best_chosen: Vec<usize>,
    best_rejected: Vec<usize>,
    nodes: usize,
}

impl Search<'_> {
    /// Lower bound on the cost of covering every tour still open: each open
    /// tour pays at least its cheapest share of an allowed column, or `R`.
    fn bound(&self, covered: &[bool], forbidden: &[bool]) -> f64 {
        let mut share = vec![self.big_r; covered.len()];
        for (j, col) in self.columns.iter().enumerate() {
            if forbidden[j] {
                continue;
            }
            let open = col.members.iter().filter(|&&k| !covered[k]).count();
            if open == 0 {
                continue;
            }
            let per = col.cost / open as f64;
            for &k in &col.members {
                if !covered[k] && per < share[k] {
                    share[k] = per;
                }
            }
        }
        covered
            .iter()
            .zip(&share)
            .filter(|(c, _)| !**c)
            .map(|(_, s)| s)
            .sum()
    }

    /// Covering LP over the open tours with the columns still allowed.
    fn relaxation(&self, covered: &[bool], forbidden: &[bool]) -> Option<Relaxation> {
        let mut row = vec![usize::MAX; covered.len()];
        let mut tours = Vec::new();
        for (k, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
            row[k] = tours.len();
            tours.push(k);
        }
        let mut index = Vec::new();
        let mut projected = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            if forbidden[j] {
                continue;
            }
            let rows: Vec<usize> = col
                .members
                .iter()
                .filter(|&&k| !covered[k])
                .map(|&k| row[k])
                .collect();
            if !rows.is_empty() {
                index.push(j);
                projected.push((rows, col.cost));
            }
        }
        let refs: Vec<(&[usize], f64)> = projected.iter().map(|(r, c)| (r.as_slice(), *c)).collect();
        let sol = solve_covering(tours.len(), &refs, self.big_r).ok()?;
        let mut x = vec![0.0; self.columns.len()];
        for (&j, &v) in index.iter().zip(&sol.x) {
            x[j] = v;
        }
        Some(Relaxation {
            // Slack against round-off in the simplex.
            bound: sol.objective - 1e-7 * (1.0 + sol.objective.abs()),
            x,
            rejected: tours.iter().zip(&sol.r).map(|(&k, &v)| (k, v)).collect(),
        })
    }

    fn record(&mut self, cost: f64, chosen: &[usize], rejected: &[usize]) {
        if cost < self.best {
            self.best = cost;
            self.best_chosen = chosen.to_vec();
            self.best_rejected = rejected.to_vec();
        }
    }

    fn dfs(
        &mut self,
        covered: &mut Vec<bool>,
        forbidden: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
        rejected: &mut Vec<usize>,
        cost: f64,
    ) {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return;
        }
        // Branch on the open tour with the fewest remaining options.
        let mut branch: Option<(usize, usize)> = None;
        for (k, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
            let options = self.covering[k].iter().filter(|&&j| !forbidden[j]).count();
            if branch.is_none_or(|(_, best)| options < best) {
                branch = Some((k, options));
            }
        }
        let Some((tour, _)) = branch else {
            self.record(cost, chosen, rejected);
            return;
        };
        if cost + self.bound(covered, forbidden) >= self.best - 1e-12 {
            return;
        }
        let lp = self.relaxation(covered, forbidden);
        if let Some(lp) = &lp {
            if cost + lp.bound >= self.best - 1e-12 {
                return;
            }
            let integral = |v: f64| v.min(1.0 - v).abs() <= 1e-9;
            if lp.x.iter().all(|&v| integral(v)) && lp.rejected.iter().all(|&(_, v)| integral(v)) {
                let mut c = chosen.clone();
                let mut r = rejected.clone();
                let mut total = cost;
                for (j, &v) in lp.x.iter().enumerate() {
                    if v > 0.5 {
                        c.push(j);
                        total += self.columns[j].cost;
                    }
                }
                for &(k, v) in &lp.rejected {
                    if v > 0.5 {
                        r.push(k);
                        total += self.big_r;
                    }
                }
                self.record(total, &c, &r);
                return;
            }
        }

        let mut options: Vec<usize> = self.covering[tour]
            .iter()
            .copied()
            .filter(|&j| !forbidden[j])
            .collect();
        if let Some(lp) = &lp {
            options.sort_by(|&a, &b| lp.x[b].total_cmp(&lp.x[a]));
        }
        let mut newly_forbidden = Vec::with_capacity(options.len());
        for &j in &options {
            let newly_covered: Vec<usize> = self.columns[j]
                .members
                .iter()
                .copied()
                .filter(|&k| !covered[k])
                .collect();
            for &k in &newly_covered {
                covered[k] = true;
            }
            chosen.push(j);
            self.dfs(covered, forbidden, chosen, rejected, cost + self.columns[j].cost);
            chosen.pop();
            for &k in &newly_covered {
                covered[k] = false;
            }
            // Later branches exclude the alternatives already explored.
            forbidden[j] = true;
            newly_forbidden.push(j);
        }
        covered[tour] = true;
        rejected.push(tour);
        self.dfs(covered, forbidden, chosen, rejected, cost + self.big_r);
        rejected.pop();
        covered[tour] = false;
        for j in newly_forbidden {
            forbidden[j] = false;
        }
    }
}

struct Relaxation {
    bound: f64,
    /// LP value per pool column, zero for columns outside the subproblem.
    x: Vec<f64>,
    rejected: Vec<(usize, f64)>,
}

/// Exact branch-and-bound for the binary master over the pooled columns.
pub fn round_solution(columns: &[Column], n_tours: usize, big_r: f64) -> RoundedSolution {
    let mut covering = vec![Vec::new(); n_tours];
    for (j, col) in columns.iter().enumerate() {
        for &k in &col.members {
            covering[k].push(j);
        }
    }
    for list in &mut covering {
        list.sort_by(|&a, &b| columns[a].cost.total_cmp(&columns[b].cost).then(a.cmp(&b)));
    }

    let mut search = Search {
        columns,
        covering,
        big_r,
        best: f64::INFINITY,
        best_chosen: Vec::new(),
        best_rejected: Vec::new(),
        nodes: 0,
    };
    let (chosen, rejected, cost) = greedy_cover(columns, n_tours, big_r);
    search.best = cost;
    search.best_chosen = chosen;
    search.best_rejected = rejected;

    search.dfs(
        &mut vec![false; n_tours],
        &mut vec![false; columns.len()],
        &mut Vec::new(),
        &mut Vec::new(),
        0.0,
    );

    let mut chosen = search.best_chosen;
    let mut rejected = search.best_rejected;
    chosen.sort_unstable();
    rejected.sort_unstable();
    // Recompute in a fixed order so equal solutions report equal objectives.
    let objective = chosen.iter().map(|&j| columns[j].cost).sum::<f64>()
        + big_r * rejected.len() as f64;
    RoundedSolution {
        chosen,
        rejected,
        objective,
        proven_optimal: search.nodes <= NODE_LIMIT,
    }
}

/// Cheapest-ratio greedy cover, used as the initial incumbent.
fn greedy_cover(columns: &[Column], n_tours: usize, big_r: f64) -> (Vec<usize>, Vec<usize>, f64) {
    let mut covered = vec![false; n_tours];
    let mut chosen = Vec::new();
    let mut cost = 0.0;
    loop {
        let pick = columns
            .iter()
            .enumerate()
            .filter_map(|(j, col)| {
                let open = col.members.iter().filter(|&&k| !covered[k]).count();
                (open > 0).then(|| (j, col.cost / open as f64))
            })
            .filter(|&(_, ratio)| ratio < big_r)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((j, _)) = pick else { break };
        for &k in &columns[j].members {
            covered[k] = true;
        }
        chosen.push(j);
        cost += columns[j].cost;
    }
    let rejected: Vec<usize> = (0..n_tours).filter(|&k| !covered[k]).collect();
    cost += big_r * rejected.len() as f64;
    (chosen, rejected, cost)
}
