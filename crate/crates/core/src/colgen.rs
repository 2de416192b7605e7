//! Column generation driver: greedy seeding, per-model workers, the
//! quantum-first/classical-fallback loop and convergence metrics.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{run_ga, GaParams};
use crate::graph::{build_incompatibility_graph, IncompatibilityGraph};
use crate::instance::FleetInstance;
use crate::logq::{decode_theta, ExpectationMode, SigmaEvaluator, ThetaVector};
use crate::lp::{compute_big_r, round_solution, solve_rcp, Column, ColumnPool, RcpSolution, RoundedSolution};
use crate::mwis::{restrict_to_model, solve_mwis_exact};
use crate::qubo::{build_qubo, default_penalty, to_squbo};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Exact workers only.
    Classical,
    /// Variational workers only; stops as soon as they find nothing.
    Quantum,
    /// Variational workers first, exact workers when they fail.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkerKind {
    Quantum,
    Classical,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// QUBO penalty; when unset each worker uses [`default_penalty`] of its
    /// own weights.
    pub penalty: Option<f64>,
    pub ga: GaParams,
    pub expectation: ExpectationMode,
    /// A worker column is accepted when its weight exceeds the purchase
    /// cost by more than this.
    pub epsilon: f64,
    pub seed: u64,
    /// Defaults to ten times the tour count.
    pub max_iterations: Option<usize>,
}

impl SolverConfig {
    /// Defaults for an instance of `n_tours` tours: penalty 10 at 32 tours
    /// and 20 at 64 (adaptive otherwise), GA sized by
    /// [`GaParams::for_instance_size`], exact expectation.
    pub fn for_instance(n_tours: usize, mode: SolverMode, seed: u64) -> Self {
        SolverConfig {
            mode,
            penalty: table_penalty(n_tours),
            ga: GaParams::for_instance_size(n_tours),
            expectation: ExpectationMode::Exact,
            epsilon: 1e-7,
            seed,
            max_iterations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Parameter("epsilon must be positive".into()));
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0) {
                return Err(Error::Parameter(format!("penalty must be positive, got {p}")));
            }
        }
        if self.expectation == (ExpectationMode::Sampled { shots: 0 }) {
            return Err(Error::Parameter("shots must be at least 1".into()));
        }
        self.ga.validate()
    }
}

/// Fixed penalties for the two reference instance sizes.
pub fn table_penalty(n_tours: usize) -> Option<f64> {
    match n_tours {
        32 => Some(10.0),
        64 => Some(20.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Master objective solved at the start of the iteration.
    pub rcp_objective: f64,
    /// Worker family whose columns were added this iteration.
    pub worker_kind: WorkerKind,
    pub columns_added: usize,
    /// Best worker objective seen this iteration: the GA's best sigma for
    /// variational workers, the exact optimum for classical ones.
    pub sigma_best: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub iterations: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct ColgenOutcome {
    pub graph: IncompatibilityGraph,
    pub big_r: f64,
    pub columns: Vec<Column>,
    /// Master optimum at termination.
    pub rcp: RcpSolution,
    pub rounded: RoundedSolution,
    pub trace: ConvergenceTrace,
}

/// Result of one worker call.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerOutcome {
    pub column: Option<Column>,
    /// Worker objective reached, when the subgraph was not empty.
    pub sigma: Option<f64>,
}

impl WorkerOutcome {
    fn empty() -> Self {
        WorkerOutcome {
            column: None,
            sigma: None,
        }
    }
}

/// First-fit colouring in order of departure: each tour joins the first open
/// vehicle whose model it allows and whose tours it does not conflict with,
/// otherwise it opens a vehicle of its cheapest allowed model.
pub fn greedy_initial_columns(
    instance: &FleetInstance,
    graph: &IncompatibilityGraph,
) -> Vec<Column> {
    let mut order: Vec<usize> = (0..instance.n_tours()).collect();
    order.sort_by(|&a, &b| {
        instance.tours[a]
            .t_d
            .total_cmp(&instance.tours[b].t_d)
            .then(a.cmp(&b))
    });
    let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
    for k in order {
        let tour = &instance.tours[k];
        let slot = open.iter_mut().find(|(model, members)| {
            tour.allows(*model) && members.iter().all(|&m| !graph.is_adjacent(m, k))
        });
        match slot {
            Some((_, members)) => members.push(k),
            None => {
                let model = tour
                    .allowed_models
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let ca = instance.purchase_cost(a) + instance.op_cost(k, a);
                        let cb = instance.purchase_cost(b) + instance.op_cost(k, b);
                        ca.total_cmp(&cb).then(a.cmp(&b))
                    })
                    .expect("tours allow at least one model");
                open.push((model, vec![k]));
            }
        }
    }
    open.into_iter()
        .map(|(model, members)| Column::new(members, model, instance))
        .collect()
}

fn accept(
    members: Vec<usize>,
    value: f64,
    model: usize,
    instance: &FleetInstance,
    epsilon: f64,
) -> Option<Column> {
    (!members.is_empty() && value > instance.purchase_cost(model) + epsilon)
        .then(|| Column::new(members, model, instance))
}

/// Exact pricing for one model.
pub fn classical_worker_solve(
    graph: &IncompatibilityGraph,
    instance: &FleetInstance,
    duals: &[f64],
    model: usize,
    epsilon: f64,
) -> Result<WorkerOutcome> {
    let sub = restrict_to_model(graph, instance, duals, model)?;
    if sub.is_empty() {
        return Ok(WorkerOutcome::empty());
    }
    let sol = solve_mwis_exact(&sub)?;
    Ok(WorkerOutcome {
        column: accept(sol.members, sol.value, model, instance, epsilon),
        sigma: Some(sol.value),
    })
}

/// Variational pricing for one model: the GA minimizes `-sigma(theta)` over
/// the log-qubit ansatz of the penalized QUBO. A decode that violates a
/// conflict edge yields no column.
pub fn quantum_worker_solve(
    graph: &IncompatibilityGraph,
    instance: &FleetInstance,
    duals: &[f64],
    model: usize,
    config: &SolverConfig,
    stream: &[u64],
) -> Result<WorkerOutcome> {
    let sub = restrict_to_model(graph, instance, duals, model)?;
    if sub.is_empty() {
        return Ok(WorkerOutcome::empty());
    }
    let penalty = config
        .penalty
        .unwrap_or_else(|| default_penalty(&sub.weights));
    let squbo = to_squbo(&build_qubo::<f64>(&sub, penalty)?);
    let mut evaluator = SigmaEvaluator::new(
        &squbo,
        config.expectation,
        substream(config.seed, "shots", stream),
    )?;
    let ga = GaParams {
        seed: substream(config.seed, "ga", stream).random(),
        ..config.ga.clone()
    };
    let outcome = run_ga(
        |genes: &[f64]| Ok(-evaluator.sigma(&ThetaVector::new(genes.to_vec())?)?),
        sub.len(),
        &ga,
    )?;
    let y = decode_theta(&ThetaVector::new(outcome.best_theta)?);
    let sigma = Some(-outcome.best_value);
    if !sub.is_independent(&y) {
        return Ok(WorkerOutcome {
            column: None,
            sigma,
        });
    }
    let local: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let value = sub.weight_of(&local);
    let members = local.iter().map(|&i| sub.node_ids[i]).collect();
    Ok(WorkerOutcome {
        column: accept(members, value, model, instance, config.epsilon),
        sigma,
    })
}

struct Sweep {
    added: usize,
    sigma_best: Option<f64>,
}

fn merge_sigma(acc: Option<f64>, s: Option<f64>) -> Option<f64> {
    match (acc, s) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

/// Runs column generation to termination and rounds the final pool.
pub fn run_column_generation(instance: &FleetInstance, config: &SolverConfig) -> Result<ColgenOutcome> {
    config.validate()?;
    instance.validate()?;
    let started = Instant::now();
    let n = instance.n_tours();
    let graph = build_incompatibility_graph(instance)?;
    let big_r = compute_big_r(instance);
    let mut pool = ColumnPool::new();
    for col in greedy_initial_columns(instance, &graph) {
        pool.add(col, instance, &graph)?;
    }
    let limit = config.max_iterations.unwrap_or(10 * n);
    let mut trace = ConvergenceTrace::default();

    let rcp = loop {
        let iteration = trace.iterations.len();
        if iteration >= limit {
            return Err(Error::IterationLimit {
                limit,
                trace: Box::new(trace),
            });
        }
        let rcp = solve_rcp(pool.columns(), n, big_r)?;

        let sweep = |quantum: bool, pool: &mut ColumnPool| -> Result<Sweep> {
            let mut s = Sweep {
                added: 0,
                sigma_best: None,
            };
            for model in 0..instance.n_models() {
                let out = if quantum {
                    quantum_worker_solve(
                        &graph,
                        instance,
                        &rcp.duals,
                        model,
                        config,
                        &[iteration as u64, model as u64],
                    )?
                } else {
                    classical_worker_solve(&graph, instance, &rcp.duals, model, config.epsilon)?
                };
                s.sigma_best = merge_sigma(s.sigma_best, out.sigma);
                if let Some(col) = out.column {
                    if pool.add(col, instance, &graph)? {
                        s.added += 1;
                    }
                }
            }
            Ok(s)
        };

        let (kind, result) = match config.mode {
            SolverMode::Classical => (WorkerKind::Classical, sweep(false, &mut pool)?),
            SolverMode::Quantum => (WorkerKind::Quantum, sweep(true, &mut pool)?),
            SolverMode::Hybrid => {
                let q = sweep(true, &mut pool)?;
                if q.added > 0 {
                    (WorkerKind::Quantum, q)
                } else {
                    let c = sweep(false, &mut pool)?;
                    let sigma_best = merge_sigma(q.sigma_best, c.sigma_best);
                    (
                        WorkerKind::Classical,
                        Sweep {
                            added: c.added,
                            sigma_best,
                        },
                    )
                }
            }
        };
        trace.iterations.push(IterationRecord {
            iteration,
            rcp_objective: rcp.objective,
            worker_kind: if result.added > 0 { kind } else { WorkerKind::None },
            columns_added: result.added,
            sigma_best: result.sigma_best,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if result.added == 0 {
            break rcp;
        }
    };

    let columns = pool.columns().to_vec();
    let rounded = round_solution(&columns, n, big_r);
    Ok(ColgenOutcome {
        graph,
        big_r,
        columns,
        rcp,
        rounded,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Share of column-producing iterations served by the variational worker.
    pub quantum_success_pct: f64,
    /// `(objective - final) / final` per iteration.
    pub normalized_costs: Vec<f64>,
}

pub fn compute_metrics(trace: &ConvergenceTrace) -> Result<RunMetrics> {
    let last = trace.iterations.last().ok_or(Error::EmptyTrace)?;
    let successful = trace.iterations.iter().filter(|r| r.columns_added > 0).count();
    let quantum = trace
        .iterations
        .iter()
        .filter(|r| r.columns_added > 0 && r.worker_kind == WorkerKind::Quantum)
        .count();
    let quantum_success_pct = if successful == 0 {
        0.0
    } else {
        100.0 * quantum as f64 / successful as f64
    };
    let optimum = last.rcp_objective;
    let normalized_costs = trace
        .iterations
        .iter()
        .map(|r| (r.rcp_objective - optimum) / optimum)
        .collect();
    Ok(RunMetrics {
        quantum_success_pct,
        normalized_costs,
    })
}

/// True when no model admits a column whose exact MWIS value exceeds its
/// purchase cost by more than `epsilon`, i.e. the duals are feasible for the
/// full master.
pub fn duals_certified(
    instance: &FleetInstance,
    graph: &IncompatibilityGraph,
    duals: &[f64],
    epsilon: f64,
) -> Result<bool> {
    for model in 0..instance.n_models() {
        if classical_worker_solve(graph, instance, duals, model, epsilon)?
            .column
            .is_some()
        {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{fixtures, generate_instance};

    fn record(kind: WorkerKind, added: usize, objective: f64) -> IterationRecord {
        IterationRecord {
            iteration: 0,
            rcp_objective: objective,
            worker_kind: kind,
            columns_added: added,
            sigma_best: None,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn greedy_three_tour_example() {
        let inst = fixtures::windows(&[(0.0, 10.0), (5.0, 15.0), (20.0, 30.0)], 10.0, 1.0);
        let g = build_incompatibility_graph(&inst).unwrap();
        let cols = greedy_initial_columns(&inst, &g);
        let members: Vec<Vec<usize>> = cols.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn greedy_edgeless_is_one_vehicle() {
        let inst = fixtures::windows(&[(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)], 10.0, 1.0);
        let g = build_incompatibility_graph(&inst).unwrap();
        let cols = greedy_initial_columns(&inst, &g);
        assert_eq!(cols.len(), 1);
        assert_eq!(cols[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn greedy_columns_are_valid_and_cover() {
        for seed in 0..20 {
            let inst = generate_instance(24, 5, 3, seed).unwrap();
            let g = build_incompatibility_graph(&inst).unwrap();
            let cols = greedy_initial_columns(&inst, &g);
            let mut covered = vec![0; 24];
            for c in &cols {
                c.validate(&inst, &g).unwrap();
                for &k in &c.members {
                    covered[k] += 1;
                }
            }
            assert!(covered.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn classical_worker_acceptance() {
        let inst = fixtures::windows(&[(0.0, 10.0), (5.0, 15.0)], 10.0, 1.0);
        let g = build_incompatibility_graph(&inst).unwrap();
        let none = classical_worker_solve(&g, &inst, &[11.0, 11.0], 0, 1e-7).unwrap();
        assert_eq!(none.column, None);
        assert_eq!(none.sigma, Some(10.0));
        let some = classical_worker_solve(&g, &inst, &[13.0, 13.0], 0, 1e-7).unwrap();
        let col = some.column.unwrap();
        assert_eq!(col.members.len(), 1);
        assert_eq!(col.cost, 11.0);
    }

    #[test]
    fn quantum_worker_respects_acceptance() {
        let inst = fixtures::windows(&[(0.0, 10.0), (5.0, 15.0)], 10.0, 1.0);
        let g = build_incompatibility_graph(&inst).unwrap();
        let mut config = SolverConfig::for_instance(2, SolverMode::Hybrid, 1);
        config.penalty = Some(10.0);
        let out = quantum_worker_solve(&g, &inst, &[11.0, 11.0], 0, &config, &[0, 0]).unwrap();
        assert_eq!(out.column, None);
        assert_eq!(out.sigma, Some(10.0));

        // Weights (7, 7): both tours together score 4 under P = 10, so the
        // singletons are the unique optima.
        let cheap = fixtures::windows(&[(0.0, 10.0), (5.0, 15.0)], 5.0, 1.0);
        let mut found = 0;
        for seed in 0..20 {
            config.seed = seed;
            let out = quantum_worker_solve(&g, &cheap, &[8.0, 8.0], 0, &config, &[0, 0]).unwrap();
            if let Some(col) = out.column {
                assert_eq!(col.members.len(), 1);
                assert_eq!(col.cost, 6.0);
                found += 1;
            }
        }
        assert!(found >= 19, "found {found}/20");
    }

    #[test]
    fn classical_run_on_two_tours() {
        let inst = fixtures::windows(&[(0.0, 10.0), (5.0, 15.0)], 10.0, 1.0);
        let out = run_column_generation(&inst, &SolverConfig::for_instance(2, SolverMode::Classical, 0))
            .unwrap();
        assert_eq!(out.rcp.objective, 22.0);
        assert_eq!(out.trace.iterations.len(), 1);
        assert_eq!(out.trace.iterations[0].columns_added, 0);
        assert_eq!(out.rounded.objective, 22.0);
    }

    #[test]
    fn metrics() {
        let trace = ConvergenceTrace {
            iterations: vec![
                record(WorkerKind::Quantum, 2, 40.0),
                record(WorkerKind::Quantum, 1, 30.0),
                record(WorkerKind::Classical, 1, 25.0),
                record(WorkerKind::None, 0, 20.0),
            ],
        };
        let m = compute_metrics(&trace).unwrap();
        assert!((m.quantum_success_pct - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.normalized_costs, vec![1.0, 0.5, 0.25, 0.0]);
        assert!(matches!(
            compute_metrics(&ConvergenceTrace::default()),
            Err(Error::EmptyTrace)
        ));
        let classical = ConvergenceTrace {
            iterations: vec![record(WorkerKind::Classical, 1, 3.0), record(WorkerKind::None, 0, 2.0)],
        };
        assert_eq!(compute_metrics(&classical).unwrap().quantum_success_pct, 0.0);
    }

    #[test]
    fn iteration_cap_aborts_with_trace() {
        let inst = generate_instance(16, 3, 2, 4).unwrap();
        let mut config = SolverConfig::for_instance(16, SolverMode::Classical, 0);
        config.max_iterations = Some(1);
        match run_column_generation(&inst, &config) {
            Err(Error::IterationLimit { limit, trace }) => {
                assert_eq!(limit, 1);
                assert_eq!(trace.iterations.len(), 1);
            }
            Ok(out) => assert_eq!(out.trace.iterations.len(), 1),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::for_instance(32, SolverMode::Hybrid, 0);
        assert_eq!(c.penalty, Some(10.0));
        assert_eq!(SolverConfig::for_instance(64, SolverMode::Hybrid, 0).penalty, Some(20.0));
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
    }
}
