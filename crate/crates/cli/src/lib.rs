//! Report types and file plumbing behind the `fleetcg` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fleetcg::colgen::{compute_metrics, ConvergenceTrace, SolverConfig, SolverMode, WorkerKind};
use fleetcg::qubo::qubit_count;
use fleetcg::{ColgenOutcome, ExpectationMode, FleetInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n_tours: usize,
    pub n_models: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: SolverMode,
    /// `None` means the per-subproblem default was used.
    pub penalty: Option<f64>,
    pub expectation: String,
    pub shots: Option<usize>,
    pub ga_population: usize,
    pub ga_iterations: usize,
    pub seed: u64,
}

impl ConfigEcho {
    pub fn from_config(config: &SolverConfig) -> Self {
        let (expectation, shots) = match config.expectation {
            ExpectationMode::Exact => ("exact".to_string(), None),
            ExpectationMode::Sampled { shots } => ("sampled".to_string(), Some(shots)),
        };
        ConfigEcho {
            mode: config.mode,
            penalty: config.penalty,
            expectation,
            shots,
            ga_population: config.ga.population_size,
            ga_iterations: config.ga.max_iterations,
            seed: config.seed,
        }
    }
}

/// One row of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub rcp_objective: f64,
    pub normalized_cost: f64,
    pub worker_kind: WorkerKind,
    pub columns_added: usize,
    pub sigma_best: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub config: ConfigEcho,
    pub qubits: usize,
    pub lp_objective: f64,
    pub rounded_objective: f64,
    pub rounded_proven_optimal: bool,
    pub rejected_tours: Vec<usize>,
    pub vehicles: usize,
    pub quantum_success_pct: f64,
    pub wall_time_s: f64,
    pub trace: Vec<TraceRow>,
}

pub fn trace_rows(trace: &ConvergenceTrace) -> Result<Vec<TraceRow>> {
    let metrics = compute_metrics(trace)?;
    Ok(trace
        .iterations
        .iter()
        .zip(metrics.normalized_costs)
        .map(|(r, normalized_cost)| TraceRow {
            iteration: r.iteration,
            rcp_objective: r.rcp_objective,
            normalized_cost,
            worker_kind: r.worker_kind,
            columns_added: r.columns_added,
            sigma_best: r.sigma_best,
            elapsed_ms: r.elapsed_ms,
        })
        .collect())
}

impl RunReport {
    pub fn build(
        instance: &FleetInstance,
        config: &SolverConfig,
        outcome: &ColgenOutcome,
        wall_time_s: f64,
    ) -> Result<Self> {
        let metrics = compute_metrics(&outcome.trace)?;
        Ok(RunReport {
            instance: InstanceSummary {
                n_tours: instance.n_tours(),
                n_models: instance.n_models(),
                edges: outcome.graph.edges().len(),
            },
            config: ConfigEcho::from_config(config),
            qubits: qubit_count(instance.n_tours()),
            lp_objective: outcome.rcp.objective,
            rounded_objective: outcome.rounded.objective,
            rounded_proven_optimal: outcome.rounded.proven_optimal,
            rejected_tours: outcome.rounded.rejected.clone(),
            vehicles: outcome.rounded.chosen.len(),
            quantum_success_pct: metrics.quantum_success_pct,
            wall_time_s,
            trace: trace_rows(&outcome.trace)?,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// One line of the aggregate table, per instance size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance_size: usize,
    pub qubits: usize,
    pub count: usize,
    pub mean_quantum_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub run: String,
    pub instance_size: usize,
    pub iteration: usize,
    pub normalized_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Set when the inputs span more than one instance size; each size then
    /// gets its own row.
    pub mixed_sizes: bool,
    pub rows: Vec<SummaryRow>,
    pub series: Vec<SeriesPoint>,
}

pub fn summarize(reports: &[(PathBuf, RunReport)]) -> Result<Summary> {
    if reports.is_empty() {
        bail!("no reports to aggregate");
    }
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut series = Vec::new();
    for (path, report) in reports {
        let size = report.instance.n_tours;
        by_size.entry(size).or_default().push(report.quantum_success_pct);
        series.extend(report.trace.iter().map(|row| SeriesPoint {
            run: path.display().to_string(),
            instance_size: size,
            iteration: row.iteration,
            normalized_cost: row.normalized_cost,
        }));
    }
    let rows = by_size
        .iter()
        .map(|(&size, pcts)| SummaryRow {
            instance_size: size,
            qubits: qubit_count(size),
            count: pcts.len(),
            mean_quantum_pct: pcts.iter().sum::<f64>() / pcts.len() as f64,
        })
        .collect();
    Ok(Summary {
        mixed_sizes: by_size.len() > 1,
        rows,
        series,
    })
}

pub fn write_series_csv(series: &[SeriesPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for p in series {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
