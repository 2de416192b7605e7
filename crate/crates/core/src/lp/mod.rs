//! Restricted master problem: the column pool, the covering LP with tour
//! rejection, and integer rounding over the pool.

mod rounding;
pub mod simplex;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::IncompatibilityGraph;
use crate::instance::FleetInstance;

pub use rounding::{round_solution, RoundedSolution};

/// One physical vehicle of `model` performing every tour in `members`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    /// Sorted tour ids.
    pub members: Vec<usize>,
    pub model: usize,
    /// Purchase cost plus the operational cost of every member.
    pub cost: f64,
}

impl Column {
    /// Builds a column and fills in its cost. Members are sorted and
    /// deduplicated; feasibility is checked by [`Column::validate`].
    pub fn new(mut members: Vec<usize>, model: usize, instance: &FleetInstance) -> Self {
        members.sort_unstable();
        members.dedup();
        let cost = allocation_cost(&members, model, instance);
        Column {
            members,
            model,
            cost,
        }
    }

    pub fn covers(&self, tour: usize) -> bool {
        self.members.binary_search(&tour).is_ok()
    }

    pub fn validate(&self, instance: &FleetInstance, graph: &IncompatibilityGraph) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidColumn(msg));
        if self.model >= instance.n_models() {
            return bad(format!("unknown model {}", self.model));
        }
        if self.members.is_empty() {
            return bad("allocation covers no tour".into());
        }
        if !self.members.windows(2).all(|w| w[0] < w[1]) {
            return bad("members must be sorted and distinct".into());
        }
        if let Some(&k) = self.members.iter().find(|&&k| k >= instance.n_tours()) {
            return bad(format!("unknown tour {k}"));
        }
        if let Some(&k) = self
            .members
            .iter()
            .find(|&&k| !instance.tours[k].allows(self.model))
        {
            return bad(format!("tour {k} does not allow model {}", self.model));
        }
        if !graph.is_independent(&self.members) {
            return bad(format!("members {:?} contain conflicting tours", self.members));
        }
        let expected = allocation_cost(&self.members, self.model, instance);
        if (expected - self.cost).abs() > 1e-9 * expected.abs().max(1.0) {
            return bad(format!("cost {} differs from {expected}", self.cost));
        }
        Ok(())
    }
}

/// NaN when the model or a member is unknown to the instance.
fn allocation_cost(members: &[usize], model: usize, instance: &FleetInstance) -> f64 {
    let Some(m) = instance.models.get(model) else {
        return f64::NAN;
    };
    members.iter().fold(m.purchase_cost, |acc, k| {
        acc + m.op_cost.get(k).copied().unwrap_or(f64::NAN)
    })
}

/// Restricted set of allocations, deduplicated on `(members, model)`.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    keys: HashSet<(Vec<usize>, usize)>,
}

impl ColumnPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and appends `column`; returns `false` when an allocation with
    /// the same members and model is already pooled.
    pub fn add(
        &mut self,
        column: Column,
        instance: &FleetInstance,
        graph: &IncompatibilityGraph,
    ) -> Result<bool> {
        column.validate(instance, graph)?;
        if !self.keys.insert((column.members.clone(), column.model)) {
            return Ok(false);
        }
        self.columns.push(column);
        Ok(true)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Primal-dual optimum of the restricted master.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcpSolution {
    /// Value of each pooled column, indexed like the pool.
    pub x: Vec<f64>,
    /// Rejection value of each tour.
    pub r: Vec<f64>,
    pub objective: f64,
    /// Dual price of each tour's covering row.
    pub duals: Vec<f64>,
}

/// Rejection cost: strictly above any allocation cost plus one.
pub fn compute_big_r(instance: &FleetInstance) -> f64 {
    let max_gamma = instance
        .models
        .iter()
        .map(|m| m.purchase_cost)
        .fold(f64::NEG_INFINITY, f64::max);
    let op_bound: f64 = (0..instance.n_tours())
        .map(|k| {
            (0..instance.n_models())
                .map(|v| instance.op_cost(k, v))
                .fold(0.0, f64::max)
        })
        .sum();
    max_gamma + op_bound + 2.0
}

pub fn solve_rcp(columns: &[Column], n_tours: usize, big_r: f64) -> Result<RcpSolution> {
    if let Some(c) = columns.iter().find(|c| c.cost >= big_r) {
        return Err(Error::Parameter(format!(
            "rejection cost {big_r} does not exceed column cost {}",
            c.cost
        )));
    }
    let lp_columns: Vec<(&[usize], f64)> = columns
        .iter()
        .map(|c| (c.members.as_slice(), c.cost))
        .collect();
    let sol = simplex::solve_covering(n_tours, &lp_columns, big_r)?;
    Ok(RcpSolution {
        x: sol.x,
        r: sol.r,
        objective: sol.objective,
        duals: sol.duals,
    })
}
