//! Penalized QUBO for weighted independent sets and its spin form.
//!
//! The binary objective is
//!
//! ```text
//! C(y) = sum_k w_k y_k - P sum_{(i,j) in E} y_i y_j,     y in {0,1}^n
//! ```
//!
//! Substituting `y = (1 - z) / 2` and moving each linear spin term `z_k` onto
//! the product `z_k z_{k+n}` with an auxiliary spin pinned to `+1` gives a
//! purely quadratic form over `2n` spins,
//!
//! ```text
//! C = -1/2 sum_k w_k z_k z_{k+n}
//!     + P/4 sum_{(i,j) in E} (z_i z_{i+n} + z_j z_{j+n} - z_i z_j) + K,
//! K = 1/2 sum_k w_k - P/4 |E|,
//! ```
//!
//! stored as a symmetric matrix `Q'` with `C = z^T Q' z + K`.

use crate::error::{Error, Result};
use crate::mwis::WeightedSubgraph;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem<T> {
    pub linear: Vec<T>,
    /// Penalized pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub penalty: T,
}

impl<T: Real> QuboProblem<T> {
    pub fn new(linear: Vec<T>, edges: Vec<(usize, usize)>, penalty: T) -> Result<Self> {
        if !(penalty > T::zero()) {
            return Err(Error::Parameter(format!("penalty must be positive, got {penalty}")));
        }
        let n = linear.len();
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
            return Err(Error::Parameter(format!("edge ({a}, {b}) invalid for {n} variables")));
        }
        Ok(QuboProblem {
            linear,
            edges,
            penalty,
        })
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    /// Binary objective at `y`.
    pub fn evaluate(&self, y: &[bool]) -> T {
        let gain: T = self
            .linear
            .iter()
            .zip(y)
            .filter(|(_, &bit)| bit)
            .map(|(&w, _)| w)
            .sum();
        let violations = self.edges.iter().filter(|&&(a, b)| y[a] && y[b]).count();
        gain - self.penalty * T::of(violations as f64)
    }
}

/// `Q'` padded to a power-of-two dimension, plus the constant `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinQubo<T> {
    /// Row-major `dim x dim` matrix.
    pub matrix: Vec<T>,
    pub constant: T,
    /// Number of binary variables.
    pub n: usize,
    /// Power of two, at least `2n`.
    pub dim: usize,
}

impl<T: Real> SpinQubo<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim + col]
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    /// `z^T Q' z` for a full-length spin vector.
    pub fn quadratic_form(&self, z: &[T]) -> T {
        debug_assert_eq!(z.len(), self.dim);
        self.matrix
            .chunks_exact(self.dim)
            .zip(z)
            .map(|(row, &zi)| zi * row.iter().zip(z).map(|(&q, &zj)| q * zj).sum::<T>())
            .sum()
    }

    /// Spins for a binary assignment: `z_k = 1 - 2 y_k`, every other entry +1.
    pub fn spins_for(&self, y: &[bool]) -> Vec<T> {
        let mut z = vec![T::one(); self.dim];
        for (zk, &bit) in z.iter_mut().zip(y) {
            if bit {
                *zk = -T::one();
            }
        }
        z
    }

    /// `z^T Q' z + K` for a binary assignment.
    pub fn evaluate(&self, y: &[bool]) -> T {
        self.quadratic_form(&self.spins_for(y)) + self.constant
    }
}

/// Penalty that makes every maximizer an independent set: dropping one
/// endpoint of a violated edge gains at least `P - max w > 0`.
pub fn default_penalty<T: Real>(weights: &[T]) -> T {
    let max_w = weights.iter().copied().fold(T::zero(), T::max);
    T::one() + max_w * T::of(2.0)
}

pub fn build_qubo<T: Real>(sub: &WeightedSubgraph, penalty: T) -> Result<QuboProblem<T>> {
    QuboProblem::new(
        sub.weights.iter().map(|&w| T::of(w)).collect(),
        sub.edges.clone(),
        penalty,
    )
}

/// Smallest power of two not below `dim`.
pub fn pad_dimension(dim: usize) -> usize {
    dim.max(1).next_power_of_two()
}

/// Qubits needed to encode an `n`-variable problem: `log2` of the padded
/// spin dimension.
pub fn qubit_count(n: usize) -> usize {
    pad_dimension(2 * n).trailing_zeros() as usize
}

pub fn to_squbo<T: Real>(q: &QuboProblem<T>) -> SpinQubo<T> {
    let n = q.n();
    let dim = pad_dimension(2 * n);
    let mut matrix = vec![T::zero(); dim * dim];
    let half = T::of(0.5);
    let mut add_product = |a: usize, b: usize, coef: T| {
        matrix[a * dim + b] = matrix[a * dim + b] + coef * half;
        matrix[b * dim + a] = matrix[b * dim + a] + coef * half;
    };
    for (k, &w) in q.linear.iter().enumerate() {
        add_product(k, k + n, -w * half);
    }
    let quarter = q.penalty * T::of(0.25);
    for &(i, j) in &q.edges {
        add_product(i, i + n, quarter);
        add_product(j, j + n, quarter);
        add_product(i, j, -quarter);
    }
    let sum_w: T = q.linear.iter().copied().sum();
    let constant = sum_w * half - quarter * T::of(q.edges.len() as f64);
    SpinQubo {
        matrix,
        constant,
        n,
        dim,
    }
}
