//! Pauli-string expansion of real symmetric operators.
//!
//! A string over `{I, X, Y, Z}^N` is stored as a pair of bit masks: `x_mask`
//! marks the X/Y positions and `z_mask` the Z/Y positions. The leftmost
//! letter acts on the most significant bit of a basis index. In that
//! representation `J|b> = i^{#Y} (-1)^{popcount(b & z_mask)} |b ^ x_mask>`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Terms with smaller coefficients are dropped from an expansion.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub qubits: usize,
    pub x_mask: usize,
    pub z_mask: usize,
}

impl PauliString {
    pub fn identity(qubits: usize) -> Self {
        PauliString {
            qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    pub fn parse(word: &str) -> Result<Self> {
        let qubits = word.len();
        let mut s = Self::identity(qubits);
        for (pos, ch) in word.chars().enumerate() {
            let bit = 1 << (qubits - 1 - pos);
            match ch {
                'I' => {}
                'X' => s.x_mask |= bit,
                'Z' => s.z_mask |= bit,
                'Y' => {
                    s.x_mask |= bit;
                    s.z_mask |= bit;
                }
                other => {
                    return Err(Error::Parameter(format!("invalid Pauli letter {other:?}")))
                }
            }
        }
        Ok(s)
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Real sign of `i^{#Y}`; `None` when the phase is imaginary.
    fn real_phase<T: Real>(&self) -> Option<T> {
        match self.y_count() % 4 {
            0 => Some(T::one()),
            2 => Some(-T::one()),
            _ => None,
        }
    }

    fn parity_sign<T: Real>(&self, basis: usize) -> T {
        if (basis & self.z_mask).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// `<psi| J |psi>` for a real state vector.
    pub fn expectation<T: Real>(&self, state: &[T]) -> T {
        let Some(phase) = self.real_phase::<T>() else {
            // Purely imaginary operator: zero expectation on real states.
            return T::zero();
        };
        let sum: T = state
            .iter()
            .enumerate()
            .map(|(b, &amp)| state[b ^ self.x_mask] * amp * self.parity_sign::<T>(b))
            .sum();
        phase * sum
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for pos in 0..self.qubits {
            let bit = 1 << (self.qubits - 1 - pos);
            let ch = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm<T> {
    pub coefficient: T,
    pub string: PauliString,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTermList<T> {
    pub qubits: usize,
    pub terms: Vec<PauliTerm<T>>,
}

impl<T: Real> PauliTermList<T> {
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Exact `<psi| sum_i c_i J_i |psi>`.
    pub fn expectation(&self, state: &[T]) -> T {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.string.expectation(state))
            .sum()
    }

    /// Dense row-major reconstruction `sum_i c_i J_i` (real part).
    pub fn to_matrix(&self) -> Vec<T> {
        let dim = self.dim();
        let mut out = vec![T::zero(); dim * dim];
        for term in &self.terms {
            let Some(phase) = term.string.real_phase::<T>() else {
                continue;
            };
            for col in 0..dim {
                let row = col ^ term.string.x_mask;
                out[row * dim + col] = out[row * dim + col]
                    + term.coefficient * phase * term.string.parity_sign::<T>(col);
            }
        }
        out
    }
}

/// Expands a real symmetric `2^N x 2^N` matrix (row-major) into Pauli strings
/// with coefficients `Tr(J_i O) / 2^N`, keeping terms above
/// [`PRUNE_THRESHOLD`] in magnitude.
pub fn pauli_decompose<T: Real>(matrix: &[T], qubits: usize) -> Result<PauliTermList<T>> {
    let dim = 1usize << qubits;
    if matrix.len() != dim * dim {
        return Err(Error::Parameter(format!(
            "matrix with {} entries is not {dim}x{dim}",
            matrix.len()
        )));
    }
    for r in 0..dim {
        for c in r + 1..dim {
            let (a, b) = (matrix[r * dim + c], matrix[c * dim + r]);
            if (a - b).abs() > T::feasibility_tol() * (T::one() + a.abs().max(b.abs())) {
                return Err(Error::Parameter(format!("matrix not symmetric at ({r}, {c})")));
            }
        }
    }
    let inv_dim = T::one() / T::of(dim as f64);
    let threshold = T::of(PRUNE_THRESHOLD);
    let mut terms = Vec::new();
    for x_mask in 0..dim {
        for z_mask in 0..dim {
            let string = PauliString {
                qubits,
                x_mask,
                z_mask,
            };
            // Odd Y count: imaginary coefficient, zero for symmetric input.
            let Some(phase) = string.real_phase::<T>() else {
                continue;
            };
            // Tr(J O) = sum_b J[b ^ x, b] O[b, b ^ x]
            let trace: T = (0..dim)
                .map(|b| string.parity_sign::<T>(b) * matrix[b * dim + (b ^ x_mask)])
                .sum();
            let coefficient = phase * trace * inv_dim;
            if coefficient.abs() > threshold {
                terms.push(PauliTerm {
                    coefficient,
                    string,
                });
            }
        }
    }
    Ok(PauliTermList { qubits, terms })
}

/// Like [`pauli_decompose`] for a matrix whose side is any positive length;
/// the matrix is zero-padded to the next power of two first.
pub fn pauli_decompose_padded<T: Real>(matrix: &[T], side: usize) -> Result<PauliTermList<T>> {
    if matrix.len() != side * side || side == 0 {
        return Err(Error::Parameter(format!(
            "matrix with {} entries is not {side}x{side}",
            matrix.len()
        )));
    }
    let dim = side.next_power_of_two();
    if dim == side {
        return pauli_decompose(matrix, dim.trailing_zeros() as usize);
    }
    let mut padded = vec![T::zero(); dim * dim];
    for r in 0..side {
        padded[r * dim..r * dim + side].copy_from_slice(&matrix[r * side..(r + 1) * side]);
    }
    pauli_decompose(&padded, dim.trailing_zeros() as usize)
}
