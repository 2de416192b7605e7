//! Log-qubit variational model for spin QUBOs.
//!
//! A `dim`-dimensional spin-QUBO is encoded on `log2(dim)` qubits. The ansatz
//! applies Hadamards to every qubit followed by a diagonal phase gate whose
//! entries are `e^{i pi R(theta_k)}` with `R(theta) = 0` below `pi` and `1`
//! from `pi` on. The resulting amplitudes are `+-1/sqrt(dim)`, so the state is
//! the normalized spin vector `z / sqrt(dim)` and `dim <psi|Q'|psi> + K` is
//! the binary objective of the decoded assignment. Only the first `n` phases
//! are parameterized; auxiliary and padding amplitudes are pinned to `+1`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::pauli::{pauli_decompose, PauliTermList};
use crate::qubo::SpinQubo;
use crate::rng::substream;
use crate::scalar::Real;

/// Rotation angles, one per binary variable, each in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector<T> {
    angles: Vec<T>,
}

impl<T: Real> ThetaVector<T> {
    pub fn new(angles: Vec<T>) -> Result<Self> {
        for (k, &a) in angles.iter().enumerate() {
            check_angle(a).map_err(|_| {
                Error::Parameter(format!("angle {k} = {a} outside [0, 2pi)"))
            })?;
        }
        Ok(ThetaVector { angles })
    }

    /// Uniformly random angles.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        ThetaVector {
            angles: (0..n).map(|_| random_angle(rng)).collect(),
        }
    }

    /// Angles that decode to `y`: `0` for unset bits and `pi` for set ones.
    pub fn from_bits(y: &[bool]) -> Self {
        ThetaVector {
            angles: y
                .iter()
                .map(|&b| if b { T::PI() } else { T::zero() })
                .collect(),
        }
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Uniform angle in `[0, 2 pi)`.
pub fn random_angle<T: Real>(rng: &mut impl Rng) -> T {
    let a = T::of(rng.random_range(0.0..std::f64::consts::TAU));
    // Rounding into a narrower type may land on 2 pi itself.
    if a >= T::two_pi() {
        T::zero()
    } else {
        a
    }
}

fn check_angle<T: Real>(angle: T) -> Result<()> {
    if angle >= T::zero() && angle < T::two_pi() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("angle {angle} outside [0, 2pi)")))
    }
}

/// Phase bit of one angle: set from `pi` (inclusive) on.
pub fn threshold<T: Real>(angle: T) -> Result<bool> {
    check_angle(angle)?;
    Ok(angle >= T::PI())
}

fn check_dim(n: usize, dim: usize) -> Result<()> {
    if !dim.is_power_of_two() {
        return Err(Error::Parameter(format!("dimension {dim} is not a power of two")));
    }
    if dim < 2 * n {
        return Err(Error::Parameter(format!(
            "dimension {dim} too small for {n} variables"
        )));
    }
    Ok(())
}

/// `z_k = (-1)^{R(theta_k)}` for the parameterized entries, `+1` elsewhere.
pub fn theta_to_spins<T: Real>(theta: &ThetaVector<T>, dim: usize) -> Result<Vec<T>> {
    check_dim(theta.len(), dim)?;
    let mut z = vec![T::one(); dim];
    for (zk, &a) in z.iter_mut().zip(&theta.angles) {
        if threshold(a)? {
            *zk = -T::one();
        }
    }
    Ok(z)
}

/// Unit-norm ansatz state `z / sqrt(dim)`.
pub fn build_state<T: Real>(theta: &ThetaVector<T>, dim: usize) -> Result<Vec<T>> {
    let scale = T::one() / T::of(dim as f64).sqrt();
    Ok(theta_to_spins(theta, dim)?
        .into_iter()
        .map(|z| z * scale)
        .collect())
}

/// Binary assignment encoded by the angles.
pub fn decode_theta<T: Real>(theta: &ThetaVector<T>) -> Vec<bool> {
    theta.angles.iter().map(|&a| a >= T::PI()).collect()
}

fn check_compatible<T: Real>(squbo: &SpinQubo<T>, theta: &ThetaVector<T>) -> Result<()> {
    if theta.len() != squbo.n {
        return Err(Error::Parameter(format!(
            "theta has {} angles, problem has {} variables",
            theta.len(),
            squbo.n
        )));
    }
    Ok(())
}

/// `<psi(theta)| Q' |psi(theta)>` with the normalized ansatz state.
pub fn expectation_exact<T: Real>(squbo: &SpinQubo<T>, theta: &ThetaVector<T>) -> Result<T> {
    check_compatible(squbo, theta)?;
    let state = build_state(theta, squbo.dim)?;
    Ok(squbo.quadratic_form(&state))
}

/// Shot-based estimate of `<psi(theta)| sum_i c_i J_i |psi(theta)>`.
///
/// Each non-identity term is measured `shots` times in its eigenbasis; the
/// outcome `+1` occurs with probability `(1 + <J_i>) / 2`, so the number of
/// `+1` outcomes is binomial. Identity terms contribute their coefficient.
pub fn expectation_sampled<T: Real>(
    terms: &PauliTermList<T>,
    theta: &ThetaVector<T>,
    shots: usize,
    rng: &mut impl Rng,
) -> Result<T> {
    if shots == 0 {
        return Err(Error::Parameter("shots must be at least 1".into()));
    }
    let state = build_state(theta, terms.dim())?;
    let mut total = T::zero();
    for term in &terms.terms {
        if term.string.is_identity() {
            total = total + term.coefficient;
            continue;
        }
        let exact = term.string.expectation(&state).to_f64_lossy();
        let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
        let plus = Binomial::new(shots as u64, p_plus)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .sample(rng);
        let mean = 2.0 * plus as f64 / shots as f64 - 1.0;
        total = total + term.coefficient * T::of(mean);
    }
    Ok(total)
}

/// Standard error of [`expectation_sampled`] at the given shot count.
pub fn sampled_standard_error<T: Real>(
    terms: &PauliTermList<T>,
    theta: &ThetaVector<T>,
    shots: usize,
) -> Result<T> {
    let state = build_state(theta, terms.dim())?;
    let variance: T = terms
        .terms
        .iter()
        .filter(|t| !t.string.is_identity())
        .map(|t| {
            let e = t.string.expectation(&state);
            t.coefficient * t.coefficient * (T::one() - e * e).max(T::zero())
        })
        .sum();
    Ok((variance / T::of(shots as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationMode {
    Exact,
    Sampled { shots: usize },
}

/// Evaluates the worker objective `sigma(theta) = dim * <Q'> + K`, which
/// equals the binary objective of the decoded assignment in exact mode.
/// Sampled mode caches the Pauli expansion and draws from its own stream.
pub struct SigmaEvaluator<'a, T> {
    squbo: &'a SpinQubo<T>,
    mode: ExpectationMode,
    terms: Option<PauliTermList<T>>,
    /// Nonzero entries of `Q'` as `(row, col, value)`.
    nonzeros: Vec<(usize, usize, T)>,
    rng: ChaCha8Rng,
}

impl<'a, T: Real> SigmaEvaluator<'a, T> {
    pub fn new(squbo: &'a SpinQubo<T>, mode: ExpectationMode, rng: ChaCha8Rng) -> Result<Self> {
        let terms = match mode {
            ExpectationMode::Exact => None,
            ExpectationMode::Sampled { shots } => {
                if shots == 0 {
                    return Err(Error::Parameter("shots must be at least 1".into()));
                }
                Some(pauli_decompose(&squbo.matrix, squbo.qubits())?)
            }
        };
        let dim = squbo.dim;
        let nonzeros = squbo
            .matrix
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != T::zero())
            .map(|(i, &v)| (i / dim, i % dim, v))
            .collect();
        Ok(SigmaEvaluator {
            squbo,
            mode,
            terms,
            nonzeros,
            rng,
        })
    }

    pub fn sigma(&mut self, theta: &ThetaVector<T>) -> Result<T> {
        check_compatible(self.squbo, theta)?;
        let expectation = match (self.mode, &self.terms) {
            (ExpectationMode::Sampled { shots }, Some(terms)) => {
                expectation_sampled(terms, theta, shots, &mut self.rng)?
            }
            _ => {
                let state = build_state(theta, self.squbo.dim)?;
                self.nonzeros
                    .iter()
                    .map(|&(r, c, v)| state[r] * v * state[c])
                    .sum()
            }
        };
        Ok(T::of(self.squbo.dim as f64) * expectation + self.squbo.constant)
    }
}

/// One-off evaluation of `sigma(theta)`; sampled mode draws from `seed`.
pub fn objective_sigma<T: Real>(
    squbo: &SpinQubo<T>,
    theta: &ThetaVector<T>,
    mode: ExpectationMode,
    seed: u64,
) -> Result<T> {
    SigmaEvaluator::new(squbo, mode, substream(seed, "sigma", &[]))?.sigma(theta)
}
