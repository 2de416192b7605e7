//! Column generation for the fleet conversion problem.
//!
//! Tours with time windows are covered by vehicles of several models. The
//! master LP over vehicle allocations is solved by a revised simplex, and new
//! allocations are priced by maximum weighted independent set workers: an
//! exact branch-and-bound solver, or a simulated log-qubit variational solver
//! that encodes the worker QUBO on `1 + ceil(log2 n)` qubits and tunes its
//! phase angles with a genetic algorithm.
//!
//! The numeric kernels (QUBO encoding, Pauli expansion, the ansatz, the GA
//! and the covering LP) are generic over [`Real`]; the aliases below fix them
//! to `f64`, which is what the driver uses.

pub mod colgen;
pub mod error;
pub mod ga;
pub mod graph;
pub mod instance;
pub mod logq;
pub mod lp;
pub mod mwis;
pub mod pauli;
pub mod qubo;
pub mod rng;
pub mod scalar;

pub use colgen::{
    compute_metrics, run_column_generation, ColgenOutcome, ConvergenceTrace, IterationRecord,
    RunMetrics, SolverConfig, SolverMode, WorkerKind,
};
pub use error::{Error, Result};
pub use graph::{build_incompatibility_graph, IncompatibilityGraph};
pub use instance::{generate_instance, read_instance, write_instance, FleetInstance, Tour, VehicleModel};
pub use logq::ExpectationMode;
pub use lp::{Column, RcpSolution, RoundedSolution};
pub use scalar::Real;

pub type QuboProblemF64 = qubo::QuboProblem<f64>;
pub type SpinQuboF64 = qubo::SpinQubo<f64>;
pub type SpinQuboF32 = qubo::SpinQubo<f32>;
pub type ThetaVectorF64 = logq::ThetaVector<f64>;
pub type PauliTermListF64 = pauli::PauliTermList<f64>;
pub type GaOutcomeF64 = ga::GaOutcome<f64>;
pub type CoveringSolutionF64 = lp::simplex::CoveringSolution<f64>;
