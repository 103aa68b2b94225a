//! Complex-valued basis pursuit by orthonormal-expansion ℓ1 minimization
//! (the exact and relaxed ONE-L1 iterations), together with the machinery
//! for measuring empirical Donoho–Tanner phase transitions of complex
//! compressed sensing.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: partially orthonormal sensing operators and their unitary completions.
//! * [`ensembles`]: random matrix ensembles, row orthonormalization, instance generation.
//! * [`solver`]: soft thresholding and the ONE-L1 augmented-Lagrangian iterations.
//! * [`bridge`]: the real 2n × 2N reformulation and its block-sparse structure.
//! * [`theory`]: state-evolution phase-transition curves.
//! * [`experiment`]: phase-plane grids, trial classification, logistic fits.

pub mod bridge;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod operator;
pub mod rng;
pub mod solver;
pub mod theory;
pub mod vector;

pub use ensembles::{make_instance, EnsembleKind, EnsembleSpec, SignalModel};
pub use error::{Error, Result};
pub use instance::SparseInstance;
pub use operator::SensingOperator;
pub use solver::{solve, solve_indirect, SolverConfig, SolverResult, Variant};
pub use theory::{complex_transition, real_transition, CurveKind, TransitionCurve};
pub use vector::ComplexVector;

pub use num_complex::Complex64;
