//! Matrix-free Krylov solver for parameter-dependent linear systems
//! A(mu) x(mu) = b.
//!
//! The nonlinear parameter dependence is linearized by an infinite block
//! companion operator whose Krylov vectors carry zero tails, so one
//! mu-independent Arnoldi factorization ([`krylov`]) built from the Taylor
//! actions of A at 0 ([`linearization`]) can be reused to evaluate
//! approximate solutions for any number of parameter values via small
//! shifted least squares problems ([`solver`]). Convergence is governed by
//! the reciprocal eigenvalues of the associated nonlinear eigenvalue
//! problem ([`convergence`]). Ready-made problem families live in
//! [`problems`]; dense reference implementations for testing live in
//! [`oracle`].

pub mod convergence;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod linearization;
pub mod oracle;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::Cx;

pub use convergence::{
    gelfand_limit_check, observed_factor, predict_bound, spectrum_dense, spectrum_ritz,
    BoundPrediction, ConvergenceReport, SpectrumEstimate, SpectrumSource,
};
pub use krylov::{
    arnoldi_build, gram_schmidt, ArnoldiFactorization, ArnoldiProcess, Basis, BasisVariant,
    GramSchmidt, Hessenberg, OrthoPolicy, StepOutcome,
};
pub use linearization::{
    companion_apply, companion_apply_low_rank, residual_true, BlockVector, LowRankTaylorProblem,
    TaylorProblem,
};
pub use solver::{sweep, Evaluation, ParamSolution, ResidualHistory, SweepOptions, SweepResult};
