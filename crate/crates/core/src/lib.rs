//! Rigorous upper bounds on single-shot discrimination of optical modes.
//!
//! A set of `N` optical modes is characterized entirely by the pairwise
//! commutation constants `k_ij = [a_i, a_j†]` ([`ModeFamily`]). Given a mean
//! photon number budget `n̄`, this crate bounds how well a receiver can tell
//! the modes apart in a single shot, for two tasks and two scenarios:
//!
//! * **probabilistic** discrimination (maximize the guessing probability) and
//!   **unambiguous** discrimination (zero error, inconclusive outcome allowed);
//! * the **channel** scenario (phase reference available, pure probe states)
//!   and the **source** scenario (no reference, photon-number-diagonal states).
//!
//! Channel bounds come from a Gram-matrix semidefinite relaxation over a
//! truncated photon ladder ([`gram`]). Source bounds decompose into per-photon
//! SDPs plus an energy-constrained linear program ([`source`]), which also has
//! an exact geometric dual solution. Closed forms for two modes and for
//! symmetric phase sets live in [`analytic`]; photon loss is handled in
//! [`losses`].
//!
//! All solver-backed bounds are reported from the certificate (dual) side, so
//! numerical slack errs toward a *larger* bound — a reported value is always a
//! valid upper bound up to the solver tolerance.

// index-based loops mirror the matrix notation throughout; iterator forms
// hide which entry is being addressed
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod conic;
pub mod fock;
pub mod gram;
pub mod losses;
pub mod modes;
pub mod optim;
pub mod source;
pub mod sweep;

use serde::{Deserialize, Serialize};

pub use conic::{SolveReport, SolveStatus};
pub use fock::{EnergyConstraint, PhotonDistribution};
pub use modes::ModeFamily;

/// Who holds the light source, i.e. whether a phase reference exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Verifier holds the source; probe states are pure superpositions.
    Channel,
    /// Source inside the box; states are photon-number mixtures.
    Source,
}

/// Discrimination figure of merit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    /// Minimum-error guessing: maximize the probability of a correct guess.
    #[serde(rename = "prob")]
    Probabilistic,
    /// Zero-error with an inconclusive outcome: maximize conclusive success.
    #[serde(rename = "ud")]
    Unambiguous,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::Channel => write!(f, "channel"),
            Scenario::Source => write!(f, "source"),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Probabilistic => write!(f, "prob"),
            Task::Unambiguous => write!(f, "ud"),
        }
    }
}

/// A solved discrimination bound together with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub scenario: Scenario,
    pub task: Task,
    /// Upper bound on the success probability (certificate-side value).
    pub bound: f64,
    pub status: SolveStatus,
    /// Photon-number cutoff the bound was computed at.
    pub n_max: usize,
    /// Duality gap achieved by the solver.
    pub tolerance: f64,
    /// Optimal photon-number weights `{p_n}` when the program exposes them.
    pub weights: Option<Vec<f64>>,
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mode family: {0}")]
    Family(#[from] modes::FamilyError),
    #[error("photon distribution: {0}")]
    Distribution(String),
    #[error("energy constraint: {0}")]
    Energy(String),
    #[error("program construction: {0}")]
    Program(String),
    #[error("solver returned {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },
    #[error("per-photon solve failed at n={n}: {source}")]
    FockSolve {
        n: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("loss inversion: {0}")]
    LossInversion(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
