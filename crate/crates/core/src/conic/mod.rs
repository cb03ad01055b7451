//! Solver-agnostic intermediate representations for the linear and
//! semidefinite programs built elsewhere in the crate, with two independent
//! solution paths: a dense simplex for LPs and an interior-point conic
//! backend for SDPs.
//!
//! Bound safety: for max-sense programs the reported `objective` is taken
//! from the dual (certificate) side whenever the solver exposes it, so small
//! primal infeasibilities push the reported bound *up*, never down.

mod lp;
mod sdp;

pub use lp::{LinearProgram, LpVar};
pub use sdp::{
    hermitian_embedding, Atom, ConicProgram, HermitianBlock, LinExpr, MatrixVar, ScalarVar,
    SdpSettings, SdpSolution,
};

use serde::Serialize;

/// Optimization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Row relation, always written as `expr OP 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near-optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical-failure",
        };
        write!(f, "{s}")
    }
}

/// Outcome of a solve, independent of which backend produced it.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Safe-side objective: dual value for max problems when available,
    /// otherwise primal plus the achieved gap.
    pub objective: f64,
    pub primal_objective: f64,
    pub dual_objective: Option<f64>,
    /// |primal − dual| achieved by the solver.
    pub gap: f64,
    names: Vec<String>,
    values: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn new(
        status: SolveStatus,
        sense: Sense,
        primal: f64,
        dual: Option<f64>,
        names: Vec<String>,
        values: Vec<f64>,
    ) -> Self {
        let gap = dual.map(|d| (primal - d).abs()).unwrap_or(f64::INFINITY);
        let objective = match (sense, dual) {
            // For a max problem the dual side upper-bounds the true optimum.
            (Sense::Maximize, Some(d)) => d.max(primal),
            (Sense::Maximize, None) => primal,
            // For a min problem the primal side is the safe (larger) one.
            (Sense::Minimize, _) => primal,
        };
        SolveReport {
            status,
            objective,
            primal_objective: primal,
            dual_objective: dual,
            gap,
            names,
            values,
        }
    }

    pub(crate) fn failed(status: SolveStatus) -> Self {
        SolveReport {
            status,
            objective: f64::NAN,
            primal_objective: f64::NAN,
            dual_objective: None,
            gap: f64::INFINITY,
            names: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Primal value of a named scalar variable.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    /// Primal values in variable declaration order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}
