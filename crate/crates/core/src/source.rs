//! Source-discrimination pipeline: per-photon-number bounds feed an
//! energy-constrained linear program.
//!
//! Photon-number-diagonal states let the receiver measure `n` first and then
//! discriminate optimally for that `n`, so the optimization splits into a
//! table of per-Fock bounds `a_n` (solved by [`crate::gram`]) and an LP over
//! the photon-number distribution. The LP is solved twice, by deliberately
//! independent routes: the generic simplex on the cutoff-relaxed form (which
//! credits mass above the cutoff with perfect distinguishability, keeping
//! the result an upper bound), and an exact geometric solution of the dual —
//! walking the upper envelope of the lines `y = −(x − a_n)/n` — used both as
//! a cross-check and to decide when the floor/ceil mixture is optimal.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::conic::{LinearProgram, RowOp, Sense, SolveStatus};
use crate::fock::{EnergyConstraint, PhotonDistribution};
use crate::gram;
use crate::modes::ModeFamily;
use crate::{BoundResult, Error, Result, Scenario, Task};

/// Per-photon-number optimal bounds `a_n` for one family and task.
#[derive(Clone, Debug)]
pub struct FockBoundTable {
    a: Vec<f64>,
    task: Task,
    fingerprint: String,
}

impl FockBoundTable {
    /// Wrap precomputed values; entries must lie in `[0, 1]` up to solver
    /// tolerance (they are clamped).
    pub fn from_values(a: Vec<f64>, task: Task, fingerprint: impl Into<String>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("empty bound table".into()));
        }
        let mut a = a;
        for (n, v) in a.iter_mut().enumerate() {
            if !v.is_finite() || *v < -1e-6 || *v > 1.0 + 1e-6 {
                return Err(Error::InvalidArgument(format!("a_{n} = {v} outside [0,1]")));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(FockBoundTable {
            a,
            task,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn value(&self, n: usize) -> f64 {
        self.a[n]
    }

    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Write as `n,a_n` CSV.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,a_n")?;
        for (n, v) in self.a.iter().enumerate() {
            writeln!(w, "{n},{v:.17}")?;
        }
        Ok(())
    }

    /// Read back a table written by [`FockBoundTable::to_csv`].
    pub fn from_csv<R: BufRead>(r: R, task: Task, fingerprint: impl Into<String>) -> Result<Self> {
        let mut values = Vec::new();
        for (line_no, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('n')) {
                continue;
            }
            let (n_str, v_str) = line.split_once(',').ok_or_else(|| {
                Error::InvalidArgument(format!("bad CSV line {}: {line}", line_no + 1))
            })?;
            let n: usize = n_str.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad index on line {}", line_no + 1))
            })?;
            if n != values.len() {
                return Err(Error::InvalidArgument(format!(
                    "non-contiguous table: expected n={}, got {n}",
                    values.len()
                )));
            }
            let v: f64 = v_str.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("bad value on line {}", line_no + 1))
            })?;
            values.push(v);
        }
        Self::from_values(values, task, fingerprint)
    }

    fn cache_file(dir: &Path, fingerprint: &str, task: Task, n_max: usize) -> PathBuf {
        dir.join(format!("fock_{fingerprint}_{task}_{n_max}.csv"))
    }
}

/// Solve the per-photon bounds `a_0..a_{n_max}` for a family. `n = 0` is
/// filled analytically (best prior, or zero for unambiguous); the rest run
/// in parallel.
pub fn fock_table(family: &ModeFamily, n_max: usize, task: Task) -> Result<FockBoundTable> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("fock table needs n_max ≥ 1".into()));
    }
    let a0 = match task {
        Task::Probabilistic => family
            .priors()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        Task::Unambiguous => 0.0,
    };
    let mut a = vec![a0];
    let rest: Vec<Result<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let prog = match task {
                Task::Probabilistic => gram::build_fock_prob(family, n)?,
                Task::Unambiguous => gram::build_fock_ud(family, n)?,
            };
            let b = prog.solve().map_err(|e| Error::FockSolve {
                n,
                source: Box::new(e),
            })?;
            Ok(b.bound)
        })
        .collect();
    for r in rest {
        a.push(r?);
    }
    FockBoundTable::from_values(a, task, family.fingerprint())
}

/// Load a cached table if present, else compute and cache it.
pub fn fock_table_cached(
    family: &ModeFamily,
    n_max: usize,
    task: Task,
    cache_dir: &Path,
) -> Result<FockBoundTable> {
    let file = FockBoundTable::cache_file(cache_dir, &family.fingerprint(), task, n_max);
    if file.is_file() {
        let reader = std::io::BufReader::new(std::fs::File::open(&file)?);
        return FockBoundTable::from_csv(reader, task, family.fingerprint());
    }
    let table = fock_table(family, n_max, task)?;
    std::fs::create_dir_all(cache_dir)?;
    table.to_csv(std::fs::File::create(&file)?)?;
    Ok(table)
}

/// Cutoff-relaxed energy LP (the upper-bound form): maximize
/// `Σ p_n a_n + (1 − Σ p_n)` subject to `p ≥ 0`, `Σ p_n ≤ 1` and the
/// relaxed mean-photon-number row.
pub fn lp_bound(table: &FockBoundTable, ec: &EnergyConstraint) -> Result<BoundResult> {
    if table.n_max() != ec.n_max() {
        return Err(Error::InvalidArgument(format!(
            "table covers n ≤ {}, energy constraint wants n_max = {}",
            table.n_max(),
            ec.n_max()
        )));
    }
    let mut lp = LinearProgram::new(Sense::Maximize);
    let vars: Vec<_> = (0..=table.n_max())
        .map(|n| lp.add_var(format!("p{n}"), 0.0, f64::INFINITY))
        .collect();
    // objective Σ p_n a_n + (1 − Σ p_n) = 1 + Σ p_n (a_n − 1)
    for (n, &v) in vars.iter().enumerate() {
        lp.set_objective(v, table.value(n) - 1.0);
    }
    let ones: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_row(&ones, RowOp::Le, 1.0)?;
    let row = ec.relaxed_energy_row();
    let coeffs: Vec<_> = vars
        .iter()
        .enumerate()
        .map(|(n, &v)| (v, row.coeffs[n]))
        .collect();
    lp.add_row(&coeffs, RowOp::Ge, row.rhs)?;

    let r = lp.solve(1e-10);
    if r.status != SolveStatus::Optimal {
        return Err(Error::Solver {
            status: r.status,
            detail: "source LP".into(),
        });
    }
    Ok(BoundResult {
        scenario: Scenario::Source,
        task: table.task(),
        bound: 1.0 + r.objective,
        status: r.status,
        n_max: ec.n_max(),
        tolerance: r.gap,
        weights: Some(r.values().to_vec()),
    })
}

/// Exact-form energy LP (`Σ p_n = 1`, `Σ n p_n = n̄` over `n ≤ n_max`),
/// the form the geometric dual solves. Returns the value and optimizer.
pub fn exact_lp_bound(table: &FockBoundTable, nbar: f64) -> Result<(f64, Vec<f64>)> {
    if nbar < 0.0 || nbar > table.n_max() as f64 {
        return Err(Error::InvalidArgument(format!(
            "nbar = {nbar} outside [0, {}]",
            table.n_max()
        )));
    }
    let mut lp = LinearProgram::new(Sense::Maximize);
    let vars: Vec<_> = (0..=table.n_max())
        .map(|n| lp.add_var(format!("p{n}"), 0.0, f64::INFINITY))
        .collect();
    for (n, &v) in vars.iter().enumerate() {
        lp.set_objective(v, table.value(n));
    }
    let ones: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    lp.add_row(&ones, RowOp::Eq, 1.0)?;
    let mean: Vec<_> = vars
        .iter()
        .enumerate()
        .map(|(n, &v)| (v, n as f64))
        .collect();
    lp.add_row(&mean, RowOp::Eq, nbar)?;
    let r = lp.solve(1e-10);
    if r.status != SolveStatus::Optimal {
        return Err(Error::Solver {
            status: r.status,
            detail: "exact-form source LP".into(),
        });
    }
    Ok((r.objective, r.values().to_vec()))
}

/// Solution of the dual LP `min x + n̄y` over the feasibility region cut out
/// by `x ≥ a_0` and `y ≥ −(x − a_n)/n`.
#[derive(Clone, Debug)]
pub struct DualLpSolution {
    pub x: f64,
    pub y: f64,
    /// Indices `n` whose constraint lines pass through the optimum.
    pub active: Vec<usize>,
    pub value: f64,
}

impl DualLpSolution {
    /// Worst feasibility violation over all constraint lines (≤ 0 when
    /// feasible).
    pub fn max_violation(&self, table: &FockBoundTable) -> f64 {
        let mut worst = table.value(0) - self.x; // x ≥ a_0
        for n in 1..=table.n_max() {
            let needed = -(self.x - table.value(n)) / n as f64;
            worst = worst.max(needed - self.y);
        }
        worst
    }
}

/// Exact dual optimum by walking the upper envelope of the constraint lines.
///
/// The boundary of the feasible region consists of segments of
/// `L_n: y = −(x − a_n)/n` (slopes `−1/n`, increasing with `n`) clipped at
/// the vertical line `x = a_0`; the optimum of `min x + n̄y` sits at an
/// envelope vertex, or along a whole segment when `n̄` equals that
/// segment's `n`.
pub fn dual_geometric_solve(table: &FockBoundTable, nbar: f64) -> Result<DualLpSolution> {
    let n_max = table.n_max();
    if !(0.0..=n_max as f64).contains(&nbar) {
        return Err(Error::InvalidArgument(format!(
            "nbar = {nbar} outside [0, {n_max}]; the exact-form LP is infeasible"
        )));
    }

    // upper envelope of lines y = m_n x + c_n with m_n = −1/n, c_n = a_n/n,
    // in increasing slope order (n = 1..n_max). Ties at a vertex drop the
    // later line, keeping the earlier one on the envelope.
    #[derive(Clone, Copy)]
    struct Line {
        m: f64,
        c: f64,
    }
    let lines: Vec<Line> = (1..=n_max)
        .map(|n| Line {
            m: -1.0 / n as f64,
            c: table.value(n) / n as f64,
        })
        .collect();
    let cross_x = |a: &Line, b: &Line| (b.c - a.c) / (a.m - b.m);
    let mut hull: Vec<Line> = Vec::new();
    for l in lines {
        while hull.len() >= 2 {
            let last = hull[hull.len() - 1];
            let prev = hull[hull.len() - 2];
            if cross_x(&prev, &l) <= cross_x(&prev, &last) + 1e-15 {
                hull.pop();
            } else {
                break;
            }
        }
        if hull.len() == 1 {
            // parallel lines cannot occur (distinct n); keep both
        }
        hull.push(l);
    }

    // envelope vertices, clipped at x = a_0
    let x0 = table.value(0);
    let eval = |l: &Line, x: f64| l.m * x + l.c;
    let mut vertices: Vec<(f64, f64)> = Vec::new();
    // corner on the vertical line: highest line at x = a_0
    let y_corner = hull
        .iter()
        .map(|l| eval(l, x0))
        .fold(f64::NEG_INFINITY, f64::max);
    vertices.push((x0, y_corner));
    for w in hull.windows(2) {
        let x = cross_x(&w[0], &w[1]);
        if x > x0 + 1e-15 {
            vertices.push((x, eval(&w[0], x)));
        }
    }

    // the last envelope segment has slope −1/n_last; for nbar beyond it the
    // objective keeps decreasing along the segment (only possible at
    // nbar > n_max, excluded above)
    let (mut best_x, mut best_y) = vertices[0];
    let mut best = f64::INFINITY;
    for &(x, y) in &vertices {
        let obj = x + nbar * y;
        if obj < best - 1e-15 {
            best = obj;
            best_x = x;
            best_y = y;
        }
    }

    let mut active = Vec::new();
    if (best_x - x0).abs() <= 1e-9 {
        active.push(0);
    }
    for n in 1..=n_max {
        let on_line = -(best_x - table.value(n)) / n as f64;
        if (on_line - best_y).abs() <= 1e-9 {
            active.push(n);
        }
    }

    Ok(DualLpSolution {
        x: best_x,
        y: best_y,
        active,
        value: best_x + nbar * best_y,
    })
}

/// Second-difference test `a_{n−1} − 2a_n + a_{n+1} < 0` for
/// `n = 1 .. n_max−1`. When it holds everywhere, the floor/ceil mixture
/// solves the exact-form LP.
#[derive(Clone, Debug)]
pub struct ConditionCheck {
    holds: Vec<bool>,
    degenerate: Vec<bool>,
}

impl ConditionCheck {
    /// Strict condition at `n` (`None` outside `1..=n_max−1`).
    pub fn holds_at(&self, n: usize) -> Option<bool> {
        if n == 0 {
            return None;
        }
        self.holds.get(n - 1).copied()
    }

    /// Whether the second difference at `n` vanishes within 1e-12.
    pub fn degenerate_at(&self, n: usize) -> Option<bool> {
        if n == 0 {
            return None;
        }
        self.degenerate.get(n - 1).copied()
    }

    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&b| b)
    }

    /// Strictness per `n = 1, 2, …` in order.
    pub fn as_slice(&self) -> &[bool] {
        &self.holds
    }
}

pub fn condition_check(table: &FockBoundTable) -> Result<ConditionCheck> {
    if table.n_max() < 2 {
        return Err(Error::InvalidArgument(
            "condition check needs a table of length ≥ 3".into(),
        ));
    }
    let a = table.values();
    let mut holds = Vec::with_capacity(a.len() - 2);
    let mut degenerate = Vec::with_capacity(a.len() - 2);
    for n in 1..a.len() - 1 {
        let second = a[n - 1] - 2.0 * a[n] + a[n + 1];
        degenerate.push(second.abs() <= 1e-12);
        holds.push(second < 0.0 && second.abs() > 1e-12);
    }
    Ok(ConditionCheck { holds, degenerate })
}

/// The floor/ceil mixture with mean `n̄`: weight `1+⌊n̄⌋−n̄` on `⌊n̄⌋` and
/// `n̄−⌊n̄⌋` on `⌊n̄⌋+1` (a pure Fock state at integer `n̄`).
pub fn floor_ceil_state(nbar: f64) -> Result<PhotonDistribution> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InvalidArgument(format!("nbar = {nbar} must be ≥ 0")));
    }
    let lo = nbar.floor() as usize;
    let w_hi = nbar - nbar.floor();
    let mut weights = vec![0.0; lo + 2];
    weights[lo] = 1.0 - w_hi;
    weights[lo + 1] = w_hi;
    if w_hi == 0.0 {
        weights.pop();
    }
    PhotonDistribution::with_declared_mean(weights, nbar)
}

/// Full source-scenario pipeline: per-Fock table, then the energy LP.
pub fn source_bound(family: &ModeFamily, ec: &EnergyConstraint, task: Task) -> Result<BoundResult> {
    let table = fock_table(family, ec.n_max(), task)?;
    lp_bound(&table, ec)
}
