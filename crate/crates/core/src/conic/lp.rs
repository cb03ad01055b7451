//! Dense two-phase simplex with dual values recovered from the optimal
//! basis. Deliberately independent of the interior-point conic backend: the
//! source-scenario LPs are tiny and this gives a second code path to check
//! the analytic dual solver against.

use nalgebra::{DMatrix, DVector};

use super::{RowOp, Sense, SolveReport, SolveStatus};
use crate::{Error, Result};

/// Handle to a declared LP variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpVar(pub(crate) usize);

#[derive(Clone, Debug)]
struct LpRow {
    coeffs: Vec<(usize, f64)>,
    op: RowOp,
    rhs: f64,
}

/// A linear program over named scalar variables with bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    sense: Sense,
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            names: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Declare a variable with bounds (`f64::NEG_INFINITY` / `f64::INFINITY`
    /// for unbounded sides).
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> LpVar {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(0.0);
        LpVar(self.names.len() - 1)
    }

    pub fn set_objective(&mut self, var: LpVar, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    pub fn add_row(&mut self, coeffs: &[(LpVar, f64)], op: RowOp, rhs: f64) -> Result<()> {
        if !rhs.is_finite() {
            return Err(Error::Program("row rhs must be finite".into()));
        }
        let mut cs = Vec::with_capacity(coeffs.len());
        for &(v, c) in coeffs {
            if v.0 >= self.names.len() {
                return Err(Error::Program(format!(
                    "row references undeclared variable index {}",
                    v.0
                )));
            }
            if !c.is_finite() {
                return Err(Error::Program(format!(
                    "coefficient on {} is not finite",
                    self.names[v.0]
                )));
            }
            cs.push((v.0, c));
        }
        self.rows.push(LpRow {
            coeffs: cs,
            op,
            rhs,
        });
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    /// Solve with the given pivot/feasibility tolerance.
    pub fn solve(&self, tol: f64) -> SolveReport {
        Simplex::from_program(self).solve(tol)
    }
}

/// Standard-form data: min c·x, A x = b, x ≥ 0, plus bookkeeping to map the
/// solution back onto the user's variables.
struct Simplex {
    sense: Sense,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    obj_const: f64,
    n_struct: usize,
    /// per user variable: how it maps to standard columns
    recover: Vec<VarMap>,
    names: Vec<String>,
}

#[derive(Clone, Copy)]
enum VarMap {
    /// x = col + shift
    Shifted { col: usize, shift: f64 },
    /// x = ub − col
    Mirrored { col: usize, ub: f64 },
    /// x = pos − neg
    Split { pos: usize, neg: usize },
}

impl Simplex {
    fn from_program(p: &LinearProgram) -> Self {
        let min_sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        // assign standard columns to user variables
        let mut recover = Vec::with_capacity(p.names.len());
        let mut n_cols = 0usize;
        let mut extra_rows: Vec<LpRow> = Vec::new();
        for i in 0..p.names.len() {
            let (lo, hi) = (p.lower[i], p.upper[i]);
            if lo.is_finite() {
                recover.push(VarMap::Shifted {
                    col: n_cols,
                    shift: lo,
                });
                if hi.is_finite() {
                    extra_rows.push(LpRow {
                        coeffs: vec![(i, 1.0)],
                        op: RowOp::Le,
                        rhs: hi,
                    });
                }
                n_cols += 1;
            } else if hi.is_finite() {
                recover.push(VarMap::Mirrored {
                    col: n_cols,
                    ub: hi,
                });
                n_cols += 1;
            } else {
                recover.push(VarMap::Split {
                    pos: n_cols,
                    neg: n_cols + 1,
                });
                n_cols += 2;
            }
        }

        let all_rows: Vec<&LpRow> = p.rows.iter().chain(extra_rows.iter()).collect();
        let m = all_rows.len();

        // structural part of A, with rhs adjusted for shifts/mirrors
        let mut a = DMatrix::<f64>::zeros(m, n_cols);
        let mut b = DVector::<f64>::zeros(m);
        let mut ops = Vec::with_capacity(m);
        for (r, row) in all_rows.iter().enumerate() {
            let mut rhs = row.rhs;
            for &(v, coeff) in &row.coeffs {
                match recover[v] {
                    VarMap::Shifted { col, shift } => {
                        a[(r, col)] += coeff;
                        rhs -= coeff * shift;
                    }
                    VarMap::Mirrored { col, ub } => {
                        a[(r, col)] -= coeff;
                        rhs -= coeff * ub;
                    }
                    VarMap::Split { pos, neg } => {
                        a[(r, pos)] += coeff;
                        a[(r, neg)] -= coeff;
                    }
                }
            }
            b[r] = rhs;
            ops.push(row.op);
        }

        // objective over standard columns
        let mut c = DVector::zeros(n_cols);
        let mut obj_const = 0.0;
        for i in 0..p.names.len() {
            let coeff = min_sign * p.objective[i];
            match recover[i] {
                VarMap::Shifted { col, shift } => {
                    c[col] += coeff;
                    obj_const += coeff * shift;
                }
                VarMap::Mirrored { col, ub } => {
                    c[col] -= coeff;
                    obj_const += coeff * ub;
                }
                VarMap::Split { pos, neg } => {
                    c[pos] += coeff;
                    c[neg] -= coeff;
                }
            }
        }

        // append slack/surplus columns; flip rows to make b ≥ 0 first
        let mut full = DMatrix::zeros(m, n_cols + m);
        full.view_mut((0, 0), (m, n_cols)).copy_from(&a);
        for r in 0..m {
            let mut op = ops[r];
            if b[r] < 0.0 {
                for v in 0..n_cols {
                    full[(r, v)] = -full[(r, v)];
                }
                b[r] = -b[r];
                op = match op {
                    RowOp::Le => RowOp::Ge,
                    RowOp::Ge => RowOp::Le,
                    RowOp::Eq => RowOp::Eq,
                };
            }
            match op {
                RowOp::Le => full[(r, n_cols + r)] = 1.0,
                RowOp::Ge => full[(r, n_cols + r)] = -1.0,
                RowOp::Eq => {}
            }
        }
        let mut c_full = DVector::zeros(n_cols + m);
        c_full.rows_mut(0, n_cols).copy_from(&c);

        Simplex {
            sense: p.sense,
            a: full,
            b,
            c: c_full,
            obj_const,
            n_struct: n_cols,
            recover,
            names: p.names.clone(),
        }
    }

    fn solve(mut self, tol: f64) -> SolveReport {
        let m = self.a.nrows();
        let n = self.a.ncols();
        let b0 = self.b.clone();

        // Phase 1: artificial columns wherever no +1 slack provides a start.
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut n_art = 0usize;
        for r in 0..m {
            if self.a[(r, self.n_struct + r)] > 0.5 {
                basis.push(self.n_struct + r);
            } else {
                basis.push(n + n_art);
                n_art += 1;
            }
        }
        let mut work = DMatrix::zeros(m, n + n_art);
        work.view_mut((0, 0), (m, n)).copy_from(&self.a);
        {
            let mut art = 0usize;
            for r in 0..m {
                if basis[r] >= n {
                    work[(r, n + art)] = 1.0;
                    art += 1;
                }
            }
        }

        if n_art > 0 {
            let mut c1 = DVector::zeros(n + n_art);
            for j in n..n + n_art {
                c1[j] = 1.0;
            }
            match run_simplex(&mut work, &mut self.b, &c1, &mut basis, tol) {
                SimplexEnd::Optimal => {}
                SimplexEnd::Unbounded => return SolveReport::failed(SolveStatus::NumericalFailure),
                SimplexEnd::IterationLimit => {
                    return SolveReport::failed(SolveStatus::NumericalFailure)
                }
            }
            let phase1: f64 = basis
                .iter()
                .enumerate()
                .filter(|(_, &j)| j >= n)
                .map(|(r, _)| self.b[r])
                .sum();
            if phase1 > 1e-7 {
                return SolveReport::failed(SolveStatus::Infeasible);
            }
            // pivot remaining degenerate artificials out when possible
            for r in 0..m {
                if basis[r] >= n {
                    if let Some(j) = (0..n).find(|&j| work[(r, j)].abs() > 1e-9) {
                        pivot(&mut work, &mut self.b, &mut basis, r, j);
                    }
                }
            }
        }

        // Phase 2 on the original columns only (artificial columns frozen out
        // by excluding them from pricing).
        let mut c2 = DVector::zeros(work.ncols());
        c2.rows_mut(0, n).copy_from(&self.c);
        let end = run_simplex_restricted(&mut work, &mut self.b, &c2, &mut basis, n, tol);
        match end {
            SimplexEnd::Optimal => {}
            SimplexEnd::Unbounded => return SolveReport::failed(SolveStatus::Unbounded),
            SimplexEnd::IterationLimit => {
                return SolveReport::failed(SolveStatus::NumericalFailure)
            }
        }

        // primal solution in standard columns
        let mut x_std = vec![0.0; n];
        for (r, &j) in basis.iter().enumerate() {
            if j < n {
                x_std[j] = self.b[r];
            }
        }
        let primal_std: f64 = (0..n).map(|j| self.c[j] * x_std[j]).sum();

        // dual from the optimal basis: solve Bᵀ y = c_B against the ORIGINAL
        // standard-form matrix (work has been transformed by pivoting).
        let dual_std = self.dual_from_basis(&basis, &b0);

        let min_primal = primal_std + self.obj_const;
        let min_dual = dual_std.map(|d| d + self.obj_const);
        let (primal, dual) = match self.sense {
            Sense::Minimize => (min_primal, min_dual),
            Sense::Maximize => (-min_primal, min_dual.map(|d| -d)),
        };

        // user-variable values
        let values: Vec<f64> = self
            .recover
            .iter()
            .map(|map| match *map {
                VarMap::Shifted { col, shift } => x_std[col] + shift,
                VarMap::Mirrored { col, ub } => ub - x_std[col],
                VarMap::Split { pos, neg } => x_std[pos] - x_std[neg],
            })
            .collect();

        SolveReport::new(
            SolveStatus::Optimal,
            self.sense,
            primal,
            dual,
            self.names.clone(),
            values,
        )
    }

    fn dual_from_basis(&self, basis: &[usize], b0: &DVector<f64>) -> Option<f64> {
        let m = self.a.nrows();
        if m == 0 {
            return Some(0.0);
        }
        let mut bt = DMatrix::zeros(m, m);
        let mut cb = DVector::zeros(m);
        for (r, &j) in basis.iter().enumerate() {
            if j >= self.a.ncols() {
                return None; // artificial left in basis (degenerate): skip dual
            }
            for i in 0..m {
                bt[(r, i)] = self.a[(i, j)];
            }
            cb[r] = self.c[j];
        }
        bt.lu().solve(&cb).map(|y| y.dot(b0))
    }
}

enum SimplexEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

fn run_simplex(
    a: &mut DMatrix<f64>,
    b: &mut DVector<f64>,
    c: &DVector<f64>,
    basis: &mut [usize],
    tol: f64,
) -> SimplexEnd {
    let n = a.ncols();
    run_simplex_restricted(a, b, c, basis, n, tol)
}

/// Bland's-rule simplex over columns `0..n_price`.
fn run_simplex_restricted(
    a: &mut DMatrix<f64>,
    b: &mut DVector<f64>,
    c: &DVector<f64>,
    basis: &mut [usize],
    n_price: usize,
    tol: f64,
) -> SimplexEnd {
    let m = a.nrows();
    let max_iter = 2000 + 60 * (m + a.ncols());
    for _ in 0..max_iter {
        // reduced costs via current (tableau-form) matrix: z_j = c_j − c_B·col_j
        // The tableau is kept in product form: a is fully pivoted, so the
        // reduced cost is c_j − Σ_r c_{basis[r]} a[(r,j)].
        let mut entering = None;
        for j in 0..n_price {
            if basis.contains(&j) {
                continue;
            }
            let mut red = c[j];
            for r in 0..m {
                red -= c[basis[r]] * a[(r, j)];
            }
            if red < -tol {
                entering = Some(j);
                break; // Bland: smallest index
            }
        }
        let Some(j) = entering else {
            return SimplexEnd::Optimal;
        };
        // ratio test, Bland tie-break on smallest basis index
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            let arj = a[(r, j)];
            if arj > tol {
                let ratio = b[r] / arj;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-12
                            || ((ratio - lratio).abs() <= 1e-12 && basis[r] < basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else {
            return SimplexEnd::Unbounded;
        };
        pivot(a, b, basis, r, j);
    }
    SimplexEnd::IterationLimit
}

fn pivot(a: &mut DMatrix<f64>, b: &mut DVector<f64>, basis: &mut [usize], r: usize, j: usize) {
    let m = a.nrows();
    let n = a.ncols();
    let piv = a[(r, j)];
    for col in 0..n {
        a[(r, col)] /= piv;
    }
    b[r] /= piv;
    for row in 0..m {
        if row != r {
            let f = a[(row, j)];
            if f != 0.0 {
                for col in 0..n {
                    a[(row, col)] -= f * a[(r, col)];
                }
                b[row] -= f * b[r];
            }
        }
    }
    basis[r] = j;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn picks_the_better_weight() {
        // max p1  s.t.  p0 + p1 = 1, p ≥ 0  →  1
        let mut lp = LinearProgram::new(Sense::Maximize);
        let p0 = lp.add_var("p0", 0.0, f64::INFINITY);
        let p1 = lp.add_var("p1", 0.0, f64::INFINITY);
        lp.set_objective(p1, 1.0);
        lp.add_row(&[(p0, 1.0), (p1, 1.0)], RowOp::Eq, 1.0).unwrap();
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.objective, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value("p1").unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn energy_lp_two_point_instance() {
        // exact-form LP with a = (0.5, 1) and n̄ = 0.5.
        // Independent oracle first: brute-force over the feasible set
        // {p1 = 0.5 fixed by the mean constraint} gives 0.75.
        let mut best = f64::NEG_INFINITY;
        let steps = 10_000;
        for i in 0..=steps {
            let p1 = i as f64 / steps as f64;
            let p0 = 1.0 - p1;
            if (p1 - 0.5).abs() < 1e-9 {
                best = best.max(0.5 * p0 + 1.0 * p1);
            }
        }
        assert_abs_diff_eq!(best, 0.75, epsilon = 1e-6);

        let mut lp = LinearProgram::new(Sense::Maximize);
        let p0 = lp.add_var("p0", 0.0, f64::INFINITY);
        let p1 = lp.add_var("p1", 0.0, f64::INFINITY);
        lp.set_objective(p0, 0.5);
        lp.set_objective(p1, 1.0);
        lp.add_row(&[(p0, 1.0), (p1, 1.0)], RowOp::Eq, 1.0).unwrap();
        lp.add_row(&[(p1, 1.0)], RowOp::Eq, 0.5).unwrap();
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.objective, 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value("p0").unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn unbounded_is_flagged() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_is_flagged() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.add_row(&[], RowOp::Ge, 1.0).unwrap(); // 0 ≥ 1
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Infeasible);

        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 0.0, 1.0);
        lp.set_objective(x, 1.0);
        lp.add_row(&[(x, 1.0)], RowOp::Ge, 2.0).unwrap();
        assert_eq!(lp.solve(1e-9).status, SolveStatus::Infeasible);
    }

    #[test]
    fn bounds_and_free_variables() {
        // maximize x with x ∈ (−∞, 5]
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_var("x", f64::NEG_INFINITY, 5.0);
        lp.set_objective(x, 1.0);
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.objective, 5.0, epsilon = 1e-9);

        // minimize x + y with x free, y ≥ 0, x + y ≥ −2, x ≥ −10
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_var("y", 0.0, f64::INFINITY);
        lp.set_objective(x, 1.0);
        lp.set_objective(y, 1.0);
        lp.add_row(&[(x, 1.0), (y, 1.0)], RowOp::Ge, -2.0).unwrap();
        let r = lp.solve(1e-9);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.objective, -2.0, epsilon = 1e-9);

        // shifted lower bound
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_var("x", 2.5, f64::INFINITY);
        lp.set_objective(x, 3.0);
        let r = lp.solve(1e-9);
        assert_abs_diff_eq!(r.objective, 7.5, epsilon = 1e-9);
    }

    #[test]
    fn weak_duality_on_random_bounded_lps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for trial in 0..200 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(1..4);
            let mut lp = LinearProgram::new(Sense::Maximize);
            let vars: Vec<LpVar> = (0..n)
                .map(|i| lp.add_var(format!("x{i}"), 0.0, f64::INFINITY))
                .collect();
            for &v in &vars {
                lp.set_objective(v, rng.gen_range(-1.0..1.0));
            }
            for _ in 0..m {
                let coeffs: Vec<(LpVar, f64)> = vars
                    .iter()
                    .map(|&v| (v, rng.gen_range(-0.5..1.5)))
                    .collect();
                lp.add_row(&coeffs, RowOp::Le, rng.gen_range(0.0..2.0))
                    .unwrap();
            }
            // keep it bounded
            let all: Vec<(LpVar, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
            lp.add_row(&all, RowOp::Le, 10.0).unwrap();

            let r = lp.solve(1e-9);
            assert_eq!(r.status, SolveStatus::Optimal, "trial {trial}");
            let dual = r.dual_objective.expect("dual available");
            assert!(
                dual >= r.primal_objective - 1e-7,
                "trial {trial}: dual {dual} < primal {}",
                r.primal_objective
            );
            assert!(r.gap <= 1e-7, "trial {trial}: gap {}", r.gap);
            // reported solution is primal feasible
            for (i, &x) in r.values().iter().enumerate() {
                assert!(x >= -1e-9, "trial {trial}: x{i} = {x}");
            }
        }
    }
}
