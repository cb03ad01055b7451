//! Conic program IR and its lowering to the interior-point backend.
//!
//! Programs are built from scalar variables and structurally-symmetric
//! matrix variables (entry `(i,j)` *is* entry `(j,i)`), with linear rows and
//! PSD constraints. Complex Hermitian blocks are handled through the real
//! embedding `H ↦ [[Re H, −Im H], [Im H, Re H]]`, which is PSD iff `H` is.
//!
//! Before handing a program to the solver, a structural presolve pins
//! entries fixed by single-term equalities and aliases entries tied by
//! two-term `±1` equalities. The Gram programs in [`crate::gram`] consist
//! mostly of such rows; eliminating them up front both shrinks the problem
//! and exposes the block-arrow sparsity of the Gram matrix to the backend's
//! chordal decomposition.

use std::collections::HashMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus as ClarabelStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{RowOp, Sense, SolveReport, SolveStatus};

/// Handle to a scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalarVar(pub(crate) usize);

/// Handle to a symmetric matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixVar {
    id: usize,
    pub dim: usize,
}

/// One variable occurrence: a scalar or a canonical (upper-triangle) entry
/// of a symmetric matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Scalar(usize),
    Entry { mat: usize, i: u32, j: u32 },
}

/// Affine expression `Σ coeff·atom + constant`.
#[derive(Clone, Debug, Default)]
pub struct LinExpr {
    pub(crate) terms: Vec<(Atom, f64)>,
    pub(crate) constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(atom: Atom, coeff: f64) -> Self {
        LinExpr {
            terms: vec![(atom, coeff)],
            constant: 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn push(&mut self, atom: Atom, coeff: f64) {
        self.terms.push((atom, coeff));
    }

    pub fn scaled(mut self, f: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= f;
        }
        self.constant *= f;
        self
    }
}

impl std::ops::Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
        self
    }
}

impl std::ops::Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + rhs.scaled(-1.0)
    }
}

impl std::ops::Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl std::ops::Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: f64) -> LinExpr {
        self.constant -= rhs;
        self
    }
}

impl std::ops::Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

struct MatMeta {
    #[allow(dead_code)]
    name: String,
    dim: usize,
    psd: bool,
}

/// A conic program: scalars, symmetric matrix variables, linear rows, PSD
/// constraints, and a linear objective. Immutable once built; solving is
/// reentrant.
pub struct ConicProgram {
    sense: Sense,
    scalar_names: Vec<String>,
    scalar_lower: Vec<f64>,
    scalar_upper: Vec<f64>,
    mats: Vec<MatMeta>,
    rows: Vec<(LinExpr, RowOp)>,
    objective: LinExpr,
}

impl ConicProgram {
    pub fn new(sense: Sense) -> Self {
        ConicProgram {
            sense,
            scalar_names: Vec::new(),
            scalar_lower: Vec::new(),
            scalar_upper: Vec::new(),
            mats: Vec::new(),
            rows: Vec::new(),
            objective: LinExpr::zero(),
        }
    }

    pub fn add_scalar(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> ScalarVar {
        self.scalar_names.push(name.into());
        self.scalar_lower.push(lower);
        self.scalar_upper.push(upper);
        ScalarVar(self.scalar_names.len() - 1)
    }

    pub fn scalar(&self, v: ScalarVar) -> LinExpr {
        LinExpr::term(Atom::Scalar(v.0), 1.0)
    }

    /// Declare a symmetric `dim × dim` matrix variable, optionally PSD.
    pub fn add_symmetric(&mut self, name: impl Into<String>, dim: usize, psd: bool) -> MatrixVar {
        self.mats.push(MatMeta {
            name: name.into(),
            dim,
            psd,
        });
        MatrixVar {
            id: self.mats.len() - 1,
            dim,
        }
    }

    /// Canonical entry accessor; `(i,j)` and `(j,i)` are the same variable.
    pub fn entry(&self, m: MatrixVar, i: usize, j: usize) -> LinExpr {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        LinExpr::term(
            Atom::Entry {
                mat: m.id,
                i: i as u32,
                j: j as u32,
            },
            1.0,
        )
    }

    /// Declare a complex Hermitian `d × d` PSD block as its real `2d × 2d`
    /// embedding `[[Re, −Im],[Im, Re]]`, with the rows enforcing the block
    /// structure. `H ⪰ 0` iff the embedding is PSD, with doubled spectrum.
    pub fn add_hermitian_psd(&mut self, name: impl Into<String>, d: usize) -> HermitianBlock {
        let mat = self.add_symmetric(name, 2 * d, true);
        // same Re block in both diagonal positions
        for i in 0..d {
            for j in i..d {
                let row = self.entry(mat, i, j) - self.entry(mat, d + i, d + j);
                self.add_row(row, RowOp::Eq);
            }
        }
        // upper-right block is antisymmetric (it carries −Im H)
        for i in 0..d {
            self.add_row(self.entry(mat, i, d + i), RowOp::Eq);
            for j in (i + 1)..d {
                let row = self.entry(mat, i, d + j) + self.entry(mat, j, d + i);
                self.add_row(row, RowOp::Eq);
            }
        }
        HermitianBlock { mat, d }
    }

    /// Add `expr OP 0`.
    pub fn add_row(&mut self, expr: LinExpr, op: RowOp) {
        self.rows.push((expr, op));
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.objective = expr;
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn solve(&self, gap_tol: f64) -> SdpSolution {
        self.solve_with(&SdpSettings {
            gap_tol,
            ..SdpSettings::default()
        })
    }

    pub fn solve_default(&self) -> SdpSolution {
        self.solve_with(&SdpSettings::default())
    }

    pub fn solve_with(&self, settings: &SdpSettings) -> SdpSolution {
        lower_and_solve(self, settings)
    }
}

/// Accessors for a Hermitian block declared with
/// [`ConicProgram::add_hermitian_psd`].
#[derive(Clone, Copy, Debug)]
pub struct HermitianBlock {
    mat: MatrixVar,
    d: usize,
}

impl HermitianBlock {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix_var(&self) -> MatrixVar {
        self.mat
    }

    /// `Re H_ij` (symmetric in `i,j`).
    pub fn re(&self, i: usize, j: usize) -> LinExpr {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        LinExpr::term(
            Atom::Entry {
                mat: self.mat.id,
                i: i as u32,
                j: j as u32,
            },
            1.0,
        )
    }

    /// `Im H_ij` (antisymmetric in `i,j`; zero on the diagonal).
    pub fn im(&self, i: usize, j: usize) -> LinExpr {
        // Im H_ij = −(upper-right block)_ij; the embedding stores −Im H there.
        let (a, b, sign) = if i <= j {
            (i, self.d + j, -1.0)
        } else {
            (j, self.d + i, 1.0)
        };
        LinExpr::term(
            Atom::Entry {
                mat: self.mat.id,
                i: a as u32,
                j: b as u32,
            },
            sign,
        )
    }
}

/// The real embedding `[[Re H, −Im H],[Im H, Re H]]` as a plain matrix, for
/// spectral checks.
pub fn hermitian_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let d = h.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = h[(i, j)].re;
            out[(d + i, d + j)] = h[(i, j)].re;
            out[(i, d + j)] = -h[(i, j)].im;
            out[(d + i, j)] = h[(i, j)].im;
        }
    }
    out
}

/// Solver knobs. Defaults: feasibility 1e-8, duality gap 1e-7.
#[derive(Clone, Debug)]
pub struct SdpSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: u32,
    pub presolve: bool,
    pub chordal: bool,
    /// Override of the backend's static KKT regularization. `None` keeps
    /// the backend default; programs without a strictly feasible point
    /// (pinned rank-deficient anchors) need a stronger value to converge.
    pub static_reg: Option<f64>,
    pub verbose: bool,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            max_iter: 200,
            presolve: true,
            chordal: true,
            static_reg: None,
            verbose: false,
        }
    }
}

/// Solved conic program with lookups back into the IR's atoms.
pub struct SdpSolution {
    report: SolveReport,
    resolver: Resolver,
}

impl SdpSolution {
    pub fn report(&self) -> &SolveReport {
        &self.report
    }

    pub fn status(&self) -> SolveStatus {
        self.report.status
    }

    /// Safe-side objective value (see [`SolveReport::objective`]).
    pub fn objective(&self) -> f64 {
        self.report.objective
    }

    pub fn scalar_value(&self, v: ScalarVar) -> f64 {
        self.resolver.atom_value(Atom::Scalar(v.0))
    }

    pub fn expr_value(&self, e: &LinExpr) -> f64 {
        e.terms
            .iter()
            .map(|&(a, c)| c * self.resolver.atom_value(a))
            .sum::<f64>()
            + e.constant
    }

    /// Reconstruct a symmetric matrix variable from the solution.
    pub fn matrix_value(&self, m: MatrixVar) -> DMatrix<f64> {
        let d = m.dim;
        DMatrix::from_fn(d, d, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            self.resolver.atom_value(Atom::Entry {
                mat: m.id,
                i: i as u32,
                j: j as u32,
            })
        })
    }
}

// ---------------------------------------------------------------------------
// lowering
// ---------------------------------------------------------------------------

/// Union-find over interned atoms with a ±1 relation sign and value pins.
struct Uf {
    parent: Vec<usize>,
    sign: Vec<f64>,
    pin: Vec<Option<f64>>, // valid on roots
    conflict: bool,
}

impl Uf {
    fn new(n: usize) -> Self {
        Uf {
            parent: (0..n).collect(),
            sign: vec![1.0; n],
            pin: vec![None; n],
            conflict: false,
        }
    }

    /// Returns `(root, s)` with `atom = s · root`.
    fn find(&mut self, x: usize) -> (usize, f64) {
        if self.parent[x] == x {
            return (x, self.sign[x]);
        }
        let (r, s) = self.find(self.parent[x]);
        self.parent[x] = r;
        self.sign[x] *= s;
        (r, self.sign[x])
    }

    /// Impose `a = rel · b`.
    fn union(&mut self, a: usize, b: usize, rel: f64) {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            // consistency: sa·ra = rel·sb·ra must not force ra = −ra ≠ 0
            if (sa - rel * sb).abs() > 1e-12 {
                // ra is forced to zero
                self.pin_root(ra, 0.0);
            }
            return;
        }
        // ra = (rel·sb/sa) rb
        let w = rel * sb / sa;
        self.parent[ra] = rb;
        self.sign[ra] = w;
        if let Some(v) = self.pin[ra].take() {
            // pinned value transfers to the new root
            self.pin_root(rb, v / w);
        }
    }

    fn pin_root(&mut self, r: usize, value: f64) {
        match self.pin[r] {
            None => self.pin[r] = Some(value),
            Some(v) => {
                if (v - value).abs() > 1e-9 {
                    self.conflict = true;
                }
            }
        }
    }

    fn pinned(&mut self, x: usize) -> Option<f64> {
        let (r, s) = self.find(x);
        self.pin[r].map(|v| s * v)
    }
}

struct Interner {
    map: HashMap<Atom, usize>,
    atoms: Vec<Atom>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            map: HashMap::new(),
            atoms: Vec::new(),
        }
    }
    fn intern(&mut self, a: Atom) -> usize {
        if let Some(&i) = self.map.get(&a) {
            return i;
        }
        let i = self.atoms.len();
        self.map.insert(a, i);
        self.atoms.push(a);
        i
    }
}

struct Resolver {
    interner: Interner,
    uf: Uf,
    col_of_root: HashMap<usize, usize>,
    x: Vec<f64>,
}

impl Resolver {
    fn atom_value(&self, a: Atom) -> f64 {
        let Some(&idx) = self.interner.map.get(&a) else {
            return 0.0; // never referenced by the program: unconstrained
        };
        // non-mutating find
        let (mut cur, mut s) = (idx, 1.0);
        while self.uf.parent[cur] != cur {
            s *= self.uf.sign[cur];
            cur = self.uf.parent[cur];
        }
        if let Some(v) = self.uf.pin[cur] {
            return s * v;
        }
        match self.col_of_root.get(&cur) {
            Some(&c) => s * self.x[c],
            None => 0.0,
        }
    }
}

#[allow(clippy::field_reassign_with_default)]
fn lower_and_solve(prog: &ConicProgram, settings: &SdpSettings) -> SdpSolution {
    let mut interner = Interner::new();

    // intern every PSD matrix entry up-front so the cone map is complete
    for (mid, meta) in prog.mats.iter().enumerate() {
        if meta.psd {
            for j in 0..meta.dim {
                for i in 0..=j {
                    interner.intern(Atom::Entry {
                        mat: mid,
                        i: i as u32,
                        j: j as u32,
                    });
                }
            }
        }
    }
    for (expr, _) in &prog.rows {
        for &(a, _) in &expr.terms {
            interner.intern(a);
        }
    }
    for &(a, _) in &prog.objective.terms {
        interner.intern(a);
    }
    for s in 0..prog.scalar_names.len() {
        interner.intern(Atom::Scalar(s));
    }

    let n_atoms = interner.atoms.len();
    let mut uf = Uf::new(n_atoms);

    // resolve a row through the current uf: fold into (root → coeff, const)
    let resolve = |uf: &mut Uf, interner: &Interner, expr: &LinExpr| -> (Vec<(usize, f64)>, f64) {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        let mut constant = expr.constant;
        for &(a, c) in &expr.terms {
            let idx = interner.map[&a];
            let (r, s) = uf.find(idx);
            if let Some(v) = uf.pin[r] {
                constant += c * s * v;
            } else {
                *acc.entry(r).or_insert(0.0) += c * s;
            }
        }
        let mut terms: Vec<(usize, f64)> =
            acc.into_iter().filter(|&(_, c)| c.abs() > 1e-12).collect();
        terms.sort_unstable_by_key(|&(r, _)| r);
        (terms, constant)
    };

    // structural presolve to fixpoint (equality rows only)
    let mut live_rows: Vec<(LinExpr, RowOp)> = Vec::new();
    let mut infeasible = false;
    if settings.presolve {
        let mut pending: Vec<usize> = (0..prog.rows.len())
            .filter(|&ri| prog.rows[ri].1 == RowOp::Eq)
            .collect();
        loop {
            let mut remaining = Vec::new();
            let mut progress = false;
            for &ri in &pending {
                let (expr, _) = &prog.rows[ri];
                let (terms, constant) = resolve(&mut uf, &interner, expr);
                match terms.len() {
                    0 => {
                        if constant.abs() > 1e-9 {
                            infeasible = true;
                        }
                        progress = true;
                    }
                    1 => {
                        let (r, c) = terms[0];
                        uf.pin_root(r, -constant / c);
                        progress = true;
                    }
                    2 if constant.abs() < 1e-12
                        && (terms[0].1.abs() - terms[1].1.abs()).abs() < 1e-12 =>
                    {
                        let (r1, c1) = terms[0];
                        let (r2, c2) = terms[1];
                        // c1·r1 + c2·r2 = 0  →  r1 = (−c2/c1)·r2
                        uf.union(r1, r2, -c2 / c1);
                        progress = true;
                    }
                    _ => remaining.push(ri),
                }
            }
            pending = remaining;
            if !progress || pending.is_empty() {
                break;
            }
        }
        if uf.conflict {
            infeasible = true;
        }
        for &ri in &pending {
            live_rows.push(prog.rows[ri].clone());
        }
        for (expr, op) in &prog.rows {
            if *op != RowOp::Eq {
                live_rows.push((expr.clone(), *op));
            }
        }
    } else {
        live_rows = prog.rows.clone();
    }

    if infeasible {
        return SdpSolution {
            report: SolveReport::failed(SolveStatus::Infeasible),
            resolver: Resolver {
                interner,
                uf,
                col_of_root: HashMap::new(),
                x: Vec::new(),
            },
        };
    }

    // enumerate free columns: every unpinned root that occurs in PSD cones,
    // remaining rows, the objective, or scalar bounds
    let mut col_of_root: HashMap<usize, usize> = HashMap::new();
    let mut ncols = 0usize;
    {
        let mut touch = |uf: &mut Uf, idx: usize, col_of_root: &mut HashMap<usize, usize>| {
            let (r, _) = uf.find(idx);
            if uf.pin[r].is_none() && !col_of_root.contains_key(&r) {
                col_of_root.insert(r, ncols);
                ncols += 1;
            }
        };
        for (mid, meta) in prog.mats.iter().enumerate() {
            if meta.psd {
                for j in 0..meta.dim {
                    for i in 0..=j {
                        let idx = interner.map[&Atom::Entry {
                            mat: mid,
                            i: i as u32,
                            j: j as u32,
                        }];
                        touch(&mut uf, idx, &mut col_of_root);
                    }
                }
            }
        }
        for (expr, _) in &live_rows {
            for &(a, _) in &expr.terms {
                touch(&mut uf, interner.map[&a], &mut col_of_root);
            }
        }
        for &(a, _) in &prog.objective.terms {
            touch(&mut uf, interner.map[&a], &mut col_of_root);
        }
        for s in 0..prog.scalar_names.len() {
            if prog.scalar_lower[s].is_finite() || prog.scalar_upper[s].is_finite() {
                touch(&mut uf, interner.map[&Atom::Scalar(s)], &mut col_of_root);
            }
        }
    }

    // objective (lowered to min form)
    let min_sign = match prog.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut q = vec![0.0; ncols];
    let mut obj_const = prog.objective.constant;
    for &(a, c) in &prog.objective.terms {
        let idx = interner.map[&a];
        let (r, s) = uf.find(idx);
        if let Some(v) = uf.pin[r] {
            obj_const += c * s * v;
        } else {
            q[col_of_root[&r]] += min_sign * c * s;
        }
    }

    // assemble constraint rows: equalities, then inequalities, then PSD cones
    let mut ti: Vec<usize> = Vec::new();
    let mut tj: Vec<usize> = Vec::new();
    let mut tv: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    let mut nrow = 0usize;

    let emit = |terms: &[(usize, f64)],
                constant: f64,
                flip: f64,
                ti: &mut Vec<usize>,
                tj: &mut Vec<usize>,
                tv: &mut Vec<f64>,
                b: &mut Vec<f64>,
                nrow: &mut usize,
                col_of_root: &HashMap<usize, usize>| {
        for &(r, c) in terms {
            ti.push(*nrow);
            tj.push(col_of_root[&r]);
            tv.push(flip * c);
        }
        b.push(-flip * constant);
        *nrow += 1;
    };

    let mut n_eq = 0usize;
    for (expr, op) in &live_rows {
        if *op != RowOp::Eq {
            continue;
        }
        let (terms, constant) = resolve(&mut uf, &interner, expr);
        if terms.is_empty() {
            if constant.abs() > 1e-9 {
                infeasible = true;
            }
            continue;
        }
        emit(
            &terms,
            constant,
            1.0,
            &mut ti,
            &mut tj,
            &mut tv,
            &mut b,
            &mut nrow,
            &col_of_root,
        );
        n_eq += 1;
    }

    let mut n_ineq = 0usize;
    for (expr, op) in &live_rows {
        let flip = match op {
            RowOp::Eq => continue,
            RowOp::Le => 1.0,
            RowOp::Ge => -1.0,
        };
        let (terms, constant) = resolve(&mut uf, &interner, expr);
        if terms.is_empty() {
            if flip * constant > 1e-9 {
                infeasible = true;
            }
            continue;
        }
        emit(
            &terms,
            constant,
            flip,
            &mut ti,
            &mut tj,
            &mut tv,
            &mut b,
            &mut nrow,
            &col_of_root,
        );
        n_ineq += 1;
    }
    // scalar bounds
    for s in 0..prog.scalar_names.len() {
        let idx = interner.map[&Atom::Scalar(s)];
        let (lo, hi) = (prog.scalar_lower[s], prog.scalar_upper[s]);
        if let Some(v) = uf.pinned(idx) {
            if (lo.is_finite() && v < lo - 1e-9) || (hi.is_finite() && v > hi + 1e-9) {
                infeasible = true;
            }
            continue;
        }
        let (r, sign) = uf.find(idx);
        let col = col_of_root[&r];
        if lo.is_finite() {
            // sign·root ≥ lo  →  −sign·root ≤ −lo
            ti.push(nrow);
            tj.push(col);
            tv.push(-sign);
            b.push(-lo);
            nrow += 1;
            n_ineq += 1;
        }
        if hi.is_finite() {
            ti.push(nrow);
            tj.push(col);
            tv.push(sign);
            b.push(hi);
            nrow += 1;
            n_ineq += 1;
        }
    }

    if infeasible {
        return SdpSolution {
            report: SolveReport::failed(SolveStatus::Infeasible),
            resolver: Resolver {
                interner,
                uf,
                col_of_root,
                x: Vec::new(),
            },
        };
    }

    if n_eq > 0 {
        cones.insert(0, SupportedConeT::ZeroConeT(n_eq));
    }
    if n_ineq > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(n_ineq));
    }

    // PSD cones: s = svec(M) with √2-scaled off-diagonals, column-major
    // upper triangle
    let sqrt2 = std::f64::consts::SQRT_2;
    for (mid, meta) in prog.mats.iter().enumerate() {
        if !meta.psd {
            continue;
        }
        for j in 0..meta.dim {
            for i in 0..=j {
                let scale = if i == j { 1.0 } else { sqrt2 };
                let idx = interner.map[&Atom::Entry {
                    mat: mid,
                    i: i as u32,
                    j: j as u32,
                }];
                let (r, s) = uf.find(idx);
                if let Some(v) = uf.pin[r] {
                    b.push(scale * s * v);
                } else {
                    ti.push(nrow);
                    tj.push(col_of_root[&r]);
                    tv.push(-scale * s);
                    b.push(0.0);
                }
                nrow += 1;
            }
        }
        cones.push(SupportedConeT::PSDTriangleConeT(meta.dim));
    }

    let a_mat = CscMatrix::new_from_triplets(nrow, ncols, ti, tj, tv);
    let p_mat = CscMatrix::<f64>::zeros((ncols, ncols));

    let mut cl = DefaultSettings::default();
    cl.verbose = settings.verbose;
    cl.max_iter = settings.max_iter;
    cl.tol_gap_abs = settings.gap_tol;
    cl.tol_gap_rel = settings.gap_tol;
    cl.tol_feas = settings.feas_tol;
    // Degenerate Gram programs (rank-deficient anchors, zero-error pins)
    // have no strictly feasible point and the central path may stall close
    // to the optimum. Let such runs terminate as near-optimal with their
    // achieved gap instead of a numerical error; the reported bound stays
    // on the certificate side either way.
    cl.reduced_tol_gap_abs = 5e-4;
    cl.reduced_tol_gap_rel = 5e-4;
    cl.reduced_tol_feas = 1e-6;
    cl.chordal_decomposition_enable = settings.chordal;
    cl.static_regularization_constant = 1e-7;
    cl.chordal_decomposition_merge_method = "none".to_string();
    // KNOB_EXPERIMENT
    // Rank-deficient anchors (vacuum programs, linearly dependent
    // single-photon states) leave the KKT system nearly singular; a slightly
    // stronger static regularization lets those instances converge to full
    // accuracy instead of stalling at ~1e-4 gaps.
    cl.static_regularization_constant = 1e-7;

    let mut solver = match DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, cl) {
        Ok(s) => s,
        Err(_) => {
            return SdpSolution {
                report: SolveReport::failed(SolveStatus::NumericalFailure),
                resolver: Resolver {
                    interner,
                    uf,
                    col_of_root,
                    x: Vec::new(),
                },
            }
        }
    };
    solver.solve();
    let sol = &solver.solution;

    let status = match sol.status {
        ClarabelStatus::Solved => SolveStatus::Optimal,
        ClarabelStatus::AlmostSolved => SolveStatus::NearOptimal,
        ClarabelStatus::PrimalInfeasible | ClarabelStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        ClarabelStatus::DualInfeasible | ClarabelStatus::AlmostDualInfeasible => {
            SolveStatus::Unbounded
        }
        _ => SolveStatus::NumericalFailure,
    };

    let resolver = Resolver {
        interner,
        uf,
        col_of_root,
        x: sol.x.clone(),
    };

    let report = if status.is_usable() {
        // map back to the user's sense: user = min_sign·min_obj + const
        let primal = min_sign * sol.obj_val + obj_const;
        let dual = if sol.obj_val_dual.is_finite() {
            Some(min_sign * sol.obj_val_dual + obj_const)
        } else {
            None
        };
        let values: Vec<f64> = (0..prog.scalar_names.len())
            .map(|s| resolver.atom_value(Atom::Scalar(s)))
            .collect();
        SolveReport::new(
            status,
            prog.sense,
            primal,
            dual,
            prog.scalar_names.clone(),
            values,
        )
    } else {
        SolveReport::failed(status)
    };

    SdpSolution { report, resolver }
}
