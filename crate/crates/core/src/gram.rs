//! Gram-matrix semidefinite relaxations for mode discrimination.
//!
//! For operators `O = {1, M_1, …, M_N}` (plus the inconclusive `M_∅` for
//! unambiguous discrimination) and states `{|ψ_j⟩}`, the Gram matrix of the
//! vector set `{O_i|ψ_j⟩}` is PSD, and all quantities of interest are linear
//! in its entries. The measurement structure enters through a fixed ledger
//! of linear constraints:
//!
//! 1. identity-block anchoring of `⟨ψ_i|ψ_j⟩` — exact powers `k_ijⁿ` in the
//!    per-Fock programs, or the truncated sum `Σ p_n k_ijⁿ` within the tail
//!    slack `ε_ij` in the channel programs;
//! 2. projectivity `G[(m,i),(m,j)] = G[(0,i),(m,j)]`;
//! 3. mutual orthogonality `G[(m,i),(m′,j)] = 0` for `m ≠ m′`;
//! 4. completeness `Σ_m G[(m,i),(o,j)] = G[(0,i),(o,j)]` for every operator;
//! 5. Hermiticity (structural);
//! 6. diagonal normalization of the identity block.
//!
//! With a single receiver this first relaxation level is tight, which is
//! what the two-mode closed-form oracles verify.
//!
//! # Solve strategies
//!
//! The ledger pins the Gram matrix into a block-arrow shape whose PSD
//! constraint is exactly equivalent to per-outcome blocks `B_m ⪰ 0` tied by
//! `Σ_m B_m = A` (take `B_m = L_m L_m†` and stack `v_{0,j} = ⊕_m L_m† e_j`,
//! `v_{m,j} = L_m† e_j` in slot `m` to realize any such blocks as a valid
//! Gram matrix; conversely diagonal blocks of a PSD matrix are PSD). Large
//! programs are therefore solved in that split form, which the interior
//! point method handles in a fraction of the time; both routes are kept and
//! tested against each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::conic::{
    ConicProgram, HermitianBlock, LinExpr, MatrixVar, RowOp, ScalarVar, SdpSettings, SdpSolution,
    Sense,
};
use crate::fock::EnergyConstraint;
use crate::modes::{ModeFamily, REAL_ENTRY_TOL};
use crate::{BoundResult, Error, Result, Scenario, Task};

/// Above this matrix dimension (after complex embedding) the split lowering
/// is used by default.
const SPLIT_DIM_THRESHOLD: usize = 48;

/// Which anchoring the Gram program uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GramScenario {
    /// Variable photon-number weights with tail-slack anchors.
    Channel { nbar: f64, n_max: usize },
    /// Exact anchors `k_ijⁿ` at a fixed photon number.
    Fock { n: usize },
}

/// How to lower the program for the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolveStrategy {
    /// Pick by problem size.
    #[default]
    Auto,
    /// Solve the ledger program on the full `(ops·N)`-dimensional cone.
    Literal,
    /// Solve the equivalent per-outcome block form.
    Split,
}

enum GramVar {
    Real(MatrixVar),
    Complex(HermitianBlock),
}

/// A built (not yet solved) Gram-matrix SDP.
pub struct GramProgram {
    family: ModeFamily,
    n_states: usize,
    ops: usize,
    task: Task,
    scenario: GramScenario,
    program: ConicProgram,
    gram: GramVar,
    p_vars: Vec<ScalarVar>,
}

/// Probabilistic channel-scenario program (Gram dimension `(N+1)·N`).
pub fn build_channel_prob(family: &ModeFamily, ec: &EnergyConstraint) -> Result<GramProgram> {
    build(
        family,
        Task::Probabilistic,
        GramScenario::Channel {
            nbar: ec.nbar(),
            n_max: ec.n_max(),
        },
    )
}

/// Unambiguous channel-scenario program (Gram dimension `(N+2)·N`).
pub fn build_channel_ud(family: &ModeFamily, ec: &EnergyConstraint) -> Result<GramProgram> {
    build(
        family,
        Task::Unambiguous,
        GramScenario::Channel {
            nbar: ec.nbar(),
            n_max: ec.n_max(),
        },
    )
}

/// Per-photon-number probabilistic program with exact anchors.
pub fn build_fock_prob(family: &ModeFamily, n: usize) -> Result<GramProgram> {
    build(family, Task::Probabilistic, GramScenario::Fock { n })
}

/// Per-photon-number unambiguous program with exact anchors and per-state
/// zero-error rows.
pub fn build_fock_ud(family: &ModeFamily, n: usize) -> Result<GramProgram> {
    build(family, Task::Unambiguous, GramScenario::Fock { n })
}

/// Build and solve a channel-scenario bound in one step.
pub fn channel_bound(
    family: &ModeFamily,
    ec: &EnergyConstraint,
    task: Task,
) -> Result<BoundResult> {
    channel_bound_with(family, ec, task, &SdpSettings::default())
}

/// [`channel_bound`] with explicit solver settings.
pub fn channel_bound_with(
    family: &ModeFamily,
    ec: &EnergyConstraint,
    task: Task,
    settings: &SdpSettings,
) -> Result<BoundResult> {
    let prog = match task {
        Task::Probabilistic => build_channel_prob(family, ec)?,
        Task::Unambiguous => build_channel_ud(family, ec)?,
    };
    prog.solve_with(settings)
}

/// Shared emission of the photon-weight variables and their feasibility rows.
fn add_weight_vars(prog: &mut ConicProgram, nbar: f64, n_max: usize) -> Result<Vec<ScalarVar>> {
    let ec = EnergyConstraint::new(nbar, n_max)?;
    let p_vars: Vec<ScalarVar> = (0..=n_max)
        .map(|n| prog.add_scalar(format!("p{n}"), 0.0, f64::INFINITY))
        .collect();
    let mut mass = LinExpr::zero();
    for &v in &p_vars {
        mass = mass + prog.scalar(v);
    }
    prog.add_row(mass - 1.0, RowOp::Le);
    let row = ec.relaxed_energy_row();
    let mut energy = LinExpr::constant(-row.rhs);
    for (n, &v) in p_vars.iter().enumerate() {
        energy = energy + prog.scalar(v).scaled(row.coeffs[n]);
    }
    prog.add_row(energy, RowOp::Ge);
    Ok(p_vars)
}

/// Shared emission of one identity-block anchor (ledger items 1 and 6): the
/// expression pair `(re, im)` for `⟨ψ_i|ψ_j⟩` gets tied to the truncated
/// inner product within the tail slack (channel) or pinned to `k_ijⁿ`
/// (per-Fock).
#[allow(clippy::too_many_arguments)]
fn anchor_state_overlap(
    prog: &mut ConicProgram,
    scenario: GramScenario,
    p_vars: &[ScalarVar],
    real_family: bool,
    i: usize,
    j: usize,
    k: Complex64,
    a_re: LinExpr,
    a_im: LinExpr,
) {
    match scenario {
        GramScenario::Fock { n } => {
            let kn = k.powu(n as u32);
            prog.add_row(a_re - kn.re, RowOp::Eq);
            if !real_family {
                prog.add_row(a_im - kn.im, RowOp::Eq);
            }
        }
        GramScenario::Channel { n_max, .. } => {
            // target Σ p_n k^n and slack ε = |k|^{n_max+1}(1 − Σ p_n)
            let mut t_re = LinExpr::zero();
            let mut t_im = LinExpr::zero();
            let mut pow = Complex64::new(1.0, 0.0);
            for &v in p_vars {
                t_re = t_re + prog.scalar(v).scaled(pow.re);
                t_im = t_im + prog.scalar(v).scaled(pow.im);
                pow *= k;
            }
            let tail = k.norm().powi(n_max as i32 + 1);
            let mut eps = LinExpr::constant(tail);
            for &v in p_vars {
                eps = eps + prog.scalar(v).scaled(-tail);
            }
            let z_re = a_re - t_re;
            if k.im.abs() <= REAL_ENTRY_TOL {
                // |Re z| ≤ ε as two linear rows
                prog.add_row(z_re.clone() - eps.clone(), RowOp::Le);
                prog.add_row(z_re + eps, RowOp::Ge);
            } else {
                // [[ε, z],[z̄, ε]] ⪰ 0 captures |z| ≤ ε
                let z_im = a_im - t_im;
                let anchor = prog.add_hermitian_psd(format!("anchor_{i}_{j}"), 2);
                prog.add_row(anchor.re(0, 0) - eps.clone(), RowOp::Eq);
                prog.add_row(anchor.re(1, 1) - eps, RowOp::Eq);
                prog.add_row(anchor.re(0, 1) - z_re, RowOp::Eq);
                prog.add_row(anchor.im(0, 1) - z_im, RowOp::Eq);
            }
        }
    }
}

fn build(family: &ModeFamily, task: Task, scenario: GramScenario) -> Result<GramProgram> {
    let n_states = family.n_modes();
    let ops = match task {
        Task::Probabilistic => n_states + 1,
        Task::Unambiguous => n_states + 2,
    };
    let dim = ops * n_states;
    let real = family.is_real();

    let mut prog = ConicProgram::new(Sense::Maximize);
    let gram = if real {
        GramVar::Real(prog.add_symmetric("G", dim, true))
    } else {
        GramVar::Complex(prog.add_hermitian_psd("G", dim))
    };

    // row index of operator o applied to state i
    let idx = |o: usize, i: usize| o * n_states + i;
    let g_re = |prog: &ConicProgram, r: usize, c: usize| -> LinExpr {
        match &gram {
            GramVar::Real(m) => prog.entry(*m, r, c),
            GramVar::Complex(h) => h.re(r, c),
        }
    };
    let g_im = |_prog: &ConicProgram, r: usize, c: usize| -> LinExpr {
        match &gram {
            GramVar::Real(_) => LinExpr::zero(),
            GramVar::Complex(h) => h.im(r, c),
        }
    };

    let p_vars = match scenario {
        GramScenario::Channel { nbar, n_max } => add_weight_vars(&mut prog, nbar, n_max)?,
        GramScenario::Fock { .. } => Vec::new(),
    };

    // ledger 1 + 6: identity-block anchors (off-diagonal and diagonal)
    for i in 0..n_states {
        for j in i..n_states {
            let a_re = g_re(&prog, idx(0, i), idx(0, j));
            let a_im = g_im(&prog, idx(0, i), idx(0, j));
            anchor_state_overlap(
                &mut prog,
                scenario,
                &p_vars,
                real,
                i,
                j,
                family.overlap(i, j),
                a_re,
                a_im,
            );
        }
    }

    // ledger 2: projectivity, all measurement operators, all ordered pairs
    for m in 1..ops {
        for i in 0..n_states {
            for j in 0..n_states {
                let lhs_re = g_re(&prog, idx(m, i), idx(m, j));
                let rhs_re = g_re(&prog, idx(0, i), idx(m, j));
                prog.add_row(lhs_re - rhs_re, RowOp::Eq);
                if !real {
                    let lhs_im = g_im(&prog, idx(m, i), idx(m, j));
                    let rhs_im = g_im(&prog, idx(0, i), idx(m, j));
                    prog.add_row(lhs_im - rhs_im, RowOp::Eq);
                }
            }
        }
    }

    // ledger 3: mutual orthogonality of distinct outcomes
    for m in 1..ops {
        for mp in (m + 1)..ops {
            for i in 0..n_states {
                for j in 0..n_states {
                    prog.add_row(g_re(&prog, idx(m, i), idx(mp, j)), RowOp::Eq);
                    if !real {
                        prog.add_row(g_im(&prog, idx(m, i), idx(mp, j)), RowOp::Eq);
                    }
                }
            }
        }
    }

    // ledger 4: completeness against every operator column
    for o in 0..ops {
        for i in 0..n_states {
            for j in 0..n_states {
                let mut row_re = -g_re(&prog, idx(0, i), idx(o, j));
                let mut row_im = -g_im(&prog, idx(0, i), idx(o, j));
                for m in 1..ops {
                    row_re = row_re + g_re(&prog, idx(m, i), idx(o, j));
                    row_im = row_im + g_im(&prog, idx(m, i), idx(o, j));
                }
                prog.add_row(row_re, RowOp::Eq);
                if !real {
                    prog.add_row(row_im, RowOp::Eq);
                }
            }
        }
    }

    // zero-error rows for unambiguous discrimination
    if task == Task::Unambiguous {
        match scenario {
            GramScenario::Channel { .. } => {
                // Σ_j Σ_{i≠j} ⟨ψ_j|M_i|ψ_j⟩ = 0; each term is a PSD diagonal
                // entry, so the single row forces all of them to zero.
                let mut sum = LinExpr::zero();
                for j in 0..n_states {
                    for o in 1..=n_states {
                        if o - 1 != j {
                            sum = sum + g_re(&prog, idx(o, j), idx(o, j));
                        }
                    }
                }
                prog.add_row(sum, RowOp::Eq);
            }
            GramScenario::Fock { .. } => {
                for j in 0..n_states {
                    for o in 1..=n_states {
                        if o - 1 != j {
                            prog.add_row(g_re(&prog, idx(o, j), idx(o, j)), RowOp::Eq);
                        }
                    }
                }
            }
        }
    }

    // objective
    let priors = family.priors();
    let objective = match task {
        Task::Probabilistic => {
            let mut obj = LinExpr::zero();
            for j in 0..n_states {
                obj = obj + g_re(&prog, idx(0, j), idx(j + 1, j)).scaled(priors[j]);
            }
            obj
        }
        Task::Unambiguous => {
            let inconclusive = ops - 1;
            let mut obj = LinExpr::constant(1.0);
            for j in 0..n_states {
                obj = obj - g_re(&prog, idx(0, j), idx(inconclusive, j)).scaled(priors[j]);
            }
            obj
        }
    };
    prog.set_objective(objective);

    Ok(GramProgram {
        family: family.clone(),
        n_states,
        ops,
        task,
        scenario,
        program: prog,
        gram,
        p_vars,
    })
}

/// The split (per-outcome block) form of the same program: one PSD block
/// `B_m` per measurement operator, `Σ_m B_m` playing the role of the
/// anchored state Gram.
struct SplitProgram {
    program: ConicProgram,
    p_vars: Vec<ScalarVar>,
}

enum Block {
    Real(MatrixVar),
    Complex(HermitianBlock),
}

fn add_blocks(prog: &mut ConicProgram, count: usize, dim: usize, real: bool) -> Vec<Block> {
    (0..count)
        .map(|m| {
            if real {
                Block::Real(prog.add_symmetric(format!("B{m}"), dim, true))
            } else {
                Block::Complex(prog.add_hermitian_psd(format!("B{m}"), dim))
            }
        })
        .collect()
}

fn block_re(prog: &ConicProgram, b: &Block, i: usize, j: usize) -> LinExpr {
    match b {
        Block::Real(v) => prog.entry(*v, i, j),
        Block::Complex(h) => h.re(i, j),
    }
}

fn block_im(b: &Block, i: usize, j: usize) -> LinExpr {
    match b {
        Block::Real(_) => LinExpr::zero(),
        Block::Complex(h) => h.im(i, j),
    }
}

/// Real-valued expression for `s† b s` with a fixed complex vector `s` and a
/// Hermitian block variable `b`.
fn sandwich(prog: &ConicProgram, b: &Block, s: &[Complex64]) -> LinExpr {
    let r = s.len();
    let mut out = LinExpr::zero();
    for a in 0..r {
        let w = s[a].norm_sqr();
        if w != 0.0 {
            out = out + block_re(prog, b, a, a).scaled(w);
        }
    }
    for a in 0..r {
        for c in (a + 1)..r {
            let coupling = s[a].conj() * s[c];
            if coupling.re != 0.0 {
                out = out + block_re(prog, b, a, c).scaled(2.0 * coupling.re);
            }
            if coupling.im != 0.0 {
                out = out + block_im(b, a, c).scaled(-2.0 * coupling.im);
            }
        }
    }
    out
}

fn build_split(g: &GramProgram) -> Result<SplitProgram> {
    match g.scenario {
        GramScenario::Channel { nbar, n_max } => build_split_channel(g, nbar, n_max),
        GramScenario::Fock { n } => build_split_fock(g, n),
    }
}

fn build_split_channel(g: &GramProgram, nbar: f64, n_max: usize) -> Result<SplitProgram> {
    let n = g.n_states;
    let outcomes = g.ops - 1; // measurement operators incl. M_∅ for UD
    let real = g.family.is_real();
    let mut prog = ConicProgram::new(Sense::Maximize);
    let blocks = add_blocks(&mut prog, outcomes, n, real);
    let p_vars = add_weight_vars(&mut prog, nbar, n_max)?;

    // anchors on the summed block Σ_m B_m (the state Gram)
    for i in 0..n {
        for j in i..n {
            let mut a_re = LinExpr::zero();
            let mut a_im = LinExpr::zero();
            for b in &blocks {
                a_re = a_re + block_re(&prog, b, i, j);
                a_im = a_im + block_im(b, i, j);
            }
            anchor_state_overlap(
                &mut prog,
                g.scenario,
                &p_vars,
                real,
                i,
                j,
                g.family.overlap(i, j),
                a_re,
                a_im,
            );
        }
    }

    if g.task == Task::Unambiguous {
        let mut sum = LinExpr::zero();
        for j in 0..n {
            for m in 0..n {
                if m != j {
                    sum = sum + block_re(&prog, &blocks[m], j, j);
                }
            }
        }
        prog.add_row(sum, RowOp::Eq);
    }

    let priors = g.family.priors();
    let objective = match g.task {
        Task::Probabilistic => {
            let mut obj = LinExpr::zero();
            for j in 0..n {
                obj = obj + block_re(&prog, &blocks[j], j, j).scaled(priors[j]);
            }
            obj
        }
        Task::Unambiguous => {
            let mut obj = LinExpr::constant(1.0);
            for j in 0..n {
                obj = obj - block_re(&prog, &blocks[outcomes - 1], j, j).scaled(priors[j]);
            }
            obj
        }
    };
    prog.set_objective(objective);

    Ok(SplitProgram {
        program: prog,
        p_vars,
    })
}

/// Per-Fock split form, facially reduced onto the range of the anchor
/// matrix `A = k∘ⁿ`: with `A = S†S` (`S` of full row rank `r`), feasible
/// blocks are exactly `B_m = S† b_m S` with `b_m ⪰ 0` and `Σ_m b_m = I_r`.
/// This restores a strictly feasible interior when the `n`-photon states
/// are linearly dependent, where the unreduced form makes the interior
/// point method stall.
fn build_split_fock(g: &GramProgram, n_photons: usize) -> Result<SplitProgram> {
    let n = g.n_states;
    let outcomes = g.ops - 1;
    let real = g.family.is_real();

    // anchor matrix and its range factorization S (columns = state
    // coordinates, S†S = A). Real families use a real eigendecomposition so
    // the coordinates stay real.
    let rank_floor = |vals: &[f64]| -> f64 {
        let lambda_max = vals.iter().copied().fold(0.0, f64::max);
        (1e-12 * lambda_max).max(1e-14)
    };
    let s_cols: Vec<Vec<Complex64>> = if real {
        let a = DMatrix::<f64>::from_fn(n, n, |i, j| {
            g.family.overlap(i, j).powu(n_photons as u32).re
        });
        let eig = a.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let floor = rank_floor(&vals);
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > floor).collect();
        (0..n)
            .map(|j| {
                keep.iter()
                    .map(|&ei| Complex64::new(eig.eigenvectors[(j, ei)] * vals[ei].sqrt(), 0.0))
                    .collect()
            })
            .collect()
    } else {
        let a = DMatrix::from_fn(n, n, |i, j| g.family.overlap(i, j).powu(n_photons as u32));
        let eig = a.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let floor = rank_floor(&vals);
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > floor).collect();
        (0..n)
            .map(|j| {
                keep.iter()
                    .map(|&ei| eig.eigenvectors[(j, ei)].conj() * vals[ei].sqrt())
                    .collect()
            })
            .collect()
    };
    let r = s_cols[0].len();

    let mut prog = ConicProgram::new(Sense::Maximize);
    let blocks = add_blocks(&mut prog, outcomes, r, real);

    // completeness on the reduced coordinates: Σ_m b_m = I_r
    for i in 0..r {
        for j in i..r {
            let target = if i == j { 1.0 } else { 0.0 };
            let mut row_re = LinExpr::constant(-target);
            for b in &blocks {
                row_re = row_re + block_re(&prog, b, i, j);
            }
            prog.add_row(row_re, RowOp::Eq);
            if !real && i != j {
                let mut row_im = LinExpr::zero();
                for b in &blocks {
                    row_im = row_im + block_im(b, i, j);
                }
                prog.add_row(row_im, RowOp::Eq);
            }
        }
    }

    if g.task == Task::Unambiguous {
        for j in 0..n {
            for m in 0..n {
                if m != j {
                    prog.add_row(sandwich(&prog, &blocks[m], &s_cols[j]), RowOp::Eq);
                }
            }
        }
    }

    let priors = g.family.priors();
    let objective = match g.task {
        Task::Probabilistic => {
            let mut obj = LinExpr::zero();
            for j in 0..n {
                obj = obj + sandwich(&prog, &blocks[j], &s_cols[j]).scaled(priors[j]);
            }
            obj
        }
        Task::Unambiguous => {
            let mut obj = LinExpr::constant(1.0);
            for j in 0..n {
                obj = obj - sandwich(&prog, &blocks[outcomes - 1], &s_cols[j]).scaled(priors[j]);
            }
            obj
        }
    };
    prog.set_objective(objective);

    Ok(SplitProgram {
        program: prog,
        p_vars: Vec::new(),
    })
}

impl GramProgram {
    /// Gram dimension: `operator_count × N`.
    pub fn gram_dim(&self) -> usize {
        self.ops * self.n_states
    }

    pub fn operator_count(&self) -> usize {
        self.ops
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn scenario(&self) -> GramScenario {
        self.scenario
    }

    fn embedded_dim(&self) -> usize {
        if self.family.is_real() {
            self.gram_dim()
        } else {
            2 * self.gram_dim()
        }
    }

    pub fn solve(&self) -> Result<BoundResult> {
        self.solve_with(&SdpSettings::default())
    }

    pub fn solve_with(&self, settings: &SdpSettings) -> Result<BoundResult> {
        self.solve_strategy(settings, SolveStrategy::Auto)
    }

    pub fn solve_strategy(
        &self,
        settings: &SdpSettings,
        strategy: SolveStrategy,
    ) -> Result<BoundResult> {
        let use_split = match strategy {
            SolveStrategy::Literal => false,
            SolveStrategy::Split => true,
            SolveStrategy::Auto => self.embedded_dim() > SPLIT_DIM_THRESHOLD,
        };
        let settings = self.tuned(settings);
        if use_split {
            let split = build_split(self)?;
            let sol = split.program.solve_with(&settings);
            self.bound_from_parts(
                sol.report().status.is_usable().then_some(&sol),
                &split.p_vars,
            )
        } else {
            let sol = self.program.solve_with(&settings);
            self.bound_from(&sol)
        }
    }

    /// Per-Fock anchors can be rank deficient (no strictly feasible point);
    /// those programs get a stronger static regularization so the interior
    /// point method converges instead of stalling. Channel programs keep
    /// the backend default, which preserves ~1e-7 agreement between
    /// conjugated (relabeled) instances.
    fn tuned(&self, settings: &SdpSettings) -> SdpSettings {
        let mut s = settings.clone();
        if s.static_reg.is_none() {
            if let GramScenario::Fock { .. } = self.scenario {
                s.static_reg = Some(1e-7);
            }
        }
        s
    }

    /// Run the solver on the literal ledger program and keep the full
    /// solution (for Gram-matrix checks).
    pub fn solve_raw(&self, settings: &SdpSettings) -> SdpSolution {
        self.program.solve_with(&self.tuned(settings))
    }

    /// Extract the bound from a solved literal program.
    pub fn bound_from(&self, sol: &SdpSolution) -> Result<BoundResult> {
        let usable = sol.report().status.is_usable();
        self.bound_from_parts(usable.then_some(sol), &self.p_vars)
    }

    fn bound_from_parts(
        &self,
        sol: Option<&SdpSolution>,
        p_vars: &[ScalarVar],
    ) -> Result<BoundResult> {
        let Some(sol) = sol else {
            return Err(Error::Solver {
                status: crate::SolveStatus::NumericalFailure,
                detail: format!(
                    "gram program ({:?}, {:?}, N={})",
                    self.task, self.scenario, self.n_states
                ),
            });
        };
        let report = sol.report();
        if !report.status.is_usable() {
            return Err(Error::Solver {
                status: report.status,
                detail: format!(
                    "gram program ({:?}, {:?}, N={})",
                    self.task, self.scenario, self.n_states
                ),
            });
        }
        let n_max = match self.scenario {
            GramScenario::Channel { n_max, .. } => n_max,
            GramScenario::Fock { n } => n,
        };
        let weights = if p_vars.is_empty() {
            None
        } else {
            Some(p_vars.iter().map(|&v| sol.scalar_value(v)).collect())
        };
        Ok(BoundResult {
            scenario: Scenario::Channel,
            task: self.task,
            bound: report.objective,
            status: report.status,
            n_max,
            tolerance: report.gap,
            weights,
        })
    }

    /// Reconstruct the (complex) Gram matrix from a literal solution.
    pub fn gram_matrix(&self, sol: &SdpSolution) -> DMatrix<Complex64> {
        let d = self.gram_dim();
        match &self.gram {
            GramVar::Real(m) => {
                let x = sol.matrix_value(*m);
                DMatrix::from_fn(d, d, |i, j| Complex64::new(x[(i, j)], 0.0))
            }
            GramVar::Complex(h) => DMatrix::from_fn(d, d, |i, j| {
                Complex64::new(sol.expr_value(&h.re(i, j)), sol.expr_value(&h.im(i, j)))
            }),
        }
    }
}
