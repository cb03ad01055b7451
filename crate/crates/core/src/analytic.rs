//! Closed forms for two-mode discrimination and for the orthogonal
//! three-Fock states of binary phase discrimination. These double as the
//! oracles the numerical paths are tested against.

use num_complex::Complex64;

use crate::conic::{LinearProgram, RowOp, Sense, SolveStatus};
use crate::{Error, Result, Task};

/// Optimal two-state guessing probability `½(1 + √(1 − |⟨ψ1|ψ2⟩|²))`.
pub fn helstrom(overlap: Complex64) -> f64 {
    let a = overlap.norm().min(1.0);
    0.5 * (1.0 + (1.0 - a * a).sqrt())
}

/// Optimal two-state unambiguous success probability `1 − |⟨ψ1|ψ2⟩|`.
pub fn idp(overlap: Complex64) -> f64 {
    1.0 - overlap.norm().min(1.0)
}

/// Floor/ceil mixture weights for mean `n̄`: mass `1+⌊n̄⌋−n̄` at `⌊n̄⌋` and
/// `n̄−⌊n̄⌋` at `⌊n̄⌋+1`.
fn floor_ceil_weights(nbar: f64) -> (usize, f64, usize, f64) {
    let lo = nbar.floor() as usize;
    let w_hi = nbar - nbar.floor();
    (lo, 1.0 - w_hi, lo + 1, w_hi)
}

/// Minimal achievable inner-product modulus `χ` for two modes at real
/// `k ∈ [0,1]` under mean photon number `n̄`: the floor/ceil mixture
/// `χ = p_⌊n̄⌋ k^⌊n̄⌋ + p_⌈n̄⌉ k^⌈n̄⌉`.
///
/// Negative (or complex) `k` is rejected: there the optimum is not supported
/// on `{⌊n̄⌋, ⌈n̄⌉}` and the LP route [`chi_min_via_lp`] or the SDP must be
/// used instead.
pub fn chi_two_mode(k: f64, nbar: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "chi_two_mode needs k in [0,1], got {k}"
        )));
    }
    if nbar < 0.0 {
        return Err(Error::InvalidArgument("nbar must be ≥ 0".into()));
    }
    let (lo, w_lo, hi, w_hi) = floor_ceil_weights(nbar);
    Ok(w_lo * k.powi(lo as i32) + w_hi * k.powi(hi as i32))
}

/// `min |Σ p_n kⁿ|` over distributions with mean exactly `n̄`, solved by the
/// generic LP on `n ≤ n_max`. Valid for any real `k ∈ [−1,1]`; for `k < 0`
/// both sign branches are solved and compared.
pub fn chi_min_via_lp(k: f64, nbar: f64, n_max: usize) -> Result<f64> {
    if !(-1.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "chi_min_via_lp needs real k in [-1,1], got {k}"
        )));
    }
    if nbar < 0.0 || nbar > n_max as f64 {
        return Err(Error::InvalidArgument(format!(
            "nbar = {nbar} outside [0, n_max = {n_max}]"
        )));
    }
    let solve_branch = |sense_coeff: f64| -> Result<f64> {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let vars: Vec<_> = (0..=n_max)
            .map(|n| lp.add_var(format!("p{n}"), 0.0, f64::INFINITY))
            .collect();
        for (n, &v) in vars.iter().enumerate() {
            lp.set_objective(v, sense_coeff * k.powi(n as i32));
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
                detail: "chi LP".into(),
            });
        }
        Ok(sense_coeff * r.primal_objective)
    };
    let lo = solve_branch(1.0)?; // min Σ p_n kⁿ
    let hi = solve_branch(-1.0)?; // max Σ p_n kⁿ
    Ok(if lo >= 0.0 {
        lo
    } else if hi <= 0.0 {
        -hi
    } else {
        0.0 // the achievable interval straddles zero
    })
}

/// Per-photon-number two-mode closed forms.
pub fn two_mode_fock_bound(k_abs: f64, n: usize, task: Task) -> f64 {
    let kn = k_abs.powi(n as i32);
    match task {
        Task::Probabilistic => 0.5 * (1.0 + (1.0 - kn * kn).max(0.0).sqrt()),
        Task::Unambiguous => 1.0 - kn,
    }
}

/// Source-scenario two-mode optimum: the floor/ceil mixture of the per-`n`
/// closed forms.
pub fn two_mode_source_bound(k: Complex64, nbar: f64, task: Task) -> Result<f64> {
    let a = k.norm();
    if a > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!("|k| = {a} exceeds 1")));
    }
    if nbar < 0.0 {
        return Err(Error::InvalidArgument("nbar must be ≥ 0".into()));
    }
    let (lo, w_lo, hi, w_hi) = floor_ceil_weights(nbar);
    Ok(w_lo * two_mode_fock_bound(a.min(1.0), lo, task)
        + w_hi * two_mode_fock_bound(a.min(1.0), hi, task))
}

/// The orthogonal pair of three-Fock-component states for discriminating the
/// modes `a` and `−a` at mean photon number `n̄ ≥ 0.5`.
#[derive(Clone, Debug)]
pub struct PhaseOrthogonalPair {
    /// Center Fock number; `n̄ = m + δ/2` with `δ ∈ [−1, 1)`.
    pub m: usize,
    pub delta: f64,
    /// Fock numbers carrying the three amplitudes: `(m−1, m, m+1)`.
    pub basis: [usize; 3],
    /// Amplitudes of the first state on `basis`.
    pub plus: [f64; 3],
    /// Amplitudes of the second state on `basis` (expressed in the Fock
    /// basis of mode `a`; the sign flip on the middle component is the
    /// `k = −1` mode relabeling).
    pub minus: [f64; 3],
}

impl PhaseOrthogonalPair {
    pub fn overlap(&self) -> f64 {
        self.plus.iter().zip(&self.minus).map(|(a, b)| a * b).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.plus)
            .map(|(&n, a)| n as f64 * a * a)
            .sum()
    }
}

/// Build the explicit orthogonal state pair for `n̄ ≥ 0.5`.
pub fn phase_orthogonal_pair(nbar: f64) -> Result<PhaseOrthogonalPair> {
    if nbar < 0.5 {
        return Err(Error::InvalidArgument(format!(
            "orthogonal pair needs nbar ≥ 0.5, got {nbar}"
        )));
    }
    // unique integer m ≥ 1 with δ = 2(n̄ − m) ∈ [−1, 1)
    let m = (nbar + 0.5).floor() as usize;
    let delta = 2.0 * (nbar - m as f64);
    debug_assert!((-1.0..1.0).contains(&delta), "delta = {delta}");
    let a = ((1.0 - delta) / 4.0).sqrt();
    let b = std::f64::consts::FRAC_1_SQRT_2;
    let c = ((1.0 + delta) / 4.0).sqrt();
    Ok(PhaseOrthogonalPair {
        m,
        delta,
        basis: [m - 1, m, m + 1],
        plus: [a, b, c],
        minus: [a, -b, c],
    })
}
