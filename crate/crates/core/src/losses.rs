//! Mode-independent photon loss: the binomial transform on photon-number
//! weights (and its inversion) for the source scenario, coherent/Fock
//! closed forms, and the trace-distance heuristic for two lossy modes in
//! the channel scenario.
//!
//! Loss is a beam splitter `a_j → t·a_j + r·b_j` acting identically on all
//! modes. Fock-diagonal states stay Fock-diagonal, with weights pushed down
//! binomially, so the source pipeline just runs at effective energy `n̄t²`.
//! Channel-scenario probe states become mixed and the Gram machinery no
//! longer applies; the heuristic here maximizes the Helstrom value of the
//! two lossy states directly, which yields an achievability *estimate*, not
//! a rigorous upper bound.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fock::{EnergyConstraint, PhotonDistribution};
use crate::modes::ModeFamily;
use crate::optim::NelderMead;
use crate::source;
use crate::{BoundResult, Error, Result, Task};

/// Beam-splitter loss of transmittivity `t²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossChannel {
    t2: f64,
}

impl LossChannel {
    pub fn new(t2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t2) {
            return Err(Error::InvalidArgument(format!(
                "transmittivity t² = {t2} outside [0,1]"
            )));
        }
        Ok(LossChannel { t2 })
    }

    /// Transmitted intensity fraction `t²`.
    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// Reflected intensity fraction `r² = 1 − t²`.
    pub fn r2(&self) -> f64 {
        1.0 - self.t2
    }
}

fn binomial(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let n = n.min(m - n);
    let mut acc = 1.0f64;
    for i in 0..n {
        acc = acc * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Binomial downconversion of photon-number weights:
/// `q_n = Σ_{m ≥ n} p_m C(m,n) (1−t²)^{m−n} t^{2n}`.
///
/// Preserves total mass and scales the mean by exactly `t²`.
pub fn loss_transform(p: &PhotonDistribution, ch: &LossChannel) -> PhotonDistribution {
    let n_max = p.n_max();
    let (t2, r2) = (ch.t2(), ch.r2());
    let mut q = vec![0.0; n_max + 1];
    for (n, entry) in q.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in n..=n_max {
            acc += p.weight(m) * binomial(m, n) * r2.powi((m - n) as i32) * t2.powi(n as i32);
        }
        *entry = acc;
    }
    PhotonDistribution::new(q).expect("binomial transform preserves validity")
}

/// Result of inverting the loss transform. Negative entries are *flagged*,
/// not clipped: they mean the requested output is not reachable from any
/// physical input at this truncation.
#[derive(Clone, Debug)]
pub struct LossInversion {
    pub weights: Vec<f64>,
    pub has_negative: bool,
    /// 1-norm condition estimate of the triangular system.
    pub condition_estimate: f64,
}

impl LossInversion {
    /// Convert to a distribution; fails when negative weights were flagged.
    pub fn into_distribution(self) -> Result<PhotonDistribution> {
        if self.has_negative {
            return Err(Error::LossInversion(format!(
                "inverted weights contain negative entries (min {:.3e}); the target is not \
                 reachable through this channel at this truncation",
                self.weights.iter().copied().fold(f64::INFINITY, f64::min)
            )));
        }
        PhotonDistribution::new(self.weights)
    }
}

/// Invert [`loss_transform`]: find pre-loss weights `p` with
/// `loss_transform(p) = q`, by back substitution on the upper-triangular
/// system. Requires `t² > 0`.
pub fn loss_invert(q: &PhotonDistribution, ch: &LossChannel) -> Result<LossInversion> {
    let t2 = ch.t2();
    if t2 <= 0.0 {
        return Err(Error::LossInversion(
            "t² = 0 maps everything to vacuum and cannot be inverted".into(),
        ));
    }
    let r2 = ch.r2();
    let n_max = q.n_max();
    let dim = n_max + 1;
    let entry = |n: usize, m: usize| binomial(m, n) * r2.powi((m - n) as i32) * t2.powi(n as i32);

    // condition estimate: ‖T‖₁ · ‖T⁻¹‖₁ via explicit back substitution on
    // unit vectors (the system is small)
    let norm_t = (0..dim)
        .map(|m| (0..=m).map(|n| entry(n, m).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let diag_min = t2.powi(n_max as i32);
    if diag_min < 1e-300 || !norm_t.is_finite() {
        return Err(Error::LossInversion(format!(
            "triangular system is numerically singular (t^(2n_max) = {diag_min:.3e})"
        )));
    }
    let back_substitute = |rhs: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; dim];
        for m in (0..dim).rev() {
            let mut acc = rhs[m];
            for mp in (m + 1)..dim {
                acc -= entry(m, mp) * p[mp];
            }
            p[m] = acc / entry(m, m);
        }
        p
    };
    let mut norm_inv = 0.0f64;
    for col in 0..dim {
        let mut e = vec![0.0; dim];
        e[col] = 1.0;
        let x = back_substitute(&e);
        norm_inv = norm_inv.max(x.iter().map(|v| v.abs()).sum());
    }
    let condition_estimate = norm_t * norm_inv;

    let mut weights = back_substitute(q.weights());
    let mut has_negative = false;
    for w in &mut weights {
        if *w < -1e-10 {
            has_negative = true;
        } else if *w < 0.0 {
            *w = 0.0;
        }
    }
    Ok(LossInversion {
        weights,
        has_negative,
        condition_estimate,
    })
}

/// Source-scenario bound under loss plus the pre-loss input that realizes
/// the LP optimizer.
#[derive(Clone, Debug)]
pub struct LossySourceBound {
    pub result: BoundResult,
    /// Pre-loss weights obtained by inverting the LP's optimal `{q_n}`.
    pub pre_loss: LossInversion,
}

/// Run the source pipeline at effective energy `n̄t²` and invert the
/// optimizer back through the channel.
pub fn source_lossy_bound(
    family: &ModeFamily,
    ec: &EnergyConstraint,
    ch: &LossChannel,
    task: Task,
) -> Result<LossySourceBound> {
    let effective = EnergyConstraint::new(ec.nbar() * ch.t2(), ec.n_max())?;
    let result = source::source_bound(family, &effective, task)?;
    let q = PhotonDistribution::new(
        result
            .weights
            .clone()
            .expect("source LP always returns weights"),
    )?;
    let pre_loss = loss_invert(&q, ch)?;
    Ok(LossySourceBound { result, pre_loss })
}

/// Lossy two-mode guessing probability for coherent-state inputs:
/// `½(1 + √(1 − e^{−2t²n̄(1−k)}))`.
pub fn coherent_bound(k: f64, nbar: f64, ch: &LossChannel) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside [0,1]")));
    }
    if nbar < 0.0 {
        return Err(Error::InvalidArgument("nbar must be ≥ 0".into()));
    }
    let overlap_sq = (-2.0 * ch.t2() * nbar * (1.0 - k)).exp();
    Ok(0.5 * (1.0 + (1.0 - overlap_sq).sqrt()))
}

/// Lossy two-mode guessing probability for an `m`-photon Fock input:
/// photon counting followed by per-`n` discrimination,
/// `½(1 + Σ_n C(m,n) t^{2n} r^{2(m−n)} √(1 − k^{2n}))`.
pub fn fock_bound_lossy(k: f64, m: usize, ch: &LossChannel) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside [0,1]")));
    }
    let (t2, r2) = (ch.t2(), ch.r2());
    let mut acc = 0.0;
    for n in 0..=m {
        let weight = binomial(m, n) * t2.powi(n as i32) * r2.powi((m - n) as i32);
        acc += weight * (1.0 - k.powi(2 * n as i32)).max(0.0).sqrt();
    }
    Ok(0.5 * (1.0 + acc))
}

/// Quick analytic floor `max(P_coh, P_Fock)` at integer mean `m`.
pub fn estimate_floor(k: f64, m: usize, ch: &LossChannel) -> Result<f64> {
    Ok(coherent_bound(k, m as f64, ch)?.max(fock_bound_lossy(k, m, ch)?))
}

// ---------------------------------------------------------------------------
// trace-distance heuristic
// ---------------------------------------------------------------------------

/// Dense two-mode Fock-basis workspace over `{|n₁, n₂⟩ : n₁+n₂ ≤ n_trunc}`.
struct TwoModeBasis {
    n_trunc: usize,
    index: Vec<Vec<usize>>, // index[n1][n2]
    dim: usize,
}

impl TwoModeBasis {
    fn new(n_trunc: usize) -> Self {
        let mut index = vec![vec![usize::MAX; n_trunc + 1]; n_trunc + 1];
        let mut dim = 0;
        for n1 in 0..=n_trunc {
            for n2 in 0..=(n_trunc - n1) {
                index[n1][n2] = dim;
                dim += 1;
            }
        }
        TwoModeBasis {
            n_trunc,
            index,
            dim,
        }
    }
}

/// Trace-distance value `½(1 + ½‖ρ₁(t) − ρ₂(t)‖₁)` for the two lossy probe
/// states built from one amplitude vector `c` (state 1 in the signal mode,
/// state 2 in the mode with overlap `⟨1₁|1₂⟩ = k`). Exposed for the
/// coherent-state oracle checks.
pub fn lossy_pcorr_from_amplitudes(
    c: &[Complex64],
    k: Complex64,
    ch: &LossChannel,
    n_trunc: usize,
) -> Result<f64> {
    if c.len() > n_trunc + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} amplitudes exceed the truncation {n_trunc}",
            c.len()
        )));
    }
    if k.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "|k| = {} exceeds 1",
            k.norm()
        )));
    }
    let basis = TwoModeBasis::new(n_trunc);

    // state 1: Σ c_n |n, 0⟩
    let mut psi1 = vec![Complex64::default(); basis.dim];
    for (n, &cn) in c.iter().enumerate() {
        psi1[basis.index[n][0]] = cn;
    }
    // state 2 via a₂† = k a₁† + κ a⊥†, κ = √(1−|k|²):
    // |n⟩₂ = Σ_m √C(n,m) k^m κ^{n−m} |m, n−m⟩
    let kappa = (1.0 - k.norm_sqr()).max(0.0).sqrt();
    let mut psi2 = vec![Complex64::default(); basis.dim];
    for (n, &cn) in c.iter().enumerate() {
        for m in 0..=n {
            let amp = binomial(n, m).sqrt() * k.powu(m as u32) * kappa.powi((n - m) as i32);
            psi2[basis.index[m][n - m]] += cn * amp;
        }
    }

    let rho1 = lossy_density(&psi1, ch, &basis);
    let rho2 = lossy_density(&psi2, ch, &basis);
    let diff = rho1 - rho2;
    // restrict to the support: structurally-zero rows carry eigenvalue 0 and
    // trip the complex Householder reduction
    let support: Vec<usize> = (0..basis.dim)
        .filter(|&i| (0..basis.dim).any(|j| diff[(i, j)].norm_sqr() > 0.0))
        .collect();
    if support.is_empty() {
        return Ok(0.5);
    }
    let sub = DMatrix::from_fn(support.len(), support.len(), |i, j| {
        diff[(support[i], support[j])]
    });
    let eig = sub.symmetric_eigen();
    let trace_dist: f64 = 0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    Ok(0.5 * (1.0 + trace_dist))
}

/// Apply per-mode loss Kraus operators `⟨n−l|K_l|n⟩ = √C(n,l) t^{n−l} r^l`
/// to a pure two-mode state and accumulate the output density matrix.
fn lossy_density(psi: &[Complex64], ch: &LossChannel, basis: &TwoModeBasis) -> DMatrix<Complex64> {
    let t = ch.t2().sqrt();
    let r = ch.r2().sqrt();
    let kraus = |n: usize, l: usize| -> f64 {
        binomial(n, l).sqrt() * t.powi((n - l) as i32) * r.powi(l as i32)
    };
    let mut rho = DMatrix::<Complex64>::zeros(basis.dim, basis.dim);
    let mut v = vec![Complex64::default(); basis.dim];
    for l1 in 0..=basis.n_trunc {
        for l2 in 0..=(basis.n_trunc - l1) {
            v.iter_mut().for_each(|z| *z = Complex64::default());
            let mut nonzero = false;
            for n1 in l1..=basis.n_trunc {
                for n2 in l2..=(basis.n_trunc - n1) {
                    let src = psi[basis.index[n1][n2]];
                    if src != Complex64::default() {
                        v[basis.index[n1 - l1][n2 - l2]] += src * (kraus(n1, l1) * kraus(n2, l2));
                        nonzero = true;
                    }
                }
            }
            if !nonzero {
                continue;
            }
            for i in 0..basis.dim {
                if v[i] == Complex64::default() {
                    continue;
                }
                for j in 0..basis.dim {
                    rho[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
    }
    rho
}

/// Options for [`heuristic_channel_lossy`].
#[derive(Clone, Debug)]
pub struct HeuristicOptions {
    pub restarts: usize,
    pub n_trunc: usize,
    /// Also optimize the amplitude phases (off by default; inspection shows
    /// the optimum depends only on the moduli, but the flag allows checking
    /// that on any instance).
    pub optimize_phases: bool,
    pub seed: u64,
    pub max_evals_per_restart: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            restarts: 20,
            n_trunc: 5,
            optimize_phases: false,
            seed: 7,
            max_evals_per_restart: 4000,
        }
    }
}

/// Outcome of the heuristic search. `estimate` is an achievability-side
/// estimate of `P_corr` (a lower estimate of the true optimum), not a
/// rigorous upper bound.
#[derive(Clone, Debug)]
pub struct HeuristicResult {
    pub estimate: f64,
    pub weights: Vec<f64>,
    pub phases: Option<Vec<f64>>,
    pub converged: bool,
    pub evaluations: usize,
}

/// Heuristically maximize the two-mode guessing probability under loss over
/// input photon statistics with mean exactly `n̄`.
///
/// Weights are parametrized through a softmax with an exponential tilt that
/// projects every candidate onto the mean constraint; restarts are seeded
/// from the floor/ceil, Fock and coherent profiles plus random draws.
pub fn heuristic_channel_lossy(
    k: Complex64,
    nbar: f64,
    ch: &LossChannel,
    opts: &HeuristicOptions,
) -> Result<HeuristicResult> {
    if k.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "|k| = {} exceeds 1",
            k.norm()
        )));
    }
    if nbar < 0.0 || nbar >= opts.n_trunc as f64 {
        return Err(Error::InvalidArgument(format!(
            "nbar = {nbar} must lie in [0, n_trunc = {})",
            opts.n_trunc
        )));
    }
    if opts.n_trunc < (nbar.ceil() as usize) + 2 {
        return Err(Error::InvalidArgument(format!(
            "n_trunc = {} too small for nbar = {nbar}; need at least ⌈n̄⌉+2",
            opts.n_trunc
        )));
    }
    let n_amp = opts.n_trunc + 1;

    // seeds in weight space
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let fc = source::floor_ceil_state(nbar)?;
    seeds.push((0..n_amp).map(|n| fc.weight(n)).collect());
    let fock_n = (nbar.round() as usize).min(opts.n_trunc);
    let mut fock = vec![0.0; n_amp];
    fock[fock_n] = 1.0;
    seeds.push(fock);
    let mut coherent = vec![0.0; n_amp];
    let mut term = (-nbar).exp();
    for (n, w) in coherent.iter_mut().enumerate() {
        *w = term;
        term *= nbar / (n as f64 + 1.0);
    }
    seeds.push(coherent);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while seeds.len() < opts.restarts {
        seeds.push((0..n_amp).map(|_| rng.gen_range(0.01..1.0)).collect());
    }
    seeds.truncate(opts.restarts.max(1));

    let theta_of =
        |weights: &[f64]| -> Vec<f64> { weights.iter().map(|&w| w.max(1e-9).ln()).collect() };

    let n_phase = if opts.optimize_phases {
        opts.n_trunc // phases of c_1..c_{n_trunc}; the global phase is fixed
    } else {
        0
    };

    let objective = |params: &[f64]| -> f64 {
        let weights = tilted_softmax(&params[..n_amp], nbar);
        let c: Vec<Complex64> = weights
            .iter()
            .enumerate()
            .map(|(n, &w)| {
                let phase = if n_phase > 0 && n >= 1 {
                    params[n_amp + n - 1]
                } else {
                    0.0
                };
                Complex64::from_polar(w.sqrt(), phase)
            })
            .collect();
        match lossy_pcorr_from_amplitudes(&c, k, ch, opts.n_trunc) {
            Ok(p) => -p,
            Err(_) => f64::INFINITY,
        }
    };

    let runs: Vec<(f64, Vec<f64>, bool, usize)> = seeds
        .par_iter()
        .map(|seed| {
            let mut x0 = theta_of(seed);
            x0.extend(std::iter::repeat_n(0.0, n_phase));
            let nm = NelderMead {
                max_evals: opts.max_evals_per_restart,
                ..NelderMead::default()
            };
            let r = nm.minimize(objective, &x0);
            (r.value, r.x, r.converged, r.evals)
        })
        .collect();

    let mut best: Option<&(f64, Vec<f64>, bool, usize)> = None;
    let mut evaluations = 0;
    let mut converged = false;
    for run in &runs {
        evaluations += run.3;
        converged |= run.2;
        if best.is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let (value, params, _, _) = best.expect("at least one restart");
    let weights = tilted_softmax(&params[..n_amp], nbar);
    let phases = (n_phase > 0).then(|| {
        std::iter::once(0.0)
            .chain(params[n_amp..].iter().copied())
            .collect()
    });
    Ok(HeuristicResult {
        estimate: -value,
        weights,
        phases,
        converged,
        evaluations,
    })
}

/// Softmax of `theta` exponentially tilted so the mean photon number equals
/// `nbar`; the tilt exponent is found by bisection (the tilted mean is
/// strictly increasing in the exponent).
fn tilted_softmax(theta: &[f64], nbar: f64) -> Vec<f64> {
    let top = theta.len() - 1;
    let base: Vec<f64> = {
        let m = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        theta.iter().map(|t| (t - m).exp()).collect()
    };
    let weights_at = |beta: f64| -> Vec<f64> {
        let mut w: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(n, b)| b * (beta * n as f64).exp())
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    };
    let mean_of = |w: &[f64]| -> f64 { w.iter().enumerate().map(|(n, x)| n as f64 * x).sum() };

    let (mut lo, mut hi) = (-60.0 / top.max(1) as f64, 60.0 / top.max(1) as f64);
    // widen until bracketed (cheap; the mean is monotone in beta)
    for _ in 0..60 {
        if mean_of(&weights_at(lo)) <= nbar {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..60 {
        if mean_of(&weights_at(hi)) >= nbar {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_of(&weights_at(mid)) < nbar {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    weights_at(0.5 * (lo + hi))
}
