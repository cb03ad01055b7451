//! Photon-number distributions, truncated inner products, and the tail
//! bounds that make the truncated relaxations valid upper bounds.

use num_complex::Complex64;

use crate::{Error, Result};

/// A (possibly sub-normalized) photon-number distribution `p_0..p_{n_max}`.
///
/// Sub-normalization is deliberate: the truncated relaxations optimize over
/// distributions whose tail mass `1 - Σ p_n` has been cut off, and the tail
/// is accounted for by [`PhotonDistribution::truncation_epsilon`].
///
/// Only the weights `p_n = |c_n|²` are stored. Every optimization in this
/// crate depends on the amplitudes solely through their moduli; the lossy
/// trace-distance heuristic in [`crate::losses`] carries its own amplitude
/// representation.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution {
    weights: Vec<f64>,
    declared_mean: Option<f64>,
}

const WEIGHT_TOL: f64 = 1e-9;

impl PhotonDistribution {
    /// Build from weights `p_0..p_{n_max}`. Entries within `1e-9` below zero
    /// are clamped; anything more negative is rejected.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, None)
    }

    /// Build with a declared mean photon number, checked for consistency
    /// whenever the distribution is fully normalized.
    pub fn with_declared_mean(weights: Vec<f64>, mean: f64) -> Result<Self> {
        Self::build(weights, Some(mean))
    }

    fn build(mut weights: Vec<f64>, declared_mean: Option<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Distribution("no weights given".into()));
        }
        for (n, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::Distribution(format!("p_{n} is not finite")));
            }
            if *w < -WEIGHT_TOL {
                return Err(Error::Distribution(format!("p_{n} = {w} is negative")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let mass: f64 = weights.iter().sum();
        if mass > 1.0 + WEIGHT_TOL {
            return Err(Error::Distribution(format!("total mass {mass} exceeds 1")));
        }
        if let Some(mean) = declared_mean {
            if (mass - 1.0).abs() <= WEIGHT_TOL {
                let actual: f64 = weights.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
                if (actual - mean).abs() > 1e-9 {
                    return Err(Error::Distribution(format!(
                        "declared mean {mean} but weights have mean {actual}"
                    )));
                }
            }
        }
        Ok(Self {
            weights,
            declared_mean,
        })
    }

    /// A point mass on Fock number `n`.
    pub fn fock(n: usize) -> Self {
        let mut weights = vec![0.0; n + 1];
        weights[n] = 1.0;
        Self {
            weights,
            declared_mean: Some(n as f64),
        }
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at `n`, zero beyond the cutoff.
    pub fn weight(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mean photon number of the stored (truncated) part.
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(n, w)| n as f64 * w)
            .sum()
    }

    pub fn declared_mean(&self) -> Option<f64> {
        self.declared_mean
    }

    /// Truncated inner product `Σ_{n ≤ n_max} p_n kⁿ` between two probe
    /// states prepared with these weights in modes of overlap `k`.
    pub fn inner_product(&self, k: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for &w in &self.weights {
            acc += pow * w;
            pow *= k;
        }
        acc
    }

    /// Bound `ε = (1 − Σ p_n)·|k|^{n_max+1}` on the inner-product mass in the
    /// discarded tail `n > n_max`.
    pub fn truncation_epsilon(&self, k: Complex64) -> f64 {
        let deficit = (1.0 - self.total_mass()).max(0.0);
        deficit * k.norm().powi(self.weights.len() as i32)
    }
}

/// Mean-photon-number budget `n̄` with the cutoff it is enforced at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyConstraint {
    nbar: f64,
    n_max: usize,
}

impl EnergyConstraint {
    pub fn new(nbar: f64, n_max: usize) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::Energy(format!("nbar = {nbar} must be ≥ 0")));
        }
        if n_max < 1 {
            return Err(Error::Energy("n_max must be ≥ 1".into()));
        }
        if nbar > n_max as f64 {
            return Err(Error::Energy(format!(
                "nbar = {nbar} exceeds the cutoff n_max = {n_max}; the relaxed feasible set is empty"
            )));
        }
        Ok(Self { nbar, n_max })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficients of the relaxed mean-photon-number inequality
    /// `Σ_{n ≤ n_max} p_n (n_max + 1 − n) ≥ n_max + 1 − n̄`,
    /// which charges any cut-off tail mass at `n_max + 1` photons.
    pub fn relaxed_energy_row(&self) -> EnergyRow {
        let top = self.n_max as f64 + 1.0;
        EnergyRow {
            coeffs: (0..=self.n_max).map(|n| top - n as f64).collect(),
            rhs: top - self.nbar,
        }
    }
}

/// A `Σ coeffs[n]·p_n ≥ rhs` inequality over photon-number weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl EnergyRow {
    /// Whether a distribution satisfies the row (with slack returned).
    pub fn slack(&self, p: &PhotonDistribution) -> f64 {
        let lhs: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * p.weight(n))
            .sum();
        lhs - self.rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_overlap_is_one() {
        let p = PhotonDistribution::new(vec![1.0]).unwrap();
        for k in [c(0.0, 0.0), c(0.3, -0.4), c(-1.0, 0.0)] {
            assert_abs_diff_eq!(p.inner_product(k).re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.inner_product(k).im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_photon_term() {
        let p = PhotonDistribution::new(vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p.inner_product(c(0.5, 0.0)).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn equal_superposition_orthogonal_at_minus_one() {
        // c_0 = c_1 = 1/√2 against k = −1
        let p = PhotonDistribution::new(vec![0.5, 0.5]).unwrap();
        let ip = p.inner_product(c(-1.0, 0.0));
        assert_abs_diff_eq!(ip.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn epsilon_examples() {
        let full = PhotonDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(full.truncation_epsilon(c(0.9, 0.0)), 0.0, epsilon = 1e-15);

        let sub = PhotonDistribution::new(vec![0.4, 0.5]).unwrap();
        assert_abs_diff_eq!(sub.truncation_epsilon(c(1.0, 0.0)), 0.1, epsilon = 1e-12);

        // Σp = 0.9, k = 0.5, n_max = 3 → 0.1·0.5⁴
        let sub = PhotonDistribution::new(vec![0.3, 0.3, 0.2, 0.1]).unwrap();
        assert_abs_diff_eq!(
            sub.truncation_epsilon(c(0.5, 0.0)),
            0.1 * 0.5f64.powi(4),
            epsilon = 1e-12
        );
    }

    #[test]
    fn energy_row_example() {
        // n_max = 1, n̄ = 0.5 → 2p_0 + p_1 ≥ 1.5
        let ec = EnergyConstraint::new(0.5, 1).unwrap();
        let row = ec.relaxed_energy_row();
        assert_eq!(row.coeffs, vec![2.0, 1.0]);
        assert_abs_diff_eq!(row.rhs, 1.5, epsilon = 1e-15);

        // a normalized distribution with mean exactly n̄ sits on the boundary
        let p = PhotonDistribution::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(row.slack(&p), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_constraint_guards() {
        assert!(EnergyConstraint::new(-0.1, 5).is_err());
        assert!(EnergyConstraint::new(2.0, 1).is_err());
        assert!(EnergyConstraint::new(6.0, 5).is_err());
        assert!(EnergyConstraint::new(1.0, 1).is_ok());
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(PhotonDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(PhotonDistribution::new(vec![-0.1, 0.5]).is_err());
        assert!(PhotonDistribution::new(vec![]).is_err());
        assert!(PhotonDistribution::with_declared_mean(vec![0.5, 0.5], 0.7).is_err());
        assert!(PhotonDistribution::with_declared_mean(vec![0.5, 0.5], 0.5).is_ok());
    }

    #[test]
    fn conjugation_symmetry() {
        let p = PhotonDistribution::new(vec![0.2, 0.3, 0.1, 0.25]).unwrap();
        let k = c(0.3, 0.7);
        let a = p.inner_product(k.conj());
        let b = p.inner_product(k).conj();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn epsilon_monotone_in_cutoff() {
        // same mass deficit, growing cutoff, |k| < 1
        let k = c(0.8, 0.1);
        let mut last = f64::INFINITY;
        for n_max in 1..8 {
            let mut w = vec![0.0; n_max + 1];
            w[0] = 0.9;
            let p = PhotonDistribution::new(w).unwrap();
            let eps = p.truncation_epsilon(k);
            assert!(eps <= last + 1e-15);
            last = eps;
        }
    }

    #[test]
    fn epsilon_bounds_geometric_tails() {
        // For a full geometric distribution q and its truncation p, the
        // discarded tail of the inner product obeys the ε bound.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let lambda: f64 = rng.gen_range(0.05..0.8);
            let k = c(rng.gen_range(-0.95..0.95), rng.gen_range(-0.3..0.3));
            if k.norm() >= 1.0 {
                continue;
            }
            let n_max = rng.gen_range(2..10usize);
            // geometric weights q_n = (1-λ)λⁿ, full sum 1
            let far = 400;
            let q: Vec<f64> = (0..far).map(|n| (1.0 - lambda) * lambda.powi(n)).collect();
            let trunc = PhotonDistribution::new(q[..=n_max].to_vec()).unwrap();
            let tail: Complex64 = (n_max + 1..far as usize)
                .map(|n| {
                    let pow = k.powi(n as i32);
                    pow * q[n]
                })
                .sum();
            assert!(
                tail.norm() <= trunc.truncation_epsilon(k) + 1e-12,
                "tail {} vs eps {}",
                tail.norm(),
                trunc.truncation_epsilon(k)
            );
        }
    }
}
