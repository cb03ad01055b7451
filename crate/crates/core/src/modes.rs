//! Mode families: the commutation matrix `k_ij = [a_i, a_j†]` plus builders
//! for the symmetric families studied here and custom families from JSON.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::Result;

/// Default cap on the DPS pulse count; the Gram SDP grows as `(2^ℓ)²·…`.
pub const DPS_DEFAULT_CAP: usize = 6;

/// Entries of `k` with `|Im|` below this are treated as real, which routes a
/// family to the real (unembedded) Gram path when the whole matrix is real.
pub const REAL_ENTRY_TOL: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("need at least {min} modes, got {got}")]
    TooFewModes { min: usize, got: usize },
    #[error("pulse count ell={ell} exceeds cap {cap} (2^ell modes)")]
    DpsCapExceeded { ell: usize, cap: usize },
    #[error("k must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("diagonal entry ({i},{i}) must be 1, got {value}")]
    DiagonalNotOne { i: usize, value: Complex64 },
    #[error("|k[{i}][{j}]| = {abs} exceeds 1")]
    OverlapTooLarge { i: usize, j: usize, abs: f64 },
    #[error("k is not Hermitian at ({i},{j}): k[{j}][{i}] != conj(k[{i}][{j}])")]
    NotHermitian { i: usize, j: usize },
    #[error("k is not positive semidefinite: min eigenvalue {min_eig}")]
    NotPsd { min_eig: f64 },
    #[error("priors: {0}")]
    BadPriors(String),
    #[error("labels: expected {expected} entries, got {got}")]
    BadLabels { expected: usize, got: usize },
    #[error("k row {row} has {got} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("n_modes = {declared} but k is {actual}x{actual}")]
    SizeMismatch { declared: usize, actual: usize },
}

/// `N` optical modes characterized by their commutation constants.
///
/// Immutable after construction; cheap to clone and safe to share across
/// concurrent solver runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFamily {
    k: DMatrix<Complex64>,
    labels: Option<Vec<String>>,
    priors: Vec<f64>,
}

impl ModeFamily {
    /// Validate and wrap a commutation matrix, with uniform priors.
    pub fn new(k: DMatrix<Complex64>) -> Result<Self> {
        Self::with_parts(k, None, None)
    }

    /// Full constructor. `priors` defaults to uniform.
    pub fn with_parts(
        k: DMatrix<Complex64>,
        labels: Option<Vec<String>>,
        priors: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(FamilyError::NotSquare {
                rows: n,
                cols: k.ncols(),
            }
            .into());
        }
        if n < 1 {
            return Err(FamilyError::TooFewModes { min: 1, got: 0 }.into());
        }
        for i in 0..n {
            let d = k[(i, i)];
            if (d - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(FamilyError::DiagonalNotOne { i, value: d }.into());
            }
        }
        for i in 0..n {
            for j in 0..n {
                let abs = k[(i, j)].norm();
                if abs > 1.0 + 1e-12 {
                    return Err(FamilyError::OverlapTooLarge { i, j, abs }.into());
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (k[(j, i)] - k[(i, j)].conj()).norm() > 1e-12 {
                    return Err(FamilyError::NotHermitian { i, j }.into());
                }
            }
        }
        // k is the Gram matrix of the single-photon states, so it must be PSD
        // up to rounding.
        let min_eig = min_hermitian_eigenvalue(&k);
        if min_eig < -1e-9 {
            return Err(FamilyError::NotPsd { min_eig }.into());
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(FamilyError::BadLabels {
                    expected: n,
                    got: l.len(),
                }
                .into());
            }
        }
        let priors = match priors {
            None => vec![1.0 / n as f64; n],
            Some(p) => {
                if p.len() != n {
                    return Err(FamilyError::BadPriors(format!(
                        "expected {n} entries, got {}",
                        p.len()
                    ))
                    .into());
                }
                if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
                    return Err(
                        FamilyError::BadPriors("entries must be finite and ≥ 0".into()).into(),
                    );
                }
                let s: f64 = p.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(FamilyError::BadPriors(format!("sum {s} != 1")).into());
                }
                p
            }
        };
        Ok(Self { k, labels, priors })
    }

    /// Two modes with `[a_1, a_2†] = k`.
    pub fn two_mode(k: Complex64) -> Result<Self> {
        if k.norm() > 1.0 + 1e-12 {
            return Err(FamilyError::OverlapTooLarge {
                i: 0,
                j: 1,
                abs: k.norm(),
            }
            .into());
        }
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                k,
                k.conj(),
                Complex64::new(1.0, 0.0),
            ],
        );
        Self::new(m)
    }

    /// The symmetric phase set `a_j = e^{i 2π j/N} a`, with
    /// `k[j][l] = e^{i 2π (j−l)/N}`.
    pub fn phase(n_outcomes: usize) -> Result<Self> {
        if n_outcomes < 2 {
            return Err(FamilyError::TooFewModes {
                min: 2,
                got: n_outcomes,
            }
            .into());
        }
        let n = n_outcomes;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..n {
                let arg = 2.0 * PI * (j as f64 - l as f64) / n as f64;
                m[(j, l)] = Complex64::from_polar(1.0, arg);
            }
        }
        force_exact_hermitian(&mut m);
        let labels = (0..n).map(|j| format!("phi_{j}")).collect();
        Self::with_parts(m, Some(labels), None)
    }

    /// Computational-basis modes `a_0..a_{d−1}` together with their Fourier
    /// duals `b_k = (1/√d) Σ_j ω_d^{jk} a_j`: a `2d`-mode family with
    /// identity blocks and cross block `[a_j, b_k†] = (1/√d)(ω_d*)^{jk}`.
    pub fn comp_ft(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(FamilyError::TooFewModes { min: 2, got: d }.into());
        }
        let n = 2 * d;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let scale = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            for k in 0..d {
                // (ω_d*)^{jk} = e^{−2πi jk/d}
                let arg = -2.0 * PI * ((j * k) % d) as f64 / d as f64;
                let v = Complex64::from_polar(scale, arg);
                m[(j, d + k)] = v;
                m[(d + k, j)] = v.conj();
            }
        }
        let labels = (0..d)
            .map(|j| format!("a{j}"))
            .chain((0..d).map(|k| format!("b{k}")))
            .collect();
        Self::with_parts(m, Some(labels), None)
    }

    /// Differential-phase-shift modes for `ℓ` phase bits: `2^ℓ` modes built
    /// from `ℓ+1` orthogonal pulses, where bit string `x` fixes the phase
    /// increments `φ_i − φ_{i−1} = x_i π` (and `φ_0 = 0`).
    pub fn dps(ell: usize) -> Result<Self> {
        Self::dps_capped(ell, DPS_DEFAULT_CAP)
    }

    /// [`ModeFamily::dps`] with an explicit cap on `ℓ`.
    pub fn dps_capped(ell: usize, cap: usize) -> Result<Self> {
        if ell < 1 {
            return Err(FamilyError::TooFewModes { min: 1, got: ell }.into());
        }
        if ell > cap {
            return Err(FamilyError::DpsCapExceeded { ell, cap }.into());
        }
        let n = 1usize << ell;
        // phase_parity[x][i] = φ_i^(x)/π mod 2 = x_1 ⊕ … ⊕ x_i, where x_i is
        // bit i−1 of the mode index.
        let parity = |x: usize, i: usize| -> u32 { (x & ((1 << i) - 1)).count_ones() & 1 };
        let mut m = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                // [b_x, b_y†] = (1/(ℓ+1)) (1 + Σ_i e^{i(φ_i^x − φ_i^y)})
                let mut sum = 1.0;
                for i in 1..=ell {
                    sum += if parity(x, i) == parity(y, i) {
                        1.0
                    } else {
                        -1.0
                    };
                }
                m[(x, y)] = Complex64::new(sum / (ell as f64 + 1.0), 0.0);
            }
        }
        let labels = (0..n)
            .map(|x| {
                (1..=ell)
                    .map(|i| if (x >> (i - 1)) & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect();
        Self::with_parts(m, Some(labels), None)
    }

    pub fn n_modes(&self) -> usize {
        self.k.nrows()
    }

    pub fn overlap(&self, i: usize, j: usize) -> Complex64 {
        self.k[(i, j)]
    }

    pub fn overlaps(&self) -> &DMatrix<Complex64> {
        &self.k
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Same family with different priors (revalidated).
    pub fn with_priors(&self, priors: Vec<f64>) -> Result<Self> {
        Self::with_parts(self.k.clone(), self.labels.clone(), Some(priors))
    }

    /// True when every commutation constant is real; such families are solved
    /// on the real symmetric Gram path without the complex embedding.
    pub fn is_real(&self) -> bool {
        self.k.iter().all(|z| z.im.abs() <= REAL_ENTRY_TOL)
    }

    /// The entrywise-conjugated family (a relabeling of the same physics;
    /// all bounds are invariant under it).
    pub fn conjugate(&self) -> Self {
        Self {
            k: self.k.map(|z| z.conj()),
            labels: self.labels.clone(),
            priors: self.priors.clone(),
        }
    }

    /// Stable content hash used to key cached per-photon bound tables.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv1a::new();
        h.write_u64(self.k.nrows() as u64);
        for z in self.k.iter() {
            h.write_u64(z.re.to_bits());
            h.write_u64(z.im.to_bits());
        }
        for &p in &self.priors {
            h.write_u64(p.to_bits());
        }
        format!("{:016x}", h.finish())
    }

    /// Load a family from the JSON schema
    /// `{"n_modes": N, "k": [[{"re":…, "im":…}, …], …], "labels": […], "priors": […]}`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        file.into_family()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = FamilyFile {
            n_modes: self.n_modes(),
            k: (0..self.n_modes())
                .map(|i| {
                    (0..self.n_modes())
                        .map(|j| ComplexEntry {
                            re: self.k[(i, j)].re,
                            im: self.k[(i, j)].im,
                        })
                        .collect()
                })
                .collect(),
            labels: self.labels.clone(),
            priors: Some(self.priors.clone()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

fn force_exact_hermitian(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (i + 1)..n {
            let v = m[(i, j)];
            m[(j, i)] = v.conj();
        }
    }
}

pub(crate) fn min_hermitian_eigenvalue(k: &DMatrix<Complex64>) -> f64 {
    let eig = k.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Serialize, Deserialize)]
struct ComplexEntry {
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    n_modes: usize,
    k: Vec<Vec<ComplexEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    priors: Option<Vec<f64>>,
}

impl FamilyFile {
    fn into_family(self) -> Result<ModeFamily> {
        let n = self.k.len();
        if n != self.n_modes {
            return Err(FamilyError::SizeMismatch {
                declared: self.n_modes,
                actual: n,
            }
            .into());
        }
        for (row, entries) in self.k.iter().enumerate() {
            if entries.len() != n {
                return Err(FamilyError::RaggedRow {
                    row,
                    got: entries.len(),
                    expected: n,
                }
                .into());
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.k[i][j].re, self.k[i][j].im)
        });
        ModeFamily::with_parts(m, self.labels, self.priors)
    }
}

/// Minimal FNV-1a so fingerprints are stable across compiler versions.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }
    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
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
    fn two_mode_basics() {
        let f = ModeFamily::two_mode(c(1.0, 0.0)).unwrap();
        assert!(f
            .overlaps()
            .iter()
            .all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));

        let f = ModeFamily::two_mode(c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f.overlap(0, 1).norm(), 0.0, epsilon = 1e-15);

        let f = ModeFamily::two_mode(c(-1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f.overlap(0, 1).re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.overlap(1, 0).re, -1.0, epsilon = 1e-15);

        assert!(ModeFamily::two_mode(c(1.0, 0.1)).is_err());
    }

    #[test]
    fn phase_family_entries() {
        let f = ModeFamily::phase(2).unwrap();
        assert_abs_diff_eq!(f.overlap(0, 1).re, -1.0, epsilon = 1e-12);

        // N=4: entry (0,1) carries phase 2π(0−1)/4 = −π/2 → −i
        let f = ModeFamily::phase(4).unwrap();
        assert_abs_diff_eq!(f.overlap(0, 1).re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.overlap(0, 1).im, -1.0, epsilon = 1e-12);

        for n in [2, 3, 5, 8] {
            let f = ModeFamily::phase(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_abs_diff_eq!(f.overlap(i, j).norm(), 1.0, epsilon = 1e-12);
                }
            }
        }
        assert!(ModeFamily::phase(1).is_err());
    }

    #[test]
    fn phase_two_equals_two_mode_minus_one() {
        let a = ModeFamily::phase(2).unwrap();
        let b = ModeFamily::two_mode(c(-1.0, 0.0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (a.overlap(i, j) - b.overlap(i, j)).norm(),
                    0.0,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn comp_ft_entries_and_spectrum() {
        let f = ModeFamily::comp_ft(2).unwrap();
        assert_eq!(f.n_modes(), 4);
        assert_abs_diff_eq!(f.overlap(0, 2).re, 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.overlap(0, 2).im, 0.0, epsilon = 1e-12);

        // eigenvalues of the d=2 matrix are {0,0,2,2}
        let eig = f.overlaps().clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }

        let f = ModeFamily::comp_ft(3).unwrap();
        let inv_sqrt_d = 1.0 / 3f64.sqrt();
        for j in 0..3 {
            for k in 0..3 {
                assert_abs_diff_eq!(f.overlap(j, 3 + k).norm(), inv_sqrt_d, epsilon = 1e-12);
            }
        }
        assert!(ModeFamily::comp_ft(1).is_err());
    }

    #[test]
    fn dps_small_cases() {
        // ℓ=1: the two modes are orthogonal
        let f = ModeFamily::dps(1).unwrap();
        assert_eq!(f.n_modes(), 2);
        assert_abs_diff_eq!(f.overlap(0, 1).norm(), 0.0, epsilon = 1e-15);

        // ℓ=2, x=00 vs y=01 (x_1=0, x_2=1 → mode index 0b10 = 2): k = 1/3
        let f = ModeFamily::dps(2).unwrap();
        assert_abs_diff_eq!(f.overlap(0, 2).re, 1.0 / 3.0, epsilon = 1e-15);
        // and all four modes are pairwise non-orthogonal
        for x in 0..4 {
            for y in 0..4 {
                if x != y {
                    assert!(f.overlap(x, y).norm() > 1e-12);
                }
            }
        }

        assert!(ModeFamily::dps(0).is_err());
        assert!(ModeFamily::dps(7).is_err());
        assert!(ModeFamily::dps_capped(7, 8).is_ok());
    }

    #[test]
    fn dps_three_orthogonality_pattern() {
        // ℓ=3: each of the 8 modes is orthogonal to exactly 3 others
        let f = ModeFamily::dps(3).unwrap();
        for x in 0..8 {
            let zeros = (0..8)
                .filter(|&y| y != x && f.overlap(x, y).norm() < 1e-12)
                .count();
            assert_eq!(zeros, 3, "mode {x}");
        }
    }

    #[test]
    fn dps_one_is_orthogonal_pair() {
        let f = ModeFamily::dps(1).unwrap();
        let ortho = ModeFamily::two_mode(c(0.0, 0.0)).unwrap();
        // entrywise equal up to permutation; for 2 modes just compare directly
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (f.overlap(i, j) - ortho.overlap(i, j)).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = ModeFamily::two_mode(c(0.5, 0.0)).unwrap();
        let text = f.to_json().unwrap();
        let g = ModeFamily::from_json(&text).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((f.overlap(i, j) - g.overlap(i, j)).norm() <= 1e-15);
            }
        }

        let bad = r#"{"n_modes":2,"k":[[{"re":1},{"re":1.2}],[{"re":1.2},{"re":1}]]}"#;
        let err = ModeFamily::from_json(bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0,1)") || msg.contains("[0][1]"), "{msg}");

        let non_hermitian =
            r#"{"n_modes":2,"k":[[{"re":1},{"re":0.5,"im":0.1}],[{"re":0.5,"im":0.1},{"re":1}]]}"#;
        let err = ModeFamily::from_json(non_hermitian).unwrap_err();
        assert!(err.to_string().contains("Hermitian"), "{err}");
    }

    #[test]
    fn builders_pass_validation_and_real_detection() {
        assert!(!ModeFamily::phase(5).unwrap().is_real());
        assert!(ModeFamily::dps(3).unwrap().is_real());
        assert!(ModeFamily::comp_ft(2).unwrap().is_real());
        assert!(!ModeFamily::comp_ft(3).unwrap().is_real());
        assert!(!ModeFamily::two_mode(c(0.3, 0.4)).unwrap().is_real());
    }

    #[test]
    fn fingerprint_distinguishes() {
        let a = ModeFamily::two_mode(c(0.5, 0.0)).unwrap();
        let b = ModeFamily::two_mode(c(0.5000001, 0.0)).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
