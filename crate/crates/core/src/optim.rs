//! Derivative-free simplex (Nelder–Mead) minimizer used by the lossy
//! trace-distance heuristic.

/// Standard Nelder–Mead with reflection 1, expansion 2, contraction ½ and
/// shrink ½.
#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop when the simplex value spread falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Initial simplex step per coordinate.
    pub init_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 4000,
            f_tol: 1e-11,
            x_tol: 1e-9,
            init_step: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> OptimResult {
        let dim = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
            *evals += 1;
            f(x)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..dim {
            let mut x = x0.to_vec();
            x[i] += self.init_step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[dim].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() < self.f_tol || diameter < self.x_tol {
                converged = true;
                break;
            }

            // centroid of all but the worst
            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let combine = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = combine(1.0);
            let fr = eval(&reflected, &mut evals);
            if fr < simplex[0].1 {
                let expanded = combine(2.0);
                let fe = eval(&expanded, &mut evals);
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
            } else {
                let contracted = if fr < worst.1 {
                    combine(0.5)
                } else {
                    combine(-0.5)
                };
                let fc = eval(&contracted, &mut evals);
                if fc < worst.1.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    // shrink toward the best point
                    let best = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = entry
                            .0
                            .iter()
                            .zip(&best)
                            .map(|(xi, bi)| bi + 0.5 * (xi - bi))
                            .collect();
                        let v = eval(&x, &mut evals);
                        *entry = (x, v);
                    }
                }
            }
        }

        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        OptimResult {
            x: simplex[0].0.clone(),
            value: simplex[0].1,
            evals,
            converged,
        }
    }
}
