//! Parameter sweeps producing plot-ready CSV: bounds over energy grids,
//! polar overlap grids, per-pulse-energy DPS grids and loss curves.
//!
//! Points are evaluated in parallel; output rows keep the grid order, and
//! every row records the cutoff and solver gap it was computed at, so a
//! figure can be regenerated byte-for-byte (wall-clock column aside).

use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

use crate::conic::{SdpSettings, SolveStatus};
use crate::fock::EnergyConstraint;
use crate::gram;
use crate::losses::{self, HeuristicOptions, LossChannel};
use crate::modes::ModeFamily;
use crate::source;
use crate::{Error, Result, Scenario, Task};

/// One evaluated grid point.
#[derive(Clone, Debug)]
pub struct SweepRow {
    /// Key columns in output order; values are preformatted.
    pub params: Vec<(String, String)>,
    pub bound: f64,
    pub status: SolveStatus,
    pub n_max: usize,
    pub tol: f64,
    pub wall_ms: f64,
}

impl SweepRow {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(k, _)| k == name)
            .and_then(|(_, v)| v.parse().ok())
    }

    pub fn param_str(&self, name: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12}")
}

/// Evenly spaced (or log-spaced) grid, endpoints included.
pub fn grid(from: f64, to: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps < 1 || !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::InvalidArgument(format!(
            "bad grid: from {from} to {to} in {steps} steps"
        )));
    }
    if log && from <= 0.0 {
        return Err(Error::InvalidArgument(
            "log grids need a positive lower end".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            if log {
                (from.ln() + t * (to.ln() - from.ln())).exp()
            } else {
                from + t * (to - from)
            }
        })
        .collect())
}

fn run_indexed<T, F>(points: Vec<T>, eval: F) -> Result<Vec<SweepRow>>
where
    T: Sync,
    F: Fn(&T) -> Result<SweepRow> + Sync,
{
    let mut rows: Vec<(usize, SweepRow)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| eval(p).map(|r| (i, r)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Bounds over an energy grid for one family, scenario and task. In the
/// source scenario the per-Fock table is computed once and shared by all
/// grid points.
pub fn sweep_nbar(
    family: &ModeFamily,
    scenario: Scenario,
    task: Task,
    nbars: &[f64],
    n_max: usize,
) -> Result<Vec<SweepRow>> {
    match scenario {
        Scenario::Channel => run_indexed(nbars.to_vec(), |&nbar| {
            let started = std::time::Instant::now();
            let ec = EnergyConstraint::new(nbar, n_max)?;
            let b = gram::channel_bound(family, &ec, task)?;
            Ok(SweepRow {
                params: vec![("nbar".into(), fmt(nbar))],
                bound: b.bound,
                status: b.status,
                n_max,
                tol: b.tolerance,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            })
        }),
        Scenario::Source => {
            let table = source::fock_table(family, n_max, task)?;
            run_indexed(nbars.to_vec(), |&nbar| {
                let started = std::time::Instant::now();
                let ec = EnergyConstraint::new(nbar, n_max)?;
                let b = source::lp_bound(&table, &ec)?;
                Ok(SweepRow {
                    params: vec![("nbar".into(), fmt(nbar))],
                    bound: b.bound,
                    status: b.status,
                    n_max,
                    tol: b.tolerance,
                    wall_ms: started.elapsed().as_secs_f64() * 1e3,
                })
            })
        }
    }
}

/// Two-mode channel bounds over a polar grid of the complex overlap
/// (the polar-plot figures): moduli `0..=1` in `abs_steps` increments and
/// `arg_steps` angles around the circle.
pub fn sweep_polar_k(
    task: Task,
    nbar: f64,
    n_max: usize,
    abs_steps: usize,
    arg_steps: usize,
) -> Result<Vec<SweepRow>> {
    if abs_steps < 1 || arg_steps < 1 {
        return Err(Error::InvalidArgument("polar grid needs ≥ 1 step".into()));
    }
    let mut points = Vec::new();
    for ia in 0..=abs_steps {
        let k_abs = ia as f64 / abs_steps as f64;
        for ja in 0..arg_steps {
            let k_arg = 2.0 * std::f64::consts::PI * ja as f64 / arg_steps as f64;
            points.push((k_abs, k_arg));
        }
    }
    // conjugated grid points are relabelings of the same physics and the
    // figures are checked for that symmetry below the default gap, so polar
    // sweeps solve tighter than the default tolerances
    let tight = SdpSettings {
        gap_tol: 1e-9,
        feas_tol: 1e-9,
        ..SdpSettings::default()
    };
    run_indexed(points, |&(k_abs, k_arg)| {
        let started = std::time::Instant::now();
        let k = Complex64::from_polar(k_abs, k_arg);
        let family = ModeFamily::two_mode(k)?;
        let ec = EnergyConstraint::new(nbar, n_max)?;
        let b = gram::channel_bound_with(&family, &ec, task, &tight)?;
        Ok(SweepRow {
            params: vec![
                ("k_abs".into(), fmt(k_abs)),
                ("k_arg".into(), fmt(k_arg)),
                ("k_re".into(), fmt(k.re)),
                ("k_im".into(), fmt(k.im)),
            ],
            bound: b.bound,
            status: b.status,
            n_max,
            tol: b.tolerance,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    })
}

/// DPS bounds keyed by the energy per pulse `μ = n̄/(ℓ+1)`.
pub fn sweep_dps_mu(
    ell: usize,
    scenario: Scenario,
    task: Task,
    mus: &[f64],
    n_max: usize,
) -> Result<Vec<SweepRow>> {
    let family = ModeFamily::dps(ell)?;
    let nbars: Vec<f64> = mus.iter().map(|mu| mu * (ell as f64 + 1.0)).collect();
    let rows = sweep_nbar(&family, scenario, task, &nbars, n_max)?;
    Ok(rows
        .into_iter()
        .zip(mus)
        .map(|(mut row, &mu)| {
            row.params.insert(0, ("mu".into(), fmt(mu)));
            row.params.insert(0, ("ell".into(), ell.to_string()));
            row
        })
        .collect())
}

/// Lossy two-mode curves: the heuristic estimate together with the
/// coherent-state and Fock-state reference curves, keyed by `curve`.
pub fn sweep_losses(
    k_values: &[f64],
    t2_values: &[f64],
    nbar: f64,
    opts: &HeuristicOptions,
) -> Result<Vec<SweepRow>> {
    let mut points = Vec::new();
    for &k in k_values {
        for &t2 in t2_values {
            points.push((k, t2));
        }
    }
    let m = nbar.round() as usize;
    let heuristic_rows = run_indexed(points.clone(), |&(k, t2)| {
        let started = std::time::Instant::now();
        let ch = LossChannel::new(t2)?;
        let r = losses::heuristic_channel_lossy(Complex64::new(k, 0.0), nbar, &ch, opts)?;
        Ok(SweepRow {
            params: vec![
                ("k".into(), fmt(k)),
                ("t2".into(), fmt(t2)),
                ("curve".into(), "heuristic".into()),
            ],
            bound: r.estimate,
            status: SolveStatus::Optimal,
            n_max: opts.n_trunc,
            tol: f64::NAN,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    })?;
    let mut rows = heuristic_rows;
    for &(k, t2) in &points {
        let ch = LossChannel::new(t2)?;
        for (curve, value) in [
            ("coherent", losses::coherent_bound(k, nbar, &ch)?),
            ("fock", losses::fock_bound_lossy(k, m, &ch)?),
        ] {
            rows.push(SweepRow {
                params: vec![
                    ("k".into(), fmt(k)),
                    ("t2".into(), fmt(t2)),
                    ("curve".into(), curve.into()),
                ],
                bound: value,
                status: SolveStatus::Optimal,
                n_max: opts.n_trunc,
                tol: 0.0,
                wall_ms: 0.0,
            });
        }
    }
    Ok(rows)
}

/// Write rows as CSV: key columns, then
/// `bound,status,n_max,tol,wall_ms`.
pub fn write_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let keys: Vec<&str> = first.params.iter().map(|(k, _)| k.as_str()).collect();
    for row in rows {
        let row_keys: Vec<&str> = row.params.iter().map(|(k, _)| k.as_str()).collect();
        if row_keys != keys {
            return Err(Error::InvalidArgument(
                "rows carry inconsistent key columns".into(),
            ));
        }
    }
    writeln!(w, "{},bound,status,n_max,tol,wall_ms", keys.join(","))?;
    for row in rows {
        let params = row
            .params
            .iter()
            .map(|(_, v)| v.clone())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            w,
            "{params},{},{},{},{:.3e},{:.3}",
            fmt(row.bound),
            row.status,
            row.n_max,
            row.tol,
            row.wall_ms
        )?;
    }
    Ok(())
}
