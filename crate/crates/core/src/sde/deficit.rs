//! Asymptotic-pseudotrajectory deficit
//! `sup_{s ≤ T} d(μ_{h(t+s)}, Φ_s(μ_{h(t)}))` measured on the polar grid.
//!
//! Both the path snapshots and the flow live on the same grid (snapshots are
//! histogrammed), so a zero window gives exactly zero. With a finite
//! dictionary the result is a lower bound on the deficit in the full metric.

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::measures::{weak_distance, FunctionDictionary, GridMeasure2D};
use crate::semiflow::{integrate_flow, FlowOptions, Integrator};

use super::{time_change, SdePath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitOptions {
    /// Number of comparison points `s_j = j T / n` inside the window.
    pub compare_points: usize,
    /// Upper bound on the flow step; the actual step divides `T / n`.
    pub flow_dt: f64,
    pub integrator: Integrator,
}

impl Default for DeficitOptions {
    fn default() -> Self {
        Self {
            compare_points: 10,
            flow_dt: 0.01,
            integrator: Integrator::Etd2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitRow {
    pub t: f64,
    pub deficit: f64,
    /// Window offset where the supremum was attained.
    pub s_at_sup: f64,
}

fn offsets(t_window: f64, n: usize) -> Vec<f64> {
    if t_window == 0.0 {
        return vec![0.0];
    }
    (0..=n).map(|j| t_window * j as f64 / n as f64).collect()
}

fn check_args(t_list: &[f64], t_window: f64, opts: &DeficitOptions) -> Result<()> {
    if t_list.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("t_list", "times must be nonnegative"));
    }
    if !(t_window >= 0.0 && t_window.is_finite()) {
        return Err(Error::invalid("t_window", "must be finite and nonnegative"));
    }
    if opts.compare_points == 0 {
        return Err(Error::invalid("compare_points", "must be positive"));
    }
    if !(opts.flow_dt > 0.0) {
        return Err(Error::invalid("flow_dt", "must be positive"));
    }
    Ok(())
}

/// Path times `h(t + s_j)` at which snapshots are needed; feed them to
/// [`super::CheckpointSchedule::Times`].
pub fn deficit_checkpoint_times(
    r: f64,
    t_list: &[f64],
    t_window: f64,
    opts: &DeficitOptions,
) -> Result<Vec<f64>> {
    check_args(t_list, t_window, opts)?;
    let mut out = Vec::new();
    for &t in t_list {
        for s in offsets(t_window, opts.compare_points) {
            out.push(time_change(r, t + s)?);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Deficit at every `t` in `t_list`; the path must carry snapshots at the
/// times returned by [`deficit_checkpoint_times`].
pub fn pseudotrajectory_deficit(
    path: &SdePath,
    model: &GibbsModel,
    t_list: &[f64],
    t_window: f64,
    dict: &FunctionDictionary,
    opts: &DeficitOptions,
) -> Result<Vec<DeficitRow>> {
    check_args(t_list, t_window, opts)?;
    if path.dim != 2 {
        return Err(Error::invalid(
            "path",
            "deficits are computed on the planar grid",
        ));
    }
    let t_path = path.times.last().copied().unwrap_or(0.0);
    let tol = 0.5 * path.dt + 1e-9 * t_path.max(1.0);
    let n = opts.compare_points;
    let sub = if t_window > 0.0 {
        ((t_window / n as f64) / opts.flow_dt).ceil() as usize
    } else {
        1
    };
    let flow_opts = FlowOptions {
        dt: if t_window > 0.0 {
            t_window / (n * sub) as f64
        } else {
            opts.flow_dt.min(0.5)
        },
        t_end: t_window,
        integrator: opts.integrator,
        snapshot_stride: sub,
        energy_slack: f64::INFINITY,
    };
    for &t in t_list {
        let need = time_change(path.r, t + t_window)?;
        if need > t_path + tol {
            return Err(Error::invalid(
                "path",
                format!("path ends at {t_path} but h(t+T) = {need} is needed for t = {t}"),
            ));
        }
    }
    let grid = model.grid().clone();
    let gridded = |time: f64| -> Result<GridMeasure2D> {
        let snap = path
            .snapshot_at(time, tol)
            .ok_or_else(|| Error::invalid("path", format!("no snapshot near time {time}")))?;
        GridMeasure2D::histogram(grid.clone(), snap)
    };

    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let start = gridded(time_change(path.r, t)?)?;
        let flow = integrate_flow(model, &start, flow_opts)?;
        let mut best = (0.0, 0.0);
        for (j, s) in offsets(t_window, n).into_iter().enumerate() {
            let target = gridded(time_change(path.r, t + s)?)?;
            let flowed = &flow.snapshots[j].1;
            let d = weak_distance(&target, flowed, dict);
            if d > best.0 || j == 0 {
                best = (d, s);
            }
        }
        rows.push(DeficitRow {
            t,
            deficit: best.0,
            s_at_sup: best.1,
        });
    }
    Ok(rows)
}
