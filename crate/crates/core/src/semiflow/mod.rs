//! The measure-valued semiflow `μ̇ = Π(μ) − μ` in mild form
//! `Φ_t(μ) = e^{−t} μ + ∫₀^t e^{−(t−s)} Π(Φ_s(μ)) ds`.
//!
//! Every update is a convex combination of the current state and Gibbs
//! images, so states stay probability measures for any step size.

mod hull;
mod picard;

pub use hull::{hull_contraction_check, min_norm_point, HullReport, HullRow};
pub use picard::{estimate_picard_constants, picard_local, PicardConstants, PicardResult};

use std::io::Write;

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::measures::io::fmt_f64;
use crate::measures::GridMeasure2D;

/// Time stepper for [`integrate_flow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// `μ' = e^{−h} μ + (1 − e^{−h}) Π(μ)`, first order.
    ExponentialEuler,
    /// Second-order exponential Runge–Kutta (Cox–Matthews ETD2RK).
    #[default]
    Etd2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// Keep a full snapshot every `snapshot_stride` steps (0 keeps only the
    /// first and last states).
    pub snapshot_stride: usize,
    /// Allowed increase of `E` per step for symmetric interactions.
    pub energy_slack: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 5.0,
            integrator: Integrator::Etd2,
            snapshot_stride: 0,
            energy_slack: 1e-8,
        }
    }
}

/// Diagnostics at one time of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRecord {
    pub t: f64,
    pub mean: [f64; 2],
    /// `‖Φ_t(μ) − γ‖_V`.
    pub vnorm_to_gamma: f64,
    /// `E = F∘Π`; NaN when `W` is not symmetric.
    pub energy_e: f64,
    /// `‖Π(Φ_t(μ)) − Φ_t(μ)‖_V`.
    pub residual_pi: f64,
    /// `∫ V dΦ_t(μ)`.
    pub v_mass: f64,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub records: Vec<FlowRecord>,
    /// `(t, Φ_t(μ))` at the snapshot stride, always including both ends.
    pub snapshots: Vec<(f64, GridMeasure2D)>,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `E` along the trajectory when the interaction is symmetric.
    pub fn energies(&self) -> Option<Vec<f64>> {
        let e: Vec<f64> = self.records.iter().map(|r| r.energy_e).collect();
        e.iter().all(|v| !v.is_nan()).then_some(e)
    }

    pub fn means(&self) -> Vec<[f64; 2]> {
        self.records.iter().map(|r| r.mean).collect()
    }

    pub fn final_state(&self) -> &GridMeasure2D {
        &self
            .snapshots
            .last()
            .expect("trajectory has a final snapshot")
            .1
    }

    pub const CSV_HEADER: [&'static str; 6] = [
        "t",
        "mean_x",
        "mean_y",
        "vnorm_to_gamma",
        "energy_E",
        "residual_pi",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                fmt_f64(r.t),
                fmt_f64(r.mean[0]),
                fmt_f64(r.mean[1]),
                fmt_f64(r.vnorm_to_gamma),
                fmt_f64(r.energy_e),
                fmt_f64(r.residual_pi),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(
            "dt",
            format!("must lie in (0, 0.5], got {dt}"),
        ))
    }
}

/// One exponential-Euler step `e^{−dt} μ + (1 − e^{−dt}) Π(μ)`.
pub fn flow_step(model: &GibbsModel, mu: &GridMeasure2D, dt: f64) -> Result<GridMeasure2D> {
    check_dt(dt)?;
    let pi = model.pi_map(mu)?.measure;
    mu.mix(&pi, -(-dt).exp_m1())
}

/// One ETD2RK step. `pi_mu` must be `Π(μ)`; the predictor's image is
/// returned alongside so callers can track every Gibbs image used.
fn etd2_step(
    model: &GibbsModel,
    mu: &GridMeasure2D,
    pi_mu: &GridMeasure2D,
    h: f64,
) -> Result<(GridMeasure2D, GridMeasure2D)> {
    let one_minus = -(-h).exp_m1();
    let predictor = mu.mix(pi_mu, one_minus)?;
    let pi_pred = model.pi_map(&predictor)?.measure;
    // c = (e^{−h} − 1 + h) / h lies in [0, 1 − e^{−h}]
    let c = ((-h).exp_m1() + h) / h;
    let next =
        GridMeasure2D::combine(&[(1.0 - one_minus, mu), (one_minus - c, pi_mu), (c, &pi_pred)])?;
    Ok((next, pi_pred))
}

/// Single ETD2RK step from `μ`.
pub fn flow_step_etd2(model: &GibbsModel, mu: &GridMeasure2D, dt: f64) -> Result<GridMeasure2D> {
    check_dt(dt)?;
    let pi = model.pi_map(mu)?.measure;
    Ok(etd2_step(model, mu, &pi, dt)?.0)
}

/// Integrates the semiflow over `[0, t_end]` in `⌈t_end/dt⌉` equal steps.
///
/// For symmetric `W`, aborts with [`Error::EnergyIncrease`] if `E` grows by
/// more than `energy_slack` over a step.
pub fn integrate_flow(
    model: &GibbsModel,
    mu0: &GridMeasure2D,
    opts: FlowOptions,
) -> Result<FlowTrajectory> {
    integrate_flow_observed(model, mu0, opts, &mut |_, _, _| {})
}

/// As [`integrate_flow`], calling `observe(t, μ_t, images)` after every
/// step with the Gibbs images the step combined.
pub fn integrate_flow_observed(
    model: &GibbsModel,
    mu0: &GridMeasure2D,
    opts: FlowOptions,
    observe: &mut dyn FnMut(f64, &GridMeasure2D, &[&GridMeasure2D]),
) -> Result<FlowTrajectory> {
    check_dt(opts.dt)?;
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(Error::invalid("t_end", "must be finite and nonnegative"));
    }
    let steps = (opts.t_end / opts.dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 {
        opts.t_end / steps as f64
    } else {
        0.0
    };
    let symmetric = model.interaction().is_symmetric();

    let mut mu = mu0.clone();
    let mut pi = model.pi_map(&mu)?.measure;
    let mut records = Vec::with_capacity(steps + 1);
    let mut snapshots = vec![(0.0, mu.clone())];
    let record = |t: f64, mu: &GridMeasure2D, pi: &GridMeasure2D| -> Result<FlowRecord> {
        Ok(FlowRecord {
            t,
            mean: mu.mean2(),
            vnorm_to_gamma: model.v_norm(&mu.difference(model.gamma())?),
            energy_e: if symmetric {
                model.free_energy(pi)?
            } else {
                f64::NAN
            },
            residual_pi: model.v_norm(&pi.difference(mu)?),
            v_mass: mu.grid_integrate(|x| model.potential().value(x)),
        })
    };
    records.push(record(0.0, &mu, &pi)?);
    for k in 1..=steps {
        let t = k as f64 * h;
        let next = match opts.integrator {
            Integrator::ExponentialEuler => {
                let n = mu.mix(&pi, -(-h).exp_m1())?;
                observe(t, &n, &[&pi]);
                n
            }
            Integrator::Etd2 => {
                let (n, pi_pred) = etd2_step(model, &mu, &pi, h)?;
                observe(t, &n, &[&pi, &pi_pred]);
                n
            }
        };
        mu = next;
        pi = model.pi_map(&mu)?.measure;
        let rec = record(t, &mu, &pi)?;
        if symmetric {
            let prev = records.last().map_or(f64::NAN, |r: &FlowRecord| r.energy_e);
            let increase = rec.energy_e - prev;
            if increase > opts.energy_slack {
                return Err(Error::EnergyIncrease {
                    time: t,
                    increase,
                    slack: opts.energy_slack,
                });
            }
        }
        records.push(rec);
        if (opts.snapshot_stride > 0 && k % opts.snapshot_stride == 0) || k == steps {
            snapshots.push((t, mu.clone()));
        }
    }
    Ok(FlowTrajectory { records, snapshots })
}
