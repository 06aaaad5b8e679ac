//! Euler–Maruyama simulation of the frozen diffusion
//! `dX = dB − (∇V + ∇ₓW*μ)(X) dt` and of the self-interacting diffusion
//! where `μ = μ_t` is the occupation measure
//! `μ_t = (r μ₀ + ∫₀^t δ_{X_s} ds) / (r + t)`.
//!
//! Noise comes from a ChaCha8 stream keyed by `(seed, 2·replica)`; thinning
//! uses the separate stream `(seed, 2·replica + 1)`, so for bilinear kernels
//! the path does not depend on the particle cap.

mod deficit;

pub use deficit::{deficit_checkpoint_times, pseudotrajectory_deficit, DeficitOptions, DeficitRow};

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gibbs::convolve_interaction_grad;
use crate::measures::io::fmt_f64;
use crate::measures::{thin, Measure, ParticleMeasure};
use crate::potentials::{ConfinementPotential, InteractionPotential};
use crate::stats::BatchMeans;

/// When to store snapshots of `μ_t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CheckpointSchedule {
    #[default]
    None,
    /// Every `n` steps.
    Stride(usize),
    /// At the first step reaching each listed time (sorted internally).
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdeConfig {
    pub x0: Vec<f64>,
    /// Weight of the initial occupation measure.
    pub r: f64,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    /// Replica index; selects independent streams for the same seed.
    pub replica: u64,
    /// Cap on the stored occupation cloud; 0 disables thinning.
    pub thin_max: usize,
    pub checkpoints: CheckpointSchedule,
    /// Record `(t, X, μ̄, ∫V dμ)` every this many steps (0: ends only).
    pub record_stride: usize,
    /// Explosion guard; defaults to 10 times the truncation radius of `V`.
    pub guard_radius: Option<f64>,
}

impl SdeConfig {
    pub fn new(x0: Vec<f64>, dt: f64, t_end: f64, seed: u64) -> Self {
        Self {
            x0,
            r: 1.0,
            dt,
            t_end,
            seed,
            replica: 0,
            thin_max: 10_000,
            checkpoints: CheckpointSchedule::None,
            record_stride: 0,
            guard_radius: None,
        }
    }

    /// Checks the invariants, including `dt ≤ 10⁻² / s` where `s` is the
    /// larger of `|∇V(x₀)|` and the Frobenius norm of `∇²V(x₀)`.
    pub fn validate(&self, v: &ConfinementPotential) -> Result<()> {
        if self.x0.is_empty() {
            return Err(Error::invalid("sde.x0", "must be nonempty"));
        }
        if !(self.r > 0.0) {
            return Err(Error::invalid(
                "sde.r",
                format!("must be positive, got {}", self.r),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(
                "sde.dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(
                "sde.t_end",
                "must be finite and nonnegative",
            ));
        }
        if self.dt >= self.r {
            return Err(Error::invalid(
                "sde.dt",
                format!("must be below the occupation weight r = {}", self.r),
            ));
        }
        if self.thin_max == 1 {
            return Err(Error::invalid(
                "sde.thin_max",
                "must be 0 (off) or at least 2",
            ));
        }
        let g = v.gradient(&self.x0);
        let h = v.hessian(&self.x0);
        let scale = norm(&g).max(norm(&h));
        if self.dt * scale > 1e-2 {
            return Err(Error::invalid(
                "sde.dt",
                format!(
                    "dt = {} exceeds 1e-2 / {:.4e}, the drift scale at x0",
                    self.dt, scale
                ),
            ));
        }
        Ok(())
    }

    fn guard(&self, v: &ConfinementPotential) -> Result<f64> {
        match self.guard_radius {
            Some(g) if g > 0.0 => Ok(g),
            Some(g) => Err(Error::invalid(
                "sde.guard_radius",
                format!("must be positive, got {g}"),
            )),
            None => v.truncation_radius(60.0).map(|r| 10.0 * r).ok_or_else(|| {
                Error::invalid(
                    "sde.guard_radius",
                    "required for confinements without a radial profile",
                )
            }),
        }
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Path of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SdePath {
    pub dim: usize,
    pub times: Vec<f64>,
    /// `X` at `times`, flattened.
    pub positions: Vec<f64>,
    /// Occupation mean `μ̄_t` at `times`, flattened.
    pub occupation_means: Vec<f64>,
    /// `∫ V dμ_t` at `times`.
    pub v_masses: Vec<f64>,
    pub snapshots: Vec<(f64, ParticleMeasure)>,
    /// `μ_T` (after the last thinning, if any).
    pub final_measure: ParticleMeasure,
    pub r: f64,
    pub dt: f64,
    pub steps: usize,
    pub thin_events: usize,
}

impl SdePath {
    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn occupation_mean(&self, k: usize) -> &[f64] {
        &self.occupation_means[k * self.dim..(k + 1) * self.dim]
    }

    /// `sup_t ∫ V dμ_t` over the recorded times.
    pub fn v_mass_sup(&self) -> f64 {
        self.v_masses
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Snapshot nearest to `t`, if one lies within `tol`.
    pub fn snapshot_at(&self, t: f64, tol: f64) -> Option<&ParticleMeasure> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
            .filter(|(s, _)| (s - t).abs() <= tol)
            .map(|(_, m)| m)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=self.dim).map(|i| format!("x{i}")));
        h.extend((1..=self.dim).map(|i| format!("meanmu_{i}")));
        h.push("intV_mu".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for k in 0..self.times.len() {
            let mut row = vec![fmt_f64(self.times[k])];
            row.extend(self.position(k).iter().map(|v| fmt_f64(*v)));
            row.extend(self.occupation_mean(k).iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(self.v_masses[k]));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `h(t) = r (e^t − 1)`.
pub fn time_change(r: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", "must be positive"));
    }
    Ok(r * t.exp_m1())
}

/// `h⁻¹(s) = log(1 + s/r)`.
pub fn inverse_time_change(r: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid("s", format!("must be nonnegative, got {s}")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", "must be positive"));
    }
    Ok((s / r).ln_1p())
}

pub(crate) fn noise_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * replica);
    rng
}

fn thin_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * replica + 1);
    rng
}

/// Occupation cloud with weights `scale · raw_k`, so the update
/// `μ ← (1 − λ) μ + λ δ_x` costs O(1): the scale absorbs `1 − λ` and the
/// new atom gets raw weight `λ / scale`.
struct Cloud {
    dim: usize,
    points: Vec<f64>,
    raw: Vec<f64>,
    scale: f64,
}

impl Cloud {
    fn new(mu0: &ParticleMeasure) -> Self {
        Self {
            dim: mu0.dim(),
            points: mu0.points_flat().to_vec(),
            raw: mu0.weights().to_vec(),
            scale: 1.0,
        }
    }

    fn deposit(&mut self, x: &[f64], lambda: f64) {
        self.scale *= 1.0 - lambda;
        self.points.extend_from_slice(x);
        self.raw.push(lambda / self.scale);
    }

    fn len(&self) -> usize {
        self.raw.len()
    }

    fn normalized(&self) -> Result<ParticleMeasure> {
        ParticleMeasure::from_unnormalized(self.dim, self.points.clone(), self.raw.clone())
    }

    fn thin_to(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Result<()> {
        let t = thin(&self.normalized()?, n, rng)?;
        self.points = t.points_flat().to_vec();
        self.raw = t.weights().to_vec();
        self.scale = 1.0;
        Ok(())
    }
}

/// Per-step view handed to observers.
pub struct StepView<'a> {
    pub step: usize,
    pub t: f64,
    pub x: &'a [f64],
    pub occupation_mean: &'a [f64],
}

enum Drift<'a> {
    Frozen(Vec<f64>),
    FrozenCustom(&'a ParticleMeasure),
    Linear([[f64; 2]; 2]),
    Cloud,
}

struct Engine<'a> {
    v: &'a ConfinementPotential,
    w: &'a InteractionPotential,
    cfg: &'a SdeConfig,
    drift: Drift<'a>,
}

impl Engine<'_> {
    fn run(&self, mu0: &ParticleMeasure, observe: &mut dyn FnMut(&StepView)) -> Result<SdePath> {
        let cfg = self.cfg;
        cfg.validate(self.v)?;
        let d = cfg.x0.len();
        if mu0.dim() != d {
            return Err(Error::invalid("mu0", "dimension differs from x0"));
        }
        if matches!(self.drift, Drift::Linear(_)) && d != 2 {
            return Err(Error::invalid("x0", "bilinear kernels are planar"));
        }
        let guard = cfg.guard(self.v)?;
        let steps = cfg.steps();
        let dt = cfg.dt;
        let sqdt = dt.sqrt();
        let mut noise = noise_rng(cfg.seed, cfg.replica);
        let mut trng = thin_rng(cfg.seed, cfg.replica);

        let mut cloud = Cloud::new(mu0);
        let mut mean = mu0.mean();
        let mut v_mass = mu0.integrate(&|x| self.v.value(x));
        let mut x = cfg.x0.clone();
        let mut grad = vec![0.0; d];
        let mut wgrad = vec![0.0; d];
        let mut buf = vec![0.0; d];

        let mut ck_times: Vec<f64> = match &cfg.checkpoints {
            CheckpointSchedule::Times(ts) => ts.clone(),
            _ => Vec::new(),
        };
        ck_times.sort_by(f64::total_cmp);
        let mut ck_next = 0usize;

        let mut path = SdePath {
            dim: d,
            times: Vec::new(),
            positions: Vec::new(),
            occupation_means: Vec::new(),
            v_masses: Vec::new(),
            snapshots: Vec::new(),
            final_measure: mu0.clone(),
            r: cfg.r,
            dt,
            steps,
            thin_events: 0,
        };
        let record = |path: &mut SdePath, t: f64, x: &[f64], mean: &[f64], vm: f64| {
            path.times.push(t);
            path.positions.extend_from_slice(x);
            path.occupation_means.extend_from_slice(mean);
            path.v_masses.push(vm);
        };
        record(&mut path, 0.0, &x, &mean, v_mass);
        let wants_snapshot = |k: usize, t: f64, ck_next: &mut usize| -> bool {
            match &cfg.checkpoints {
                CheckpointSchedule::None => false,
                CheckpointSchedule::Stride(s) => *s > 0 && k.is_multiple_of(*s),
                CheckpointSchedule::Times(_) => {
                    let mut hit = false;
                    while *ck_next < ck_times.len() && ck_times[*ck_next] <= t + 0.5 * dt {
                        *ck_next += 1;
                        hit = true;
                    }
                    hit
                }
            }
        };
        if wants_snapshot(0, 0.0, &mut ck_next) {
            path.snapshots.push((0.0, mu0.clone()));
        }

        for k in 1..=steps {
            let t = (k - 1) as f64 * dt;
            // drift at (X_t, μ_t)
            self.v.gradient_into(&x, &mut grad);
            match &self.drift {
                Drift::Frozen(g) => wgrad.copy_from_slice(g),
                Drift::FrozenCustom(mu) => {
                    wgrad.copy_from_slice(&convolve_interaction_grad(self.w, *mu, &x));
                }
                Drift::Linear(a) => {
                    wgrad[0] = a[0][0] * mean[0] + a[0][1] * mean[1];
                    wgrad[1] = a[1][0] * mean[0] + a[1][1] * mean[1];
                }
                Drift::Cloud => {
                    wgrad.iter_mut().for_each(|g| *g = 0.0);
                    for (y, m) in cloud.points.chunks_exact(d).zip(&cloud.raw) {
                        self.w.grad_x_into(&x, y, &mut buf);
                        for (g, b) in wgrad.iter_mut().zip(&buf) {
                            *g += m * b;
                        }
                    }
                    wgrad.iter_mut().for_each(|g| *g *= cloud.scale);
                }
            }
            // deposit X_t into the occupation measure
            let lambda = dt / (cfg.r + t);
            for (m, xi) in mean.iter_mut().zip(&x) {
                *m = (1.0 - lambda) * *m + lambda * xi;
            }
            v_mass = (1.0 - lambda) * v_mass + lambda * self.v.value(&x);
            cloud.deposit(&x, lambda);
            // move
            for i in 0..d {
                let z: f64 = StandardNormal.sample(&mut noise);
                x[i] += -(grad[i] + wgrad[i]) * dt + sqdt * z;
            }
            let t_new = k as f64 * dt;
            let nx = norm(&x);
            if !(nx <= guard) {
                return Err(Error::Explosion {
                    time: t_new,
                    norm: nx,
                    guard,
                });
            }
            if cfg.thin_max >= 2 && cloud.len() > 2 * cfg.thin_max {
                cloud.thin_to(cfg.thin_max, &mut trng)?;
                path.thin_events += 1;
            }
            observe(&StepView {
                step: k,
                t: t_new,
                x: &x,
                occupation_mean: &mean,
            });
            if (cfg.record_stride > 0 && k % cfg.record_stride == 0) || k == steps {
                record(&mut path, t_new, &x, &mean, v_mass);
            }
            if wants_snapshot(k, t_new, &mut ck_next) {
                path.snapshots.push((t_new, cloud.normalized()?));
            }
        }
        path.final_measure = cloud.normalized()?;
        Ok(path)
    }
}

/// Frozen diffusion `X^μ` for a fixed `μ`. The occupation statistics of the
/// path are still accumulated (starting from `δ_{x₀}` with weight `r`).
pub fn simulate_frozen(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    mu: &ParticleMeasure,
    cfg: &SdeConfig,
) -> Result<SdePath> {
    simulate_frozen_observed(v, w, mu, cfg, &mut |_| {})
}

pub fn simulate_frozen_observed(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    mu: &ParticleMeasure,
    cfg: &SdeConfig,
    observe: &mut dyn FnMut(&StepView),
) -> Result<SdePath> {
    let drift = if w.is_zero() {
        Drift::Frozen(vec![0.0; cfg.x0.len()])
    } else if w.linear_matrix().is_some() {
        Drift::Frozen(convolve_interaction_grad(w, mu, &cfg.x0))
    } else {
        Drift::FrozenCustom(mu)
    };
    let engine = Engine { v, w, cfg, drift };
    engine.run(&ParticleMeasure::dirac(&cfg.x0), observe)
}

/// Self-interacting diffusion started from `(x₀, μ₀)`.
pub fn simulate_self_interacting(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    cfg: &SdeConfig,
    mu0: &ParticleMeasure,
) -> Result<SdePath> {
    simulate_self_interacting_observed(v, w, cfg, mu0, &mut |_| {})
}

pub fn simulate_self_interacting_observed(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    cfg: &SdeConfig,
    mu0: &ParticleMeasure,
    observe: &mut dyn FnMut(&StepView),
) -> Result<SdePath> {
    let drift = if w.is_zero() {
        Drift::Frozen(vec![0.0; cfg.x0.len()])
    } else if let Some(a) = w.linear_matrix() {
        Drift::Linear(a)
    } else {
        Drift::Cloud
    };
    let engine = Engine { v, w, cfg, drift };
    engine.run(mu0, observe)
}

/// Time average of `f` along a path with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicEstimate {
    pub mean: f64,
    pub standard_error: f64,
}

/// A real function of the position.
pub type Observable = dyn Fn(&[f64]) -> f64;

/// Time averages `T⁻¹ ∫₀^T f(X^μ_s) ds` of the frozen diffusion for each
/// `f`, with batch-means errors over batches of `batch_time` time units.
pub fn ergodic_averages(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    mu: &ParticleMeasure,
    cfg: &SdeConfig,
    fs: &[&Observable],
    batch_time: f64,
) -> Result<Vec<ErgodicEstimate>> {
    let batch_len = ((batch_time / cfg.dt).round() as usize).max(1);
    let mut acc: Vec<BatchMeans> = fs.iter().map(|_| BatchMeans::new(batch_len)).collect();
    simulate_frozen_observed(v, w, mu, cfg, &mut |s| {
        for (a, f) in acc.iter_mut().zip(fs) {
            a.push(f(s.x));
        }
    })?;
    Ok(acc
        .iter()
        .map(|a| ErgodicEstimate {
            mean: a.mean(),
            standard_error: a.standard_error(),
        })
        .collect())
}
