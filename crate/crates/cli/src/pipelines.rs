//! One function per run kind. Each computes its results (fanning out over
//! the rayon pool where runs are independent) and then writes them in a
//! fixed order through [`Artifacts`].

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use selfdiff_core::gibbs::GibbsModel;
use selfdiff_core::measures::io::{fmt_f64, write_grid, write_particles};
use selfdiff_core::measures::{GridSpec, PolarGrid};
use selfdiff_core::potentials::{check_hypotheses, SamplingBox};
use selfdiff_core::rotation2d::{
    classify_regime, integrate_reduced, j_curve, kurtosis_sign_check, symmetry_integrals,
    RadialDensity, ReducedState, ReducedTrajectory, RegimeReport,
};
use selfdiff_core::sde::{
    simulate_frozen, simulate_self_interacting, CheckpointSchedule, SdeConfig, SdePath,
};
use selfdiff_core::semiflow::{integrate_flow, FlowOptions, Integrator};
use selfdiff_core::{ConfinementPotential, GridMeasure2D, ParticleMeasure};

use crate::artifacts::Artifacts;
use crate::config::{
    ExperimentConfig, IntegratorKind, InteractionKind, PotentialKind, RunKind, SdeMode,
};
use crate::error::CliError;

pub const HYPOTHESES_HEADER: [&str; 7] = [
    "id",
    "name",
    "worst_ratio",
    "fitted",
    "passed",
    "gauge_applied",
    "detail",
];
pub const SYMMETRY_HEADER: [&str; 5] = ["direction_deg", "phi", "I1", "I2_x", "I2_y"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "replica",
    "t_end",
    "mean_1",
    "mean_2",
    "mean_norm",
    "intV_sup",
    "thin_events",
    "atoms",
];
pub const REDUCED_HEADER: [&str; 6] =
    ["t", "alpha", "sigma", "sigma_unwrapped", "mean_x", "mean_y"];
pub const REGIME_HEADER: [&str; 7] = [
    "theta",
    "m2",
    "cos_theta_m2",
    "regime",
    "alpha1",
    "t_theta",
    "warning",
];
pub const JCURVE_HEADER: [&str; 3] = ["alpha", "J", "J_prime"];
pub const KURTOSIS_HEADER: [&str; 3] = ["alpha", "J_third", "J_prime"];
pub const PHASE_HEADER: [&str; 7] = [
    "a",
    "theta",
    "m2",
    "cos_theta_m2",
    "regime",
    "alpha1",
    "t_theta",
];

/// CSV with mixed text and numeric cells.
fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::Core(e.into());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Core(selfdiff_core::Error::Parse(e.to_string())))
}

fn num(v: f64) -> String {
    fmt_f64(v)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

fn grid_for(cfg: &ExperimentConfig, v: &ConfinementPotential) -> Result<Arc<PolarGrid>, CliError> {
    let g = cfg.grid.clone().unwrap_or_else(crate::config::empty);
    let spec = match g.rho_max {
        Some(r) => GridSpec::new(r, g.n_rho, g.n_angle),
        None => GridSpec::for_potential(v, g.n_rho, g.n_angle).map_err(|_| {
            CliError::Validation(
                "`grid.rho_max` is required for a confinement without a radial profile".into(),
            )
        })?,
    };
    Ok(PolarGrid::new(spec)?)
}

fn model_for(cfg: &ExperimentConfig) -> Result<GibbsModel, CliError> {
    let v = cfg.potential();
    let grid = grid_for(cfg, &v)?;
    Ok(GibbsModel::new(v, cfg.interaction(), grid)?)
}

pub fn run(kind: RunKind, cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    match kind {
        RunKind::Check => check(cfg, out),
        RunKind::Simulate => simulate(cfg, out),
        RunKind::Flow => flow(cfg, out),
        RunKind::Analyze2d => analyze2d(cfg, out),
        RunKind::PhaseDiagram => phase_diagram(cfg, out),
    }
}

fn check(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let c = cfg.check.clone().expect("resolved");
    let v = cfg.potential();
    let w = cfg.interaction();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let report = check_hypotheses(
        &v,
        &w,
        &SamplingBox::cube(2, c.half_width),
        c.samples,
        c.tol,
        &mut rng,
    )?;
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|h| {
            vec![
                h.id.to_string(),
                h.name.to_string(),
                num(h.worst_ratio),
                num(h.fitted),
                h.passed.to_string(),
                report.gauge_applied.to_string(),
                h.detail.clone(),
            ]
        })
        .collect();
    out.write("hypotheses.csv", &csv_bytes(&HYPOTHESES_HEADER, &rows)?)?;

    let model = model_for(cfg)?;
    let phis: [(&str, &dyn Fn(f64) -> f64); 5] = [
        ("u", &|u| u),
        ("u^2", &|u| u * u),
        ("exp(-u)", &|u| (-u).exp()),
        ("sin(3u)", &|u| (3.0 * u).sin()),
        ("cos(2u)exp(-u^2)", &|u| (2.0 * u).cos() * (-u * u).exp()),
    ];
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for deg in [37.0f64, 100.0, 245.0] {
        let y = [deg.to_radians().cos(), deg.to_radians().sin()];
        for (name, phi) in phis {
            let (i1, i2) = symmetry_integrals(model.gamma(), y, phi)?;
            worst = worst.max(i1.abs()).max(i2[0].abs()).max(i2[1].abs());
            rows.push(vec![
                num(deg),
                name.to_string(),
                num(i1),
                num(i2[0]),
                num(i2[1]),
            ]);
        }
    }
    out.write(
        "symmetry_integrals.csv",
        &csv_bytes(&SYMMETRY_HEADER, &rows)?,
    )?;
    Ok(format!(
        "hypotheses: {} of {} passed (kappa = {:.4}); max symmetry integral {worst:.2e}",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        report.kappa()
    ))
}

fn simulate(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let s = cfg.sde.clone().expect("resolved");
    let v = cfg.potential();
    let w = cfg.interaction();
    let base = SdeConfig {
        x0: s.x0.clone(),
        r: s.r,
        dt: s.dt,
        t_end: s.t_end,
        seed: cfg.seed,
        replica: 0,
        thin_max: s.thin_max,
        checkpoints: if s.checkpoint_stride > 0 {
            CheckpointSchedule::Stride(s.checkpoint_stride)
        } else {
            CheckpointSchedule::None
        },
        record_stride: s.record_stride,
        guard_radius: s.guard_radius,
    };
    base.validate(&v)?;
    let mu0 = ParticleMeasure::dirac(&s.x0);
    let frozen_mu = ParticleMeasure::dirac(s.frozen_at.as_deref().unwrap_or(&s.x0));
    let paths: Vec<SdePath> = (0..s.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let c = SdeConfig {
                replica: k,
                ..base.clone()
            };
            match s.mode {
                SdeMode::SelfInteracting => simulate_self_interacting(&v, &w, &c, &mu0),
                SdeMode::Frozen => simulate_frozen(&v, &w, &frozen_mu, &c),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut summary = Vec::new();
    for (k, p) in paths.iter().enumerate() {
        out.write_with(&format!("path_r{k}.csv"), |b| p.write_csv(b))?;
        out.write_with(&format!("final_measure_r{k}.csv"), |b| {
            write_particles(b, &p.final_measure)
        })?;
        for (j, (_, snap)) in p.snapshots.iter().enumerate() {
            out.write_with(&format!("snapshot_r{k}_{j:04}.csv"), |b| {
                write_particles(b, snap)
            })?;
        }
        let last = p.times.len() - 1;
        let m = p.occupation_mean(last);
        let m2 = m.get(1).copied().unwrap_or(0.0);
        summary.push(vec![
            k.to_string(),
            num(p.times[last]),
            num(m[0]),
            num(m2),
            num(m.iter().map(|x| x * x).sum::<f64>().sqrt()),
            num(p.v_mass_sup()),
            p.thin_events.to_string(),
            p.final_measure.len().to_string(),
        ]);
    }
    out.write("summary.csv", &csv_bytes(&SUMMARY_HEADER, &summary)?)?;
    Ok(format!("{} replica(s) to t = {}", paths.len(), s.t_end))
}

fn reduced_rows(tr: &ReducedTrajectory) -> Vec<Vec<String>> {
    tr.times
        .iter()
        .zip(&tr.states)
        .zip(&tr.sigma_unwrapped)
        .map(|((t, s), su)| {
            let m = s.mean();
            vec![
                num(*t),
                num(s.alpha),
                num(s.sigma),
                num(*su),
                num(m[0]),
                num(m[1]),
            ]
        })
        .collect()
}

fn flow(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let f = cfg.flow.clone().expect("resolved");
    let model = model_for(cfg)?;
    let b = [f.start_tilt[0], f.start_tilt[1]];
    let dens: Vec<f64> = model
        .grid()
        .points()
        .iter()
        .zip(model.gamma().density())
        .map(|(p, g)| g * (b[0] * p[0] + b[1] * p[1]).exp())
        .collect();
    let mu0 = GridMeasure2D::from_unnormalized(model.grid().clone(), dens)?;
    let opts = FlowOptions {
        dt: f.dt,
        t_end: f.t_end,
        integrator: match f.integrator {
            IntegratorKind::Etd2 => Integrator::Etd2,
            IntegratorKind::Euler => Integrator::ExponentialEuler,
        },
        snapshot_stride: f.snapshot_stride,
        energy_slack: f.energy_slack,
    };
    let traj = integrate_flow(&model, &mu0, opts)?;
    out.write_with("flow.csv", |buf| traj.write_csv(buf))?;
    if f.snapshot_stride > 0 {
        for (j, (_, snap)) in traj.snapshots.iter().enumerate() {
            out.write_with(&format!("flow_snapshot_{j:04}.csv"), |buf| {
                write_grid(buf, snap, None)
            })?;
        }
    }
    let mut note = String::new();
    let rotation = cfg
        .interaction
        .as_ref()
        .filter(|i| i.kind == InteractionKind::Rotation)
        .and_then(|i| i.theta().ok());
    if let (Some(theta), true) = (rotation, model.potential().is_radial()) {
        let rd = RadialDensity::from_potential(model.potential(), 240, 256, true)?;
        let dt = f.dt.min(0.01);
        let tr = integrate_reduced(
            &rd,
            theta,
            ReducedState::from_mean(mu0.mean2()),
            f.t_end,
            dt,
        )?;
        out.write(
            "reduced.csv",
            &csv_bytes(&REDUCED_HEADER, &reduced_rows(&tr))?,
        )?;
        note = ", reduced ODE alongside".into();
    }
    let last = traj.records.last().expect("at least the initial record");
    Ok(format!(
        "flow to t = {} in {} steps, final mean ({:.6}, {:.6}){note}",
        last.t,
        traj.records.len() - 1,
        last.mean[0],
        last.mean[1]
    ))
}

fn regime_row(theta: f64, rep: &RegimeReport) -> Vec<String> {
    vec![
        num(theta),
        num(rep.m2),
        num(rep.cos_theta_m2),
        rep.regime.label().to_string(),
        opt(rep.regime.alpha1()),
        opt(rep.regime.t_theta()),
        rep.warning.clone().unwrap_or_default(),
    ]
}

fn analyze2d(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let a = cfg.analyze2d.clone().expect("resolved");
    let theta = cfg
        .interaction
        .as_ref()
        .expect("resolved")
        .theta()
        .map_err(CliError::Validation)?;
    let rd = RadialDensity::from_potential(&cfg.potential(), a.n_rho, a.n_angle, a.jacobian)?;
    let rep = classify_regime(&rd, theta)?;
    out.write(
        "regime.csv",
        &csv_bytes(&REGIME_HEADER, &[regime_row(theta, &rep)])?,
    )?;

    let alpha_max = a
        .alpha_max
        .unwrap_or_else(|| rep.regime.alpha1().map_or(5.0, |a1| 2.0 * a1));
    let rows: Vec<Vec<String>> = j_curve(&rd, theta, alpha_max, a.j_points)
        .into_iter()
        .map(|r| r.iter().map(|v| num(*v)).collect())
        .collect();
    out.write("jcurve.csv", &csv_bytes(&JCURVE_HEADER, &rows)?)?;

    let samples: Vec<f64> = (1..=8).map(|k| alpha_max * k as f64 / 8.0).collect();
    let kurt = kurtosis_sign_check(&rd, &samples)?;
    let rows: Vec<Vec<String>> = kurt
        .third_derivative
        .iter()
        .zip(&kurt.first_derivative)
        .map(|((a, j3), (_, j1))| vec![num(*a), num(*j3), num(*j1)])
        .collect();
    out.write("kurtosis.csv", &csv_bytes(&KURTOSIS_HEADER, &rows)?)?;

    let tr = integrate_reduced(
        &rd,
        theta,
        ReducedState::new(a.start_alpha, a.start_sigma),
        a.reduced_t_end,
        a.reduced_dt,
    )?;
    out.write(
        "reduced.csv",
        &csv_bytes(&REDUCED_HEADER, &reduced_rows(&tr))?,
    )?;
    Ok(format!(
        "regime {} (cos(theta) m2 = {:.6}){}",
        rep.regime.label(),
        rep.cos_theta_m2,
        rep.regime
            .alpha1()
            .map_or_else(String::new, |a1| format!(", alpha1 = {a1:.10}"))
    ))
}

fn phase_diagram(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let p = cfg.phase_diagram.clone().expect("resolved");
    let block = cfg.potential.clone().expect("resolved");
    let potentials: Vec<(Option<f64>, ConfinementPotential)> = match &p.a_values {
        Some(list) => list
            .iter()
            .map(|&a| (Some(a), ConfinementPotential::quartic(a, block.b, block.c)))
            .collect(),
        None => vec![(
            (block.kind == PotentialKind::Quartic).then_some(block.a),
            block.build(),
        )],
    };
    let thetas: Vec<f64> = (0..p.n_theta)
        .map(|k| 2.0 * PI * (k as f64 + 0.5) / p.n_theta as f64)
        .collect();
    let densities: Vec<RadialDensity> = potentials
        .par_iter()
        .map(|(_, v)| RadialDensity::from_potential(v, p.n_rho, p.n_angle, true))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, f64)> = (0..potentials.len())
        .flat_map(|i| thetas.iter().map(move |&t| (i, t)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(i, theta)| {
            classify_regime(&densities[i], theta).map(|rep| {
                let mut row = vec![opt(potentials[i].0)];
                row.extend(regime_row(theta, &rep).into_iter().take(6));
                row
            })
        })
        .collect::<Result<_, _>>()?;
    out.write("phase_diagram.csv", &csv_bytes(&PHASE_HEADER, &rows)?)?;
    let supercritical = rows.iter().filter(|r| r[4] != "converge_to_gamma").count();
    Ok(format!(
        "{} (a, theta) points, {supercritical} supercritical",
        rows.len()
    ))
}
