//! Picard iteration for the mild form on a short horizon `[0, ε]`.
//!
//! Curves are represented by their values on a uniform time grid; `Π` of a
//! curve is interpolated linearly between grid times and integrated against
//! `e^{−(t−s)}` exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::measures::{GridMeasure2D, Measure, SignedGridMeasure};

/// Cylinder constants of the local existence argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConstants {
    /// Radius of the cylinder `{‖μ‖_V ≤ β}`.
    pub beta: f64,
    /// `sup ‖Π(ν)‖_V` over the cylinder.
    pub c_beta: f64,
    /// Lipschitz constant of `Π` on the cylinder.
    pub c_prime_beta: f64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub times: Vec<f64>,
    /// `iterates[n][k]` is the `n`-th iterate at `times[k]`.
    pub iterates: Vec<Vec<GridMeasure2D>>,
    /// `sup_k ‖μ⁽ⁿ⁺¹⁾(t_k) − μ⁽ⁿ⁾(t_k)‖_V`.
    pub sup_distances: Vec<f64>,
    /// Ratios of successive sup distances.
    pub contraction_ratios: Vec<f64>,
    /// `(1 − e^{−ε}) C′_β`, the certified contraction factor.
    pub contraction_bound: f64,
}

/// Sampled estimates of `C_β` and `C′_β`.
///
/// `C_β` maximizes `‖Π(ν)‖_V` over random tilts of `γ` and point masses in
/// the cylinder. `C′_β` maximizes `‖DΠ(ν)·η‖_V / ‖η‖_V` over the same `ν`
/// and dipoles `η = δ_x − δ_y`.
pub fn estimate_picard_constants(
    model: &GibbsModel,
    beta: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<PicardConstants> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be positive"));
    }
    let grid = model.grid();
    let v = model.potential();
    let r_max = grid.rho_max();
    let mut c_beta = 0.0f64;
    let mut c_prime = 0.0f64;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < samples && attempts < 100 * samples {
        attempts += 1;
        let a = [
            rng.random::<f64>() * 4.0 - 2.0,
            rng.random::<f64>() * 4.0 - 2.0,
        ];
        let logits: Vec<f64> = grid
            .points()
            .iter()
            .zip(model.log_gamma())
            .map(|(p, lg)| lg + a[0] * p[0] + a[1] * p[1])
            .collect();
        let nu = GridMeasure2D::from_log_density(grid.clone(), &logits)?.0;
        if model.v_norm(&nu) > beta {
            continue;
        }
        accepted += 1;
        let pi = model.pi_map(&nu)?.measure;
        c_beta = c_beta.max(model.v_norm(&pi));
        for _ in 0..4 {
            let x = random_point(r_max, rng);
            let y = random_point(r_max, rng);
            let eta = Dipole { x, y };
            let norm = v.value(&x) + v.value(&y);
            let d = model.d_pi(&nu, &eta)?;
            c_prime = c_prime.max(model.v_norm(&d) / norm);
        }
    }
    if accepted == 0 {
        return Err(Error::Precondition(format!(
            "no sampled measure has ‖ν‖_V ≤ β = {beta}"
        )));
    }
    Ok(PicardConstants {
        beta,
        c_beta,
        c_prime_beta: c_prime,
    })
}

fn random_point(r_max: f64, rng: &mut impl Rng) -> [f64; 2] {
    let r = r_max * rng.random::<f64>().sqrt();
    let a = std::f64::consts::TAU * rng.random::<f64>();
    [r * a.cos(), r * a.sin()]
}

/// `δ_x − δ_y`.
struct Dipole {
    x: [f64; 2],
    y: [f64; 2],
}

impl Measure for Dipole {
    fn dim(&self) -> usize {
        2
    }

    fn for_each_atom(&self, f: &mut dyn FnMut(&[f64], f64)) {
        f(&self.x, 1.0);
        f(&self.y, -1.0);
    }
}

/// Picard iterates `μ⁽ⁿ⁺¹⁾(t) = e^{−t} μ₀ + ∫₀^t e^{−(t−s)} Π(μ⁽ⁿ⁾(s)) ds`
/// on `n_time + 1` equally spaced times in `[0, ε]`, starting from the
/// constant curve `μ₀`.
pub fn picard_local(
    model: &GibbsModel,
    mu0: &GridMeasure2D,
    epsilon: f64,
    n_iter: usize,
    n_time: usize,
    constants: PicardConstants,
) -> Result<PicardResult> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    if n_time == 0 {
        return Err(Error::invalid("n_time", "must be positive"));
    }
    let growth = -(-epsilon).exp_m1();
    let start = model.v_norm(mu0);
    if start + growth * constants.c_beta > constants.beta {
        return Err(Error::Precondition(format!(
            "‖μ₀‖_V + (1 − e^{{−ε}}) C_β = {:.6e} exceeds β = {:.6e} (C_β = {:.6e})",
            start + growth * constants.c_beta,
            constants.beta,
            constants.c_beta
        )));
    }
    if epsilon * constants.c_prime_beta >= 1.0 {
        return Err(Error::Precondition(format!(
            "ε C′_β = {:.6e} is not below 1 (C′_β = {:.6e})",
            epsilon * constants.c_prime_beta,
            constants.c_prime_beta
        )));
    }

    let h = epsilon / n_time as f64;
    let times: Vec<f64> = (0..=n_time).map(|k| k as f64 * h).collect();
    // weights of the left and right node of one interval, for τ = 0
    let em = (-h).exp();
    let w_left = (1.0 - em * (1.0 + h)) / h;
    let w_right = (1.0 - em) - w_left;

    let mut iterates = vec![vec![mu0.clone(); n_time + 1]];
    let mut sup_distances = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let prev = iterates.last().expect("nonempty");
        let images = prev
            .iter()
            .map(|m| model.pi_map(m).map(|r| r.measure))
            .collect::<Result<Vec<_>>>()?;
        let mut curve = Vec::with_capacity(n_time + 1);
        curve.push(mu0.clone());
        for k in 1..=n_time {
            let mut parts: Vec<(f64, &GridMeasure2D)> = Vec::with_capacity(2 * k + 1);
            parts.push(((-times[k]).exp(), mu0));
            for j in 0..k {
                let decay = (-(times[k] - times[j + 1])).exp();
                parts.push((decay * w_left, &images[j]));
                parts.push((decay * w_right, &images[j + 1]));
            }
            let total: f64 = parts.iter().map(|(c, _)| c).sum();
            for p in parts.iter_mut() {
                p.0 /= total;
            }
            curve.push(GridMeasure2D::combine(&parts)?);
        }
        let sup = curve
            .iter()
            .zip(prev)
            .map(|(a, b)| a.difference(b).map(|d: SignedGridMeasure| model.v_norm(&d)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        sup_distances.push(sup);
        iterates.push(curve);
    }
    let contraction_ratios = sup_distances
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    Ok(PicardResult {
        times,
        iterates,
        sup_distances,
        contraction_ratios,
        contraction_bound: growth * constants.c_prime_beta,
    })
}
