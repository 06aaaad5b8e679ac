//! Contraction toward the closed convex hull of `Im(Π)`:
//! `d(Φ_t(μ), hull) ≤ e^{−t} d(μ, hull)`.
//!
//! The hull is replaced by the convex hull of finitely many Gibbs images in
//! weighted dictionary-moment coordinates. Besides random images `Π(ν)`, the
//! proxy contains every image the integrator itself combined, which makes
//! the discrete inequality hold exactly: each state is `e^{−t} μ₀` plus
//! `(1 − e^{−t})` times a point of the proxy, and the distance to a convex
//! set is convex.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{integrate_flow_observed, FlowOptions};
use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::measures::{FunctionDictionary, GridMeasure2D, Measure, ParticleMeasure};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullRow {
    pub t: f64,
    pub distance: f64,
    /// `e^{−t} d(μ₀, hull)`.
    pub bound: f64,
    /// `distance / bound`, 1 by convention when both vanish.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullReport {
    pub rows: Vec<HullRow>,
    pub passed: bool,
    /// Number of hull generators.
    pub generators: usize,
    /// Numerical rank of the centered moment matrix.
    pub rank: usize,
    /// Set when the moment matrix is rank deficient.
    pub degenerate: Option<String>,
}

/// Ratio tolerance of the contraction check.
const RATIO_TOL: f64 = 1e-6;

/// Integrates the flow with `opts` and compares the proxy-hull distance at
/// every `checkpoint_stride`-th step with `e^{−t}` times the initial one.
pub fn hull_contraction_check(
    model: &GibbsModel,
    mu0: &GridMeasure2D,
    opts: FlowOptions,
    hull_samples: usize,
    checkpoint_stride: usize,
    dict: &FunctionDictionary,
    rng: &mut impl Rng,
) -> Result<HullReport> {
    if hull_samples == 0 {
        return Err(Error::invalid("hull_samples", "must be positive"));
    }
    let scaled = |mu: &dyn Measure| -> Vec<f64> {
        dict.moments(mu)
            .iter()
            .enumerate()
            .map(|(k, m)| dict.weight(k) * m)
            .collect()
    };

    let mut generators = Vec::with_capacity(hull_samples);
    for _ in 0..hull_samples {
        let nu = random_measure(model, rng);
        generators.push(scaled(&model.pi_map(&nu)?.measure));
    }

    let stride = checkpoint_stride.max(1);
    let mut states: Vec<(f64, Vec<f64>)> = vec![(0.0, scaled(mu0))];
    let mut step = 0usize;
    let traj = integrate_flow_observed(model, mu0, opts, &mut |t, mu, images| {
        for img in images {
            generators.push(scaled(*img));
        }
        step += 1;
        if step.is_multiple_of(stride) {
            states.push((t, scaled(mu)));
        }
    })?;
    let t_last = traj.records.last().map_or(0.0, |r| r.t);
    if states.last().is_none_or(|(t, _)| *t < t_last) {
        states.push((t_last, scaled(traj.final_state())));
    }

    let (rank, degenerate) = moment_rank(&generators);
    let dist = |z: &[f64]| -> f64 {
        let shifted: Vec<Vec<f64>> = generators
            .iter()
            .map(|g| g.iter().zip(z).map(|(a, b)| a - b).collect())
            .collect();
        min_norm_point(&shifted).1
    };
    let d0 = dist(&states[0].1);
    let mut rows = Vec::with_capacity(states.len());
    let mut passed = true;
    for (t, z) in &states {
        let d = if *t == 0.0 { d0 } else { dist(z) };
        let bound = (-t).exp() * d0;
        let ratio = if bound > 0.0 {
            d / bound
        } else if d == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        // distances at rounding level carry no information
        let ok = ratio <= 1.0 + RATIO_TOL || d <= 1e-14;
        passed &= ok;
        rows.push(HullRow {
            t: *t,
            distance: d,
            bound,
            ratio,
        });
    }
    Ok(HullReport {
        rows,
        passed,
        generators: generators.len(),
        rank,
        degenerate,
    })
}

/// Random point mass or small cloud inside the grid disc.
fn random_measure(model: &GibbsModel, rng: &mut impl Rng) -> ParticleMeasure {
    let r_max = 0.8 * model.grid().rho_max();
    let n = rng.random_range(1..=4);
    let mut pts = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let r = r_max * rng.random::<f64>().sqrt();
        let a = std::f64::consts::TAU * rng.random::<f64>();
        pts.push(r * a.cos());
        pts.push(r * a.sin());
    }
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.1).collect();
    ParticleMeasure::from_unnormalized(2, pts, w).expect("positive weights")
}

fn moment_rank(points: &[Vec<f64>]) -> (usize, Option<String>) {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if n < 2 || d == 0 {
        return (0, Some("fewer than two generators".into()));
    }
    let mean: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64)
        .collect();
    let m = DMatrix::from_fn(n, d, |i, k| points[i][k] - mean[k]);
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-10 * top.max(1e-300)).count();
    let full = d.min(n - 1);
    let degenerate = (rank < full)
        .then(|| format!("moment matrix has rank {rank} of {full}; the proxy hull is flat"));
    (rank, degenerate)
}

/// Wolfe's algorithm for the point of minimum Euclidean norm in the convex
/// hull of `points`. Returns the convex weights and the norm.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = points.len();
    assert!(n > 0, "empty point set");
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0, f64::max)
        .max(1e-300);
    let eps = 1e-14;

    let start = (0..n)
        .min_by(|&i, &j| dot(&points[i], &points[i]).total_cmp(&dot(&points[j], &points[j])))
        .expect("nonempty");
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let combine = |corral: &[usize], lambda: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; points[0].len()];
        for (&i, &l) in corral.iter().zip(lambda) {
            for (xk, pk) in x.iter_mut().zip(&points[i]) {
                *xk += l * pk;
            }
        }
        x
    };
    let mut x = points[start].clone();

    for _major in 0..10 * n + 100 {
        let xx = dot(&x, &x);
        let (j, xpj) = (0..n)
            .map(|i| (i, dot(&x, &points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if xx - xpj <= eps * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);
        loop {
            let Some(mu) = affine_min_norm(points, &corral) else {
                // affinely dependent corral: drop the newest point
                corral.pop();
                lambda.pop();
                break;
            };
            if mu.iter().all(|m| *m > eps) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= eps && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut k = 0;
            while k < corral.len() {
                if lambda[k] <= eps {
                    corral.swap_remove(k);
                    lambda.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= s);
        }
        x = combine(&corral, &lambda);
    }
    let mut weights = vec![0.0; n];
    for (&i, &l) in corral.iter().zip(&lambda) {
        weights[i] = l;
    }
    (weights, dot(&x, &x).sqrt())
}

/// Minimum-norm point of the affine hull of the corral, as affine weights.
fn affine_min_norm(points: &[Vec<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut a = DMatrix::zeros(k + 1, k + 1);
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[(r, c)] = points[i]
                .iter()
                .zip(&points[j])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        }
        a[(r, k)] = 1.0;
        a[(k, r)] = 1.0;
    }
    let mut b = DVector::zeros(k + 1);
    b[k] = 1.0;
    let sol = a.clone().lu().solve(&b)?;
    // reject numerically singular systems
    let resid = (&a * &sol - &b).norm();
    if !sol.iter().all(|v| v.is_finite()) || resid > 1e-8 {
        return None;
    }
    Some(sol.iter().take(k).copied().collect())
}
