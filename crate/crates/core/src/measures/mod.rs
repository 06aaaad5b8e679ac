//! Measures on R^d: weighted particle clouds and densities on a polar grid.
//!
//! Both representations implement [`Measure`], which exposes the measure as
//! a finite list of weighted atoms. Everything else (integrals, means, the
//! dual V-norm, dictionary moments) is written against that trait.

mod dictionary;
mod grid;
pub mod io;
mod particle;

pub use dictionary::{DictFunction, FunctionDictionary, Harmonic};
pub use grid::{
    GridMeasure2D, GridSpec, PolarGrid, SignedGridMeasure, DEFAULT_N_ANGLE, DEFAULT_N_RHO,
};
pub use particle::{thin, thin_with_report, ParticleMeasure, ThinReport};

use crate::error::{Error, Result};
use crate::potentials::ConfinementPotential;

/// A finite signed measure given by weighted atoms.
pub trait Measure {
    fn dim(&self) -> usize;

    /// Calls `f(point, weight)` for every atom.
    fn for_each_atom(&self, f: &mut dyn FnMut(&[f64], f64));

    fn integrate(&self, f: &dyn Fn(&[f64]) -> f64) -> f64 {
        let mut s = 0.0;
        self.for_each_atom(&mut |x, w| s += w * f(x));
        s
    }

    fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_atom(&mut |_, w| s += w);
        s
    }

    fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        self.for_each_atom(&mut |x, w| {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += w * xi;
            }
        });
        m
    }
}

/// Dual V-norm `∫ V d|μ|`.
///
/// For a positive measure this is `∫ V dμ`; for a signed measure given by
/// atoms with signed weights it is the exact supremum over `|φ| ≤ V`,
/// provided atoms sit at distinct points (true for grid measures).
pub fn v_norm(mu: &dyn Measure, v: &ConfinementPotential) -> f64 {
    let mut s = 0.0;
    mu.for_each_atom(&mut |x, w| s += v.value(x) * w.abs());
    s
}

/// `∫ V d|μ − ν|` for two particle measures, merging coincident atoms.
pub fn v_norm_difference(
    mu: &ParticleMeasure,
    nu: &ParticleMeasure,
    v: &ConfinementPotential,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidMeasure(format!(
            "dimension mismatch {} vs {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let mut atoms: Vec<(Vec<u64>, f64, usize, bool)> = Vec::with_capacity(mu.len() + nu.len());
    for (i, (x, w)) in mu.atoms().enumerate() {
        atoms.push((x.iter().map(|c| c.to_bits()).collect(), w, i, true));
    }
    for (i, (x, w)) in nu.atoms().enumerate() {
        atoms.push((x.iter().map(|c| c.to_bits()).collect(), -w, i, false));
    }
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut total = 0.0;
    let mut k = 0;
    while k < atoms.len() {
        let mut j = k;
        let mut w = 0.0;
        while j < atoms.len() && atoms[j].0 == atoms[k].0 {
            w += atoms[j].1;
            j += 1;
        }
        let (idx, from_mu) = (atoms[k].2, atoms[k].3);
        let x = if from_mu {
            mu.point(idx)
        } else {
            nu.point(idx)
        };
        total += v.value(x) * w.abs();
        k = j;
    }
    Ok(total)
}

/// Truncated weak metric `Σ_k w_k |μ(f_k) − ν(f_k)|` over the dictionary.
pub fn weak_distance(mu: &dyn Measure, nu: &dyn Measure, dict: &FunctionDictionary) -> f64 {
    let a = dict.moments(mu);
    let b = dict.moments(nu);
    dict.distance_from_moments(&a, &b)
}

/// Membership of a trajectory in `{μ : ∫ V dμ ≤ β}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    pub beta: f64,
    /// Supremum of `∫ V dμ_t` over the checkpoints.
    pub beta_estimate: f64,
    pub v_masses: Vec<f64>,
    pub in_p_beta: Vec<bool>,
}

impl TightnessReport {
    pub fn all_inside(&self) -> bool {
        self.in_p_beta.iter().all(|&b| b)
    }
}

pub fn tightness_check(
    traj: &[ParticleMeasure],
    v: &ConfinementPotential,
    beta: f64,
) -> Result<TightnessReport> {
    if traj.is_empty() {
        return Err(Error::invalid("traj", "trajectory is empty"));
    }
    let v_masses: Vec<f64> = traj.iter().map(|m| m.v_mass(v)).collect();
    let beta_estimate = v_masses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TightnessReport {
        beta,
        beta_estimate,
        in_p_beta: v_masses.iter().map(|&m| m <= beta).collect(),
        v_masses,
    })
}
