//! Gibbs map `Π(μ) ∝ e^{−2 W*μ} γ`, free energy, their differentials and
//! fixed points, on a polar grid.
//!
//! `γ ∝ e^{−2V}` is stored as a log-density so that deep tails of quartic
//! confinements never underflow before normalization.

mod spectral;

pub use spectral::{spectral_gap_1d, SpectralGap};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{v_norm, GridMeasure2D, Measure, PolarGrid, SignedGridMeasure};
use crate::potentials::{ConfinementPotential, InteractionPotential};

/// Zero-mass tolerance for tangent measures, relative to their total variation.
const ZERO_MASS_TOL: f64 = 1e-10;

/// `Π(μ)` together with `Z(μ) = ∫ e^{−2 W*μ} dγ`.
#[derive(Debug, Clone)]
pub struct GibbsResult {
    pub measure: GridMeasure2D,
    pub z_value: f64,
}

/// One row of the fixed-point log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointRecord {
    pub iter: usize,
    pub residual_vnorm: f64,
    /// `E(μ) = F(Π(μ))`; NaN for non-symmetric interactions.
    pub energy_e: f64,
    pub mean: [f64; 2],
    pub damping: f64,
}

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub measure: GridMeasure2D,
    /// `‖Π(μ) − μ‖_V` at the returned measure.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<FixedPointRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Allowed increase of `E` between accepted iterates.
    pub energy_slack: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
            energy_slack: 1e-10,
        }
    }
}

/// Confinement, interaction and grid bundled with the cached reference
/// measure `γ`.
#[derive(Debug, Clone)]
pub struct GibbsModel {
    potential: ConfinementPotential,
    interaction: InteractionPotential,
    grid: Arc<PolarGrid>,
    v_nodes: Vec<f64>,
    log_gamma: Vec<f64>,
    gamma: GridMeasure2D,
}

impl GibbsModel {
    pub fn new(
        potential: ConfinementPotential,
        interaction: InteractionPotential,
        grid: Arc<PolarGrid>,
    ) -> Result<Self> {
        let mut v_nodes = Vec::with_capacity(grid.len());
        for p in grid.points() {
            v_nodes.push(potential.eval(p)?);
        }
        let logits: Vec<f64> = v_nodes.iter().map(|v| -2.0 * v).collect();
        let (gamma, log_z) = GridMeasure2D::from_log_density(grid.clone(), &logits)?;
        let log_gamma = logits.iter().map(|l| l - log_z).collect();
        Ok(Self {
            potential,
            interaction,
            grid,
            v_nodes,
            log_gamma,
            gamma,
        })
    }

    /// Same confinement and grid, different interaction.
    pub fn with_interaction(&self, interaction: InteractionPotential) -> Self {
        Self {
            interaction,
            ..self.clone()
        }
    }

    pub fn potential(&self) -> &ConfinementPotential {
        &self.potential
    }

    pub fn interaction(&self) -> &InteractionPotential {
        &self.interaction
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// `γ(dx) = e^{−2V(x)} dx / Z` on the grid.
    pub fn gamma(&self) -> &GridMeasure2D {
        &self.gamma
    }

    pub fn log_gamma(&self) -> &[f64] {
        &self.log_gamma
    }

    pub fn v_nodes(&self) -> &[f64] {
        &self.v_nodes
    }

    /// Dual V-norm of any measure against this model's confinement.
    pub fn v_norm(&self, mu: &dyn Measure) -> f64 {
        match as_grid_atoms(mu, &self.grid) {
            Some(_) => {
                let mut s = 0.0;
                let mut k = 0;
                let v = &self.v_nodes;
                mu.for_each_atom(&mut |_, w| {
                    s += v[k] * w.abs();
                    k += 1;
                });
                s
            }
            None => v_norm(mu, &self.potential),
        }
    }

    /// `W*μ(x)`.
    pub fn convolve(&self, mu: &dyn Measure, x: &[f64]) -> f64 {
        convolve_interaction(&self.interaction, mu, x)
    }

    /// `W*μ` at every grid node.
    pub fn convolve_nodes(&self, mu: &dyn Measure) -> Vec<f64> {
        if let Some(a) = self.interaction.linear_matrix() {
            let m = mu.mean();
            let u = [
                a[0][0] * m[0] + a[0][1] * m[1],
                a[1][0] * m[0] + a[1][1] * m[1],
            ];
            return self
                .grid
                .points()
                .iter()
                .map(|p| p[0] * u[0] + p[1] * u[1])
                .collect();
        }
        let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
        mu.for_each_atom(&mut |y, w| {
            if w != 0.0 {
                atoms.push((y.to_vec(), w));
            }
        });
        self.grid
            .points()
            .iter()
            .map(|p| {
                atoms
                    .iter()
                    .map(|(y, w)| w * self.interaction.value(p, y))
                    .sum()
            })
            .collect()
    }

    /// Gibbs map. Densities are formed in log space with a max shift.
    pub fn pi_map(&self, mu: &dyn Measure) -> Result<GibbsResult> {
        if mu.dim() != 2 {
            return Err(Error::InvalidMeasure("Gibbs map is planar".into()));
        }
        if self.interaction.is_zero() {
            return Ok(GibbsResult {
                measure: self.gamma.clone(),
                z_value: 1.0,
            });
        }
        let conv = self.convolve_nodes(mu);
        let logits: Vec<f64> = self
            .log_gamma
            .iter()
            .zip(&conv)
            .map(|(lg, c)| lg - 2.0 * c)
            .collect();
        let (measure, log_z) = GridMeasure2D::from_log_density(self.grid.clone(), &logits)?;
        Ok(GibbsResult {
            measure,
            z_value: log_z.exp(),
        })
    }

    /// Free energy `∫ log(dμ/dγ) dμ + ∬ W dμ dμ`, with `0 log 0 = 0`.
    pub fn free_energy(&self, mu: &GridMeasure2D) -> Result<f64> {
        self.check_grid(mu.grid())?;
        let mut entropy = 0.0;
        for ((d, w), lg) in mu
            .density()
            .iter()
            .zip(self.grid.quad_weights())
            .zip(&self.log_gamma)
        {
            if *d > 0.0 {
                if !lg.is_finite() {
                    return Ok(f64::INFINITY);
                }
                entropy += w * d * (d.ln() - lg);
            }
        }
        Ok(entropy + self.interaction_energy(mu))
    }

    /// `∬ W dμ dμ`.
    pub fn interaction_energy(&self, mu: &dyn Measure) -> f64 {
        if let Some(a) = self.interaction.linear_matrix() {
            let m = mu.mean();
            return m[0] * (a[0][0] * m[0] + a[0][1] * m[1])
                + m[1] * (a[1][0] * m[0] + a[1][1] * m[1]);
        }
        let conv = self.convolve_nodes_of(mu);
        conv.into_iter().sum()
    }

    // Σ_x w_x W*μ(x) over the atoms of μ itself
    fn convolve_nodes_of(&self, mu: &dyn Measure) -> Vec<f64> {
        let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
        mu.for_each_atom(&mut |y, w| {
            if w != 0.0 {
                atoms.push((y.to_vec(), w));
            }
        });
        atoms
            .iter()
            .map(|(x, wx)| {
                wx * atoms
                    .iter()
                    .map(|(y, wy)| wy * self.interaction.value(x, y))
                    .sum::<f64>()
            })
            .collect()
    }

    /// Lyapunov functional `E(μ) = F(Π(μ))`.
    pub fn energy_e(&self, mu: &dyn Measure) -> Result<f64> {
        let pi = self.pi_map(mu)?;
        self.free_energy(&pi.measure)
    }

    /// `DΠ(μ)·ν = −2 (W*ν − ∫ W*ν dΠ(μ)) Π(μ)` for zero-mass `ν`.
    pub fn d_pi(&self, mu: &dyn Measure, nu: &dyn Measure) -> Result<SignedGridMeasure> {
        check_zero_mass(nu)?;
        let pi = self.pi_map(mu)?.measure;
        let conv = self.convolve_nodes(nu);
        let centre: f64 = conv
            .iter()
            .zip(pi.density())
            .zip(self.grid.quad_weights())
            .map(|((c, d), w)| c * d * w)
            .sum();
        let density = conv
            .iter()
            .zip(pi.density())
            .map(|(c, d)| -2.0 * (c - centre) * d)
            .collect();
        SignedGridMeasure::new(self.grid.clone(), density)
    }

    /// `DF(μ)·ν = ∫ [log(dμ/dγ) + 2 W*μ] dν`, symmetric `W` only.
    pub fn d_free_energy(&self, mu: &GridMeasure2D, nu: &SignedGridMeasure) -> Result<f64> {
        if !self.interaction.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        self.check_grid(mu.grid())?;
        self.check_grid(nu.grid())?;
        check_zero_mass(nu)?;
        let conv = self.convolve_nodes(mu);
        let mut s = 0.0;
        let nodes = nu
            .density()
            .iter()
            .zip(mu.density())
            .zip(&self.log_gamma)
            .zip(&conv)
            .zip(self.grid.quad_weights());
        for ((((&dn, &dm), lg), c), q) in nodes {
            if dn == 0.0 {
                continue;
            }
            if !(dm > 0.0) {
                return Err(Error::InvalidMeasure(
                    "tangent direction charges a node where μ vanishes".into(),
                ));
            }
            s += (dm.ln() - lg + 2.0 * c) * dn * q;
        }
        Ok(s)
    }

    /// Damped fixed-point iteration `μ ← (1 − d) μ + d Π(μ)`.
    ///
    /// For symmetric `W` an iterate is accepted only if `E` does not grow by
    /// more than `energy_slack`; otherwise the damping is halved for that
    /// step. Non-convergence is reported through `converged = false`.
    pub fn fixed_point_iterate(
        &self,
        mu0: &GridMeasure2D,
        opts: FixedPointOptions,
    ) -> Result<FixedPointOutcome> {
        if !(opts.tol > 0.0) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        if !(opts.damping > 0.0 && opts.damping <= 1.0) {
            return Err(Error::invalid(
                "damping",
                format!("{} outside (0, 1]", opts.damping),
            ));
        }
        self.check_grid(mu0.grid())?;
        let symmetric = self.interaction.is_symmetric();
        let mut mu = mu0.clone();
        let mut pi = self.pi_map(&mu)?.measure;
        let mut energy = if symmetric {
            self.free_energy(&pi)?
        } else {
            f64::NAN
        };
        let mut history = Vec::new();
        for iter in 0..=opts.max_iter {
            let residual = self.v_norm(&pi.difference(&mu)?);
            history.push(FixedPointRecord {
                iter,
                residual_vnorm: residual,
                energy_e: energy,
                mean: mu.mean2(),
                damping: opts.damping,
            });
            if residual < opts.tol {
                return Ok(FixedPointOutcome {
                    measure: mu,
                    residual,
                    iterations: iter,
                    converged: true,
                    history,
                });
            }
            if iter == opts.max_iter {
                return Ok(FixedPointOutcome {
                    measure: mu,
                    residual,
                    iterations: iter,
                    converged: false,
                    history,
                });
            }
            let mut damping = opts.damping;
            loop {
                let cand = mu.mix(&pi, damping)?;
                let cand_pi = self.pi_map(&cand)?.measure;
                let cand_energy = if symmetric {
                    self.free_energy(&cand_pi)?
                } else {
                    f64::NAN
                };
                if !symmetric || cand_energy <= energy + opts.energy_slack || damping < 1e-9 {
                    mu = cand;
                    pi = cand_pi;
                    energy = cand_energy;
                    if let Some(last) = history.last_mut() {
                        last.damping = damping;
                    }
                    break;
                }
                damping *= 0.5;
            }
        }
        unreachable!("loop returns at max_iter")
    }

    fn check_grid(&self, g: &PolarGrid) -> Result<()> {
        if self.grid.same_as(g) {
            Ok(())
        } else {
            Err(Error::InvalidMeasure(
                "measure lives on a different grid".into(),
            ))
        }
    }
}

/// Returns `Some(())` when `mu` enumerates exactly the nodes of `grid`.
fn as_grid_atoms(mu: &dyn Measure, grid: &PolarGrid) -> Option<()> {
    let mut n = 0usize;
    let mut ok = true;
    let pts = grid.points();
    mu.for_each_atom(&mut |x, _| {
        if ok {
            if n >= pts.len() || x[0] != pts[n][0] || x[1] != pts[n][1] {
                ok = false;
            }
            n += 1;
        }
    });
    (ok && n == pts.len()).then_some(())
}

fn check_zero_mass(nu: &dyn Measure) -> Result<()> {
    let mut mass = 0.0;
    let mut tv = 0.0;
    nu.for_each_atom(&mut |_, w| {
        mass += w;
        tv += w.abs();
    });
    if mass.abs() > ZERO_MASS_TOL * tv.max(1.0) {
        return Err(Error::NonzeroMass { mass });
    }
    Ok(())
}

/// `W*μ(x) = ∫ W(x, y) μ(dy)`; bilinear kernels use the mean only.
pub fn convolve_interaction(w: &InteractionPotential, mu: &dyn Measure, x: &[f64]) -> f64 {
    if let Some(a) = w.linear_matrix() {
        let m = mu.mean();
        return x[0] * (a[0][0] * m[0] + a[0][1] * m[1]) + x[1] * (a[1][0] * m[0] + a[1][1] * m[1]);
    }
    mu.integrate(&|y| w.value(x, y))
}

/// `∇ₓ(W*μ)(x)`.
pub fn convolve_interaction_grad(
    w: &InteractionPotential,
    mu: &dyn Measure,
    x: &[f64],
) -> Vec<f64> {
    let d = x.len();
    if w.linear_matrix().is_some() {
        let m = mu.mean();
        return w.grad_x(x, &m);
    }
    let mut g = vec![0.0; d];
    let mut buf = vec![0.0; d];
    mu.for_each_atom(&mut |y, wt| {
        w.grad_x_into(x, y, &mut buf);
        for (gi, bi) in g.iter_mut().zip(&buf) {
            *gi += wt * bi;
        }
    });
    g
}

/// `W*μ(x)` with the domination bound `|W*μ(x)| ≤ 2κ ‖μ‖_V V(x)` enforced
/// (relative slack `1e-9`).
pub fn convolve_checked(
    w: &InteractionPotential,
    v: &ConfinementPotential,
    mu: &dyn Measure,
    x: &[f64],
    kappa: f64,
) -> Result<f64> {
    let value = convolve_interaction(w, mu, x);
    let bound = 2.0 * kappa * v_norm(mu, v) * v.value(x);
    if value.abs() > bound * (1.0 + 1e-9) {
        return Err(Error::Domination { value, bound });
    }
    Ok(value)
}
