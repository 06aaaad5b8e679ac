//! Planar model `W(x, y) = (x, R(θ) y)` with a radial confinement.
//!
//! For this kernel `Π(μ)` depends on `μ` only through its mean, and the
//! semiflow reduces to an ODE for the mean `m = (α/2) v(σ)`. With
//! `H(α) = ∫γ(ρ) ∫ e^{−αρ cos u} du dρ` and `g = H′/H`:
//!
//! ```text
//! α̇ = −α − 2 cos θ g(α)          σ̇ = −2 sin θ g(α) / α
//! ```
//!
//! `Π` of a measure with mean `(α/2) v` is `e^{α (x, −R v)} γ / Z`, whose
//! mean is `−g(α) R v`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::measures::GridMeasure2D;
use crate::potentials::{rotation_matrix, ConfinementPotential, RadialFn};
use crate::quadrature::{log_sum_exp, uniform_angles, GaussLegendre};

/// Below this `α` the angular rate uses its series expansion.
const SERIES_ALPHA: f64 = 1e-8;

/// Relative width of the band around `cos θ · m₂ = −1` flagged as degenerate.
const BOUNDARY_TOL: f64 = 1e-9;

/// Radial law of `|X|` under `γ`, discretized for the `H` integrals.
#[derive(Clone)]
pub struct RadialDensity {
    profile: RadialFn,
    rho_max: f64,
    jacobian: bool,
    nodes: Vec<f64>,
    /// `γ(ρᵢ) wᵢ`, summing to one.
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    cos_table: Vec<f64>,
    sin2_table: Vec<f64>,
    m2: f64,
    m4: f64,
}

impl std::fmt::Debug for RadialDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialDensity")
            .field("rho_max", &self.rho_max)
            .field("n_rho", &self.nodes.len())
            .field("n_angle", &self.cos_table.len())
            .field("jacobian", &self.jacobian)
            .field("m2", &self.m2)
            .finish()
    }
}

impl RadialDensity {
    /// `γ(ρ) ∝ ρ e^{−2V(ρ)}` with the polar factor, or `∝ e^{−2V(ρ)}` when
    /// `jacobian` is false, on Gauss–Legendre nodes in `[0, rho_max]`.
    pub fn new(
        profile: RadialFn,
        rho_max: f64,
        n_rho: usize,
        n_angle: usize,
        jacobian: bool,
    ) -> Result<Self> {
        if !(rho_max > 0.0 && rho_max.is_finite()) {
            return Err(Error::invalid(
                "radial.rho_max",
                format!("must be positive, got {rho_max}"),
            ));
        }
        if n_rho < 8 {
            return Err(Error::invalid(
                "radial.n_rho",
                format!("need at least 8, got {n_rho}"),
            ));
        }
        if n_angle < 8 {
            return Err(Error::invalid(
                "radial.n_angle",
                format!("need at least 8, got {n_angle}"),
            ));
        }
        let gl = GaussLegendre::new(n_rho, 0.0, rho_max);
        let mut logs = Vec::with_capacity(n_rho);
        for (&r, &w) in gl.nodes.iter().zip(&gl.weights) {
            let v = profile(r);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    point: vec![r],
                    reason: format!("V(ρ) = {v}"),
                });
            }
            let jac = if jacobian { r.ln() } else { 0.0 };
            logs.push(w.ln() + jac - 2.0 * v);
        }
        let lz = log_sum_exp(logs.iter().copied());
        let log_weights: Vec<f64> = logs.iter().map(|l| l - lz).collect();
        let weights: Vec<f64> = log_weights.iter().map(|l| l.exp()).collect();
        let m2 = weights.iter().zip(&gl.nodes).map(|(w, r)| w * r * r).sum();
        let m4 = weights
            .iter()
            .zip(&gl.nodes)
            .map(|(w, r)| w * r.powi(4))
            .sum();
        let angles = uniform_angles(n_angle);
        Ok(Self {
            profile,
            rho_max,
            jacobian,
            nodes: gl.nodes,
            weights,
            log_weights,
            cos_table: angles.iter().map(|a| a.cos()).collect(),
            sin2_table: angles.iter().map(|a| a.sin().powi(2)).collect(),
            m2,
            m4,
        })
    }

    /// Radial density of a rotation-invariant confinement, truncated where
    /// `e^{−2(V − min V)}` drops below `e^{−60}`.
    pub fn from_potential(
        v: &ConfinementPotential,
        n_rho: usize,
        n_angle: usize,
        jacobian: bool,
    ) -> Result<Self> {
        if !v.is_radial() {
            return Err(Error::invalid(
                "potential",
                "confinement is not rotation invariant",
            ));
        }
        let rho_max = v
            .truncation_radius(60.0)
            .ok_or_else(|| Error::invalid("potential", "no truncation radius found"))?;
        let vc = v.clone();
        let profile: RadialFn = Arc::new(move |r| vc.radial(r).unwrap_or(f64::NAN));
        Self::new(profile, rho_max, n_rho, n_angle, jacobian)
    }

    /// Same law on twice as many radial and angular nodes.
    pub fn refined(&self) -> Result<Self> {
        Self::new(
            self.profile.clone(),
            self.rho_max,
            2 * self.nodes.len(),
            2 * self.cos_table.len(),
            self.jacobian,
        )
    }

    pub fn profile(&self, rho: f64) -> f64 {
        (self.profile)(rho)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn jacobian(&self) -> bool {
        self.jacobian
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights `γ(ρᵢ) wᵢ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_angle(&self) -> usize {
        self.cos_table.len()
    }

    /// `∫ ρ² γ(ρ) dρ`.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// `∫ ρ⁴ γ(ρ) dρ`.
    pub fn m4(&self) -> f64 {
        self.m4
    }

    /// `∫ f(ρ) γ(ρ) dρ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * f(*r))
            .sum()
    }
}

/// `H`, `H′`, `H̃` at one `α`, with the ratios that stay finite for large `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValues {
    pub h: f64,
    pub h_prime: f64,
    pub h_tilde: f64,
    pub log_h: f64,
    /// `H′ / H`.
    pub ratio: f64,
    /// `H̃ / H`.
    pub tilde_ratio: f64,
}

/// `H(α) = ∫γ∫e^{−αρ cos u}`, `H′` by the differentiated integrand and
/// `H̃(α) = ∫γ∫ρ² sin²u e^{−αρ cos u}`, all by tensor quadrature.
///
/// Each radial term is shifted by its largest exponent `|α|ρ` so nothing
/// overflows before the final rescaling.
pub fn h_functions(rd: &RadialDensity, alpha: f64) -> HValues {
    let n = rd.cos_table.len() as f64;
    let du = 2.0 * PI / n;
    let mut logs = Vec::with_capacity(rd.nodes.len());
    let mut parts = Vec::with_capacity(rd.nodes.len());
    for (&r, &lw) in rd.nodes.iter().zip(&rd.log_weights) {
        let shift = alpha.abs() * r;
        let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for (&c, &s2) in rd.cos_table.iter().zip(&rd.sin2_table) {
            let e = (-alpha * r * c - shift).exp();
            a0 += e;
            a1 += c * e;
            a2 += s2 * e;
        }
        logs.push(lw + shift);
        parts.push((a0 * du, -r * a1 * du, r * r * a2 * du));
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (l, (a0, a1, a2)) in logs.iter().zip(&parts) {
        let t = (l - top).exp();
        s0 += t * a0;
        s1 += t * a1;
        s2 += t * a2;
    }
    let scale = top.exp();
    HValues {
        h: s0 * scale,
        h_prime: s1 * scale,
        h_tilde: s2 * scale,
        log_h: top + s0.ln(),
        ratio: s1 / s0,
        tilde_ratio: s2 / s0,
    }
}

/// `J_θ(α) = −α − 2 cos θ H′(α)/H(α)`.
pub fn j_alpha(rd: &RadialDensity, theta: f64, alpha: f64) -> f64 {
    -alpha - 2.0 * theta.cos() * h_functions(rd, alpha).ratio
}

/// Positive root of `J_θ`, or `None` when `cos θ · m₂ ≥ −1`.
///
/// Bisection on `[tol, α_hi]` with `α_hi` doubled from 1 until `J_θ < 0`.
pub fn alpha1_root(rd: &RadialDensity, theta: f64, tol: f64) -> Result<Option<f64>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if theta.cos() * rd.m2 >= -1.0 {
        return Ok(None);
    }
    let mut lo = tol;
    if j_alpha(rd, theta, lo) <= 0.0 {
        return Err(Error::Precondition(format!(
            "J_θ({lo}) is not positive although cos θ · m₂ < −1; lower `tol`"
        )));
    }
    let mut hi = 1.0f64.max(2.0 * tol);
    let mut doublings = 0;
    while j_alpha(rd, theta, hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Bracket {
                doublings,
                upper: hi,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if j_alpha(rd, theta, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // keep whichever end has the smaller residual
    let (jl, jh) = (j_alpha(rd, theta, lo), j_alpha(rd, theta, hi));
    Ok(Some(if jl.abs() <= jh.abs() { lo } else { hi }))
}

/// Long-time behavior of the planar model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeClassification {
    ConvergeToGamma,
    ConvergeToRandomFixed {
        alpha1: f64,
    },
    /// `t_theta = 2π / tan θ` (signed).
    Circling {
        alpha1: f64,
        t_theta: f64,
    },
}

impl RegimeClassification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ConvergeToGamma => "converge_to_gamma",
            Self::ConvergeToRandomFixed { .. } => "converge_to_random_fixed",
            Self::Circling { .. } => "circling",
        }
    }

    pub fn alpha1(&self) -> Option<f64> {
        match self {
            Self::ConvergeToGamma => None,
            Self::ConvergeToRandomFixed { alpha1 } | Self::Circling { alpha1, .. } => Some(*alpha1),
        }
    }

    pub fn t_theta(&self) -> Option<f64> {
        match self {
            Self::Circling { t_theta, .. } => Some(*t_theta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: RegimeClassification,
    pub m2: f64,
    pub cos_theta_m2: f64,
    /// Set when `cos θ · m₂` sits on the threshold `−1`.
    pub warning: Option<String>,
}

fn is_theta_pi(theta: f64) -> bool {
    theta.sin().abs() < 1e-12 && theta.cos() < 0.0
}

/// Phase-diagram verdict for `(V, θ)`.
pub fn classify_regime(rd: &RadialDensity, theta: f64) -> Result<RegimeReport> {
    let ctm = theta.cos() * rd.m2;
    let warning = ((ctm + 1.0).abs() <= BOUNDARY_TOL * rd.m2.max(1.0)).then(|| {
        format!("cos θ · m₂ = {ctm:.12} is on the bifurcation threshold; no positive root exists")
    });
    let regime = match alpha1_root(rd, theta, 1e-9)? {
        None => RegimeClassification::ConvergeToGamma,
        Some(alpha1) if warning.is_some() && alpha1 < 1e-6 => RegimeClassification::ConvergeToGamma,
        Some(alpha1) if is_theta_pi(theta) => {
            RegimeClassification::ConvergeToRandomFixed { alpha1 }
        }
        Some(alpha1) => RegimeClassification::Circling {
            alpha1,
            t_theta: 2.0 * PI / theta.tan(),
        },
    };
    Ok(RegimeReport {
        regime,
        m2: rd.m2,
        cos_theta_m2: ctm,
        warning,
    })
}

/// Mean `m = (α/2)(cos σ, sin σ)` in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub alpha: f64,
    pub sigma: f64,
}

impl ReducedState {
    /// Canonical form: `α ≥ 0`, `σ ∈ [0, 2π)`.
    pub fn new(alpha: f64, sigma: f64) -> Self {
        let (alpha, sigma) = if alpha < 0.0 {
            (-alpha, sigma + PI)
        } else {
            (alpha, sigma)
        };
        Self {
            alpha,
            sigma: sigma.rem_euclid(2.0 * PI),
        }
    }

    /// The mean `(α/2) v(σ)`.
    pub fn mean(&self) -> [f64; 2] {
        let (s, c) = self.sigma.sin_cos();
        [0.5 * self.alpha * c, 0.5 * self.alpha * s]
    }

    pub fn from_mean(m: [f64; 2]) -> Self {
        Self::new(2.0 * m[0].hypot(m[1]), m[1].atan2(m[0]))
    }
}

/// `2 g(α) / α`, with the series `m₂ + α² (m₄/8 − m₂²/4)` near zero.
fn two_g_over_alpha(rd: &RadialDensity, alpha: f64) -> f64 {
    if alpha.abs() < SERIES_ALPHA {
        rd.m2 + alpha * alpha * (rd.m4 / 8.0 - rd.m2 * rd.m2 / 4.0)
    } else {
        2.0 * h_functions(rd, alpha).ratio / alpha
    }
}

/// Right-hand side `(α̇, σ̇)` of the reduced system.
pub fn reduced_ode_rhs(rd: &RadialDensity, theta: f64, s: ReducedState) -> (f64, f64) {
    let (sn, cs) = theta.sin_cos();
    let q = two_g_over_alpha(rd, s.alpha);
    let dalpha = -s.alpha - cs * s.alpha * q;
    let dsigma = -sn * q;
    (dalpha, dsigma)
}

/// `σ̇` at `α = 0` from the series: `−m₂ sin θ`.
pub fn sigma_rate_at_zero(rd: &RadialDensity, theta: f64) -> f64 {
    -rd.m2 * theta.sin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    /// `σ` without wrapping, for rate measurements.
    pub sigma_unwrapped: Vec<f64>,
}

/// Classical RK4 for the reduced system over `[0, T]` (`dt ≤ 0.01`).
pub fn integrate_reduced(
    rd: &RadialDensity,
    theta: f64,
    s0: ReducedState,
    t_end: f64,
    dt: f64,
) -> Result<ReducedTrajectory> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::invalid(
            "dt",
            format!("must lie in (0, 0.01], got {dt}"),
        ));
    }
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be nonnegative"));
    }
    let steps = (t_end / dt).round() as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    // integrate in the (α, σ) chart; α may cross zero, which is harmless
    // because the system is odd in α
    let f = |a: f64, _s: f64| {
        let (sn, cs) = theta.sin_cos();
        let q = two_g_over_alpha(rd, a);
        (-a - cs * a * q, -sn * q)
    };
    let start = ReducedState::new(s0.alpha, s0.sigma);
    let (mut a, mut s) = (start.alpha, s0.sigma);
    let mut out = ReducedTrajectory {
        times: vec![0.0],
        states: vec![start],
        sigma_unwrapped: vec![s],
    };
    for k in 1..=steps {
        let (k1a, k1s) = f(a, s);
        let (k2a, k2s) = f(a + 0.5 * h * k1a, s + 0.5 * h * k1s);
        let (k3a, k3s) = f(a + 0.5 * h * k2a, s + 0.5 * h * k2s);
        let (k4a, k4s) = f(a + h * k3a, s + h * k3s);
        a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        if a < 0.0 {
            a = -a;
            s += PI;
        }
        out.times.push(k as f64 * h);
        out.states.push(ReducedState::new(a, s));
        out.sigma_unwrapped.push(s);
    }
    Ok(out)
}

/// Tilted measure `e^{α (x, v)} γ(dx) / Z` on the model's grid. Its mean is
/// `(H′/H)(α) v`.
pub fn limit_measure(model: &GibbsModel, v: [f64; 2], alpha: f64) -> Result<GridMeasure2D> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha1", "must be nonnegative"));
    }
    let nv = v[0].hypot(v[1]);
    if !(nv > 0.0) {
        return Err(Error::invalid("v", "must be nonzero"));
    }
    let u = [v[0] / nv, v[1] / nv];
    let logits: Vec<f64> = model
        .grid()
        .points()
        .iter()
        .zip(model.log_gamma())
        .map(|(p, lg)| lg + alpha * (p[0] * u[0] + p[1] * u[1]))
        .collect();
    Ok(GridMeasure2D::from_log_density(model.grid().clone(), &logits)?.0)
}

/// How the direction inside the orbit average depends on the running time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrbitReading {
    /// Constituent directions follow the flow: `−R v(δ + s tan θ)`.
    #[default]
    Flowed,
    /// One fixed constituent `e^{α₁(x, v(δ))} γ / Z₁`.
    Literal,
}

/// Point `ν(δ)` of the periodic orbit,
/// `(e^P − 1)^{−1} ∫₀^P e^s e^{α₁(x, −R v(δ + s tan θ))} γ(dx)/Z ds` with
/// `P = 2π/|tan θ|`. Its mean is `(α₁/2) v(δ)`.
pub fn periodic_orbit_measure(
    model: &GibbsModel,
    theta: f64,
    alpha1: f64,
    delta: f64,
    reading: OrbitReading,
) -> Result<GridMeasure2D> {
    let tan = theta.tan();
    if !(tan.abs() >= 1e-3 && tan.abs() <= 1e3) || theta.cos() >= 0.0 {
        return Err(Error::invalid(
            "theta",
            format!("orbit needs cos θ < 0 and 1e-3 ≤ |tan θ| ≤ 1e3, got θ = {theta}"),
        ));
    }
    if !(alpha1 > 0.0) {
        return Err(Error::invalid("alpha1", "must be positive"));
    }
    if reading == OrbitReading::Literal {
        return limit_measure(model, [delta.cos(), delta.sin()], alpha1);
    }
    let period = 2.0 * PI / tan.abs();
    let panels = (period / 0.25).ceil() as usize;
    let width = period / panels as f64;
    let rot = rotation_matrix(theta);
    let mut acc = vec![0.0; model.grid().len()];
    let mut total = 0.0;
    for p in 0..panels {
        let gl = GaussLegendre::new(12, p as f64 * width, (p + 1) as f64 * width);
        for (&s, &w) in gl.nodes.iter().zip(&gl.weights) {
            // e^{s−P} / (1 − e^{−P}) keeps the weights bounded
            let c = w * (s - period).exp() / (-(-period).exp_m1());
            let phi = delta + s * tan;
            let v = [phi.cos(), phi.sin()];
            let dir = [
                -(rot[0][0] * v[0] + rot[0][1] * v[1]),
                -(rot[1][0] * v[0] + rot[1][1] * v[1]),
            ];
            let mu = limit_measure(model, dir, alpha1)?;
            for (a, d) in acc.iter_mut().zip(mu.density()) {
                *a += c * d;
            }
            total += c;
        }
    }
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidMeasure(format!(
            "orbit weights sum to {total}, expected 1"
        )));
    }
    GridMeasure2D::from_unnormalized(model.grid().clone(), acc)
}

/// `I₁ = ∫[φ((x,y)) − φ((x,p))] γ(dx)` and
/// `I₂ = ∫ φ((x,y)) (x − (x,y) y) γ(dx)` with `p = (1, 0)`.
pub fn symmetry_integrals(
    gamma: &GridMeasure2D,
    y: [f64; 2],
    phi: &dyn Fn(f64) -> f64,
) -> Result<(f64, [f64; 2])> {
    let ny = y[0].hypot(y[1]);
    if (ny - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("y", "must be a unit vector"));
    }
    let i1 = gamma.grid_integrate(|x| phi(x[0] * y[0] + x[1] * y[1]) - phi(x[0]));
    let i2x = gamma.grid_integrate(|x| {
        let d = x[0] * y[0] + x[1] * y[1];
        phi(d) * (x[0] - d * y[0])
    });
    let i2y = gamma.grid_integrate(|x| {
        let d = x[0] * y[0] + x[1] * y[1];
        phi(d) * (x[1] - d * y[1])
    });
    Ok((i1, [i2x, i2y]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KurtosisReport {
    /// `(α, J‴(α))` by Richardson-refined five-point differences.
    pub third_derivative: Vec<(f64, f64)>,
    /// `(α, J′(α))` by central differences at the same points.
    pub first_derivative: Vec<(f64, f64)>,
    pub passed: bool,
}

/// Five-point estimate of `J‴` on the `θ = π` branch, refined by halving `h`.
pub fn j_third_derivative(rd: &RadialDensity, alpha: f64, h: f64) -> f64 {
    let j = |a: f64| j_alpha(rd, PI, a);
    let d3 = |h: f64| {
        (-j(alpha - 2.0 * h) + 2.0 * j(alpha - h) - 2.0 * j(alpha + h) + j(alpha + 2.0 * h))
            / (2.0 * h * h * h)
    };
    (4.0 * d3(0.5 * h) - d3(h)) / 3.0
}

/// Central difference of `J_θ`.
pub fn j_prime_fd(rd: &RadialDensity, theta: f64, alpha: f64, h: f64) -> f64 {
    (j_alpha(rd, theta, alpha + h) - j_alpha(rd, theta, alpha - h)) / (2.0 * h)
}

/// Checks `J‴ < 0` on the samples (slack `1e-6`).
pub fn kurtosis_sign_check(rd: &RadialDensity, alpha_samples: &[f64]) -> Result<KurtosisReport> {
    if alpha_samples.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::invalid(
            "alpha_samples",
            "all samples must be positive",
        ));
    }
    let h = 1e-2;
    let third: Vec<(f64, f64)> = alpha_samples
        .iter()
        .map(|&a| (a, j_third_derivative(rd, a, h)))
        .collect();
    let first = alpha_samples
        .iter()
        .map(|&a| (a, j_prime_fd(rd, PI, a, 1e-5)))
        .collect();
    let passed = third.iter().all(|(_, d)| *d < 1e-6);
    Ok(KurtosisReport {
        third_derivative: third,
        first_derivative: first,
        passed,
    })
}

/// Rows `(α, J_θ(α), J′_θ(α))` on `n` equally spaced points of `[0, α_max]`.
pub fn j_curve(rd: &RadialDensity, theta: f64, alpha_max: f64, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|k| {
            let a = alpha_max * k as f64 / (n.max(2) - 1) as f64;
            [a, j_alpha(rd, theta, a), j_prime_fd(rd, theta, a, 1e-5)]
        })
        .collect()
}

/// Quartic coefficient `a` such that `V = aρ⁴ + c` has `m₂ = E|X|² = target`
/// (closed form `m₂ = 1/√(2πa)`).
pub fn quartic_coefficient_for_m2(target: f64) -> f64 {
    1.0 / (2.0 * PI * target * target)
}

#[cfg(test)]
mod tests;
