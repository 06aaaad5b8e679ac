//! Confinement and interaction potentials.
//!
//! Points are plain `&[f64]` slices of the ambient dimension. Gradients are
//! written into caller-provided buffers so the simulation loops stay
//! allocation-free; Hessians are returned row-major.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type KernelVectorFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied confinement potential.
#[derive(Clone)]
pub struct CustomConfinement {
    pub name: String,
    pub value: ScalarFn,
    pub gradient: VectorFn,
    /// Writes the `d × d` Hessian row-major.
    pub hessian: VectorFn,
    /// Radial profile `ρ ↦ V(ρ)` when the potential is rotation invariant.
    pub radial: Option<RadialFn>,
}

/// Confinement potential `V`.
#[derive(Clone)]
pub enum ConfinementPotential {
    /// `V(x) = a|x|⁴ + b|x|² + c`.
    QuarticRadial {
        a: f64,
        b: f64,
        c: f64,
    },
    Custom(CustomConfinement),
}

impl fmt::Debug for ConfinementPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::QuarticRadial { a, b, c } => f
                .debug_struct("QuarticRadial")
                .field("a", a)
                .field("b", b)
                .field("c", c)
                .finish(),
            Self::Custom(c) => f.debug_tuple("Custom").field(&c.name).finish(),
        }
    }
}

impl ConfinementPotential {
    pub fn quartic(a: f64, b: f64, c: f64) -> Self {
        Self::QuarticRadial { a, b, c }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::QuarticRadial { a, b, c } => {
                let r2 = norm2(x);
                a * r2 * r2 + b * r2 + c
            }
            Self::Custom(cu) => (cu.value)(x),
        }
    }

    /// Checked evaluation: non-finite values are reported as failures.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                point: x.to_vec(),
                reason: format!("V = {v}"),
            })
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::QuarticRadial { a, b, .. } => {
                let s = 4.0 * a * norm2(x) + 2.0 * b;
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = s * xi;
                }
            }
            Self::Custom(cu) => (cu.gradient)(x, out),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    /// Row-major `d × d` Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut h = vec![0.0; d * d];
        match self {
            Self::QuarticRadial { a, b, .. } => {
                let s = 4.0 * a * norm2(x) + 2.0 * b;
                for i in 0..d {
                    for j in 0..d {
                        h[i * d + j] = 8.0 * a * x[i] * x[j] + if i == j { s } else { 0.0 };
                    }
                }
            }
            Self::Custom(cu) => (cu.hessian)(x, &mut h),
        }
        h
    }

    /// `V` as a function of the radius, when rotation invariant.
    pub fn radial(&self, rho: f64) -> Option<f64> {
        match self {
            Self::QuarticRadial { a, b, c } => {
                let r2 = rho * rho;
                Some(a * r2 * r2 + b * r2 + c)
            }
            Self::Custom(cu) => cu.radial.as_ref().map(|f| f(rho)),
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Self::QuarticRadial { .. } => true,
            Self::Custom(cu) => cu.radial.is_some(),
        }
    }

    /// Global uniform-convexity constant `K` when known in closed form.
    ///
    /// For the quartic family the smallest Hessian eigenvalue is `2b`,
    /// attained at the origin.
    pub fn convexity_constant(&self) -> Option<f64> {
        match self {
            Self::QuarticRadial { a, b, .. } if *a >= 0.0 => Some(2.0 * b),
            _ => None,
        }
    }

    /// Smallest radius beyond which `2 (V(ρ) − min V) ≥ log_decay`.
    ///
    /// Used to truncate polar grids so the neglected tail of `e^{-2V}` is
    /// below `e^{-log_decay}` relative to its peak.
    pub fn truncation_radius(&self, log_decay: f64) -> Option<f64> {
        if !self.is_radial() {
            return None;
        }
        let v = |r: f64| self.radial(r).unwrap_or(f64::INFINITY);
        // coarse scan for the minimum, then bracket the crossing
        let mut hi = 1.0;
        let mut vmin = v(0.0);
        for _ in 0..60 {
            let n = 400;
            for i in 0..=n {
                vmin = vmin.min(v(hi * i as f64 / n as f64));
            }
            if 2.0 * (v(hi) - vmin) >= log_decay {
                break;
            }
            hi *= 1.5;
        }
        if 2.0 * (v(hi) - vmin) < log_decay {
            return None;
        }
        // last crossing from below: walk down from hi
        let n = 4000;
        let step = hi / n as f64;
        let mut r = hi;
        while r > step && 2.0 * (v(r - step) - vmin) >= log_decay {
            r -= step;
        }
        Some(r)
    }
}

/// User-supplied interaction kernel.
#[derive(Clone)]
pub struct CustomInteraction {
    pub name: String,
    pub value: KernelFn,
    pub grad_x: KernelVectorFn,
    /// Writes `∇²ₓₓW(x, y)` row-major; `None` means identically zero.
    pub hess_xx: Option<KernelVectorFn>,
    pub symmetric: bool,
}

/// Interaction potential `W(x, y)`.
#[derive(Clone)]
pub enum InteractionPotential {
    Zero,
    /// `W(x, y) = (x, R(θ) y)` with `R(θ)` the counter-clockwise rotation.
    LinearRotation {
        theta: f64,
    },
    /// `W(x, y) = −(x, y)`.
    SymmetricDot,
    Custom(CustomInteraction),
}

impl fmt::Debug for InteractionPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::LinearRotation { theta } => f
                .debug_struct("LinearRotation")
                .field("theta", theta)
                .finish(),
            Self::SymmetricDot => write!(f, "SymmetricDot"),
            Self::Custom(c) => f.debug_tuple("Custom").field(&c.name).finish(),
        }
    }
}

/// Counter-clockwise rotation matrix.
pub fn rotation_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

impl InteractionPotential {
    /// Matrix `A` with `W(x, y) = (x, A y)` for the bilinear planar kernels.
    pub fn linear_matrix(&self) -> Option<[[f64; 2]; 2]> {
        match self {
            Self::Zero => Some([[0.0, 0.0], [0.0, 0.0]]),
            Self::LinearRotation { theta } => Some(rotation_matrix(*theta)),
            Self::SymmetricDot => Some([[-1.0, 0.0], [0.0, -1.0]]),
            Self::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Zero | Self::SymmetricDot => true,
            Self::LinearRotation { theta } => theta.sin().abs() < 1e-14,
            Self::Custom(c) => c.symmetric,
        }
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Self::Custom(c) => (c.value)(x, y),
            _ => {
                let a = self.linear_matrix().expect("bilinear kernel");
                x[0] * (a[0][0] * y[0] + a[0][1] * y[1]) + x[1] * (a[1][0] * y[0] + a[1][1] * y[1])
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let v = self.value(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            let mut point = x.to_vec();
            point.extend_from_slice(y);
            Err(Error::Evaluation {
                point,
                reason: format!("W = {v}"),
            })
        }
    }

    pub fn grad_x_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match self {
            Self::Custom(c) => (c.grad_x)(x, y, out),
            _ => {
                let a = self.linear_matrix().expect("bilinear kernel");
                out[0] = a[0][0] * y[0] + a[0][1] * y[1];
                out[1] = a[1][0] * y[0] + a[1][1] * y[1];
            }
        }
    }

    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.grad_x_into(x, y, &mut g);
        g
    }

    pub fn hess_xx(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut h = vec![0.0; d * d];
        if let Self::Custom(CustomInteraction {
            hess_xx: Some(f), ..
        }) = self
        {
            f(x, y, &mut h);
        }
        h
    }

    /// Gauge transform `W(x, y) + φ(y)`. Leaves `∇ₓW` and every Gibbs
    /// density untouched.
    pub fn gauged(&self, phi: ScalarFn) -> Self {
        let inner = self.clone();
        let inner_g = self.clone();
        let inner_h = self.clone();
        Self::Custom(CustomInteraction {
            name: format!("{:?}+gauge", self),
            value: Arc::new(move |x, y| inner.value(x, y) + phi(y)),
            grad_x: Arc::new(move |x, y, out| inner_g.grad_x_into(x, y, out)),
            hess_xx: Some(Arc::new(move |x, y, out| {
                out.copy_from_slice(&inner_h.hess_xx(x, y));
            })),
            symmetric: false,
        })
    }

    /// `W(x, y) + (|x|² + |y|²)/2`: the quadratic shift that makes the
    /// bilinear kernels nonnegative. Only used inside hypothesis checks.
    fn quadratic_shift(&self) -> Self {
        let inner = self.clone();
        let inner_g = self.clone();
        let inner_h = self.clone();
        Self::Custom(CustomInteraction {
            name: format!("{:?}+quadratic", self),
            value: Arc::new(move |x, y| inner.value(x, y) + 0.5 * (norm2(x) + norm2(y))),
            grad_x: Arc::new(move |x, y, out| {
                inner_g.grad_x_into(x, y, out);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += xi;
                }
            }),
            hess_xx: Some(Arc::new(move |x, y, out| {
                let d = x.len();
                out.copy_from_slice(&inner_h.hess_xx(x, y));
                for i in 0..d {
                    out[i * d + i] += 1.0;
                }
            })),
            symmetric: inner_is_symmetric(self),
        })
    }
}

fn inner_is_symmetric(w: &InteractionPotential) -> bool {
    w.is_symmetric()
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn frobenius(m: &[f64]) -> f64 {
    norm2(m).sqrt()
}

fn min_eigenvalue(h: &[f64], d: usize) -> f64 {
    if d == 1 {
        return h[0];
    }
    if d == 2 {
        let (a, b, c) = (h[0], 0.5 * (h[1] + h[2]), h[3]);
        let tr = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        return tr - disc;
    }
    let m = DMatrix::from_row_slice(d, d, h);
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SamplingBox {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + (u - l) * rng.random::<f64>())
            .collect()
    }

    /// Radius of the largest centered ball inside the box.
    fn inner_radius(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().min(u.abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// One line of a [`HypothesisReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    /// Roman numeral of the hypothesis, `"i"` to `"v"`.
    pub id: &'static str,
    pub name: &'static str,
    /// Worst sampled value of the quantity the hypothesis bounds.
    pub worst_ratio: f64,
    /// Fitted constant (`K`, `δ`, `κ`, or the curvature ratio limit).
    pub fitted: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// Whether the quadratic shift was applied to the bilinear kernel.
    pub gauge_applied: bool,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn kappa(&self) -> f64 {
        self.get("iv").map_or(f64::NAN, |c| c.fitted)
    }
}

/// Sampling-based spot check of the standing hypotheses on a finite box.
///
/// Never aborts on a failing hypothesis; every verdict goes into the report.
/// The bilinear kernels are unbounded below, so positivity, domination and
/// curvature are checked on `W + (|x|² + |y|²)/2`.
pub fn check_hypotheses(
    v: &ConfinementPotential,
    w: &InteractionPotential,
    region: &SamplingBox,
    n: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<HypothesisReport> {
    if n < 100 {
        return Err(Error::invalid(
            "n",
            format!("need at least 100 samples, got {n}"),
        ));
    }
    let d = region.dim();
    let gauge_applied = w.linear_matrix().is_some() && !w.is_zero();
    let wg = if gauge_applied {
        w.quadratic_shift()
    } else {
        w.clone()
    };

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    xs.push(vec![0.0; d]);
    xs.extend((0..n).map(|_| region.sample(rng)));
    let ys: Vec<Vec<f64>> = (0..=n).map(|_| region.sample(rng)).collect();

    let mut eval_failures = 0usize;
    let mut min_v = f64::INFINITY;
    let mut min_w = f64::INFINITY;
    let mut min_k = f64::INFINITY;
    let mut kappa = 0.0f64;
    let mut lip = 0.0f64;
    let mut min_m = f64::INFINITY;
    let mut grad_buf = vec![0.0; d];
    let mut grad_buf2 = vec![0.0; d];
    for (x, y) in xs.iter().zip(&ys) {
        let (vx, vy) = match (v.eval(x), v.eval(y)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                eval_failures += 1;
                continue;
            }
        };
        let wxy = match wg.eval(x, y) {
            Ok(val) => val,
            Err(_) => {
                eval_failures += 1;
                continue;
            }
        };
        min_v = min_v.min(vx);
        min_w = min_w.min(wxy);
        let hv = v.hessian(x);
        min_k = min_k.min(min_eigenvalue(&hv, d));
        wg.grad_x_into(x, y, &mut grad_buf);
        let hw = wg.hess_xx(x, y);
        let dom = (wxy + norm2(&grad_buf).sqrt() + frobenius(&hw)) / (vx + vy);
        kappa = kappa.max(dom);
        let combined: Vec<f64> = hv.iter().zip(&hw).map(|(a, b)| a + b).collect();
        min_m = min_m.min(min_eigenvalue(&combined, d));
        v.gradient_into(x, &mut grad_buf);
        v.gradient_into(y, &mut grad_buf2);
        let dist = norm2(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt();
        let dg = norm2(
            &grad_buf
                .iter()
                .zip(&grad_buf2)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        )
        .sqrt();
        if dist > 0.0 {
            lip = lip.max(dg / (dist.min(1.0) * (vx + vy)));
        }
    }

    // growth exponent: least-squares slope of log (∇V(x), x) against log |x|
    // over the outer shell of the box
    let r_in = region.inner_radius();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut nonpositive = 0usize;
    let shell: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut dir: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let nrm = norm2(&dir).sqrt().max(1e-12);
            let r = r_in * (0.5 + 0.5 * rng.random::<f64>());
            dir.iter_mut().for_each(|c| *c *= r / nrm);
            dir
        })
        .collect();
    for x in &shell {
        v.gradient_into(x, &mut grad_buf);
        let dot: f64 = grad_buf.iter().zip(x).map(|(a, b)| a * b).sum();
        let r = norm2(x).sqrt();
        if dot > 0.0 && r > 0.0 {
            lx.push(r.ln());
            ly.push(dot.ln());
        } else {
            nonpositive += 1;
        }
    }
    let (slope, intercept) = least_squares(&lx, &ly);
    let delta = slope / 2.0;
    let growth_c = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - slope * a).exp())
        .fold(f64::INFINITY, f64::min);
    let _ = intercept;

    // curvature ratio near the boundary of the box
    let mut ratios = Vec::new();
    for (x, y) in shell.iter().zip(&ys) {
        let r = norm2(x).sqrt();
        if r < 0.9 * r_in {
            continue;
        }
        let scale = r / r_in;
        let xb: Vec<f64> = x.iter().map(|c| c / scale).collect();
        wg.grad_x_into(&xb, y, &mut grad_buf);
        let num: f64 = grad_buf.iter().zip(&xb).map(|(a, b)| a * b).sum();
        v.gradient_into(&xb, &mut grad_buf2);
        let den: f64 = grad_buf2.iter().zip(&xb).map(|(a, b)| a * b).sum();
        if den > 0.0 {
            ratios.push(num / den);
        }
    }
    let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_mean = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };

    let checks = vec![
        HypothesisCheck {
            id: "i",
            name: "regularity and positivity",
            worst_ratio: min_v.min(min_w + 1.0),
            fitted: min_w,
            passed: eval_failures == 0 && min_v >= 1.0 - tol && min_w >= -tol,
            detail: format!(
                "min V = {min_v:.6e}, min W = {min_w:.6e}, evaluation failures = {eval_failures}"
            ),
        },
        HypothesisCheck {
            id: "ii",
            name: "convexity",
            worst_ratio: min_k,
            fitted: min_k,
            passed: min_k > tol,
            detail: format!("smallest sampled Hessian eigenvalue K = {min_k:.6e}"),
        },
        HypothesisCheck {
            id: "iii",
            name: "growth",
            worst_ratio: growth_c,
            fitted: delta,
            passed: nonpositive == 0 && delta > 1.0 + tol && growth_c > 0.0 && lip.is_finite(),
            detail: format!(
                "fitted delta = {delta:.6}, c = {growth_c:.6e}, gradient Lipschitz ratio C = {lip:.6e}"
            ),
        },
        HypothesisCheck {
            id: "iv",
            name: "domination",
            worst_ratio: kappa,
            fitted: kappa.max(1.0),
            passed: kappa.is_finite(),
            detail: format!("kappa = {:.6e}", kappa.max(1.0)),
        },
        HypothesisCheck {
            id: "v",
            name: "curvature",
            worst_ratio: ratio_min,
            fitted: ratio_mean,
            passed: ratio_min > -1.0 + tol && min_m.is_finite(),
            detail: format!(
                "boundary ratio in [{ratio_min:.6e}, mean {ratio_mean:.6e}] over {} samples, Hessian bound M = {min_m:.6e}",
                ratios.len()
            ),
        },
    ];
    Ok(HypothesisReport {
        checks,
        gauge_applied,
        samples: n,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
