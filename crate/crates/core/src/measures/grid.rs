use std::f64::consts::PI;
use std::sync::Arc;

use super::{Measure, ParticleMeasure};
use crate::error::{Error, Result};
use crate::potentials::ConfinementPotential;
use crate::quadrature::{log_sum_exp, uniform_angles, GaussLegendre};

/// Normalization tolerance every producing operation must meet.
pub const NORMALIZATION_TOL: f64 = 1e-8;

pub const DEFAULT_N_RHO: usize = 128;
pub const DEFAULT_N_ANGLE: usize = 128;

/// Shape of a polar quadrature grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_angle: usize,
}

impl GridSpec {
    pub fn new(rho_max: f64, n_rho: usize, n_angle: usize) -> Self {
        Self {
            rho_max,
            n_rho,
            n_angle,
        }
    }

    /// Grid whose radius cuts the tail of `e^{-2V}` below `1e-12` with margin.
    pub fn for_potential(v: &ConfinementPotential, n_rho: usize, n_angle: usize) -> Result<Self> {
        let rho_max = v
            .truncation_radius(60.0)
            .ok_or_else(|| Error::invalid("potential", "no radial profile for grid truncation"))?;
        Ok(Self::new(rho_max, n_rho, n_angle))
    }

    /// The grid used when none is configured: 128 radial by 128 angular
    /// nodes out to the truncation radius of `V`.
    pub fn default_for(v: &ConfinementPotential) -> Result<Self> {
        Self::for_potential(v, DEFAULT_N_RHO, DEFAULT_N_ANGLE)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_max > 0.0) || !self.rho_max.is_finite() {
            return Err(Error::invalid(
                "grid.rho_max",
                format!("must be positive, got {}", self.rho_max),
            ));
        }
        if self.n_rho < 2 {
            return Err(Error::invalid(
                "grid.n_rho",
                format!("need at least 2 nodes, got {}", self.n_rho),
            ));
        }
        if self.n_angle < 4 {
            return Err(Error::invalid(
                "grid.n_angle",
                format!("need at least 4 nodes, got {}", self.n_angle),
            ));
        }
        Ok(())
    }
}

/// Tensor grid: Gauss–Legendre radii on `[0, ρ_max]` times uniform angles.
///
/// Node `(i, j)` is stored at flat index `i * n_angle + j`. Quadrature
/// weights carry the polar Jacobian `ρ`, so densities are densities with
/// respect to Lebesgue measure on the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    rho_max: f64,
    rho_nodes: Vec<f64>,
    rho_weights: Vec<f64>,
    angle_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    points: Vec<[f64; 2]>,
    /// Radial cell boundaries used for histogram binning.
    ring_edges: Vec<f64>,
}

impl PolarGrid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let gl = GaussLegendre::new(spec.n_rho, 0.0, spec.rho_max);
        let angles = uniform_angles(spec.n_angle);
        let dv = 2.0 * PI / spec.n_angle as f64;
        let quad: Vec<f64> = gl
            .nodes
            .iter()
            .zip(&gl.weights)
            .flat_map(|(&r, &w)| std::iter::repeat_n(w * r * dv, spec.n_angle))
            .collect();
        Ok(Arc::new(Self::assemble(
            spec.rho_max,
            gl.nodes,
            gl.weights,
            angles,
            quad,
        )))
    }

    /// Rebuilds a grid from serialized nodes and weights.
    pub fn from_parts(
        rho_nodes: Vec<f64>,
        angle_nodes: Vec<f64>,
        quad_weights: Vec<f64>,
    ) -> Result<Arc<Self>> {
        let (nr, na) = (rho_nodes.len(), angle_nodes.len());
        if nr < 2 || na < 4 || quad_weights.len() != nr * na {
            return Err(Error::Parse(format!(
                "grid with {nr} radii, {na} angles and {} weights",
                quad_weights.len()
            )));
        }
        let dv = 2.0 * PI / na as f64;
        let rho_weights: Vec<f64> = (0..nr)
            .map(|i| quad_weights[i * na] / (rho_nodes[i] * dv))
            .collect();
        let rho_max = rho_weights.iter().sum();
        Ok(Arc::new(Self::assemble(
            rho_max,
            rho_nodes,
            rho_weights,
            angle_nodes,
            quad_weights,
        )))
    }

    fn assemble(
        rho_max: f64,
        rho_nodes: Vec<f64>,
        rho_weights: Vec<f64>,
        angle_nodes: Vec<f64>,
        quad_weights: Vec<f64>,
    ) -> Self {
        let points = rho_nodes
            .iter()
            .flat_map(|&r| angle_nodes.iter().map(move |&a| [r * a.cos(), r * a.sin()]))
            .collect();
        let mut ring_edges = Vec::with_capacity(rho_nodes.len() + 1);
        ring_edges.push(0.0);
        let mut acc = 0.0;
        for w in &rho_weights {
            acc += w;
            ring_edges.push(acc);
        }
        Self {
            rho_max,
            rho_nodes,
            rho_weights,
            angle_nodes,
            quad_weights,
            points,
            ring_edges,
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.rho_max, self.n_rho(), self.n_angle())
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn n_rho(&self) -> usize {
        self.rho_nodes.len()
    }

    pub fn n_angle(&self) -> usize {
        self.angle_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.quad_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quad_weights.is_empty()
    }

    pub fn rho_nodes(&self) -> &[f64] {
        &self.rho_nodes
    }

    pub fn rho_weights(&self) -> &[f64] {
        &self.rho_weights
    }

    pub fn angle_nodes(&self) -> &[f64] {
        &self.angle_nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Evaluates `f` at every node, in storage order.
    pub fn map_nodes(&self, f: impl Fn(&[f64; 2]) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }

    /// Flat index of the cell containing `x` (radii beyond `ρ_max` fall in
    /// the outermost ring).
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let i = match self
            .ring_edges
            .binary_search_by(|e| e.partial_cmp(&r).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(k) => k.min(self.n_rho() - 1),
            Err(k) => k.saturating_sub(1).min(self.n_rho() - 1),
        };
        let na = self.n_angle();
        let dv = 2.0 * PI / na as f64;
        let a = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
        let j = ((a / dv + 0.5).floor() as usize) % na;
        i * na + j
    }

    pub fn same_as(&self, other: &PolarGrid) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

fn check_same_grid(a: &PolarGrid, b: &PolarGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::InvalidMeasure(
            "measures live on different grids".into(),
        ))
    }
}

/// Probability density on a [`PolarGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure2D {
    grid: Arc<PolarGrid>,
    density: Vec<f64>,
}

impl GridMeasure2D {
    /// Validates nonnegativity and unit mass within [`NORMALIZATION_TOL`].
    pub fn new(grid: Arc<PolarGrid>, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} density values for {} nodes",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidMeasure(
                "negative or non-finite density".into(),
            ));
        }
        let mass: f64 = density
            .iter()
            .zip(grid.quad_weights())
            .map(|(d, w)| d * w)
            .sum();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!(
                "grid mass {mass}, expected 1"
            )));
        }
        Ok(Self { grid, density })
    }

    pub fn from_unnormalized(grid: Arc<PolarGrid>, mut density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidMeasure("density length mismatch".into()));
        }
        if density.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidMeasure(
                "negative or non-finite density".into(),
            ));
        }
        let mass: f64 = density
            .iter()
            .zip(grid.quad_weights())
            .map(|(d, w)| d * w)
            .sum();
        if !(mass > 0.0) {
            return Err(Error::InvalidMeasure("zero grid mass".into()));
        }
        density.iter_mut().for_each(|d| *d /= mass);
        Ok(Self { grid, density })
    }

    /// Density `∝ exp(log_density)`, normalized with a max shift.
    /// Returns the measure and `log ∫ exp(log_density)`.
    pub fn from_log_density(grid: Arc<PolarGrid>, log_density: &[f64]) -> Result<(Self, f64)> {
        if log_density.len() != grid.len() {
            return Err(Error::InvalidMeasure("log-density length mismatch".into()));
        }
        let log_z = log_sum_exp(
            log_density
                .iter()
                .zip(grid.quad_weights())
                .map(|(l, w)| l + w.ln()),
        );
        if !log_z.is_finite() {
            return Err(Error::InvalidMeasure(format!("log normalizer {log_z}")));
        }
        let density = log_density.iter().map(|l| (l - log_z).exp()).collect();
        Ok((Self { grid, density }, log_z))
    }

    /// Histogram of a particle cloud: each atom's mass goes to its cell's
    /// node, so the total mass is kept exactly and moments move by at most
    /// the cell size.
    pub fn histogram(grid: Arc<PolarGrid>, mu: &ParticleMeasure) -> Result<Self> {
        if mu.dim() != 2 {
            return Err(Error::InvalidMeasure(
                "histogram needs planar particles".into(),
            ));
        }
        let mut mass = vec![0.0; grid.len()];
        for (x, w) in mu.atoms() {
            mass[grid.cell_of(x)] += w;
        }
        let density = mass
            .iter()
            .zip(grid.quad_weights())
            .map(|(m, q)| m / q)
            .collect();
        Self::from_unnormalized(grid, density)
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_at(&self, i_rho: usize, j_angle: usize) -> f64 {
        self.density[i_rho * self.grid.n_angle() + j_angle]
    }

    /// `Σ f · density · quad_weight`.
    pub fn grid_integrate(&self, f: impl Fn(&[f64; 2]) -> f64) -> f64 {
        self.grid
            .points()
            .iter()
            .zip(&self.density)
            .zip(self.grid.quad_weights())
            .map(|((p, d), w)| f(p) * d * w)
            .sum()
    }

    pub fn mean2(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for ((p, d), w) in self
            .grid
            .points()
            .iter()
            .zip(&self.density)
            .zip(self.grid.quad_weights())
        {
            m[0] += p[0] * d * w;
            m[1] += p[1] * d * w;
        }
        m
    }

    /// Convex combination `(1 − s) self + s other`; exact simplex membership
    /// for `s ∈ [0, 1]`.
    pub fn mix(&self, other: &Self, s: f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(
                "s",
                format!("mixing weight {s} outside [0, 1]"),
            ));
        }
        let density = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            density,
        })
    }

    /// Nonnegative combination `Σ c_k μ_k` with `Σ c_k = 1`.
    pub fn combine(parts: &[(f64, &Self)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("parts", "empty combination"))?
            .1;
        let mut density = vec![0.0; first.density.len()];
        let mut total = 0.0;
        for (c, m) in parts {
            check_same_grid(&first.grid, &m.grid)?;
            if *c < 0.0 {
                return Err(Error::invalid("parts", "negative coefficient"));
            }
            total += c;
            for (d, x) in density.iter_mut().zip(&m.density) {
                *d += c * x;
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "parts",
                format!("coefficients sum to {total}"),
            ));
        }
        Ok(Self {
            grid: first.grid.clone(),
            density,
        })
    }

    pub fn difference(&self, other: &Self) -> Result<SignedGridMeasure> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(SignedGridMeasure {
            grid: self.grid.clone(),
            density: self
                .density
                .iter()
                .zip(&other.density)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn to_signed(&self) -> SignedGridMeasure {
        SignedGridMeasure {
            grid: self.grid.clone(),
            density: self.density.clone(),
        }
    }

    /// Largest nodewise density gap.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Measure for GridMeasure2D {
    fn dim(&self) -> usize {
        2
    }

    fn for_each_atom(&self, f: &mut dyn FnMut(&[f64], f64)) {
        for ((p, d), w) in self
            .grid
            .points()
            .iter()
            .zip(&self.density)
            .zip(self.grid.quad_weights())
        {
            f(p, d * w);
        }
    }

    fn mean(&self) -> Vec<f64> {
        self.mean2().to_vec()
    }
}

/// Signed density on a [`PolarGrid`] (differences, tangent vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGridMeasure {
    grid: Arc<PolarGrid>,
    density: Vec<f64>,
}

impl SignedGridMeasure {
    pub fn new(grid: Arc<PolarGrid>, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidMeasure("density length mismatch".into()));
        }
        Ok(Self { grid, density })
    }

    pub fn zero(grid: Arc<PolarGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            density: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &SignedGridMeasure) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            density: self
                .density
                .iter()
                .zip(&other.density)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            density: self.density.iter().map(|d| s * d).collect(),
        }
    }

    /// Projects onto zero total mass by subtracting `mass · reference`.
    pub fn centered(&self, reference: &GridMeasure2D) -> Result<Self> {
        let m = self.total_mass();
        self.axpy(-m, &reference.to_signed())
    }

    /// Positive measure, if the density is nonnegative and has unit mass.
    pub fn to_probability(&self) -> Result<GridMeasure2D> {
        GridMeasure2D::new(self.grid.clone(), self.density.clone())
    }

    pub fn grid_integrate(&self, f: impl Fn(&[f64; 2]) -> f64) -> f64 {
        self.grid
            .points()
            .iter()
            .zip(&self.density)
            .zip(self.grid.quad_weights())
            .map(|((p, d), w)| f(p) * d * w)
            .sum()
    }
}

impl Measure for SignedGridMeasure {
    fn dim(&self) -> usize {
        2
    }

    fn for_each_atom(&self, f: &mut dyn FnMut(&[f64], f64)) {
        for ((p, d), w) in self
            .grid
            .points()
            .iter()
            .zip(&self.density)
            .zip(self.grid.quad_weights())
        {
            f(p, d * w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::v_norm;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(GridSpec::new(2.5, 64, 64)).unwrap()
    }

    fn gamma(grid: &Arc<PolarGrid>, v: &ConfinementPotential) -> GridMeasure2D {
        let logd: Vec<f64> = grid.points().iter().map(|p| -2.0 * v.value(p)).collect();
        GridMeasure2D::from_log_density(grid.clone(), &logd)
            .unwrap()
            .0
    }

    #[test]
    fn quadrature_weights_cover_the_disc() {
        let g = grid();
        let area: f64 = g.quad_weights().iter().sum();
        assert!((area - PI * 2.5 * 2.5).abs() < 1e-12);
    }

    #[test]
    fn integrate_constant_and_indicator() {
        let g = grid();
        let v = ConfinementPotential::quartic(1.0, 0.0, 1.0);
        let mu = gamma(&g, &v);
        assert!((mu.grid_integrate(|_| 1.0) - 1.0).abs() < 1e-8);
        let rmax = g.rho_max();
        assert!(
            (mu.grid_integrate(|p| if p[0].hypot(p[1]) <= rmax { 1.0 } else { 0.0 }) - 1.0).abs()
                < 1e-8
        );
    }

    #[test]
    fn rejects_unnormalized_or_negative() {
        let g = grid();
        assert!(GridMeasure2D::new(g.clone(), vec![1.0; g.len()]).is_err());
        let mut d = vec![1.0; g.len()];
        d[0] = -1.0;
        assert!(GridMeasure2D::from_unnormalized(g, d).is_err());
    }

    #[test]
    fn histogram_keeps_mass_and_mean_to_cell_size() {
        let g = PolarGrid::new(GridSpec::new(3.0, 120, 128)).unwrap();
        let pts = vec![0.3, 0.4, -1.0, 0.5, 0.0, -2.0];
        let mu = ParticleMeasure::from_unnormalized(2, pts, vec![1.0, 2.0, 1.0]).unwrap();
        let h = GridMeasure2D::histogram(g.clone(), &mu).unwrap();
        assert!((h.grid_integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        let m = mu.mean();
        let hm = h.mean2();
        assert!((m[0] - hm[0]).abs() < 0.05 && (m[1] - hm[1]).abs() < 0.05);
    }

    #[test]
    fn cell_lookup_is_consistent_with_nodes() {
        let g = grid();
        for (k, p) in g.points().iter().enumerate() {
            assert_eq!(g.cell_of(p), k);
        }
    }

    #[test]
    fn difference_v_norm() {
        let g = grid();
        let v = ConfinementPotential::quartic(1.0, 0.0, 1.0);
        let mu = gamma(&g, &v);
        let zero = mu.difference(&mu).unwrap();
        assert_eq!(v_norm(&zero, &v), 0.0);
        assert!((v_norm(&mu, &v) - mu.grid_integrate(|p| v.value(p))).abs() < 1e-14);
    }
}
