use rand::Rng;

use super::Measure;
use crate::error::{Error, Result};
use crate::potentials::ConfinementPotential;

const MASS_TOL: f64 = 1e-12;

/// Probability measure given by weighted atoms in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleMeasure {
    dim: usize,
    /// Flattened coordinates, `dim` per atom.
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleMeasure {
    /// Validates nonnegative weights summing to one within `1e-12`.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(dim, &points, &weights)?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(
                "negative or non-finite weight".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Rescales nonnegative weights to unit mass.
    pub fn from_unnormalized(dim: usize, points: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        Self::check_shape(dim, &points, &weights)?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(
                "negative or non-finite weight".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("zero total mass".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    fn check_shape(dim: usize, points: &[f64], weights: &[f64]) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        if weights.is_empty() || points.len() != dim * weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                points.len(),
                weights.len()
            )));
        }
        if points.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite coordinate".into()));
        }
        Ok(())
    }

    pub fn dirac(x: &[f64]) -> Self {
        Self {
            dim: x.len(),
            points: x.to_vec(),
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// `∫ V dμ`.
    pub fn v_mass(&self, v: &ConfinementPotential) -> f64 {
        self.atoms().map(|(x, w)| w * v.value(x)).sum()
    }

    /// One Euler step of `dμ = (δ_x − μ) dt / (r + t)`:
    /// `(1 − λ) μ + λ δ_x` with `λ = dt / (r + t)`.
    pub fn occupation_update(&self, x: &[f64], t: f64, dt: f64, r: f64) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::invalid("x", "dimension mismatch"));
        }
        if !(dt >= 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be nonnegative, got {dt}"),
            ));
        }
        if !(r > 0.0) {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        if !(t >= 0.0) {
            return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
        }
        if dt == 0.0 {
            return Ok(self.clone());
        }
        let lambda = dt / (r + t);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| (1.0 - lambda) * w).collect();
        weights.push(lambda);
        let mut points = self.points.clone();
        points.extend_from_slice(x);
        Ok(Self {
            dim: self.dim,
            points,
            weights,
        })
    }

    /// Weighted convex combination `(1 − s) self + s other` (atoms concatenated).
    pub fn mix(&self, other: &Self, s: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidMeasure("dimension mismatch".into()));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let weights = self
            .weights
            .iter()
            .map(|w| (1.0 - s) * w)
            .chain(other.weights.iter().map(|w| s * w))
            .collect();
        Self::from_unnormalized(self.dim, points, weights)
    }
}

impl Measure for ParticleMeasure {
    fn dim(&self) -> usize {
        self.dim
    }

    fn for_each_atom(&self, f: &mut dyn FnMut(&[f64], f64)) {
        for (x, w) in self.atoms() {
            f(x, w);
        }
    }
}

/// Systematic resampling to `n_max` equal-weight atoms, keeping atom order.
///
/// A single uniform offset `u ∈ [0, 1/n)` picks the atoms covering
/// `u + k/n` in the cumulative weights. Clouds with at most `n_max` atoms
/// are returned unchanged.
pub fn thin(mu: &ParticleMeasure, n_max: usize, rng: &mut impl Rng) -> Result<ParticleMeasure> {
    if n_max < 2 {
        return Err(Error::invalid(
            "n_max",
            format!("must be at least 2, got {n_max}"),
        ));
    }
    if mu.len() <= n_max {
        return Ok(mu.clone());
    }
    let total: f64 = mu.weights.iter().sum();
    let step = total / n_max as f64;
    let mut target = rng.random::<f64>() * step;
    let mut points = Vec::with_capacity(n_max * mu.dim);
    let mut cum = 0.0;
    let mut picked = 0;
    for (x, w) in mu.atoms() {
        cum += w;
        while picked < n_max && target < cum {
            points.extend_from_slice(x);
            picked += 1;
            target += step;
        }
    }
    // rounding can leave the last stratum unfilled
    while picked < n_max {
        points.extend_from_slice(mu.point(mu.len() - 1));
        picked += 1;
    }
    Ok(ParticleMeasure {
        dim: mu.dim,
        points,
        weights: vec![1.0 / n_max as f64; n_max],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThinReport {
    pub v_mass_before: f64,
    pub v_mass_after: f64,
    pub v_mass_rel_error: f64,
}

/// [`thin`] plus the relative change of `∫ V dμ`.
pub fn thin_with_report(
    mu: &ParticleMeasure,
    n_max: usize,
    v: &ConfinementPotential,
    rng: &mut impl Rng,
) -> Result<(ParticleMeasure, ThinReport)> {
    let out = thin(mu, n_max, rng)?;
    let before = mu.v_mass(v);
    let after = out.v_mass(v);
    Ok((
        out,
        ThinReport {
            v_mass_before: before,
            v_mass_after: after,
            v_mass_rel_error: (after - before).abs() / before,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_weights() {
        assert!(ParticleMeasure::new(2, vec![0.0, 0.0], vec![0.9]).is_err());
        assert!(ParticleMeasure::new(2, vec![0.0, 0.0, 1.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(ParticleMeasure::new(2, vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn occupation_update_examples() {
        let d0 = ParticleMeasure::dirac(&[0.0, 0.0]);
        assert_eq!(
            d0.occupation_update(&[1.0, 0.0], 0.0, 0.0, 1.0).unwrap(),
            d0
        );
        let r = 2.5;
        // λ = dt / (r + t) = ½ needs r + t = 2 dt
        let half = d0.occupation_update(&[1.0, 0.0], r, r, r).unwrap();
        assert_eq!(half.weights(), &[0.5, 0.5]);
        assert_eq!(half.mean(), vec![0.5, 0.0]);
        assert!(d0.occupation_update(&[1.0, 0.0], 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn mean_recursion_matches_direct_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = 1.3;
        let mut mu = ParticleMeasure::dirac(&[0.2, -0.1]);
        let mut mean = mu.mean();
        let mut t = 0.0;
        for _ in 0..100 {
            let dt = 0.01 + 0.2 * rng.random::<f64>();
            let x = [
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            ];
            let lambda = dt / (r + t);
            mu = mu.occupation_update(&x, t, dt, r).unwrap();
            for k in 0..2 {
                mean[k] = (1.0 - lambda) * mean[k] + lambda * x[k];
            }
            t += dt;
            let direct = mu.mean();
            assert!((direct[0] - mean[0]).abs() < 1e-12);
            assert!((direct[1] - mean[1]).abs() < 1e-12);
            assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn thin_identity_and_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = ParticleMeasure::from_unnormalized(1, vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(thin(&mu, 3, &mut rng).unwrap(), mu);
        let pts: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let big = ParticleMeasure::from_unnormalized(1, pts, vec![1.0; 1000]).unwrap();
        let small = thin(&big, 100, &mut rng).unwrap();
        assert_eq!(small.len(), 100);
        assert!((small.total_mass() - 1.0).abs() < 1e-12);
        assert!(thin(&big, 1, &mut rng).is_err());
    }

    #[test]
    fn thin_mean_is_unbiased_over_seeds() {
        // 10⁴ → 10³ atoms, mean error averaged over 100 seeds
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 10_000;
        let pts: Vec<f64> = (0..2 * n)
            .map(|_| rng.random::<f64>() * 4.0 - 2.0)
            .collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mu = ParticleMeasure::from_unnormalized(2, pts, w).unwrap();
        let m = mu.mean();
        let diffs: Vec<f64> = (0..100)
            .map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                thin(&mu, 1000, &mut r).unwrap().mean()[0] - m[0]
            })
            .collect();
        let avg = diffs.iter().sum::<f64>() / 100.0;
        let var = diffs.iter().map(|d| (d - avg) * (d - avg)).sum::<f64>() / 99.0;
        let se = (var / 100.0).sqrt();
        assert!(avg.abs() < 3.0 * se, "bias {avg} vs se {se}");
    }

    #[test]
    fn thin_report_tracks_v_mass() {
        let v = ConfinementPotential::quartic(1.0, 0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<f64> = (0..4000).map(|i| (i as f64 / 2000.0) - 1.0).collect();
        let mu = ParticleMeasure::from_unnormalized(2, pts, vec![1.0; 2000]).unwrap();
        let (_, rep) = thin_with_report(&mu, 200, &v, &mut rng).unwrap();
        assert!(rep.v_mass_rel_error < 0.05);
    }
}
