use std::fmt;
use std::sync::Arc;

use super::Measure;
use crate::error::{Error, Result};
use crate::potentials::{ConfinementPotential, ScalarFn};

/// Angular factor of a dictionary function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harmonic {
    Const,
    Cos(u32),
    Sin(u32),
}

impl Harmonic {
    fn order(self) -> u32 {
        match self {
            Harmonic::Const => 0,
            Harmonic::Cos(k) | Harmonic::Sin(k) => k,
        }
    }

    fn eval(self, angle: f64) -> f64 {
        match self {
            Harmonic::Const => 1.0,
            Harmonic::Cos(k) => (k as f64 * angle).cos(),
            Harmonic::Sin(k) => (k as f64 * angle).sin(),
        }
    }
}

/// Test function of the weak metric.
#[derive(Clone)]
pub enum DictFunction {
    /// `scale · exp(−(|x| − center)² / (2 width²)) · h(angle(x))`.
    RadialHarmonic {
        center: f64,
        width: f64,
        harmonic: Harmonic,
        scale: f64,
    },
    Custom {
        name: String,
        f: ScalarFn,
    },
}

impl fmt::Debug for DictFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RadialHarmonic {
                center,
                width,
                harmonic,
                scale,
            } => write!(
                f,
                "bump(c={center:.3}, w={width:.3}, {harmonic:?}, s={scale:.4})"
            ),
            Self::Custom { name, .. } => write!(f, "custom({name})"),
        }
    }
}

impl DictFunction {
    pub fn custom(name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::RadialHarmonic {
                center,
                width,
                harmonic,
                scale,
            } => {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let z = (r - center) / width;
                let radial = (-0.5 * z * z).exp();
                let ang = if x.len() >= 2 { x[1].atan2(x[0]) } else { 0.0 };
                scale * radial * harmonic.eval(ang)
            }
            Self::Custom { f, .. } => f(x),
        }
    }
}

/// Ordered test functions `f_k` with weights `w_k` (default `2^{-k}`).
#[derive(Debug, Clone)]
pub struct FunctionDictionary {
    entries: Vec<(DictFunction, f64)>,
}

impl FunctionDictionary {
    pub fn from_functions(entries: Vec<(DictFunction, f64)>) -> Self {
        Self { entries }
    }

    /// Gaussian radial bumps times harmonics `{1, cos v, sin v, cos 2v}`,
    /// each scaled so that `sup |f_k| / V = 1`.
    ///
    /// Bump centers are spread over the radii where `e^{-2V}` is not
    /// negligible. Lower-order functions near the origin come first and get
    /// the largest weights.
    pub fn radial_harmonic(v: &ConfinementPotential, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("size", "dictionary must be nonempty"));
        }
        let reach = v
            .truncation_radius(20.0)
            .ok_or_else(|| Error::invalid("potential", "dictionary needs a radial potential"))?;
        let harmonics = [
            Harmonic::Const,
            Harmonic::Cos(1),
            Harmonic::Sin(1),
            Harmonic::Cos(2),
        ];
        let n_centers = size.div_ceil(harmonics.len()).max(1);
        let width = reach / n_centers as f64;
        let mut keys: Vec<(usize, u32, usize, usize)> = Vec::new();
        for c in 0..n_centers {
            for (h_idx, h) in harmonics.iter().enumerate() {
                keys.push((c + h.order() as usize, h.order(), h_idx, c));
            }
        }
        keys.sort();
        let mut entries = Vec::with_capacity(size);
        for (k, &(_, _, h_idx, c)) in keys.iter().take(size).enumerate() {
            let center = reach * c as f64 / n_centers as f64;
            let sup = sup_ratio(v, center, width, reach * 4.0);
            entries.push((
                DictFunction::RadialHarmonic {
                    center,
                    width,
                    harmonic: harmonics[h_idx],
                    scale: 1.0 / sup,
                },
                0.5f64.powi(k as i32 + 1),
            ));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(DictFunction, f64)] {
        &self.entries
    }

    pub fn function(&self, k: usize) -> &DictFunction {
        &self.entries[k].0
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.entries[k].1
    }

    /// Same functions, same per-function weights, new order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            entries: order.iter().map(|&i| self.entries[i].clone()).collect(),
        }
    }

    /// Keeps the first `n` entries.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            entries: self.entries.iter().take(n).cloned().collect(),
        }
    }

    /// `(μ(f_k))_k`.
    pub fn moments(&self, mu: &dyn Measure) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        mu.for_each_atom(&mut |x, w| {
            for (o, (f, _)) in out.iter_mut().zip(&self.entries) {
                *o += w * f.eval(x);
            }
        });
        out
    }

    pub fn distance_from_moments(&self, a: &[f64], b: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(a.iter().zip(b))
            .map(|((_, w), (x, y))| w * (x - y).abs())
            .sum()
    }
}

/// `sup_ρ bump(ρ) / V(ρ)` by a fine scan refined with golden-section search.
fn sup_ratio(v: &ConfinementPotential, center: f64, width: f64, reach: f64) -> f64 {
    let ratio = |r: f64| {
        let z = (r - center) / width;
        (-0.5 * z * z).exp() / v.radial(r).unwrap_or(f64::INFINITY)
    };
    let n = 4000;
    let step = reach / n as f64;
    let (mut best_r, mut best) = (0.0, ratio(0.0));
    for i in 1..=n {
        let r = i as f64 * step;
        let q = ratio(r);
        if q > best {
            best = q;
            best_r = r;
        }
    }
    let (mut a, mut b) = ((best_r - step).max(0.0), best_r + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ratio(c) > ratio(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(ratio(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{GridMeasure2D, GridSpec, PolarGrid};

    #[test]
    fn default_dictionary_is_v_bounded() {
        for v in [
            ConfinementPotential::quartic(1.0, 0.0, 1.0),
            ConfinementPotential::quartic(0.05, 0.3, 1.0),
        ] {
            let dict = FunctionDictionary::radial_harmonic(&v, 32).unwrap();
            assert_eq!(dict.len(), 32);
            let grid = PolarGrid::new(GridSpec::new(5.0, 80, 64)).unwrap();
            for (f, _) in dict.entries() {
                let worst = grid
                    .points()
                    .iter()
                    .map(|p| f.eval(p).abs() / v.value(p))
                    .fold(0.0, f64::max);
                assert!(worst <= 1.0 + 1e-12, "{f:?}: {worst}");
            }
            let wsum: f64 = dict.entries().iter().map(|e| e.1).sum();
            assert!(wsum < 1.0);
        }
    }

    #[test]
    fn reordering_keeps_distance() {
        let v = ConfinementPotential::quartic(1.0, 0.0, 1.0);
        let dict = FunctionDictionary::radial_harmonic(&v, 8).unwrap();
        let grid = PolarGrid::new(GridSpec::new(2.5, 40, 32)).unwrap();
        let a = GridMeasure2D::from_unnormalized(
            grid.clone(),
            grid.map_nodes(|p| (-2.0 * v.value(p) + 0.7 * p[0]).exp()),
        )
        .unwrap();
        let b = GridMeasure2D::from_unnormalized(
            grid.clone(),
            grid.map_nodes(|p| (-2.0 * v.value(p) - 0.3 * p[1]).exp()),
        )
        .unwrap();
        let d1 = crate::measures::weak_distance(&a, &b, &dict);
        let perm = dict.permuted(&[7, 3, 5, 1, 0, 2, 6, 4]);
        let d2 = crate::measures::weak_distance(&a, &b, &perm);
        assert!((d1 - d2).abs() < 1e-15);
        assert!(d1 > 0.0);
    }
}
