//! Small statistics helpers for the statistical diagnostics.

/// Online mean with batch-means standard error for time averages of a
/// correlated stream.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_len: usize,
    current_sum: f64,
    current_n: usize,
    batches: Vec<f64>,
    total_sum: f64,
    total_n: usize,
}

impl BatchMeans {
    /// `batch_len` samples per batch.
    pub fn new(batch_len: usize) -> Self {
        Self {
            batch_len: batch_len.max(1),
            current_sum: 0.0,
            current_n: 0,
            batches: Vec::new(),
            total_sum: 0.0,
            total_n: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.current_sum += x;
        self.current_n += 1;
        self.total_sum += x;
        self.total_n += 1;
        if self.current_n == self.batch_len {
            self.batches.push(self.current_sum / self.batch_len as f64);
            self.current_sum = 0.0;
            self.current_n = 0;
        }
    }

    pub fn mean(&self) -> f64 {
        self.total_sum / self.total_n as f64
    }

    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    /// Standard error of the overall mean from the spread of batch means.
    pub fn standard_error(&self) -> f64 {
        let b = self.batches.len();
        if b < 2 {
            return f64::INFINITY;
        }
        let m = self.batches.iter().sum::<f64>() / b as f64;
        let var = self.batches.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Unwraps an angle sequence so consecutive jumps stay within `(−π, π]`.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = angles[i - 1];
            let d = a - prev;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(a + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_iid() {
        let mut b = BatchMeans::new(10);
        for i in 0..1000 {
            b.push((i % 2) as f64);
        }
        assert!((b.mean() - 0.5).abs() < 1e-15);
        assert_eq!(b.n_batches(), 100);
        assert!(b.standard_error() < 1e-12);
    }

    #[test]
    fn unwrap_linear_ramp() {
        let raw: Vec<f64> = (0..100)
            .map(|i| {
                let a = 0.3 * i as f64;
                a.sin().atan2(a.cos())
            })
            .collect();
        let un = unwrap_angles(&raw);
        let (slope, _) = linear_fit(&(0..100).map(|i| i as f64).collect::<Vec<_>>(), &un);
        assert!((slope - 0.3).abs() < 1e-12);
    }
}
