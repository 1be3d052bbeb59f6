//! Sufficient statistics, the maximum likelihood estimator and the observed
//! mean curvature driving the stopping rule.

use crate::error::{Error, Result};
use crate::geometry::{CurvedFamily, Model, UCoord};

/// Running sum `Σx(t)` and count.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    pub sum_x: Vec<f64>,
    pub count: usize,
}

impl SuffStats {
    pub fn new(n: usize) -> Self {
        Self {
            sum_x: vec![0.0; n],
            count: 0,
        }
    }

    pub fn from_sum(sum_x: Vec<f64>, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain("sufficient statistics need at least one observation".into()));
        }
        Ok(Self { sum_x, count })
    }

    pub fn push(&mut self, x: &[f64]) {
        for (s, v) in self.sum_x.iter_mut().zip(x) {
            *s += v;
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &SuffStats) {
        for (s, v) in self.sum_x.iter_mut().zip(&other.sum_x) {
            *s += v;
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum_x.iter().map(|s| s / n).collect()
    }
}

/// Coordinates of a unit direction on the sphere or hyperboloid.
pub fn coordinates_of(model: Model, xi: &[f64]) -> Vec<f64> {
    let n = xi.len();
    let m = n - 1;
    let mut u = vec![0.0; m];
    let start = match model {
        Model::Vmf => 0,
        Model::Hyperboloid => {
            let tail = xi[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            u[0] = tail.asinh();
            1
        }
    };
    for a in start..m {
        if a == m - 1 {
            let phi = xi[m].atan2(xi[m - 1]);
            u[a] = if phi < 0.0 { phi + 2.0 * std::f64::consts::PI } else { phi };
            // atan2 can return exactly 2π after the shift for tiny negative angles.
            if u[a] >= 2.0 * std::f64::consts::PI {
                u[a] = 0.0;
            }
        } else {
            let tail = xi[a + 1..].iter().map(|x| x * x).sum::<f64>().sqrt();
            u[a] = tail.atan2(xi[a]);
        }
    }
    u
}

/// Norm of `x` under the model's form, or an error if it is not positive.
pub(crate) fn model_norm(fam: &CurvedFamily, x: &[f64]) -> Result<f64> {
    match fam.model {
        Model::Vmf => {
            let q = fam.form(x, x).sqrt();
            if q > 1e-12 {
                Ok(q)
            } else {
                Err(Error::Degenerate(format!("resultant length {q:e} is too small")))
            }
        }
        Model::Hyperboloid => {
            let q = fam.form(x, x);
            if q > 1e-12 && x[0] > 0.0 {
                Ok(q.sqrt())
            } else {
                Err(Error::Degenerate(format!("mean is not future timelike (x*x = {q:e}, x₁ = {})", x[0])))
            }
        }
    }
}

/// Maximum likelihood estimate: the coordinates of the normalized mean.
pub fn mle(fam: &CurvedFamily, stats: &SuffStats) -> Result<UCoord> {
    if stats.count == 0 || stats.sum_x.len() != fam.n() {
        return Err(Error::Domain(format!(
            "sufficient statistics of dimension {} with {} observations do not fit n = {}",
            stats.sum_x.len(),
            stats.count,
            fam.n()
        )));
    }
    let xbar = stats.mean();
    let q = model_norm(fam, &xbar)?;
    let xi: Vec<f64> = xbar.iter().map(|x| x / q).collect();
    Ok(UCoord::new(coordinates_of(fam.model, &xi)))
}

/// `−(1/m)·∂_a∂_b θ(û)·Σx · g^{ab}(û)`.
pub fn observed_mean_curvature(fam: &CurvedFamily, running: &SuffStats, u_hat: &UCoord) -> Result<f64> {
    fam.check_dim(u_hat)?;
    let g = fam.metric_diagonal(u_hat)?;
    let mut total = 0.0;
    for (a, ga) in g.iter().enumerate() {
        let d2 = fam.theta_partial(&fam.orders(&[a, a]), &u_hat.0);
        let pair: f64 = d2.iter().zip(&running.sum_x).map(|(x, y)| x * y).sum();
        total += pair / ga;
    }
    Ok(-total / fam.m as f64)
}

/// Closed form of [`observed_mean_curvature`] evaluated at the MLE of the
/// same statistics: `|Σx| / r†` under the model's form.
pub fn observed_mean_curvature_at_mle(fam: &CurvedFamily, running: &SuffStats) -> Result<f64> {
    Ok(model_norm(fam, &running.sum_x)? / fam.r_dagger)
}
