//! Exact samplers for the two families at `m = 2`.
//!
//! Draws are made at the pole `e₁` by inverting the closed-form CDF of the
//! colatitude statistic (`t = ξ·x` on the sphere, `w = ξ*x` on the
//! hyperboloid), with a uniform longitude, and then carried to `ξ(u)` by a
//! rotation or Lorentz transformation.

mod diagnostics;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{CurvedFamily, Model, UCoord};
use crate::numeric::RngStream;

pub use diagnostics::{colatitude, colatitude_cdf, ks_pvalue, ks_statistic};

/// A single observation `x` on `S^m` or `H^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
}

fn plane_map(fam: &CurvedFamily, a: usize, x: f64) -> DMatrix<f64> {
    let n = fam.n();
    let mut g = DMatrix::identity(n, n);
    match (fam.model, a) {
        (Model::Hyperboloid, 0) => {
            let (c, s) = (x.cosh(), x.sinh());
            g[(0, 0)] = c;
            g[(1, 1)] = c;
            g[(0, 1)] = s;
            g[(1, 0)] = s;
        }
        _ => {
            let (c, s) = (x.cos(), x.sin());
            g[(a, a)] = c;
            g[(a + 1, a + 1)] = c;
            g[(a, a + 1)] = -s;
            g[(a + 1, a)] = s;
        }
    }
    g
}

/// Orthogonal (sphere) or Lorentz (hyperboloid) matrix taking `e₁` to `ξ(u)`:
/// `R_{m,m+1}(u^m) ⋯ R_{23}(u²)·R_{12}(u¹)`, with a boost in place of
/// `R_{12}` on the hyperboloid.
pub fn frame_transport(fam: &CurvedFamily, u: &UCoord) -> Result<DMatrix<f64>> {
    fam.check_range(u)?;
    let n = fam.n();
    let mut out = DMatrix::identity(n, n);
    for a in 0..fam.m {
        out = plane_map(fam, a, u[a]) * out;
    }
    Ok(out)
}

/// Draws from one model point; the transport matrix is computed once.
#[derive(Debug, Clone)]
pub struct Sampler {
    model: Model,
    r: f64,
    expm1_2r: f64,
    transport: [[f64; 3]; 3],
}

impl Sampler {
    pub fn new(fam: &CurvedFamily, u: &UCoord) -> Result<Self> {
        if fam.m != 2 {
            return Err(Error::Unsupported(format!(
                "exact sampling is implemented for m = 2 only (got m = {})",
                fam.m
            )));
        }
        let t = frame_transport(fam, u)?;
        let mut transport = [[0.0; 3]; 3];
        for (i, row) in transport.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = t[(i, j)];
            }
        }
        Ok(Self {
            model: fam.model,
            r: fam.r,
            expm1_2r: (-2.0 * fam.r).exp_m1(),
            transport,
        })
    }

    /// Colatitude statistic from a uniform: `t ∈ [−1, 1]` on the sphere,
    /// `w ∈ [1, ∞)` on the hyperboloid.
    pub fn colatitude_from_uniform(&self, u: f64) -> f64 {
        match self.model {
            // log(U + (1−U)e^{−2r}) written to stay accurate for small r.
            Model::Vmf => (1.0 + ((1.0 - u) * self.expm1_2r).ln_1p() / self.r).clamp(-1.0, 1.0),
            Model::Hyperboloid => 1.0 - u.ln() / self.r,
        }
    }

    /// Writes one draw into `out` (length 3).
    pub fn draw_into(&self, stream: &mut RngStream, out: &mut [f64]) {
        let c = self.colatitude_from_uniform(stream.uniform());
        let phi = 2.0 * PI * stream.uniform();
        let radial = match self.model {
            Model::Vmf => (1.0 - c * c).max(0.0).sqrt(),
            Model::Hyperboloid => (c * c - 1.0).max(0.0).sqrt(),
        };
        let pole = [c, radial * phi.cos(), radial * phi.sin()];
        for (i, o) in out.iter_mut().enumerate().take(3) {
            *o = self.transport[i][0] * pole[0] + self.transport[i][1] * pole[1] + self.transport[i][2] * pole[2];
        }
    }

    pub fn draw(&self, stream: &mut RngStream) -> Observation {
        let mut x = vec![0.0; 3];
        self.draw_into(stream, &mut x);
        Observation { x }
    }
}

/// One exact von Mises–Fisher draw with mean direction `ξ(u)`.
pub fn sample_vmf(fam: &CurvedFamily, u: &UCoord, stream: &mut RngStream) -> Result<Observation> {
    if fam.model != Model::Vmf {
        return Err(Error::Domain("sample_vmf called with a hyperboloid family".into()));
    }
    Ok(Sampler::new(fam, u)?.draw(stream))
}

/// One exact hyperboloid draw with mean direction `ξ(u)`.
pub fn sample_hyperboloid(fam: &CurvedFamily, u: &UCoord, stream: &mut RngStream) -> Result<Observation> {
    if fam.model != Model::Hyperboloid {
        return Err(Error::Domain("sample_hyperboloid called with a von Mises–Fisher family".into()));
    }
    Ok(Sampler::new(fam, u)?.draw(stream))
}

/// Draws `count` observations into a flat row-major buffer.
pub fn sample_many(fam: &CurvedFamily, u: &UCoord, count: usize, stream: &mut RngStream) -> Result<Vec<f64>> {
    let s = Sampler::new(fam, u)?;
    let mut out = vec![0.0; 3 * count];
    for chunk in out.chunks_exact_mut(3) {
        s.draw_into(stream, chunk);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::embed;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn transport_identity_at_pole() {
        let f = CurvedFamily::vmf(2, 1.0).unwrap();
        let t = frame_transport(&f, &UCoord::new(vec![0.0, 0.0])).unwrap();
        assert!((t - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
        let h = CurvedFamily::hyperboloid(3, 1.0).unwrap();
        let t = frame_transport(&h, &UCoord::new(vec![0.0, 0.0, 0.0])).unwrap();
        assert!((t - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn transport_preserves_form_and_hits_direction() {
        for fam in [CurvedFamily::vmf(3, 1.0).unwrap(), CurvedFamily::hyperboloid(3, 1.0).unwrap()] {
            let u = UCoord::new(vec![1.3, 2.0, 4.1]);
            let t = frame_transport(&fam, &u).unwrap();
            let xi = fam.direction(&u).unwrap();
            for i in 0..4 {
                assert!((t[(i, 0)] - xi[i]).abs() < 1e-12);
            }
            let mut s = RngStream::new(5, 0);
            for _ in 0..20 {
                let x: Vec<f64> = (0..4).map(|_| s.uniform() - 0.5).collect();
                let y: Vec<f64> = (0..4).map(|_| s.uniform() - 0.5).collect();
                let tx: Vec<f64> = (0..4).map(|i| (0..4).map(|j| t[(i, j)] * x[j]).sum()).collect();
                let ty: Vec<f64> = (0..4).map(|i| (0..4).map(|j| t[(i, j)] * y[j]).sum()).collect();
                assert!((fam.form(&tx, &ty) - fam.form(&x, &y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_cdf_endpoints() {
        let f = CurvedFamily::vmf(2, 0.7).unwrap();
        let s = Sampler::new(&f, &UCoord::new(vec![1.0, 1.0])).unwrap();
        assert_eq!(s.colatitude_from_uniform(1.0), 1.0);
        assert!((s.colatitude_from_uniform(0.0) + 1.0).abs() < 1e-12);
        let tiny = CurvedFamily::vmf(2, 1e-9).unwrap();
        let s = Sampler::new(&tiny, &UCoord::new(vec![1.0, 1.0])).unwrap();
        for &u in &[0.1, 0.5, 0.9] {
            assert!((s.colatitude_from_uniform(u) - (2.0 * u - 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn draws_lie_on_the_model() {
        let h = CurvedFamily::hyperboloid(2, 2.0).unwrap();
        let v = CurvedFamily::vmf(2, 0.2).unwrap();
        let mut s = RngStream::new(11, 3);
        let u = UCoord::new(vec![1.0, FRAC_PI_2]);
        for _ in 0..1000 {
            let x = sample_hyperboloid(&h, &u, &mut s).unwrap().x;
            assert!((h.form(&x, &x) - 1.0).abs() < 1e-12 * x[0] * x[0]);
            assert!(x[0] >= 1.0);
            let y = sample_vmf(&v, &u, &mut s).unwrap().x;
            assert!((v.form(&y, &y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_means() {
        for fam in [CurvedFamily::vmf(2, 0.2).unwrap(), CurvedFamily::hyperboloid(2, 2.0).unwrap()] {
            let u = UCoord::new(vec![1.0, 2.0]);
            let n = 100_000;
            let xs = sample_many(&fam, &u, n, &mut RngStream::new(7, 0)).unwrap();
            let (_, eta) = embed(&fam, &u).unwrap();
            for i in 0..3 {
                let col: Vec<f64> = xs.iter().skip(i).step_by(3).copied().collect();
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!((mean - eta.v[i]).abs() < 4.0 * se, "{:?} comp {i}: {mean} vs {}", fam.model, eta.v[i]);
            }
        }
    }

    #[test]
    fn hyperboloid_excess_is_exponential() {
        let fam = CurvedFamily::hyperboloid(2, 2.0).unwrap();
        let s = Sampler::new(&fam, &UCoord::new(vec![0.5, 1.0])).unwrap();
        let mut st = RngStream::new(2, 9);
        let n = 100_000;
        let mean = (0..n).map(|_| s.colatitude_from_uniform(st.uniform()) - 1.0).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn unsupported_dimension() {
        let f = CurvedFamily::vmf(3, 1.0).unwrap();
        let u = UCoord::new(vec![1.0, 1.0, 1.0]);
        assert!(matches!(sample_vmf(&f, &u, &mut RngStream::new(0, 0)), Err(Error::Unsupported(_))));
        let h = CurvedFamily::hyperboloid(2, 1.0).unwrap();
        assert!(sample_vmf(&h, &UCoord::new(vec![1.0, 1.0]), &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn streams_reproduce() {
        let f = CurvedFamily::vmf(2, 0.5).unwrap();
        let u = UCoord::new(vec![0.4, 5.0]);
        let a = sample_many(&f, &u, 100, &mut RngStream::new(9, 4)).unwrap();
        let b = sample_many(&f, &u, 100, &mut RngStream::new(9, 4)).unwrap();
        assert_eq!(a, b);
    }
}
