//! Conformal chart `ũ = ν(u)·(η₁, …, η_m)`, finite-difference mixture
//! connections and the orthogonal mixture-flat ancillary chart.

use nalgebra::DMatrix;

use super::appendix::Tensor;
use super::family::{CurvedFamily, UCoord};
use super::{fd_step, frame_metric, frames, gauge_log_gradient_unchecked, gauge_nu_unchecked, AmbientKind, AmbientVec};
use crate::error::{Error, Result};

/// Scale function used to build the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// The model's own gauge, under which the chart is mixture-affine.
    #[default]
    Model,
    /// `ν ≡ 1`.
    Flat,
}

impl Gauge {
    fn nu(self, fam: &CurvedFamily, u: &[f64]) -> f64 {
        match self {
            Gauge::Model => gauge_nu_unchecked(fam, u),
            Gauge::Flat => 1.0,
        }
    }

    fn log_gradient(self, fam: &CurvedFamily, u: &[f64]) -> Vec<f64> {
        match self {
            Gauge::Model => gauge_log_gradient_unchecked(fam, u),
            Gauge::Flat => vec![0.0; fam.m],
        }
    }
}

/// Conformal coordinates of a point and the chart's differential at a base.
#[derive(Debug, Clone)]
pub struct ConformalChart {
    pub utilde: Vec<f64>,
    /// `J[(e, a)] = ∂ũ^e/∂u^a` at the base.
    pub jacobian: DMatrix<f64>,
    /// Metric in ũ-coordinates at the base.
    pub g_tilde: DMatrix<f64>,
}

/// `ũ(u)` under the model gauge.
pub fn utilde(fam: &CurvedFamily, u: &UCoord) -> Result<Vec<f64>> {
    fam.check_regular(u)?;
    Ok(utilde_raw(fam, &u.0, Gauge::Model))
}

pub(crate) fn utilde_raw(fam: &CurvedFamily, u: &[f64], gauge: Gauge) -> Vec<f64> {
    let nu = gauge.nu(fam, u);
    let eta = fam.eta_partial(&vec![0; fam.m], u);
    eta[..fam.m].iter().map(|e| nu * e).collect()
}

pub(crate) fn jacobian_raw(fam: &CurvedFamily, u: &[f64], gauge: Gauge) -> DMatrix<f64> {
    let m = fam.m;
    let nu = gauge.nu(fam, u);
    let s = gauge.log_gradient(fam, u);
    let eta = fam.eta_partial(&vec![0; m], u);
    let (_, be) = frames(fam, u);
    DMatrix::from_fn(m, m, |e, a| nu * (s[a] * eta[e] + be[(a, e)]))
}

fn finish_chart(fam: &CurvedFamily, u: &UCoord, base: &UCoord, jacobian: DMatrix<f64>) -> Result<ConformalChart> {
    let jinv = jacobian
        .clone()
        .try_inverse()
        .filter(|j| j.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::Singular(format!("conformal chart Jacobian is rank deficient at {:?}", base.0)))?;
    let g = frame_metric(fam, &base.0);
    let g_tilde = jinv.transpose() * g * &jinv;
    Ok(ConformalChart {
        utilde: utilde_raw(fam, &u.0, Gauge::Model),
        jacobian,
        g_tilde,
    })
}

/// `ũ(u)` with the analytic Jacobian and metric `g̃` at `base`.
pub fn conformal_chart(fam: &CurvedFamily, u: &UCoord, base: &UCoord) -> Result<ConformalChart> {
    fam.check_regular(u)?;
    fam.check_regular(base)?;
    let j = jacobian_raw(fam, &base.0, Gauge::Model);
    finish_chart(fam, u, base, j)
}

/// As [`conformal_chart`], with the Jacobian from central differences.
pub fn conformal_chart_fd(fam: &CurvedFamily, u: &UCoord, base: &UCoord) -> Result<ConformalChart> {
    fam.check_regular(u)?;
    fam.check_regular(base)?;
    let m = fam.m;
    let mut j = DMatrix::zeros(m, m);
    for a in 0..m {
        let h = fd_step(1, base[a]);
        let mut up = base.0.clone();
        let mut dn = base.0.clone();
        up[a] += h;
        dn[a] -= h;
        let (p, q) = (utilde_raw(fam, &up, Gauge::Model), utilde_raw(fam, &dn, Gauge::Model));
        for e in 0..m {
            j[(e, a)] = (p[e] - q[e]) / (2.0 * h);
        }
    }
    finish_chart(fam, u, base, j)
}

/// `Γ^{(−1)}_{abc} = ∂_b(∂_a η)·∂_c θ` in u-coordinates, differentiating the
/// η-frame by central differences.
pub fn fd_connection(fam: &CurvedFamily, base: &UCoord) -> Result<Tensor> {
    fam.check_regular(base)?;
    Ok(fd_connection_raw(fam, &base.0))
}

fn fd_connection_raw(fam: &CurvedFamily, u: &[f64]) -> Tensor {
    let (m, n) = (fam.m, fam.n());
    let (bt, _) = frames(fam, u);
    let mut out = Tensor::zeros(m, 3);
    for b in 0..m {
        let de = partial5(|x| frames(fam, x).1, u, b);
        for a in 0..m {
            for c in 0..m {
                let v: f64 = (0..n).map(|i| de[(a, i)] * bt[(c, i)]).sum();
                out.set(&[a, b, c], v);
            }
        }
    }
    out
}

/// Fourth-order central difference of a matrix-valued `f` along `u^b`.
fn partial5(f: impl Fn(&[f64]) -> DMatrix<f64>, u: &[f64], b: usize) -> DMatrix<f64> {
    let h = f64::EPSILON.powf(0.2) * u[b].abs().max(1.0);
    let at = |k: f64| {
        let mut v = u.to_vec();
        v[b] += k * h;
        f(&v)
    };
    (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) / (12.0 * h)
}

/// Scaled mixture connection `Γ̃^{(−1)}` expressed in the ũ-chart at `base`.
///
/// Under [`Gauge::Model`] every component vanishes up to truncation error.
pub fn fd_connection_scaled(fam: &CurvedFamily, base: &UCoord, gauge: Gauge) -> Result<Tensor> {
    fam.check_regular(base)?;
    let m = fam.m;
    let u = &base.0;
    let gamma = fd_connection_raw(fam, u);
    let g = frame_metric(fam, u);
    let s = gauge.log_gradient(fam, u);
    let j = jacobian_raw(fam, u, gauge);
    let jinv = j
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("conformal chart Jacobian is rank deficient at {u:?}")))?;

    // Second derivatives of the chart: d2[(a, b)][e] = ∂_a∂_b ũ^e.
    let mut d2 = vec![vec![0.0; m]; m * m];
    for b in 0..m {
        let dj = partial5(|x| jacobian_raw(fam, x, gauge), u, b);
        for a in 0..m {
            for e in 0..m {
                d2[a * m + b][e] = dj[(e, a)];
            }
        }
    }
    if d2.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::FiniteDifference(format!("non-finite chart derivatives at {u:?}")));
    }

    // Γ̃_abc − g_dc Jinv^d_e ∂_a∂_b ũ^e in u-indices.
    let mut inner = Tensor::zeros(m, 3);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut v = gamma.get(&[a, b, c]) + g[(c, a)] * s[b] + g[(c, b)] * s[a];
                for d in 0..m {
                    for e in 0..m {
                        v -= g[(d, c)] * jinv[(d, e)] * d2[a * m + b][e];
                    }
                }
                inner.set(&[a, b, c], v);
            }
        }
    }
    let mut out = Tensor::zeros(m, 3);
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let mut v = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..m {
                            v += jinv[(a, x)] * jinv[(b, y)] * jinv[(c, z)] * inner.get(&[a, b, c]);
                        }
                    }
                }
                out.set(&[x, y, z], v);
            }
        }
    }
    Ok(out)
}

/// η-coordinates of `w = (u, v)` in the orthogonal mixture-flat ancillary
/// chart: `η(u) + v·B_κ(u)`.
pub fn w_chart(fam: &CurvedFamily, u: &UCoord, v: f64) -> Result<AmbientVec> {
    fam.check_dim(u)?;
    if !v.is_finite() || fam.r_dagger + v <= 0.0 {
        return Err(Error::Domain(format!(
            "ancillary offset {v} folds the chart over (needs v > −{})",
            fam.r_dagger
        )));
    }
    let zero = vec![0; fam.m];
    let eta = fam.eta_partial(&zero, &u.0);
    let v_eta = eta.iter().map(|e| e * (1.0 + v / fam.r_dagger)).collect();
    Ok(AmbientVec {
        kind: AmbientKind::Eta,
        v: v_eta,
    })
}

/// `∂η/∂w` of the ancillary chart by central differences; rows are
/// `u¹, …, u^m, v`.
pub fn w_chart_fd_frame(fam: &CurvedFamily, u: &UCoord, v: f64) -> Result<DMatrix<f64>> {
    let (m, n) = (fam.m, fam.n());
    let mut out = DMatrix::zeros(m + 1, n);
    for a in 0..=m {
        let mut up = u.clone();
        let mut dn = u.clone();
        let (vp, vm, h) = if a < m {
            let h = fd_step(1, u[a]);
            up.0[a] += h;
            dn.0[a] -= h;
            (v, v, h)
        } else {
            let h = fd_step(1, v);
            (v + h, v - h, h)
        };
        let p = w_chart(fam, &up, vp)?;
        let q = w_chart(fam, &dn, vm)?;
        for i in 0..n {
            out[(a, i)] = (p.v[i] - q.v[i]) / (2.0 * h);
        }
    }
    Ok(out)
}
