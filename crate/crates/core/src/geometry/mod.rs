//! Geometry of the von Mises–Fisher and hyperboloid families: embeddings,
//! frames, metric, Euler–Schouten curvatures, conformal gauge and chart,
//! finite-difference connections and the tensors behind the level corrections.

mod appendix;
mod chart;
mod family;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::power::CurvatureScalars;

pub use appendix::{appendix_tensors, appendix_tensors_fd, pairing_contraction, AppendixTensors, Tensor};
pub use chart::{
    conformal_chart, conformal_chart_fd, fd_connection, fd_connection_scaled, utilde, w_chart, w_chart_fd_frame,
    ConformalChart, Gauge,
};
pub use family::{CurvedFamily, Model, UCoord, SINGULARITY_MARGIN};

/// Which dual coordinate system an ambient vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientKind {
    Theta,
    Eta,
}

/// An `n`-vector in natural (θ) or expectation (η) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVec {
    pub kind: AmbientKind,
    pub v: Vec<f64>,
}

/// Natural and expectation parameters of a model point.
///
/// Coordinate singularities are allowed here: the embedding itself is
/// smooth there, only the chart degenerates.
pub fn embed(fam: &CurvedFamily, u: &UCoord) -> Result<(AmbientVec, AmbientVec)> {
    fam.check_dim(u)?;
    let zero = vec![0; fam.m];
    Ok((
        AmbientVec {
            kind: AmbientKind::Theta,
            v: fam.theta_partial(&zero, &u.0),
        },
        AmbientVec {
            kind: AmbientKind::Eta,
            v: fam.eta_partial(&zero, &u.0),
        },
    ))
}

/// Tensors evaluated at one model point.
#[derive(Debug, Clone)]
pub struct GeometryAt {
    pub u: UCoord,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Rows `∂_a θ`.
    pub b_theta: DMatrix<f64>,
    /// Rows `∂_a η`.
    pub b_eta: DMatrix<f64>,
    /// Normal in θ-pairing form (`B_κ^i`).
    pub normal_theta: DVector<f64>,
    /// Normal in η-pairing form (`B_{κi}`).
    pub normal_eta: DVector<f64>,
    pub h_ab: DMatrix<f64>,
    pub h_mean: f64,
    pub k_ab: DMatrix<f64>,
    pub nu: f64,
    /// `s_a = ∂_a log ν`.
    pub s: Vec<f64>,
    pub scalars: CurvatureScalars,
}

/// Frames `∂_a θ` and `∂_a η` as `m × n` matrices.
pub(crate) fn frames(fam: &CurvedFamily, u: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = (fam.m, fam.n());
    let mut bt = DMatrix::zeros(m, n);
    let mut be = DMatrix::zeros(m, n);
    for a in 0..m {
        let o = fam.orders(&[a]);
        let t = fam.theta_partial(&o, u);
        let e = fam.eta_partial(&o, u);
        for i in 0..n {
            bt[(a, i)] = t[i];
            be[(a, i)] = e[i];
        }
    }
    (bt, be)
}

/// `g_ab = ∂_a θ · ∂_b η` computed from the frames.
pub(crate) fn frame_metric(fam: &CurvedFamily, u: &[f64]) -> DMatrix<f64> {
    let (bt, be) = frames(fam, u);
    &bt * be.transpose()
}

fn normals(fam: &CurvedFamily, u: &[f64]) -> (DVector<f64>, DVector<f64>) {
    let zero = vec![0; fam.m];
    let xi: Vec<f64> = (0..fam.n()).map(|i| fam.xi_partial(i, &zero, u)).collect();
    let eta_side = DVector::from_vec(xi.clone());
    let theta_side = DVector::from_iterator(fam.n(), xi.iter().enumerate().map(|(i, x)| fam.form_sign(i) * x));
    (theta_side, eta_side)
}

/// Gauge `ν(u)` realizing conformal flatness.
pub fn gauge_nu(fam: &CurvedFamily, u: &UCoord) -> Result<f64> {
    fam.check_regular(u)?;
    Ok(gauge_nu_unchecked(fam, &u.0))
}

/// `ν(u)` without the singularity check; infinite on the singular set.
pub(crate) fn gauge_nu_unchecked(fam: &CurvedFamily, u: &[f64]) -> f64 {
    let mut p = 1.0;
    for (a, &x) in u.iter().enumerate() {
        p *= match (fam.model, a) {
            (Model::Hyperboloid, 0) => x.sinh().abs(),
            _ => x.sin().abs(),
        };
    }
    1.0 / p
}

/// `s_a = ∂_a log ν`.
pub fn gauge_log_gradient(fam: &CurvedFamily, u: &UCoord) -> Result<Vec<f64>> {
    fam.check_regular(u)?;
    Ok(gauge_log_gradient_unchecked(fam, &u.0))
}

pub(crate) fn gauge_log_gradient_unchecked(fam: &CurvedFamily, u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(a, &x)| match (fam.model, a) {
            (Model::Hyperboloid, 0) => -1.0 / x.tanh(),
            _ => -1.0 / x.tan(),
        })
        .collect()
}

/// Analytic geometry at `u`.
pub fn geometry(fam: &CurvedFamily, u: &UCoord) -> Result<GeometryAt> {
    fam.check_regular(u)?;
    let m = fam.m;
    let diag = fam.metric_diagonal(u)?;
    let g = DMatrix::from_diagonal(&DVector::from_vec(diag.clone()));
    let g_inv = DMatrix::from_diagonal(&DVector::from_iterator(m, diag.iter().map(|d| 1.0 / d)));
    let (b_theta, b_eta) = frames(fam, &u.0);
    let (normal_theta, normal_eta) = normals(fam, &u.0);
    let h_ab = &g * (-1.0 / fam.r_dagger);
    let h_mean = -1.0 / fam.r_dagger;
    let k_ab = &h_ab - &g * h_mean;
    let gamma2 = m as f64 * h_mean * h_mean;
    let scalars = CurvatureScalars::new(0.0, gamma2, 0.0)?;
    Ok(GeometryAt {
        u: u.clone(),
        g,
        g_inv,
        b_theta,
        b_eta,
        normal_theta,
        normal_eta,
        h_ab,
        h_mean,
        k_ab,
        nu: gauge_nu_unchecked(fam, &u.0),
        s: gauge_log_gradient_unchecked(fam, &u.0),
        scalars,
    })
}

/// 1-ES curvature `H_ab = ∂_a∂_b θ · B_κ` from second derivatives of the
/// embedding, with the mean and umbilic parts split off against `g`.
pub fn es_curvature_from_embedding(fam: &CurvedFamily, u: &UCoord) -> Result<(DMatrix<f64>, f64, DMatrix<f64>)> {
    fam.check_regular(u)?;
    let m = fam.m;
    let (_, normal_eta) = normals(fam, &u.0);
    let g = frame_metric(fam, &u.0);
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("metric not invertible at {:?}", u.0)))?;
    let mut h = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let d2 = fam.theta_partial(&fam.orders(&[a, b]), &u.0);
            h[(a, b)] = d2.iter().zip(normal_eta.iter()).map(|(x, y)| x * y).sum();
        }
    }
    let h_mean = (&h * &g_inv).trace() / m as f64;
    let k = &h - &g * h_mean;
    Ok((h, h_mean, k))
}

/// Central finite-difference step for derivative order `order` at `x`.
pub(crate) fn fd_step(order: u32, x: f64) -> f64 {
    let scale = x.abs().max(1.0);
    match order {
        1 => f64::EPSILON.cbrt() * scale,
        _ => f64::EPSILON.powf(0.25) * scale,
    }
}

/// Fisher metric by central differences of `η(u)` paired with `∂θ`.
pub fn fd_metric(fam: &CurvedFamily, u: &UCoord) -> Result<DMatrix<f64>> {
    fam.check_regular(u)?;
    let m = fam.m;
    let (bt, _) = frames(fam, &u.0);
    let eta = |x: &[f64]| fam.eta_partial(&vec![0; m], x);
    let mut g = DMatrix::zeros(m, m);
    for b in 0..m {
        let h = fd_step(1, u[b]);
        let mut up = u.0.clone();
        let mut dn = u.0.clone();
        up[b] += h;
        dn[b] -= h;
        let (ep, em) = (eta(&up), eta(&dn));
        for a in 0..m {
            g[(a, b)] = (0..fam.n()).map(|i| bt[(a, i)] * (ep[i] - em[i]) / (2.0 * h)).sum();
        }
    }
    Ok(g)
}
