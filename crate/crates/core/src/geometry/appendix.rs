//! Higher-order tensors of the model and the contractions entering the
//! level corrections.
//!
//! The log-partition function of both families is radial, `ψ(θ) = F(ρ)` with
//! `ρ² = θᵀGθ` (`G = I` on the sphere, Minkowski on the hyperboloid). Its
//! directional derivatives therefore follow from the radial jet `F', …, F''''`
//! and the jet of `ρ` along a line; multilinear forms are recovered by
//! polarization.

use nalgebra::DMatrix;

use super::family::{CurvedFamily, Model, UCoord};
use super::{frame_metric, frames};
use crate::error::{Error, Result};
use crate::power::LevelContractions;

/// Dense rank-`k` tensor over an `m`-dimensional index range.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    m: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(m: usize, rank: usize) -> Self {
        Self {
            m,
            rank,
            data: vec![0.0; m.pow(rank as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub(crate) fn from_fn(m: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(m, rank);
        let mut idx = vec![0; rank];
        for slot in 0..t.data.len() {
            let mut rem = slot;
            for k in (0..rank).rev() {
                idx[k] = rem % m;
                rem /= m;
            }
            t.data[slot] = f(&idx);
        }
        t
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

/// Sum over all perfect pairings of the tensor's indices of the full
/// contraction with `g_inv` (e.g. `3g^{(ab}g^{cd)}` for rank 4).
pub fn pairing_contraction(t: &Tensor, g_inv: &DMatrix<f64>) -> f64 {
    fn pairings(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        match rest.split_first() {
            None => out.push(acc.clone()),
            Some((&first, tail)) => {
                for (j, &other) in tail.iter().enumerate() {
                    let mut remaining = tail.to_vec();
                    remaining.remove(j);
                    acc.push((first, other));
                    pairings(&remaining, acc, out);
                    acc.pop();
                }
            }
        }
    }
    assert!(t.rank % 2 == 0, "pairing contraction needs even rank");
    let positions: Vec<usize> = (0..t.rank).collect();
    let mut all = Vec::new();
    pairings(&positions, &mut Vec::new(), &mut all);
    let mut total = 0.0;
    let mut idx = vec![0; t.rank];
    for (slot, &value) in t.data.iter().enumerate() {
        if value == 0.0 {
            continue;
        }
        let mut rem = slot;
        for k in (0..t.rank).rev() {
            idx[k] = rem % t.m;
            rem /= t.m;
        }
        let weight: f64 = all
            .iter()
            .map(|p| p.iter().map(|&(x, y)| g_inv[(idx[x], idx[y])]).product::<f64>())
            .sum();
        total += value * weight;
    }
    total
}

/// Tensors of one model point together with the scalar contractions.
#[derive(Debug, Clone)]
pub struct AppendixTensors {
    pub t: Tensor,
    pub c: Tensor,
    pub s: Tensor,
    pub d: Tensor,
    pub k3: Tensor,
    pub k2: DMatrix<f64>,
    pub k4: Tensor,
    /// `b^a = g^{ad} C_{bcd} g^{bc}`.
    pub bias_vector: Vec<f64>,
    pub contractions: LevelContractions,
}

/// `F'(ρ), …, F''''(ρ)` for the radial log-partition function.
fn radial_jet(fam: &CurvedFamily, rho: f64, ratio: f64) -> [f64; 4] {
    let m = fam.m as f64;
    match fam.model {
        Model::Vmf => {
            let a = ratio;
            let f2 = 1.0 - a * a - m * a / rho;
            let f3 = -2.0 * a * f2 - m * f2 / rho + m * a / (rho * rho);
            let f4 = -2.0 * f2 * f2 - 2.0 * a * f3 - m * f3 / rho + 2.0 * m * f2 / (rho * rho)
                - 2.0 * m * a / rho.powi(3);
            [a, f2, f3, f4]
        }
        Model::Hyperboloid => {
            let b = ratio;
            let b1 = b * b - 1.0 - m * b / rho;
            let b2 = 2.0 * b * b1 - m * b1 / rho + m * b / (rho * rho);
            let b3 = 2.0 * b1 * b1 + 2.0 * b * b2 - m * b2 / rho + 2.0 * m * b1 / (rho * rho)
                - 2.0 * m * b / rho.powi(3);
            [-b, -b1, -b2, -b3]
        }
    }
}

/// `d^k/dt^k ψ(θ + t w)` at `t = 0` for `k = 2, 3, 4`.
fn line_jet(fam: &CurvedFamily, theta: &[f64], w: &[f64], jet: &[f64; 4]) -> [f64; 3] {
    let rho = fam.r;
    let b = fam.form(theta, w);
    let c = fam.form(w, w);
    let r1 = b / rho;
    let r2 = (c - r1 * r1) / rho;
    let r3 = -3.0 * r1 * r2 / rho;
    let r4 = -(3.0 * r2 * r2 + 4.0 * r1 * r3) / rho;
    let [f1, f2, f3, f4] = *jet;
    [
        f2 * r1 * r1 + f1 * r2,
        f3 * r1.powi(3) + 3.0 * f2 * r1 * r2 + f1 * r3,
        f4 * r1.powi(4) + 6.0 * f3 * r1 * r1 * r2 + f2 * (3.0 * r2 * r2 + 4.0 * r1 * r3) + f1 * r4,
    ]
}

/// Polarizes the order-`k` directional derivative `line(w)` into the
/// symmetric multilinear form evaluated at `vs`.
fn polarize(vs: &[&[f64]], mut line: impl FnMut(&[f64]) -> f64) -> f64 {
    let k = vs.len();
    let n = vs[0].len();
    let mut total = 0.0;
    let mut w = vec![0.0; n];
    for mask in 0..(1u32 << k) {
        let mut sign = 1.0;
        w.iter_mut().for_each(|x| *x = 0.0);
        for (j, v) in vs.iter().enumerate() {
            let e = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            sign *= e;
            for i in 0..n {
                w[i] += e * v[i];
            }
        }
        total += sign * line(&w);
    }
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    total / (fact * (1u64 << k) as f64)
}

fn frame_rows(fam: &CurvedFamily, u: &[f64]) -> Vec<Vec<f64>> {
    let (bt, _) = frames(fam, u);
    (0..fam.m).map(|a| bt.row(a).iter().copied().collect()).collect()
}

fn t_and_s(fam: &CurvedFamily, u: &[f64], line: &mut dyn FnMut(&[f64], usize) -> f64) -> (Tensor, Tensor) {
    let m = fam.m;
    let rows = frame_rows(fam, u);
    let t = Tensor::from_fn(m, 3, |i| {
        let vs: Vec<&[f64]> = i.iter().map(|&a| rows[a].as_slice()).collect();
        polarize(&vs, |w| line(w, 3))
    });
    let s = Tensor::from_fn(m, 4, |i| {
        let vs: Vec<&[f64]> = i.iter().map(|&a| rows[a].as_slice()).collect();
        polarize(&vs, |w| line(w, 4))
    });
    (t, s)
}

/// Analytic appendix tensors and contractions for the `(k₁, k₂)`-test at `u`.
pub fn appendix_tensors(fam: &CurvedFamily, u: &UCoord, k1: f64, k2: f64) -> Result<AppendixTensors> {
    fam.check_regular(u)?;
    let theta = fam.theta_partial(&vec![0; fam.m], &u.0);
    let jet = radial_jet(fam, fam.r, fam.r_dagger);
    let (t, s) = t_and_s(fam, &u.0, &mut |w, k| line_jet(fam, &theta, w, &jet)[k - 2]);
    assemble(fam, u, t, s, k1, k2)
}

/// As [`appendix_tensors`] but with `T` and `S` from central differences of
/// `η(θ)` along lines, using relative step `step`.
pub fn appendix_tensors_fd(fam: &CurvedFamily, u: &UCoord, k1: f64, k2: f64, step: f64) -> Result<AppendixTensors> {
    fam.check_regular(u)?;
    if !(step > 0.0 && step < 0.1) {
        return Err(Error::FiniteDifference(format!("step {step} outside (0, 0.1)")));
    }
    let theta = fam.theta_partial(&vec![0; fam.m], &u.0);
    let mut failure = None;
    let mut grad_along = |t: f64, w: &[f64]| -> f64 {
        let p: Vec<f64> = theta.iter().zip(w).map(|(a, b)| a + t * b).collect();
        let q = fam.form(&p, &p);
        if !(q > 0.0) {
            failure.get_or_insert_with(|| format!("line left the parameter cone at t = {t}"));
            return f64::NAN;
        }
        let rho = q.sqrt();
        let f1 = match CurvedFamily::new(fam.model, fam.m, rho) {
            Ok(f) => match fam.model {
                Model::Vmf => f.r_dagger,
                Model::Hyperboloid => -f.r_dagger,
            },
            Err(e) => {
                failure.get_or_insert_with(|| e.to_string());
                return f64::NAN;
            }
        };
        // η(θ) = F'(ρ) Gθ/ρ, paired with w.
        f1 * fam.form(&p, w) / rho
    };
    let mut line = |w: &[f64], k: usize| -> f64 {
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let h = step * fam.r / norm;
        match k {
            3 => {
                let (p, z, q) = (grad_along(h, w), grad_along(0.0, w), grad_along(-h, w));
                (p - 2.0 * z + q) / (h * h)
            }
            _ => {
                let p2 = grad_along(2.0 * h, w);
                let p1 = grad_along(h, w);
                let q1 = grad_along(-h, w);
                let q2 = grad_along(-2.0 * h, w);
                (p2 - 2.0 * p1 + 2.0 * q1 - q2) / (2.0 * h * h * h)
            }
        }
    };
    let (t, s) = t_and_s(fam, &u.0, &mut line);
    if let Some(msg) = failure {
        return Err(Error::FiniteDifference(format!("{msg} (step {step})")));
    }
    if t.data.iter().chain(&s.data).any(|x| !x.is_finite()) {
        return Err(Error::FiniteDifference(format!("non-finite tensor entries at step {step}")));
    }
    assemble(fam, u, t, s, k1, k2)
}

fn assemble(fam: &CurvedFamily, u: &UCoord, t: Tensor, s: Tensor, k1: f64, k2: f64) -> Result<AppendixTensors> {
    let m = fam.m;
    let uu = &u.0;
    let g = frame_metric(fam, uu);
    let gi = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("metric not invertible at {uu:?}")))?;
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let dtheta: Vec<Vec<f64>> = (0..m).map(|c| fam.theta_partial(&fam.orders(&[c]), uu)).collect();

    let c = Tensor::from_fn(m, 3, |i| dot(&fam.eta_partial(&fam.orders(&i[..2]), uu), &dtheta[i[2]]));
    let d = Tensor::from_fn(m, 4, |i| dot(&fam.eta_partial(&fam.orders(&i[..3]), uu), &dtheta[i[3]]));

    let k3 = Tensor::from_fn(m, 3, |i| t.get(i) - 3.0 * c.get(i));

    // 1-ES curvature against the paper's normal, with g^{κκ} = 1.
    let h_mean = -1.0 / fam.r_dagger;
    let h = &g * h_mean;
    let mut k2m = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut v = 0.0;
            for cc in 0..m {
                for dd in 0..m {
                    for e in 0..m {
                        for f in 0..m {
                            v += c.get(&[cc, dd, a]) * c.get(&[e, f, dd]) * gi[(cc, e)] * gi[(dd, f)];
                        }
                    }
                    v += 2.0 * h[(a, cc)] * h[(b, dd)] * gi[(cc, dd)];
                }
            }
            k2m[(a, b)] = v;
        }
    }

    let k4 = Tensor::from_fn(m, 4, |i| {
        let (a, b, cc, dd) = (i[0], i[1], i[2], i[3]);
        let mut v = s.get(i) - 4.0 * d.get(i);
        for e in 0..m {
            for f in 0..m {
                v += 12.0
                    * (c.get(&[e, a, b]) + c.get(&[a, b, e]) - t.get(&[a, b, e]))
                    * c.get(&[f, cc, dd])
                    * gi[(e, f)];
            }
        }
        v
    });

    let kk = Tensor::from_fn(m, 6, |i| k3.get(&i[..3]) * k3.get(&i[3..]));

    // Angles of the (k₁, k₂)-test; the umbilic part vanishes for these models.
    let umbilic = &h - &g * h_mean;
    let q = &umbilic * k1 + &g * (k2 * h_mean);
    let mut q_q2h = 0.0;
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                for dd in 0..m {
                    q_q2h += q[(a, b)] * (q[(cc, dd)] - 2.0 * h[(cc, dd)]) * gi[(a, cc)] * gi[(b, dd)];
                }
            }
        }
    }
    let qqh = Tensor::from_fn(m, 4, |i| q[(i[0], i[1])] * (q[(i[2], i[3])] - h[(i[2], i[3])]));

    let bias_vector = (0..m)
        .map(|a| {
            let mut v = 0.0;
            for b in 0..m {
                for cc in 0..m {
                    for dd in 0..m {
                        v += gi[(a, dd)] * c.get(&[b, cc, dd]) * gi[(b, cc)];
                    }
                }
            }
            v
        })
        .collect();

    let contractions = LevelContractions {
        k_ab_g: (&k2m * &gi).trace(),
        k_abcd_3g: pairing_contraction(&k4, &gi),
        kk_15g: pairing_contraction(&kk, &gi),
        ha2: 0.0,
        q_q2h,
        q_qh_sym: pairing_contraction(&qqh, &gi),
    };
    Ok(AppendixTensors {
        t,
        c,
        s,
        d,
        k3,
        k2: k2m,
        k4,
        bias_vector,
        contractions,
    })
}
