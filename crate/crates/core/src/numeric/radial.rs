//! Angular kernels `A_m^{(l)}(s, r)` and radial densities `Z_m^{(l)}(s, r)`
//! of a unit-covariance normal vector at distance `s` from the origin.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::quad::{integrate, QuadratureSpec};
use crate::error::{Error, Result};

/// Arguments of the radial kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernelArgs {
    /// Dimension, at least 2.
    pub m: u32,
    /// Power of `cos φ`, 0..=3.
    pub l: u32,
    /// Noncentrality distance.
    pub s: f64,
    /// Radial coordinate.
    pub r: f64,
}

impl RadialKernelArgs {
    pub fn new(m: u32, l: u32, s: f64, r: f64) -> Result<Self> {
        let args = Self { m, l, s, r };
        args.validate()?;
        Ok(args)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Domain(format!("kernel dimension must be >= 2, got {}", self.m)));
        }
        if self.l > 3 {
            return Err(Error::Domain(format!("kernel moment order must be <= 3, got {}", self.l)));
        }
        if !(self.s >= 0.0 && self.r >= 0.0) || !self.s.is_finite() || !self.r.is_finite() {
            return Err(Error::Domain(format!(
                "kernel distances must be finite and nonnegative (s = {}, r = {})",
                self.s, self.r
            )));
        }
        Ok(())
    }
}

/// Area of the unit `k`-sphere in R^{k+1}; `S_0 = 2`.
pub fn sphere_area(k: u32) -> f64 {
    let h = 0.5 * (k as f64 + 1.0);
    2.0 * PI.powf(h) / gamma(h)
}

fn inner_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_subdivisions: 200,
    }
}

/// `e^{-sr} A_m^{(l)}(s, r)`.
pub(crate) fn a_kernel_scaled(args: &RadialKernelArgs) -> Result<f64> {
    let sr = args.s * args.r;
    let p = args.m as i32 - 2;
    let l = args.l as i32;
    if sr == 0.0 {
        return integrate(|phi| phi.sin().powi(p) * phi.cos().powi(l), 0.0, PI, &inner_spec())
            .map(|q| q.value);
    }
    integrate(
        |phi| {
            let c = phi.cos();
            phi.sin().powi(p) * c.powi(l) * (sr * (c - 1.0)).exp()
        },
        0.0,
        PI,
        &inner_spec(),
    )
    .map(|q| q.value)
}

/// `A_m^{(l)}(s, r) = ∫_0^π sin^{m-2}φ cos^l φ exp(sr cos φ) dφ`.
pub fn a_kernel(args: RadialKernelArgs) -> Result<f64> {
    args.validate()?;
    Ok(a_kernel_scaled(&args)? * (args.s * args.r).exp())
}

/// `Z_m^{(l)}(s, r) = (2π)^{-m/2} r^{m-1} S_{m-2} exp{-(s²+r²)/2} A_m^{(l)}(s, r)`.
///
/// For `l = 0` this is the density of the length of an `m`-variate
/// standard normal vector with mean at distance `s`.
pub fn z_kernel(args: RadialKernelArgs) -> Result<f64> {
    args.validate()?;
    let m = args.m as f64;
    let pref = (2.0 * PI).powf(-0.5 * m) * sphere_area(args.m - 2);
    let d = args.s - args.r;
    let radial = if args.m == 1 { 1.0 } else { args.r.powi(args.m as i32 - 1) };
    Ok(pref * radial * (-0.5 * d * d).exp() * a_kernel_scaled(&args)?)
}

/// Radius beyond which `Z_m^{(0)}(s, ·)` stays below `1e-16` of its peak.
pub fn radial_upper_limit(m: u32, s: f64) -> Result<f64> {
    let z = |r: f64| z_kernel(RadialKernelArgs::new(m, 0, s, r)?);
    let mut hi = s + (m as f64).sqrt() + 1.0;
    let mut peak = 0.0f64;
    let mut r = 0.0;
    while r <= hi {
        peak = peak.max(z(r)?);
        r += 0.125;
    }
    while z(hi)? > 1e-16 * peak {
        hi += 0.5;
    }
    Ok(hi)
}

/// `∫_0^c Z_m^{(0)}(s, r) dr`: the noncentral χ²_m(s²) CDF at `c²`.
pub fn radial_mass(m: u32, s: f64, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    RadialKernelArgs::new(m, 0, s, c)?;
    let mut err = None;
    let q = integrate(
        |r| match z_kernel(RadialKernelArgs { m, l: 0, s, r }) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        c,
        spec,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(q?.value)
}
