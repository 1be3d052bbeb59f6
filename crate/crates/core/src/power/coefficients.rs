//! First-order envelope power and the third-order power-loss coefficients
//! of `k = (k₁, k₂)`-tests.

use crate::error::{Error, Result};
use crate::numeric::{chi2_quantile, integrate, radial_mass, z_kernel, QuadratureSpec, RadialKernelArgs};

/// Distance at which the `s → 0⁺` limits of the optimal proportions are taken.
pub const LIMIT_S: f64 = 1e-4;

/// Dimension, level, and the matching critical radius `c₀ = sqrt(χ²_{m,α})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerContext {
    pub m: u32,
    pub alpha: f64,
    pub c0: f64,
}

impl PowerContext {
    pub fn new(m: u32, alpha: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {m}")));
        }
        let c0 = chi2_quantile(m, alpha)?.sqrt();
        Ok(Self { m, alpha, c0 })
    }

    fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: 1e-300,
            rel_tol: 1e-11,
            max_subdivisions: 400,
        }
    }
}

/// Scalar curvatures entering the third-order loss.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureScalars {
    /// Squared anisotropy of the exponential curvature.
    pub kappa2: f64,
    /// Squared mean exponential curvature.
    pub gamma2: f64,
    /// Squared mixture curvature of the ancillary family.
    pub ha2: f64,
}

impl CurvatureScalars {
    pub fn new(kappa2: f64, gamma2: f64, ha2: f64) -> Result<Self> {
        if !(kappa2 >= 0.0 && gamma2 >= 0.0 && ha2 >= 0.0) {
            return Err(Error::Domain(format!(
                "curvature scalars must be nonnegative: ({kappa2}, {gamma2}, {ha2})"
            )));
        }
        Ok(Self { kappa2, gamma2, ha2 })
    }
}

/// The coefficient bundle at one distance `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCoefficients {
    pub m: u32,
    pub s: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub xi2prime: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi4: f64,
    pub j1: f64,
    pub j2: f64,
    pub k1: f64,
    pub k2: f64,
    /// `true` when `j*`/`k*` are `s → 0⁺` limits evaluated at [`LIMIT_S`].
    pub limit: bool,
}

impl PowerCoefficients {
    /// `(ΔP₁, ΔP₂) = (ξ₁(k₁ − K₁)², ξ₂(k₂ − K₂)²)`.
    pub fn delta_p(&self, k1: f64, k2: f64) -> (f64, f64) {
        let d1 = k1 - self.k1;
        let d2 = k2 - self.k2;
        (self.xi1 * d1 * d1, self.xi2 * d2 * d2)
    }

    /// `κ² ΔP₁ + γ² ΔP₂ + H_A² ξ₀`. Pass `gamma2 = 0` for a sequential test
    /// run with the curvature-based stopping rule.
    pub fn third_order_loss(&self, k1: f64, k2: f64, scalars: &CurvatureScalars) -> f64 {
        let (dp1, dp2) = self.delta_p(k1, k2);
        scalars.kappa2 * dp1 + scalars.gamma2 * dp2 + scalars.ha2 * self.xi0
    }
}

/// `P₁*(s) = 1 − ∫_0^{c₀} Z_m^{(0)}(s, r) dr`.
pub fn envelope_power_first(ctx: &PowerContext, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("distance must be nonnegative, got {s}")));
    }
    let mass = radial_mass(ctx.m, s, ctx.c0, &ctx.quad())?;
    Ok((1.0 - mass).clamp(0.0, 1.0))
}

struct Kernels {
    z: [f64; 4],
}

fn kernels(m: u32, s: f64, r: f64) -> Result<Kernels> {
    let mut z = [0.0; 4];
    for (l, slot) in z.iter_mut().enumerate() {
        *slot = z_kernel(RadialKernelArgs { m, l: l as u32, s, r })?;
    }
    Ok(Kernels { z })
}

fn integrate_over_ball<F>(ctx: &PowerContext, s: f64, f: F) -> Result<f64>
where
    F: Fn(f64, &Kernels) -> f64,
{
    let mut failure = None;
    let q = integrate(
        |r| match kernels(ctx.m, s, r) {
            Ok(k) => f(r, &k),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        ctx.c0,
        &ctx.quad(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q?.value)
}

struct XiValues {
    xi0: f64,
    xi1: f64,
    xi2prime: f64,
    xi3: f64,
    xi4: f64,
}

fn xi_values(ctx: &PowerContext, s: f64) -> Result<XiValues> {
    let m = ctx.m as f64;
    let c0 = ctx.c0;
    let c2 = c0 * c0;
    let (s2, s3) = (s * s, s * s * s);
    let at_c0 = kernels(ctx.m, s, c0)?.z;
    let norm = 1.0 / (2.0 * m * (m + 2.0));

    let f0 = integrate_over_ball(ctx, s, |r, k| -s * r * k.z[1] + s2 * k.z[0])?;
    let f1 = integrate_over_ball(ctx, s, |r, k| {
        -m * s * r * k.z[1] + s2 * ((m + 2.0) * k.z[0] - 2.0 * m * k.z[2]) + 2.0 * s3 * r * (k.z[1] - k.z[3])
    })?;
    let f2 = integrate_over_ball(ctx, s, |r, k| {
        s * r * k.z[1] - s2 * (2.0 * k.z[0] - m * k.z[2]) - s3 * r * (k.z[1] - k.z[3])
    })?;
    let f3 = integrate_over_ball(ctx, s, |r, k| -2.0 * m * s * r * k.z[1] + 2.0 * m * s2 * k.z[0])?;
    let f4 = integrate_over_ball(ctx, s, |r, k| 2.0 * s * r * k.z[1] - 2.0 * s2 * k.z[0])?;

    Ok(XiValues {
        xi0: f0 / (4.0 * m),
        xi1: norm * (2.0 * c2 * s * at_c0[1] - 2.0 * c0 * s2 * (at_c0[0] - at_c0[2]) + f1),
        xi2prime: norm * (c2 * s * at_c0[1] + c0 * s2 * (at_c0[0] - at_c0[2]) + f2),
        xi3: norm * (4.0 * c2 * s * at_c0[1] - 2.0 * c0 * s2 * at_c0[0] + f3),
        xi4: norm * (2.0 * c2 * s * at_c0[1] - c0 * s2 * at_c0[0] + f4),
    })
}

fn ratios(m: u32, x: &XiValues) -> (f64, f64, f64, f64) {
    let xi2 = x.xi1 + m as f64 * x.xi2prime;
    let j1 = x.xi3 / (2.0 * x.xi1);
    let j2 = x.xi4 / (2.0 * x.xi2prime);
    let k1 = j1;
    let k2 = j2 + x.xi1 * (j1 - j2) / xi2;
    (j1, j2, k1, k2)
}

/// Evaluates every power-loss coefficient at distance `s`.
pub fn coefficients(ctx: &PowerContext, s: f64) -> Result<PowerCoefficients> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("distance must be finite and nonnegative, got {s}")));
    }
    if s == 0.0 {
        let near = xi_values(ctx, LIMIT_S)?;
        let (j1, j2, k1, k2) = ratios(ctx.m, &near);
        return Ok(PowerCoefficients {
            m: ctx.m,
            s,
            xi0: 0.0,
            xi1: 0.0,
            xi2prime: 0.0,
            xi2: 0.0,
            xi3: 0.0,
            xi4: 0.0,
            j1,
            j2,
            k1,
            k2,
            limit: true,
        });
    }
    let x = xi_values(ctx, s)?;
    let (j1, j2, k1, k2) = ratios(ctx.m, &x);
    Ok(PowerCoefficients {
        m: ctx.m,
        s,
        xi0: x.xi0,
        xi1: x.xi1,
        xi2prime: x.xi2prime,
        xi2: x.xi1 + ctx.m as f64 * x.xi2prime,
        xi3: x.xi3,
        xi4: x.xi4,
        j1,
        j2,
        k1,
        k2,
        limit: false,
    })
}

/// `(ΔP₁(s), ΔP₂(s))` for proportions `(k₁, k₂)`.
pub fn delta_p(ctx: &PowerContext, s: f64, k1: f64, k2: f64) -> Result<(f64, f64)> {
    Ok(coefficients(ctx, s)?.delta_p(k1, k2))
}

/// Third-order power loss of a `k`-test with the given curvature scalars.
pub fn third_order_loss(ctx: &PowerContext, s: f64, k1: f64, k2: f64, scalars: &CurvatureScalars) -> Result<f64> {
    Ok(coefficients(ctx, s)?.third_order_loss(k1, k2, scalars))
}
