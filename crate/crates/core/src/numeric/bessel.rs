//! Modified Bessel functions I_ν and K_ν for the integer and half-integer
//! orders that arise from the sphere and hyperboloid normalizers.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::quad::{integrate, QuadratureSpec};
use crate::error::{Error, Result};

/// Largest supported order. Dimensions up to m = 8 need orders up to 4.5,
/// plus one more for the Wronskian identity.
pub const MAX_ORDER: f64 = 6.0;

const SERIES_CROSSOVER: f64 = 20.0;

fn check_args(order: f64, x: f64) -> Result<bool> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive and finite, got {x}")));
    }
    let twice = 2.0 * order;
    if !(0.0..=2.0 * MAX_ORDER).contains(&twice) || twice.fract() != 0.0 {
        return Err(Error::Unsupported(format!(
            "Bessel order {order}: only integer and half-integer orders in [0, {MAX_ORDER}] are supported"
        )));
    }
    Ok((twice as u32) % 2 == 1)
}

/// `e^{-x} I_ν(x)` by the ascending power series.
fn i_series_scaled(order: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(order) / gamma(order + 1.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum * (-x).exp()
}

/// `e^{-x} I_ν(x)` by the Hankel asymptotic expansion; accurate for x > 20.
fn i_asymptotic_scaled(order: f64, x: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// `e^{-x} I_ν(x)` for half-integer ν from the elementary closed forms,
/// stepping up with the three-term recurrence (stable for ν < x).
fn i_half_closed_scaled(order: f64, x: f64) -> f64 {
    let pref = (2.0 / (PI * x)).sqrt();
    let e2 = (-2.0 * x).exp();
    // e^{-x} I_{-1/2} and e^{-x} I_{1/2}
    let mut prev = pref * 0.5 * (1.0 + e2);
    let mut cur = pref * 0.5 * (1.0 - e2);
    let mut nu = 0.5;
    while nu < order - 0.25 {
        let next = prev - (2.0 * nu / x) * cur;
        prev = cur;
        cur = next;
        nu += 1.0;
    }
    cur
}

/// Exponentially scaled `e^{-x} I_ν(x)`.
pub fn bessel_i_scaled(order: f64, x: f64) -> Result<f64> {
    let half = check_args(order, x)?;
    Ok(if x <= SERIES_CROSSOVER {
        i_series_scaled(order, x)
    } else if half {
        i_half_closed_scaled(order, x)
    } else {
        i_asymptotic_scaled(order, x)
    })
}

/// Modified Bessel function of the first kind.
pub fn bessel_i(order: f64, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    Ok(scaled * x.exp())
}

/// `e^{x} K_{n+1/2}(x)`: finite closed form.
fn k_half_closed_scaled(order: f64, x: f64) -> f64 {
    let n = (order - 0.5).round() as u32;
    let mut sum = 0.0;
    let mut coeff = 1.0; // (n+k)! / (k! (n-k)!)
    for k in 0..=n {
        if k > 0 {
            let kf = k as f64;
            coeff *= ((n + k) as f64) * ((n - k + 1) as f64) / kf;
        }
        sum += coeff / (2.0 * x).powi(k as i32);
    }
    (PI / (2.0 * x)).sqrt() * sum
}

/// `e^{x} K_ν(x)` from `∫_0^∞ exp(-x(cosh t - 1)) cosh(νt) dt`.
fn k_integral_scaled(order: f64, x: f64) -> Result<f64> {
    // Truncate where the integrand has fallen below e^{-45}.
    let mut t_max = 1.0f64;
    for _ in 0..50 {
        t_max = (1.0 + (45.0 + order * t_max) / x).acosh();
    }
    let spec = QuadratureSpec::new(1e-300, 1e-14, 400)?;
    let q = integrate(
        |t| (-x * (t.cosh() - 1.0)).exp() * (order * t).cosh(),
        0.0,
        t_max,
        &spec,
    )?;
    Ok(q.value)
}

/// Exponentially scaled `e^{x} K_ν(x)`.
pub fn bessel_k_scaled(order: f64, x: f64) -> Result<f64> {
    if check_args(order, x)? {
        Ok(k_half_closed_scaled(order, x))
    } else {
        k_integral_scaled(order, x)
    }
}

/// Modified Bessel function of the third kind.
pub fn bessel_k(order: f64, x: f64) -> Result<f64> {
    let scaled = bessel_k_scaled(order, x)?;
    Ok(scaled * (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_i_matches_closed_forms() {
        let x: f64 = 1.0;
        let want = (2.0 / PI).sqrt() * x.sinh();
        assert!(rel(bessel_i(0.5, x).unwrap(), want) < 1e-12);
        let x: f64 = 2.0;
        let want = (1.0 / PI).sqrt() * (x.cosh() - x.sinh() / x);
        assert!(rel(bessel_i(1.5, x).unwrap(), want) < 1e-12);
    }

    #[test]
    fn half_integer_i_across_crossover() {
        for &x in &[0.05, 0.7, 5.0, 19.9, 20.1, 35.0] {
            let want = (2.0 / (PI * x)).sqrt() * (x.cosh() - x.sinh() / x);
            assert!(rel(bessel_i(1.5, x).unwrap(), want) < 1e-10, "x = {x}");
            let want_half = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!(rel(bessel_i(0.5, x).unwrap(), want_half) < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn small_argument_leading_term() {
        let x = 1e-8;
        let v = bessel_i(0.5, x).unwrap();
        assert!(rel(v, (2.0 / PI).sqrt() * x.sqrt()) < 1e-12);
    }

    #[test]
    fn integer_i_series_and_asymptotic_agree_at_crossover() {
        for &order in &[0.0, 1.0, 2.0, 3.0] {
            let a = i_series_scaled(order, 20.0);
            let b = i_asymptotic_scaled(order, 20.0);
            assert!(rel(a, b) < 1e-12, "order {order}: {a} vs {b}");
        }
    }

    #[test]
    fn k_closed_forms() {
        let x: f64 = 2.0;
        let k05 = bessel_k(0.5, x).unwrap();
        assert!(rel(k05, (PI / 4.0).sqrt() * (-2.0f64).exp()) < 1e-14);
        let k15 = bessel_k(1.5, x).unwrap();
        assert!(rel(k15, (PI / 4.0).sqrt() * (-2.0f64).exp() * 1.5) < 1e-14);
        for &x in &[0.1, 1.0, 7.5, 40.0] {
            let ratio = bessel_k(1.5, x).unwrap() / bessel_k(0.5, x).unwrap();
            assert!(rel(ratio, 1.0 + 1.0 / x) < 1e-14);
        }
    }

    #[test]
    fn k_integer_reference_values() {
        // Abramowitz & Stegun table 9.8.
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-12);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-12);
        assert!(rel(bessel_k(2.0, 2.0).unwrap(), 0.253_759_754_566_055_8) < 1e-11);
    }

    #[test]
    fn wronskian_identity() {
        for order in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.5] {
            for &x in &[0.05, 0.3, 1.0, 4.0, 12.0, 19.5, 25.0, 60.0] {
                let lhs = bessel_i_scaled(order, x).unwrap() * bessel_k_scaled(order + 1.0, x).unwrap()
                    + bessel_i_scaled(order + 1.0, x).unwrap() * bessel_k_scaled(order, x).unwrap();
                assert!(rel(lhs, 1.0 / x) < 1e-9, "order {order}, x {x}: {lhs}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_i(0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(0.5, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(0.3, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(bessel_k(9.0, 1.0), Err(Error::Unsupported(_))));
    }
}
