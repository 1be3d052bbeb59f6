//! Alternatives at a fixed Fisher distance from the null point.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{CurvedFamily, UCoord};
use crate::inference::coordinates_of;

/// Unit tangent directions `e_j` at `u0` with `g_ab(u0) e^a e^b = 1`,
/// equally spaced in angle `2πj/h1` in the orthonormalized plane.
pub fn unit_directions(fam: &CurvedFamily, u0: &UCoord, h1: usize) -> Result<Vec<Vec<f64>>> {
    if fam.m != 2 {
        return Err(Error::Unsupported(format!("alternatives are generated for m = 2 only (got m = {})", fam.m)));
    }
    let g = fam.metric_diagonal(u0)?;
    Ok((0..h1)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / h1 as f64;
            vec![phi.cos() / g[0].sqrt(), phi.sin() / g[1].sqrt()]
        })
        .collect())
}

/// The `h1` alternatives `u0 + s·e_j/√scale`; `scale` is `N` for a fixed
/// sample test and `Kν₀` for the sequential test.
///
/// A point that leaves the coordinate box (e.g. crosses a pole of the
/// sphere) is mapped back through its direction vector, so it names the
/// same distribution in canonical coordinates.
pub fn alternatives(fam: &CurvedFamily, u0: &UCoord, s: f64, h1: usize, scale: f64) -> Result<Vec<UCoord>> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("distance must be nonnegative, got {s}")));
    }
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    let step = s / scale.sqrt();
    unit_directions(fam, u0, h1)?
        .into_iter()
        .map(|e| {
            let raw = UCoord::new(u0.0.iter().zip(&e).map(|(a, d)| a + step * d).collect());
            let u = if fam.check_range(&raw).is_ok() {
                raw
            } else {
                UCoord::new(coordinates_of(fam.model, &fam.direction(&raw)?))
            };
            fam.check_regular(&u).map_err(|e| Error::Domain(format!("alternative at s = {s} is singular: {e}")))?;
            Ok(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_distance_is_null() {
        let fam = CurvedFamily::vmf(2, 0.2).unwrap();
        let u0 = UCoord::new(vec![FRAC_PI_2, FRAC_PI_2]);
        for u in alternatives(&fam, &u0, 0.0, 7, 1000.0).unwrap() {
            assert_eq!(u, u0);
        }
    }

    #[test]
    fn directions_are_unit_and_antipodal() {
        let fam = CurvedFamily::hyperboloid(2, 2.0).unwrap();
        let u0 = UCoord::new(vec![1.0, FRAC_PI_2]);
        let g = fam.metric_diagonal(&u0).unwrap();
        let e = unit_directions(&fam, &u0, 10).unwrap();
        for (j, v) in e.iter().enumerate() {
            assert!((g[0] * v[0] * v[0] + g[1] * v[1] * v[1] - 1.0).abs() < 1e-12);
            let w = &e[(j + 5) % 10];
            assert!((v[0] + w[0]).abs() < 1e-12 && (v[1] + w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_scales_with_sample_size() {
        let fam = CurvedFamily::hyperboloid(2, 2.0).unwrap();
        let u0 = UCoord::new(vec![1.0, FRAC_PI_2]);
        let g = fam.metric_diagonal(&u0).unwrap();
        for u in alternatives(&fam, &u0, 3.0, 8, 50.0).unwrap() {
            let d: Vec<f64> = (0..2).map(|a| u[a] - u0[a]).collect();
            let dist = (50.0 * (g[0] * d[0] * d[0] + g[1] * d[1] * d[1])).sqrt();
            assert!((dist - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pole_crossing_keeps_the_direction() {
        let fam = CurvedFamily::vmf(2, 0.1).unwrap();
        let u0 = UCoord::new(vec![FRAC_PI_2, FRAC_PI_2]);
        let alts = alternatives(&fam, &u0, 5.0, 40, 2000.0).unwrap();
        let g = fam.metric_diagonal(&u0).unwrap();
        let e = unit_directions(&fam, &u0, 40).unwrap();
        let step = 5.0 / 2000f64.sqrt();
        for (u, d) in alts.iter().zip(&e) {
            fam.check_range(u).unwrap();
            let raw = UCoord::new(vec![u0[0] + step * d[0], u0[1] + step * d[1]]);
            let a = fam.direction(u).unwrap();
            let b = fam.direction(&raw).unwrap();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-12);
            }
        }
        assert!(step / g[0].sqrt() > FRAC_PI_2);
    }
}
