//! Goodness-of-fit helpers for the samplers.

use crate::geometry::{CurvedFamily, Model};

/// Colatitude statistic of `x` relative to mean direction `xi`:
/// `ξ·x` on the sphere, `ξ*x` on the hyperboloid.
pub fn colatitude(fam: &CurvedFamily, xi: &[f64], x: &[f64]) -> f64 {
    fam.form(xi, x)
}

/// Analytic CDF of the colatitude statistic.
pub fn colatitude_cdf(fam: &CurvedFamily, c: f64) -> f64 {
    let r = fam.r;
    match fam.model {
        // (e^{rt} − e^{−r}) / (e^{r} − e^{−r}), computed without overflow.
        Model::Vmf => {
            if c <= -1.0 {
                0.0
            } else if c >= 1.0 {
                1.0
            } else {
                (r * (c - 1.0)).exp() * (-(r * (1.0 + c))).exp_m1() / (-2.0 * r).exp_m1()
            }
        }
        Model::Hyperboloid => {
            if c <= 1.0 {
                0.0
            } else {
                -(-(r * (c - 1.0))).exp_m1()
            }
        }
    }
}

/// Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic p-value of the KS statistic `d` at sample size `n`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UCoord;
    use crate::numeric::RngStream;
    use crate::sampling::sample_many;

    #[test]
    fn vmf_cdf_limits() {
        let f = CurvedFamily::vmf(2, 3.0).unwrap();
        assert_eq!(colatitude_cdf(&f, -1.0), 0.0);
        assert_eq!(colatitude_cdf(&f, 1.0), 1.0);
        let c: f64 = 0.3;
        let want = ((3.0 * c).exp() - (-3.0f64).exp()) / (3.0f64.exp() - (-3.0f64).exp());
        assert!((colatitude_cdf(&f, c) - want).abs() < 1e-14);
    }

    #[test]
    fn ks_detects_mismatch() {
        let mut good: Vec<f64> = {
            let mut s = RngStream::new(1, 1);
            (0..20_000).map(|_| s.uniform()).collect()
        };
        let d = ks_statistic(&mut good, |x| x.clamp(0.0, 1.0));
        assert!(ks_pvalue(d, 20_000) > 1e-3);
        let mut bad: Vec<f64> = good.iter().map(|x| x * x).collect();
        let d = ks_statistic(&mut bad, |x| x.clamp(0.0, 1.0));
        assert!(ks_pvalue(d, 20_000) < 1e-6);
    }

    #[test]
    fn colatitude_fits() {
        for fam in [CurvedFamily::vmf(2, 0.2).unwrap(), CurvedFamily::hyperboloid(2, 2.0).unwrap()] {
            let u = UCoord::new(vec![0.8, 3.0]);
            let xi = fam.direction(&u).unwrap();
            let n = 100_000;
            let xs = sample_many(&fam, &u, n, &mut RngStream::new(21, 0)).unwrap();
            let mut cs: Vec<f64> = xs.chunks_exact(3).map(|x| colatitude(&fam, &xi, x)).collect();
            let d = ks_statistic(&mut cs, |c| colatitude_cdf(&fam, c));
            assert!(ks_pvalue(d, n) > 1e-3, "{:?}: D = {d}", fam.model);
        }
    }
}
