//! Tensorial Hermite polynomials and the analytic level corrections.

use super::coefficients::PowerContext;

/// Radial Hermite polynomials at the critical radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitePolyValues {
    pub h1: f64,
    pub h3: f64,
    pub h5: f64,
}

/// `h₁ = c₀`, `h₃ = c₀³ − (m+2)c₀`, `h₅ = c₀⁵ − 2(m+4)c₀³ + (m+2)(m+4)c₀`.
pub fn hermite_values(ctx: &PowerContext) -> HermitePolyValues {
    radial_hermite(ctx.m, ctx.c0)
}

pub fn radial_hermite(m: u32, c0: f64) -> HermitePolyValues {
    let m = m as f64;
    let c3 = c0 * c0 * c0;
    HermitePolyValues {
        h1: c0,
        h3: c3 - (m + 2.0) * c0,
        h5: c3 * c0 * c0 - 2.0 * (m + 4.0) * c3 + (m + 2.0) * (m + 4.0) * c0,
    }
}

/// Tensor contractions feeding the level corrections.
///
/// Field names follow the contraction they hold:
/// `k_ab_g = K_{ab}g^{ab}`, `k_abcd_3g = K_{abcd}3g^{(ab}g^{cd)}`,
/// `kk_15g = K_{abc}K_{def}15g^{(ab}g^{cd}g^{ef)}`,
/// `ha2 = H_A^{(−1)2}`, `q_q2h = Q_{abκ}(Q_{cdλ} − 2H_{cdλ})g^{ac}g^{bd}g^{κλ}`,
/// `q_qh_sym = Q_{abκ}(Q_{cdλ} − H_{cdλ})g^{(ab}g^{cd)}g^{κλ}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelContractions {
    pub k_ab_g: f64,
    pub k_abcd_3g: f64,
    pub kk_15g: f64,
    pub ha2: f64,
    pub q_q2h: f64,
    pub q_qh_sym: f64,
}

/// `(Nε₀, Nε₁)`: critical-radius shifts restoring the level to third order.
pub fn level_correction(ctx: &PowerContext, t: &LevelContractions) -> (f64, f64) {
    let m = ctx.m as f64;
    let h = hermite_values(ctx);
    let eps0 = t.k_ab_g * h.h1 / (4.0 * m)
        + t.k_abcd_3g * h.h3 / (24.0 * m * (m + 2.0))
        + t.kk_15g * h.h5 / (72.0 * m * (m + 2.0) * (m + 4.0));
    let eps1 = (t.ha2 / (4.0 * m) + t.q_q2h / (2.0 * m)) * h.h1 + t.q_qh_sym / (2.0 * m * (m + 2.0)) * h.h3;
    (eps0, eps1)
}

/// Tensorial Hermite polynomial `h^{i₁…i_k}(u)` with respect to the inverse
/// metric `g_inv` (row-major, `m × m`).
///
/// Expands as the signed sum over partial pairings of the index list: each
/// pair contributes `−g^{ij}`, each unpaired index a factor `u^i`. Orders
/// 2, 3, 4 and 6 reproduce the 1/3/6+3/15+45+15 term structures.
pub fn tensor_hermite(indices: &[usize], u: &[f64], g_inv: &[f64]) -> f64 {
    let m = u.len();
    fn go(rest: &[usize], u: &[f64], g_inv: &[f64], m: usize) -> f64 {
        match rest.split_first() {
            None => 1.0,
            Some((&first, tail)) => {
                // `first` stays unpaired ...
                let mut total = u[first] * go(tail, u, g_inv, m);
                // ... or pairs with a later index.
                for (j, &other) in tail.iter().enumerate() {
                    let mut remaining = Vec::with_capacity(tail.len() - 1);
                    remaining.extend_from_slice(&tail[..j]);
                    remaining.extend_from_slice(&tail[j + 1..]);
                    total -= g_inv[first * m + other] * go(&remaining, u, g_inv, m);
                }
                total
            }
        }
    }
    go(indices, u, g_inv, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate, z_kernel, QuadratureSpec, RadialKernelArgs};

    #[test]
    fn radial_values() {
        let h = radial_hermite(2, 1.0);
        assert_eq!(h.h1, 1.0);
        assert_eq!(h.h3, -3.0);
        let ctx = PowerContext::new(2, 0.05).unwrap();
        let h = hermite_values(&ctx);
        assert_eq!(h.h1, ctx.c0);
        let c: f64 = 5.991_464_547_107_979f64.sqrt();
        let want = c.powi(5) - 12.0 * c.powi(3) + 24.0 * c;
        assert!((h.h5 - want).abs() < 1e-9);
    }

    #[test]
    fn level_correction_cases() {
        let ctx = PowerContext::new(2, 0.05).unwrap();
        assert_eq!(level_correction(&ctx, &LevelContractions::default()), (0.0, 0.0));
        let only_ha = LevelContractions { ha2: 0.7, ..Default::default() };
        let (e0, e1) = level_correction(&ctx, &only_ha);
        assert_eq!(e0, 0.0);
        assert!((e1 - 0.7 * ctx.c0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn hermite_term_structure() {
        let u = [0.3, -1.2];
        let gi = [2.0, 0.5, 0.5, 1.0];
        // h^{ab} = u^a u^b − g^{ab}
        assert!((tensor_hermite(&[0, 1], &u, &gi) - (0.3 * -1.2 - 0.5)).abs() < 1e-15);
        // h^{abc} = u^a u^b u^c − 3 g^{(ab} u^{c)}
        let h = tensor_hermite(&[0, 0, 1], &u, &gi);
        let want = 0.3 * 0.3 * -1.2 - (2.0 * -1.2 + 0.5 * 0.3 + 0.5 * 0.3);
        assert!((h - want).abs() < 1e-14);
        // Univariate, unit metric: probabilists' Hermite He_4 and He_6.
        let x = 1.3f64;
        let one = [1.0];
        let he4 = x.powi(4) - 6.0 * x * x + 3.0;
        assert!((tensor_hermite(&[0; 4], &[x], &one) - he4).abs() < 1e-12);
        let he6 = x.powi(6) - 15.0 * x.powi(4) + 45.0 * x * x - 15.0;
        assert!((tensor_hermite(&[0; 6], &[x], &one) - he6).abs() < 1e-12);
    }

    #[test]
    fn ball_integral_of_second_hermite() {
        // ∫_{|u|≤c₀} h^{ab} φ du = −(1/m) g^{ab} c₀ Z_m^{(0)}(0, c₀) for the
        // standard normal; evaluated by radial quadrature of (ρ² − m)/m.
        for m in 2..=5u32 {
            let ctx = PowerContext::new(m, 0.05).unwrap();
            let mf = m as f64;
            let quad = integrate(
                |rho| (rho * rho - mf) / mf * z_kernel(RadialKernelArgs { m, l: 0, s: 0.0, r: rho }).unwrap(),
                0.0,
                ctx.c0,
                &QuadratureSpec::coefficients(),
            )
            .unwrap()
            .value;
            let boundary = z_kernel(RadialKernelArgs { m, l: 0, s: 0.0, r: ctx.c0 }).unwrap();
            let closed = -ctx.c0 * boundary / mf;
            assert!((quad - closed).abs() < 1e-6, "m {m}: {quad} vs {closed}");
        }
    }

    #[test]
    fn ball_integral_cartesian_m2() {
        // Direct 2-d quadrature of h^{11}φ = (x² − 1)φ and h^{12}φ = xyφ over the disc.
        let ctx = PowerContext::new(2, 0.05).unwrap();
        let c = ctx.c0;
        let spec = QuadratureSpec::new(1e-13, 1e-11, 400).unwrap();
        let phi = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI);
        let diag = integrate(
            |x| {
                let w = (c * c - x * x).max(0.0).sqrt();
                integrate(|y| (x * x - 1.0) * phi(x, y), -w, w, &spec).unwrap().value
            },
            -c,
            c,
            &spec,
        )
        .unwrap()
        .value;
        let off = integrate(
            |x| {
                let w = (c * c - x * x).max(0.0).sqrt();
                integrate(|y| x * y * phi(x, y), -w, w, &spec).unwrap().value
            },
            -c,
            c,
            &spec,
        )
        .unwrap()
        .value;
        let boundary = z_kernel(RadialKernelArgs { m: 2, l: 0, s: 0.0, r: c }).unwrap();
        assert!((diag + c * boundary / 2.0).abs() < 1e-6, "{diag}");
        assert!(off.abs() < 1e-9);
    }
}
