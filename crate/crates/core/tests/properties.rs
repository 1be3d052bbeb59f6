use std::f64::consts::PI;

use proptest::prelude::*;

use curvedseq::geometry::{embed, es_curvature_from_embedding, CurvedFamily, Model, UCoord};
use curvedseq::harness::{alternatives, ExperimentConfig, ExperimentKind};
use curvedseq::inference::{
    coordinates_of, mle, nonseq_statistic, observed_mean_curvature, SuffStats, TestDesign, TestVariant,
};
use curvedseq::numeric::RngStream;
use curvedseq::power::{coefficients, PowerContext};
use curvedseq::sampling::Sampler;

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::Vmf), Just(Model::Hyperboloid)]
}

/// A regular interior point of dimension 2.
fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.15..PI - 0.15, 0.15..PI - 0.15, any::<bool>()).prop_map(|(a, b, flip)| (a, if flip { b + PI } else { b }))
}

fn data(fam: &CurvedFamily, u: &UCoord, n: usize, seed: u64) -> SuffStats {
    let s = Sampler::new(fam, u).unwrap();
    let mut st = RngStream::new(seed, 0);
    let mut stats = SuffStats::new(3);
    for _ in 0..n {
        stats.push(&s.draw(&mut st).x);
    }
    stats
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinates_invert_direction(model in model(), (a, b) in point(), m in 2usize..6) {
        let fam = CurvedFamily::new(model, m, 1.0).unwrap();
        let mut u = vec![a; m];
        u[m - 1] = b;
        let xi = fam.direction(&UCoord::new(u.clone())).unwrap();
        let back = coordinates_of(model, &xi);
        for (x, y) in back.iter().zip(&u) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn umbilic_everywhere(model in model(), (a, b) in point(), r in 0.05f64..8.0) {
        let fam = CurvedFamily::new(model, 2, r).unwrap();
        let (_, h, k) = es_curvature_from_embedding(&fam, &UCoord::new(vec![a, b])).unwrap();
        prop_assert!(k.amax() < 1e-8 * (1.0 + 1.0 / fam.r_dagger));
        prop_assert!((h + 1.0 / fam.r_dagger).abs() < 1e-8 * (1.0 + 1.0 / fam.r_dagger));
    }

    #[test]
    fn statistics_vanish_at_null(model in model(), (a, b) in point(), n in 1usize..500) {
        let fam = CurvedFamily::new(model, 2, 1.5).unwrap();
        let u0 = UCoord::new(vec![a, b]);
        let (_, eta) = embed(&fam, &u0).unwrap();
        let stats = SuffStats::from_sum(eta.v.iter().map(|e| e * n as f64).collect(), n).unwrap();
        let designs = [TestVariant::Mlt, TestVariant::Wald, TestVariant::Lrt, TestVariant::Est]
            .map(|v| TestDesign::new(v, 0.05, u0.clone()).unwrap());
        for d in designs.into_iter().chain([TestDesign::designed(0.5, 1.0, 0.05, u0.clone()).unwrap()]) {
            let v = d.variant;
            let o = nonseq_statistic(&fam, &d, &stats).unwrap();
            prop_assert!(o.statistic.abs() < 1e-9 && !o.reject, "{v:?}: {}", o.statistic);
        }
    }

    #[test]
    fn lrt_nonnegative_and_designed_zero_is_wald(model in model(), (a, b) in point(), seed in 0u64..1000) {
        let fam = CurvedFamily::new(model, 2, 2.0).unwrap();
        let u0 = UCoord::new(vec![a, b]);
        let stats = data(&fam, &u0, 40, seed);
        let lrt = nonseq_statistic(&fam, &TestDesign::new(TestVariant::Lrt, 0.05, u0.clone()).unwrap(), &stats).unwrap();
        prop_assert!(lrt.statistic >= 0.0);
        let wald = nonseq_statistic(&fam, &TestDesign::new(TestVariant::Wald, 0.05, u0.clone()).unwrap(), &stats).unwrap();
        let d00 = nonseq_statistic(&fam, &TestDesign::designed(0.0, 0.0, 0.05, u0).unwrap(), &stats).unwrap();
        prop_assert_eq!(wald.statistic, d00.statistic);
    }

    #[test]
    fn curvature_statistic_is_additive(model in model(), (a, b) in point(), seed in 0u64..1000) {
        let fam = CurvedFamily::new(model, 2, 0.7).unwrap();
        let u = UCoord::new(vec![a, b]);
        let x = data(&fam, &u, 10, seed);
        let y = data(&fam, &u, 7, seed + 1);
        let mut xy = x.clone();
        xy.merge(&y);
        let u_hat = mle(&fam, &xy).unwrap();
        let whole = observed_mean_curvature(&fam, &xy, &u_hat).unwrap();
        let parts = observed_mean_curvature(&fam, &x, &u_hat).unwrap() + observed_mean_curvature(&fam, &y, &u_hat).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9 * whole.abs().max(1.0));
    }

    #[test]
    fn alternatives_have_unit_fisher_distance(model in model(), s in 0.0f64..5.0, h1 in 1usize..32) {
        let r = if model == Model::Vmf { 0.2 } else { 2.0 };
        let fam = CurvedFamily::new(model, 2, r).unwrap();
        let u0 = UCoord::new(vec![1.0, PI / 2.0]);
        let g = fam.metric_diagonal(&u0).unwrap();
        // Large enough that no alternative crosses a pole.
        let scale = 1e5;
        for u in alternatives(&fam, &u0, s, h1, scale).unwrap() {
            let d = [u[0] - u0[0], u[1] - u0[1]];
            let dist = (scale * (g[0] * d[0] * d[0] + g[1] * d[1] * d[1])).sqrt();
            prop_assert!((dist - s).abs() < 1e-9);
        }
    }

    #[test]
    fn loss_curves_nonnegative(m in 2u32..6, s in 0.05f64..5.0, k1 in -1.0f64..2.0, k2 in -1.0f64..2.0) {
        let c = coefficients(&PowerContext::new(m, 0.05).unwrap(), s).unwrap();
        let (d1, d2) = c.delta_p(k1, k2);
        prop_assert!(d1 >= -1e-12 && d2 >= -1e-12);
    }

    #[test]
    fn streams_reproduce(seed in any::<u64>(), index in any::<u64>()) {
        let mut a = RngStream::new(seed, index);
        let mut b = RngStream::new(seed, index);
        for _ in 0..16 {
            let x = a.uniform();
            prop_assert!(x > 0.0 && x < 1.0);
            prop_assert_eq!(x.to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), h1 in 1usize..10_000, reps in 1usize..50, smax in 0.1f64..10.0) {
        let mut c = ExperimentConfig::paper(ExperimentKind::SeqSim, Model::Hyperboloid);
        c.seed = seed;
        c.h1 = h1;
        c.reps = reps;
        c.s_grid = curvedseq::harness::linear_grid(smax, 7);
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }
}
