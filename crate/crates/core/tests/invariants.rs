use std::f64::consts::E;

use num_complex::Complex64;
use proptest::prelude::*;

use nodal_lab::corpus::ensemble_member;
use nodal_lab::dist::{subcube_histogram, HistogramSpec};
use nodal_lab::geom::{dist, Ball, Cube, Region, Tunnel};
use nodal_lab::growth::{doubling_index, frequency, FrequencyProfile, GrowthSpec, QuadratureSpec};
use nodal_lab::hfun::{
    finite_difference_gradient, kernel_denominator, laplacian_residual, poisson_extend, ComplexPoint, Field,
    HarmonicExpr, Part, Trig,
};
use nodal_lab::multiscale::{layer_partition, stable_interval_search};
use nodal_lab::nodal::{nodal_volume, projection_lower_bound, signed_balls_in_layers, SignedBallSpec};

/// A packaged function together with a bound on its fourth derivatives in
/// the unit ball, used to scale finite-difference tolerances.
fn packaged() -> impl Strategy<Value = (HarmonicExpr, f64)> {
    prop_oneof![
        (1u32..=12, prop::bool::ANY).prop_map(|(d, re)| {
            let part = if re { Part::Re } else { Part::Im };
            (HarmonicExpr::planar_power(d, part), (d as f64).powi(4) + 1.0)
        }),
        (0.5f64..4.0, prop::bool::ANY).prop_map(|(r, s)| {
            let trig = if s { Trig::Sin } else { Trig::Cos };
            (HarmonicExpr::exp_trig(r, trig), r.powi(4) * r.exp() + 1.0)
        }),
        (0u32..=5).prop_flat_map(|l| (Just(l), -(l as i32)..=(l as i32))).prop_map(|(l, m)| {
            (HarmonicExpr::solid_harmonic(l, m), 10.0 * (l as f64).powi(4) + 1.0)
        }),
        (1usize..=3).prop_map(|a| (HarmonicExpr::coordinate(a), 1.0)),
        (1u64..40).prop_map(|s| (ensemble_member(s).unwrap(), 2e4)),
    ]
}

fn point_in_ball(n: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |v| {
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 1.0 {
            v.iter().map(|a| a / r * radius * 0.999).collect()
        } else {
            v.iter().map(|a| a * radius).collect()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_residual_vanishes_quadratically((f, d4) in packaged(), x in point_in_ball(3, 1.0)) {
        let h = 1e-3;
        let r1 = laplacian_residual(&f, &x, h).abs();
        let r2 = laplacian_residual(&f, &x, h / 2.0).abs();
        let noise = 1e-9 * (1.0 + f.value(&x).abs());
        prop_assert!(r1 <= h * h * d4 + noise, "{r1} for {}", f.to_json());
        prop_assert!(r2 <= 0.3 * r1 + 4.0 * noise, "{r2} vs {r1}");
    }

    #[test]
    fn gradient_matches_finite_differences((f, d4) in packaged(), x in point_in_ball(3, 1.0)) {
        let h = 1e-5;
        let g = f.gradient(&x);
        let fd = finite_difference_gradient(&f, &x, h);
        let err = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 10.0 * h * d4.sqrt() + 1e-8 * (1.0 + f.value(&x).abs()), "{err}");
    }

    #[test]
    fn scaling_composes(c in point_in_ball(3, 2.0), r in 0.1f64..2.0, k1 in 0.2f64..5.0, k2 in 0.2f64..5.0) {
        let b = Ball::new(c.clone(), r).unwrap();
        let lhs = b.scale(k1).scale(k2);
        let rhs = b.scale(k1 * k2);
        prop_assert!((lhs.radius - rhs.radius).abs() <= 1e-12 * rhs.radius);
        prop_assert_eq!(&lhs.center, &rhs.center);
        let q = Cube::new(c, r).unwrap();
        let lhs = q.scale(k1).scale(k2);
        let rhs = q.scale(k1 * k2);
        prop_assert!((lhs.half_side - rhs.half_side).abs() <= 1e-12 * rhs.half_side);
    }

    #[test]
    fn subdivision_tiles_the_cube(c in point_in_ball(3, 1.0), h in 0.1f64..1.0, a in 1usize..5, n in 2usize..=3) {
        let q = Cube::new(c[..n].to_vec(), h).unwrap();
        let subs = q.subdivide(a);
        prop_assert_eq!(subs.len(), a.pow(n as u32));
        let vol: f64 = subs.iter().map(|s| s.volume()).sum();
        prop_assert!((vol - q.volume()).abs() <= 1e-12 * q.volume());
        for (i, s) in subs.iter().enumerate() {
            prop_assert!(q.contains(&s.center));
            for t in &subs[i + 1..] {
                let gap = s.center.iter().zip(&t.center).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                prop_assert!(gap >= s.side() * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn tunnel_chain_shares_faces(
        anchor in point_in_ball(3, 1.0),
        dir in point_in_ball(3, 1.0),
        width in 0.01f64..0.3,
        m in 1usize..30,
        k in 1usize..4,
        n in 2usize..=3,
    ) {
        prop_assume!(dir[..n].iter().map(|a| a * a).sum::<f64>() > 1e-2);
        let t = Tunnel::new(anchor[..n].to_vec(), dir[..n].to_vec(), m as f64 * width, width).unwrap();
        let cubes = t.subcubes().unwrap();
        prop_assert_eq!(cubes.len(), m);
        let vol: f64 = cubes.iter().map(|q| q.volume()).sum();
        prop_assert!((vol - t.volume()).abs() <= 1e-12 * t.volume());
        for w in cubes.windows(2) {
            let step: Vec<f64> = w[1].center.iter().zip(&w[0].center).map(|(a, b)| a - b).collect();
            prop_assert!((dist(&w[1].center, &w[0].center) - width).abs() <= 1e-12);
            let along: f64 = step.iter().zip(&t.direction).map(|(a, b)| a * b).sum();
            prop_assert!((along - width).abs() <= 1e-12);
        }
        let pieces = t.split(k);
        prop_assert_eq!(pieces.len(), k.pow(n as u32 - 1));
        let vol: f64 = pieces.iter().map(|p| p.volume()).sum();
        prop_assert!((vol - t.volume()).abs() <= 1e-12 * t.volume());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn poisson_real_slice(d in 1u32..=6, x in point_in_ball(2, 0.2)) {
        let f = HarmonicExpr::planar_power(d, Part::Re);
        let b = Ball::unit(2);
        let v = poisson_extend(&f, &b, &ComplexPoint::real(x.clone()), &QuadratureSpec::default()).unwrap();
        prop_assert!((v.re - f.value(&x)).abs() <= 1e-10, "{v} vs {}", f.value(&x));
        prop_assert!(v.im.abs() <= 1e-10);
    }

    #[test]
    fn kernel_denominator_is_bounded_below(
        x in point_in_ball(3, 0.2),
        y in point_in_ball(3, 0.2),
        zeta in point_in_ball(3, 1.0),
        n in 2usize..=3,
    ) {
        let r = zeta[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assume!(r > 1e-3);
        let zeta: Vec<f64> = zeta[..n].iter().map(|a| a / r).collect();
        let z: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[i], y[i])).collect();
        prop_assert!(kernel_denominator(&z, &zeta).norm() >= 1.0 / 25.0);
    }

    #[test]
    fn frequency_is_monotone(seed in 1u64..200, c in point_in_ball(2, 0.3)) {
        let f = ensemble_member(seed).unwrap();
        let n = f.min_dim().max(2);
        let mut center = c.clone();
        center.resize(n, 0.0);
        let spec = GrowthSpec::default();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=6 {
            let b = frequency(&f, &center, 0.15 * k as f64, &spec).unwrap();
            prop_assert!(b >= prev - 1e-6 * (1.0 + prev.abs()), "β dropped from {prev} to {b}");
            prev = b;
        }
    }

    #[test]
    fn doubling_index_is_scale_invariant(
        seed in 1u64..100,
        t in point_in_ball(2, 1.0),
        lambda in 0.5f64..2.0,
        c in point_in_ball(2, 0.3),
        r in 0.1f64..0.6,
    ) {
        let f = ensemble_member(seed).unwrap();
        let n = f.min_dim().max(2);
        let (mut t, mut c) = (t, c);
        t.resize(n, 0.0);
        c.resize(n, 0.0);
        let g = HarmonicExpr::dilate(f.clone(), t.clone(), lambda);
        let spec = GrowthSpec::default();
        let b = Ball::new(c.clone(), r).unwrap();
        let moved = Ball::new(t.iter().zip(&c).map(|(ti, ci)| ti + ci / lambda).collect(), r / lambda).unwrap();
        let n1 = doubling_index(&f, &b, &spec).unwrap();
        let n2 = doubling_index(&g, &moved, &spec).unwrap();
        prop_assert!((n1 - n2).abs() <= 1e-6 * (1.0 + n1), "{n1} vs {n2}");
    }

    #[test]
    fn vanishing_center_has_positive_index(seed in 1u64..200, r in 0.05f64..1.0) {
        let f = ensemble_member(seed).unwrap();
        let b = Ball::new(vec![0.0; f.min_dim().max(2)], r).unwrap();
        prop_assert!(doubling_index(&f, &b, &GrowthSpec::default()).unwrap() >= 1e-3);
    }

    #[test]
    fn layer_mass_positive_at_high_frequency(b0 in 100.0f64..1e5, p in 0.0f64..12.0, dim in 2usize..=3) {
        let beta = move |t: f64| b0 * (p * (t - 1.1)).exp();
        let part = layer_partition(&beta, dim, 0.05).unwrap();
        prop_assert!(part.holder_mass > 0.0);
        prop_assert!(part.good_width > 0.0);
    }

    #[test]
    fn stable_window_has_bounded_growth(b0 in 3.0f64..500.0, p in 0.0f64..8.0, q in 0.5f64..3.0) {
        let beta = move |t: f64| b0 * (p * (t - 1.1).powf(q)).exp();
        let w = stable_interval_search(&beta).unwrap();
        for k in 0..16 {
            let t = w.t_lo + (w.t_hi - w.t_lo) * k as f64 / 15.0;
            let b = beta(t);
            prop_assert!(b >= w.level * (1.0 - 1e-9) && b <= E * w.level * (1.0 + 1e-6), "β({t}) = {b}, level {}", w.level);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn stable_window_on_mixtures(c in 1e-9f64..1e-5, d in 20u32..40) {
        let f = HarmonicExpr::lin_comb(
            vec![1.0, c],
            vec![HarmonicExpr::planar_power(3, Part::Re), HarmonicExpr::planar_power(d, Part::Re)],
        );
        let profile = FrequencyProfile::new(&f, vec![0.0, 0.0], 1.0, GrowthSpec::default());
        let w = stable_interval_search(&profile).unwrap();
        for k in 0..16 {
            let t = w.t_lo + (w.t_hi - w.t_lo) * k as f64 / 15.0;
            let b = frequency(&f, &[0.0, 0.0], t, &GrowthSpec::default()).unwrap();
            prop_assert!(b >= w.level * (1.0 - 1e-6) && b <= E * w.level * (1.0 + 1e-6), "β({t}) = {b}, level {}", w.level);
        }
    }

    #[test]
    fn histogram_totals_and_refinement(d in 2u32..10, a in 2usize..5) {
        let f = HarmonicExpr::planar_power(d, Part::Re);
        let q = Cube::new(vec![0.1, -0.05], 0.5).unwrap();
        let h = subcube_histogram(&f, &q, a, &HistogramSpec::fast()).unwrap();
        prop_assert_eq!(h.bins.iter().sum::<usize>(), a * a);
        for v in h.values.iter().flatten() {
            prop_assert!(*v <= h.parent_index * 1.05 + 0.1, "{v} vs {}", h.parent_index);
        }
        prop_assert_eq!(&h, &subcube_histogram(&f, &q, a, &HistogramSpec::fast()).unwrap());
    }

    #[test]
    fn certified_bound_below_marching(d in 1u32..=5) {
        let f = HarmonicExpr::planar_power(d, Part::Re);
        let b = Ball::unit(2);
        let s = signed_balls_in_layers(&f, &b, &SignedBallSpec::default()).unwrap();
        let est = nodal_volume(&f, &Region::Ball(b.scale(2.0)), 256).unwrap();
        for p in &s.pairs {
            prop_assert!(projection_lower_bound(p).unwrap() <= est.measure + est.error_indicator);
        }
    }
}

#[test]
fn marching_converges_first_order_on_planes() {
    let f = HarmonicExpr::coordinate(1);
    let ball = Region::Ball(Ball::new(vec![0.013, -0.021, 0.007], 1.0).unwrap());
    let exact = std::f64::consts::PI * (1.0 - 0.013f64.powi(2));
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&r| (nodal_volume(&f, &ball, r).unwrap().measure - exact).abs())
        .collect();
    assert!(errs[2] < 0.05, "{errs:?}");
    assert!(errs[2] <= errs[0], "{errs:?}");
}

#[test]
fn nodal_length_is_comparable_to_the_degree() {
    // Upper: length in B(0,1) / N stays at the exact value 2. Lower: length
    // in B(0,2) ≥ N(½B)^0.9.
    for n in 1..=20u32 {
        let f = HarmonicExpr::planar_power(n, Part::Re);
        let inner = nodal_volume(&f, &Region::Ball(Ball::unit(2)), 256).unwrap().measure;
        let outer = nodal_volume(&f, &Region::Ball(Ball::new(vec![0.0, 0.0], 2.0).unwrap()), 256)
            .unwrap()
            .measure;
        let half = doubling_index(&f, &Ball::new(vec![0.0, 0.0], 0.5).unwrap(), &GrowthSpec::default()).unwrap();
        assert!(inner / (n as f64).max(1.0) <= 2.05, "N = {n}: {inner}");
        assert!(outer >= half.powf(0.9), "N = {n}: {outer} vs {half}");
    }
}
