use illpose::closed_forms::*;
use std::f64::consts::PI;

use illpose::spectral::{Grid, NormSpec, SpectralField};
use proptest::prelude::*;
use illpose::C64;

#[test]
fn cauchy_kernel_homogeneous_norms_match_closed_form() {
    let g = Grid::new(2000.0, 1 << 17).unwrap();
    for p in [0.5, 1.0, 2.0] {
        let prof = RationalProfile::simple(1.0, p).unwrap();
        let f = eval_rational(&prof, 0.0, g).unwrap();
        for s in [-0.4, 0.0, 0.25, 0.49] {
            let got = f.norm(NormSpec::Homogeneous { s }).unwrap().value().unwrap();
            let want = cauchy_hs_norm(p, s).unwrap();
            let rel = (got - want).abs() / want;
            println!("p={p} s={s} got={got} want={want} rel={rel:e}");
            assert!(rel <= 1e-4);
        }
    }
}

// Transforms of the three partial fractions of |f|²f at f = 1/(x+iε), with the
// half value at ξ = 0.
fn cube_transform(eps: f64, xi: f64) -> C64 {
    use std::f64::consts::PI;
    let pos = if xi > 0.0 { 1.0 } else if xi == 0.0 { 0.5 } else { 0.0 };
    let neg = if xi < 0.0 { 1.0 } else if xi == 0.0 { 0.5 } else { 0.0 };
    let inv4 = 1.0 / (4.0 * eps * eps);
    let f1 = C64::new(0.0, -2.0 * PI) * (-eps * xi).exp() * pos;
    let f2 = -2.0 * PI * xi * (-eps * xi).exp() * pos;
    let g1 = C64::new(0.0, 2.0 * PI) * (eps * xi).exp() * neg;
    f1 * inv4 - C64::new(f2, 0.0) / C64::new(0.0, 2.0 * eps) - g1 * inv4
}

#[test]
fn trilinear_term_matches_time_quadrature() {
    use gauss_quad::GaussLegendre;
    let (eps, t) = (0.2, 0.5);
    let g = Grid::new(200.0, 1 << 14).unwrap();
    let term = trilinear_halfwave(eps, t, g).unwrap();
    let rule = GaussLegendre::new(8).unwrap();
    let panels = 8;
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, xi) in g.xis().into_iter().enumerate() {
        // free flow of the cube: translate by τ, then propagate for t - τ
        let integrand = |tau: f64| {
            cube_transform(eps, xi) * C64::from_polar(1.0, -tau * xi - (t - tau) * xi.abs())
        };
        let mut acc = C64::default();
        for p in 0..panels {
            let (a, b) = (t * p as f64 / panels as f64, t * (p + 1) as f64 / panels as f64);
            acc += C64::new(rule.integrate(a, b, |s| integrand(s).re), rule.integrate(a, b, |s| integrand(s).im));
        }
        let got = term.field.spectrum()[m];
        num += (got - acc).norm_sqr();
        den += acc.norm_sqr();
    }
    let rel = (num / den).sqrt();
    println!("relative spectral L2 error {rel:e}");
    assert!(rel <= 1e-6);
}

#[test]
fn periodic_wave_solves_szego() {
    let g = Grid::new(60.0, 2048).unwrap();
    for (alpha, p, a, phi) in [(1.0, 1.0, 0.0, 0.0), (0.7, 0.5, 3.0, 1.1), (1.5, 2.0, -7.0, -2.0)] {
        let w = PeriodicWave::new(RationalProfile::new(alpha, p, a, phi).unwrap(), g.length());
        for t in [0.0, 1.0, 10.0] {
            let r = szego_residual(&w.field(t, g), &w.field_dt(t, g)).unwrap();
            assert!(r <= 1e-6, "alpha={alpha} p={p} t={t}: {r:e}");
        }
    }
}

#[test]
fn interference_closed_form_matches_quadrature() {
    for eps in [0.1, 0.01] {
        let pair = WavePair::basic(eps).unwrap();
        for s in [0.1, 0.25, 0.4] {
            for t in [0.0, 3.0 / (eps * eps)] {
                let a = interference_closed(&pair, t, s);
                let b = interference_quadrature(&pair, t, s).unwrap();
                assert!((a - b).abs() <= 1e-6 * a.abs(), "eps={eps} s={s} t={t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn distance_law_brackets() {
    let s = 0.25;
    let mut first = Vec::new();
    let mut later = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let pair = WavePair::basic(eps).unwrap();
        let l = eps.ln().abs();
        first.push(pair_distance(&pair, 0.0, s, Weight::Inhomogeneous).unwrap() / (eps / l.sqrt()));
        later.push(pair_distance(&pair, l / (eps * eps), s, Weight::Inhomogeneous).unwrap() / eps);
    }
    for v in [&first, &later] {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo <= 4.0, "{v:?}");
    }
}

#[test]
fn l2_construction_norms() {
    let g = Grid::new(50.0, 1 << 19).unwrap();
    for eps in [1e-2, 1e-3] {
        let pair = WavePair::l2(eps).unwrap();
        let v1 = eval_rational(&pair.first, 0.0, g).unwrap().norm(NormSpec::L2).unwrap().value().unwrap();
        let v2 = eval_rational(&pair.second, 0.0, g).unwrap().norm(NormSpec::L2).unwrap().value().unwrap();
        let factor = 1.0 + eps.ln().abs().powf(-0.5);
        assert!((v1 - PI.sqrt()).abs() < 1e-6, "{v1}");
        assert!((v2 - PI.sqrt() * factor).abs() < 1e-6, "{v2}");
    }
}

#[test]
fn rescale_halfwave_cauchy_kernel() {
    let g = Grid::new(400.0, 1 << 14).unwrap();
    let f = eval_rational(&RationalProfile::simple(1.0, 1.0).unwrap(), 0.0, g).unwrap();
    let same = rescale(&f, 1.0, 1.0).unwrap();
    assert_eq!(same.values(), f.values());
    let r = rescale(&f, 2.0, 1.0).unwrap();
    let l = g.length();
    for (j, x) in g.xs().into_iter().enumerate() {
        // exact on the torus: the compressed periodized kernel
        let w = C64::new(2.0 * x, 1.0) * (PI / l);
        let periodic = 2f64.sqrt() * (PI / l) * w.cos() / w.sin();
        if x.abs() < l / 4.0 {
            assert!((r.values()[j] - periodic).norm() < 1e-12, "x={x}");
        }
        if x.abs() < 10.0 {
            // cot w = 1/w - w/3 + …, so the torus and line kernels differ by O((π/L)²|z|)
            let z = C64::new(2.0 * x, 1.0);
            let line = 2f64.sqrt() / z;
            assert!((r.values()[j] - line).norm() <= (PI / l).powi(2) * z.norm(), "x={x}");
        }
    }
}

#[test]
fn rescale_keeps_critical_norm_at_beta_two() {
    // x e^{-x²/2} has vanishing mean, so its Ḣ^{-1/2} norm is finite
    let g = Grid::new(1600.0, 1 << 16).unwrap();
    let f = SpectralField::from_fn(g, |x| C64::new(x * (-x * x / 2.0).exp(), 0.0));
    let spec = NormSpec::Homogeneous { s: -0.5 };
    let before = f.norm(spec).unwrap().value().unwrap();
    assert!((before - 1.0).abs() < 1e-8, "{before}");
    for lambda in [2.0, 0.5] {
        let after = rescale(&f, lambda, 2.0).unwrap().norm(spec).unwrap().value().unwrap();
        assert!((after - before).abs() <= 1e-8 * before, "lambda={lambda}: {after} vs {before}");
    }
}

#[test]
fn trilinear_parts() {
    let g = Grid::new(200.0, 1 << 16).unwrap();
    let mut scaled = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let t = 1.0;
        let term = trilinear_halfwave(eps, t, g).unwrap();
        let plus = term.plus.norm(NormSpec::L2).unwrap().value().unwrap();
        let want = t * (5.0 * PI).sqrt() / (4.0 * eps * eps * eps.sqrt());
        assert!((plus - want).abs() <= 1e-6 * want, "eps={eps}: {plus} vs {want}");
        let minus = term.minus.norm(NormSpec::L2).unwrap().value().unwrap();
        assert!(minus * eps * eps < 1.0, "eps={eps}: {minus}");
        scaled.push(term.l2_value * eps.powf(2.5) / t);
    }
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.5 && hi < 2.0, "{scaled:?}");
}

#[test]
fn trilinear_vanishes_linearly_at_small_time() {
    let g = Grid::new(200.0, 1 << 14).unwrap();
    let a = trilinear_halfwave(0.2, 1e-3, g).unwrap().l2_value;
    let b = trilinear_halfwave(0.2, 2e-3, g).unwrap().l2_value;
    assert!((b / a - 2.0).abs() < 1e-2, "{}", b / a);
    assert!(trilinear_halfwave(0.2, 0.0, g).is_err());
    assert!(trilinear_halfwave(1e-3, 0.5, g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn periodic_wave_residual_small(alpha in 0.2f64..2.0, p in 0.5f64..3.0, phi in -3.0f64..3.0, t in 0.0f64..5.0) {
        let g = Grid::new(60.0, 2048).unwrap();
        let w = PeriodicWave::new(RationalProfile::new(alpha, p, 0.0, phi).unwrap(), g.length());
        let r = szego_residual(&w.field(t, g), &w.field_dt(t, g)).unwrap();
        prop_assert!(r <= 1e-6);
    }

    #[test]
    fn speed_and_frequency_relations(alpha in 0.01f64..10.0, p in 0.01f64..10.0) {
        let prof = RationalProfile::simple(alpha, p).unwrap();
        prop_assert!((prof.c - alpha * alpha / (2.0 * p)).abs() <= 1e-14 * prof.c);
        prop_assert!((prof.omega - alpha * alpha / (4.0 * p * p)).abs() <= 1e-14 * prof.omega);
    }

    #[test]
    fn cauchy_norm_scaling(p in 0.1f64..5.0, s in -0.45f64..1.0) {
        let base = cauchy_hs_norm(1.0, s).unwrap();
        let v = cauchy_hs_norm(p, s).unwrap();
        prop_assert!((v - base * p.powf(-(s + 0.5))).abs() <= 1e-12 * v);
    }

    #[test]
    fn rescale_preserves_l2_at_beta_one(k in 1u32..4, up in any::<bool>()) {
        let g = Grid::new(200.0, 4096).unwrap();
        let f = SpectralField::from_fn(g, |x| C64::new((-x * x / 8.0).exp(), 0.0));
        let lambda = if up { k as f64 + 1.0 } else { 1.0 / (k as f64 + 1.0) };
        let r = rescale(&f, lambda, 1.0).unwrap();
        let a = f.norm(NormSpec::L2).unwrap().value().unwrap();
        let b = r.norm(NormSpec::L2).unwrap().value().unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }
}
