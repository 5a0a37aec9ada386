use illpose::closed_forms::{PeriodicWave, RationalProfile};
use illpose::evolution::*;
use illpose::inflation::{geometric_tail, make_two_bump, TwoBumpData};
use illpose::spectral::{Grid, NormSpec, SpectralField};
use illpose::C64;

fn rel_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().mass().sqrt() / b.mass().sqrt()
}

#[test]
fn szego_wave_matches_closed_form() {
    let g = Grid::new(100.0, 2048).unwrap();
    let wave = PeriodicWave::new(RationalProfile::new(1.0, 1.0, 0.0, 0.3).unwrap(), g.length());
    let cfg = IntegratorConfig::szego(1e-3);
    let out = evolve(&wave.field(0.0, g), &cfg, 1.0, &[1.0]).unwrap();
    let err = rel_l2(&out[0].1, &wave.field(1.0, g));
    println!("szego err {err:e}");
    assert!(err <= 1e-6);
}

#[test]
fn conservation_halfwave() {
    let g = Grid::new(100.0, 1024).unwrap();
    let u0 = SpectralField::from_fn(g, |x| C64::from_polar(0.5 * (-x * x).exp(), x));
    let cfg = IntegratorConfig::new(1.0, 1.0, 0.01);
    let m0 = mass(&u0);
    let e0 = energy(&u0, 1.0, 1.0);
    let out = evolve(&u0, &cfg, 10.0, &[10.0]).unwrap();
    let dm = (mass(&out[0].1) - m0).abs() / m0;
    let de = (energy(&out[0].1, 1.0, 1.0) - e0).abs() / e0.abs();
    println!("mass {dm:e} energy {de:e}");
    assert!(dm <= 1e-8);
    assert!(de <= 1e-6);
}

fn two_bump(h: f64, m: usize, n: f64, a: f64) -> (SpectralField, TwoBumpData) {
    let g = Grid::with_spacing(h, m).unwrap();
    let data = TwoBumpData { r: 1.0, n, a, s: -0.5 };
    (make_two_bump(&data, g).unwrap().0, data)
}

fn smooth_datum(g: Grid) -> SpectralField {
    SpectralField::from_fn(g, |x| C64::from_polar(0.4 * (-x * x / 4.0).exp(), 0.5 * x))
}

#[test]
fn zero_datum_stays_zero() {
    let g = Grid::new(40.0, 256).unwrap();
    let z = SpectralField::zeros(g);
    let out = evolve(&z, &IntegratorConfig::new(1.0, 1.0, 0.01), 1.0, &[0.5, 1.0]).unwrap();
    assert!(out.iter().all(|(_, u)| u.max_abs() == 0.0));
}

#[test]
fn nonlinear_increment_conjugate_symmetry() {
    let g = Grid::new(40.0, 512).unwrap();
    let u = smooth_datum(g);
    let uc = u.map_values(|_, v| v.conj());
    for dealias in [true, false] {
        let a = nonlinear_substep(&u, 1.0, 0.01, dealias).unwrap();
        let b = nonlinear_substep(&uc, -1.0, 0.01, dealias).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y.conj()).norm() <= 1e-12);
        }
    }
}

#[test]
fn free_flow_is_the_multiplier() {
    let g = Grid::new(40.0, 512).unwrap();
    let u = smooth_datum(g);
    for beta in [0.5, 1.0, 2.0] {
        let cfg = IntegratorConfig::new(beta, 0.0, 0.01);
        let out = evolve(&u, &cfg, 0.73, &[0.73]).unwrap();
        let exact = u.apply_dispersion(beta, 0.73).unwrap();
        for (x, y) in out[0].1.spectrum().iter().zip(exact.spectrum()) {
            assert!((x - y).norm() <= 1e-12 * u.spectrum().iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
}

#[test]
fn mass_drift_per_step() {
    let g = Grid::new(60.0, 512).unwrap();
    let u = smooth_datum(g);
    for mu in [1.0, -1.0] {
        let cfg = IntegratorConfig::new(1.0, mu, 0.01);
        let v = step(&u, &cfg).unwrap();
        assert!((mass(&v) - mass(&u)).abs() <= 1e-10 * mass(&u));
    }
}

#[test]
fn strang_self_convergence_order() {
    let g = Grid::new(60.0, 512).unwrap();
    let u = smooth_datum(g).scale(C64::new(2.0, 0.0));
    let t = 1.0;
    let run = |dt: f64| evolve(&u, &IntegratorConfig::new(1.0, 1.0, dt), t, &[t]).unwrap().remove(0).1;
    let reference = run(0.02 / 8.0);
    let e1 = run(0.02).sub(&reference).unwrap().mass().sqrt();
    let e2 = run(0.01).sub(&reference).unwrap().mass().sqrt();
    let order = (e1 / e2).log2();
    println!("errors {e1:e} {e2:e} order {order}");
    assert!(order >= 1.9);
}

#[test]
fn szego_flow_stays_in_hardy_space() {
    let g = Grid::new(80.0, 1024).unwrap();
    let u = SpectralField::from_fn(g, |x| C64::new(1.0, 0.0) / C64::new(x, 1.0) + C64::new(0.5, 0.0) / C64::new(x - 3.0, 2.0))
        .szego_project();
    let out = evolve(&u, &IntegratorConfig::szego(0.01), 2.0, &[1.0, 2.0]).unwrap();
    for (_, v) in out {
        for (m, c) in v.spectrum().iter().enumerate() {
            if g.index(m) < 0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
    }
}

#[test]
fn evolve_is_deterministic_and_checks_samples() {
    let g = Grid::new(40.0, 256).unwrap();
    let u = smooth_datum(g);
    let cfg = IntegratorConfig::new(1.0, 1.0, 0.01);
    let a = evolve(&u, &cfg, 1.0, &[0.3, 1.0]).unwrap();
    let b = evolve(&u, &cfg, 1.0, &[1.0, 0.3]).unwrap();
    for ((ta, ua), (tb, ub)) in a.iter().zip(&b) {
        assert_eq!(ta, tb);
        assert_eq!(ua.values(), ub.values());
    }
    assert!(evolve(&u, &cfg, 1.0, &[1.5]).is_err());
    assert!(evolve(&u, &IntegratorConfig::new(1.0, 1.0, 10.0), 1.0, &[1.0]).is_err());
}

#[test]
fn snapshots_csv() {
    let g = Grid::new(40.0, 16).unwrap();
    let u = smooth_datum(g);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.csv");
    write_snapshots(&path, &[(0.0, u.clone()), (1.0, u)], true).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,xi,re,im"));
    assert_eq!(lines.count(), 32);
}

#[test]
fn picard_first_iterate_and_parity() {
    let (phi, _) = two_bump(0.25, 2048, 64.0, 8.0);
    let cfg = IntegratorConfig::new(1.0, 1.0, 1e-4);
    let t = 0.01;
    let tree = picard_iterates(&phi, &cfg, 3, t, PicardOptions::default()).unwrap();
    let free = phi.apply_dispersion(1.0, t).unwrap();
    let d = tree.iterates[0].sub(&free).unwrap().mass().sqrt() / phi.mass().sqrt();
    assert!(d < 1e-12, "{d}");
    // only odd orders are stored
    assert_eq!(tree.iterates.len(), 2);
    assert!(picard_iterates(&phi, &cfg, 4, 1e-3, PicardOptions::default()).is_err());
}

#[test]
fn two_bump_support() {
    let (phi, data) = two_bump(1.0, 4096, 256.0, 8.0);
    let thr = 1e-10 * phi.spectrum().iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert_eq!(support_count(&phi, thr), (2.0 * data.a, 2));
    let tree = picard_iterates(&phi, &IntegratorConfig::new(1.0, 1.0, 1e-3), 3, 0.05, PicardOptions::default()).unwrap();
    let u3 = &tree.iterates[1];
    let thr = 1e-10 * u3.spectrum().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (meas, count) = support_count(u3, thr);
    assert!(count <= 8);
    assert!(meas <= 24.0 * data.a);
    assert_eq!(support_count(&SpectralField::zeros(phi.grid()), 0.0), (0.0, 0));
}

#[test]
fn support_constant_is_independent_of_carrier() {
    let mut constants = Vec::new();
    for n in [64.0, 128.0, 256.0] {
        let (phi, data) = two_bump(1.0, 16384, n, 8.0);
        let tree = picard_iterates(&phi, &IntegratorConfig::new(1.0, 1.0, 1e-3), 7, 0.05, PicardOptions::default()).unwrap();
        let c = tree
            .iterates
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let thr = 1e-10 * u.spectrum().iter().map(|v| v.norm()).fold(0.0, f64::max);
                (support_count(u, thr).0 / data.a).powf(1.0 / (2 * i + 1) as f64)
            })
            .fold(0.0, f64::max);
        constants.push(c);
    }
    let c0 = constants[0];
    assert!(constants.iter().all(|c| (c / c0 - 1.0).abs() <= 0.2), "{constants:?}");
}

#[test]
fn partial_sum_tracks_integrator_within_tail() {
    let (phi, data) = two_bump(0.25, 2048, 64.0, 8.0);
    let ma = phi.norm(NormSpec::Modulation { a: data.a }).unwrap().value().unwrap();
    let t_star = 1.0 / (data.a * ma * ma);
    let t = 0.25 * t_star;
    let cfg = IntegratorConfig::new(1.0, 1.0, t / 200.0);
    let tree = picard_iterates(&phi, &cfg, 9, t, PicardOptions { window: Some(data.a), ..Default::default() }).unwrap();
    let a_seq = a_sequence(401);
    let base = t.sqrt() * data.a.sqrt() * ma;
    let mut c2: f64 = 0.0;
    for (i, v) in tree.norms_ma.iter().enumerate().skip(1) {
        let k = 2 * i + 1;
        c2 = c2.max((v.unwrap() / (a_seq[k] * base.powi(k as i32 - 1) * ma)).powf(1.0 / (k - 1) as f64));
    }
    // ‖·‖_{L²} ≤ ‖·‖_{M_A}/√(2π) for the computed orders above 5, geometric beyond 9
    let computed: f64 = tree.norms_ma[3..].iter().map(|v| v.unwrap()).sum::<f64>() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = computed + geometric_tail(&a_seq, 9, c2 * base, ma);
    let u = evolve(&phi, &cfg, t, &[t]).unwrap().remove(0).1;
    let gap = tree.partial_sum(5).sub(&u).unwrap().norm(NormSpec::L2).unwrap().value().unwrap();
    println!("gap {gap:e} tail {tail:e} c2 {c2}");
    assert!(gap <= 2.0 * tail);
}

#[test]
fn iterate_bound_shape_constant_is_stable() {
    let mut constants = Vec::new();
    for (n, a, t) in [(64.0, 8.0, 2e-4), (128.0, 8.0, 5e-4), (128.0, 16.0, 2e-4)] {
        let (phi, data) = two_bump(0.5, 4096, n, a);
        let ma = phi.norm(NormSpec::Modulation { a: data.a }).unwrap().value().unwrap();
        let tree = picard_iterates(&phi, &IntegratorConfig::new(1.0, 1.0, t / 50.0), 9, t, PicardOptions { window: Some(a), ..Default::default() }).unwrap();
        let a_seq = a_sequence(9);
        let base = t.sqrt() * a.sqrt() * ma;
        let c = tree
            .norms_ma
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, v)| {
                let k = 2 * i + 1;
                (v.unwrap() / (a_seq[k] * base.powi(k as i32 - 1) * ma)).powf(1.0 / (k - 1) as f64)
            })
            .fold(0.0, f64::max);
        constants.push(c);
    }
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().cloned().fold(0.0, f64::max);
    println!("C2' samples {constants:?}");
    assert!(lo > 0.0 && hi / lo < 2.0);
}
