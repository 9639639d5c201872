mod common;

use common::*;
use dispersio::bundled;
use dispersio::linalg::{self, ComplexMatrix};
use dispersio::stability::*;
use dispersio::symbol::{generator, SystemSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn zero2() -> Vec<Complex64> {
    vec![z(0.0, 0.0); 2]
}

/// `exp(tM) = cosh(μt) I + sinh(μt)/μ · M` for traceless 2×2 `M` with
/// `μ² = −det M`.
fn closed_form_exp(m: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let mu = (-det).sqrt();
    let (ch, sh_over) = if mu.norm() < 1e-12 {
        (z(1.0, 0.0), z(t, 0.0))
    } else {
        ((mu * t).cosh(), (mu * t).sinh() / mu)
    };
    linalg::identity(2) * ch + m * sh_over
}

#[test]
fn generator_of_model_system() {
    let spec = bundled::spec("example_1_1").unwrap();
    for xi in [0.3, 2.0, -7.5] {
        let m = generator(&spec, &zero2(), &[xi]);
        let expected = cmat(&[&[(0.0, xi * xi), (0.0, -xi)], &[(0.0, xi), (0.0, -xi * xi)]]);
        assert!(fro(&(m - expected)) == 0.0);
    }
}

#[test]
fn amplification_at_zero_frequency_is_identity() {
    let spec = bundled::spec("example_1_1").unwrap();
    for t in [0.0, 1.0, 17.0] {
        let amp = amplification_matrix(&spec, &zero2(), &[0.0], t);
        assert_eq!(amp.matrix.unwrap(), linalg::identity(2));
    }
}

#[test]
fn amplification_spectrum_at_two() {
    let spec = bundled::spec("example_1_1").unwrap();
    let m = generator(&spec, &zero2(), &[2.0]);
    // μ² = −det M = −(ξ⁴ − ξ²) = −12
    let mut ev = linalg::eigenvalues(&m);
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    assert!((ev[0] - z(0.0, -12f64.sqrt())).norm() < 1e-13);
    assert!((ev[1] - z(0.0, 12f64.sqrt())).norm() < 1e-13);
    let amp = amplification_matrix(&spec, &zero2(), &[2.0], 0.7);
    assert!(fro(&(amp.matrix.unwrap() - closed_form_exp(&m, 0.7))) < 1e-12);
}

#[test]
fn first_order_only_grows_like_exp_xi() {
    let spec = bundled::spec("example_1_1_firstorder_only").unwrap();
    for (xi, t) in [(1.0, 1.0), (10.0, 0.5), (-30.0, 2.0)] {
        let amp = amplification_matrix(&spec, &zero2(), &[xi], t);
        assert!((amp.log_op_norm - xi.abs() * t).abs() < 1e-12 * (1.0 + xi.abs() * t));
        assert!((amp.max_re_spec - xi.abs()).abs() < 1e-12 * xi.abs());
    }
}

#[test]
fn saturation_is_flagged_not_infinite() {
    let spec = bundled::spec("example_1_1_firstorder_only").unwrap();
    let amp = amplification_matrix(&spec, &zero2(), &[1000.0], 1.0);
    assert!(amp.saturated);
    assert!(amp.matrix.is_none());
    assert!((amp.log_op_norm - 1000.0).abs() < 1e-9);
}

#[test]
fn scan_model_system_is_uniformly_bounded() {
    let spec = bundled::spec("example_1_1").unwrap();
    let report = stability_scan(&spec, &zero2(), &ScanConfig::default()).unwrap();
    let v = &report.verdicts[0];
    assert_eq!(v.verdict, ScanVerdict::UniformlyBounded);
    assert!(v.plateau_change.abs() < 0.05);
    // spectral floor at every record
    for r in &report.records {
        assert!(r.log_op_norm >= r.t * r.max_re_spec - 1e-10);
    }
}

#[test]
fn bounded_frequency_constant_matches_closed_form() {
    let spec = bundled::spec("example_1_1").unwrap();
    let cfg = ScanConfig { dense_samples: 4000, ..ScanConfig::default() };
    let report = stability_scan(&spec, &zero2(), &cfg).unwrap();
    let oracle = (0..=40_000)
        .map(|i| {
            let xi = 4.0 * i as f64 / 40_000.0;
            let m = generator(&spec, &zero2(), &[xi]);
            linalg::op_norm(&closed_form_exp(&m, 1.0))
        })
        .fold(0.0, f64::max);
    let got = report.verdicts[0].bounded_frequency_constant;
    assert!((got / oracle - 1.0).abs() < 1e-4, "{got} vs {oracle}");
    assert!(got > 1.5, "growth from |ξ| < 1 should be visible");
}

#[test]
fn scan_first_order_only_is_ill_posed_with_unit_slope() {
    let spec = bundled::spec("example_1_1_firstorder_only").unwrap();
    let cfg = ScanConfig { times: vec![0.5, 1.0], ..ScanConfig::default() };
    let report = stability_scan(&spec, &zero2(), &cfg).unwrap();
    for v in &report.verdicts {
        assert_eq!(v.verdict, ScanVerdict::ExponentiallyIllPosed);
        assert!((v.fitted_slope / v.t - 1.0).abs() < 0.02);
    }
}

#[test]
fn hermitian_first_order_part_gives_unit_norms() {
    let a = model_a();
    let spec = SystemSpec::constant(a, vec![cmat(&[&[(0.5, 0.0), (1.0, 2.0)], &[(1.0, -2.0), (-3.0, 0.0)]])]);
    let report = stability_scan(&spec, &zero2(), &ScanConfig { xi_max: 64.0, ..ScanConfig::default() }).unwrap();
    for r in &report.records {
        assert!((r.op_norm - 1.0).abs() < 1e-10);
    }
    assert_eq!(report.verdicts[0].verdict, ScanVerdict::UniformlyBounded);
}

#[test]
fn two_dimensional_scan_covers_directions() {
    let a = dispersio::symbol::QuadraticSymbol::new(
        2,
        2,
        vec![diag(&[1.0, -1.0]), linalg::zeros(2), linalg::zeros(2), diag(&[1.0, -1.0])],
    )
    .unwrap();
    let b = real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let spec = SystemSpec::constant(a, vec![b.clone(), b]);
    let cfg = ScanConfig { xi_max: 32.0, directions: 4, ..ScanConfig::default() };
    let report = stability_scan(&spec, &zero2(), &cfg).unwrap();
    assert_eq!(report.verdicts[0].verdict, ScanVerdict::UniformlyBounded);
    let with_both = report.records.iter().filter(|r| r.xi[0] != 0.0 && r.xi[1] != 0.0).count();
    assert!(with_both > 0);
}

#[test]
fn uniform_diagonalisability_bounds_the_norm() {
    let spec = bundled::spec("example_1_1").unwrap();
    let report = stability_scan(&spec, &zero2(), &ScanConfig::default()).unwrap();
    let mut kappa_max: f64 = 0.0;
    for r in report.records.iter().filter(|r| r.radius() >= 2.0) {
        assert!(r.op_norm <= r.cond_eigvec * (1.0 + 1e-10));
        kappa_max = kappa_max.max(r.cond_eigvec);
    }
    assert!(kappa_max < 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_property(xi in -20.0f64..20.0, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0, seed in 0u64..1000) {
        let mut g = rng(seed);
        let spec = SystemSpec::constant(model_a(), vec![random_matrix(&mut g, 2)]);
        let m = generator(&spec, &zero2(), &[xi]);
        let e1 = amplify(&m, t1).matrix.unwrap();
        let e2 = amplify(&m, t2).matrix.unwrap();
        let e12 = amplify(&m, t1 + t2).matrix.unwrap();
        prop_assert!(fro(&(&e1 * &e2 - &e12)) <= 1e-8 * fro(&e12));
    }

    #[test]
    fn anti_hermitian_generators_are_unitary(seed in 0u64..1000, t in 0.0f64..50.0) {
        let mut g = rng(seed);
        let h = random_hermitian(&mut g, 3) * z(100.0, 0.0);
        let m = h * z(0.0, 1.0);
        let amp = amplify(&m, t);
        prop_assert!((amp.log_op_norm.exp() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ode_sum_examples() {
    let minus_id = linalg::identity(2) * z(-1.0, 0.0);
    let r = ode_sum_stability(&minus_id, &minus_id).unwrap();
    assert!(r.max_re_sum < 0.0 && !r.turing);

    let pair = OdePair::from_value(&serde_json::from_str(bundled::TURING_PAIR).unwrap()).unwrap();
    let r = ode_sum_stability(&pair.a, &pair.b).unwrap();
    assert_eq!(r.max_re_a, -1.0);
    assert_eq!(r.max_re_b, -1.0);
    assert_eq!(r.max_re_sum, 1.0);
    assert!(r.turing);

    let r = ode_sum_stability(&pair.a, &linalg::zeros(2)).unwrap();
    assert_eq!(r.max_re_sum, r.max_re_a);
    assert!(!r.turing);
}

#[test]
fn csv_layout() {
    let spec = bundled::spec("example_1_1").unwrap();
    let report = stability_scan(&spec, &zero2(), &ScanConfig { xi_max: 16.0, ..ScanConfig::default() }).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf, 1, None).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "xi_1,t,op_norm,max_re_spec,cond_eigvec");
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 5);
    let json: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .collect::<Vec<_>>()
        .join("\n");
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["verdicts"][0]["verdict"], "uniformly-bounded-in-xi");
}

#[test]
fn magnitudes_include_octave_endpoints() {
    let mags = scan_magnitudes(&ScanConfig::default());
    for k in [8.0, 16.0, 32.0, 64.0, 128.0] {
        assert!(mags.iter().any(|&m| m == k));
    }
    assert!(mags.len() >= 64);
    assert!(mags.windows(2).all(|w| w[0] < w[1]));
}
