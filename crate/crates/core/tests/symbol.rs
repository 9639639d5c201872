mod common;

use common::*;
use dispersio::bundled;
use dispersio::linalg::{self, ComplexMatrix};
use dispersio::symbol::*;
use dispersio::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn zero_state(n: usize) -> Vec<Complex64> {
    vec![z(0.0, 0.0); n]
}

#[test]
fn eval_a_model_values() {
    let a = model_a();
    assert_eq!(eval_a(&a, &[0.0]).unwrap(), linalg::zeros(2));
    // ∂² ↦ −ξ², so diag(1, −1)∂² ↦ diag(−ξ², ξ²)
    let m = eval_a(&a, &[2.0]).unwrap();
    assert!(fro(&(m - diag(&[-4.0, 4.0]))) == 0.0);
}

#[test]
fn eval_a_rejects_non_hermitian() {
    let a = QuadraticSymbol::new(1, 2, vec![cmat(&[&[(0.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]])]).unwrap();
    match eval_a(&a, &[1.5]) {
        Err(Error::Structural { xi, .. }) => assert_eq!(xi, vec![1.5]),
        other => panic!("expected a structural error, got {other:?}"),
    }
}

#[test]
fn eigen_model_branches() {
    let es = eigen_decompose(&model_a(), &[1.0], TAU_CLUSTER).unwrap();
    assert_eq!(es.branches.len(), 2);
    assert_eq!(es.branches[0].lambda, -1.0);
    assert_eq!(es.branches[1].lambda, 1.0);
    assert!(fro(&(&es.branches[0].projector - diag(&[1.0, 0.0]))) < 1e-15);
    assert!(fro(&(&es.branches[1].projector - diag(&[0.0, 1.0]))) < 1e-15);
}

#[test]
fn scalar_laplacian_is_one_branch() {
    let a = QuadraticSymbol::new(2, 3, vec![diag(&[1.0; 3]), linalg::zeros(3), linalg::zeros(3), diag(&[1.0; 3])]).unwrap();
    let es = eigen_decompose(&a, &[0.3, -1.7], TAU_CLUSTER).unwrap();
    assert_eq!(es.multiplicities(), vec![3]);
    assert!(fro(&(&es.branches[0].projector - linalg::identity(3))) < 1e-12);
}

#[test]
fn eigen_at_origin_is_domain_error() {
    assert!(matches!(eigen_decompose(&model_a(), &[0.0], TAU_CLUSTER), Err(Error::Domain(_))));
}

fn random_quadratic(seed: u64, dim: usize, n: usize) -> QuadraticSymbol {
    let mut r = rng(seed);
    let mut coeffs = vec![linalg::zeros(n); dim * dim];
    for j in 0..dim {
        for k in j..dim {
            let h = random_hermitian(&mut r, n);
            coeffs[j * dim + k] = h.clone();
            coeffs[k * dim + j] = h;
        }
    }
    QuadraticSymbol::new(dim, n, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenstructure_algebra(seed in 0u64..10_000, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x.hypot(y) > 0.1);
        let a = random_quadratic(seed, 2, 3);
        let es = eigen_decompose(&a, &[x, y], TAU_CLUSTER).unwrap();
        let m = eval_a(&a, &[x, y]).unwrap();
        let scale = fro(&m).max(1.0);
        let defects = es.projector_defects();
        prop_assert!(defects.partition <= TAU_ALG * scale);
        prop_assert!(defects.orthogonality <= TAU_ALG * scale);
        prop_assert!(defects.hermitian <= TAU_ALG * scale);
        prop_assert!(fro(&(es.reconstruct() - &m)) <= TAU_ALG * scale);
    }

    #[test]
    fn homogeneity(seed in 0u64..10_000, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x.hypot(y) > 0.1);
        let a = random_quadratic(seed, 2, 3);
        let base = eval_a(&a, &[x, y]).unwrap();
        let scaled = eval_a(&a, &[3.0 * x, 3.0 * y]).unwrap();
        prop_assert!(fro(&(scaled - base * z(9.0, 0.0))) <= 1e-12 * (1.0 + x * x + y * y) * 9.0);
        for s in [2.0, 0.5, 10.0] {
            let e1 = eigen_decompose(&a, &[x, y], TAU_CLUSTER).unwrap();
            let e2 = eigen_decompose(&a, &[s * x, s * y], TAU_CLUSTER).unwrap();
            prop_assert_eq!(e1.multiplicities(), e2.multiplicities());
            for (b1, b2) in e1.branches.iter().zip(&e2.branches) {
                prop_assert!((b2.lambda - s * s * b1.lambda).abs() <= 1e-10 * s * s * (x * x + y * y) * a.scale());
                prop_assert!(fro(&(&b2.projector - &b1.projector)) <= 1e-7);
            }
        }
    }
}

#[test]
fn tracking_follows_projectors_through_crossing() {
    // λ = ±(ξ₁² − ξ₂²) crosses at ξ₁ = ξ₂; sorted order swaps there.
    let a = QuadraticSymbol::new(2, 2, vec![diag(&[1.0, -1.0]), linalg::zeros(2), linalg::zeros(2), diag(&[-1.0, 1.0])]).unwrap();
    let path: Vec<Vec<f64>> = (0..=20)
        .map(|i| {
            let th = 0.2 + 0.8 * i as f64 / 20.0 * std::f64::consts::FRAC_PI_2;
            vec![th.cos(), th.sin()]
        })
        .filter(|xi| (xi[0] - xi[1]).abs() > 1e-3)
        .collect();
    let tracked = track_along_path(&a, &path, TAU_CLUSTER).unwrap();
    for es in &tracked {
        assert!(fro(&(&es.branches[0].projector - diag(&[1.0, 0.0]))) < 1e-12);
    }
    let first = &tracked[0];
    let last = tracked.last().unwrap();
    assert!(first.branches[0].lambda < 0.0 && last.branches[0].lambda > 0.0);
}

#[test]
fn tracking_reports_multiplicity_change() {
    let a = QuadraticSymbol::new(2, 2, vec![diag(&[1.0, -1.0]), linalg::zeros(2), linalg::zeros(2), diag(&[-1.0, 1.0])]).unwrap();
    let path = vec![vec![1.0, 0.2], vec![1.0, 1.0]];
    assert!(matches!(track_along_path(&a, &path, TAU_CLUSTER), Err(Error::Tracking { .. })));
}

#[test]
fn model_system_passes_coincidence_check() {
    let spec = bundled::spec("example_1_1").unwrap();
    let report = check_assumption_2_2(&spec, &sphere_samples(1, 0, 0), &state_samples(2, 4, 1.0, 1)).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert!(report.max_diagonal_block == 0.0);
}

#[test]
fn imaginary_diagonal_fails_on_diagonal_block() {
    let spec = bundled::spec("imaginary_diagonal").unwrap();
    let report = check_assumption_2_2(&spec, &sphere_samples(1, 0, 0), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    let w = report.witness.unwrap();
    assert_eq!(w.kind, WitnessKind::DiagonalBlock);
    assert_eq!((w.p, w.q), (0, 0));
    // Π₁ (Im B) Π₁ = ξ₁·E₁₁ at |ξ| = 1
    assert!((w.block_norm - 1.0).abs() < 1e-12);
}

#[test]
fn zero_first_order_part_passes_trivially() {
    let spec = SystemSpec::constant(model_a(), vec![linalg::zeros(2)]);
    let report = check_assumption_2_2(&spec, &sphere_samples(1, 0, 0), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert_eq!(report.max_diagonal_block, 0.0);
    assert_eq!(report.max_ratio, 0.0);
}

fn crossing_a() -> QuadraticSymbol {
    QuadraticSymbol::new(2, 2, vec![diag(&[1.0, -1.0]), linalg::zeros(2), linalg::zeros(2), diag(&[-1.0, 1.0])]).unwrap()
}

#[test]
fn non_divisible_block_at_crossing_fails_by_refinement() {
    // Im B = ξ₁σx does not vanish where ξ₁² = ξ₂².
    let b1 = pauli_x() * z(0.0, 1.0);
    let spec = SystemSpec::constant(crossing_a(), vec![b1, linalg::zeros(2)]);
    let report = check_assumption_2_2(&spec, &sphere_samples(2, 64, 3), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    let w = report.witness.unwrap();
    assert_eq!(w.kind, WitnessKind::RatioGrowth);
    assert!(report.max_ratio_growth > 1e3);
    assert!((w.xi[0].abs() - w.xi[1].abs()).abs() < 1e-2);
}

#[test]
fn vanishing_block_at_crossing_passes() {
    // the crossing pair (0, 1) sees no Im B; the third component is separated
    let a = QuadraticSymbol::new(
        2,
        3,
        vec![diag(&[1.0, -1.0, 4.0]), linalg::zeros(3), linalg::zeros(3), diag(&[-1.0, 1.0, 4.0])],
    )
    .unwrap();
    let mut b1 = linalg::zeros(3);
    b1[(0, 2)] = z(0.0, 1.0);
    b1[(2, 0)] = z(0.0, 1.0);
    b1[(1, 2)] = z(0.5, 0.0);
    let spec = SystemSpec::constant(a, vec![b1, linalg::zeros(3)]);
    let report = check_assumption_2_2(&spec, &sphere_samples(2, 64, 3), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
}

#[test]
fn conjugator_closed_form() {
    let spec = model_system();
    let u = zero_state(2);
    for xi in [0.5, 1.0, 3.0, -2.0, 40.0] {
        let v = conjugator_at(&spec, &u, &[xi]).unwrap();
        // hand computation: V = σx / (2ξ)
        let expected = pauli_x() * z(1.0 / (2.0 * xi), 0.0);
        assert!(fro(&(&v - &expected)) < 1e-14 / xi.abs().min(1.0));
        let doubled = conjugator_at(&spec, &u, &[2.0 * xi]).unwrap();
        assert!(fro(&(doubled - v * z(0.5, 0.0))) < 1e-14);
    }
}

#[test]
fn conjugator_of_hermitian_b_is_zero() {
    let spec = SystemSpec::constant(model_a(), vec![pauli_x()]);
    let v = conjugator_at(&spec, &zero_state(2), &[1.3]).unwrap();
    assert_eq!(fro(&v), 0.0);
}

#[test]
fn conjugator_rejects_tiny_gap_with_nonzero_block() {
    let a = crossing_a();
    let b1 = pauli_x() * z(0.0, 1.0);
    let spec = SystemSpec::constant(a, vec![b1, linalg::zeros(2)]);
    let xi = [1.0, 1.0 + 1e-9];
    let es = eigen_decompose_matrix(&eval_a(&spec.a, &xi).unwrap(), &xi, 0.0);
    let imb = linalg::im_part(&spec.b.eval(&zero_state(2), &xi));
    assert!(matches!(build_v_minus_one(&es, &imb), Err(Error::Degenerate { .. })));
}

/// `B − [V, A] = Σ_p Π_p B Π_p + Σ_{p≠q} Π_p (Re B) Π_q`.
fn conjugation_oracle(es: &EigenStructure, b: &ComplexMatrix) -> ComplexMatrix {
    let re_b = linalg::re_part(b);
    let mut out = linalg::zeros(b.nrows());
    for (p, bp) in es.branches.iter().enumerate() {
        for (q, bq) in es.branches.iter().enumerate() {
            let x = if p == q { b } else { &re_b };
            out += &bp.projector * x * &bq.projector;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugation_identity(seed in 0u64..10_000, th in 0.0f64..6.28, r in 1.0f64..50.0) {
        let mut g = rng(seed);
        // commuting A family with separated spectrum
        let q = {
            let h = random_hermitian(&mut g, 3);
            let (_, vecs) = linalg::hermitian_eigen(&h);
            vecs
        };
        let d1 = diag(&[-2.0, 0.5, 3.0]);
        let d2 = diag(&[1.0, -1.5, 2.5]);
        let conj = |d: &ComplexMatrix| &q * d * q.adjoint();
        let a = QuadraticSymbol::new(2, 3, vec![conj(&d1), linalg::zeros(3), linalg::zeros(3), conj(&d2)]).unwrap();
        let xi = [r * th.cos(), r * th.sin()];
        let es = eigen_decompose(&a, &xi, TAU_CLUSTER).unwrap();
        prop_assume!(es.branches.len() == 3);
        let gaps_ok = es.branches.windows(2).all(|w| (w[1].lambda - w[0].lambda) > 1e-3 * r * r);
        prop_assume!(gaps_ok);
        // Im B off-diagonal in the eigenbasis
        let mut b_eig = random_matrix(&mut g, 3);
        let im = linalg::im_part(&b_eig);
        for i in 0..3 { b_eig[(i, i)] -= im[(i, i)] * z(0.0, 1.0); }
        let b_mat = &q * b_eig * q.adjoint();
        let spec = SystemSpec::constant(a, vec![b_mat.clone(), b_mat.clone() * z(0.3, 0.0)]);
        let v = conjugator_at(&spec, &zero_state(3), &xi).unwrap();
        prop_assert!(linalg::hermitian_deviation(&v) <= 1e-12 * fro(&v).max(1e-300) + 1e-15);
        let bt = conjugated_symbol(&spec, &zero_state(3), &xi, &v);
        let b = spec.b.eval(&zero_state(3), &xi);
        prop_assert!(linalg::hermitian_deviation(&bt) <= 1e-9 * fro(&b));
        prop_assert!(fro(&(&bt - conjugation_oracle(&es, &b))) <= 1e-9 * fro(&b));
        // degree −1 homogeneity
        let v2 = conjugator_at(&spec, &zero_state(3), &[2.0 * xi[0], 2.0 * xi[1]]).unwrap();
        prop_assert!(fro(&(v2 * z(2.0, 0.0) - &v)) <= 1e-9 * fro(&v).max(1e-12));
    }
}

fn scalar_with_c(c: Complex64) -> SystemSpec {
    let a = QuadraticSymbol::new(1, 1, vec![diag(&[1.0])]).unwrap();
    let mut spec = SystemSpec::constant(a, vec![linalg::zeros(1)]);
    spec.c = Some(FirstOrderSymbol::from_constants(vec![ComplexMatrix::from_element(1, 1, c)]));
    spec
}

#[test]
fn doubling_scalar_conjugate_coupling() {
    let c = z(0.7, -0.2);
    let spec = scalar_with_c(c);
    let dbl = double_system(&spec);
    assert_eq!(dbl.components, 2);
    assert!(dbl.c.is_none());
    assert_eq!(dbl.a.coeffs[0], diag(&[1.0, -1.0]));
    let b = &dbl.b.coeffs[0].constant;
    assert_eq!(*b, cmat(&[&[(0.0, 0.0), (0.7, -0.2)], &[(0.7, 0.2), (0.0, 0.0)]]));
}

#[test]
fn doubling_without_coupling_is_block_diagonal() {
    let spec = bundled::spec("quasilinear_demo").unwrap();
    let dbl = double_system(&spec);
    let u = [z(0.3, -0.1), z(-0.2, 0.4)];
    let uu = double_state(&u);
    let b = dbl.b.eval(&uu, &[1.7]);
    let a = eval_a(&dbl.a, &[1.7]).unwrap();
    for m in [&a, &b] {
        assert_eq!(fro(&m.view((0, 2), (2, 2)).into_owned()), 0.0);
        assert_eq!(fro(&m.view((2, 0), (2, 2)).into_owned()), 0.0);
    }
    let b_orig = spec.b.eval(&u, &[1.7]);
    assert!(fro(&(b.view((0, 0), (2, 2)).into_owned() - &b_orig)) < 1e-15);
    assert!(fro(&(b.view((2, 2), (2, 2)).into_owned() - linalg::conj(&b_orig))) < 1e-15);
    let mut ev = linalg::hermitian_eigen(&a).0;
    ev.sort_by(f64::total_cmp);
    let mut expected = vec![-1.7f64 * 1.7, 1.7 * 1.7, -1.7 * 1.7, 1.7 * 1.7];
    expected.sort_by(f64::total_cmp);
    for (x, y) in ev.iter().zip(&expected) {
        assert!((x - y).abs() < 1e-12);
    }
}

fn model_with_c(c: ComplexMatrix) -> SystemSpec {
    let mut spec = model_system();
    spec.b = FirstOrderSymbol::from_constants(vec![pauli_x()]);
    spec.c = Some(FirstOrderSymbol::from_constants(vec![c]));
    spec
}

#[test]
fn symmetric_c_passes() {
    let spec = model_with_c(cmat(&[&[(1.0, 2.0), (0.5, -1.0)], &[(0.5, -1.0), (0.0, 3.0)]]));
    let report = check_assumption_2_7(&spec, &sphere_samples(1, 0, 0), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    assert_eq!(report.max_diagonal_block, 0.0);
}

#[test]
fn antisymmetric_c_on_opposite_eigenvalues_fails() {
    let spec = model_with_c(real(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    let report = check_assumption_2_7(&spec, &sphere_samples(1, 0, 0), &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Fail);
    let w = report.witness.unwrap();
    assert_eq!(w.family, BlockFamily::CAntisymmetric);
    assert_eq!((w.p.min(w.q), w.p.max(w.q)), (0, 1));
}

#[test]
fn coupling_symmetric_only_where_eigenvalues_cancel_passes() {
    // λ = (−ξ², ξ², −2ξ²): only the pair (0, 1) sums to zero
    let a = QuadraticSymbol::new(1, 3, vec![diag(&[1.0, -1.0, 2.0])]).unwrap();
    let mut spec = SystemSpec::constant(a, vec![linalg::zeros(3)]);
    let c = cmat(&[
        &[(0.3, 0.0), (1.0, 1.0), (2.0, 0.0)],
        &[(1.0, 1.0), (0.0, -1.0), (0.0, 0.0)],
        &[(-5.0, 0.0), (0.7, 0.0), (0.0, 0.0)],
    ]);
    spec.c = Some(FirstOrderSymbol::from_constants(vec![c]));
    let xis = sphere_samples(1, 0, 0);
    let report = check_assumption_2_7(&spec, &xis, &[]).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    let doubled = check_assumption_2_2(&double_system(&spec), &xis, &[]).unwrap();
    assert_eq!(doubled.verdict, Verdict::Pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doubling_consistency(seed in 0u64..10_000, sym_mask in 0u8..8) {
        let mut g = rng(seed);
        let a = QuadraticSymbol::new(1, 2, vec![diag(&[1.0, -1.0])]).unwrap();
        let mut b = random_matrix(&mut g, 2);
        if sym_mask & 1 == 1 {
            // keep Im B off the diagonal
            let im = linalg::im_part(&b);
            for i in 0..2 { b[(i, i)] -= im[(i, i)] * z(0.0, 1.0); }
        }
        let mut c = random_matrix(&mut g, 2);
        if sym_mask & 2 == 2 {
            c = (&c + c.transpose()) * z(0.5, 0.0);
        }
        let mut spec = SystemSpec::constant(a, vec![b]);
        spec.c = Some(FirstOrderSymbol::from_constants(vec![c]));
        let xis = sphere_samples(1, 0, 0);
        let direct = check_assumption_2_7(&spec, &xis, &[]).unwrap();
        let doubled = check_assumption_2_2(&double_system(&spec), &xis, &[]).unwrap();
        prop_assert_eq!(direct.verdict, doubled.verdict);
    }
}

#[test]
fn linearization_linear_and_conjugate_linear() {
    let m = cmat(&[&[(1.0, 0.5), (0.0, 2.0)], &[(-1.0, 0.0), (0.3, 0.3)]]);
    let u = [z(0.2, 0.1), z(-0.4, 0.0)];
    let v = vec![vec![z(0.1, 0.2), z(0.0, -0.3)]];
    let mm = m.clone();
    let (dv, dvbar) = wirtinger_partials(
        move |_, v| {
            let x = nalgebra::DVector::from_column_slice(&v[0]);
            (&mm * x).iter().copied().collect()
        },
        &u,
        &v,
        1e-5,
    );
    let lin = linearized_symbols(&dv, &dvbar, &[2.5]);
    assert!(fro(&(lin.b - &m * z(2.5, 0.0))) < 1e-9);
    assert!(fro(&lin.c) < 1e-9);

    let mm = m.clone();
    let (dv, dvbar) = wirtinger_partials(
        move |_, v| {
            let x = nalgebra::DVector::from_iterator(2, v[0].iter().map(|z| z.conj()));
            (&mm * x).iter().copied().collect()
        },
        &u,
        &v,
        1e-5,
    );
    let lin = linearized_symbols(&dv, &dvbar, &[2.5]);
    assert!(fro(&lin.b) < 1e-9);
    assert!(fro(&(lin.c - &m * z(2.5, 0.0))) < 1e-9);
}

#[test]
fn linearization_of_cubic_term() {
    // F = |u|² v₁, oracle B(ξ) = ξ₁|u₀|² I
    let u = [z(0.6, -0.2), z(0.1, 0.9)];
    let v = vec![vec![z(1.0, 0.0), z(0.0, 1.0)], vec![z(0.5, 0.5), z(0.0, 0.0)]];
    let (dv, dvbar) = wirtinger_partials(
        |u, v| {
            let w: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            v[0].iter().map(|x| x * w).collect()
        },
        &u,
        &v,
        1e-5,
    );
    let lin = linearized_symbols(&dv, &dvbar, &[1.5, -0.7]);
    let w: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    assert!(fro(&(lin.b - linalg::identity(2) * z(1.5 * w, 0.0))) < 1e-8);
    assert!(fro(&lin.c) < 1e-9);
}

#[test]
fn parse_errors_carry_json_pointer() {
    let bad = bundled::EXAMPLE_1_1.replace("[-1, 0], [0, 0]]], \"u_terms\"", "[-1, 0], [0]]], \"u_terms\"");
    match SystemSpec::from_json_str(&bad) {
        Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/B/0/const/1/1"),
        other => panic!("expected parse error, got {other:?}"),
    }
    let missing = r#"{"dimension": 1, "components": 1, "A": [[[[[1,0]]]]]}"#;
    match SystemSpec::from_json_str(missing) {
        Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/B"),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bad_grid = bundled::EXAMPLE_1_1.replace("\"grid_points\": 128", "\"grid_points\": 100");
    match SystemSpec::from_json_str(&bad_grid) {
        Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/grid_points"),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn monomials_interleave_real_and_imaginary_parts() {
    let u = [z(2.0, 3.0), z(5.0, 7.0)];
    assert_eq!(monomial_value(&[1, 0, 0, 0], &u), 2.0);
    assert_eq!(monomial_value(&[0, 1, 0, 0], &u), 3.0);
    assert_eq!(monomial_value(&[0, 0, 2, 1], &u), 175.0);
    let spec = bundled::spec("quasilinear_demo").unwrap();
    let b = spec.b.eval(&u, &[1.0]);
    assert_eq!(b, cmat(&[&[(2.0, 0.0), (1.0, 0.0)], &[(-1.0, 0.0), (6.5, 0.0)]]));
}
