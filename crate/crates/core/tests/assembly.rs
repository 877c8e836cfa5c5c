mod common;

use common::*;
use elastidg::forms::{assemble_a, assemble_b, assemble_load, assemble_load_with, uniform_penalty};
use elastidg::problems::problem_2d;
use elastidg::reference::error_exactness;
use elastidg::sparse::{dot, mul, to_dense};
use elastidg::ComplianceTensor;
use proptest::prelude::*;

#[test]
fn stress_matrix_is_exactly_symmetric() {
    for (dim, k, n) in [(2, 0, 4), (2, 2, 3), (3, 0, 2), (3, 1, 1)] {
        assert_eq!(symmetry_defect(dim, k, n), 0.0, "dim {dim} k {k}");
    }
}

#[test]
fn coarse_stress_matrix_matches_dense_oracle() {
    // entry by entry, basis function against basis function
    let (mesh, s, _) = spaces(2, 1, 1);
    let ct = ComplianceTensor::new(0.5, 1.0, 2).unwrap();
    let eta = uniform_penalty(&mesh, 3.0);
    let a = to_dense(&assemble_a(&s, &ct, &eta).unwrap());
    let unit = |i: usize| {
        let mut v = vec![0.0; s.total_dofs];
        v[i] = 1.0;
        s.coefficients(v).unwrap()
    };
    let q = error_exactness(2);
    for i in 0..s.total_dofs {
        let fi = unit(i);
        let ti = discrete_tensor(&fi);
        for j in 0..s.total_dofs {
            let fj = unit(j);
            let tj = discrete_tensor(&fj);
            let oracle = a_form(&mesh, &ct, &eta, &*ti, &*tj, q);
            assert!((a[i][j] - oracle).abs() < 1e-12, "A[{i}][{j}] = {} vs {oracle}", a[i][j]);
        }
    }
}

#[test]
fn divergence_annihilates_constant_stress() {
    for dim in [2, 3] {
        let (_, s, _) = spaces(dim, 1, 2);
        let u_space = elastidg::build_space(s.mesh.clone(), elastidg::ValueKind::Vector, 1);
        let b = assemble_b(&s, &u_space).unwrap();
        let c = [[1.5, -0.3, 0.7], [-0.3, 2.0, 0.1], [0.7, 0.1, -1.0]];
        let tau = s.project_tensor(|_| c);
        let r = mul(&b, &tau.values);
        let worst = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(worst < 1e-12, "dim {dim}: |B tau| = {worst}");
    }
}

#[test]
fn broken_integration_by_parts_holds() {
    for (dim, k, n) in [(2, 0, 3), (2, 2, 2), (3, 1, 1)] {
        let d = ibp_defect(dim, k, n, 7);
        assert!(d < 1e-12, "dim {dim} k {k}: {d}");
    }
}

#[test]
fn jump_average_identity() {
    assert!(jump_average_defect(200, 3) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn b_matches_quadrature_pairing(seed in any::<u64>(), dim in 2usize..=3, k in 0usize..=1) {
        let n = if dim == 2 { 2 } else { 1 };
        let (mesh, s, u) = spaces(dim, k, n);
        let b = assemble_b(&s, &u).unwrap();
        let mut r = rng(seed);
        let tau = random_field(&s, &mut r);
        let v = random_field(&u, &mut r);
        let matrix = dot(&mul(&b, &tau.values), &v.values);
        let oracle = b_form(&mesh, &*discrete_tensor(&tau), &*discrete_vector(&v), error_exactness(k));
        prop_assert!((matrix - oracle).abs() <= 1e-11 * (1.0 + oracle.abs()), "{matrix} vs {oracle}");
    }

    #[test]
    fn a_matches_quadrature_form(seed in any::<u64>(), eta in 0.1f64..100.0, mu in 0.1f64..5.0, lambda in 0.0f64..50.0) {
        let (mesh, s, _) = spaces(2, 1, 2);
        let ct = ComplianceTensor::new(mu, lambda, 2).unwrap();
        let eta = uniform_penalty(&mesh, eta);
        let a = assemble_a(&s, &ct, &eta).unwrap();
        let mut r = rng(seed);
        let sigma = random_field(&s, &mut r);
        let tau = random_field(&s, &mut r);
        let matrix = dot(&mul(&a, &sigma.values), &tau.values);
        let oracle = a_form(&mesh, &ct, &eta, &*discrete_tensor(&sigma), &*discrete_tensor(&tau), error_exactness(1));
        prop_assert!((matrix - oracle).abs() <= 1e-11 * (1.0 + oracle.abs()), "{matrix} vs {oracle}");
    }

    #[test]
    fn load_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let (_, _, u) = spaces(2, 1, 3);
        let p = problem_2d();
        let shift = seed as f64 / u64::MAX as f64;
        let f1 = assemble_load(&u, |x| p.f(x));
        let f2 = assemble_load(&u, |x| [shift + x[0], -x[1], 0.0]);
        let f = assemble_load(&u, |x| {
            let (a, b) = (p.f(x), [shift + x[0], -x[1], 0.0]);
            [alpha * a[0] + b[0], alpha * a[1] + b[1], 0.0]
        });
        for i in 0..f.len() {
            prop_assert!((f[i] - alpha * f1[i] - f2[i]).abs() < 1e-11);
        }
    }
}

#[test]
fn load_matches_quadrature_oracle() {
    let (mesh, _, u) = spaces(2, 1, 3);
    let p = problem_2d();
    let q = error_exactness(1) + 6;
    let f = assemble_load_with(&u, |x| p.f(x), q);
    let mut r = rng(11);
    for _ in 0..5 {
        let v = random_field(&u, &mut r);
        let oracle = load_form(&mesh, &p, &*discrete_vector(&v), q);
        let matrix = dot(&f, &v.values);
        assert!((matrix - oracle).abs() < 1e-11 * (1.0 + oracle.abs()), "{matrix} vs {oracle}");
    }
}

#[test]
fn exact_solution_is_consistent_and_discrete_solution_orthogonal() {
    for (problem, k, n) in [(problem_2d(), 1, 3), (elastidg::problem_3d(), 0, 1)] {
        let [orth_s, orth_u, cons_s, cons_u] = galerkin_defects(&problem, k, n, 4, 5);
        assert!(cons_s < 1e-9, "{} consistency (stress eq) {cons_s}", problem.name);
        assert!(cons_u < 1e-9, "{} consistency (displacement eq) {cons_u}", problem.name);
        assert!(orth_s < 1e-8, "{} orthogonality (stress eq) {orth_s}", problem.name);
        assert!(orth_u < 1e-8, "{} orthogonality (displacement eq) {orth_u}", problem.name);
    }
}
