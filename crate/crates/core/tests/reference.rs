mod common;

use common::*;
use elastidg::reference::{make_basis, make_quadrature};
use elastidg::sparse::norm2;
use rand::Rng;

#[test]
fn quadrature_is_exact_for_monomials() {
    for dim in [2, 3] {
        for q in 0..=12 {
            let d = quadrature_defect(dim, q);
            assert!(d < 1e-12, "dim {dim} exactness {q}: {d}");
        }
    }
}

#[test]
fn basis_is_orthonormal() {
    for dim in [2, 3] {
        for degree in 0..=4 {
            let basis = make_basis(dim, degree);
            let rule = make_quadrature(dim, 2 * degree);
            let t = basis.tabulate(&rule.points);
            // element mass matrices are |det J| times the identity
            for i in 0..t.size {
                for j in 0..t.size {
                    let g: f64 = (0..rule.len()).map(|q| rule.weights[q] * t.value(q, i) * t.value(q, j)).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - expect).abs() < 1e-12, "dim {dim} degree {degree} ({i},{j}): {g}");
                }
            }
        }
    }
}

#[test]
fn basis_gradients_match_finite_differences() {
    let mut r = rng(37);
    for dim in [2, 3] {
        let basis = make_basis(dim, 3);
        for _ in 0..10 {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(dim) {
                *c = r.random_range(0.05..0.3);
            }
            let g = basis.eval_gradients(&p);
            for axis in 0..dim {
                let (mut pp, mut pm) = (p, p);
                pp[axis] += 1e-6;
                pm[axis] -= 1e-6;
                let (vp, vm) = (basis.eval(&pp), basis.eval(&pm));
                for i in 0..g.len() {
                    let fd = (vp[i] - vm[i]) / 2e-6;
                    assert!((fd - g[i][axis]).abs() < 1e-6 * (1.0 + fd.abs()), "{fd} vs {}", g[i][axis]);
                }
            }
        }
    }
}

#[test]
fn facet_traces_agree_across_sides() {
    for (dim, n) in [(2, 3), (3, 2)] {
        let (mesh, _, _) = spaces(dim, 0, n);
        for (_, facet) in mesh.interior_facets() {
            let minus = facet.minus.as_ref().unwrap();
            let tp = mesh.facet_trace(facet, &facet.plus, 5);
            let tm = mesh.facet_trace(facet, minus, 5);
            let total: f64 = tp.weights.iter().sum();
            assert!((total - facet.measure).abs() < 1e-14);
            for i in 0..tp.points.len() {
                let xp = mesh.geometry[facet.plus.element].map(&tp.points[i]);
                let xm = mesh.geometry[minus.element].map(&tm.points[i]);
                let d: Vec<f64> = (0..3).map(|a| xp[a] - xm[a]).collect();
                assert!(norm2(&d) < 1e-14);
                assert_eq!(tp.weights[i], tm.weights[i]);
            }
        }
    }
}
