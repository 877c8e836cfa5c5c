//! Quadrature oracles shared by the integration tests and the acceptance run.
//!
//! Everything here evaluates the bilinear forms pointwise from field values,
//! independently of the sparse assembly, so agreement is a real check.
#![allow(dead_code)]

use std::sync::Arc;

use elastidg::forms::{
    assemble_a, assemble_b, assemble_load, compliance_apply, lifting_apply, tensor_traces, uniform_penalty,
    vector_traces,
};
use elastidg::mesh::Mesh;
use elastidg::problems::{stiffness_apply, ManufacturedProblem};
use elastidg::reference::{error_exactness, make_quadrature};
use elastidg::sparse::{asymmetry, dot, mul, mul_transpose, norm2};
use elastidg::tensor::{frobenius, from_voigt, inverse, mat_vec, sub, sym_components, Mat3, Vec3};
use elastidg::{build_space, build_uniform_mesh, ComplianceTensor, DgSpace, FieldCoefficients, ValueKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spaces(dim: usize, k: usize, n: usize) -> (Arc<Mesh>, DgSpace, DgSpace) {
    let mesh = Arc::new(build_uniform_mesh(dim, n).unwrap());
    let s = build_space(mesh.clone(), ValueKind::SymTensor, k + 1);
    let u = build_space(mesh.clone(), ValueKind::Vector, k);
    (mesh, s, u)
}

pub fn random_field<'s>(space: &'s DgSpace, rng: &mut ChaCha8Rng) -> FieldCoefficients<'s> {
    let values = (0..space.total_dofs).map(|_| rng.random_range(-1.0..1.0)).collect();
    space.coefficients(values).unwrap()
}

/// Value and divergence of a tensor field at a reference point of an element.
pub type TensorAt<'a> = dyn Fn(usize, &Vec3) -> (Mat3, Vec3) + 'a;
/// Value and gradient of a vector field at a reference point of an element.
pub type VectorAt<'a> = dyn Fn(usize, &Vec3) -> (Vec3, Mat3) + 'a;

pub fn discrete_tensor<'a>(f: &'a FieldCoefficients<'a>) -> Box<TensorAt<'a>> {
    Box::new(move |e, p| {
        let t = f.space.basis.tabulate(&[*p]);
        (f.tensor_at(e, &t, 0), f.divergence_at(e, &t, 0))
    })
}

pub fn discrete_vector<'a>(f: &'a FieldCoefficients<'a>) -> Box<VectorAt<'a>> {
    Box::new(move |e, p| {
        let t = f.space.basis.tabulate(&[*p]);
        (f.vector_at(e, &t, 0), f.gradient_at(e, &t, 0))
    })
}

pub fn exact_stress<'a>(mesh: &'a Mesh, p: &'a ManufacturedProblem) -> Box<TensorAt<'a>> {
    Box::new(move |e, r| {
        let x = mesh.geometry[e].map(r);
        (p.sigma(&x), p.f(&x))
    })
}

pub fn exact_displacement<'a>(mesh: &'a Mesh, p: &'a ManufacturedProblem) -> Box<VectorAt<'a>> {
    Box::new(move |e, r| {
        let x = mesh.geometry[e].map(r);
        (p.u(&x), p.grad_u(&x))
    })
}

pub fn frob(a: &Mat3, b: &Mat3) -> f64 {
    frobenius(a, b)
}

fn sym(g: &Mat3) -> Mat3 {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    s
}

/// `a_h(sigma, tau)` by quadrature of the given exactness.
pub fn a_form(mesh: &Mesh, ct: &ComplianceTensor, eta: &[f64], sigma: &TensorAt, tau: &TensorAt, q: usize) -> f64 {
    let rule = make_quadrature(mesh.dim, q);
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let det = mesh.geometry[e].det;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            total += w * det * frob(&compliance_apply(ct, &sigma(e, p).0), &tau(e, p).0);
        }
    }
    for (fi, facet) in mesh.interior_facets() {
        let minus = facet.minus.as_ref().unwrap();
        let tp = mesh.facet_trace(facet, &facet.plus, q);
        let tm = mesh.facet_trace(facet, minus, q);
        for i in 0..tp.points.len() {
            let js = tensor_traces(
                &sigma(facet.plus.element, &tp.points[i]).0,
                Some(&sigma(minus.element, &tm.points[i]).0),
                &facet.normal,
            )
            .jump;
            let jt = tensor_traces(
                &tau(facet.plus.element, &tp.points[i]).0,
                Some(&tau(minus.element, &tm.points[i]).0),
                &facet.normal,
            )
            .jump;
            total += eta[fi] / facet.diameter * tp.weights[i] * dot(&js, &jt);
        }
    }
    total
}

/// `b_h(tau, v)` by quadrature of the given exactness.
pub fn b_form(mesh: &Mesh, tau: &TensorAt, v: &VectorAt, q: usize) -> f64 {
    let rule = make_quadrature(mesh.dim, q);
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let det = mesh.geometry[e].det;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            total += w * det * dot(&tau(e, p).1, &v(e, p).0);
        }
    }
    for (_, facet) in mesh.interior_facets() {
        let minus = facet.minus.as_ref().unwrap();
        let tp = mesh.facet_trace(facet, &facet.plus, q);
        let tm = mesh.facet_trace(facet, minus, q);
        for i in 0..tp.points.len() {
            let (pe, me) = (facet.plus.element, minus.element);
            let jt = tensor_traces(&tau(pe, &tp.points[i]).0, Some(&tau(me, &tm.points[i]).0), &facet.normal).jump;
            let av = vector_traces(&v(pe, &tp.points[i]).0, Some(&v(me, &tm.points[i]).0), &facet.normal).average;
            total -= tp.weights[i] * dot(&jt, &av);
        }
    }
    total
}

/// `(f, v)` by quadrature.
pub fn load_form(mesh: &Mesh, p: &ManufacturedProblem, v: &VectorAt, q: usize) -> f64 {
    let rule = make_quadrature(mesh.dim, q);
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let g = &mesh.geometry[e];
        for (r, w) in rule.points.iter().zip(&rule.weights) {
            total += w * g.det * dot(&p.f(&g.map(r)), &v(e, r).0);
        }
    }
    total
}

/// Largest `|A - A^T|` entry of the assembled stress block.
pub fn symmetry_defect(dim: usize, k: usize, n: usize) -> f64 {
    let (mesh, s, _) = spaces(dim, k, n);
    let ct = ComplianceTensor::new(0.5, 1.0, dim).unwrap();
    let a = assemble_a(&s, &ct, &uniform_penalty(&mesh, 1.0)).unwrap();
    asymmetry(&a)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Largest relative error of the volume rule of exactness `q` over all
/// monomials of total degree `<= q` on the reference simplex.
pub fn quadrature_defect(dim: usize, q: usize) -> f64 {
    let rule = make_quadrature(dim, q);
    let mut worst: f64 = 0.0;
    let maxc = if dim == 3 { q } else { 0 };
    for a in 0..=q {
        for b in 0..=q - a {
            for c in 0..=maxc.min(q - a - b) {
                let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + dim);
                let approx = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32));
                worst = worst.max((approx - exact).abs() / exact);
            }
        }
    }
    worst
}

fn random_sym(dim: usize, rng: &mut ChaCha8Rng) -> Mat3 {
    let v: Vec<f64> = (0..sym_components(dim)).map(|_| rng.random_range(-1.0..1.0)).collect();
    from_voigt(dim, &v)
}

fn random_vec(dim: usize, rng: &mut ChaCha8Rng) -> Vec3 {
    let mut v = [0.0; 3];
    for x in v.iter_mut().take(dim) {
        *x = rng.random_range(-1.0..1.0);
    }
    v
}

/// Pointwise defect of `{tau}:[[v]] + [tau].{v} = tau+ n+ . v+ + tau- n- . v-`
/// and of `[tau] = (tau+ - tau-) n+` for random data.
pub fn jump_average_defect(samples: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let dim = 2 + s % 2;
        let mut n = random_vec(dim, &mut rng);
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        n.iter_mut().for_each(|x| *x /= len);
        let (tp, tm) = (random_sym(dim, &mut rng), random_sym(dim, &mut rng));
        let (vp, vm) = (random_vec(dim, &mut rng), random_vec(dim, &mut rng));
        let tt = tensor_traces(&tp, Some(&tm), &n);
        let vt = vector_traces(&vp, Some(&vm), &n);
        let lhs = frob(&tt.average, &vt.tensor_jump) + dot(&tt.jump, &vt.average);
        let minus_n = [-n[0], -n[1], -n[2]];
        let rhs = dot(&mat_vec(&tp, &n), &vp) + dot(&mat_vec(&tm, &minus_n), &vm);
        worst = worst.max((lhs - rhs).abs());
        let diff = elastidg::forms::jump_from_difference(&tp, &tm, &n);
        worst = worst.max(sub(&diff, &tt.jump).iter().map(|x| x.abs()).fold(0.0, f64::max));
        // boundary: one-sided traces
        let tb = tensor_traces(&tp, None, &n);
        let vb = vector_traces(&vp, None, &n);
        worst = worst.max((frob(&tb.average, &vb.tensor_jump) - dot(&mat_vec(&tp, &n), &vp)).abs());
    }
    worst
}

/// Relative defect of the broken integration-by-parts identity
/// `sum_K (div tau, v) + (tau, eps(v)) = int_{E} {tau}:[[v]] + int_{E^i} [tau].{v}`
/// for random discrete `tau`, `v`.
pub fn ibp_defect(dim: usize, k: usize, n: usize, seed: u64) -> f64 {
    let (mesh, s, u) = spaces(dim, k, n);
    let mut r = rng(seed);
    let tau = random_field(&s, &mut r);
    let v = random_field(&u, &mut r);
    let (tf, vf) = (discrete_tensor(&tau), discrete_vector(&v));
    let q = error_exactness(k);
    let rule = make_quadrature(dim, q);
    let (mut lhs, mut scale) = (0.0, 0.0);
    for e in 0..mesh.num_elements() {
        let det = mesh.geometry[e].det;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let (t, dt) = tf(e, p);
            let (vv, g) = vf(e, p);
            let a = dot(&dt, &vv);
            let b = frob(&t, &sym(&g));
            lhs += w * det * (a + b);
            scale += w * det * (a.abs() + b.abs());
        }
    }
    let mut rhs = 0.0;
    for facet in &mesh.facets {
        let tp = mesh.facet_trace(facet, &facet.plus, q);
        let tm = facet.minus.as_ref().map(|m| mesh.facet_trace(facet, m, q));
        for i in 0..tp.points.len() {
            let pe = facet.plus.element;
            let (t_plus, v_plus) = (tf(pe, &tp.points[i]).0, vf(pe, &tp.points[i]).0);
            let minus = facet.minus.as_ref().map(|m| {
                let pt = &tm.as_ref().unwrap().points[i];
                (tf(m.element, pt).0, vf(m.element, pt).0)
            });
            let tt = tensor_traces(&t_plus, minus.as_ref().map(|m| &m.0), &facet.normal);
            let vt = vector_traces(&v_plus, minus.as_ref().map(|m| &m.1), &facet.normal);
            rhs += tp.weights[i] * frob(&tt.average, &vt.tensor_jump);
            if facet.is_interior() {
                rhs += tp.weights[i] * dot(&tt.jump, &vt.average);
            }
        }
    }
    (lhs - rhs).abs() / scale.max(1e-300)
}

/// Solves the manufactured problem and returns `(sigma_h, u_h)` coefficients.
pub fn solve(problem: &ManufacturedProblem, s: &DgSpace, u: &DgSpace, eta: f64) -> (Vec<f64>, Vec<f64>) {
    let mesh = &s.mesh;
    let ct = ComplianceTensor::new(problem.mu, problem.lambda, mesh.dim).unwrap();
    let eta = uniform_penalty(mesh, eta);
    let sys = elastidg::forms::assemble_system(s, u, &ct, &eta, |x| problem.f(x)).unwrap();
    let sol = elastidg::solve_saddle(&sys, &Default::default()).unwrap();
    (sol.stress, sol.displacement)
}

/// Consistency of the exact solution and Galerkin orthogonality of the
/// discrete one, over `trials` random test functions. Returns the largest
/// `|a(sigma - sigma_h, tau) + b(tau, u - u_h)| / ||tau||` and
/// `|b(sigma - sigma_h, v)| / ||v||`, together with the same quantities for
/// the exact solution alone (consistency).
pub fn galerkin_defects(problem: &ManufacturedProblem, k: usize, n: usize, trials: usize, seed: u64) -> [f64; 4] {
    let (mesh, s, u) = spaces(problem.dim, k, n);
    let ct = ComplianceTensor::new(problem.mu, problem.lambda, problem.dim).unwrap();
    let eta = uniform_penalty(&mesh, 1.0);
    let (sh, uh) = solve(problem, &s, &u, 1.0);
    let a = assemble_a(&s, &ct, &eta).unwrap();
    let b = assemble_b(&s, &u).unwrap();
    let f = assemble_load(&u, |x| problem.f(x));
    let q = error_exactness(k) + 4;
    let (se, ue) = (exact_stress(&mesh, problem), exact_displacement(&mesh, problem));
    let mut r = rng(seed);
    let mut out = [0.0f64; 4];
    for _ in 0..trials {
        let tau = random_field(&s, &mut r);
        let v = random_field(&u, &mut r);
        let (tf, vf) = (discrete_tensor(&tau), discrete_vector(&v));
        let tn = norm2(&tau.values);
        let vn = norm2(&v.values);
        let exact_stress_eq = a_form(&mesh, &ct, &eta, &*se, &*tf, q) + b_form(&mesh, &*tf, &*ue, q);
        let exact_disp_eq = b_form(&mesh, &*se, &*vf, q) - load_form(&mesh, problem, &*vf, q);
        let discrete_stress_eq = dot(&mul(&a, &sh), &tau.values) + dot(&mul_transpose(&b, &uh), &tau.values);
        let discrete_disp_eq = dot(&mul(&b, &sh), &v.values) - dot(&f, &v.values);
        out[0] = out[0].max((exact_stress_eq - discrete_stress_eq).abs() / tn);
        out[1] = out[1].max((exact_disp_eq - discrete_disp_eq).abs() / vn);
        out[2] = out[2].max(exact_stress_eq.abs() / tn);
        out[3] = out[3].max(exact_disp_eq.abs() / vn);
    }
    out
}

/// Largest `|A(C eps) - eps|` over random symmetric strains.
pub fn round_trip_defect(samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let dim = 2 + i % 2;
        let mu = r.random_range(0.1..10.0);
        let lambda = r.random_range(0.0..100.0);
        let ct = ComplianceTensor::new(mu, lambda, dim).unwrap();
        let eps = random_sym(dim, &mut r);
        let back = compliance_apply(&ct, &stiffness_apply(mu, lambda, dim, &eps));
        for a in 0..3 {
            for b in 0..3 {
                worst = worst.max((back[a][b] - eps[a][b]).abs());
            }
        }
    }
    worst
}

/// Largest `|f - div sigma_FD| / max(1, |f|)` with central differences of step `1e-5`.
pub fn fd_defect(problem: &ManufacturedProblem, samples: usize, seed: u64) -> f64 {
    let dim = problem.dim;
    let mut r = rng(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut x = [0.0; 3];
        for c in x.iter_mut().take(dim) {
            *c = r.random_range(0.05..0.95);
        }
        let f = problem.f(&x);
        let scale = f.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..dim {
            let mut div = 0.0;
            for j in 0..dim {
                let (mut xp, mut xm) = (x, x);
                xp[j] += h;
                xm[j] -= h;
                div += (problem.sigma(&xp)[i][j] - problem.sigma(&xm)[i][j]) / (2.0 * h);
            }
            worst = worst.max((div - f[i]).abs() / scale);
        }
    }
    worst
}

/// Largest `|(r_e(w), v) + <w, {v}>_e|` over every facet of the mesh,
/// random affine `w` and `trials` random discrete `v`, relative to `||w||_e ||v||`.
pub fn lifting_identity_defect(dim: usize, k: usize, n: usize, trials: usize, seed: u64) -> f64 {
    let (mesh, _, u) = spaces(dim, k, n);
    let mut r = rng(seed);
    let q = error_exactness(k);
    let rule = make_quadrature(dim, q);
    let mut worst: f64 = 0.0;
    for fi in 0..mesh.facets.len() {
        let facet = &mesh.facets[fi];
        let c: Vec<f64> = (0..12).map(|_| r.random_range(-1.0..1.0)).collect();
        let w = move |x: &Vec3| -> Vec3 {
            let mut out = [0.0; 3];
            for i in 0..dim {
                out[i] = c[4 * i] + c[4 * i + 1] * x[0] + c[4 * i + 2] * x[1] + c[4 * i + 3] * x[2];
            }
            out
        };
        let lifted = lifting_apply(&u, fi, w.clone()).unwrap();
        let lf = discrete_vector(&lifted);
        for _ in 0..trials {
            let v = random_field(&u, &mut r);
            let vf = discrete_vector(&v);
            let mut vol = 0.0;
            for side in facet.sides() {
                let det = mesh.geometry[side.element].det;
                for (p, wt) in rule.points.iter().zip(&rule.weights) {
                    vol += wt * det * dot(&lf(side.element, p).0, &vf(side.element, p).0);
                }
            }
            let tp = mesh.facet_trace(facet, &facet.plus, q);
            let tm = facet.minus.as_ref().map(|m| mesh.facet_trace(facet, m, q));
            let g = &mesh.geometry[facet.plus.element];
            let (mut surf, mut wn) = (0.0, 0.0);
            for i in 0..tp.points.len() {
                let x = g.map(&tp.points[i]);
                let vp = vf(facet.plus.element, &tp.points[i]).0;
                let vm = facet
                    .minus
                    .as_ref()
                    .map(|m| vf(m.element, &tm.as_ref().unwrap().points[i]).0);
                let avg = vector_traces(&vp, vm.as_ref(), &facet.normal).average;
                surf += tp.weights[i] * dot(&w(&x), &avg);
                wn += tp.weights[i] * dot(&w(&x), &w(&x));
            }
            worst = worst.max((vol + surf).abs() / (wn.sqrt() * norm2(&v.values)));
        }
    }
    worst
}

/// Maps a physical point into the reference coordinates of an element.
pub fn to_reference(mesh: &Mesh, e: usize, x: &Vec3) -> Vec3 {
    let g = &mesh.geometry[e];
    let inv = inverse(&g.jacobian);
    mat_vec(&inv, &sub(x, &g.origin))
}

/// Largest error norm of the discrete solution of `problem` with displacement
/// degree `k` on the `n`-mesh.
pub fn exactness_error(problem: &ManufacturedProblem, k: usize, n: usize) -> f64 {
    let (mesh, s, u) = spaces(problem.dim, k, n);
    let (sh, uh) = solve(problem, &s, &u, 1.0);
    let r = elastidg::analysis::compute_errors(
        problem,
        &s.coefficients(sh).unwrap(),
        &u.coefficients(uh).unwrap(),
        &uniform_penalty(&mesh, 1.0),
        n,
    )
    .unwrap();
    [r.err_u_l2, r.err_sigma_l2, r.err_div, r.err_star, r.err_a, r.err_u_h1]
        .into_iter()
        .fold(0.0, f64::max)
}

/// The exactness cases: every `(label, error)` pair. Nonzero polynomial
/// solutions vanishing on the boundary start at the bubble, of degree `2 d`.
pub fn exactness_cases() -> Vec<(String, f64)> {
    use elastidg::problems::{bubble_problem, zero_problem};
    let mut out = Vec::new();
    for dim in [2, 3] {
        for k in 0..=3 {
            let n = if dim == 2 { 3 } else { 1 };
            out.push((format!("d={dim} k={k} u=0"), exactness_error(&zero_problem(dim, 0.5, 1.0), k, n)));
        }
    }
    for (dim, k, n) in [(2, 4, 2), (2, 5, 1), (3, 6, 1)] {
        let p = bubble_problem(dim, [1.0, -2.0, 0.5], 0.5, 1.0);
        out.push((format!("d={dim} k={k} bubble n={n}"), exactness_error(&p, k, n)));
    }
    out
}
