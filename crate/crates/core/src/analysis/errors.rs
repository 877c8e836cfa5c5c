//! Discretisation errors against a manufactured solution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{ComplianceTensor, FacetQuadrature};
use crate::problems::ManufacturedProblem;
use crate::reference::{error_exactness, make_quadrature};
use crate::spaces::{FieldCoefficients, ValueKind};
use crate::tensor::{frobenius, mat_sub, mat_vec, norm, sub, Mat3};

/// Errors of one discrete solution. All norms are over the whole domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Reciprocal of the refinement parameter (number of cells per side).
    pub one_over_h: usize,
    /// Largest element diameter.
    pub h: f64,
    pub dofs_sigma: usize,
    pub dofs_u: usize,
    pub err_u_l2: f64,
    pub err_sigma_l2: f64,
    /// `||div_h (sigma - sigma_h)||`.
    pub err_div: f64,
    /// `(sum_e eta_e / h_e ||[sigma - sigma_h]||_e^2)^{1/2}` over interior facets.
    pub err_jump: f64,
    /// `(err_sigma_l2^2 + err_div^2 + err_jump^2)^{1/2}`.
    pub err_star: f64,
    /// `(A (sigma - sigma_h), sigma - sigma_h)^{1/2}`.
    pub err_a: f64,
    /// Broken H1 seminorm of `u - u_h`.
    pub err_u_h1: f64,
}

/// Evaluates every error norm with the error quadrature of the displacement degree.
///
/// The exact divergence is taken as `f`; the exact stress has no jumps.
pub fn compute_errors(
    problem: &ManufacturedProblem,
    stress: &FieldCoefficients<'_>,
    displacement: &FieldCoefficients<'_>,
    eta: &[f64],
    one_over_h: usize,
) -> Result<ErrorReport> {
    let ss = stress.space;
    let us = displacement.space;
    if ss.kind != ValueKind::SymTensor || us.kind != ValueKind::Vector {
        return Err(Error::DimensionMismatch("expected (stress, displacement) fields".into()));
    }
    if !std::sync::Arc::ptr_eq(&ss.mesh, &us.mesh) {
        return Err(Error::DimensionMismatch("fields live on different meshes".into()));
    }
    let mesh = &*ss.mesh;
    let dim = mesh.dim;
    if problem.dim != dim {
        return Err(Error::DimensionMismatch("problem and mesh dimensions differ".into()));
    }
    if eta.len() != mesh.facets.len() {
        return Err(Error::DimensionMismatch("one penalty per facet expected".into()));
    }
    let ct = ComplianceTensor::new(problem.mu, problem.lambda, dim)?;
    let exactness = error_exactness(us.degree);
    let rule = make_quadrature(dim, exactness);
    let ts = ss.basis.tabulate(&rule.points);
    let tu = us.basis.tabulate(&rule.points);

    // [u, sigma, div, A, H1]
    let volume: [f64; 5] = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let geo = &mesh.geometry[e];
            let mut acc = [0.0; 5];
            for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let x = geo.map(p);
                let wq = w * geo.det;
                let du = sub(&problem.u(&x), &displacement.vector_at(e, &tu, q));
                let ds: Mat3 = mat_sub(&problem.sigma(&x), &stress.tensor_at(e, &ts, q));
                let dd = sub(&problem.f(&x), &stress.divergence_at(e, &ts, q));
                let dg = mat_sub(&problem.grad_u(&x), &displacement.gradient_at(e, &tu, q));
                let a_ds = ct.apply(&ds);
                acc[0] += wq * norm(&du).powi(2);
                acc[1] += wq * frobenius(&ds, &ds);
                acc[2] += wq * norm(&dd).powi(2);
                acc[3] += wq * frobenius(&a_ds, &ds);
                acc[4] += wq * frobenius(&dg, &dg);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([0.0; 5], |mut s, a| {
            for i in 0..5 {
                s[i] += a[i];
            }
            s
        });

    let interior: Vec<usize> = mesh.interior_facets().map(|(i, _)| i).collect();
    let jump2: f64 = interior
        .par_iter()
        .map(|&fi| {
            let facet = &mesh.facets[fi];
            let fq = FacetQuadrature::new(mesh, facet, &ss.basis, exactness);
            let (p, m) = (facet.plus.element, facet.minus.unwrap().element);
            let mut acc = 0.0;
            for (q, w) in fq.weights.iter().enumerate() {
                let diff = mat_sub(&stress.tensor_at(p, fq.side(0), q), &stress.tensor_at(m, fq.side(1), q));
                acc += w * norm(&mat_vec(&diff, &facet.normal)).powi(2);
            }
            eta[fi] / facet.diameter * acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();

    let [u2, s2, d2, a2, h2] = volume.map(|v| v.max(0.0));
    Ok(ErrorReport {
        one_over_h,
        h: mesh.h(),
        dofs_sigma: ss.total_dofs,
        dofs_u: us.total_dofs,
        err_u_l2: u2.sqrt(),
        err_sigma_l2: s2.sqrt(),
        err_div: d2.sqrt(),
        err_jump: jump2.sqrt(),
        err_star: (s2 + d2 + jump2).sqrt(),
        err_a: a2.sqrt(),
        err_u_h1: h2.sqrt(),
    })
}
