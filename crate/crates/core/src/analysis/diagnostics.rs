//! Dense well-posedness diagnostics for coarse meshes: the discrete inf-sup
//! constant, the ellipticity constant of `a_h` on the kernel of `B`, and the
//! facet lifting constant.

use faer::sparse::SparseColMat;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{divergence_blocks, lifting_apply, penalized_mass, stress_exactness, FacetQuadrature};
use crate::spaces::{build_space, DgSpace, ValueKind};
use crate::tensor::{dot, voigt_weight, Vec3};

/// Dense problems larger than this are refused.
pub const MAX_DENSE_DOFS: usize = 6000;

/// Relative size below which a singular value or eigenvalue counts as zero.
const KERNEL_TOLERANCE: f64 = 1e-10;

fn dense(m: &SparseColMat<usize, f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(m.nrows(), m.ncols());
    for (r, c, v) in crate::sparse::entries(m) {
        out[(r, c)] += v;
    }
    out
}

fn check_dense(n: usize) -> Result<()> {
    if n > MAX_DENSE_DOFS {
        return Err(Error::Diagnostic(format!(
            "{n} unknowns is too many for a dense diagnostic (limit {MAX_DENSE_DOFS})"
        )));
    }
    Ok(())
}

/// Gram matrix of the star norm
/// `||tau||^2 + ||div_h tau||^2 + sum_e eta_e / h_e ||[tau]||_e^2`.
pub fn star_gram(stress_space: &DgSpace, eta: &[f64]) -> Result<SparseColMat<usize, f64>> {
    let dim = stress_space.dim();
    let nc = stress_space.components;
    let frobenius: Vec<Vec<f64>> = (0..nc)
        .map(|c| (0..nc).map(|c2| if c == c2 { voigt_weight(dim, c) } else { 0.0 }).collect())
        .collect();
    let mut gram = penalized_mass(stress_space, &frobenius, eta)?;
    // div_h maps degree p into degree p - 1, where the orthonormal basis makes
    // ||div tau||_K^2 = |D_K tau|^2 / |det J_K|
    let target = build_space(
        stress_space.mesh.clone(),
        ValueKind::Vector,
        stress_space.degree.saturating_sub(1),
    );
    let blocks = divergence_blocks(stress_space, &target, stress_exactness(stress_space.degree));
    let (rows, cols) = (target.dofs_per_element, stress_space.dofs_per_element);
    for (e, d) in blocks.iter().enumerate() {
        let inv_det = 1.0 / stress_space.mesh.geometry[e].det;
        let block = gram.block_mut(e, e);
        for i in 0..cols {
            for j in 0..cols {
                let v: f64 = (0..rows).map(|r| d[r * cols + i] * d[r * cols + j]).sum();
                block[i * cols + j] += inv_det * v;
            }
        }
    }
    Ok(gram.to_csc())
}

/// Diagonal of the displacement mass matrix (`|det J_K|` for every unknown of `K`).
pub fn displacement_mass(displacement_space: &DgSpace) -> Vec<f64> {
    let mesh = &displacement_space.mesh;
    (0..mesh.num_elements())
        .flat_map(|e| std::iter::repeat_n(mesh.geometry[e].det, displacement_space.dofs_per_element))
        .collect()
}

/// `beta_h`, the smallest singular value of `B` measured in the star norm on
/// stresses and the L2 norm on displacements: `beta_h^2` is the smallest
/// eigenvalue of `B G^{-1} B^T w = beta^2 M w`.
///
/// `B` is expected to be onto; a kernel of `B^T` is reported as an error.
pub fn infsup_constant(
    star_gram: &SparseColMat<usize, f64>,
    b: &SparseColMat<usize, f64>,
    mass: &[f64],
) -> Result<f64> {
    let (nu, ns) = (b.nrows(), b.ncols());
    if star_gram.nrows() != ns || star_gram.ncols() != ns || mass.len() != nu {
        return Err(Error::DimensionMismatch("inf-sup operands".into()));
    }
    check_dense(ns)?;
    let g = dense(star_gram);
    let bd = dense(b);
    let llt = g
        .llt(Side::Lower)
        .map_err(|e| Error::Diagnostic(format!("star-norm Gram matrix is not positive definite: {e:?}")))?;
    let x = llt.solve(bd.transpose());
    let s = &bd * &x;
    let scaled = Mat::<f64>::from_fn(nu, nu, |i, j| {
        0.5 * (s[(i, j)] + s[(j, i)]) / (mass[i] * mass[j]).sqrt()
    });
    let eig = scaled
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Diagnostic(format!("eigensolver failed: {e:?}")))?;
    let max = eig.last().copied().unwrap_or(0.0);
    let kernel = eig.iter().filter(|&&l| l <= KERNEL_TOLERANCE * max).count();
    if kernel > 0 {
        return Err(Error::Diagnostic(format!(
            "B^T has a kernel of dimension {kernel}; B is not onto"
        )));
    }
    Ok(eig[0].sqrt())
}

/// `alpha_h = min a_h(tau, tau) / ||tau||_*^2` over the kernel of `B`,
/// computed from an orthonormal kernel basis given by the SVD of `B`.
pub fn kellipticity_constant(
    a: &SparseColMat<usize, f64>,
    b: &SparseColMat<usize, f64>,
    star_gram: &SparseColMat<usize, f64>,
) -> Result<f64> {
    let ns = a.nrows();
    if a.ncols() != ns || b.ncols() != ns || star_gram.nrows() != ns {
        return Err(Error::DimensionMismatch("K-ellipticity operands".into()));
    }
    check_dense(ns)?;
    let svd = dense(b)
        .svd()
        .map_err(|e| Error::Diagnostic(format!("SVD of B failed: {e:?}")))?;
    let sv = svd.S().column_vector();
    let smax = if sv.nrows() > 0 { sv[0] } else { 0.0 };
    let rank = (0..sv.nrows()).filter(|&i| sv[i] > KERNEL_TOLERANCE * smax).count();
    if rank == ns {
        return Err(Error::Diagnostic("B has an empty kernel".into()));
    }
    let z = svd.V().subcols(rank, ns - rank).to_owned();
    let az = z.transpose() * dense(a) * &z;
    let gz = z.transpose() * dense(star_gram) * &z;
    // reduce to a standard problem through the eigenbasis of the kernel Gram matrix
    let geig = gz
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Diagnostic(format!("eigensolver failed: {e:?}")))?;
    let lambda = geig.S().column_vector();
    let m = lambda.nrows();
    for i in 0..m {
        if lambda[i] <= 0.0 {
            return Err(Error::Diagnostic("star norm degenerates on the kernel of B".into()));
        }
    }
    let w = Mat::<f64>::from_fn(m, m, |i, j| geig.U()[(i, j)] / lambda[j].sqrt());
    let c = w.transpose() * &az * &w;
    let c = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let eig = c
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Diagnostic(format!("eigensolver failed: {e:?}")))?;
    Ok(eig[0])
}

/// Largest observed `||r_e(w)|| h_e^{1/2} / ||w||_e` over every facet and
/// `samples` random affine `w` per facet (seeded, hence reproducible).
pub fn lifting_constant(displacement_space: &DgSpace, samples: usize, seed: u64) -> Result<f64> {
    let mesh = &*displacement_space.mesh;
    let dim = mesh.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exactness = stress_exactness(displacement_space.degree + 1) + 2;
    let mut worst: f64 = 0.0;
    for (fi, facet) in mesh.facets.iter().enumerate() {
        let fq = FacetQuadrature::new(mesh, facet, &displacement_space.basis, exactness);
        for _ in 0..samples {
            let mut coeff = [[0.0; 4]; 3];
            for row in coeff.iter_mut().take(dim) {
                for c in row.iter_mut().take(dim + 1) {
                    *c = rng.random_range(-1.0..1.0);
                }
            }
            let w = |x: &Vec3| -> Vec3 {
                let mut out = [0.0; 3];
                for r in 0..dim {
                    out[r] = coeff[r][dim] + (0..dim).map(|j| coeff[r][j] * x[j]).sum::<f64>();
                }
                out
            };
            let w_norm2: f64 = fq.points.iter().zip(&fq.weights).map(|(p, wt)| wt * dot(&w(p), &w(p))).sum();
            if w_norm2 == 0.0 {
                continue;
            }
            let lifted = lifting_apply(displacement_space, fi, w)?;
            // orthonormal basis: ||v||_K^2 = |det J_K| |coefficients|^2
            let r_norm2: f64 = facet
                .sides()
                .map(|side| {
                    let det = mesh.geometry[side.element].det;
                    det * lifted.element(side.element).iter().map(|c| c * c).sum::<f64>()
                })
                .sum();
            worst = worst.max((r_norm2 / w_norm2).sqrt() * facet.diameter.sqrt());
        }
    }
    Ok(worst)
}
