//! Assembly of the stress–stress block `A`, the coupling block `B` and the load.
//!
//! With the mesh-wide sign convention `n- = -n+`, a basis function living on
//! side `s` of an interior facet contributes `sgn(s) phi tau n+` to the jump
//! `[tau]`, where `sgn(+) = 1` and `sgn(-) = -1`.
//!
//! Boundary facets carry no terms: the displacement trace is zero there, so
//! the homogeneous Dirichlet condition is natural in this formulation.

use faer::sparse::SparseColMat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{Facet, Mesh};
use crate::reference::{assembly_exactness, make_quadrature, BasisTable, ScalarBasis};
use crate::spaces::{DgSpace, ValueKind};
use crate::sparse::BlockSparse;
use crate::tensor::{mat_vec, voigt_pairs, voigt_unit, Vec3};

use super::compliance::ComplianceTensor;

/// Assembled blocks of `[A B^T; B 0] (sigma; u) = (0; F)`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    /// Stress–stress block, `n_sigma x n_sigma`, exactly symmetric.
    pub a: SparseColMat<usize, f64>,
    /// `B_ij = b_h(phi_j^sigma, phi_i^u)`, `n_u x n_sigma`.
    pub b: SparseColMat<usize, f64>,
    /// `F_i = (f, phi_i^u)`.
    pub load: Vec<f64>,
    /// Unknowns per element in the stress and displacement blocks; both blocks
    /// are element-major with the same element numbering.
    pub dofs_per_element: (usize, usize),
}

impl SparseSystem {
    pub fn stress_dofs(&self) -> usize {
        self.a.nrows()
    }

    pub fn displacement_dofs(&self) -> usize {
        self.b.nrows()
    }
}

/// `eta_e` on every facet; only interior entries are read.
pub fn uniform_penalty(mesh: &Mesh, eta: f64) -> Vec<f64> {
    vec![eta; mesh.facets.len()]
}

/// Quadrature exactness for a stress space of the given degree (`k + 1`).
pub(crate) fn stress_exactness(stress_degree: usize) -> usize {
    assembly_exactness(stress_degree.saturating_sub(1))
}

/// Facet quadrature shared by both sides: physical weights and basis tables
/// for the plus and (if present) minus element.
pub(crate) struct FacetQuadrature {
    pub weights: Vec<f64>,
    pub points: Vec<Vec3>,
    pub plus: BasisTable,
    pub minus: Option<BasisTable>,
}

impl FacetQuadrature {
    pub fn new(mesh: &Mesh, facet: &Facet, basis: &ScalarBasis, exactness: usize) -> Self {
        let tp = mesh.facet_trace(facet, &facet.plus, exactness);
        let plus = basis.tabulate(&tp.points);
        let geo = &mesh.geometry[facet.plus.element];
        let points = tp.points.iter().map(|p| geo.map(p)).collect();
        let minus = facet.minus.as_ref().map(|side| {
            let tm = mesh.facet_trace(facet, side, exactness);
            basis.tabulate(&tm.points)
        });
        FacetQuadrature {
            weights: tp.weights,
            points,
            plus,
            minus,
        }
    }

    pub fn side(&self, s: usize) -> &BasisTable {
        if s == 0 {
            &self.plus
        } else {
            self.minus.as_ref().expect("minus side of a boundary facet")
        }
    }

}

const SIGN: [f64; 2] = [1.0, -1.0];

fn check_same_mesh(a: &DgSpace, b: &DgSpace) -> Result<()> {
    if !std::sync::Arc::ptr_eq(&a.mesh, &b.mesh) {
        return Err(Error::DimensionMismatch("spaces live on different meshes".into()));
    }
    Ok(())
}

/// `A_ij = a_h(phi_j, phi_i)` with the compliance term on every element and
/// the penalty `eta_e / h_e [sigma].[tau]` on interior facets.
pub fn assemble_a(
    stress_space: &DgSpace,
    ct: &ComplianceTensor,
    eta: &[f64],
) -> Result<SparseColMat<usize, f64>> {
    if ct.dim != stress_space.dim() {
        return Err(Error::DimensionMismatch("compliance tensor dimension".into()));
    }
    Ok(penalized_mass(stress_space, &ct.voigt_matrix(), eta)?.to_csc())
}

/// Element plus facet-neighbour blocks of every element, sorted.
pub(crate) fn element_adjacency(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = (0..mesh.num_elements()).map(|e| vec![e]).collect();
    for (_, facet) in mesh.interior_facets() {
        let (p, m) = (facet.plus.element, facet.minus.unwrap().element);
        adj[p].push(m);
        adj[m].push(p);
    }
    adj
}

/// Interior facets are processed in parallel chunks of this size and
/// accumulated in order, which bounds the memory held by dense facet blocks.
const FACET_CHUNK: usize = 512;

/// `sum_K (M tau, tau)_K + sum_e eta_e / h_e <[sigma], [tau]>_e`, where
/// `material[c][c']` is the pointwise bilinear form on Voigt unit tensors.
pub(crate) fn penalized_mass(
    stress_space: &DgSpace,
    material: &[Vec<f64>],
    eta: &[f64],
) -> Result<BlockSparse> {
    if stress_space.kind != ValueKind::SymTensor {
        return Err(Error::DimensionMismatch("A needs a symmetric-tensor space".into()));
    }
    let mesh = &*stress_space.mesh;
    if eta.len() != mesh.facets.len() {
        return Err(Error::DimensionMismatch(format!(
            "penalty has {} entries for {} facets",
            eta.len(),
            mesh.facets.len()
        )));
    }
    let nb = stress_space.basis_size();
    let nc = stress_space.components;
    let dpe = stress_space.dofs_per_element;
    let exactness = stress_exactness(stress_space.degree);
    let ne = mesh.num_elements();
    let mut mat = BlockSparse::new(element_adjacency(mesh), ne, dpe, dpe);

    for e in 0..ne {
        let det = mesh.geometry[e].det;
        let block = mat.block_mut(e, e);
        for c in 0..nc {
            for c2 in 0..nc {
                let v = det * material[c][c2];
                for a in 0..nb {
                    block[(c * nb + a) * dpe + c2 * nb + a] += v;
                }
            }
        }
    }
    let interior: Vec<usize> = mesh.interior_facets().map(|(i, _)| i).collect();
    let local = 2 * dpe;
    for chunk in interior.chunks(FACET_CHUNK) {
        let blocks: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|&fi| penalty_block(mesh, &mesh.facets[fi], &stress_space.basis, nc, eta[fi], exactness))
            .collect();
        for (&fi, block) in chunk.iter().zip(&blocks) {
            let facet = &mesh.facets[fi];
            let elems = [facet.plus.element, facet.minus.unwrap().element];
            for s in 0..2 {
                for s2 in 0..2 {
                    mat.add_block(elems[s], elems[s2], block, local, s2 * dpe, s * dpe);
                }
            }
        }
    }
    Ok(mat)
}

/// Dense `(2 dpe) x (2 dpe)` penalty block of one interior facet, local index
/// `side * dpe + c * nb + a`.
fn penalty_block(
    mesh: &Mesh,
    facet: &Facet,
    basis: &ScalarBasis,
    nc: usize,
    eta: f64,
    exactness: usize,
) -> Vec<f64> {
    let dim = mesh.dim;
    let nb = basis.size();
    let fq = FacetQuadrature::new(mesh, facet, basis, exactness);
    // (E_c n) . (E_c' n), symmetric in (c, c')
    let en: Vec<Vec3> = (0..nc).map(|c| mat_vec(&voigt_unit(dim, c), &facet.normal)).collect();
    let mut comp = vec![0.0; nc * nc];
    for c in 0..nc {
        for c2 in 0..=c {
            let v = crate::tensor::dot(&en[c], &en[c2]);
            comp[c * nc + c2] = v;
            comp[c2 * nc + c] = v;
        }
    }
    // signed scalar trace products, symmetric in (s a, s' a')
    let m = 2 * nb;
    let mut phi = vec![0.0; m * m];
    for i in 0..m {
        let (s, a) = (i / nb, i % nb);
        for j in 0..=i {
            let (s2, a2) = (j / nb, j % nb);
            let (ts, ts2) = (fq.side(s), fq.side(s2));
            let v: f64 = fq
                .weights
                .iter()
                .enumerate()
                .map(|(q, w)| w * ts.value(q, a) * ts2.value(q, a2))
                .sum::<f64>()
                * SIGN[s]
                * SIGN[s2];
            phi[i * m + j] = v;
            phi[j * m + i] = v;
        }
    }
    let scale = eta / facet.diameter;
    let dpe = nc * nb;
    let local = 2 * dpe;
    let mut block = vec![0.0; local * local];
    for s in 0..2 {
        for c in 0..nc {
            for a in 0..nb {
                let i = s * dpe + c * nb + a;
                for s2 in 0..2 {
                    for c2 in 0..nc {
                        let cc = comp[c * nc + c2];
                        if cc == 0.0 {
                            continue;
                        }
                        for a2 in 0..nb {
                            let j = s2 * dpe + c2 * nb + a2;
                            block[i * local + j] = scale * cc * phi[(s * nb + a) * m + s2 * nb + a2];
                        }
                    }
                }
            }
        }
    }
    block
}

/// `B_ij = b_h(phi_j^sigma, phi_i^u) = (div_h phi_j, phi_i) - <[phi_j], {phi_i}>_{E_h^i}`.
pub fn assemble_b(
    stress_space: &DgSpace,
    displacement_space: &DgSpace,
) -> Result<SparseColMat<usize, f64>> {
    check_same_mesh(stress_space, displacement_space)?;
    if stress_space.kind != ValueKind::SymTensor || displacement_space.kind != ValueKind::Vector {
        return Err(Error::DimensionMismatch(
            "B pairs a symmetric-tensor space with a vector space".into(),
        ));
    }
    let mesh = &*stress_space.mesh;
    let exactness = stress_exactness(stress_space.degree);
    let element_blocks = divergence_blocks(stress_space, displacement_space, exactness);

    let (rpe, cpe) = (displacement_space.dofs_per_element, stress_space.dofs_per_element);
    let ne = mesh.num_elements();
    let mut mat = BlockSparse::new(element_adjacency(mesh), ne, rpe, cpe);
    for (e, block) in element_blocks.iter().enumerate() {
        mat.add_block(e, e, block, cpe, 0, 0);
    }
    drop(element_blocks);

    let interior: Vec<usize> = mesh.interior_facets().map(|(i, _)| i).collect();
    for chunk in interior.chunks(FACET_CHUNK) {
        let blocks: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|&fi| coupling_facet_block(mesh, &mesh.facets[fi], stress_space, displacement_space, exactness))
            .collect();
        for (&fi, block) in chunk.iter().zip(&blocks) {
            let facet = &mesh.facets[fi];
            let elems = [facet.plus.element, facet.minus.unwrap().element];
            for su in 0..2 {
                for ss in 0..2 {
                    mat.add_block(elems[su], elems[ss], block, 2 * cpe, ss * cpe, su * rpe);
                }
            }
        }
    }
    Ok(mat.to_csc())
}

/// Element blocks `(div phi_j, psi_i)_K`, row-major `rpe x cpe`.
pub(crate) fn divergence_blocks(
    stress_space: &DgSpace,
    displacement_space: &DgSpace,
    exactness: usize,
) -> Vec<Vec<f64>> {
    let mesh = &*stress_space.mesh;
    let nbs = stress_space.basis_size();
    let nbu = displacement_space.basis_size();
    let pairs = voigt_pairs(mesh.dim);
    let rule = make_quadrature(mesh.dim, exactness);
    let ts = stress_space.basis.tabulate(&rule.points);
    let tu = displacement_space.basis.tabulate(&rule.points);
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let geo = &mesh.geometry[e];
            let rows = displacement_space.dofs_per_element;
            let cols = stress_space.dofs_per_element;
            let mut block = vec![0.0; rows * cols];
            for (q, w) in rule.weights.iter().enumerate() {
                let wq = w * geo.det;
                for a in 0..nbs {
                    let g = geo.push_gradient(ts.gradient(q, a));
                    for (c, &(i, j)) in pairs.iter().enumerate() {
                        // div(phi E_c) = g_j e_i + g_i e_j (i != j), g_i e_i (i == j)
                        let col = c * nbs + a;
                        for b in 0..nbu {
                            let psi = wq * tu.value(q, b);
                            block[(i * nbu + b) * cols + col] += psi * g[j];
                            if i != j {
                                block[(j * nbu + b) * cols + col] += psi * g[i];
                            }
                        }
                    }
                }
            }
            block
        })
        .collect()
}

/// Dense `(2 rpe) x (2 cpe)` block of `-<[tau], {v}>_e` on one interior facet.
fn coupling_facet_block(
    mesh: &Mesh,
    facet: &Facet,
    stress_space: &DgSpace,
    displacement_space: &DgSpace,
    exactness: usize,
) -> Vec<f64> {
    let dim = mesh.dim;
    let nbs = stress_space.basis_size();
    let nbu = displacement_space.basis_size();
    let nc = stress_space.components;
    let fqs = FacetQuadrature::new(mesh, facet, &stress_space.basis, exactness);
    let fqu = FacetQuadrature::new(mesh, facet, &displacement_space.basis, exactness);
    let en: Vec<Vec3> = (0..nc).map(|c| mat_vec(&voigt_unit(dim, c), &facet.normal)).collect();
    let rows = 2 * displacement_space.dofs_per_element;
    let cols = 2 * stress_space.dofs_per_element;
    let mut block = vec![0.0; rows * cols];
    for su in 0..2 {
        for ss in 0..2 {
            for b in 0..nbu {
                for a in 0..nbs {
                    let prod: f64 = fqs
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(q, w)| w * fqu.side(su).value(q, b) * fqs.side(ss).value(q, a))
                        .sum();
                    let coeff = -0.5 * SIGN[ss] * prod;
                    for (c, enc) in en.iter().enumerate() {
                        let col = ss * stress_space.dofs_per_element + c * nbs + a;
                        for (r, encr) in enc.iter().enumerate().take(dim) {
                            let row = su * displacement_space.dofs_per_element + r * nbu + b;
                            block[row * cols + col] += coeff * encr;
                        }
                    }
                }
            }
        }
    }
    block
}

/// `F_i = (f, phi_i)` by volume quadrature of the given exactness.
pub fn assemble_load_with(
    displacement_space: &DgSpace,
    f: impl Fn(&Vec3) -> Vec3 + Sync,
    exactness: usize,
) -> Vec<f64> {
    let mesh = &*displacement_space.mesh;
    let rule = make_quadrature(mesh.dim, exactness);
    let table = displacement_space.basis.tabulate(&rule.points);
    let nb = displacement_space.basis_size();
    let dpe = displacement_space.dofs_per_element;
    let mut load = vec![0.0; displacement_space.total_dofs];
    load.par_chunks_mut(dpe).enumerate().for_each(|(e, chunk)| {
        let geo = &mesh.geometry[e];
        for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let fx = f(&geo.map(p));
            let wq = w * geo.det;
            for r in 0..mesh.dim {
                for b in 0..nb {
                    chunk[r * nb + b] += wq * fx[r] * table.value(q, b);
                }
            }
        }
    });
    load
}

/// Load vector with the default volume quadrature for the space's degree.
pub fn assemble_load(displacement_space: &DgSpace, f: impl Fn(&Vec3) -> Vec3 + Sync) -> Vec<f64> {
    let k = displacement_space.degree;
    assemble_load_with(displacement_space, f, assembly_exactness(k))
}

/// Assembles `A`, `B` and `F` for the given spaces, material and penalty.
pub fn assemble_system(
    stress_space: &DgSpace,
    displacement_space: &DgSpace,
    ct: &ComplianceTensor,
    eta: &[f64],
    f: impl Fn(&Vec3) -> Vec3 + Sync,
) -> Result<SparseSystem> {
    Ok(SparseSystem {
        a: assemble_a(stress_space, ct, eta)?,
        b: assemble_b(stress_space, displacement_space)?,
        load: assemble_load(displacement_space, f),
        dofs_per_element: (stress_space.dofs_per_element, displacement_space.dofs_per_element),
    })
}
