//! The facet lifting `r_e : L2(e)^d -> V_h`,
//! `(r_e(w), v_h) = -<w, {v_h}>_e` for all `v_h` in `V_h`.

use crate::error::{Error, Result};
use crate::spaces::{DgSpace, FieldCoefficients, ValueKind};
use crate::tensor::Vec3;

use super::assembly::{stress_exactness, FacetQuadrature};

/// Lifting of `w` from facet `facet_id`; nonzero only on the adjacent elements.
pub fn lifting_apply<'s>(
    displacement_space: &'s DgSpace,
    facet_id: usize,
    w: impl Fn(&Vec3) -> Vec3,
) -> Result<FieldCoefficients<'s>> {
    if displacement_space.kind != ValueKind::Vector {
        return Err(Error::DimensionMismatch("lifting targets a vector space".into()));
    }
    let mesh = &*displacement_space.mesh;
    let facet = mesh
        .facets
        .get(facet_id)
        .ok_or_else(|| Error::InvalidMesh(format!("facet {facet_id} out of range")))?;
    let nb = displacement_space.basis_size();
    let exactness = stress_exactness(displacement_space.degree + 1);
    let fq = FacetQuadrature::new(mesh, facet, &displacement_space.basis, exactness);
    // {v} = v/2 on interior facets, the one-sided trace on the boundary
    let avg = if facet.is_interior() { 0.5 } else { 1.0 };
    let wq: Vec<Vec3> = fq.points.iter().map(&w).collect();
    let mut out = displacement_space.zeros();
    for (s, side) in facet.sides().enumerate() {
        let table = fq.side(s);
        // orthonormal reference basis: element mass matrix is |det J| I
        let inv_det = 1.0 / mesh.geometry[side.element].det;
        for r in 0..mesh.dim {
            for b in 0..nb {
                let v: f64 = fq
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(q, wt)| wt * wq[q][r] * table.value(q, b))
                    .sum();
                out.values[displacement_space.dof(side.element, r, b)] = -avg * inv_det * v;
            }
        }
    }
    Ok(out)
}
