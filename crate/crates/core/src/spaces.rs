//! Fully discontinuous vector and symmetric-tensor polynomial spaces.
//!
//! DOF layout is element-major, then component-major, with the scalar basis
//! index innermost: `dof = e * dofs_per_element + c * basis_size + a`. Tensor
//! components follow [`crate::tensor::voigt_pairs`] and store the entries
//! `tau_ij` directly, so reconstructed tensors are symmetric by construction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::reference::{make_basis, make_quadrature, BasisTable, ScalarBasis};
use crate::tensor::{from_voigt, sym_components, voigt_pairs, Mat3, Vec3, ZERO33, ZERO3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Vector,
    SymTensor,
}

#[derive(Debug, Clone)]
pub struct DgSpace {
    pub mesh: Arc<Mesh>,
    pub kind: ValueKind,
    pub degree: usize,
    pub basis: ScalarBasis,
    pub components: usize,
    pub dofs_per_element: usize,
    pub total_dofs: usize,
}

/// Value of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointValue {
    Vector(Vec3),
    Tensor { value: Mat3, divergence: Vec3 },
}

/// Builds `V_h^k` (`ValueKind::Vector`) or `Sigma_h^p` (`ValueKind::SymTensor`).
pub fn build_space(mesh: Arc<Mesh>, kind: ValueKind, degree: usize) -> DgSpace {
    let dim = mesh.dim;
    let basis = make_basis(dim, degree);
    let components = match kind {
        ValueKind::Vector => dim,
        ValueKind::SymTensor => sym_components(dim),
    };
    let dofs_per_element = components * basis.size();
    let total_dofs = dofs_per_element * mesh.num_elements();
    DgSpace {
        mesh,
        kind,
        degree,
        basis,
        components,
        dofs_per_element,
        total_dofs,
    }
}

impl DgSpace {
    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn basis_size(&self) -> usize {
        self.basis.size()
    }

    #[inline]
    pub fn dof(&self, element: usize, component: usize, basis_index: usize) -> usize {
        element * self.dofs_per_element + component * self.basis.size() + basis_index
    }

    pub fn element_dofs(&self, element: usize) -> std::ops::Range<usize> {
        let start = element * self.dofs_per_element;
        start..start + self.dofs_per_element
    }

    /// Quadrature exactness used for projections of analytic fields.
    pub fn projection_exactness(&self) -> usize {
        2 * self.degree + 8
    }

    pub fn zeros(&self) -> FieldCoefficients<'_> {
        FieldCoefficients {
            space: self,
            values: vec![0.0; self.total_dofs],
        }
    }

    pub fn coefficients(&self, values: Vec<f64>) -> Result<FieldCoefficients<'_>> {
        if values.len() != self.total_dofs {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector has length {}, space has {} dofs",
                values.len(),
                self.total_dofs
            )));
        }
        Ok(FieldCoefficients {
            space: self,
            values,
        })
    }

    /// Elementwise L2 projection of an analytic field given by its stored
    /// components (vector entries, or Voigt entries `tau_ij` for tensors).
    pub fn l2_project(&self, field: impl Fn(&Vec3) -> Vec<f64> + Sync) -> FieldCoefficients<'_> {
        let rule = make_quadrature(self.dim(), self.projection_exactness());
        let table = self.basis.tabulate(&rule.points);
        let nb = self.basis.size();
        let mut values = vec![0.0; self.total_dofs];
        for (e, chunk) in values.chunks_mut(self.dofs_per_element).enumerate() {
            let geo = &self.mesh.geometry[e];
            for (q, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let f = field(&geo.map(p));
                let phi = table.values_at(q);
                for (c, fc) in f.iter().enumerate().take(self.components) {
                    for a in 0..nb {
                        // orthonormal reference basis: the element mass matrix is |det J| I
                        chunk[c * nb + a] += w * fc * phi[a];
                    }
                }
            }
        }
        FieldCoefficients {
            space: self,
            values,
        }
    }

    pub fn project_vector(&self, field: impl Fn(&Vec3) -> Vec3 + Sync) -> FieldCoefficients<'_> {
        let d = self.dim();
        self.l2_project(|x| field(x)[..d].to_vec())
    }

    pub fn project_tensor(&self, field: impl Fn(&Vec3) -> Mat3 + Sync) -> FieldCoefficients<'_> {
        let d = self.dim();
        self.l2_project(|x| {
            let m = field(x);
            voigt_pairs(d).iter().map(|&(i, j)| m[i][j]).collect()
        })
    }
}

#[derive(Debug, Clone)]
pub struct FieldCoefficients<'s> {
    pub space: &'s DgSpace,
    pub values: Vec<f64>,
}

impl<'s> FieldCoefficients<'s> {
    pub fn element(&self, e: usize) -> &[f64] {
        &self.values[self.space.element_dofs(e)]
    }

    /// Value at tabulated point `q` of element `e`.
    pub fn value_at(&self, e: usize, table: &BasisTable, q: usize) -> PointValue {
        let space = self.space;
        let nb = space.basis.size();
        let coeffs = self.element(e);
        let phi = table.values_at(q);
        let comp = |c: usize| -> f64 { (0..nb).map(|a| coeffs[c * nb + a] * phi[a]).sum() };
        match space.kind {
            ValueKind::Vector => {
                let mut v = ZERO3;
                for (c, slot) in v.iter_mut().enumerate().take(space.components) {
                    *slot = comp(c);
                }
                PointValue::Vector(v)
            }
            ValueKind::SymTensor => {
                let voigt: Vec<f64> = (0..space.components).map(comp).collect();
                PointValue::Tensor {
                    value: from_voigt(space.dim(), &voigt),
                    divergence: self.divergence_at(e, table, q),
                }
            }
        }
    }

    pub fn vector_at(&self, e: usize, table: &BasisTable, q: usize) -> Vec3 {
        match self.value_at(e, table, q) {
            PointValue::Vector(v) => v,
            PointValue::Tensor { .. } => panic!("vector value requested from a tensor field"),
        }
    }

    pub fn tensor_at(&self, e: usize, table: &BasisTable, q: usize) -> Mat3 {
        let space = self.space;
        assert_eq!(space.kind, ValueKind::SymTensor);
        let nb = space.basis.size();
        let coeffs = self.element(e);
        let phi = table.values_at(q);
        let mut m = ZERO33;
        for (c, &(i, j)) in voigt_pairs(space.dim()).iter().enumerate() {
            let v: f64 = (0..nb).map(|a| coeffs[c * nb + a] * phi[a]).sum();
            m[i][j] = v;
            m[j][i] = v;
        }
        m
    }

    /// Row-wise divergence of a tensor field, `(div tau)_i = sum_j d_j tau_ij`.
    pub fn divergence_at(&self, e: usize, table: &BasisTable, q: usize) -> Vec3 {
        let space = self.space;
        assert_eq!(space.kind, ValueKind::SymTensor);
        let geo = &space.mesh.geometry[e];
        let nb = space.basis.size();
        let coeffs = self.element(e);
        let mut div = ZERO3;
        for a in 0..nb {
            let g = geo.push_gradient(table.gradient(q, a));
            for (c, &(i, j)) in voigt_pairs(space.dim()).iter().enumerate() {
                let t = coeffs[c * nb + a];
                div[i] += t * g[j];
                if i != j {
                    div[j] += t * g[i];
                }
            }
        }
        div
    }

    /// Gradient `(grad u)_ij = d_j u_i` of a vector field.
    pub fn gradient_at(&self, e: usize, table: &BasisTable, q: usize) -> Mat3 {
        let space = self.space;
        assert_eq!(space.kind, ValueKind::Vector);
        let geo = &space.mesh.geometry[e];
        let nb = space.basis.size();
        let coeffs = self.element(e);
        let mut grad = ZERO33;
        for a in 0..nb {
            let g = geo.push_gradient(table.gradient(q, a));
            for i in 0..space.components {
                let u = coeffs[i * nb + a];
                for j in 0..3 {
                    grad[i][j] += u * g[j];
                }
            }
        }
        grad
    }
}

/// Values (and divergences, for tensor fields) at reference points of one element.
pub fn evaluate_field(
    coeffs: &FieldCoefficients<'_>,
    element_id: usize,
    reference_points: &[Vec3],
) -> Vec<PointValue> {
    let table = coeffs.space.basis.tabulate(reference_points);
    (0..reference_points.len())
        .map(|q| coeffs.value_at(element_id, &table, q))
        .collect()
}
