//! Averages and jumps of discrete fields on facets.

use crate::tensor::{add, mat_add, mat_scale, mat_vec, scale, sub, sym_outer, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorTraces {
    /// `{tau}`
    pub average: Mat3,
    /// `[tau] = tau+ n+ + tau- n-`; zero on boundary facets, where the jump is not used.
    pub jump: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorTraces {
    /// `{v}`; the one-sided trace on boundary facets.
    pub average: Vec3,
    /// `[[v]] = v+ ⊙ n+ + v- ⊙ n-`, or `v ⊙ n` on boundary facets.
    pub tensor_jump: Mat3,
}

/// Traces of a tensor field; `minus` is `None` on boundary facets. `normal`
/// is the plus-side outward normal.
pub fn tensor_traces(plus: &Mat3, minus: Option<&Mat3>, normal: &Vec3) -> TensorTraces {
    match minus {
        Some(m) => {
            let n_minus = scale(normal, -1.0);
            TensorTraces {
                average: mat_scale(&mat_add(plus, m), 0.5),
                jump: add(&mat_vec(plus, normal), &mat_vec(m, &n_minus)),
            }
        }
        None => TensorTraces {
            average: *plus,
            jump: [0.0; 3],
        },
    }
}

pub fn vector_traces(plus: &Vec3, minus: Option<&Vec3>, normal: &Vec3) -> VectorTraces {
    match minus {
        Some(m) => {
            let n_minus = scale(normal, -1.0);
            VectorTraces {
                average: scale(&add(plus, m), 0.5),
                tensor_jump: mat_add(&sym_outer(plus, normal), &sym_outer(m, &n_minus)),
            }
        }
        None => VectorTraces {
            average: *plus,
            tensor_jump: sym_outer(plus, normal),
        },
    }
}

/// `(tau+ - tau-) n+`, the same quantity as [`TensorTraces::jump`].
pub fn jump_from_difference(plus: &Mat3, minus: &Mat3, normal: &Vec3) -> Vec3 {
    sub(&mat_vec(plus, normal), &mat_vec(minus, normal))
}
