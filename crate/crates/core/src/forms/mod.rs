//! Bilinear forms of the mixed LDG scheme, facet traces and the lifting operator.

mod assembly;
mod compliance;
mod lifting;
mod traces;

pub use assembly::{
    assemble_a, assemble_b, assemble_load, assemble_load_with, assemble_system, uniform_penalty,
    SparseSystem,
};
pub(crate) use assembly::{divergence_blocks, penalized_mass, stress_exactness, FacetQuadrature};
pub use compliance::{compliance_apply, ComplianceTensor};
pub use lifting::lifting_apply;
pub use traces::{jump_from_difference, tensor_traces, vector_traces, TensorTraces, VectorTraces};
