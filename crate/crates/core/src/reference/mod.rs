//! Reference-simplex machinery: quadrature, orthonormal bases and facet traces.

mod basis;
mod facet;
mod quadrature;

pub use basis::{basis_size, BasisTable, ScalarBasis};
pub(crate) use facet::simplex_measure;
pub use facet::{facet_quadrature_trace, reference_facet_vertices, reference_vertices, FacetTrace};
pub use quadrature::{gauss_legendre, make_quadrature, reference_measure, QuadratureRule};

/// Builds the orthonormal basis of `P_degree` on the reference simplex.
pub fn make_basis(dim: usize, degree: usize) -> ScalarBasis {
    assert!(dim == 2 || dim == 3, "unsupported dimension {dim}");
    ScalarBasis::new(dim, degree)
}

/// Quadrature exactness used for volume and facet assembly terms.
pub fn assembly_exactness(k: usize) -> usize {
    2 * (k + 2) + 2
}

/// Quadrature exactness used for error norms of non-polynomial fields.
pub fn error_exactness(k: usize) -> usize {
    2 * (k + 2) + 4
}
