//! Mixed local discontinuous Galerkin discretisation of linear elasticity
//! with strongly symmetric stress on simplicial meshes.
//!
//! The discrete pair is `Sigma_h^{k+1} x V_h^k`: fully discontinuous
//! symmetric-tensor stresses of degree `k + 1` and vector displacements of
//! degree `k`. The scheme is
//!
//! ```text
//! a_h(sigma_h, tau) + b_h(tau, u_h) = 0          for all tau
//! b_h(sigma_h, v)                   = (f, v)     for all v
//! ```
//!
//! with `a_h(sigma, tau) = (A sigma, tau) + sum_e eta_e / h_e <[sigma], [tau]>_e`
//! and `b_h(tau, v) = (div_h tau, v) - sum_e <[tau], {v}>_e`, both facet sums
//! running over interior facets only.

pub mod analysis;
pub mod error;
pub mod forms;
pub mod mesh;
pub mod problems;
pub mod reference;
pub mod solver;
pub mod spaces;
pub mod sparse;
pub mod study;
pub mod tensor;

pub use error::{Error, Result};
pub use forms::{ComplianceTensor, SparseSystem};
pub use mesh::{build_uniform_mesh, Facet, FacetKind, Mesh};
pub use problems::{problem_2d, problem_3d, ManufacturedProblem};
pub use solver::{solve_saddle, SaddleSolution, SolveOptions, SolverKind};
pub use spaces::{build_space, DgSpace, FieldCoefficients, ValueKind};
