//! Error norms, convergence orders and well-posedness diagnostics.

mod convergence;
pub mod diagnostics;
mod errors;

pub use convergence::{convergence_orders, observed_order, ConvergenceReport, Orders};
pub use errors::{compute_errors, ErrorReport};
