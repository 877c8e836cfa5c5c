use crate::error::{Error, Result};
use crate::tensor::{identity, mat_scale, mat_sub, sym_components, trace, voigt_unit, Mat3};

/// Isotropic compliance `A sigma = (sigma - lambda / (2 mu + d lambda) tr(sigma) I) / (2 mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceTensor {
    pub mu: f64,
    pub lambda: f64,
    pub dim: usize,
}

impl ComplianceTensor {
    pub fn new(mu: f64, lambda: f64, dim: usize) -> Result<Self> {
        let denom = 2.0 * mu + dim as f64 * lambda;
        if denom == 0.0 || mu == 0.0 {
            return Err(Error::SingularCompliance(denom));
        }
        Ok(ComplianceTensor { mu, lambda, dim })
    }

    pub fn apply(&self, sigma: &Mat3) -> Mat3 {
        compliance_apply(self, sigma)
    }

    /// Matrix of the bilinear form `(A E_c) : E_c'` on Voigt unit tensors.
    pub fn voigt_matrix(&self) -> Vec<Vec<f64>> {
        let n = sym_components(self.dim);
        (0..n)
            .map(|c| {
                let ac = self.apply(&voigt_unit(self.dim, c));
                (0..n)
                    .map(|c2| crate::tensor::frobenius(&ac, &voigt_unit(self.dim, c2)))
                    .collect()
            })
            .collect()
    }

    /// Smallest and largest eigenvalue of `A` as a map on symmetric matrices:
    /// `1 / (2 mu + d lambda)` on multiples of the identity and `1 / (2 mu)`
    /// on trace-free tensors.
    pub fn eigenvalue_bounds(&self) -> (f64, f64) {
        let a = 1.0 / (2.0 * self.mu + self.dim as f64 * self.lambda);
        let b = 1.0 / (2.0 * self.mu);
        (a.min(b), a.max(b))
    }
}

pub fn compliance_apply(ct: &ComplianceTensor, sigma: &Mat3) -> Mat3 {
    let d = ct.dim as f64;
    let shift = ct.lambda / (2.0 * ct.mu + d * ct.lambda) * trace(ct.dim, sigma);
    mat_scale(
        &mat_sub(sigma, &mat_scale(&identity(ct.dim), shift)),
        1.0 / (2.0 * ct.mu),
    )
}
