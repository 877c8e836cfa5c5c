//! Manufactured solutions on the unit square and cube.
//!
//! Every problem is described by the displacement `u`, its gradient and the
//! Hessians of its components; the stress `sigma = 2 mu eps(u) + lambda tr(eps(u)) I`
//! and the load `f = div sigma = mu lap(u) + (mu + lambda) grad(div u)` follow analytically.

use crate::tensor::{identity, mat_add, mat_scale, trace, transpose, Mat3, Vec3, ZERO33};

/// Displacement field with analytic first and second derivatives.
pub trait ExactDisplacement: Send + Sync {
    fn dim(&self) -> usize;
    fn u(&self, x: &Vec3) -> Vec3;
    /// `(grad u)_ij = d_j u_i`.
    fn grad(&self, x: &Vec3) -> Mat3;
    /// Hessian of component `i`.
    fn hessian(&self, i: usize, x: &Vec3) -> Mat3;
    /// Polynomial degree of `u`, if it is a polynomial.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

/// `sigma = 2 mu eps + lambda tr(eps) I`.
pub fn stiffness_apply(mu: f64, lambda: f64, dim: usize, eps: &Mat3) -> Mat3 {
    mat_add(
        &mat_scale(eps, 2.0 * mu),
        &mat_scale(&identity(dim), lambda * trace(dim, eps)),
    )
}

pub struct ManufacturedProblem {
    pub dim: usize,
    pub mu: f64,
    pub lambda: f64,
    pub name: String,
    displacement: Box<dyn ExactDisplacement>,
}

impl std::fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("mu", &self.mu)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl ManufacturedProblem {
    pub fn new(
        name: impl Into<String>,
        mu: f64,
        lambda: f64,
        displacement: Box<dyn ExactDisplacement>,
    ) -> Self {
        ManufacturedProblem {
            dim: displacement.dim(),
            mu,
            lambda,
            name: name.into(),
            displacement,
        }
    }

    pub fn with_lame(mut self, mu: f64, lambda: f64) -> Self {
        self.mu = mu;
        self.lambda = lambda;
        self
    }

    pub fn u(&self, x: &Vec3) -> Vec3 {
        self.displacement.u(x)
    }

    pub fn grad_u(&self, x: &Vec3) -> Mat3 {
        self.displacement.grad(x)
    }

    pub fn strain(&self, x: &Vec3) -> Mat3 {
        let g = self.grad_u(x);
        mat_scale(&mat_add(&g, &transpose(&g)), 0.5)
    }

    pub fn sigma(&self, x: &Vec3) -> Mat3 {
        stiffness_apply(self.mu, self.lambda, self.dim, &self.strain(x))
    }

    /// `f = div sigma`.
    pub fn f(&self, x: &Vec3) -> Vec3 {
        let d = self.dim;
        let h: Vec<Mat3> = (0..d).map(|i| self.displacement.hessian(i, x)).collect();
        let mut f = [0.0; 3];
        for i in 0..d {
            let lap: f64 = (0..d).map(|j| h[i][j][j]).sum();
            let grad_div: f64 = (0..d).map(|j| h[j][i][j]).sum();
            f[i] = self.mu * lap + (self.mu + self.lambda) * grad_div;
        }
        f
    }

    pub fn polynomial_degree(&self) -> Option<usize> {
        self.displacement.polynomial_degree()
    }
}

/// `u = (e^{x-y} x y (1-x)(1-y), sin(pi x) sin(pi y))`, `mu = 1/2`, `lambda = 1`.
pub fn problem_2d() -> ManufacturedProblem {
    ManufacturedProblem::new("square-exp-sine", 0.5, 1.0, Box::new(ExpSine2d))
}

/// `u = (16, 32, 64) x(1-x) y(1-y) z(1-z)`, `mu = 1/2`, `lambda = 1`.
pub fn problem_3d() -> ManufacturedProblem {
    ManufacturedProblem::new(
        "cube-bubble",
        0.5,
        1.0,
        Box::new(Bubble {
            dim: 3,
            amplitude: [16.0, 32.0, 64.0],
        }),
    )
}

/// Polynomial bubble `u = amplitude * prod_i x_i (1 - x_i)` of degree `2 dim`,
/// vanishing on the whole boundary.
pub fn bubble_problem(dim: usize, amplitude: Vec3, mu: f64, lambda: f64) -> ManufacturedProblem {
    ManufacturedProblem::new("bubble", mu, lambda, Box::new(Bubble { dim, amplitude }))
}

/// `u = 0`, so `sigma = 0` and `f = 0`.
pub fn zero_problem(dim: usize, mu: f64, lambda: f64) -> ManufacturedProblem {
    ManufacturedProblem::new(
        "zero",
        mu,
        lambda,
        Box::new(Bubble {
            dim,
            amplitude: [0.0; 3],
        }),
    )
}

struct ExpSine2d;

impl ExactDisplacement for ExpSine2d {
    fn dim(&self) -> usize {
        2
    }

    fn u(&self, x: &Vec3) -> Vec3 {
        let (a, b) = (x[0], x[1]);
        let pi = std::f64::consts::PI;
        [
            (a - b).exp() * a * b * (1.0 - a) * (1.0 - b),
            (pi * a).sin() * (pi * b).sin(),
            0.0,
        ]
    }

    fn grad(&self, x: &Vec3) -> Mat3 {
        let (a, b) = (x[0], x[1]);
        let pi = std::f64::consts::PI;
        let e = (a - b).exp();
        let (g, dg) = (a * (1.0 - a), 1.0 - 2.0 * a);
        let (h, dh) = (b * (1.0 - b), 1.0 - 2.0 * b);
        let mut m = ZERO33;
        m[0][0] = e * h * (g + dg);
        m[0][1] = e * g * (dh - h);
        m[1][0] = pi * (pi * a).cos() * (pi * b).sin();
        m[1][1] = pi * (pi * a).sin() * (pi * b).cos();
        m
    }

    fn hessian(&self, i: usize, x: &Vec3) -> Mat3 {
        let (a, b) = (x[0], x[1]);
        let pi = std::f64::consts::PI;
        let mut m = ZERO33;
        if i == 0 {
            let e = (a - b).exp();
            let (g, dg, ddg) = (a * (1.0 - a), 1.0 - 2.0 * a, -2.0);
            let (h, dh, ddh) = (b * (1.0 - b), 1.0 - 2.0 * b, -2.0);
            m[0][0] = e * h * (g + 2.0 * dg + ddg);
            m[1][1] = e * g * (h - 2.0 * dh + ddh);
            m[0][1] = e * (g + dg) * (dh - h);
            m[1][0] = m[0][1];
        } else {
            let (sa, ca) = (pi * a).sin_cos();
            let (sb, cb) = (pi * b).sin_cos();
            m[0][0] = -pi * pi * sa * sb;
            m[1][1] = -pi * pi * sa * sb;
            m[0][1] = pi * pi * ca * cb;
            m[1][0] = m[0][1];
        }
        m
    }
}

struct Bubble {
    dim: usize,
    amplitude: Vec3,
}

impl Bubble {
    /// Per-axis factors `(g, g', g'')` of `g(t) = t (1 - t)`; unused axes are constant one.
    fn factors(&self, x: &Vec3) -> [[f64; 3]; 3] {
        let mut f = [[1.0, 0.0, 0.0]; 3];
        for (axis, slot) in f.iter_mut().enumerate().take(self.dim) {
            let t = x[axis];
            *slot = [t * (1.0 - t), 1.0 - 2.0 * t, -2.0];
        }
        f
    }

    /// Derivative of the scalar bubble with derivative orders per axis.
    fn derivative(&self, f: &[[f64; 3]; 3], orders: [usize; 3]) -> f64 {
        (0..3).map(|axis| f[axis][orders[axis]]).product()
    }
}

impl ExactDisplacement for Bubble {
    fn dim(&self) -> usize {
        self.dim
    }

    fn u(&self, x: &Vec3) -> Vec3 {
        let p = self.derivative(&self.factors(x), [0, 0, 0]);
        [
            self.amplitude[0] * p,
            self.amplitude[1] * p,
            if self.dim == 3 { self.amplitude[2] * p } else { 0.0 },
        ]
    }

    fn grad(&self, x: &Vec3) -> Mat3 {
        let f = self.factors(x);
        let mut gp = [0.0; 3];
        for (axis, slot) in gp.iter_mut().enumerate().take(self.dim) {
            let mut o = [0; 3];
            o[axis] = 1;
            *slot = self.derivative(&f, o);
        }
        let mut m = ZERO33;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[i][j] = self.amplitude[i] * gp[j];
            }
        }
        m
    }

    fn hessian(&self, i: usize, x: &Vec3) -> Mat3 {
        let f = self.factors(x);
        let mut m = ZERO33;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let mut o = [0; 3];
                o[a] += 1;
                o[b] += 1;
                m[a][b] = self.amplitude[i] * self.derivative(&f, o);
            }
        }
        m
    }

    fn polynomial_degree(&self) -> Option<usize> {
        if self.amplitude.iter().all(|&a| a == 0.0) {
            Some(0)
        } else {
            Some(2 * self.dim)
        }
    }
}

/// Symmetrised gradient helper for tests and diagnostics.
pub fn symmetric_part(g: &Mat3) -> Mat3 {
    let mut s = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{compliance_apply, ComplianceTensor};
    use crate::tensor::{max_abs, mat_sub};

    #[test]
    fn point_values() {
        let u = problem_2d().u(&[0.5, 0.5, 0.0]);
        assert!((u[0] - 0.0625).abs() < 1e-15);
        assert!((u[1] - 1.0).abs() < 1e-15);
        let u = problem_3d().u(&[0.5, 0.5, 0.5]);
        assert!((u[0] - 0.25).abs() < 1e-15);
        assert!((u[1] - 0.5).abs() < 1e-15);
        assert!((u[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stiffness_examples() {
        let i2 = identity(2);
        assert_eq!(stiffness_apply(0.5, 1.0, 2, &ZERO33), ZERO33);
        let s = stiffness_apply(0.5, 1.0, 2, &i2);
        assert!(max_abs(&mat_sub(&s, &mat_scale(&i2, 3.0))) < 1e-15);
        let ct = ComplianceTensor::new(0.5, 1.0, 2).unwrap();
        assert!(max_abs(&mat_sub(&compliance_apply(&ct, &s), &i2)) < 1e-15);
        let tf = [[1.0, 2.0, 0.0], [2.0, -1.0, 0.0], [0.0; 3]];
        let s = stiffness_apply(0.7, 5.0, 2, &tf);
        assert!(max_abs(&mat_sub(&s, &mat_scale(&tf, 1.4))) < 1e-15);
    }

    #[test]
    fn compliance_inverts_stress() {
        for p in [problem_2d(), problem_3d()] {
            let ct = ComplianceTensor::new(p.mu, p.lambda, p.dim).unwrap();
            for x in [[0.3, 0.7, 0.2], [0.11, 0.5, 0.9]] {
                let r = mat_sub(&compliance_apply(&ct, &p.sigma(&x)), &p.strain(&x));
                assert!(max_abs(&r) < 1e-12);
            }
        }
    }
}
