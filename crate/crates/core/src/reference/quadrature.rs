//! Quadrature on reference simplices.
//!
//! Rules are collapsed (Duffy) tensor products of Gauss–Legendre rules: the
//! unit hypercube is mapped onto the simplex and the Jacobian of the collapse
//! is absorbed into the per-direction point counts, so a rule of requested
//! exactness `q` integrates every polynomial of total degree `<= q` exactly.

use crate::tensor::Vec3;

/// Points on the reference simplex of dimension `dim` (the segment `[0,1]`,
/// the triangle `(0,0),(1,0),(0,1)` or the unit tetrahedron), padded to three
/// coordinates with zeros.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1,1] -> [0,1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

fn points_for(exactness: usize) -> usize {
    exactness / 2 + 1
}

/// Rule on the reference simplex of dimension `dim` (1, 2 or 3) exact for
/// polynomials of total degree `exactness`.
pub fn make_quadrature(dim: usize, exactness: usize) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            let (x, w) = gauss_legendre(points_for(exactness));
            for (xi, wi) in x.iter().zip(&w) {
                points.push([*xi, 0.0, 0.0]);
                weights.push(*wi);
            }
        }
        2 => {
            // x = u, y = v (1 - u), Jacobian (1 - u)
            let (u, wu) = gauss_legendre(points_for(exactness + 1));
            let (v, wv) = gauss_legendre(points_for(exactness));
            for (ui, wui) in u.iter().zip(&wu) {
                for (vj, wvj) in v.iter().zip(&wv) {
                    points.push([*ui, vj * (1.0 - ui), 0.0]);
                    weights.push(wui * wvj * (1.0 - ui));
                }
            }
        }
        3 => {
            // x = u, y = v (1 - u), z = w (1 - u)(1 - v), Jacobian (1 - u)^2 (1 - v)
            let (u, wu) = gauss_legendre(points_for(exactness + 2));
            let (v, wv) = gauss_legendre(points_for(exactness + 1));
            let (w, ww) = gauss_legendre(points_for(exactness));
            for (ui, wui) in u.iter().zip(&wu) {
                for (vj, wvj) in v.iter().zip(&wv) {
                    for (wk, wwk) in w.iter().zip(&ww) {
                        points.push([*ui, vj * (1.0 - ui), wk * (1.0 - ui) * (1.0 - vj)]);
                        weights.push(wui * wvj * wwk * (1.0 - ui).powi(2) * (1.0 - vj));
                    }
                }
            }
        }
        _ => panic!("unsupported simplex dimension {dim}"),
    }
    QuadratureRule {
        dim,
        points,
        weights,
        exactness,
    }
}

/// Measure of the reference simplex of dimension `dim`: `1 / dim!`.
pub fn reference_measure(dim: usize) -> f64 {
    1.0 / factorial(dim)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
