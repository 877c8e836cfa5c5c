//! Orthonormal polynomial bases on the reference simplex.

use super::quadrature::make_quadrature;
use crate::tensor::Vec3;

/// L2-orthonormal hierarchical basis of `P_degree` on the reference simplex.
///
/// Each function is stored as a combination of monomials centred at the
/// simplex barycentre; the monomials are ordered by total degree, so the
/// first `binom(p + d, d)` functions span `P_p` for every `p <= degree`.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub dim: usize,
    pub degree: usize,
    exponents: Vec<[usize; 3]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<Vec<f64>>,
    center: Vec3,
}

/// Basis values and reference gradients tabulated at a set of points.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub size: usize,
    pub values: Vec<f64>,
    pub gradients: Vec<Vec3>,
}

impl BasisTable {
    #[inline]
    pub fn value(&self, point: usize, i: usize) -> f64 {
        self.values[point * self.size + i]
    }

    #[inline]
    pub fn gradient(&self, point: usize, i: usize) -> &Vec3 {
        &self.gradients[point * self.size + i]
    }

    #[inline]
    pub fn values_at(&self, point: usize) -> &[f64] {
        &self.values[point * self.size..(point + 1) * self.size]
    }

    pub fn num_points(&self) -> usize {
        self.values.len() / self.size.max(1)
    }
}

pub fn basis_size(dim: usize, degree: usize) -> usize {
    let mut n = 1usize;
    for i in 1..=dim {
        n = n * (degree + i) / i;
    }
    n
}

fn monomial_exponents(dim: usize, degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(basis_size(dim, degree));
    for total in 0..=degree {
        match dim {
            1 => out.push([total, 0, 0]),
            2 => {
                for b in 0..=total {
                    out.push([total - b, b, 0]);
                }
            }
            3 => {
                for b in 0..=total {
                    for c in 0..=total - b {
                        out.push([total - b - c, b, c]);
                    }
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
    }
    out
}

impl ScalarBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let exponents = monomial_exponents(dim, degree);
        let n = exponents.len();
        let c = 1.0 / (dim as f64 + 1.0);
        let mut center = [0.0; 3];
        center[..dim].fill(c);
        let identity = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut basis = ScalarBasis {
            dim,
            degree,
            exponents,
            coeffs: identity,
            center,
        };
        // Gram–Schmidt through the Cholesky factor of the Gram matrix; the
        // second sweep removes the round-off left by the first.
        let rule = make_quadrature(dim, 2 * degree);
        for _ in 0..2 {
            let table = basis.tabulate(&rule.points);
            let mut gram = vec![vec![0.0; n]; n];
            for (q, w) in rule.weights.iter().enumerate() {
                let v = table.values_at(q);
                for i in 0..n {
                    for j in 0..=i {
                        gram[i][j] += w * v[i] * v[j];
                    }
                }
            }
            let l = cholesky_lower(&gram);
            let linv = lower_inverse(&l);
            let mut next = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..=i {
                    let f = linv[i][k];
                    for (dst, src) in next[i].iter_mut().zip(&basis.coeffs[k]) {
                        *dst += f * src;
                    }
                }
            }
            basis.coeffs = next;
        }
        basis
    }

    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    fn monomials(&self, p: &Vec3, values: &mut [f64], grads: Option<&mut [Vec3]>) {
        let x = [
            p[0] - self.center[0],
            p[1] - self.center[1],
            p[2] - self.center[2],
        ];
        let pw = |base: f64, e: usize| -> f64 { base.powi(e as i32) };
        for (m, e) in self.exponents.iter().enumerate() {
            values[m] = pw(x[0], e[0]) * pw(x[1], e[1]) * pw(x[2], e[2]);
        }
        if let Some(grads) = grads {
            for (m, e) in self.exponents.iter().enumerate() {
                let mut g = [0.0; 3];
                for axis in 0..self.dim {
                    if e[axis] == 0 {
                        continue;
                    }
                    let mut term = e[axis] as f64;
                    for other in 0..3 {
                        let exp = if other == axis { e[other] - 1 } else { e[other] };
                        term *= pw(x[other], exp);
                    }
                    g[axis] = term;
                }
                grads[m] = g;
            }
        }
    }

    pub fn eval(&self, p: &Vec3) -> Vec<f64> {
        let n = self.size();
        let mut mono = vec![0.0; n];
        self.monomials(p, &mut mono, None);
        self.coeffs
            .iter()
            .map(|row| row.iter().zip(&mono).map(|(c, m)| c * m).sum())
            .collect()
    }

    pub fn eval_gradients(&self, p: &Vec3) -> Vec<Vec3> {
        let n = self.size();
        let mut mono = vec![0.0; n];
        let mut mgrad = vec![[0.0; 3]; n];
        self.monomials(p, &mut mono, Some(&mut mgrad));
        self.coeffs
            .iter()
            .map(|row| {
                let mut g = [0.0; 3];
                for (c, mg) in row.iter().zip(&mgrad) {
                    for a in 0..3 {
                        g[a] += c * mg[a];
                    }
                }
                g
            })
            .collect()
    }

    pub fn tabulate(&self, points: &[Vec3]) -> BasisTable {
        let n = self.size();
        let mut values = Vec::with_capacity(points.len() * n);
        let mut gradients = Vec::with_capacity(points.len() * n);
        for p in points {
            values.extend(self.eval(p));
            gradients.extend(self.eval_gradients(p));
        }
        BasisTable {
            size: n,
            values,
            gradients,
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix given by its
/// lower triangle.
fn cholesky_lower(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "monomial Gram matrix is not positive definite");
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    l
}

fn lower_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        inv[col][col] = 1.0 / l[col][col];
        for i in col + 1..n {
            let s: f64 = (col..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = -s / l[i][i];
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(ScalarBasis::new(2, 0).size(), 1);
        assert_eq!(ScalarBasis::new(2, 1).size(), 3);
        assert_eq!(ScalarBasis::new(3, 2).size(), 10);
        assert_eq!(basis_size(3, 4), 35);
    }

    #[test]
    fn constant_is_sqrt_two_on_triangle() {
        let b = ScalarBasis::new(2, 0);
        let v = b.eval(&[0.2, 0.3, 0.0]);
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
        let b = ScalarBasis::new(3, 0);
        assert!((b.eval(&[0.1, 0.1, 0.1])[0] - 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn hierarchical_prefix_spans_lower_degree() {
        let low = ScalarBasis::new(2, 1);
        let high = ScalarBasis::new(2, 3);
        for p in [[0.1, 0.2, 0.0], [0.7, 0.1, 0.0], [0.3, 0.3, 0.0]] {
            let a = low.eval(&p);
            let b = high.eval(&p);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-12);
            }
        }
    }
}
