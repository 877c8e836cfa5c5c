//! Small fixed-size vector/matrix helpers.
//!
//! Points and vectors are always stored as `[f64; 3]`; in two dimensions the
//! third component is zero and 3x3 matrices carry a unit `(2, 2)` entry, so a
//! single code path serves both dimensions.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO3: Vec3 = [0.0; 3];
pub const ZERO33: Mat3 = [[0.0; 3]; 3];

/// Voigt component ordering: diagonal entries first, then `(0,1)`, `(0,2)`, `(1,2)`.
const PAIRS_2D: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];
const PAIRS_3D: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Index pairs `(i, j)` with `i <= j` of the stored symmetric-tensor components.
pub fn voigt_pairs(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        2 => &PAIRS_2D,
        3 => &PAIRS_3D,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn sym_components(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Unit symmetric tensor of Voigt component `c`: `e_i e_j^T + e_j e_i^T` off the
/// diagonal, `e_i e_i^T` on it. A coefficient on this tensor is the entry `tau_ij`.
pub fn voigt_unit(dim: usize, c: usize) -> Mat3 {
    let (i, j) = voigt_pairs(dim)[c];
    let mut m = ZERO33;
    m[i][j] = 1.0;
    m[j][i] = 1.0;
    m
}

/// Weight of component `c` in the Frobenius product of two Voigt vectors.
pub fn voigt_weight(dim: usize, c: usize) -> f64 {
    let (i, j) = voigt_pairs(dim)[c];
    if i == j {
        1.0
    } else {
        2.0
    }
}

pub fn to_voigt(dim: usize, m: &Mat3) -> Vec<f64> {
    voigt_pairs(dim).iter().map(|&(i, j)| m[i][j]).collect()
}

pub fn from_voigt(dim: usize, v: &[f64]) -> Mat3 {
    let mut m = ZERO33;
    for (&(i, j), &x) in voigt_pairs(dim).iter().zip(v) {
        m[i][j] = x;
        m[j][i] = x;
    }
    m
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut t = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse via the adjugate. The caller guarantees `det(m) != 0`.
pub fn inverse(m: &Mat3) -> Mat3 {
    let d = det(m);
    let mut inv = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
            let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / d;
        }
    }
    inv
}

/// Frobenius product `a : b`.
pub fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    (0..3).map(|i| dot(&a[i], &b[i])).sum()
}

pub fn trace(dim: usize, m: &Mat3) -> f64 {
    (0..dim).map(|i| m[i][i]).sum()
}

pub fn identity(dim: usize) -> Mat3 {
    let mut m = ZERO33;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    mat_add(a, &mat_scale(b, -1.0))
}

pub fn mat_scale(a: &Mat3, s: f64) -> Mat3 {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

/// Outer product `u ⊗ v`, entry `(i, j)` is `u_i v_j`.
pub fn outer(u: &Vec3, v: &Vec3) -> Mat3 {
    let mut m = ZERO33;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = u[i] * v[j];
        }
    }
    m
}

/// Symmetric tensor product `u ⊙ v = (u ⊗ v + v ⊗ u) / 2`.
pub fn sym_outer(u: &Vec3, v: &Vec3) -> Mat3 {
    mat_scale(&mat_add(&outer(u, v), &outer(v, u)), 0.5)
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_shear() {
        let m = [[2.0, 1.0, 0.0], [0.5, 3.0, 1.0], [0.0, 0.0, 4.0]];
        let inv = inverse(&m);
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn voigt_weights_reproduce_frobenius() {
        for dim in [2, 3] {
            let a = from_voigt(dim, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0][..sym_components(dim)]);
            let b = from_voigt(dim, &[0.5, -1.0, 2.0, 0.25, -3.0, 1.5][..sym_components(dim)]);
            let va = to_voigt(dim, &a);
            let vb = to_voigt(dim, &b);
            let weighted: f64 = (0..sym_components(dim))
                .map(|c| voigt_weight(dim, c) * va[c] * vb[c])
                .sum();
            assert!((weighted - frobenius(&a, &b)).abs() < 1e-14);
        }
    }

    #[test]
    fn sym_outer_of_self_is_outer() {
        let u = [0.6, 0.8, 0.0];
        assert_eq!(sym_outer(&u, &u), outer(&u, &u));
    }
}
