//! Facet quadrature expressed in element reference coordinates.

use super::quadrature::{factorial, make_quadrature};
use crate::error::{Error, Result};
use crate::tensor::{cross, norm, sub, Vec3};

pub fn reference_vertices(dim: usize) -> Vec<Vec3> {
    let mut v = vec![[0.0; 3]];
    for axis in 0..dim {
        let mut p = [0.0; 3];
        p[axis] = 1.0;
        v.push(p);
    }
    v
}

/// Local vertices of facet `local_facet`, which is the facet opposite the
/// vertex with the same index.
pub fn reference_facet_vertices(dim: usize, local_facet: usize) -> Vec<usize> {
    (0..=dim).filter(|&v| v != local_facet).collect()
}

/// Quadrature on one facet of the reference element.
#[derive(Debug, Clone)]
pub struct FacetTrace {
    /// Points in element reference coordinates.
    pub points: Vec<Vec3>,
    /// Weights summing to the reference-element measure of the facet.
    pub weights: Vec<f64>,
    /// Barycentric weights on the facet itself, summing to one.
    pub unit_weights: Vec<f64>,
}

/// Quadrature points on `local_facet` of the reference simplex.
///
/// `permutation[j]` is the element-local vertex that plays the role of the
/// `j`-th vertex of the facet in its canonical (mesh-wide) ordering. Two
/// elements sharing a facet and passing their own permutations therefore
/// produce the same physical points in the same order.
pub fn facet_quadrature_trace(
    dim: usize,
    exactness: usize,
    local_facet: usize,
    permutation: &[usize],
) -> Result<FacetTrace> {
    let mut expected = reference_facet_vertices(dim, local_facet);
    let mut given = permutation.to_vec();
    expected.sort_unstable();
    given.sort_unstable();
    if local_facet > dim || expected != given {
        return Err(Error::InvalidPermutation {
            local_facet,
            permutation: permutation.to_vec(),
        });
    }
    let verts = reference_vertices(dim);
    let corners: Vec<Vec3> = permutation.iter().map(|&v| verts[v]).collect();
    let measure = simplex_measure(&corners);

    let rule = make_quadrature(dim - 1, exactness);
    let scale = factorial(dim - 1);
    let mut points = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    let mut unit_weights = Vec::with_capacity(rule.len());
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let bary = facet_barycentric(dim, xi);
        let mut p = [0.0; 3];
        for (lam, c) in bary.iter().zip(&corners) {
            for a in 0..3 {
                p[a] += lam * c[a];
            }
        }
        points.push(p);
        unit_weights.push(w * scale);
        weights.push(w * scale * measure);
    }
    Ok(FacetTrace {
        points,
        weights,
        unit_weights,
    })
}

/// Barycentric coordinates on a `(dim-1)`-simplex from its reference coordinates.
fn facet_barycentric(dim: usize, xi: &Vec3) -> Vec<f64> {
    let rest: f64 = xi[..dim - 1].iter().sum();
    let mut b = vec![1.0 - rest];
    b.extend_from_slice(&xi[..dim - 1]);
    b
}

/// Measure of a segment (2 corners) or triangle (3 corners).
pub(crate) fn simplex_measure(corners: &[Vec3]) -> f64 {
    match corners.len() {
        2 => norm(&sub(&corners[1], &corners[0])),
        3 => 0.5 * norm(&cross(&sub(&corners[1], &corners[0]), &sub(&corners[2], &corners[0]))),
        n => panic!("unsupported facet with {n} corners"),
    }
}
