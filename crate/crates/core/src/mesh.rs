//! Uniform simplicial meshes of the unit square and cube.
//!
//! In 2D every square `[i/n,(i+1)/n] x [j/n,(j+1)/n]` is split along the
//! diagonal from `(i/n, j/n)` to `((i+1)/n, (j+1)/n)`. In 3D every cube is
//! split into the six Kuhn tetrahedra sharing the main diagonal from the
//! lower corner to the upper corner; vertex orders are swapped where needed
//! so that all elements are positively oriented.
//!
//! Facets are matched through their sorted global vertex indices. The sorted
//! tuple is also the canonical vertex order used to place facet quadrature
//! points, so both neighbours of an interior facet see identical points.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::reference::{facet_quadrature_trace, reference_facet_vertices, FacetTrace};
use crate::tensor::{det, inverse, mat_vec, norm, scale, sub, transpose, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Interior,
    Boundary,
}

/// One element's view of a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetSide {
    pub element: usize,
    pub local_facet: usize,
    /// Element-local vertex index of each canonical facet vertex.
    pub permutation: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct Facet {
    /// Global vertex indices in canonical (ascending) order; `dim` entries are used.
    pub vertices: [usize; 3],
    pub plus: FacetSide,
    pub minus: Option<FacetSide>,
    /// Unit normal, outward from the plus element.
    pub normal: Vec3,
    /// Longest edge of the facet.
    pub diameter: f64,
    pub measure: f64,
}

impl Facet {
    pub fn kind(&self) -> FacetKind {
        if self.minus.is_some() {
            FacetKind::Interior
        } else {
            FacetKind::Boundary
        }
    }

    pub fn is_interior(&self) -> bool {
        self.minus.is_some()
    }

    pub fn sides(&self) -> impl Iterator<Item = &FacetSide> {
        std::iter::once(&self.plus).chain(self.minus.as_ref())
    }
}

/// Affine map `x = J x_ref + origin` from the reference simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Vec3,
    pub jacobian: Mat3,
    pub jacobian_inv_t: Mat3,
    /// `|det J|`, equal to `d!` times the element volume.
    pub det: f64,
    /// Longest edge, `h_K`.
    pub diameter: f64,
}

impl ElementGeometry {
    pub fn map(&self, x_ref: &Vec3) -> Vec3 {
        let y = mat_vec(&self.jacobian, x_ref);
        [
            y[0] + self.origin[0],
            y[1] + self.origin[1],
            y[2] + self.origin[2],
        ]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn push_gradient(&self, g: &Vec3) -> Vec3 {
        mat_vec(&self.jacobian_inv_t, g)
    }

    pub fn volume(&self, dim: usize) -> f64 {
        self.det * crate::reference::reference_measure(dim)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Vec3>,
    pub elements: Vec<[usize; 4]>,
    pub facets: Vec<Facet>,
    pub element_diameters: Vec<f64>,
    pub geometry: Vec<ElementGeometry>,
    /// Facet index of each local facet of each element.
    pub element_facets: Vec<[usize; 4]>,
}

impl Mesh {
    /// Builds a mesh from vertices and element connectivity. Elements must be
    /// positively oriented; facets are derived.
    pub fn from_parts(dim: usize, vertices: Vec<Vec3>, elements: Vec<[usize; 4]>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension {dim} not in {{2, 3}}")));
        }
        let scale_ref = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |a, x| a.max(x.abs()))
            .max(1.0);
        let mut geometry = Vec::with_capacity(elements.len());
        for (e, el) in elements.iter().enumerate() {
            let g = element_affine_map_raw(dim, &vertices, el);
            if g.det < 1e-14 * scale_ref.powi(dim as i32) {
                return Err(Error::DegenerateElement { element: e, det: g.det });
            }
            geometry.push(g);
        }
        let (facets, element_facets) = facet_connectivity_raw(dim, &vertices, &elements, &geometry)?;
        let element_diameters = geometry.iter().map(|g| g.diameter).collect();
        Ok(Mesh {
            dim,
            vertices,
            elements,
            facets,
            element_diameters,
            geometry,
            element_facets,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_vertices(&self, e: usize) -> &[usize] {
        &self.elements[e][..=self.dim]
    }

    pub fn vertex_count_per_element(&self) -> usize {
        self.dim + 1
    }

    /// `h = max h_K`.
    pub fn h(&self) -> f64 {
        self.element_diameters.iter().cloned().fold(0.0, f64::max)
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| f.is_interior())
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| !f.is_interior())
    }

    /// Quadrature on one side of a facet, with physical weights.
    pub fn facet_trace(&self, facet: &Facet, side: &FacetSide, exactness: usize) -> FacetTrace {
        let mut trace = facet_quadrature_trace(
            self.dim,
            exactness,
            side.local_facet,
            &side.permutation[..self.dim],
        )
        .expect("facet permutation recorded by the mesh is valid");
        for (w, u) in trace.weights.iter_mut().zip(&trace.unit_weights) {
            *w = u * facet.measure;
        }
        trace
    }

    /// Plain-text listing of vertices, elements and facets.
    pub fn write_listing(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# dim {}", self.dim)?;
        writeln!(out, "vertices {}", self.vertices.len())?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "{i} {}", join(&v[..self.dim]))?;
        }
        writeln!(out, "elements {}", self.elements.len())?;
        for (i, e) in self.elements.iter().enumerate() {
            writeln!(out, "{i} {}", join(&e[..=self.dim]))?;
        }
        writeln!(out, "facets {}", self.facets.len())?;
        for (i, f) in self.facets.iter().enumerate() {
            let minus = f.minus.map_or("-".to_string(), |m| m.element.to_string());
            writeln!(
                out,
                "{i} {} plus {} minus {} normal {} h_e {}",
                join(&f.vertices[..self.dim]),
                f.plus.element,
                minus,
                join(&f.normal[..self.dim]),
                f.diameter
            )?;
        }
        Ok(())
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Uniform mesh of `[0,1]^dim` with `n` subdivisions per axis.
pub fn build_uniform_mesh(dim: usize, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("n must be at least 1".into()));
    }
    let h = 1.0 / n as f64;
    match dim {
        2 => {
            let idx = |i: usize, j: usize| j * (n + 1) + i;
            let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    vertices.push([i as f64 * h, j as f64 * h, 0.0]);
                }
            }
            let mut elements = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let (v00, v10, v01, v11) =
                        (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                    elements.push([v00, v10, v11, 0]);
                    elements.push([v00, v11, v01, 0]);
                }
            }
            Mesh::from_parts(2, vertices, elements)
        }
        3 => {
            let idx = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
            let mut vertices = Vec::with_capacity((n + 1).pow(3));
            for k in 0..=n {
                for j in 0..=n {
                    for i in 0..=n {
                        vertices.push([i as f64 * h, j as f64 * h, k as f64 * h]);
                    }
                }
            }
            const AXIS_ORDERS: [[usize; 3]; 6] =
                [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let mut elements = Vec::with_capacity(6 * n * n * n);
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        for order in AXIS_ORDERS {
                            let mut c = [i, j, k];
                            let mut tet = [idx(c[0], c[1], c[2]); 4];
                            for (step, &axis) in order.iter().enumerate() {
                                c[axis] += 1;
                                tet[step + 1] = idx(c[0], c[1], c[2]);
                            }
                            if signed_det(3, &vertices, &tet) < 0.0 {
                                tet.swap(2, 3);
                            }
                            elements.push(tet);
                        }
                    }
                }
            }
            Mesh::from_parts(3, vertices, elements)
        }
        _ => Err(Error::InvalidMesh(format!("dimension {dim} not in {{2, 3}}"))),
    }
}

fn jacobian(dim: usize, vertices: &[Vec3], el: &[usize; 4]) -> Mat3 {
    let mut jac = [[0.0; 3]; 3];
    let v0 = vertices[el[0]];
    for c in 0..dim {
        let d = sub(&vertices[el[c + 1]], &v0);
        for r in 0..3 {
            jac[r][c] = d[r];
        }
    }
    if dim == 2 {
        jac[2][2] = 1.0;
    }
    jac
}

fn signed_det(dim: usize, vertices: &[Vec3], el: &[usize; 4]) -> f64 {
    det(&jacobian(dim, vertices, el))
}

fn element_affine_map_raw(dim: usize, vertices: &[Vec3], el: &[usize; 4]) -> ElementGeometry {
    let jac = jacobian(dim, vertices, el);
    let d = det(&jac);
    let inv_t = if d != 0.0 {
        transpose(&inverse(&jac))
    } else {
        [[f64::NAN; 3]; 3]
    };
    let mut diameter = 0.0_f64;
    for a in 0..=dim {
        for b in a + 1..=dim {
            diameter = diameter.max(norm(&sub(&vertices[el[a]], &vertices[el[b]])));
        }
    }
    ElementGeometry {
        origin: vertices[el[0]],
        jacobian: jac,
        jacobian_inv_t: inv_t,
        // negative orientation is reported by from_parts as degenerate
        det: d.max(0.0),
        diameter,
    }
}

/// `(J, J^{-T}, |det J|, h_K)` of element `element_id`.
pub fn element_affine_map(mesh: &Mesh, element_id: usize) -> Result<ElementGeometry> {
    mesh.geometry.get(element_id).copied().ok_or_else(|| {
        Error::InvalidMesh(format!(
            "element {element_id} out of range (mesh has {})",
            mesh.num_elements()
        ))
    })
}

/// Facet list of a mesh (already computed at construction).
pub fn facet_connectivity(mesh: &Mesh) -> &[Facet] {
    &mesh.facets
}

type FacetKey = [usize; 3];

fn facet_connectivity_raw(
    dim: usize,
    vertices: &[Vec3],
    elements: &[[usize; 4]],
    geometry: &[ElementGeometry],
) -> Result<(Vec<Facet>, Vec<[usize; 4]>)> {
    let mut lookup: HashMap<FacetKey, usize> = HashMap::with_capacity(elements.len() * (dim + 1));
    let mut facets: Vec<Facet> = Vec::new();
    let mut element_facets = vec![[usize::MAX; 4]; elements.len()];
    for (e, el) in elements.iter().enumerate() {
        for lf in 0..=dim {
            let local = reference_facet_vertices(dim, lf);
            let mut key = [usize::MAX; 3];
            for (slot, &lv) in key.iter_mut().zip(&local) {
                *slot = el[lv];
            }
            key[..dim].sort_unstable();
            let mut permutation = [usize::MAX; 3];
            for (slot, g) in permutation.iter_mut().zip(&key[..dim]) {
                *slot = (0..=dim).find(|&lv| el[lv] == *g).unwrap();
            }
            let side = FacetSide {
                element: e,
                local_facet: lf,
                permutation,
            };
            match lookup.get(&key) {
                None => {
                    let corners: Vec<Vec3> = key[..dim].iter().map(|&v| vertices[v]).collect();
                    let mut diameter = 0.0_f64;
                    for a in 0..dim {
                        for b in a + 1..dim {
                            diameter = diameter.max(norm(&sub(&corners[a], &corners[b])));
                        }
                    }
                    lookup.insert(key, facets.len());
                    element_facets[e][lf] = facets.len();
                    facets.push(Facet {
                        vertices: key,
                        plus: side,
                        minus: None,
                        normal: outward_normal(&geometry[e], dim, lf),
                        diameter,
                        measure: crate::reference::simplex_measure(&corners),
                    });
                }
                Some(&id) => {
                    let facet = &mut facets[id];
                    if facet.minus.is_some() {
                        return Err(Error::NonManifoldFacet {
                            vertices: key[..dim].to_vec(),
                        });
                    }
                    facet.minus = Some(side);
                    element_facets[e][lf] = id;
                }
            }
        }
    }
    Ok((facets, element_facets))
}

/// Outward unit normal of local facet `lf`: the facet opposite vertex `lf`
/// is a level set of barycentric coordinate `lambda_lf`, whose gradient points inward.
fn outward_normal(g: &ElementGeometry, dim: usize, lf: usize) -> Vec3 {
    let mut grad_ref = [0.0; 3];
    if lf == 0 {
        grad_ref[..dim].fill(-1.0);
    } else {
        grad_ref[lf - 1] = 1.0;
    }
    let grad = g.push_gradient(&grad_ref);
    scale(&grad, -1.0 / norm(&grad))
}
