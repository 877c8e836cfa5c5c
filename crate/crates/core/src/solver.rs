//! Solution of the saddle-point system `[A B^T; B 0] (sigma; u) = (0; F)`.
//!
//! The unknown vector is ordered stress block first, then displacement.

use std::time::Instant;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::Solve;
use faer::perm::PermRef;
use faer::sparse::linalg::amd;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMat, SparseColMatRef, SymbolicSparseColMat};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};
use crate::forms::SparseSystem;
use crate::sparse::{mul, mul_transpose, norm2, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Sparse symmetric-indefinite (Bunch–Kaufman within supernodes)
    /// factorization of the full block matrix.
    Direct,
    /// Conjugate gradients on `B A^{-1} B^T u = -F` with a sparse Cholesky of `A`.
    SchurCg,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Direct => "direct",
            SolverKind::SchurCg => "schur-cg",
        })
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SolverKind::Direct),
            "schur-cg" => Ok(SolverKind::SchurCg),
            other => Err(Error::Config(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub kind: SolverKind,
    /// Relative residual target of the Schur-complement CG iteration.
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    /// Krylov dimension of the GMRES correction after a direct factorization.
    pub gmres_restart: usize,
    /// Total GMRES iterations allowed after a direct factorization.
    pub gmres_max_iterations: usize,
    /// Free-form context attached to failures (mesh size, degree, ...).
    pub context: String,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            kind: SolverKind::Direct,
            cg_tolerance: 1e-13,
            cg_max_iterations: 20_000,
            gmres_restart: 50,
            gmres_max_iterations: 500,
            context: String::new(),
        }
    }
}

impl SolveOptions {
    pub fn with_kind(kind: SolverKind) -> Self {
        SolveOptions {
            kind,
            ..Default::default()
        }
    }
}

/// Accepted relative block residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub stress: Vec<f64>,
    pub displacement: Vec<f64>,
    /// `||A sigma + B^T u|| / max(1, ||F||)`
    pub residual_stress: f64,
    /// `||B sigma - F|| / max(1, ||F||)`
    pub residual_displacement: f64,
    pub method: SolverKind,
    /// CG iterations, or GMRES correction iterations for the direct path.
    pub iterations: usize,
    pub seconds: f64,
}

/// Relative block residuals of a candidate solution.
pub fn block_residuals(system: &SparseSystem, stress: &[f64], displacement: &[f64]) -> (f64, f64) {
    let (r1, r2) = residual_vectors(system, stress, displacement);
    let scale = norm2(&system.load).max(1.0);
    (norm2(&r1) / scale, norm2(&r2) / scale)
}

fn residual_vectors(system: &SparseSystem, stress: &[f64], displacement: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut r1 = mul(&system.a, stress);
    for (r, x) in r1.iter_mut().zip(mul_transpose(&system.b, displacement)) {
        *r += x;
    }
    let mut r2 = mul(&system.b, stress);
    for (r, f) in r2.iter_mut().zip(&system.load) {
        *r -= f;
    }
    (r1, r2)
}

pub fn solve_saddle(system: &SparseSystem, options: &SolveOptions) -> Result<SaddleSolution> {
    let ns = system.stress_dofs();
    let nu = system.displacement_dofs();
    if system.a.ncols() != ns || system.b.ncols() != ns || system.load.len() != nu {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}, F has {} entries",
            system.a.nrows(),
            system.a.ncols(),
            system.b.nrows(),
            system.b.ncols(),
            system.load.len()
        )));
    }
    let start = Instant::now();
    let (stress, displacement, iterations) = match options.kind {
        SolverKind::Direct => solve_direct(system, options)?,
        SolverKind::SchurCg => solve_schur_cg(system, options)?,
    };
    if stress.iter().chain(&displacement).any(|x| !x.is_finite()) {
        return Err(Error::Singular {
            context: options.context.clone(),
            reason: "non-finite entries in the computed solution".into(),
        });
    }
    let (residual_stress, residual_displacement) = block_residuals(system, &stress, &displacement);
    if residual_stress > RESIDUAL_TOLERANCE || residual_displacement > RESIDUAL_TOLERANCE {
        return Err(Error::Singular {
            context: options.context.clone(),
            reason: format!(
                "block residuals {residual_stress:e}, {residual_displacement:e} exceed {RESIDUAL_TOLERANCE:e}"
            ),
        });
    }
    Ok(SaddleSolution {
        stress,
        displacement,
        residual_stress,
        residual_displacement,
        method: options.kind,
        iterations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// The full block matrix `[A B^T; B 0]`.
pub fn block_matrix(system: &SparseSystem) -> SparseColMat<usize, f64> {
    let ns = system.stress_dofs();
    let n = ns + system.displacement_dofs();
    let nnz_a = system.a.compute_nnz();
    let nnz_b = system.b.compute_nnz();
    let mut builder = TripletBuilder::with_capacity(n, n, nnz_a + 2 * nnz_b);
    for (r, c, v) in crate::sparse::entries(&system.a) {
        builder.push(r, c, v);
    }
    for (r, c, v) in crate::sparse::entries(&system.b) {
        builder.push(ns + r, c, v);
        builder.push(c, ns + r, v);
    }
    builder.build()
}

/// Fill-reducing symmetric ordering of the block matrix: approximate minimum
/// degree on the element graph, and within each element the stress unknowns
/// before the displacement unknowns. Every displacement pivot is then preceded
/// by the stress unknowns it couples to on its own element, so it meets a
/// negative definite Schur block instead of a structural zero.
pub fn element_block_ordering(system: &SparseSystem) -> Result<Vec<usize>> {
    let (bs, bu) = system.dofs_per_element;
    let ns = system.stress_dofs();
    let nu = system.displacement_dofs();
    if bs == 0 || bu == 0 || !ns.is_multiple_of(bs) || !nu.is_multiple_of(bu) || ns / bs != nu / bu {
        return Err(Error::DimensionMismatch(format!(
            "blocks of {bs} and {bu} unknowns do not tile {ns} stress and {nu} displacement unknowns"
        )));
    }
    let ne = ns / bs;
    let mut col_ptr = vec![0usize];
    let mut row_idx = Vec::new();
    let a = system.a.symbolic();
    for e in 0..ne {
        let mut rows: Vec<usize> = (e * bs..(e + 1) * bs)
            .flat_map(|c| a.row_idx_of_col_raw(c).iter().map(|r| r / bs))
            .collect();
        rows.push(e);
        rows.sort_unstable();
        rows.dedup();
        row_idx.extend(rows);
        col_ptr.push(row_idx.len());
    }
    let graph = SymbolicSparseColMat::new_checked(ne, ne, col_ptr, None, row_idx);
    let mut perm = vec![0usize; ne];
    let mut perm_inv = vec![0usize; ne];
    let nnz = graph.compute_nnz();
    let mut mem = MemBuffer::new(amd::order_scratch::<usize>(ne, nnz));
    amd::order(
        &mut perm,
        &mut perm_inv,
        graph.as_ref(),
        amd::Control::default(),
        MemStack::new(&mut mem),
    )
    .map_err(|e| Error::Singular {
        context: String::new(),
        reason: format!("element ordering failed: {e:?}"),
    })?;
    let mut order = Vec::with_capacity(ns + nu);
    for &e in &perm {
        order.extend(e * bs..(e + 1) * bs);
        order.extend(ns + e * bu..ns + (e + 1) * bu);
    }
    Ok(order)
}

/// Lower triangle of `[A B^T; B 0]`.
fn block_matrix_lower(system: &SparseSystem) -> SparseColMat<usize, f64> {
    let ns = system.stress_dofs();
    let n = ns + system.displacement_dofs();
    let (a, b) = (&system.a, &system.b);
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0usize);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    for c in 0..ns {
        for (&r, &v) in a.row_idx_of_col_raw(c).iter().zip(a.val_of_col(c)) {
            if r >= c {
                row_idx.push(r);
                values.push(v);
            }
        }
        // column c of B, shifted below the stress block
        for (&r, &v) in b.row_idx_of_col_raw(c).iter().zip(b.val_of_col(c)) {
            row_idx.push(ns + r);
            values.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    for _ in ns..n {
        col_ptr.push(row_idx.len());
    }
    let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
    SparseColMat::new(symbolic, values)
}

/// Factors with more entries than this are stored in single precision; the
/// double-precision solution is then recovered by preconditioned GMRES.
pub const DOUBLE_FACTOR_ENTRIES: usize = 1 << 27;

/// Supernodal `L B L^T` factorization with Bunch–Kaufman pivoting inside
/// supernodes, in precision `T`.
struct LbltFactor<T> {
    symbolic: SymbolicCholesky<usize>,
    values: Vec<T>,
    subdiag: Vec<T>,
    fwd: Vec<usize>,
    bwd: Vec<usize>,
}

impl<T: faer::traits::RealField + Copy> LbltFactor<T> {
    fn new(symbolic: SymbolicCholesky<usize>, lower: SparseColMatRef<'_, usize, T>) -> Self {
        let n = symbolic.nrows();
        let par = Par::Seq;
        let mut values = vec![T::zero_impl(); symbolic.len_val()];
        let mut subdiag = vec![T::zero_impl(); n];
        let mut fwd = vec![0usize; n];
        let mut bwd = vec![0usize; n];
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_intranode_lblt_scratch::<T>(par, Default::default()));
        symbolic.factorize_numeric_intranode_lblt(
            &mut values,
            &mut subdiag,
            &mut fwd,
            &mut bwd,
            lower,
            Side::Lower,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        );
        LbltFactor {
            symbolic,
            values,
            subdiag,
            fwd,
            bwd,
        }
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.symbolic.nrows();
        let perm = PermRef::new_checked(&self.fwd, &self.bwd, n);
        let factor = IntranodeLbltRef::new(&self.symbolic, &self.values, &self.subdiag, perm);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<T>(1, Par::Seq));
        factor.solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(x, n, 1),
            Par::Seq,
            MemStack::new(&mut mem),
        );
    }
}

enum Factor {
    Double(LbltFactor<f64>),
    Single(LbltFactor<f32>),
}

impl Factor {
    fn apply(&self, x: &mut [f64]) {
        match self {
            Factor::Double(f) => f.solve_in_place(x),
            Factor::Single(f) => {
                let mut y: Vec<f32> = x.iter().map(|&v| v as f32).collect();
                f.solve_in_place(&mut y);
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi = yi as f64;
                }
            }
        }
    }
}

fn solve_direct(system: &SparseSystem, options: &SolveOptions) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let ns = system.stress_dofs();
    let singular = |reason: String| Error::Singular {
        context: options.context.clone(),
        reason,
    };
    let order = element_block_ordering(system)?;
    let n = order.len();
    let mut inverse = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }
    let lower = block_matrix_lower(system);
    let symbolic = factorize_symbolic_cholesky(
        lower.symbolic(),
        Side::Lower,
        SymmetricOrdering::Custom(PermRef::new_checked(&order, &inverse, n)),
        CholeskySymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        },
    )
    .map_err(|e| singular(format!("symbolic factorization failed: {e:?}")))?;
    let factor = if symbolic.len_val() <= DOUBLE_FACTOR_ENTRIES {
        Factor::Double(LbltFactor::new(symbolic, lower.as_ref()))
    } else {
        let (sym, values) = lower.into_parts();
        let values: Vec<f32> = values.into_iter().map(|v| v as f32).collect();
        let lower32 = SparseColMat::new(sym, values);
        Factor::Single(LbltFactor::new(symbolic, lower32.as_ref()))
    };

    let apply_k = |x: &[f64]| -> Vec<f64> {
        let (r1, r2) = residual_vectors_homogeneous(system, &x[..ns], &x[ns..]);
        r1.into_iter().chain(r2).collect()
    };
    let mut rhs = vec![0.0; n];
    rhs[ns..].copy_from_slice(&system.load);
    let target = 1e-3 * RESIDUAL_TOLERANCE * norm2(&system.load).max(1.0);
    let (x, iterations) = gmres(&apply_k, |v| factor.apply(v), &rhs, target, options.gmres_restart, options.gmres_max_iterations)
        .map_err(|(iterations, residual)| Error::NotConverged { iterations, residual })?;
    let mut x = x;
    let displacement = x.split_off(ns);
    Ok((x, displacement, iterations))
}

/// `(A s + B^T u, B s)`.
fn residual_vectors_homogeneous(system: &SparseSystem, stress: &[f64], displacement: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut r1 = mul(&system.a, stress);
    for (r, x) in r1.iter_mut().zip(mul_transpose(&system.b, displacement)) {
        *r += x;
    }
    (r1, mul(&system.b, stress))
}

/// Restarted GMRES with right preconditioning, started from `M^{-1} b`.
///
/// Stops once `||b - K x|| <= target`; on failure returns the iteration count
/// and the final relative residual.
fn gmres(
    apply_k: &dyn Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&mut [f64]),
    b: &[f64],
    target: f64,
    restart: usize,
    max_iterations: usize,
) -> std::result::Result<(Vec<f64>, usize), (usize, f64)> {
    let n = b.len();
    let b_norm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = b.to_vec();
    precondition(&mut x);
    let mut iterations = 0;
    loop {
        let kx = apply_k(&x);
        let r: Vec<f64> = b.iter().zip(&kx).map(|(bi, ki)| bi - ki).collect();
        let beta = norm2(&r);
        if beta <= target {
            return Ok((x, iterations));
        }
        if iterations >= max_iterations {
            return Err((iterations, beta / b_norm));
        }
        let m = restart.max(1);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut preconditioned: Vec<Vec<f64>> = Vec::with_capacity(m);
        // Hessenberg columns after Givens rotations
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![beta];
        for j in 0..m {
            let mut z = basis[j].clone();
            precondition(&mut z);
            let mut w = apply_k(&z);
            preconditioned.push(z);
            let mut col = Vec::with_capacity(j + 2);
            // modified Gram–Schmidt, twice
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = crate::sparse::dot(&w, v);
                    for (wk, vk) in w.iter_mut().zip(v) {
                        *wk -= hij * vk;
                    }
                    if col.len() <= i {
                        col.push(hij);
                    } else {
                        col[i] += hij;
                    }
                }
            }
            let wn = norm2(&w);
            col.push(wn);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (a, bb) = (col[j], col[j + 1]);
            let rho = a.hypot(bb);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, bb / rho) };
            col[j] = rho;
            col[j + 1] = 0.0;
            cs.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h.push(col);
            iterations += 1;
            let estimate = g[j + 1].abs();
            if estimate <= 0.5 * target || wn == 0.0 || iterations >= max_iterations || j + 1 == m {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular system
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[l][i] * y[l];
            }
            y[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
        }
        for (yi, z) in y.iter().zip(&preconditioned) {
            for t in 0..n {
                x[t] += yi * z[t];
            }
        }
    }
}

fn solve_schur_cg(system: &SparseSystem, options: &SolveOptions) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let ns = system.stress_dofs();
    let nu = system.displacement_dofs();
    let llt = system.a.sp_cholesky(Side::Lower).map_err(|e| Error::Singular {
        context: options.context.clone(),
        reason: format!("A is not positive definite: {e:?}"),
    })?;
    let solve_a = |rhs: &[f64]| -> Vec<f64> {
        let mut y = rhs.to_vec();
        llt.solve_in_place(MatMut::from_column_major_slice_mut(&mut y, ns, 1));
        y
    };
    let schur = |v: &[f64]| -> Vec<f64> { mul(&system.b, &solve_a(&mul_transpose(&system.b, v))) };

    // S u = -F
    let rhs: Vec<f64> = system.load.iter().map(|f| -f).collect();
    let rhs_norm = norm2(&rhs);
    let mut u = vec![0.0; nu];
    let mut iterations = 0;
    if rhs_norm > 0.0 {
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut rr = crate::sparse::dot(&r, &r);
        loop {
            if rr.sqrt() <= options.cg_tolerance * rhs_norm {
                break;
            }
            if iterations >= options.cg_max_iterations {
                return Err(Error::NotConverged {
                    iterations,
                    residual: rr.sqrt() / rhs_norm,
                });
            }
            let sp = schur(&p);
            let alpha = rr / crate::sparse::dot(&p, &sp);
            for i in 0..nu {
                u[i] += alpha * p[i];
                r[i] -= alpha * sp[i];
            }
            let rr_new = crate::sparse::dot(&r, &r);
            let beta = rr_new / rr;
            for i in 0..nu {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_new;
            iterations += 1;
        }
    }
    let bt_u = mul_transpose(&system.b, &u);
    let stress: Vec<f64> = solve_a(&bt_u).into_iter().map(|x| -x).collect();
    Ok((stress, u, iterations))
}
