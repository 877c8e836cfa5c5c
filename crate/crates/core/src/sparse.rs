//! Triplet accumulation into compressed sparse columns.
//!
//! Duplicates are summed in insertion order (stable sort), so entries that
//! receive identical contributions in identical order come out bit-identical.
//! Symmetric assembly relies on this.

use faer::sparse::{SparseColMat, SymbolicSparseColMat};

#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, val));
    }

    pub fn build(mut self) -> SparseColMat<usize, f64> {
        self.entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; self.ncols + 1];
        let mut row_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..self.ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let symbolic =
            SymbolicSparseColMat::new_checked(self.nrows, self.ncols, col_ptr, None, row_idx);
        SparseColMat::new(symbolic, values)
    }
}

/// `y = M x`.
pub fn mul(m: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![0.0; m.nrows()];
    let sym = m.symbolic();
    let (ptr, rows, vals) = (sym.col_ptr(), sym.row_idx(), m.val());
    for c in 0..m.ncols() {
        let xc = x[c];
        if xc == 0.0 {
            continue;
        }
        for k in ptr[c]..ptr[c + 1] {
            y[rows[k]] += vals[k] * xc;
        }
    }
    y
}

/// `y = M^T x`.
pub fn mul_transpose(m: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.nrows(), x.len());
    let sym = m.symbolic();
    let (ptr, rows, vals) = (sym.col_ptr(), sym.row_idx(), m.val());
    (0..m.ncols())
        .map(|c| (ptr[c]..ptr[c + 1]).map(|k| vals[k] * x[rows[k]]).sum())
        .collect()
}

/// Iterates `(row, col, value)` over stored entries.
pub fn entries(m: &SparseColMat<usize, f64>) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    let sym = m.symbolic();
    let (ptr, rows, vals) = (sym.col_ptr(), sym.row_idx(), m.val());
    (0..m.ncols()).flat_map(move |c| (ptr[c]..ptr[c + 1]).map(move |k| (rows[k], c, vals[k])))
}

pub fn to_dense(m: &SparseColMat<usize, f64>) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
    for (r, c, v) in entries(m) {
        d[r][c] += v;
    }
    d
}

/// `max |M - M^T|` over all entries; `M` must be square.
pub fn asymmetry(m: &SparseColMat<usize, f64>) -> f64 {
    use std::collections::HashMap;
    let map: HashMap<(usize, usize), f64> = entries(m).map(|(r, c, v)| ((r, c), v)).collect();
    map.iter()
        .map(|(&(r, c), &v)| (v - map.get(&(c, r)).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 3);
        b.push(0, 1, 1.0);
        b.push(1, 2, 2.0);
        b.push(0, 1, 0.5);
        let m = b.build();
        let d = to_dense(&m);
        assert_eq!(d, vec![vec![0.0, 1.5, 0.0], vec![0.0, 0.0, 2.0]]);
        assert_eq!(mul(&m, &[1.0, 2.0, 3.0]), vec![3.0, 6.0]);
        assert_eq!(mul_transpose(&m, &[1.0, 1.0]), vec![0.0, 1.5, 2.0]);
    }
}

/// Sparse matrix made of dense blocks on an element-adjacency pattern.
///
/// Block `(rb, cb)` is `row_block x col_block` and stored row-major.
/// Contributions are accumulated in call order.
#[derive(Debug, Clone)]
pub struct BlockSparse {
    row_block: usize,
    col_block: usize,
    /// Sorted column blocks of each row block.
    pattern: Vec<Vec<usize>>,
    /// Offset of each stored block in `data`, aligned with `pattern`.
    offsets: Vec<Vec<usize>>,
    data: Vec<f64>,
    ncol_blocks: usize,
}

impl BlockSparse {
    pub fn new(pattern: Vec<Vec<usize>>, ncol_blocks: usize, row_block: usize, col_block: usize) -> Self {
        let mut offsets = Vec::with_capacity(pattern.len());
        let mut next = 0;
        let bs = row_block * col_block;
        let pattern: Vec<Vec<usize>> = pattern
            .into_iter()
            .map(|mut cols| {
                cols.sort_unstable();
                cols.dedup();
                cols
            })
            .collect();
        for cols in &pattern {
            offsets.push(
                cols.iter()
                    .map(|_| {
                        let o = next;
                        next += bs;
                        o
                    })
                    .collect(),
            );
        }
        BlockSparse {
            row_block,
            col_block,
            pattern,
            offsets,
            data: vec![0.0; next],
            ncol_blocks,
        }
    }

    pub fn block_mut(&mut self, rb: usize, cb: usize) -> &mut [f64] {
        let pos = self.pattern[rb]
            .binary_search(&cb)
            .unwrap_or_else(|_| panic!("block ({rb}, {cb}) not in pattern"));
        let o = self.offsets[rb][pos];
        &mut self.data[o..o + self.row_block * self.col_block]
    }

    /// Adds `scale * block` where `block` is `row_block x col_block` row-major
    /// with the given leading dimension and column offset.
    pub fn add_block(&mut self, rb: usize, cb: usize, src: &[f64], ld: usize, col0: usize, row0: usize) {
        let (r, c) = (self.row_block, self.col_block);
        let dst = self.block_mut(rb, cb);
        for i in 0..r {
            let srow = &src[(row0 + i) * ld + col0..(row0 + i) * ld + col0 + c];
            for (d, s) in dst[i * c..(i + 1) * c].iter_mut().zip(srow) {
                *d += s;
            }
        }
    }

    /// Compressed-column form with exact zeros dropped.
    pub fn to_csc(&self) -> SparseColMat<usize, f64> {
        let (r, c) = (self.row_block, self.col_block);
        let nrows = self.pattern.len() * r;
        let ncols = self.ncol_blocks * c;
        // transpose the block pattern: for each column block, the row blocks touching it
        let mut by_col: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.ncol_blocks];
        for (rb, cols) in self.pattern.iter().enumerate() {
            for (k, &cb) in cols.iter().enumerate() {
                by_col[cb].push((rb, self.offsets[rb][k]));
            }
        }
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        col_ptr.push(0usize);
        let nnz = self.data.iter().filter(|&&x| x != 0.0).count();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for (cb, rows) in by_col.iter().enumerate() {
            for j in 0..c {
                for &(rb, o) in rows {
                    for i in 0..r {
                        let v = self.data[o + i * c + j];
                        if v != 0.0 {
                            row_idx.push(rb * r + i);
                            values.push(v);
                        }
                    }
                }
                let _ = cb;
                col_ptr.push(row_idx.len());
            }
        }
        let symbolic = SymbolicSparseColMat::new_checked(nrows, ncols, col_ptr, None, row_idx);
        SparseColMat::new(symbolic, values)
    }
}
