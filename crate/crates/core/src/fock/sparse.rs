//! Compressed-sparse-row complex matrices.
//!
//! Fock-space operators in this crate are block-sparse (ladder operators,
//! particle-conserving bilinears, block-diagonal propagators), so everything is
//! stored row-compressed and products are formed with a dense row accumulator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut indices = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != C64::new(0.0, 0.0) {
                indices.push(i);
                values.push(d);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: n, ncols: n, indptr, indices, values }
    }

    /// Assemble from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }.pruned(0.0)
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_tol: f64) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.norm() > drop_tol {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Drop entries with modulus `<= tol`.
    pub fn pruned(self, tol: f64) -> Self {
        if self.values.iter().all(|v| v.norm() > tol) {
            return self;
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].norm() > tol {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.pruned(0.0)
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: C64, other: &CsrMatrix, b: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "shape mismatch in sum");
        let trip = self
            .iter()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.iter().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        self.axpby(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &CsrMatrix) -> Self {
        self.axpby(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows, "shape mismatch in product");
        let n = other.ncols;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut seen = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if seen[c] != r {
                        seen[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: n, indptr, indices, values }
    }

    pub fn matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(self.ncols, v.len(), "shape mismatch in matrix-vector product");
        DVector::from_iterator(self.nrows, (0..self.nrows).map(|r| self.row(r).map(|(c, a)| a * v[c]).sum()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max |self - other|.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn hermiticity_error(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// Connected components of the (symmetrised) sparsity graph, each sorted.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, _) in self.iter() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_matches_dense() {
        let a = DMatrix::from_fn(5, 4, |r, k| if (r + k) % 3 == 0 { c(r as f64, k as f64 - 1.0) } else { c(0.0, 0.0) });
        let b = DMatrix::from_fn(4, 3, |k, j| if (k * j) % 2 == 1 { c(1.5, -(j as f64)) } else { c(0.0, 0.0) });
        let p = CsrMatrix::from_dense(&a, 0.0).matmul(&CsrMatrix::from_dense(&b, 0.0));
        assert!((p.to_dense() - &a * &b).norm() < 1e-14);
    }

    #[test]
    fn triplets_sum_and_adjoint() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 1.0)), (0, 1, c(1.0, 0.0)), (1, 0, c(0.0, 0.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(2.0, 1.0));
        assert_eq!(m.adjoint().get(1, 0), c(2.0, -1.0));
    }

    #[test]
    fn components() {
        let m = CsrMatrix::from_triplets(5, 5, vec![(0, 3, c(1.0, 0.0)), (4, 1, c(1.0, 0.0)), (2, 2, c(1.0, 0.0))]);
        assert_eq!(m.connected_components(), vec![vec![0, 3], vec![1, 4], vec![2]]);
    }
}
