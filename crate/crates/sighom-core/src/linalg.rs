//! Minimal sparse and dense linear algebra: CSR matrices with deterministic
//! assembly, a Jacobi-preconditioned conjugate gradient solver and a dense
//! Cholesky factorization for small systems.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Triplet accumulator. Duplicate entries are summed in insertion order, so
/// two identical assembly passes produce bit-identical matrices.
pub struct Triplets {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Triplets { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn into_csr(mut self) -> Csr {
        // stable sort keeps duplicate summation in insertion order
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut it = self.entries.into_iter().peekable();
        for row in 0..self.n_rows {
            while let Some(&(r, c, _)) = it.peek() {
                if r != row {
                    break;
                }
                let mut acc = 0.0;
                while let Some(&(r2, c2, v)) = it.peek() {
                    if r2 != row || c2 != c {
                        break;
                    }
                    acc += v;
                    it.next();
                }
                col_idx.push(c);
                values.push(acc);
            }
            row_ptr[row + 1] = col_idx.len();
        }
        Csr { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        Csr {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
    }

    pub fn mul_vec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut row_acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                row_acc += v * x[*c];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                if *c == i {
                    d[i] = *v;
                }
            }
        }
        d
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut cursor = counts;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let slot = cursor[*c];
                col_idx[slot] = i;
                values[slot] = *v;
                cursor[*c] += 1;
            }
        }
        Csr { n_rows: self.n_cols, n_cols: self.n_rows, row_ptr, col_idx, values }
    }

    /// Sparse product `self * other` with deterministic row merges.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.n_cols, other.n_rows);
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.n_cols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(*c);
                for (oc, ov) in ocols.iter().zip(ovals) {
                    if acc[*oc] == 0.0 && !touched.contains(oc) {
                        touched.push(*oc);
                    }
                    acc[*oc] += v * ov;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c]);
                acc[c] = 0.0;
            }
            touched.clear();
            row_ptr[i + 1] = col_idx.len();
        }
        Csr { n_rows: self.n_rows, n_cols: other.n_cols, row_ptr, col_idx, values }
    }

    pub fn add(&self, other: &Csr) -> Csr {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q >= bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    col_idx.push(ac[p]);
                    values.push(av[p]);
                    p += 1;
                } else if p >= ac.len() || bc[q] < ac[p] {
                    col_idx.push(bc[q]);
                    values.push(bv[q]);
                    q += 1;
                } else {
                    col_idx.push(ac[p]);
                    values.push(av[p] + bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Csr { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        let t = self.transpose();
        if t.col_idx != self.col_idx || t.row_ptr != self.row_ptr {
            // sparsity patterns may still match modulo explicit zeros; fall
            // back to a value comparison through dense probes of each row
            return self.symmetric_slow(tol);
        }
        self.values
            .iter()
            .zip(&t.values)
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    fn symmetric_slow(&self, tol: f64) -> bool {
        let t = self.transpose();
        for i in 0..self.n_rows {
            let (ac, av) = self.row(i);
            let (bc, bv) = t.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                if q >= bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    if av[p].abs() > tol {
                        return false;
                    }
                    p += 1;
                } else if p >= ac.len() || bc[q] < ac[p] {
                    if bv[q].abs() > tol {
                        return false;
                    }
                    q += 1;
                } else {
                    if (av[p] - bv[q]).abs() > tol {
                        return false;
                    }
                    p += 1;
                    q += 1;
                }
            }
        }
        true
    }

    /// Extracts the square submatrix on `keep` (which must be sorted).
    pub fn extract(&self, keep: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.n_cols];
        for (sub, &full) in keep.iter().enumerate() {
            map[full] = sub;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (sub, &full) in keep.iter().enumerate() {
            let (cols, vals) = self.row(full);
            for (c, v) in cols.iter().zip(vals) {
                if map[*c] != usize::MAX {
                    col_idx.push(map[*c]);
                    values.push(*v);
                }
            }
            row_ptr[sub + 1] = col_idx.len();
        }
        Csr { n_rows: keep.len(), n_cols: keep.len(), row_ptr, col_idx, values }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                d[i * self.n_cols + c] = *v;
            }
        }
        d
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Converges to `||r|| <= rel_tol * ||b||`; a run that exhausts `max_iter`
/// returns [`Error::Stall`] carrying the trailing residual history.
pub fn cg_solve(a: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let norm_b = libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let target = rel_tol * norm_b;
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(ri, zi)| ri * zi).sum();
    let mut ap = vec![0.0; n];
    let mut history: Vec<f64> = Vec::new();

    for iter in 0..max_iter {
        let res = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
        history.push(res);
        if history.len() > 24 {
            history.remove(0);
        }
        if res <= target {
            return Ok((x, iter));
        }
        a.mul_vec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(pi, ai)| pi * ai).sum();
        if pap <= 0.0 {
            return Err(Error::Conditioning(format!(
                "matrix not positive definite in CG (p^T A p = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(ri, zi)| ri * zi).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Stall { history })
}

/// Dense Cholesky factorization `A = L L^T`, row-major storage.
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::Conditioning(format!(
                            "nonpositive pivot {sum:e} at row {i} in Cholesky"
                        )));
                    }
                    l[i * n + i] = libm::sqrt(sum);
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> Csr {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.into_csr()
    }

    #[test]
    fn triplets_accumulate_deterministically() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, 2.0);
        t.push(0, 0, 0.5);
        t.push(0, 1, -1.0);
        let a = t.into_csr();
        assert_eq!(a.row(0), (&[0usize, 1][..], &[1.5, -1.0][..]));
        assert_eq!(a.row(1), (&[1usize][..], &[2.0][..]));

        // identical input twice gives bit-identical output
        let build = || {
            let mut t = Triplets::new(3, 3);
            for i in 0..3 {
                t.push(i, i, 0.1 * (i as f64 + 1.0));
                t.push(i, (i + 1) % 3, -0.3);
            }
            t.into_csr()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn matvec_and_quadform() {
        let a = laplacian_1d(4);
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = a.mul_vec_alloc(&x);
        assert_eq!(y, alloc::vec![0.0, 0.0, 0.0, 5.0]);
        let q = a.quad_form(&x);
        // x^T A x = sum of (x_{i+1}-x_i)^2 + x_0^2 + x_n^2
        assert!((q - (1.0 + 1.0 + 1.0 + 1.0 + 16.0)).abs() < 1e-14);
    }

    #[test]
    fn transpose_and_add() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 1, 5.0);
        t.push(1, 0, -2.0);
        t.push(1, 2, 7.0);
        let a = t.into_csr();
        let at = a.transpose();
        assert_eq!(at.n_rows, 3);
        assert_eq!(at.row(0), (&[1usize][..], &[-2.0][..]));
        assert_eq!(at.row(1), (&[0usize][..], &[5.0][..]));
        let sum = a.add(&a);
        assert_eq!(sum.row(1), (&[0usize, 2][..], &[-4.0, 14.0][..]));
    }

    #[test]
    fn matmul_small() {
        // A = [[1, 2], [0, 3]], B = [[0, 1], [1, 0]]  ->  AB = [[2, 1], [3, 0]]
        let mut ta = Triplets::new(2, 2);
        ta.push(0, 0, 1.0);
        ta.push(0, 1, 2.0);
        ta.push(1, 1, 3.0);
        let mut tb = Triplets::new(2, 2);
        tb.push(0, 1, 1.0);
        tb.push(1, 0, 1.0);
        let ab = ta.into_csr().matmul(&tb.into_csr());
        assert_eq!(ab.to_dense(), alloc::vec![2.0, 1.0, 3.0, 0.0]);
    }

    #[test]
    fn symmetry_check() {
        let a = laplacian_1d(5);
        assert!(a.is_symmetric(0.0));
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0 + 1e-6);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        let b = t.into_csr();
        assert!(!b.is_symmetric(1e-9));
        assert!(b.is_symmetric(1e-3));
    }

    #[test]
    fn cg_matches_cholesky() {
        let n = 40;
        let a = laplacian_1d(n);
        let b: Vec<f64> = (0..n).map(|i| libm::sin(i as f64)).collect();
        let (x_cg, iters) = cg_solve(&a, &b, 1e-12, 10 * n).unwrap();
        assert!(iters <= n + 2);
        let chol = DenseCholesky::factor(&a.to_dense(), n).unwrap();
        let x_d = chol.solve(&b);
        for i in 0..n {
            assert!((x_cg[i] - x_d[i]).abs() < 1e-8, "component {i}");
        }
    }

    #[test]
    fn cg_zero_rhs() {
        let a = laplacian_1d(8);
        let (x, iters) = cg_solve(&a, &[0.0; 8], 1e-12, 100).unwrap();
        assert_eq!(iters, 0);
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = alloc::vec![1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(matches!(
            DenseCholesky::factor(&a, 2),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn extract_submatrix() {
        let a = laplacian_1d(5);
        let sub = a.extract(&[1, 2, 3]);
        assert_eq!(sub.n_rows, 3);
        assert_eq!(sub.row(0), (&[0usize, 1][..], &[2.0, -1.0][..]));
        assert_eq!(sub.row(1), (&[0usize, 1, 2][..], &[-1.0, 2.0, -1.0][..]));
    }
}
