//! Sparse and small-dense linear algebra helpers shared by the solvers.
//!
//! Sparse symmetric positive definite systems are factorized once with an
//! LDL^T decomposition (reverse Cuthill-McKee ordering) and solved repeatedly.
//! The insulation gradient flow additionally needs `(F + U D U^T) x = b` with
//! a diagonal update `D > 0` supported on a few boundary dofs, which is
//! handled by a Woodbury-style solver so `F` is factorized only once.

use nalgebra::{Cholesky, DMatrix, DVector};
use sprs::{CsMat, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// Triplet accumulator for symmetric or rectangular sparse assembly.
pub struct Triplets {
    rows: usize,
    cols: usize,
    mat: TriMat<f64>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            mat: TriMat::new((rows, cols)),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if v != 0.0 {
            self.mat.add_triplet(i, j, v);
        }
    }

    pub fn to_csr(&self) -> CsMat<f64> {
        self.mat.to_csr()
    }
}

/// y = A x for CSR `a`.
pub fn spmv(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.cols(), x.len());
    let mut y = vec![0.0; a.rows()];
    for (row_idx, row) in a.outer_iterator().enumerate() {
        let mut acc = 0.0;
        for (col, &v) in row.iter() {
            acc += v * x[col];
        }
        y[row_idx] = acc;
    }
    y
}

/// y = A^T x for CSR `a` (used for constraint rows).
pub fn spmv_transpose(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.rows(), x.len());
    let mut y = vec![0.0; a.cols()];
    for (row_idx, row) in a.outer_iterator().enumerate() {
        let xi = x[row_idx];
        if xi != 0.0 {
            for (col, &v) in row.iter() {
                y[col] += v * xi;
            }
        }
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Extract the square submatrix of `a` with rows/columns restricted to `keep`.
///
/// `keep[i]` lists the original index of reduced dof `i`.
pub fn restrict(a: &CsMat<f64>, keep: &[usize]) -> CsMat<f64> {
    let mut pos = vec![usize::MAX; a.cols()];
    for (new, &old) in keep.iter().enumerate() {
        pos[old] = new;
    }
    let mut t = Triplets::new(keep.len(), keep.len());
    for (row_idx, row) in a.outer_iterator().enumerate() {
        let ri = pos[row_idx];
        if ri == usize::MAX {
            continue;
        }
        for (col, &v) in row.iter() {
            let ci = pos[col];
            if ci != usize::MAX {
                t.push(ri, ci, v);
            }
        }
    }
    t.to_csr()
}

/// Restrict the columns of a rectangular matrix to `keep`.
pub fn restrict_cols(a: &CsMat<f64>, keep: &[usize]) -> CsMat<f64> {
    let mut pos = vec![usize::MAX; a.cols()];
    for (new, &old) in keep.iter().enumerate() {
        pos[old] = new;
    }
    let mut t = Triplets::new(a.rows(), keep.len());
    for (row_idx, row) in a.outer_iterator().enumerate() {
        for (col, &v) in row.iter() {
            let ci = pos[col];
            if ci != usize::MAX {
                t.push(row_idx, ci, v);
            }
        }
    }
    t.to_csr()
}

/// LDL^T factorization of a sparse symmetric positive definite matrix.
pub struct SymFactor {
    n: usize,
    inner: LdlNumeric<f64, usize>,
}

impl SymFactor {
    pub fn new(a: &CsMat<f64>) -> Result<Self, LinalgError> {
        if a.rows() != a.cols() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let inner = Ldl::new()
            .check_symmetry(sprs::SymmetryCheck::DontCheckSymmetry)
            .fill_in_reduction(sprs::FillInReduction::ReverseCuthillMcKee)
            .numeric(a.view())
            .map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        Ok(Self { n: a.rows(), inner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        self.inner.solve(b)
    }
}

/// Solves `(F + U diag(d) U^T) x = b` where `U` selects the dofs listed in
/// `cols` and `d > 0` changes from call to call while `F` stays fixed.
pub struct DiagUpdateSolver {
    factor: SymFactor,
    cols: Vec<usize>,
    /// g[j] = F^{-1} e_{cols[j]}, stored densely.
    g: Vec<Vec<f64>>,
    /// h = U^T F^{-1} U.
    h: DMatrix<f64>,
}

impl DiagUpdateSolver {
    pub fn new(f: &CsMat<f64>, cols: Vec<usize>) -> Result<Self, LinalgError> {
        let factor = SymFactor::new(f)?;
        let n = factor.n();
        let p = cols.len();
        let mut g = Vec::with_capacity(p);
        for &c in &cols {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            g.push(factor.solve(&e));
        }
        let mut h = DMatrix::zeros(p, p);
        for (j, gj) in g.iter().enumerate() {
            for (i, &c) in cols.iter().enumerate() {
                h[(i, j)] = gj[c];
            }
        }
        Ok(Self { factor, cols, g, h })
    }

    pub fn base_factor(&self) -> &SymFactor {
        &self.factor
    }

    /// Solve with the diagonal update `d` (one entry per selected dof, all > 0).
    pub fn solve(&self, d: &[f64], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let p = self.cols.len();
        debug_assert_eq!(d.len(), p);
        let mut x = self.factor.solve(b);
        if p == 0 {
            return Ok(x);
        }
        // capacitance = D^{-1} + H
        let mut cap = self.h.clone();
        for i in 0..p {
            debug_assert!(d[i] > 0.0);
            cap[(i, i)] += 1.0 / d[i];
        }
        let rhs = DVector::from_iterator(p, self.cols.iter().map(|&c| x[c]));
        let chol = Cholesky::new(cap)
            .ok_or_else(|| LinalgError::Factorization("capacitance not SPD".into()))?;
        let y = chol.solve(&rhs);
        for (j, gj) in self.g.iter().enumerate() {
            let yj = y[j];
            if yj != 0.0 {
                for (xi, gi) in x.iter_mut().zip(gj) {
                    *xi -= yj * gi;
                }
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> CsMat<f64> {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0 + 0.1 * i as f64);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn factor_solves_spd_system() {
        let a = lap1d(50);
        let f = SymFactor::new(&a).unwrap();
        let x_ref: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = spmv(&a, &x_ref);
        let x = f.solve(&b);
        for (xi, ri) in x.iter().zip(&x_ref) {
            assert!((xi - ri).abs() < 1e-11);
        }
    }

    #[test]
    fn diag_update_matches_direct_solve() {
        let n = 40;
        let a = lap1d(n);
        let cols = vec![3, 17, 25, 39];
        let d = vec![0.5, 2.0, 10.0, 1e4];
        let solver = DiagUpdateSolver::new(&a, cols.clone()).unwrap();
        // direct: build A + U D U^T densely
        let mut dense = DMatrix::zeros(n, n);
        for (i, row) in a.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                dense[(i, j)] = v;
            }
        }
        for (k, &c) in cols.iter().enumerate() {
            dense[(c, c)] += d[k];
        }
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let x = solver.solve(&d, &b).unwrap();
        let xd = Cholesky::new(dense)
            .unwrap()
            .solve(&DVector::from_column_slice(&b));
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-10, "i={i}: {} vs {}", x[i], xd[i]);
        }
    }

    #[test]
    fn restrict_keeps_selected_block() {
        let a = lap1d(6);
        let keep = vec![1, 2, 4];
        let r = restrict(&a, &keep);
        assert_eq!(r.rows(), 3);
        let d: Vec<f64> = (0..3).map(|i| *r.get(i, i).unwrap()).collect();
        assert_eq!(d, vec![2.1, 2.2, 2.4]);
        // (1,2) adjacent in original -> kept; (2,4) not adjacent -> zero
        assert_eq!(*r.get(0, 1).unwrap(), -1.0);
        assert!(r.get(1, 2).is_none());
    }
}
