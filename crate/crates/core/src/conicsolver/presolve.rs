//! Removal of linearly dependent equality rows.

use super::sparse::SparseMatrix;
use crate::linalg;

pub(crate) enum RowReduction {
    /// Indices of an independent subset of rows spanning the whole row space.
    Independent(Vec<usize>),
    /// `y` with `Aᵀy = 0` and `bᵀy = −1`.
    Inconsistent(Vec<f64>),
}

/// Greedy modified Gram–Schmidt over the rows of `a`, tracking each
/// orthonormal vector as a combination of original rows.
pub(crate) fn reduce_rows(a: &SparseMatrix, b: &[f64]) -> RowReduction {
    let m = a.rows();
    let rows = a.to_dense_rows();
    let b_scale = 1.0 + linalg::norm_inf(b);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut keep = Vec::new();
    for k in 0..m {
        let norm0 = linalg::norm2(&rows[k]);
        if norm0 == 0.0 {
            if b[k].abs() > 1e-9 * b_scale {
                let mut y = vec![0.0; m];
                y[k] = -1.0 / b[k];
                return RowReduction::Inconsistent(y);
            }
            continue;
        }
        let mut v = rows[k].clone();
        let mut coef: Vec<f64> = vec![0.0; m];
        coef[k] = 1.0;
        for _pass in 0..2 {
            for (q, qc) in basis.iter().zip(&coeffs) {
                let p = linalg::dot(q, &v);
                if p != 0.0 {
                    linalg::axpy(-p, q, &mut v);
                    for &(i, c) in qc {
                        coef[i] -= p * c;
                    }
                }
            }
        }
        let nv = linalg::norm2(&v);
        if nv <= 1e-10 * norm0 {
            let r: f64 = coef.iter().zip(b).map(|(c, bi)| c * bi).sum();
            let cnorm = coef.iter().fold(0.0f64, |s, c| s.max(c.abs()));
            if r.abs() > 1e-8 * b_scale * cnorm.max(1.0) {
                return RowReduction::Inconsistent(coef.iter().map(|c| -c / r).collect());
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v);
        coeffs.push(coef.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| (i, c / nv)).collect());
        keep.push(k);
    }
    RowReduction::Independent(keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_duplicate_rows() {
        let a = SparseMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 0, 2.0), (2, 1, 1.0)]);
        match reduce_rows(&a, &[1.0, 2.0, 0.5]) {
            RowReduction::Independent(k) => assert_eq!(k, vec![0, 2]),
            RowReduction::Inconsistent(_) => panic!("consistent system"),
        }
    }

    #[test]
    fn detects_inconsistency() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 2.0)]);
        let b = [1.0, 3.0];
        match reduce_rows(&a, &b) {
            RowReduction::Inconsistent(y) => {
                let aty = a.mul_t_vec(&y);
                assert!(linalg::norm_inf(&aty) < 1e-12);
                let by: f64 = y.iter().zip(&b).map(|(p, q)| p * q).sum();
                assert!((by + 1.0).abs() < 1e-12);
            }
            RowReduction::Independent(_) => panic!("inconsistent system"),
        }
    }
}
