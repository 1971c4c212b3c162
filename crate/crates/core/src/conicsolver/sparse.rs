//! Compressed sparse row matrices for constraint operators.

use serde::{Deserialize, Serialize};

/// Row-compressed sparse matrix. Duplicate triplets are summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripletRepr", into = "TripletRepr")]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TripletRepr {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TryFrom<TripletRepr> for SparseMatrix {
    type Error = String;

    fn try_from(r: TripletRepr) -> Result<Self, String> {
        if let Some(&(i, j, _)) = r.entries.iter().find(|e| e.0 >= r.rows || e.1 >= r.cols) {
            return Err(format!("entry ({i}, {j}) outside {}x{}", r.rows, r.cols));
        }
        Ok(SparseMatrix::from_triplets(r.rows, r.cols, r.entries))
    }
}

impl From<SparseMatrix> for TripletRepr {
    fn from(m: SparseMatrix) -> Self {
        TripletRepr { rows: m.rows, cols: m.cols, entries: m.triplets().collect() }
    }
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, row_ptr: vec![0; rows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    /// Panics if a triplet lies outside `rows x cols`.
    pub fn from_triplets(rows: usize, cols: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().filter(|e| e.2 != 0.0).collect();
        for &(i, j, _) in &t {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
        }
        t.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { rows, cols, row_ptr, col_idx, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `y += alpha Mᵀ x`.
    pub fn mul_t_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += alpha * v * xi;
            }
        }
    }

    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        self.mul_t_vec_add(1.0, x, &mut y);
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    /// Keep the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseMatrix {
        let t = keep.iter().enumerate().flat_map(|(new, &old)| self.row(old).map(move |(j, v)| (new, j, v)));
        SparseMatrix::from_triplets(keep.len(), self.cols, t.collect::<Vec<_>>())
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                let mut r = vec![0.0; self.cols];
                for (j, v) in self.row(i) {
                    r[j] = v;
                }
                r
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_products() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (1, 2, 2.0), (0, 0, 1.5), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![2.5, 1.0]);
        assert_eq!(m.mul_t_vec(&[1.0, 2.0]), vec![0.5, 0.0, 4.0]);
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn json_round_trip() {
        let m = SparseMatrix::from_triplets(3, 2, vec![(2, 1, 4.0), (0, 0, -1.0)]);
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"entries\""));
        let back: SparseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
