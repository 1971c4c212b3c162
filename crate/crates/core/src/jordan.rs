//! Euclidean Jordan algebra kernel for direct products of nonnegative-orthant,
//! second-order and vectorized-semidefinite blocks.
//!
//! Coordinates are global and zero-based: block `h` occupies
//! `offset(h)..offset(h) + dim(h)`. A `PsdVec` block of order `m` stores
//! `svec(X) = (X11, √2 X12, X22, √2 X13, √2 X23, X33, …)`, i.e. the upper
//! triangle column by column, so entry `(i, j)` with `i ≤ j` lives at
//! `offset + j(j+1)/2 + i`.

use crate::linalg;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JordanError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("length {0} is not a triangular number")]
    NotTriangular(usize),
    #[error("block index {index} out of range ({count} blocks)")]
    BlockIndex { index: usize, count: usize },
    #[error("block {0} has no primitive idempotents")]
    EmptyBlock(usize),
    #[error("symmetric eigensolver failed")]
    Eigensolver,
}

/// One symmetric-cone factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Block {
    Nonneg { dim: usize },
    #[serde(rename = "soc")]
    SecondOrder { dim: usize },
    #[serde(rename = "psd")]
    PsdVec { order: usize },
}

impl Block {
    pub fn dim(&self) -> usize {
        match *self {
            Block::Nonneg { dim } | Block::SecondOrder { dim } => dim,
            Block::PsdVec { order } => order * (order + 1) / 2,
        }
    }

    /// Number of eigenvalues.
    pub fn rank(&self) -> usize {
        match *self {
            Block::Nonneg { dim } => dim,
            Block::SecondOrder { dim } => dim.min(2),
            Block::PsdVec { order } => order,
        }
    }

    /// `⟨e, e⟩` for the block identity `e`.
    pub fn degree(&self) -> usize {
        match *self {
            Block::Nonneg { dim } => dim,
            Block::SecondOrder { dim } => usize::from(dim > 0),
            Block::PsdVec { order } => order,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConeSpecRepr {
    blocks: Vec<Block>,
}

/// Ordered product of blocks with a global coordinate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ConeSpecRepr", into = "ConeSpecRepr")]
pub struct ConeSpec {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
}

impl From<ConeSpecRepr> for ConeSpec {
    fn from(r: ConeSpecRepr) -> Self {
        ConeSpec::new(r.blocks)
    }
}

impl From<ConeSpec> for ConeSpecRepr {
    fn from(c: ConeSpec) -> Self {
        ConeSpecRepr { blocks: c.blocks }
    }
}

impl ConeSpec {
    /// `SecondOrder { dim: 1 }` is stored as `Nonneg { dim: 1 }`.
    pub fn new(blocks: Vec<Block>) -> Self {
        let blocks: Vec<Block> = blocks
            .into_iter()
            .map(|b| match b {
                Block::SecondOrder { dim: 1 } => Block::Nonneg { dim: 1 },
                other => other,
            })
            .collect();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for b in &blocks {
            offsets.push(dim);
            dim += b.dim();
        }
        ConeSpec { blocks, offsets, dim }
    }

    pub fn nonneg(dim: usize) -> Self {
        Self::new(vec![Block::Nonneg { dim }])
    }

    pub fn second_order(dim: usize) -> Self {
        Self::new(vec![Block::SecondOrder { dim }])
    }

    pub fn psd(order: usize) -> Self {
        Self::new(vec![Block::PsdVec { order }])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(Block::rank).sum()
    }

    /// `⟨e, e⟩`, the barrier degree used by the interior-point method.
    pub fn degree(&self) -> usize {
        self.blocks.iter().map(Block::degree).sum()
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        let o = self.offsets[block];
        o..o + self.blocks[block].dim()
    }

    /// Product with another spec, blocks of `self` first.
    pub fn concat(&self, other: &ConeSpec) -> ConeSpec {
        let mut b = self.blocks.clone();
        b.extend_from_slice(&other.blocks);
        ConeSpec::new(b)
    }

    pub fn has_psd(&self) -> bool {
        self.blocks.iter().any(|b| matches!(b, Block::PsdVec { .. }))
    }

    /// Global index of entry `(i, j)` of PSD block `block`.
    pub fn psd_index(&self, block: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.offsets[block] + j * (j + 1) / 2 + i
    }

    /// All nonnegative-orthant coordinates.
    pub fn nonneg_coords(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (h, b) in self.blocks.iter().enumerate() {
            if let Block::Nonneg { .. } = b {
                out.extend(self.range(h));
            }
        }
        out
    }

    /// Second-order blocks as `(block index, offset, dim)`.
    pub fn soc_blocks(&self) -> Vec<(usize, usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .filter_map(|(h, b)| match *b {
                Block::SecondOrder { dim } => Some((h, self.offsets[h], dim)),
                _ => None,
            })
            .collect()
    }

    /// The index set `I_{≥0}`: nonnegative coordinates, each second-order
    /// leading coordinate and each PSD diagonal coordinate, in increasing order.
    pub fn nonneg_index_set(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (h, b) in self.blocks.iter().enumerate() {
            let o = self.offsets[h];
            match *b {
                Block::Nonneg { dim } => out.extend(o..o + dim),
                Block::SecondOrder { dim } => {
                    if dim > 0 {
                        out.push(o);
                    }
                }
                Block::PsdVec { order } => out.extend((0..order).map(|i| self.psd_index(h, i, i))),
            }
        }
        out
    }

    fn check(&self, x: &[f64]) -> Result<(), JordanError> {
        if x.len() != self.dim {
            return Err(JordanError::DimensionMismatch { expected: self.dim, actual: x.len() });
        }
        Ok(())
    }
}

/// `svec` of a symmetric matrix (upper triangle read column by column).
pub fn svec(m: &DMatrix<f64>) -> Result<Vec<f64>, JordanError> {
    if m.nrows() != m.ncols() {
        return Err(JordanError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(svec_unchecked(m))
}

fn svec_unchecked(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                v.push(m[(i, i)]);
            } else {
                v.push(SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
    }
    v
}

/// Order `m` with `m(m+1)/2 = len`, if any.
pub fn triangular_order(len: usize) -> Option<usize> {
    let m = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (m.saturating_sub(1)..=m + 1).find(|&k| k * (k + 1) / 2 == len)
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64]) -> Result<DMatrix<f64>, JordanError> {
    let n = triangular_order(v.len()).ok_or(JordanError::NotTriangular(v.len()))?;
    Ok(smat_unchecked(v, n))
}

fn smat_unchecked(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let e = v[k] / SQRT_2;
                m[(i, j)] = e;
                m[(j, i)] = e;
            }
            k += 1;
        }
    }
    m
}

/// Blockwise Jordan product `x ∘ y`.
pub fn jordan_product(spec: &ConeSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>, JordanError> {
    spec.check(x)?;
    spec.check(y)?;
    let mut out = vec![0.0; spec.dim];
    for (h, b) in spec.blocks.iter().enumerate() {
        let r = spec.range(h);
        block_product(b, &x[r.clone()], &y[r.clone()], &mut out[r]);
    }
    Ok(out)
}

fn block_product(b: &Block, x: &[f64], y: &[f64], out: &mut [f64]) {
    match *b {
        Block::Nonneg { .. } => {
            for i in 0..x.len() {
                out[i] = x[i] * y[i];
            }
        }
        Block::SecondOrder { dim } => {
            if dim == 0 {
                return;
            }
            out[0] = linalg::dot(x, y);
            for i in 1..dim {
                out[i] = x[0] * y[i] + y[0] * x[i];
            }
        }
        Block::PsdVec { order } => {
            let xm = smat_unchecked(x, order);
            let ym = smat_unchecked(y, order);
            let p = &xm * &ym;
            let s = (&p + p.transpose()) * 0.5;
            out.copy_from_slice(&svec_unchecked(&s));
        }
    }
}

/// Blockwise identity element.
pub fn identity(spec: &ConeSpec) -> Vec<f64> {
    let mut e = vec![0.0; spec.dim];
    for (h, b) in spec.blocks.iter().enumerate() {
        let o = spec.offsets[h];
        match *b {
            Block::Nonneg { dim } => e[o..o + dim].iter_mut().for_each(|v| *v = 1.0),
            Block::SecondOrder { dim } => {
                if dim > 0 {
                    e[o] = 1.0;
                }
            }
            Block::PsdVec { order } => {
                for i in 0..order {
                    e[spec.psd_index(h, i, i)] = 1.0;
                }
            }
        }
    }
    e
}

/// Eigenvalues with their Jordan frame, listed block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Ambient-length idempotents, zero outside their block.
    pub idempotents: Vec<Vec<f64>>,
    /// Block of each eigenvalue.
    pub block_of: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.idempotents.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n];
        for (lam, c) in self.eigenvalues.iter().zip(&self.idempotents) {
            linalg::axpy(*lam, c, &mut x);
        }
        x
    }
}

enum BlockSpectrum {
    Diagonal(Vec<f64>),
    Soc { lo: f64, hi: f64, v: Vec<f64> },
    Psd { values: DVector<f64>, vectors: DMatrix<f64> },
    Empty,
}

fn soc_direction(xbar: &[f64]) -> (f64, Vec<f64>) {
    let nrm = linalg::norm2(xbar);
    if nrm > 0.0 {
        (nrm, xbar.iter().map(|v| v / nrm).collect())
    } else {
        let mut v = vec![0.0; xbar.len()];
        if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        (0.0, v)
    }
}

fn block_spectrum(b: &Block, x: &[f64]) -> Result<BlockSpectrum, JordanError> {
    Ok(match *b {
        Block::Nonneg { .. } => BlockSpectrum::Diagonal(x.to_vec()),
        Block::SecondOrder { dim } => {
            if dim == 0 {
                BlockSpectrum::Empty
            } else {
                let (nrm, v) = soc_direction(&x[1..]);
                BlockSpectrum::Soc { lo: x[0] - nrm, hi: x[0] + nrm, v }
            }
        }
        Block::PsdVec { order } => {
            let m = smat_unchecked(x, order);
            let (values, vectors) = linalg::sym_eigen(&m).ok_or(JordanError::Eigensolver)?;
            BlockSpectrum::Psd { values, vectors }
        }
    })
}

/// Spectral decomposition, eigenvalues ascending within each block.
pub fn spectral_decompose(spec: &ConeSpec, x: &[f64]) -> Result<SpectralDecomposition, JordanError> {
    spec.check(x)?;
    let n = spec.dim;
    let mut out = SpectralDecomposition { eigenvalues: vec![], idempotents: vec![], block_of: vec![] };
    for (h, b) in spec.blocks.iter().enumerate() {
        let o = spec.offsets[h];
        match block_spectrum(b, &x[spec.range(h)])? {
            BlockSpectrum::Diagonal(vals) => {
                let mut order: Vec<usize> = (0..vals.len()).collect();
                order.sort_by(|&a, &c| vals[a].total_cmp(&vals[c]));
                for i in order {
                    let mut c = vec![0.0; n];
                    c[o + i] = 1.0;
                    out.eigenvalues.push(vals[i]);
                    out.idempotents.push(c);
                    out.block_of.push(h);
                }
            }
            BlockSpectrum::Soc { lo, hi, v, .. } => {
                for (lam, sign) in [(lo, -1.0), (hi, 1.0)] {
                    let mut c = vec![0.0; n];
                    c[o] = 0.5;
                    for (k, vk) in v.iter().enumerate() {
                        c[o + 1 + k] = 0.5 * sign * vk;
                    }
                    out.eigenvalues.push(lam);
                    out.idempotents.push(c);
                    out.block_of.push(h);
                }
            }
            BlockSpectrum::Psd { values, vectors } => {
                for k in 0..values.len() {
                    let q = vectors.column(k);
                    let proj = q * q.transpose();
                    let mut c = vec![0.0; n];
                    c[spec.range(h)].copy_from_slice(&svec_unchecked(&proj));
                    out.eigenvalues.push(values[k]);
                    out.idempotents.push(c);
                    out.block_of.push(h);
                }
            }
            BlockSpectrum::Empty => {}
        }
    }
    Ok(out)
}

fn block_min_eigenvalue(b: &Block, x: &[f64]) -> Result<f64, JordanError> {
    Ok(match *b {
        Block::Nonneg { .. } => x.iter().copied().fold(f64::INFINITY, f64::min),
        Block::SecondOrder { dim } => {
            if dim == 0 {
                f64::INFINITY
            } else {
                x[0] - linalg::norm2(&x[1..])
            }
        }
        Block::PsdVec { order } => {
            if order == 0 {
                f64::INFINITY
            } else {
                linalg::min_eigenvalue(&smat_unchecked(x, order)).ok_or(JordanError::Eigensolver)?
            }
        }
    })
}

/// Smallest eigenvalue over all blocks (`+∞` for an empty spec).
pub fn min_eigenvalue(spec: &ConeSpec, x: &[f64]) -> Result<f64, JordanError> {
    spec.check(x)?;
    let mut m = f64::INFINITY;
    for (h, b) in spec.blocks.iter().enumerate() {
        m = m.min(block_min_eigenvalue(b, &x[spec.range(h)])?);
    }
    Ok(m)
}

/// Per-block smallest eigenvalues.
pub fn block_min_eigenvalues(spec: &ConeSpec, x: &[f64]) -> Result<Vec<f64>, JordanError> {
    spec.check(x)?;
    spec.blocks
        .iter()
        .enumerate()
        .map(|(h, b)| block_min_eigenvalue(b, &x[spec.range(h)]))
        .collect()
}

/// Apply `f` to the eigenvalues of `x`, keeping its Jordan frame.
pub fn spectral_map(spec: &ConeSpec, x: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>, JordanError> {
    spec.check(x)?;
    let mut out = vec![0.0; spec.dim];
    for (h, b) in spec.blocks.iter().enumerate() {
        let r = spec.range(h);
        let dst = &mut out[r.clone()];
        match block_spectrum(b, &x[r])? {
            BlockSpectrum::Diagonal(vals) => {
                for (d, v) in dst.iter_mut().zip(vals) {
                    *d = f(v);
                }
            }
            BlockSpectrum::Soc { lo, hi, v } => {
                let (flo, fhi) = (f(lo), f(hi));
                dst[0] = 0.5 * (flo + fhi);
                let half_diff = 0.5 * (fhi - flo);
                for (k, vk) in v.iter().enumerate() {
                    dst[1 + k] = half_diff * vk;
                }
            }
            BlockSpectrum::Psd { values, vectors } => {
                let m = linalg::spectral_apply(&values, &vectors, &f);
                dst.copy_from_slice(&svec_unchecked(&m));
            }
            BlockSpectrum::Empty => {}
        }
    }
    Ok(out)
}

/// Quadratic representation `P(x) y = 2 x∘(x∘y) − (x∘x)∘y`, evaluated blockwise
/// in closed form.
pub fn quadratic_representation(spec: &ConeSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>, JordanError> {
    spec.check(x)?;
    spec.check(y)?;
    let mut out = vec![0.0; spec.dim];
    for (h, b) in spec.blocks.iter().enumerate() {
        let r = spec.range(h);
        let (xb, yb) = (&x[r.clone()], &y[r.clone()]);
        let dst = &mut out[r];
        match *b {
            Block::Nonneg { .. } => {
                for i in 0..xb.len() {
                    dst[i] = xb[i] * xb[i] * yb[i];
                }
            }
            Block::SecondOrder { dim } => {
                if dim == 0 {
                    continue;
                }
                let xy = linalg::dot(xb, yb);
                let det = xb[0] * xb[0] - linalg::dot(&xb[1..], &xb[1..]);
                dst[0] = 2.0 * xy * xb[0] - det * yb[0];
                for i in 1..dim {
                    dst[i] = 2.0 * xy * xb[i] + det * yb[i];
                }
            }
            Block::PsdVec { order } => {
                let xm = smat_unchecked(xb, order);
                let ym = smat_unchecked(yb, order);
                let p = &xm * &ym * &xm;
                let s = (&p + p.transpose()) * 0.5;
                dst.copy_from_slice(&svec_unchecked(&s));
            }
        }
    }
    Ok(out)
}

/// Solve `x ∘ u = r` for `u`; `x` must be invertible in every block.
pub fn jordan_divide(spec: &ConeSpec, x: &[f64], r: &[f64]) -> Result<Vec<f64>, JordanError> {
    spec.check(x)?;
    spec.check(r)?;
    let mut out = vec![0.0; spec.dim];
    for (h, b) in spec.blocks.iter().enumerate() {
        let rg = spec.range(h);
        let (xb, rb) = (&x[rg.clone()], &r[rg.clone()]);
        let dst = &mut out[rg];
        match *b {
            Block::Nonneg { .. } => {
                for i in 0..xb.len() {
                    dst[i] = rb[i] / xb[i];
                }
            }
            Block::SecondOrder { dim } => {
                if dim == 0 {
                    continue;
                }
                let det = xb[0] * xb[0] - linalg::dot(&xb[1..], &xb[1..]);
                let u0 = (xb[0] * rb[0] - linalg::dot(&xb[1..], &rb[1..])) / det;
                dst[0] = u0;
                for i in 1..dim {
                    dst[i] = (rb[i] - u0 * xb[i]) / xb[0];
                }
            }
            Block::PsdVec { order } => {
                let xm = smat_unchecked(xb, order);
                let rm = smat_unchecked(rb, order);
                let (vals, q) = linalg::sym_eigen(&xm).ok_or(JordanError::Eigensolver)?;
                let mut rt = q.transpose() * rm * &q;
                for i in 0..order {
                    for j in 0..order {
                        rt[(i, j)] *= 2.0 / (vals[i] + vals[j]);
                    }
                }
                let u = &q * rt * q.transpose();
                let s = (&u + u.transpose()) * 0.5;
                dst.copy_from_slice(&svec_unchecked(&s));
            }
        }
    }
    Ok(out)
}

/// Draw a primitive idempotent of block `block_index`, embedded in the ambient space.
pub fn sample_primitive_idempotent<R: Rng + ?Sized>(
    spec: &ConeSpec,
    block_index: usize,
    rng: &mut R,
) -> Result<Vec<f64>, JordanError> {
    let b = *spec
        .blocks
        .get(block_index)
        .ok_or(JordanError::BlockIndex { index: block_index, count: spec.blocks.len() })?;
    let o = spec.offsets[block_index];
    let mut c = vec![0.0; spec.dim];
    match b {
        Block::Nonneg { dim } => {
            if dim == 0 {
                return Err(JordanError::EmptyBlock(block_index));
            }
            c[o + rng.random_range(0..dim)] = 1.0;
        }
        Block::SecondOrder { dim } => {
            if dim == 0 {
                return Err(JordanError::EmptyBlock(block_index));
            }
            let v = random_unit(dim - 1, rng);
            c[o] = 0.5;
            for (k, vk) in v.iter().enumerate() {
                c[o + 1 + k] = 0.5 * vk;
            }
        }
        Block::PsdVec { order } => {
            if order == 0 {
                return Err(JordanError::EmptyBlock(block_index));
            }
            let v = DVector::from_vec(random_unit(order, rng));
            let p = &v * v.transpose();
            c[spec.range(block_index)].copy_from_slice(&svec_unchecked(&p));
        }
    }
    Ok(c)
}

/// Uniformly distributed point on the unit sphere of `R^dim` (`dim ≥ 1`).
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = linalg::norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Symmetric matrices `Q_I` with `(x∘x)_I = xᵀ Q_I x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFormTable {
    pub forms: Vec<DMatrix<f64>>,
}

impl QuadFormTable {
    /// Nonzero upper-triangular entries `(a, b, Q_ab)`, `a ≤ b`.
    pub fn upper_entries(&self, index: usize) -> Vec<(usize, usize, f64)> {
        let q = &self.forms[index];
        let mut out = Vec::new();
        for b in 0..q.ncols() {
            for a in 0..=b {
                if q[(a, b)] != 0.0 {
                    out.push((a, b, q[(a, b)]));
                }
            }
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        self.forms.iter().map(|q| xv.dot(&(q * &xv))).collect()
    }
}

/// The quadratic-form representation of `x ↦ x∘x`.
pub fn square_quadratic_forms(spec: &ConeSpec) -> QuadFormTable {
    let n = spec.dim;
    let mut forms = vec![DMatrix::<f64>::zeros(n, n); n];
    let sym = |m: &mut DMatrix<f64>, a: usize, b: usize, v: f64| {
        if a == b {
            m[(a, a)] += v;
        } else {
            m[(a, b)] += 0.5 * v;
            m[(b, a)] += 0.5 * v;
        }
    };
    for (h, b) in spec.blocks.iter().enumerate() {
        let o = spec.offsets[h];
        match *b {
            Block::Nonneg { dim } => {
                for i in o..o + dim {
                    forms[i][(i, i)] = 1.0;
                }
            }
            Block::SecondOrder { dim } => {
                if dim == 0 {
                    continue;
                }
                for i in o..o + dim {
                    forms[o][(i, i)] = 1.0;
                }
                for j in o + 1..o + dim {
                    forms[j][(o, j)] = 1.0;
                    forms[j][(j, o)] = 1.0;
                }
            }
            Block::PsdVec { order } => {
                let idx = |i: usize, j: usize| spec.psd_index(h, i, j);
                for i in 0..order {
                    let q = &mut forms[idx(i, i)];
                    sym(q, idx(i, i), idx(i, i), 1.0);
                    for k in (0..order).filter(|&k| k != i) {
                        sym(q, idx(k, i), idx(k, i), 0.5);
                    }
                }
                for j in 0..order {
                    for i in 0..j {
                        let q = &mut forms[idx(i, j)];
                        sym(q, idx(i, i), idx(i, j), 1.0);
                        sym(q, idx(i, j), idx(j, j), 1.0);
                        for k in (0..order).filter(|&k| k != i && k != j) {
                            sym(q, idx(i, k), idx(j, k), 1.0 / SQRT_2);
                        }
                    }
                }
            }
        }
    }
    QuadFormTable { forms }
}

/// `λ_min(x)` for `x ∈ K` iff nonnegative; convenience wrapper.
pub fn in_cone(spec: &ConeSpec, x: &[f64], tol: f64) -> Result<bool, JordanError> {
    Ok(min_eigenvalue(spec, x)? >= -tol)
}

/// Largest `α ≤ cap` with `x + α d ∈ K`, for `x` in the interior of `K`.
pub fn max_step(spec: &ConeSpec, x: &[f64], d: &[f64], cap: f64) -> Result<f64, JordanError> {
    spec.check(x)?;
    spec.check(d)?;
    let mut alpha = cap;
    for (h, b) in spec.blocks.iter().enumerate() {
        let r = spec.range(h);
        let (xb, db) = (&x[r.clone()], &d[r.clone()]);
        match *b {
            Block::Nonneg { .. } => {
                for i in 0..xb.len() {
                    if db[i] < 0.0 {
                        alpha = alpha.min(-xb[i] / db[i]);
                    }
                }
            }
            Block::SecondOrder { dim } => {
                if dim == 0 {
                    continue;
                }
                alpha = alpha.min(soc_max_step(xb, db));
            }
            Block::PsdVec { order } => {
                let xm = smat_unchecked(xb, order);
                let dm = smat_unchecked(db, order);
                let (vals, q) = linalg::sym_eigen(&xm).ok_or(JordanError::Eigensolver)?;
                let inv_sqrt = linalg::spectral_apply(&vals, &q, |l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt());
                let t = &inv_sqrt * dm * &inv_sqrt;
                let lmin = linalg::min_eigenvalue(&t).ok_or(JordanError::Eigensolver)?;
                if lmin < 0.0 {
                    alpha = alpha.min(-1.0 / lmin);
                }
            }
        }
    }
    Ok(alpha.max(0.0))
}

/// Smallest positive root of `det(x + a d) = 0`, capped by `x0 + a d0 = 0`.
fn soc_max_step(x: &[f64], d: &[f64]) -> f64 {
    let qa = d[0] * d[0] - linalg::dot(&d[1..], &d[1..]);
    let qb = 2.0 * (x[0] * d[0] - linalg::dot(&x[1..], &d[1..]));
    let qc = x[0] * x[0] - linalg::dot(&x[1..], &x[1..]);
    let mut best = f64::INFINITY;
    if d[0] < 0.0 {
        best = -x[0] / d[0];
    }
    let roots: Vec<f64> = if qa.abs() <= 1e-300 {
        if qb < 0.0 {
            vec![-qc / qb]
        } else {
            vec![]
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            vec![]
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            let mut r = vec![];
            if q != 0.0 {
                r.push(q / qa);
                r.push(qc / q);
            } else {
                r.push(0.0);
            }
            r
        }
    };
    for r in roots {
        if r > 0.0 {
            best = best.min(r);
        }
    }
    best
}
