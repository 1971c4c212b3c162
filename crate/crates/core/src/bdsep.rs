//! Separation from `N(K) = {X | Xs ∈ K for every primitive idempotent s}`
//! when `K` is a product of nonnegative orthants and second-order cones.
//!
//! The minimum of `λ_min(Xs)` over idempotents splits into four families by
//! the blocks that `s` and the row range of `X` belong to. The first three
//! have closed forms by Cauchy–Schwarz; the second-order/second-order family
//! is a linear test on the leading row followed by a trust-region subproblem
//! on the unit sphere.

use crate::jordan::{Block, ConeSpec};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BdsepError {
    #[error("separation is not available for PSD blocks")]
    Unsupported,
    #[error("matrix has order {actual}, cone dimension is {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("trust-region subproblem data is malformed")]
    MalformedTrs,
    #[error("symmetric eigensolver failed")]
    Eigensolver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSource {
    NnoNno,
    NnoSoc,
    SocNno,
    SocSocLinear,
    SocSocTrs,
}

/// A hyperplane `⟨Y, H⟩ ≤ 0` valid on `N(K)` and violated by `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub h: DMatrix<f64>,
    /// `⟨X, H⟩ > 0`.
    pub violation: f64,
    /// The violated quantity: `λ_min(Xs)` for the closed-form families and
    /// the linear test, the optimal value of `f_gh` for the TRS family.
    pub value: f64,
    pub source: CutSource,
    /// Primitive idempotent `s` with `λ_min(Xs) < 0`.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationOutcome {
    Inside,
    Cut(Cut),
}

impl SeparationOutcome {
    pub fn is_inside(&self) -> bool {
        matches!(self, SeparationOutcome::Inside)
    }
}

/// Minimize `vᵀBv + 2bᵀv + c` over `‖v‖ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrsProblem {
    pub b_mat: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl TrsProblem {
    pub fn objective(&self, v: &[f64]) -> f64 {
        let vv = DVector::from_column_slice(v);
        vv.dot(&(&self.b_mat * &vv)) + 2.0 * linalg::dot(&self.b, v) + self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrsSolution {
    pub value: f64,
    pub v: Vec<f64>,
    /// Multiplier with `(B − μI)v = −b` and `μ ≤ λ_min(B)`.
    pub mu: f64,
    pub hard_case: bool,
}

/// Global minimizer of a sphere-constrained quadratic from the
/// eigendecomposition of `B` and the secular equation
/// `1/‖v(μ)‖ − 1 = 0`, `v(μ) = −(B − μI)⁻¹b`.
pub fn solve_trs(p: &TrsProblem) -> Result<TrsSolution, BdsepError> {
    let d = p.b.len();
    if d == 0 || p.b_mat.nrows() != d || p.b_mat.ncols() != d {
        return Err(BdsepError::MalformedTrs);
    }
    let bm = (&p.b_mat + p.b_mat.transpose()) * 0.5;
    if d == 1 {
        let (q, b) = (bm[(0, 0)], p.b[0]);
        let v = if b > 0.0 { -1.0 } else { 1.0 };
        let sol = vec![v];
        return Ok(TrsSolution { value: p.objective(&sol), v: sol, mu: q + b * v, hard_case: b == 0.0 });
    }
    let (vals, vecs) = linalg::sym_eigen(&bm).ok_or(BdsepError::Eigensolver)?;
    let bv = DVector::from_column_slice(&p.b);
    let beta = vecs.transpose() * &bv;
    let l1 = vals[0];
    let bnorm = bv.norm();
    let scale = 1.0 + vals.amax() + bnorm;
    let in_min: Vec<bool> = vals.iter().map(|&l| l - l1 <= 1e-10 * scale).collect();
    let beta_min = (0..d).filter(|&i| in_min[i]).map(|i| beta[i] * beta[i]).sum::<f64>().sqrt();
    let assemble = |mu: f64, skip_min: bool| -> DVector<f64> {
        let mut v = DVector::zeros(d);
        for i in 0..d {
            if skip_min && in_min[i] {
                continue;
            }
            v.axpy(-beta[i] / (vals[i] - mu), &vecs.column(i), 1.0);
        }
        v
    };
    if beta_min <= 1e-10 * scale {
        let rest = assemble(l1, true);
        let rn = rest.norm_squared();
        if rn <= 1.0 {
            let v = rest + vecs.column(0) * (1.0 - rn).sqrt();
            let v: Vec<f64> = v.iter().copied().collect();
            return Ok(TrsSolution { value: p.objective(&v), v, mu: l1, hard_case: true });
        }
    }
    let norm_sq = |mu: f64| -> (f64, f64) {
        let mut ns = 0.0;
        let mut dns = 0.0;
        for i in 0..d {
            let r = vals[i] - mu;
            let t = beta[i] * beta[i] / (r * r);
            ns += t;
            dns += 2.0 * t / r;
        }
        (ns, dns)
    };
    let mut lo = l1 - bnorm - 1.0;
    let mut hi = l1;
    let mut mu = lo;
    for _ in 0..500 {
        let (ns, dns) = norm_sq(mu);
        let nv = ns.sqrt();
        if (nv - 1.0).abs() <= 1e-12 {
            break;
        }
        if nv < 1.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let psi = 1.0 / nv - 1.0;
        let dpsi = -0.5 * dns / (ns * nv);
        let newton = mu - psi / dpsi;
        let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == mu || hi - lo <= f64::EPSILON * scale {
            break;
        }
        mu = next;
    }
    let v = assemble(mu, false);
    let v = &v / v.norm();
    let v: Vec<f64> = v.iter().copied().collect();
    Ok(TrsSolution { value: p.objective(&v), v, mu, hard_case: false })
}

/// Second-order blocks and nonnegative coordinates of a spec without PSD blocks.
fn structure(spec: &ConeSpec, x: &DMatrix<f64>) -> Result<(Vec<usize>, Vec<(usize, usize)>), BdsepError> {
    if spec.blocks().iter().any(|b| matches!(b, Block::PsdVec { .. })) {
        return Err(BdsepError::Unsupported);
    }
    let n = spec.ambient_dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(BdsepError::DimensionMismatch { expected: n, actual: x.nrows() });
    }
    let asym = linalg::asymmetry(x);
    if asym > 1e-10 * (1.0 + x.amax()) {
        return Err(BdsepError::NotSymmetric(asym));
    }
    let socs = spec.soc_blocks().into_iter().filter(|b| b.2 >= 2).map(|(_, o, d)| (o, d)).collect();
    Ok((spec.nonneg_coords(), socs))
}

/// `f_gh(v) = (X_{g1,I_h}s)² − ‖X_{I_g⁻,I_h}s‖²` with `s = (½, v/2)`, written
/// as a TRS. Blocks are `(offset, dim)`; `gamma` adds `2γ` to `X_{g1,h1}`.
pub fn soc_soc_trs(x: &DMatrix<f64>, g: (usize, usize), h: (usize, usize), gamma: f64) -> TrsProblem {
    let (og, ng) = g;
    let (oh, nh) = h;
    let x11 = x[(og, oh)] + 2.0 * gamma;
    let x12 = DVector::from_fn(nh - 1, |j, _| x[(og, oh + 1 + j)]);
    let x21 = DVector::from_fn(ng - 1, |i, _| x[(og + 1 + i, oh)]);
    let x22 = DMatrix::from_fn(ng - 1, nh - 1, |i, j| x[(og + 1 + i, oh + 1 + j)]);
    let b_mat = (&x12 * x12.transpose() - x22.transpose() * &x22) * 0.25;
    let b = (&x12 * x11 - x22.transpose() * &x21) * 0.25;
    let c = 0.25 * (x11 * x11 - x21.norm_squared());
    TrsProblem { b_mat, b: b.iter().copied().collect(), c }
}

/// Unit `v` minimizing `a·v` (`−a/‖a‖`), or the first unit vector when `a = 0`.
fn steepest_unit(a: &[f64]) -> Vec<f64> {
    let n = linalg::norm2(a);
    if n > 0.0 {
        a.iter().map(|x| -x / n).collect()
    } else {
        let mut v = vec![0.0; a.len()];
        v[0] = 1.0;
        v
    }
}

fn soc_idempotent(dim: usize, offset: usize, len: usize, v: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; dim];
    s[offset] = 0.5;
    for (k, vk) in v.iter().enumerate().take(len - 1) {
        s[offset + 1 + k] = 0.5 * vk;
    }
    s
}

/// Cut `E + Eᵀ` where `E` has a single row `row` with entries `(−1, −v)` at
/// columns `offset..offset + 1 + v.len()`.
fn row_cut(dim: usize, row: usize, offset: usize, v: &[f64]) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(dim, dim);
    e[(row, offset)] = -1.0;
    for (k, vk) in v.iter().enumerate() {
        e[(row, offset + 1 + k)] = -vk;
    }
    &e + e.transpose()
}

/// Smallest value of each family at `γ = 0`, `None` when the family is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CaseMinima {
    pub nno_nno: Option<f64>,
    pub nno_soc: Option<f64>,
    pub soc_nno: Option<f64>,
    pub soc_soc_linear: Option<f64>,
    /// Minimum of `f_gh` over all ordered pairs of second-order blocks.
    pub soc_soc_trs: Option<f64>,
}

fn min_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.min(b)))
}

fn nno_soc_value(x: &DMatrix<f64>, i: usize, o: usize, d: usize) -> (f64, Vec<f64>) {
    let row: Vec<f64> = (o + 1..o + d).map(|k| x[(i, k)]).collect();
    (0.5 * (x[(i, o)] - linalg::norm2(&row)), steepest_unit(&row))
}

fn soc_nno_value(x: &DMatrix<f64>, j: usize, o: usize, d: usize) -> (f64, Vec<f64>) {
    let col: Vec<f64> = (o + 1..o + d).map(|k| x[(k, j)]).collect();
    (x[(o, j)] - linalg::norm2(&col), steepest_unit(&col))
}

/// Evaluate all five families without stopping at the first violation.
pub fn case_minima(spec: &ConeSpec, x: &DMatrix<f64>) -> Result<CaseMinima, BdsepError> {
    let (nno, socs) = structure(spec, x)?;
    let mut m = CaseMinima::default();
    for (a, &i) in nno.iter().enumerate() {
        for &j in &nno[a..] {
            m.nno_nno = min_opt(m.nno_nno, x[(i, j)]);
        }
    }
    for &(o, d) in &socs {
        for &i in &nno {
            m.nno_soc = min_opt(m.nno_soc, nno_soc_value(x, i, o, d).0);
            m.soc_nno = min_opt(m.soc_nno, soc_nno_value(x, i, o, d).0);
        }
    }
    for &(og, _) in &socs {
        for &(oh, dh) in &socs {
            m.soc_soc_linear = min_opt(m.soc_soc_linear, nno_soc_value(x, og, oh, dh).0);
        }
    }
    for &g in &socs {
        for &h in &socs {
            let sol = solve_trs(&soc_soc_trs(x, g, h, 0.0))?;
            m.soc_soc_trs = min_opt(m.soc_soc_trs, sol.value);
        }
    }
    Ok(m)
}

/// Decide whether `λ_min(Xs) + γ ≥ 0` for every primitive idempotent `s`.
///
/// Families are tried in the order nonnegative/nonnegative, nonnegative rows
/// against second-order idempotents, second-order rows against nonnegative
/// idempotents, then second-order pairs (linear test, then TRS). The first
/// violated family yields the cut of its most violated member.
pub fn separate(spec: &ConeSpec, x: &DMatrix<f64>, gamma: f64) -> Result<SeparationOutcome, BdsepError> {
    let (nno, socs) = structure(spec, x)?;
    let n = spec.ambient_dim();
    let finish = |h: DMatrix<f64>, value: f64, source: CutSource, witness: Vec<f64>| {
        let violation = linalg::frobenius(x, &h);
        if violation > 0.0 {
            SeparationOutcome::Cut(Cut { h, violation, value, source, witness })
        } else {
            SeparationOutcome::Inside
        }
    };

    let mut best: Option<(f64, usize, usize)> = None;
    for (a, &i) in nno.iter().enumerate() {
        for &j in &nno[a..] {
            let v = x[(i, j)];
            if v < -gamma && best.is_none_or(|b| v < b.0) {
                best = Some((v, i, j));
            }
        }
    }
    if let Some((v, i, j)) = best {
        let mut e = DMatrix::zeros(n, n);
        e[(i, j)] = -1.0;
        let mut s = vec![0.0; n];
        s[j] = 1.0;
        return Ok(finish(&e + e.transpose(), v, CutSource::NnoNno, s));
    }

    let mut best: Option<(f64, usize, usize, usize, Vec<f64>)> = None;
    for &(o, d) in &socs {
        for &i in &nno {
            let (v, dir) = nno_soc_value(x, i, o, d);
            if v < -gamma && best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, i, o, d, dir));
            }
        }
    }
    if let Some((v, i, o, d, dir)) = best {
        let s = soc_idempotent(n, o, d, &dir);
        return Ok(finish(row_cut(n, i, o, &dir), v, CutSource::NnoSoc, s));
    }

    let mut best: Option<(f64, usize, usize, Vec<f64>)> = None;
    for &(o, d) in &socs {
        for &j in &nno {
            let (v, dir) = soc_nno_value(x, j, o, d);
            if v < -gamma && best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, j, o, dir));
            }
        }
    }
    if let Some((v, j, o, dir)) = best {
        let mut s = vec![0.0; n];
        s[j] = 1.0;
        return Ok(finish(row_cut(n, j, o, &dir), v, CutSource::SocNno, s));
    }

    let mut best: Option<(f64, usize, usize, usize, Vec<f64>)> = None;
    for &(og, _) in &socs {
        for &(oh, dh) in &socs {
            let (v, dir) = nno_soc_value(x, og, oh, dh);
            if v < -gamma && best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, og, oh, dh, dir));
            }
        }
    }
    if let Some((v, og, oh, dh, dir)) = best {
        let s = soc_idempotent(n, oh, dh, &dir);
        return Ok(finish(row_cut(n, og, oh, &dir), v, CutSource::SocSocLinear, s));
    }

    let mut best: Option<(f64, (usize, usize), (usize, usize), Vec<f64>)> = None;
    for &g in &socs {
        for &h in &socs {
            let sol = solve_trs(&soc_soc_trs(x, g, h, gamma))?;
            if sol.value < 0.0 && best.as_ref().is_none_or(|b| sol.value < b.0) {
                best = Some((sol.value, g, h, sol.v));
            }
        }
    }
    if let Some((value, (og, ng), (oh, nh), v)) = best {
        let w: Vec<f64> = (0..ng - 1)
            .map(|i| x[(og + 1 + i, oh)] + (0..nh - 1).map(|j| x[(og + 1 + i, oh + 1 + j)] * v[j]).sum::<f64>())
            .collect();
        let wn = linalg::norm2(&w);
        let c: Vec<f64> = if wn > 0.0 {
            w.iter().map(|t| t / wn).collect()
        } else {
            let mut c = vec![0.0; ng - 1];
            c[0] = 1.0;
            c
        };
        let mut e = DMatrix::zeros(n, n);
        e[(og, oh)] = -1.0;
        for j in 0..nh - 1 {
            e[(og, oh + 1 + j)] = -v[j];
        }
        for i in 0..ng - 1 {
            e[(og + 1 + i, oh)] = c[i];
            for j in 0..nh - 1 {
                e[(og + 1 + i, oh + 1 + j)] = c[i] * v[j];
            }
        }
        let s = soc_idempotent(n, oh, nh, &v);
        return Ok(finish(&e + e.transpose(), value, CutSource::SocSocTrs, s));
    }
    Ok(SeparationOutcome::Inside)
}
