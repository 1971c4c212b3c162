//! Monomials, forms, moment matrices and sum-of-squares certificates.
//!
//! Monomials of degree `m` in `n` variables are ordered graded
//! lexicographically with larger leading exponents first, so `I(2, 2)` is
//! `[x1², x1x2, x2²]`.

use crate::conicsolver::{self, BlockConicProgram, SolveStatus, SolverOptions, SparseMatrix};
use crate::jordan::{self, Block, ConeSpec};
use crate::linalg;
use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Largest basis [`enumerate_monomials`] builds by default.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("basis I({n},{m}) has {size} monomials, above the cap {cap}")]
    BasisTooLarge { n: usize, m: usize, size: u128, cap: usize },
    #[error("need at least one variable")]
    NoVariables,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("form degree {0} is odd")]
    OddDegree(usize),
    #[error("SOS solver stopped with status {0:?}")]
    Solver(SolveStatus),
    #[error("invalid SOS program: {0}")]
    Program(String),
}

/// Exponent vector `α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^α`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    /// Exponent of `x_{vars[0]} x_{vars[1]} …` in `n` variables.
    pub fn from_vars(n: usize, vars: &[usize]) -> MultiIndex {
        let mut e = vec![0u32; n];
        for &v in vars {
            e[v] += 1;
        }
        MultiIndex(e)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or(format!("bad index {s}"))?;
        inner
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|e| format!("bad index {s}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(MultiIndex)
    }
}

/// `|I(n, m)| = C(n + m − 1, m)`.
pub fn basis_size(n: usize, m: usize) -> u128 {
    if n == 0 {
        return u128::from(m == 0);
    }
    let mut r: u128 = 1;
    for k in 1..=m as u128 {
        r = r * (n as u128 - 1 + k) / k;
    }
    r
}

/// Ordered monomials `I(n, m)` with inverse lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    m: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MonomialBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.monomials[k]
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Index of the monomial `x_{vars[0]} x_{vars[1]} …`.
    pub fn index_of_vars(&self, vars: &[usize]) -> Option<usize> {
        self.index_of(&MultiIndex::from_vars(self.n, vars))
    }

    /// Monomial vector `(x^α)_α`.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|a| a.eval(x)).collect()
    }
}

pub fn enumerate_monomials(n: usize, m: usize) -> Result<MonomialBasis, PolyError> {
    enumerate_monomials_capped(n, m, DEFAULT_BASIS_CAP)
}

pub fn enumerate_monomials_capped(n: usize, m: usize, cap: usize) -> Result<MonomialBasis, PolyError> {
    if n == 0 {
        return Err(PolyError::NoVariables);
    }
    let size = basis_size(n, m);
    if size > cap as u128 {
        return Err(PolyError::BasisTooLarge { n, m, size, cap });
    }
    let mut monomials = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; n];
    fill(&mut monomials, &mut current, 0, m as u32);
    let lookup = monomials.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    Ok(MonomialBasis { n, m, monomials, lookup })
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// Homogeneous form `θ(x) = Σ θ_α x^α` over `I(n, degree)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    pub n: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Form {
    pub fn zero(n: usize, degree: usize) -> Result<Self, PolyError> {
        let size = basis_size(n, degree);
        if size > DEFAULT_BASIS_CAP as u128 {
            return Err(PolyError::BasisTooLarge { n, m: degree, size, cap: DEFAULT_BASIS_CAP });
        }
        Ok(Form { n, degree, coeffs: vec![0.0; size as usize] })
    }

    pub fn basis(&self) -> Result<MonomialBasis, PolyError> {
        enumerate_monomials(self.n, self.degree)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        let basis = self.basis()?;
        Ok(basis.evaluate(x).iter().zip(&self.coeffs).map(|(m, c)| m * c).sum())
    }

    pub fn max_abs(&self) -> f64 {
        linalg::norm_inf(&self.coeffs)
    }
}

/// Vector `y` over `I(n, degree)`; degree 4 for the moment cone `M_{n,4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub n: usize,
    pub degree: usize,
    pub y: Vec<f64>,
}

impl MomentVector {
    /// Moments `y_α = x^α` of the point mass at `x`.
    pub fn point_mass(x: &[f64], degree: usize) -> Result<Self, PolyError> {
        let basis = enumerate_monomials(x.len(), degree)?;
        Ok(MomentVector { n: x.len(), degree, y: basis.evaluate(x) })
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<String, f64>,
}

fn to_repr(n: usize, degree: usize, v: &[f64]) -> Result<CoeffRepr, PolyError> {
    let basis = enumerate_monomials(n, degree)?;
    let coeffs = basis
        .monomials()
        .iter()
        .zip(v)
        .filter(|(_, c)| **c != 0.0)
        .map(|(a, c)| (a.to_string(), *c))
        .collect();
    Ok(CoeffRepr { n, degree, coeffs })
}

fn from_repr(r: CoeffRepr) -> Result<Vec<f64>, String> {
    let basis = enumerate_monomials(r.n, r.degree).map_err(|e| e.to_string())?;
    let mut v = vec![0.0; basis.len()];
    for (k, c) in r.coeffs {
        let a: MultiIndex = k.parse()?;
        let i = basis.index_of(&a).ok_or(format!("monomial {k} not in I({},{})", r.n, r.degree))?;
        v[i] = c;
    }
    Ok(v)
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_repr(self.n, self.degree, &self.coeffs).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CoeffRepr::deserialize(d)?;
        let (n, degree) = (r.n, r.degree);
        Ok(Form { n, degree, coeffs: from_repr(r).map_err(D::Error::custom)? })
    }
}

impl Serialize for MomentVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_repr(self.n, self.degree, &self.y).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CoeffRepr::deserialize(d)?;
        let (n, degree) = (r.n, r.degree);
        Ok(MomentVector { n, degree, y: from_repr(r).map_err(D::Error::custom)? })
    }
}

/// For each pair `α ≤ α′` of `I(n, m)` (upper triangle, column by column),
/// the index of `α + α′` in `I(n, 2m)`.
#[derive(Debug, Clone)]
pub struct MomentIndexTable {
    pub half: MonomialBasis,
    pub full: MonomialBasis,
    /// `sum_index[j * (j + 1) / 2 + i]` for `i ≤ j`.
    pub sum_index: Vec<usize>,
}

impl MomentIndexTable {
    pub fn new(n: usize, two_m: usize) -> Result<Self, PolyError> {
        if !two_m.is_multiple_of(2) {
            return Err(PolyError::OddDegree(two_m));
        }
        let half = enumerate_monomials(n, two_m / 2)?;
        let full = enumerate_monomials(n, two_m)?;
        let k = half.len();
        let mut sum_index = Vec::with_capacity(k * (k + 1) / 2);
        for j in 0..k {
            for i in 0..=j {
                let s = half.get(i).add(half.get(j));
                sum_index.push(full.index_of(&s).expect("sum lies in I(n, 2m)"));
            }
        }
        Ok(MomentIndexTable { half, full, sum_index })
    }

    pub fn entry(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.sum_index[j * (j + 1) / 2 + i]
    }

    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        let k = self.half.len();
        DMatrix::from_fn(k, k, |i, j| y[self.entry(i, j)])
    }

    /// `svec(M(y))` as a sparse linear map of `y`, one column per moment.
    pub fn svec_operator(&self) -> SparseMatrix {
        let k = self.half.len();
        let mut t = Vec::with_capacity(k * (k + 1) / 2);
        for j in 0..k {
            for i in 0..=j {
                let row = j * (j + 1) / 2 + i;
                let w = if i == j { 1.0 } else { SQRT_2 };
                t.push((row, self.sum_index[row], w));
            }
        }
        SparseMatrix::from_triplets(k * (k + 1) / 2, self.full.len(), t)
    }
}

/// Moment matrix `M(y)` over `I(n, degree/2)`, entry `(α, α′) = y_{α+α′}`.
pub fn moment_matrix(y: &MomentVector) -> Result<DMatrix<f64>, PolyError> {
    let table = MomentIndexTable::new(y.n, y.degree)?;
    if y.y.len() != table.full.len() {
        return Err(PolyError::DimensionMismatch { expected: table.full.len(), actual: y.y.len() });
    }
    Ok(table.matrix(&y.y))
}

/// Nonzero entries `(a, b, q)` with `a ≤ b` of a symmetric matrix.
pub fn upper_entries(q: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for b in 0..q.ncols() {
        for a in 0..=b {
            let v = if a == b { q[(a, a)] } else { 0.5 * (q[(a, b)] + q[(b, a)]) };
            if v != 0.0 {
                out.push((a, b, v));
            }
        }
    }
    out
}

/// Monomial terms of `(xᵀQx)(xᵀRx)` from upper-triangle entry lists, as
/// `(index in I(n,4), coefficient)` before merging duplicates.
pub fn quartic_terms(
    basis4: &MonomialBasis,
    q: &[(usize, usize, f64)],
    r: &[(usize, usize, f64)],
) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(q.len() * r.len());
    for &(a, b, qv) in q {
        let qw = if a == b { qv } else { 2.0 * qv };
        for &(c, d, rv) in r {
            let rw = if c == d { rv } else { 2.0 * rv };
            let k = basis4.index_of_vars(&[a, b, c, d]).expect("degree-4 monomial");
            out.push((k, qw * rw));
        }
    }
    out
}

/// Coefficients of `(xᵀQ_I x)(xᵀQ_J x)`.
pub fn multiply_quadratics(qi: &DMatrix<f64>, qj: &DMatrix<f64>) -> Result<Form, PolyError> {
    let n = qi.nrows();
    if qj.nrows() != n || qi.ncols() != n || qj.ncols() != n {
        return Err(PolyError::DimensionMismatch { expected: n, actual: qj.nrows() });
    }
    let basis4 = enumerate_monomials(n, 4)?;
    let mut coeffs = vec![0.0; basis4.len()];
    for (k, v) in quartic_terms(&basis4, &upper_entries(qi), &upper_entries(qj)) {
        coeffs[k] += v;
    }
    Ok(Form { n, degree: 4, coeffs })
}

/// Coefficients of `(Σ xᵢ²)^r θ`.
pub fn multiply_by_norm_power(theta: &Form, r: usize) -> Result<Form, PolyError> {
    let mut cur = theta.clone();
    for _ in 0..r {
        let from = cur.basis()?;
        let mut next = Form::zero(cur.n, cur.degree + 2)?;
        let to = next.basis()?;
        for (k, &c) in cur.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let alpha = from.get(k);
            for i in 0..cur.n {
                let mut e = alpha.0.clone();
                e[i] += 2;
                next.coeffs[to.index_of(&MultiIndex(e)).expect("degree + 2")] += c;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Form `Σ_{α,α′} G_{αα′} x^{α+α′}` induced by a Gram matrix over `I(n, m)`.
pub fn gram_form(n: usize, m: usize, gram: &DMatrix<f64>) -> Result<Form, PolyError> {
    let table = MomentIndexTable::new(n, 2 * m)?;
    let k = table.half.len();
    if gram.nrows() != k || gram.ncols() != k {
        return Err(PolyError::DimensionMismatch { expected: k, actual: gram.nrows() });
    }
    let mut coeffs = vec![0.0; table.full.len()];
    for i in 0..k {
        for j in 0..k {
            coeffs[table.entry(i, j)] += gram[(i, j)];
        }
    }
    Ok(Form { n, degree: 2 * m, coeffs })
}

/// PSD Gram matrix `G` over `I(n, m)` reproducing a form of degree `2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramCertificate {
    pub n: usize,
    pub m: usize,
    pub gram: DMatrix<f64>,
    /// `max_δ |Σ_{α+α′=δ} G_{αα′} − θ_δ|`.
    pub residual: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SosOutcome {
    Feasible(GramCertificate),
    /// `y` with `M(y) ⪰ 0` and `yᵀθ < 0`.
    Infeasible { witness: MomentVector, value: f64 },
}

impl SosOutcome {
    pub fn is_sos(&self) -> bool {
        matches!(self, SosOutcome::Feasible(_))
    }
}

/// Decide `θ ∈ Σ_{n,2m}` by the phase-I program `max t` over Gram matrices
/// `G ⪰ t I` matching the coefficients of `θ/‖θ‖`, `t ≤ 1`.
pub fn sos_decompose(theta: &Form, tol: f64) -> Result<SosOutcome, PolyError> {
    sos_decompose_with(theta, tol, &SolverOptions::default())
}

pub fn sos_decompose_with(theta: &Form, tol: f64, opts: &SolverOptions) -> Result<SosOutcome, PolyError> {
    if !theta.degree.is_multiple_of(2) {
        return Err(PolyError::OddDegree(theta.degree));
    }
    let table = MomentIndexTable::new(theta.n, theta.degree)?;
    if theta.coeffs.len() != table.full.len() {
        return Err(PolyError::DimensionMismatch { expected: table.full.len(), actual: theta.coeffs.len() });
    }
    let k = table.half.len();
    let sdim = k * (k + 1) / 2;
    let scale = linalg::norm2(&theta.coeffs);
    let m = theta.degree / 2;
    if scale == 0.0 {
        let gram = DMatrix::zeros(k, k);
        return Ok(SosOutcome::Feasible(GramCertificate { n: theta.n, m, gram, residual: 0.0, min_eigenvalue: 0.0 }));
    }
    let b: Vec<f64> = theta.coeffs.iter().map(|c| c / scale).collect();
    // Variables: svec(G) then t.
    let mut a_trip = Vec::with_capacity(sdim);
    for j in 0..k {
        for i in 0..=j {
            let col = j * (j + 1) / 2 + i;
            let w = if i == j { 1.0 } else { SQRT_2 };
            a_trip.push((table.sum_index[col], col, w));
        }
    }
    let a = SparseMatrix::from_triplets(table.full.len(), sdim + 1, a_trip);
    let mut g_trip: Vec<(usize, usize, f64)> = (0..sdim).map(|i| (i, i, -1.0)).collect();
    for i in 0..k {
        g_trip.push((i * (i + 1) / 2 + i, sdim, 1.0));
    }
    g_trip.push((sdim, sdim, 1.0));
    let g = SparseMatrix::from_triplets(sdim + 1, sdim + 1, g_trip);
    let mut h = vec![0.0; sdim];
    h.push(1.0);
    let cone = ConeSpec::new(vec![Block::PsdVec { order: k }, Block::Nonneg { dim: 1 }]);
    let mut c = vec![0.0; sdim + 1];
    c[sdim] = -1.0;
    let prog = BlockConicProgram::new(c, a, b.clone(), g, h, cone).map_err(|e| PolyError::Program(e.to_string()))?;
    let sol = conicsolver::solve(&prog, opts).map_err(|e| PolyError::Program(e.to_string()))?;
    if !sol.is_near_optimal(1e-6) {
        return Err(PolyError::Solver(sol.status));
    }
    let t = sol.x[sdim];
    if t >= -tol {
        let gram = jordan::smat(&sol.x[..sdim]).expect("triangular") * scale;
        let recon = gram_form(theta.n, m, &gram)?;
        let residual =
            recon.coeffs.iter().zip(&theta.coeffs).fold(0.0f64, |r, (p, q)| r.max((p - q).abs()));
        let min_eigenvalue = linalg::min_eigenvalue(&gram).unwrap_or(f64::NAN);
        Ok(SosOutcome::Feasible(GramCertificate { n: theta.n, m, gram, residual, min_eigenvalue }))
    } else {
        let y = sol.y.clone();
        let value = linalg::dot(&y, &theta.coeffs);
        Ok(SosOutcome::Infeasible { witness: MomentVector { n: theta.n, degree: theta.degree, y }, value })
    }
}
