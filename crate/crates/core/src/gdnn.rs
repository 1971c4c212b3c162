//! The NN, ZVP and BD generalized doubly nonnegative cones over a [`ConeSpec`].
//!
//! * ZVP: `X ⪰ 0`, `⟨J, X⟩ ≥ 0` for the generators of [`zvp_generators`] and
//!   `X_IJ ≥ 0` on `I_{≥0} × I_{≥0}`. Its dual-side set `K_ZVP,0` is tested
//!   by [`kzvp0_membership`].
//! * NN: the image `C₀(y)` of the moment cone `{y | M(y) ⪰ 0}` under the map
//!   of [`C0Map`]; the dual hierarchy `K_NN,r` is tested by SOS
//!   decomposition in [`knn_membership`].
//! * BD: `X ⪰ 0` and `X ∈ N(K)`, decided by [`crate::bdsep`].
//!
//! For mixed second-order and PSD specs the ZVP generators are the union of
//! the per-block families.

use crate::bdsep::{self, BdsepError, Cut, SeparationOutcome};
use crate::conicsolver::{
    solve_feasibility, FeasibilityOutcome, FeasibilitySystem, SolveStatus, SolverError, SolverOptions, SparseMatrix,
};
use crate::jordan::{self, Block, ConeSpec, JordanError};
use crate::linalg;
use crate::polymoment::{
    self, basis_size, enumerate_monomials, Form, GramCertificate, MomentIndexTable, MomentVector, MonomialBasis,
    PolyError, SosOutcome,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-7;

/// Largest `|I(n, 2r + 4)|` accepted by [`knn_membership`].
pub const KNN_BASIS_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum GdnnError {
    #[error("matrix has order {actual}, cone dimension is {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("unsupported cone: {0}")]
    Unsupported(&'static str),
    #[error("level {level} needs {size} monomials, above the cap {KNN_BASIS_CAP}")]
    LevelTooLarge { level: usize, size: u128 },
    #[error("solver stopped with status {0:?}")]
    Solver(SolveStatus),
    #[error(transparent)]
    Program(#[from] SolverError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Separation(#[from] BdsepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `J_h` of a second-order block.
    SecondOrder { block: usize },
    /// `J_h^{ij}`, `i < j`, of a PSD block.
    Psd { block: usize, i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvpGenerators {
    pub j_list: Vec<Generator>,
    pub jij_list: Vec<Generator>,
    pub nonneg_index_set: Vec<usize>,
}

impl ZvpGenerators {
    pub fn all(&self) -> impl Iterator<Item = &Generator> {
        self.j_list.iter().chain(&self.jij_list)
    }

    pub fn len(&self) -> usize {
        self.j_list.len() + self.jij_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `J_h = Diag(1, −1, …, −1)` on each second-order block and, on each PSD
/// block, `J_h^{ij}` with `(hii, hjj)` entries 1 and `(hij, hij)` entry −1.
pub fn zvp_generators(spec: &ConeSpec) -> ZvpGenerators {
    let n = spec.ambient_dim();
    let mut j_list = Vec::new();
    let mut jij_list = Vec::new();
    for (h, b) in spec.blocks().iter().enumerate() {
        let o = spec.offset(h);
        match *b {
            Block::Nonneg { .. } => {}
            Block::SecondOrder { dim } => {
                let mut m = DMatrix::zeros(n, n);
                m[(o, o)] = 1.0;
                for k in o + 1..o + dim {
                    m[(k, k)] = -1.0;
                }
                j_list.push(Generator { kind: GeneratorKind::SecondOrder { block: h }, matrix: m });
            }
            Block::PsdVec { order } => {
                for j in 0..order {
                    for i in 0..j {
                        let (ii, jj, ij) = (spec.psd_index(h, i, i), spec.psd_index(h, j, j), spec.psd_index(h, i, j));
                        let mut m = DMatrix::zeros(n, n);
                        m[(ii, jj)] = 1.0;
                        m[(jj, ii)] = 1.0;
                        m[(ij, ij)] = -1.0;
                        jij_list.push(Generator { kind: GeneratorKind::Psd { block: h, i, j }, matrix: m });
                    }
                }
            }
        }
    }
    ZvpGenerators { j_list, jij_list, nonneg_index_set: spec.nonneg_index_set() }
}

/// The first defining condition that failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Condition {
    Psd,
    Generator(GeneratorKind),
    Entry { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    /// Every explicit inequality holds; `margin` is the smallest slack.
    Checked { margin: f64 },
    Violation { condition: Condition, value: f64 },
    /// `A = P + Σ t_k J_k + N`.
    Decomposition { p: DMatrix<f64>, t: Vec<f64>, n: DMatrix<f64> },
    Gram(GramCertificate),
    /// `y` with `M(y) ⪰ 0` and `C₀(y) = X`.
    Moments(MomentVector),
    /// Optimal phase-I shift below `−tol`.
    PhaseOne { margin: f64 },
    /// `y` with `M(y) ⪰ 0` and `yᵀθ < 0` for the certificate form `θ`.
    SosWitness { witness: MomentVector, value: f64 },
    Cut(Cut),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipResult {
    pub member: bool,
    pub evidence: Evidence,
}

fn check_matrix(spec: &ConeSpec, x: &DMatrix<f64>) -> Result<DMatrix<f64>, GdnnError> {
    let n = spec.ambient_dim();
    if x.nrows() != n || x.ncols() != n {
        return Err(GdnnError::DimensionMismatch { expected: n, actual: x.nrows() });
    }
    let asym = linalg::asymmetry(x);
    if asym > 1e-10 * (1.0 + x.amax()) {
        return Err(GdnnError::NotSymmetric(asym));
    }
    Ok((x + x.transpose()) * 0.5)
}

/// PSD test with tolerance relative to `max(1, |trace|)`.
fn psd_margin(x: &DMatrix<f64>, tol: f64) -> Result<(f64, f64), GdnnError> {
    let lmin = linalg::min_eigenvalue(x).ok_or(GdnnError::Jordan(JordanError::Eigensolver))?;
    Ok((lmin, tol * x.trace().abs().max(1.0)))
}

pub fn zvp_membership(spec: &ConeSpec, x: &DMatrix<f64>, tol: f64) -> Result<MembershipResult, GdnnError> {
    let x = check_matrix(spec, x)?;
    let violation = |condition, value| Ok(MembershipResult { member: false, evidence: Evidence::Violation { condition, value } });
    let (lmin, ptol) = psd_margin(&x, tol)?;
    if lmin < -ptol {
        return violation(Condition::Psd, lmin);
    }
    let mut margin = lmin;
    for g in zvp_generators(spec).all() {
        let v = linalg::frobenius(&g.matrix, &x);
        if v < -tol {
            return violation(Condition::Generator(g.kind), v);
        }
        margin = margin.min(v);
    }
    let idx = spec.nonneg_index_set();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a..] {
            if x[(i, j)] < -tol {
                return violation(Condition::Entry { i, j }, x[(i, j)]);
            }
            margin = margin.min(x[(i, j)]);
        }
    }
    Ok(MembershipResult { member: true, evidence: Evidence::Checked { margin } })
}

fn feasibility(sys: &FeasibilitySystem, tol: f64) -> Result<FeasibilityOutcome, GdnnError> {
    match solve_feasibility(sys, tol, &SolverOptions::default())? {
        FeasibilityOutcome::Indeterminate { status } => Err(GdnnError::Solver(status)),
        other => Ok(other),
    }
}

/// Whether `A = P + Σ t_k J_k + N` with `P ⪰ 0`, `t ≥ 0` and `N` nonnegative
/// and supported on `I_{≥0} × I_{≥0}`.
pub fn kzvp0_membership(spec: &ConeSpec, a: &DMatrix<f64>, tol: f64) -> Result<MembershipResult, GdnnError> {
    let a = check_matrix(spec, a)?;
    let n = spec.ambient_dim();
    let gens = zvp_generators(spec);
    let idx = &gens.nonneg_index_set;
    let pairs: Vec<(usize, usize)> =
        idx.iter().enumerate().flat_map(|(k, &i)| idx[k..].iter().map(move |&j| (i.min(j), i.max(j)))).collect();
    let sd = n * (n + 1) / 2;
    let ng = gens.len();
    let nvar = sd + ng + pairs.len();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let row = |i: usize, j: usize| j * (j + 1) / 2 + i;
    let mut trip = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            trip.push((row(i, j), row(i, j), if i == j { 1.0 } else { 1.0 / SQRT_2 }));
        }
    }
    for (k, g) in gens.all().enumerate() {
        for j in 0..n {
            for i in 0..=j {
                if g.matrix[(i, j)] != 0.0 {
                    trip.push((row(i, j), sd + k, g.matrix[(i, j)]));
                }
            }
        }
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        trip.push((row(i, j), sd + ng + k, 1.0));
    }
    let amat = SparseMatrix::from_triplets(sd, nvar, trip);
    let mut b = vec![0.0; sd];
    for j in 0..n {
        for i in 0..=j {
            b[row(i, j)] = a[(i, j)] / scale;
        }
    }
    let cone = ConeSpec::new(vec![Block::PsdVec { order: n }, Block::Nonneg { dim: ng + pairs.len() }]);
    let sys = FeasibilitySystem {
        a: amat,
        b,
        g: SparseMatrix::from_triplets(nvar, nvar, (0..nvar).map(|i| (i, i, -1.0))),
        h: vec![0.0; nvar],
        cone,
    };
    Ok(match feasibility(&sys, tol)? {
        FeasibilityOutcome::Feasible { x, .. } => {
            let p = jordan::smat(&x[..sd])? * scale;
            let t = x[sd..sd + ng].iter().map(|v| v * scale).collect();
            let mut nm = DMatrix::zeros(n, n);
            for (k, &(i, j)) in pairs.iter().enumerate() {
                nm[(i, j)] = x[sd + ng + k] * scale;
                nm[(j, i)] = nm[(i, j)];
            }
            MembershipResult { member: true, evidence: Evidence::Decomposition { p, t, n: nm } }
        }
        FeasibilityOutcome::Infeasible { margin, .. } => {
            MembershipResult { member: false, evidence: Evidence::PhaseOne { margin } }
        }
        FeasibilityOutcome::Indeterminate { status } => return Err(GdnnError::Solver(status)),
    })
}

/// Coefficients of `P(x; A) = (x∘x)ᵀ A (x∘x)`.
pub fn quartic_form(spec: &ConeSpec, a: &DMatrix<f64>) -> Result<Form, GdnnError> {
    let a = check_matrix(spec, a)?;
    let n = spec.ambient_dim();
    let table = jordan::square_quadratic_forms(spec);
    let basis4 = enumerate_monomials(n, 4)?;
    let upper: Vec<_> = (0..n).map(|i| table.upper_entries(i)).collect();
    let mut coeffs = vec![0.0; basis4.len()];
    for j in 0..n {
        for i in 0..=j {
            let w = if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] };
            if w == 0.0 {
                continue;
            }
            for (k, v) in polymoment::quartic_terms(&basis4, &upper[i], &upper[j]) {
                coeffs[k] += w * v;
            }
        }
    }
    Ok(Form { n, degree: 4, coeffs })
}

/// Whether `(Σ xᵢ²)^r (x∘x)ᵀ A (x∘x)` is a sum of squares.
pub fn knn_membership(spec: &ConeSpec, a: &DMatrix<f64>, r: usize, tol: f64) -> Result<MembershipResult, GdnnError> {
    let n = spec.ambient_dim();
    let size = basis_size(n, 2 * r + 4);
    if size > KNN_BASIS_CAP {
        return Err(GdnnError::LevelTooLarge { level: r, size });
    }
    let theta = polymoment::multiply_by_norm_power(&quartic_form(spec, a)?, r)?;
    Ok(match polymoment::sos_decompose(&theta, tol)? {
        SosOutcome::Feasible(cert) => MembershipResult { member: true, evidence: Evidence::Gram(cert) },
        SosOutcome::Infeasible { witness, value } => {
            MembershipResult { member: false, evidence: Evidence::SosWitness { witness, value } }
        }
    })
}

/// The linear map `y ↦ C₀(y)` from `R^{I(n,4)}` to symmetric matrices, with
/// `C₀(y)_IJ` the pairing of `y` with the coefficients of
/// `(xᵀQ_I x)(xᵀQ_J x)`.
#[derive(Debug, Clone)]
pub struct C0Map {
    n: usize,
    basis: MonomialBasis,
    /// Merged `(moment index, coefficient)` lists for `I ≤ J`, stored at `J(J+1)/2 + I`.
    terms: Vec<Vec<(usize, f64)>>,
}

impl C0Map {
    pub fn new(spec: &ConeSpec) -> Result<Self, GdnnError> {
        let n = spec.ambient_dim();
        let table = jordan::square_quadratic_forms(spec);
        let basis = enumerate_monomials(n, 4)?;
        let upper: Vec<_> = (0..n).map(|i| table.upper_entries(i)).collect();
        let mut terms = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                let mut t = polymoment::quartic_terms(&basis, &upper[i], &upper[j]);
                t.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(t.len());
                for (k, v) in t {
                    match merged.last_mut() {
                        Some(last) if last.0 == k => last.1 += v,
                        _ => merged.push((k, v)),
                    }
                }
                merged.retain(|e| e.1 != 0.0);
                terms.push(merged);
            }
        }
        Ok(C0Map { n, basis, terms })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Terms of entry `(i, j)`.
    pub fn terms(&self, i: usize, j: usize) -> &[(usize, f64)] {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.terms[j * (j + 1) / 2 + i]
    }

    pub fn apply(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in 0..=j {
                let v: f64 = self.terms(i, j).iter().map(|&(k, c)| c * y[k]).sum();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

pub fn nn_c0(spec: &ConeSpec, y: &MomentVector) -> Result<DMatrix<f64>, GdnnError> {
    let map = C0Map::new(spec)?;
    if y.n != spec.ambient_dim() || y.degree != 4 || y.y.len() != map.basis.len() {
        return Err(GdnnError::DimensionMismatch { expected: map.basis.len(), actual: y.y.len() });
    }
    Ok(map.apply(&y.y))
}

/// Whether `X = C₀(y)` for some `y` with `M(y) ⪰ 0`.
pub fn nn_membership(spec: &ConeSpec, x: &DMatrix<f64>, tol: f64) -> Result<MembershipResult, GdnnError> {
    let x = check_matrix(spec, x)?;
    let n = spec.ambient_dim();
    let map = C0Map::new(spec)?;
    let table = MomentIndexTable::new(n, 4)?;
    let nvar = map.basis.len();
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let mut trip = Vec::new();
    let mut b = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            let r = b.len();
            trip.extend(map.terms(i, j).iter().map(|&(k, c)| (r, k, c)));
            b.push(x[(i, j)] / scale);
        }
    }
    let amat = SparseMatrix::from_triplets(b.len(), nvar, trip);
    let op = table.svec_operator();
    let g = SparseMatrix::from_triplets(op.rows(), nvar, op.triplets().map(|(i, j, v)| (i, j, -v)));
    let k = table.half.len();
    let sys = FeasibilitySystem { a: amat, b, g, h: vec![0.0; op.rows()], cone: ConeSpec::psd(k) };
    Ok(match feasibility(&sys, tol)? {
        FeasibilityOutcome::Feasible { x: y, .. } => MembershipResult {
            member: true,
            evidence: Evidence::Moments(MomentVector { n, degree: 4, y: y.iter().map(|v| v * scale).collect() }),
        },
        FeasibilityOutcome::Infeasible { margin, .. } => {
            MembershipResult { member: false, evidence: Evidence::PhaseOne { margin } }
        }
        FeasibilityOutcome::Indeterminate { status } => return Err(GdnnError::Solver(status)),
    })
}

/// `X ⪰ 0` and `Xs ∈ K` for every primitive idempotent `s`; the separation
/// shift is `tol` relative to `max(1, |trace X|)`.
pub fn bd_membership(spec: &ConeSpec, x: &DMatrix<f64>, tol: f64) -> Result<MembershipResult, GdnnError> {
    if spec.has_psd() {
        return Err(GdnnError::Unsupported("BD separation needs nonnegative and second-order blocks only"));
    }
    let x = check_matrix(spec, x)?;
    let (lmin, ptol) = psd_margin(&x, tol)?;
    if lmin < -ptol {
        return Ok(MembershipResult { member: false, evidence: Evidence::Violation { condition: Condition::Psd, value: lmin } });
    }
    Ok(match bdsep::separate(spec, &x, ptol)? {
        SeparationOutcome::Inside => MembershipResult { member: true, evidence: Evidence::Checked { margin: lmin } },
        SeparationOutcome::Cut(cut) => MembershipResult { member: false, evidence: Evidence::Cut(cut) },
    })
}
