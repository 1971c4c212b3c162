//! Dense primal-dual interior-point solver for block-conic programs
//!
//! ```text
//! minimize    cᵀx
//! subject to  A x = b
//!             G x + s = h,   s ∈ K
//! ```
//!
//! where `K` is a product of nonnegative, second-order and vectorized PSD
//! cones described by a [`ConeSpec`]. The method is a homogeneous self-dual
//! embedding with Nesterov–Todd scaling and a Mehrotra predictor-corrector, so
//! no feasible starting point is needed and infeasibility is reported through
//! certificates. The dual is
//!
//! ```text
//! maximize    -bᵀy - hᵀz
//! subject to  Aᵀy + Gᵀz + c = 0,   z ∈ K.
//! ```

mod feasibility;
pub mod format;
mod ipm;
mod kkt;
mod presolve;
mod sparse;

pub use feasibility::{solve_feasibility, FeasibilityOutcome, FeasibilitySystem};
pub use ipm::solve;
pub use sparse::SparseMatrix;

use crate::jordan::{self, ConeSpec};
use crate::linalg;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid program: {0}")]
    InvalidProgram(String),
}

/// Block-conic program in the `(c, A, b, G, h, K)` form above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConicProgram {
    pub c: Vec<f64>,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub g: SparseMatrix,
    pub h: Vec<f64>,
    pub cone: ConeSpec,
}

impl BlockConicProgram {
    pub fn new(
        c: Vec<f64>,
        a: SparseMatrix,
        b: Vec<f64>,
        g: SparseMatrix,
        h: Vec<f64>,
        cone: ConeSpec,
    ) -> Result<Self, SolverError> {
        let p = BlockConicProgram { c, a, b, g, h, cone };
        p.validate()?;
        Ok(p)
    }

    /// Standard conic form: the first `cone.ambient_dim()` variables lie in
    /// `cone`, followed by `free` unrestricted variables.
    pub fn standard(
        cone: ConeSpec,
        free: usize,
        c: Vec<f64>,
        a: SparseMatrix,
        b: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let m = cone.ambient_dim();
        let g = SparseMatrix::from_triplets(m, m + free, (0..m).map(|i| (i, i, -1.0)));
        Self::new(c, a, b, g, vec![0.0; m], cone)
    }

    /// Linear-matrix-inequality form: `F0 + Σ yᵢ Fᵢ ∈ K`, with the columns of
    /// `f` holding the vectorized `Fᵢ`, plus equalities `A y = b`.
    pub fn lmi(
        cone: ConeSpec,
        c: Vec<f64>,
        f0: Vec<f64>,
        f: &SparseMatrix,
        a: SparseMatrix,
        b: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let g = SparseMatrix::from_triplets(f.rows(), f.cols(), f.triplets().map(|(i, j, v)| (i, j, -v)));
        Self::new(c, a, b, g, f0, cone)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.c.len();
        let err = |m: String| Err(SolverError::InvalidProgram(m));
        if self.a.cols() != n || self.g.cols() != n {
            return err(format!("A has {} and G has {} columns; expected {n}", self.a.cols(), self.g.cols()));
        }
        if self.a.rows() != self.b.len() {
            return err(format!("A has {} rows but b has length {}", self.a.rows(), self.b.len()));
        }
        if self.g.rows() != self.h.len() || self.h.len() != self.cone.ambient_dim() {
            return err(format!(
                "G has {} rows, h length {}, cone dimension {}",
                self.g.rows(),
                self.h.len(),
                self.cone.ambient_dim()
            ));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.c) || !finite(&self.b) || !finite(&self.h) || !self.a.is_finite() || !self.g.is_finite() {
            return err("non-finite data".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Iterative-refinement rounds per KKT solve.
    pub refinement: usize,
    /// Drop linearly dependent equality rows before solving.
    pub presolve: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 200, refinement: 3, presolve: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub tau: f64,
    pub kappa: f64,
    pub step: f64,
}

/// Result of [`solve`]. For infeasible statuses `x, s` (resp. `y, z`) hold the
/// normalized certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `sᵀz` relative to `max(1, min(|pcost|, |dcost|))`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

impl Solution {
    /// Optimal, or stopped early at an iterate meeting the looser tolerance `tol`.
    pub fn is_near_optimal(&self, tol: f64) -> bool {
        self.status == SolveStatus::Optimal
            || (matches!(self.status, SolveStatus::MaxIter | SolveStatus::Numerical)
                && self.primal_residual <= tol
                && self.dual_residual <= tol
                && self.gap <= tol)
    }
}

/// Absolute KKT residuals of a primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `‖Ax − b‖∞ / (1 + ‖b‖∞)`.
    pub equality: f64,
    /// `‖Gx + s − h‖∞ / (1 + ‖h‖∞)`.
    pub cone_equality: f64,
    /// `‖Aᵀy + Gᵀz + c‖∞ / (1 + ‖c‖∞)`.
    pub stationarity: f64,
    /// `sᵀz / (1 + |cᵀx|)`.
    pub complementarity: f64,
    /// Most negative eigenvalue of `s` and `z`, floored at zero.
    pub cone_violation: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.equality
            .max(self.cone_equality)
            .max(self.stationarity)
            .max(self.complementarity)
            .max(self.cone_violation)
    }
}

pub fn kkt_report(prog: &BlockConicProgram, sol: &Solution) -> KktReport {
    let rel = |v: &[f64], d: &[f64]| linalg::norm_inf(v) / (1.0 + linalg::norm_inf(d));
    let mut ax = prog.a.mul_vec(&sol.x);
    for (r, b) in ax.iter_mut().zip(&prog.b) {
        *r -= b;
    }
    let mut gx = prog.g.mul_vec(&sol.x);
    for ((r, s), h) in gx.iter_mut().zip(&sol.s).zip(&prog.h) {
        *r += s - h;
    }
    let mut st = prog.c.clone();
    prog.a.mul_t_vec_add(1.0, &sol.y, &mut st);
    prog.g.mul_t_vec_add(1.0, &sol.z, &mut st);
    let comp = linalg::dot(&sol.s, &sol.z).abs() / (1.0 + linalg::dot(&prog.c, &sol.x).abs());
    let ms = jordan::min_eigenvalue(&prog.cone, &sol.s).unwrap_or(f64::NEG_INFINITY);
    let mz = jordan::min_eigenvalue(&prog.cone, &sol.z).unwrap_or(f64::NEG_INFINITY);
    KktReport {
        equality: rel(&ax, &prog.b),
        cone_equality: rel(&gx, &prog.h),
        stationarity: rel(&st, &prog.c),
        complementarity: comp,
        cone_violation: (-ms.min(mz)).max(0.0),
    }
}
