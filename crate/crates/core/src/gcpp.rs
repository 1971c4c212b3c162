//! Mixed 0–1 second-order cone programs
//!
//! ```text
//! minimize    cᵀx
//! subject to  0 ≤ x₁ ≤ 2,  0 ≤ xᵢ ≤ 1 (i ≥ 2),  xᵢ ∈ {0, 1} (i ∈ B),  x ∈ Lⁿ
//! ```
//!
//! lifted to a generalized completely positive program over
//! `K = R₊^{2n+1} × Lⁿ`, and the SDP, ZVP, NN and BD relaxations of the lift.
//!
//! The lifted matrix is `Y = [[1, zᵀ], [z, Z]]` with `z = (u, v, x)`: index 0
//! is the homogenizing coordinate, `1..=n` the slacks `u = x`, `n+1..=2n` the
//! slacks `v = ub − x`, and `2n+1..=3n` the original variables. Binary
//! indices are zero-based and must lie in `1..n`.

use crate::bdsep::{self, BdsepError, CutSource, SeparationOutcome};
use crate::conicsolver::{self, BlockConicProgram, SolveStatus, SolverError, SolverOptions, SparseMatrix};
use crate::gdnn::{self, C0Map, GdnnError};
use crate::jordan::{self, Block, ConeSpec};
use crate::linalg;
use crate::polymoment::MomentIndexTable;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GcppError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{variant:?} relaxation: solver stopped with status {status:?}")]
    Solver { variant: Variant, status: SolveStatus },
    #[error("exchange method did not terminate within {0} subproblem solves")]
    IterationCap(usize),
    #[error("{0} binary variables are too many to enumerate")]
    TooManyBinaries(usize),
    #[error(transparent)]
    Program(#[from] SolverError),
    #[error(transparent)]
    Gdnn(#[from] GdnnError),
    #[error(transparent)]
    Separation(#[from] BdsepError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sdp,
    Zvp,
    Nn,
    Bd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisocpInstance {
    pub n: usize,
    pub c: Vec<f64>,
    /// Zero-based indices of binary variables, a subset of `1..n`.
    pub binary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl MisocpInstance {
    pub fn validate(&self) -> Result<(), GcppError> {
        let bad = |m: String| Err(GcppError::InvalidInstance(m));
        if self.n < 2 {
            return bad(format!("n = {} (need n ≥ 2)", self.n));
        }
        if self.c.len() != self.n {
            return bad(format!("c has length {}, expected {}", self.c.len(), self.n));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return bad("c is not finite".into());
        }
        let mut b = self.binary.clone();
        b.sort_unstable();
        b.dedup();
        if b.len() != self.binary.len() {
            return bad("duplicate binary index".into());
        }
        if let Some(&i) = b.iter().find(|&&i| i == 0 || i >= self.n) {
            return bad(format!("binary index {i} outside 1..{}", self.n));
        }
        Ok(())
    }

    /// `(2, 1, …, 1)`.
    pub fn upper_bounds(&self) -> Vec<f64> {
        (0..self.n).map(|i| if i == 0 { 2.0 } else { 1.0 }).collect()
    }

    /// Lifted vector `(1, u, v, x)` of a point `x`.
    pub fn lift_vector(&self, x: &[f64]) -> Vec<f64> {
        let ub = self.upper_bounds();
        let mut z = vec![1.0];
        z.extend_from_slice(x);
        z.extend(x.iter().zip(&ub).map(|(xi, u)| u - xi));
        z.extend_from_slice(x);
        z
    }

    pub fn lift(&self, x: &[f64]) -> DMatrix<f64> {
        let z = DVector::from_vec(self.lift_vector(x));
        &z * z.transpose()
    }
}

/// `minimize ⟨C, Y⟩` subject to `⟨A_i, Y⟩ = b_i` and `Y ∈ CP(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcppProblem {
    pub n: usize,
    pub objective: DMatrix<f64>,
    pub constraints: Vec<(DMatrix<f64>, f64)>,
    pub cone: ConeSpec,
    /// `L` with every feasible `Y ⪰ 0` of the form `L Ŷ Lᵀ`, `Ŷ` of order
    /// `n + 1` indexed by `(1, x)`.
    pub face: DMatrix<f64>,
}

impl GcppProblem {
    pub fn order(&self) -> usize {
        self.objective.nrows()
    }

    /// `max_i |⟨A_i, Y⟩ − b_i|`.
    pub fn equality_residual(&self, y: &DMatrix<f64>) -> f64 {
        self.constraints.iter().fold(0.0f64, |r, (a, b)| r.max((linalg::frobenius(a, y) - b).abs()))
    }
}

fn sym_unit(order: usize, i: usize, j: usize, v: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(order, order);
    if i == j {
        m[(i, i)] = v;
    } else {
        m[(i, j)] = 0.5 * v;
        m[(j, i)] = 0.5 * v;
    }
    m
}

pub fn burer_reformulate(inst: &MisocpInstance) -> Result<GcppProblem, GcppError> {
    inst.validate()?;
    let n = inst.n;
    let order = 3 * n + 1;
    let (u, v, x) = (|i: usize| 1 + i, |i: usize| 1 + n + i, |i: usize| 1 + 2 * n + i);
    let ub = inst.upper_bounds();
    let mut objective = DMatrix::zeros(order, order);
    for i in 0..n {
        objective += sym_unit(order, 0, x(i), inst.c[i]);
    }
    let mut constraints = vec![(sym_unit(order, 0, 0, 1.0), 1.0)];
    // Linear rows a_kᵀz = b_k: x − u = 0 and x + v = ub.
    let rows: Vec<(Vec<(usize, f64)>, f64)> = (0..n)
        .map(|i| (vec![(x(i), 1.0), (u(i), -1.0)], 0.0))
        .chain((0..n).map(|i| (vec![(x(i), 1.0), (v(i), 1.0)], ub[i])))
        .collect();
    for (a, b) in &rows {
        let mut m = DMatrix::zeros(order, order);
        for &(k, w) in a {
            m += sym_unit(order, 0, k, w);
        }
        constraints.push((m, *b));
    }
    for (a, b) in &rows {
        let mut m = DMatrix::zeros(order, order);
        for &(k, wk) in a {
            for &(l, wl) in a {
                m[(k, l)] += wk * wl;
            }
        }
        constraints.push((m, b * b));
    }
    for &i in &inst.binary {
        constraints.push((sym_unit(order, x(i), x(i), -1.0) + sym_unit(order, 0, x(i), 1.0), 0.0));
    }
    let cone = ConeSpec::new(vec![Block::Nonneg { dim: 2 * n + 1 }, Block::SecondOrder { dim: n }]);
    // z = L (1, x): u = x, v = ub − x.
    let mut face = DMatrix::zeros(order, n + 1);
    face[(0, 0)] = 1.0;
    for i in 0..n {
        face[(v(i), 0)] = ub[i];
        face[(u(i), 1 + i)] = 1.0;
        face[(v(i), 1 + i)] = -1.0;
        face[(x(i), 1 + i)] = 1.0;
    }
    Ok(GcppProblem { n, objective, constraints, cone, face })
}

fn svec_dense(m: &DMatrix<f64>) -> Vec<f64> {
    jordan::svec(&((m + m.transpose()) * 0.5)).expect("square matrix")
}

/// Coefficients of `pᵀ Ŷ q` in `svec(Ŷ)`.
fn bilinear(p: &[f64], q: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for bj in 0..p.len() {
        for ai in 0..=bj {
            let v = if ai == bj { p[ai] * q[ai] } else { (p[ai] * q[bj] + p[bj] * q[ai]) / SQRT_2 };
            if v != 0.0 {
                out.push((bj * (bj + 1) / 2 + ai, v));
            }
        }
    }
    out
}

/// Optional regularization of the SDP objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxationOptions {
    /// Multiple of the identity added to `C` in the SDP variant.
    pub sdp_shift: f64,
    pub solver: SolverOptions,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions { sdp_shift: 0.005, solver: SolverOptions::default() }
    }
}

/// Relaxation as a conic program. SDP and ZVP use `svec(Ŷ)` with
/// `Y = L Ŷ Lᵀ` (see [`GcppProblem::face`]); NN uses the moment vector
/// `y ∈ R^{I(ñ,4)}` with `Y = C₀(y)`.
pub fn build_relaxation(g: &GcppProblem, variant: Variant, opts: &RelaxationOptions) -> Result<BlockConicProgram, GcppError> {
    let order = g.order();
    match variant {
        Variant::Sdp | Variant::Zvp => {
            let mut obj = g.objective.clone();
            if variant == Variant::Sdp {
                obj += DMatrix::<f64>::identity(order, order) * opts.sdp_shift;
            }
            let mut extra: Vec<Vec<(usize, f64)>> = Vec::new();
            if variant == Variant::Zvp {
                let gens = gdnn::zvp_generators(&g.cone);
                for gen in gens.all() {
                    let red = g.face.transpose() * &gen.matrix * &g.face;
                    extra.push(svec_dense(&red).into_iter().enumerate().filter(|e| e.1 != 0.0).collect());
                }
                let idx = &gens.nonneg_index_set;
                for (a, &i) in idx.iter().enumerate() {
                    for &j in &idx[a..] {
                        extra.push(bilinear(&face_row(g, i), &face_row(g, j)));
                    }
                }
            }
            svec_program(g, &obj, &[], &extra)
        }
        Variant::Nn => nn_program(g),
        Variant::Bd => Err(GcppError::InvalidInstance("the BD relaxation is solved by solve_bd_exchange".into())),
    }
}

fn face_row(g: &GcppProblem, i: usize) -> Vec<f64> {
    g.face.row(i).iter().copied().collect()
}

/// Program over `svec(Ŷ) ∈ S₊`, with `L Ŷ Lᵀ s ∈ K` for each `s` in `cuts`
/// and `ℓ(Ŷ) ≥ 0` for each linear form in `nonneg_rows`.
fn svec_program(
    g: &GcppProblem,
    obj: &DMatrix<f64>,
    cuts: &[Vec<f64>],
    nonneg_rows: &[Vec<(usize, f64)>],
) -> Result<BlockConicProgram, GcppError> {
    let order = g.order();
    let l = &g.face;
    let r = l.ncols();
    let sd = r * (r + 1) / 2;
    let reduce = |m: &DMatrix<f64>| svec_dense(&(l.transpose() * m * l));
    let c = reduce(obj);
    let mut a_trip = Vec::new();
    let mut b = Vec::new();
    for (am, bi) in &g.constraints {
        let coef = reduce(am);
        if coef.iter().all(|&v| v == 0.0) && *bi == 0.0 {
            continue;
        }
        a_trip.extend(coef.into_iter().enumerate().filter(|e| e.1 != 0.0).map(|(k, v)| (b.len(), k, v)));
        b.push(*bi);
    }
    let a = SparseMatrix::from_triplets(b.len(), sd, a_trip);
    let mut g_trip: Vec<(usize, usize, f64)> = (0..sd).map(|k| (k, k, -1.0)).collect();
    let mut blocks = vec![Block::PsdVec { order: r }];
    let mut row = sd;
    if !nonneg_rows.is_empty() {
        for form in nonneg_rows {
            g_trip.extend(form.iter().map(|&(k, v)| (row, k, -v)));
            row += 1;
        }
        blocks.push(Block::Nonneg { dim: nonneg_rows.len() });
    }
    for s in cuts {
        let t: Vec<f64> = (l.transpose() * DVector::from_column_slice(s)).iter().copied().collect();
        for i in 0..order {
            g_trip.extend(bilinear(&face_row(g, i), &t).into_iter().map(|(k, v)| (row + i, k, -v)));
        }
        row += order;
        blocks.extend_from_slice(g.cone.blocks());
    }
    let gm = SparseMatrix::from_triplets(row, sd, g_trip);
    Ok(BlockConicProgram::new(c, a, b, gm, vec![0.0; row], ConeSpec::new(blocks))?)
}

fn lift_face(g: &GcppProblem, svec_hat: &[f64]) -> DMatrix<f64> {
    let yh = jordan::smat(svec_hat).expect("svec length");
    &g.face * yh * g.face.transpose()
}

fn nn_program(g: &GcppProblem) -> Result<BlockConicProgram, GcppError> {
    let order = g.order();
    let map = C0Map::new(&g.cone)?;
    let table = MomentIndexTable::new(order, 4).map_err(GdnnError::from)?;
    let nvar = map.basis().len();
    // ⟨M, C₀(y)⟩ as a linear form in y.
    let pair = |m: &DMatrix<f64>| -> Vec<f64> {
        let mut out = vec![0.0; nvar];
        for j in 0..order {
            for i in 0..=j {
                let w = if i == j { m[(i, i)] } else { m[(i, j)] + m[(j, i)] };
                if w != 0.0 {
                    for &(k, c) in map.terms(i, j) {
                        out[k] += w * c;
                    }
                }
            }
        }
        out
    };
    let c = pair(&g.objective);
    let mut a_trip = Vec::new();
    for (r, (am, _)) in g.constraints.iter().enumerate() {
        a_trip.extend(pair(am).into_iter().enumerate().filter(|e| e.1 != 0.0).map(|(k, v)| (r, k, v)));
    }
    let a = SparseMatrix::from_triplets(g.constraints.len(), nvar, a_trip);
    let b = g.constraints.iter().map(|c| c.1).collect();
    let op = table.svec_operator();
    let gm = SparseMatrix::from_triplets(op.rows(), nvar, op.triplets().map(|(i, j, v)| (i, j, -v)));
    let h = vec![0.0; op.rows()];
    Ok(BlockConicProgram::new(c, a, b, gm, h, ConeSpec::psd(table.half.len()))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub variant: Variant,
    pub value: f64,
    pub status: SolveStatus,
    pub y: DMatrix<f64>,
    /// Largest KKT residual over all conic solves.
    pub kkt: f64,
    pub iterations: usize,
}

fn accepted(sol: &conicsolver::Solution) -> bool {
    sol.is_near_optimal(1e-6)
}

/// Solve the SDP, ZVP or NN relaxation.
pub fn solve_relaxation(g: &GcppProblem, variant: Variant, opts: &RelaxationOptions) -> Result<RelaxationResult, GcppError> {
    let prog = build_relaxation(g, variant, opts)?;
    let sol = conicsolver::solve(&prog, &opts.solver)?;
    if !accepted(&sol) {
        return Err(GcppError::Solver { variant, status: sol.status });
    }
    let kkt = conicsolver::kkt_report(&prog, &sol).max();
    let y = match variant {
        Variant::Nn => C0Map::new(&g.cone)?.apply(&sol.x),
        _ => lift_face(g, &sol.x),
    };
    Ok(RelaxationResult { variant, value: sol.primal_objective, status: sol.status, y, kkt, iterations: sol.iterations })
}

/// Parameters of the explicit exchange method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExchangeParams {
    /// `γ_k = ratio^k`.
    pub gamma_ratio: f64,
    pub tau: f64,
    /// Cuts whose multiplier norm is at most this are dropped.
    pub prune: f64,
    /// Random second-order idempotents added to the fixed scan set.
    pub random_idempotents: usize,
    /// Consecutive cut additions after which the next `γ` jumps to `τ`.
    pub accelerate_after: usize,
    pub max_inner: usize,
    pub solver: SolverOptions,
}

impl Default for ExchangeParams {
    fn default() -> Self {
        ExchangeParams {
            gamma_ratio: 0.5,
            tau: 1e-5,
            prune: 1e-12,
            random_idempotents: 1000,
            accelerate_after: 5,
            max_inner: 500,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CutOrigin {
    /// Index into the fixed scan set.
    Fixed(usize),
    Separation(CutSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeStep {
    pub outer: usize,
    pub inner: usize,
    pub gamma: f64,
    /// Cut set size after pruning.
    pub active: usize,
    pub objective: f64,
    pub origin: Option<CutOrigin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeResult {
    pub value: f64,
    pub y: DMatrix<f64>,
    pub trace: Vec<ExchangeStep>,
    pub kkt: f64,
    pub solves: usize,
    /// Shift `γ` at termination.
    pub gamma: f64,
    /// Whether `P(∅)` failed and the run started from the unit idempotents.
    pub started_from_units: bool,
}

struct Subproblem {
    value: f64,
    y: DMatrix<f64>,
    multipliers: Vec<f64>,
    kkt: f64,
}

fn solve_cuts(g: &GcppProblem, cuts: &[Vec<f64>], opts: &SolverOptions) -> Result<Result<Subproblem, SolveStatus>, GcppError> {
    let prog = svec_program(g, &g.objective, cuts, &[])?;
    let sol = conicsolver::solve(&prog, opts)?;
    if !accepted(&sol) {
        return Ok(Err(sol.status));
    }
    let order = g.order();
    let r = g.face.ncols();
    let sd = r * (r + 1) / 2;
    let multipliers = (0..cuts.len()).map(|k| linalg::norm2(&sol.z[sd + k * order..sd + (k + 1) * order])).collect();
    Ok(Ok(Subproblem {
        value: sol.primal_objective,
        y: lift_face(g, &sol.x),
        multipliers,
        kkt: conicsolver::kkt_report(&prog, &sol).max(),
    }))
}

fn most_violated(cone: &ConeSpec, y: &DMatrix<f64>, set: &[Vec<f64>], gamma: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in set.iter().enumerate() {
        let ys: Vec<f64> = (y * DVector::from_column_slice(s)).iter().copied().collect();
        let lmin = jordan::min_eigenvalue(cone, &ys).unwrap_or(f64::INFINITY) + gamma;
        if lmin < 0.0 && best.is_none_or(|b| lmin < b.1) {
            best = Some((k, lmin));
        }
    }
    best.map(|b| b.0)
}

/// Explicit exchange method for `min ⟨C, Y⟩` over `S₊ ∩ N(K)` with the
/// equalities of `g`.
pub fn solve_bd_exchange<R: Rng + ?Sized>(
    g: &GcppProblem,
    params: &ExchangeParams,
    rng: &mut R,
) -> Result<ExchangeResult, GcppError> {
    if g.cone.has_psd() {
        return Err(GcppError::Separation(BdsepError::Unsupported));
    }
    let dim = g.cone.ambient_dim();
    let mut fixed: Vec<Vec<f64>> = g
        .cone
        .nonneg_coords()
        .into_iter()
        .map(|i| {
            let mut s = vec![0.0; dim];
            s[i] = 1.0;
            s
        })
        .collect();
    let units = fixed.clone();
    for (h, _, d) in g.cone.soc_blocks() {
        if d >= 2 {
            for _ in 0..params.random_idempotents {
                fixed.push(jordan::sample_primitive_idempotent(&g.cone, h, rng).expect("block index"));
            }
        }
    }

    let mut solves = 0;
    let mut kkt = 0.0f64;
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut started_from_units = false;
    let mut cur = match solve_cuts(g, &cuts, &params.solver)? {
        Ok(sp) => sp,
        Err(_) => {
            started_from_units = true;
            cuts = units;
            solves += 1;
            solve_cuts(g, &cuts, &params.solver)?.map_err(|status| GcppError::Solver { variant: Variant::Bd, status })?
        }
    };
    solves += 1;
    kkt = kkt.max(cur.kkt);
    let mut trace =
        vec![ExchangeStep { outer: 0, inner: 0, gamma: 1.0, active: cuts.len(), objective: cur.value, origin: None }];
    let mut k = 0;
    let mut gamma = 1.0;
    let mut inner_total = 0;
    loop {
        let mut r = 0;
        loop {
            let (s, origin) = match most_violated(&g.cone, &cur.y, &fixed, gamma) {
                Some(i) => (fixed[i].clone(), CutOrigin::Fixed(i)),
                None => match bdsep::separate(&g.cone, &sym(&cur.y), gamma)? {
                    SeparationOutcome::Cut(cut) => (cut.witness, CutOrigin::Separation(cut.source)),
                    SeparationOutcome::Inside => break,
                },
            };
            inner_total += 1;
            if inner_total > params.max_inner {
                return Err(GcppError::IterationCap(params.max_inner));
            }
            cuts.push(s);
            let next = solve_cuts(g, &cuts, &params.solver)?
                .map_err(|status| GcppError::Solver { variant: Variant::Bd, status })?;
            solves += 1;
            kkt = kkt.max(next.kkt);
            let keep: Vec<bool> = next.multipliers.iter().map(|&m| m > params.prune).collect();
            cuts = cuts.into_iter().zip(&keep).filter(|(_, &kp)| kp).map(|(c, _)| c).collect();
            cur = next;
            r += 1;
            trace.push(ExchangeStep { outer: k, inner: r, gamma, active: cuts.len(), objective: cur.value, origin: Some(origin) });
        }
        if gamma <= params.tau {
            break;
        }
        k += 1;
        gamma = if r >= params.accelerate_after { params.tau } else { params.gamma_ratio.powi(k as i32) };
    }
    Ok(ExchangeResult { value: cur.value, y: cur.y, trace, kkt, solves, gamma, started_from_units })
}

fn sym(y: &DMatrix<f64>) -> DMatrix<f64> {
    (y + y.transpose()) * 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisocpSolution {
    /// `+∞` when no fixing is feasible.
    pub value: f64,
    pub x: Option<Vec<f64>>,
    pub branches: usize,
    pub infeasible_branches: usize,
    /// Branches whose solve neither converged nor proved infeasibility.
    pub failed_branches: usize,
}

/// Enumerate all binary fixings and solve each continuous restriction over
/// the free variables.
pub fn misocp_bruteforce(inst: &MisocpInstance, opts: &SolverOptions) -> Result<MisocpSolution, GcppError> {
    inst.validate()?;
    let nb = inst.binary.len();
    if nb > 25 {
        return Err(GcppError::TooManyBinaries(nb));
    }
    let n = inst.n;
    let ub = inst.upper_bounds();
    let free: Vec<usize> = (0..n).filter(|i| !inst.binary.contains(i)).collect();
    let nf = free.len();
    // Rows: (x_F, x_B) ∈ Lⁿ, x_F ≥ 0, ub_F − x_F ≥ 0.
    let mut g_trip: Vec<(usize, usize, f64)> = free.iter().enumerate().map(|(k, &i)| (i, k, -1.0)).collect();
    g_trip.extend((0..nf).map(|k| (n + k, k, -1.0)));
    g_trip.extend((0..nf).map(|k| (n + nf + k, k, 1.0)));
    let gm = SparseMatrix::from_triplets(n + 2 * nf, nf, g_trip);
    let cone = ConeSpec::new(vec![Block::SecondOrder { dim: n }, Block::Nonneg { dim: 2 * nf }]);
    let cf: Vec<f64> = free.iter().map(|&i| inst.c[i]).collect();
    let mut best = MisocpSolution { value: f64::INFINITY, x: None, branches: 0, infeasible_branches: 0, failed_branches: 0 };
    for mask in 0u64..(1u64 << nb) {
        best.branches += 1;
        let mut x = vec![0.0; n];
        for (k, &i) in inst.binary.iter().enumerate() {
            x[i] = ((mask >> k) & 1) as f64;
        }
        let ones = mask.count_ones() as f64;
        let fixed_cost: f64 = inst.binary.iter().map(|&i| inst.c[i] * x[i]).sum();
        // x₁ ≥ ‖x₂..‖ ≥ √ones with x₁ ≤ ub₁.
        let cap = ub[0] * ub[0];
        if ones > cap {
            best.infeasible_branches += 1;
            continue;
        }
        let value = if ones == cap {
            x[0] = ub[0];
            fixed_cost + inst.c[0] * ub[0]
        } else {
            let mut h = x.clone();
            h.extend(std::iter::repeat_n(0.0, nf));
            h.extend(free.iter().map(|&i| ub[i]));
            let prog = BlockConicProgram::new(cf.clone(), SparseMatrix::from_triplets(0, nf, vec![]), vec![], gm.clone(), h, cone.clone())?;
            let sol = conicsolver::solve(&prog, opts)?;
            if sol.status == SolveStatus::PrimalInfeasible {
                best.infeasible_branches += 1;
                continue;
            }
            if !accepted(&sol) {
                best.failed_branches += 1;
                continue;
            }
            for (k, &i) in free.iter().enumerate() {
                x[i] = sol.x[k];
            }
            fixed_cost + sol.primal_objective
        };
        if value < best.value {
            best.value = value;
            best.x = Some(x);
        }
    }
    Ok(best)
}
