//! Reduced KKT systems of the interior-point method, solved through dense
//! normal equations.
//!
//! The system is
//!
//! ```text
//! [ 0  Aᵀ  Gᵀ    ] [dx]   [r1]
//! [ A  0   0     ] [dy] = [r2]
//! [ G  0  -P(w)  ] [dz]   [r3]
//! ```
//!
//! with `P(w)` the quadratic representation of the scaling point.

use super::sparse::SparseMatrix;
use super::BlockConicProgram;
use crate::jordan::{self, Block, ConeSpec};
use crate::linalg;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use std::f64::consts::SQRT_2;

/// Column entries of `G` restricted to one cone block.
struct BlockColumns {
    /// `(column, [(local row, value)])` for every column touching the block.
    cols: Vec<(usize, Vec<(usize, f64)>)>,
}

/// Sparsity bookkeeping computed once per program.
pub(crate) struct KktStructure {
    blocks: Vec<BlockColumns>,
    /// Row lists `(column, value)` of `G` for rows in nonnegative or second-order blocks.
    rows: Vec<Vec<(usize, f64)>>,
}

impl KktStructure {
    pub(crate) fn new(prog: &BlockConicProgram) -> Self {
        let cone = &prog.cone;
        let mut blocks = Vec::with_capacity(cone.blocks().len());
        let gt = prog.g.transpose();
        let mut block_of_row = vec![0; cone.ambient_dim()];
        for h in 0..cone.blocks().len() {
            for r in cone.range(h) {
                block_of_row[r] = h;
            }
        }
        let mut per_block: Vec<Vec<(usize, Vec<(usize, f64)>)>> = vec![Vec::new(); cone.blocks().len()];
        for j in 0..gt.rows() {
            let mut by_block: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
            for (r, v) in gt.row(j) {
                let h = block_of_row[r];
                let local = r - cone.offset(h);
                match by_block.iter_mut().find(|e| e.0 == h) {
                    Some(e) => e.1.push((local, v)),
                    None => by_block.push((h, vec![(local, v)])),
                }
            }
            for (h, entries) in by_block {
                per_block[h].push((j, entries));
            }
        }
        for cols in per_block {
            blocks.push(BlockColumns { cols });
        }
        let rows = (0..prog.g.rows()).map(|i| prog.g.row(i).collect()).collect();
        KktStructure { blocks, rows }
    }
}

/// Upper-triangle entry `(a, b)` of a PSD block with the weight used in the
/// normal-matrix assembly.
fn psd_entries(entries: &[(usize, f64)]) -> Vec<(usize, usize, f64)> {
    entries
        .iter()
        .map(|&(k, v)| {
            let (a, b) = svec_position(k);
            let w = if a == b { v / SQRT_2 } else { v };
            (a, b, w)
        })
        .collect()
}

/// `(i, j)`, `i ≤ j`, of local svec index `k`.
pub(crate) fn svec_position(k: usize) -> (usize, usize) {
    let mut j = ((((8 * k + 1) as f64).sqrt() - 1.0) / 2.0) as usize;
    while j * (j + 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * (j + 2) / 2 <= k {
        j += 1;
    }
    (k - j * (j + 1) / 2, j)
}

/// Dense `Gᵀ P(u) G` with `u` the inverse scaling point.
pub(crate) fn normal_matrix(prog: &BlockConicProgram, st: &KktStructure, w_inv: &[f64]) -> Mat<f64> {
    let n = prog.num_vars();
    let cone = &prog.cone;
    let mut h = Mat::<f64>::zeros(n, n);
    for (hb, block) in cone.blocks().iter().enumerate() {
        let o = cone.offset(hb);
        let cols = &st.blocks[hb].cols;
        if cols.is_empty() {
            continue;
        }
        match *block {
            Block::Nonneg { dim } => {
                for r in o..o + dim {
                    let wt = w_inv[r] * w_inv[r];
                    add_row_outer(&mut h, &st.rows[r], wt);
                }
            }
            Block::SecondOrder { dim } => {
                let u = &w_inv[o..o + dim];
                let det = u[0] * u[0] - linalg::dot(&u[1..], &u[1..]);
                for r in 0..dim {
                    let sign = if r == 0 { 1.0 } else { -1.0 };
                    add_row_outer(&mut h, &st.rows[o + r], -det * sign);
                }
                let v: Vec<(usize, f64)> = cols
                    .iter()
                    .map(|(j, e)| (*j, e.iter().map(|&(k, g)| g * u[k]).sum::<f64>()))
                    .collect();
                for &(i, vi) in &v {
                    for &(j, vj) in &v {
                        h[(i, j)] += 2.0 * vi * vj;
                    }
                }
            }
            Block::PsdVec { .. } => {
                let um = jordan::smat(&w_inv[cone.range(hb)]).expect("triangular block");
                let lists: Vec<(usize, Vec<(usize, usize, f64)>)> =
                    cols.iter().map(|(j, e)| (*j, psd_entries(e))).collect();
                for (p, (i, fi)) in lists.iter().enumerate() {
                    for (j, fj) in lists[p..].iter() {
                        let mut acc = 0.0;
                        for &(a, b, ga) in fi {
                            for &(c, d, gc) in fj {
                                acc += ga * gc * (um[(a, c)] * um[(b, d)] + um[(a, d)] * um[(b, c)]);
                            }
                        }
                        h[(*i, *j)] += acc;
                        if i != j {
                            h[(*j, *i)] += acc;
                        }
                    }
                }
            }
        }
    }
    h
}

fn add_row_outer(h: &mut Mat<f64>, row: &[(usize, f64)], weight: f64) {
    if weight == 0.0 {
        return;
    }
    for &(i, vi) in row {
        for &(j, vj) in row {
            h[(i, j)] += weight * vi * vj;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FactorError {
    Singular,
}

/// Factored normal equations for one scaling point.
pub(crate) struct KktFactor {
    h: faer::linalg::solvers::Llt<f64>,
    s: Option<faer::linalg::solvers::Llt<f64>>,
    /// `H⁻¹ Aᵀ`, one column per equality.
    hinv_at: Mat<f64>,
    /// Whether `AᵀA` was added to `H` to restore definiteness.
    augmented: bool,
}

fn mat_from_col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn col_to_vec(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn add_ata(h: &mut Mat<f64>, a: &SparseMatrix) {
    for i in 0..a.rows() {
        let row: Vec<(usize, f64)> = a.row(i).collect();
        add_row_outer(h, &row, 1.0);
    }
}

fn try_factor(mut h: Mat<f64>) -> Result<faer::linalg::solvers::Llt<f64>, FactorError> {
    let n = h.nrows();
    if let Ok(f) = h.llt(Side::Lower) {
        return Ok(f);
    }
    let scale = (0..n).fold(0.0f64, |m, i| m.max(h[(i, i)].abs())).max(1.0);
    let mut delta = 1e-12 * scale;
    for _ in 0..6 {
        for i in 0..n {
            h[(i, i)] += delta;
        }
        if let Ok(f) = h.llt(Side::Lower) {
            return Ok(f);
        }
        delta *= 100.0;
    }
    Err(FactorError::Singular)
}

impl KktFactor {
    pub(crate) fn new(prog: &BlockConicProgram, st: &KktStructure, w_inv: &[f64]) -> Result<Self, FactorError> {
        let h0 = normal_matrix(prog, st, w_inv);
        let (hf, augmented) = match h0.llt(Side::Lower) {
            Ok(f) => (f, false),
            Err(_) => {
                let mut h1 = h0.clone();
                add_ata(&mut h1, &prog.a);
                (try_factor(h1)?, true)
            }
        };
        let n = prog.num_vars();
        let m = prog.a.rows();
        let mut at = Mat::<f64>::zeros(n, m);
        for (i, j, v) in prog.a.triplets() {
            at[(j, i)] = v;
        }
        let hinv_at = if m > 0 { hf.solve(&at) } else { at };
        let s = if m > 0 {
            let mut s = Mat::<f64>::zeros(m, m);
            for i in 0..m {
                for (k, v) in prog.a.row(i) {
                    for j in 0..m {
                        s[(i, j)] += v * hinv_at[(k, j)];
                    }
                }
            }
            for i in 0..m {
                for j in 0..i {
                    let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                    s[(i, j)] = avg;
                    s[(j, i)] = avg;
                }
            }
            Some(try_factor(s)?)
        } else {
            None
        };
        Ok(KktFactor { h: hf, s, hinv_at, augmented })
    }

    fn solve_once(
        &self,
        prog: &BlockConicProgram,
        w_inv: &[f64],
        r1: &[f64],
        r2: &[f64],
        r3: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let cone = &prog.cone;
        let pr3 = jordan::quadratic_representation(cone, w_inv, r3).expect("dimensions checked");
        let mut rt = r1.to_vec();
        prog.g.mul_t_vec_add(1.0, &pr3, &mut rt);
        if self.augmented {
            prog.a.mul_t_vec_add(1.0, r2, &mut rt);
        }
        let hinv_rt = col_to_vec(&self.h.solve(&mat_from_col(&rt)));
        let m = prog.a.rows();
        let dy = match &self.s {
            Some(s) => {
                let mut rhs = prog.a.mul_vec(&hinv_rt);
                for i in 0..m {
                    rhs[i] -= r2[i];
                }
                col_to_vec(&s.solve(&mat_from_col(&rhs)))
            }
            None => vec![],
        };
        let mut dx = hinv_rt;
        for (j, &dyj) in dy.iter().enumerate() {
            for (i, dxi) in dx.iter_mut().enumerate() {
                *dxi -= self.hinv_at[(i, j)] * dyj;
            }
        }
        let mut gdx = prog.g.mul_vec(&dx);
        for (g, r) in gdx.iter_mut().zip(r3) {
            *g -= r;
        }
        let dz = jordan::quadratic_representation(cone, w_inv, &gdx).expect("dimensions checked");
        (dx, dy, dz)
    }

    /// Solve with up to `refine` rounds of iterative refinement on the full system.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn solve(
        &self,
        prog: &BlockConicProgram,
        w: &[f64],
        w_inv: &[f64],
        r1: &[f64],
        r2: &[f64],
        r3: &[f64],
        refine: usize,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut dx, mut dy, mut dz) = self.solve_once(prog, w_inv, r1, r2, r3);
        let rhs_norm = linalg::norm_inf(r1).max(linalg::norm_inf(r2)).max(linalg::norm_inf(r3)).max(1e-300);
        for _ in 0..refine {
            let (e1, e2, e3) = apply_kkt(prog, w, &dx, &dy, &dz);
            let res1: Vec<f64> = r1.iter().zip(&e1).map(|(a, b)| a - b).collect();
            let res2: Vec<f64> = r2.iter().zip(&e2).map(|(a, b)| a - b).collect();
            let res3: Vec<f64> = r3.iter().zip(&e3).map(|(a, b)| a - b).collect();
            let err = linalg::norm_inf(&res1).max(linalg::norm_inf(&res2)).max(linalg::norm_inf(&res3));
            if err <= 1e-14 * rhs_norm {
                break;
            }
            let (cx, cy, cz) = self.solve_once(prog, w_inv, &res1, &res2, &res3);
            linalg::axpy(1.0, &cx, &mut dx);
            linalg::axpy(1.0, &cy, &mut dy);
            linalg::axpy(1.0, &cz, &mut dz);
        }
        (dx, dy, dz)
    }
}

/// Multiply by the reduced KKT matrix.
pub(crate) fn apply_kkt(
    prog: &BlockConicProgram,
    w: &[f64],
    dx: &[f64],
    dy: &[f64],
    dz: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut e1 = prog.a.mul_t_vec(dy);
    prog.g.mul_t_vec_add(1.0, dz, &mut e1);
    let e2 = prog.a.mul_vec(dx);
    let mut e3 = prog.g.mul_vec(dx);
    let pz = jordan::quadratic_representation(&prog.cone, w, dz).expect("dimensions checked");
    linalg::axpy(-1.0, &pz, &mut e3);
    (e1, e2, e3)
}

/// Scaling point with all derived quantities needed for one Newton step.
pub(crate) struct Scaling {
    pub w: Vec<f64>,
    pub w_inv: Vec<f64>,
    pub w_sqrt: Vec<f64>,
    pub w_inv_sqrt: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl Scaling {
    /// Nesterov–Todd point `w` with `P(w) z = s`, for `s`, `z` interior.
    pub(crate) fn new(cone: &ConeSpec, s: &[f64], z: &[f64]) -> Option<Self> {
        let s_half = jordan::spectral_map(cone, s, |l| l.max(0.0).sqrt()).ok()?;
        let t = jordan::quadratic_representation(cone, &s_half, z).ok()?;
        let t_inv_half = jordan::spectral_map(cone, &t, |l| 1.0 / l.sqrt()).ok()?;
        let w = jordan::quadratic_representation(cone, &s_half, &t_inv_half).ok()?;
        if w.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let w_sqrt = jordan::spectral_map(cone, &w, |l| l.sqrt()).ok()?;
        let w_inv = jordan::spectral_map(cone, &w, |l| 1.0 / l).ok()?;
        let w_inv_sqrt = jordan::spectral_map(cone, &w, |l| 1.0 / l.sqrt()).ok()?;
        let lambda = jordan::quadratic_representation(cone, &w_sqrt, z).ok()?;
        let all = [&w_sqrt, &w_inv, &w_inv_sqrt, &lambda];
        if all.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return None;
        }
        Some(Scaling { w, w_inv, w_sqrt, w_inv_sqrt, lambda })
    }
}
