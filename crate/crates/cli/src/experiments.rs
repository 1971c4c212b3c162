//! Instance generation and the reproduction experiments.

use gdnn_core::bdsep::{self, CaseMinima};
use gdnn_core::conicsolver::{self, BlockConicProgram, SparseMatrix};
use gdnn_core::gcpp::{self, ExchangeParams, MisocpInstance, RelaxationOptions, Variant};
use gdnn_core::gdnn;
use gdnn_core::jordan::{Block, ConeSpec};
use gdnn_core::linalg;
use gdnn_core::polymoment::{enumerate_monomials, MomentVector, MultiIndex};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("n = {0} is too small (need n ≥ 3)")]
    TooSmall(usize),
    #[error("moment matrix is not PSD")]
    Rejected { lambda_min: Option<f64> },
    #[error("tied entries disagree for monomial class {0:?}")]
    TieMismatch(Vec<u32>),
    #[error("no accepted sample within {0} attempts")]
    Exhausted(u64),
    #[error(transparent)]
    Gdnn(#[from] gdnn::GdnnError),
    #[error(transparent)]
    Separation(#[from] bdsep::BdsepError),
    #[error(transparent)]
    Poly(#[from] gdnn_core::polymoment::PolyError),
    #[error(transparent)]
    Program(#[from] conicsolver::SolverError),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<R> {
    pub experiment: String,
    pub seed: u64,
    pub records: Vec<R>,
    pub summary: serde_json::Value,
    pub version: &'static str,
}

/// Random instance: `round(0.4 n)` binaries drawn from indices `1..n`, `c`
/// i.i.d. standard normal.
pub fn generate_instance(n: usize, seed: u64) -> Result<MisocpInstance, ExperimentError> {
    if n < 3 {
        return Err(ExperimentError::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = (0.4 * n as f64).round() as usize;
    let mut binary: Vec<usize> = rand::seq::index::sample(&mut rng, n - 1, nb).into_iter().map(|i| i + 1).collect();
    binary.sort_unstable();
    let c = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Ok(MisocpInstance { n, c, binary, seed: Some(seed) })
}

/// Quadratic basis of the 10×10 moment matrix:
/// `x₁², x₂², x₃², x₄², x₁x₂, x₁x₃, x₁x₄, x₂x₃, x₂x₄, x₃x₄`.
pub const M44_BASIS: [(usize, usize); 10] =
    [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// One-based `(target, source)` assignments `M(target) = M(source)`, in order.
pub const M44_TIES: [((usize, usize), (usize, usize)); 40] = [
    ((1, 2), (5, 5)),
    ((2, 1), (5, 5)),
    ((1, 3), (6, 6)),
    ((3, 1), (6, 6)),
    ((1, 4), (7, 7)),
    ((4, 1), (7, 7)),
    ((1, 8), (5, 6)),
    ((8, 1), (6, 5)),
    ((1, 9), (5, 7)),
    ((9, 1), (7, 5)),
    ((1, 10), (6, 7)),
    ((10, 1), (7, 6)),
    ((2, 3), (8, 8)),
    ((3, 2), (8, 8)),
    ((2, 4), (9, 9)),
    ((4, 2), (9, 9)),
    ((2, 6), (5, 8)),
    ((6, 2), (8, 5)),
    ((2, 7), (5, 9)),
    ((7, 2), (9, 5)),
    ((2, 10), (8, 9)),
    ((10, 2), (9, 8)),
    ((3, 4), (10, 10)),
    ((4, 3), (10, 10)),
    ((3, 5), (6, 8)),
    ((5, 3), (8, 6)),
    ((3, 7), (6, 10)),
    ((7, 3), (10, 6)),
    ((3, 9), (8, 10)),
    ((9, 3), (10, 8)),
    ((4, 5), (7, 9)),
    ((5, 4), (9, 7)),
    ((4, 6), (7, 10)),
    ((6, 4), (10, 7)),
    ((4, 8), (9, 10)),
    ((8, 4), (10, 9)),
    ((5, 10), (7, 8)),
    ((6, 9), (7, 8)),
    ((10, 5), (8, 7)),
    ((9, 6), (8, 7)),
];

fn basis_monomial(k: usize) -> MultiIndex {
    let (a, b) = M44_BASIS[k];
    MultiIndex::from_vars(4, &[a, b])
}

/// Entry classes `{(i, j) : α_i + α_j = β}` of the 10×10 moment matrix, keyed by `β`.
pub fn m44_classes() -> BTreeMap<Vec<u32>, Vec<(usize, usize)>> {
    let mut classes: BTreeMap<Vec<u32>, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..10 {
        for j in 0..10 {
            classes.entry(basis_monomial(i).add(&basis_monomial(j)).0).or_default().push((i, j));
        }
    }
    classes
}

pub fn apply_m44_ties(m: &mut DMatrix<f64>) {
    for ((ti, tj), (si, sj)) in M44_TIES {
        m[(ti - 1, tj - 1)] = m[(si - 1, sj - 1)];
    }
}

/// Every class of `m` holds one value exactly; otherwise the first class that does not.
pub fn check_m44_ties(m: &DMatrix<f64>) -> Result<(), ExperimentError> {
    for (beta, entries) in m44_classes() {
        let (i0, j0) = entries[0];
        if entries.iter().any(|&(i, j)| m[(i, j)] != m[(i0, j0)]) {
            return Err(ExperimentError::TieMismatch(beta));
        }
    }
    Ok(())
}

/// `(i, j, k)` with `M(i, j)` tied to `M(k, k)` for squares `xᵢ², xⱼ²` and `k = xᵢxⱼ`.
const SQUARE_PAIRS: [(usize, usize, usize); 6] = [(0, 1, 4), (0, 2, 5), (0, 3, 6), (1, 2, 7), (1, 3, 8), (2, 3, 9)];

/// `M = G Gᵀ` with `G` 10×10 standard normal, tied. Rows of `G` are drawn in
/// the order the 2×2 minors on [`SQUARE_PAIRS`] need them; with `early` set,
/// a failing minor returns `None` before the remaining rows are drawn.
fn draw_tied<R: Rng + ?Sized>(rng: &mut R, early: bool) -> Option<DMatrix<f64>> {
    let mut g = [[0.0f64; 10]; 10];
    let mut drawn = [false; 10];
    let mut sq = [0.0f64; 10];
    let mut draw = |r: usize, g: &mut [[f64; 10]; 10], sq: &mut [f64; 10]| {
        if !drawn[r] {
            for v in g[r].iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            sq[r] = g[r].iter().map(|v| v * v).sum();
            drawn[r] = true;
        }
    };
    for (i, j, k) in SQUARE_PAIRS {
        for r in [i, j, k] {
            draw(r, &mut g, &mut sq);
        }
        if early && sq[i] * sq[j] < sq[k] * sq[k] {
            return None;
        }
    }
    let mut m = DMatrix::from_fn(10, 10, |i, j| (0..10).map(|t| g[i][t] * g[j][t]).sum());
    apply_m44_ties(&mut m);
    Some(m)
}

fn accept_m44(m: &DMatrix<f64>) -> Result<MomentVector, ExperimentError> {
    check_m44_ties(m)?;
    let shift = 1e-9 * m.trace();
    let shifted = m + DMatrix::<f64>::identity(10, 10) * shift;
    if shifted.cholesky().is_none() {
        let lambda_min = linalg::min_eigenvalue(m).unwrap_or(f64::NEG_INFINITY);
        if lambda_min < -shift {
            return Err(ExperimentError::Rejected { lambda_min: Some(lambda_min) });
        }
    }
    let basis = enumerate_monomials(4, 4)?;
    let classes = m44_classes();
    let y = basis
        .monomials()
        .iter()
        .map(|alpha| {
            let (i, j) = classes[&alpha.0][0];
            m[(i, j)]
        })
        .collect();
    Ok(MomentVector { n: 4, degree: 4, y })
}

/// One draw from `rng`: accepted iff the tied matrix has
/// `λ_min ≥ −1e-9·trace`, then read off as a degree-4 moment vector in 4
/// variables.
pub fn sample_m44<R: Rng + ?Sized>(rng: &mut R) -> Result<MomentVector, ExperimentError> {
    match draw_tied(rng, true) {
        Some(m) => accept_m44(&m),
        None => Err(ExperimentError::Rejected { lambda_min: None }),
    }
}

/// Like [`sample_m44`] with a fresh generator, always forming the full matrix.
pub fn generate_m44_vector(seed: u64) -> Result<MomentVector, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    accept_m44(&draw_tied(&mut rng, false).expect("full draw"))
}

/// `R₊¹ × L³`.
pub fn fig1_cone() -> ConeSpec {
    ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::SecondOrder { dim: 3 }])
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig1Record {
    /// One-based draw index in the stream.
    pub attempt: u64,
    /// `λ_min(C₀(y))`.
    pub min_eigenvalue: f64,
    #[serde(flatten)]
    pub cases: CaseMinima,
}

/// TRS values of `C₀(y)` on `R₊¹ × L³` for the first `count` accepted draws
/// of one generator stream.
pub fn run_fig1(count: usize, seed: u64) -> Result<ExperimentReport<Fig1Record>, ExperimentError> {
    let spec = fig1_cone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    let mut attempts = 0u64;
    let limit = (count as u64).saturating_mul(10_000_000).max(10_000_000);
    while records.len() < count {
        if attempts >= limit {
            return Err(ExperimentError::Exhausted(limit));
        }
        attempts += 1;
        let y = match sample_m44(&mut rng) {
            Ok(y) => y,
            Err(ExperimentError::Rejected { .. }) => continue,
            Err(e) => return Err(e),
        };
        let x = gdnn::nn_c0(&spec, &y)?;
        records.push(Fig1Record { attempt: attempts, cases: bdsep::case_minima(&spec, &x)?, min_eigenvalue: linalg::min_eigenvalue(&x).unwrap_or(f64::NAN) });
    }
    let mut trs: Vec<f64> = records.iter().filter_map(|r| r.cases.soc_soc_trs).collect();
    trs.sort_by(f64::total_cmp);
    let others = |r: &Fig1Record| {
        [r.cases.nno_nno, r.cases.nno_soc, r.cases.soc_nno, r.cases.soc_soc_linear].into_iter().flatten().fold(f64::INFINITY, f64::min)
    };
    let summary = serde_json::json!({
        "count": records.len(),
        "attempts": attempts,
        "acceptance_rate": records.len() as f64 / attempts as f64,
        "trs_min": trs.first(),
        "trs_median": trs.get(trs.len() / 2),
        "trs_max": trs.last(),
        "trs_negative": trs.iter().filter(|&&v| v < -1e-6).count(),
        "other_cases_min": records.iter().map(others).fold(f64::INFINITY, f64::min),
        "other_cases_negative": records.iter().filter(|r| others(r) < 0.0).count(),
    });
    Ok(ExperimentReport { experiment: "fig1".into(), seed, records, summary, version: VERSION })
}

/// Accepted draws of [`sample_m44`] among `count` from one stream.
pub fn m44_accepted(count: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).filter(|_| sample_m44(&mut rng).is_ok()).count() as u64
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// Size cap exceeded; reported as `OOM`.
    Oom,
    NotRun,
    Failed(String),
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Cell {
    pub value: Option<f64>,
    pub time: Option<f64>,
    pub status: CellStatus,
    pub kkt: Option<f64>,
}

impl Cell {
    fn empty(status: CellStatus) -> Cell {
        Cell { value: None, time: None, status, kkt: None }
    }

    fn csv_value(&self) -> String {
        match (&self.status, self.value) {
            (CellStatus::Ok, Some(v)) => format!("{v:.6}"),
            (CellStatus::Oom, _) => "OOM".into(),
            (CellStatus::NotRun, _) => "-".into(),
            _ => "fail".into(),
        }
    }

    fn csv_time(&self) -> String {
        match self.time {
            Some(t) if self.status == CellStatus::Ok => format!("{t:.3}"),
            _ => "-".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub no: usize,
    pub seed: u64,
    pub misocp: Cell,
    pub nn: Cell,
    pub zvp: Cell,
    pub bd: Cell,
    pub sdp: Cell,
}

impl TableRow {
    pub fn cell(&self, v: Variant) -> &Cell {
        match v {
            Variant::Nn => &self.nn,
            Variant::Zvp => &self.zvp,
            Variant::Bd => &self.bd,
            Variant::Sdp => &self.sdp,
        }
    }

    fn value(&self, v: Variant) -> Option<f64> {
        let c = self.cell(v);
        (c.status == CellStatus::Ok).then_some(c.value).flatten()
    }

    /// Broken orderings among the solved cells, with slack `1e-5·(1 + |MISOCP|)`.
    pub fn sandwich_violations(&self) -> Vec<String> {
        let mi = (self.misocp.status == CellStatus::Ok).then_some(self.misocp.value).flatten();
        let tol = 1e-5 * (1.0 + mi.unwrap_or(0.0).abs());
        let named = |v: Variant| (format!("{v:?}").to_lowercase(), self.value(v));
        let pairs = [
            (named(Variant::Sdp), named(Variant::Zvp)),
            (named(Variant::Sdp), named(Variant::Bd)),
            (named(Variant::Zvp), named(Variant::Nn)),
            (named(Variant::Zvp), ("misocp".into(), mi)),
            (named(Variant::Nn), ("misocp".into(), mi)),
            (named(Variant::Bd), ("misocp".into(), mi)),
        ];
        pairs
            .into_iter()
            .filter_map(|((la, a), (lb, b))| match (a, b) {
                (Some(a), Some(b)) if a > b + tol => Some(format!("{la} {a:.6} > {lb} {b:.6}")),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TableConfig {
    pub ns: Vec<usize>,
    pub instances: usize,
    pub variants: Vec<Variant>,
    pub nn_cap: usize,
    pub cap: usize,
    pub seed: u64,
    pub workers: usize,
    pub relaxation: RelaxationOptions,
    pub exchange: ExchangeParams,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            ns: vec![5, 10],
            instances: 5,
            variants: vec![Variant::Nn, Variant::Zvp, Variant::Bd, Variant::Sdp],
            nn_cap: 5,
            cap: 30,
            seed: 0,
            workers: 1,
            relaxation: RelaxationOptions::default(),
            exchange: ExchangeParams::default(),
        }
    }
}

/// Seed of instance `no` at size `n`.
pub fn instance_seed(base: u64, n: usize, no: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add((n * 1000 + no) as u64)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn run_row(cfg: &TableConfig, n: usize, no: usize) -> TableRow {
    let seed = instance_seed(cfg.seed, n, no);
    let failed = |e: &dyn std::fmt::Display| Cell::empty(CellStatus::Failed(e.to_string()));
    let mut row = TableRow {
        n,
        no,
        seed,
        misocp: Cell::empty(CellStatus::NotRun),
        nn: Cell::empty(CellStatus::NotRun),
        zvp: Cell::empty(CellStatus::NotRun),
        bd: Cell::empty(CellStatus::NotRun),
        sdp: Cell::empty(CellStatus::NotRun),
    };
    let inst = match generate_instance(n, seed) {
        Ok(i) => i,
        Err(e) => {
            row.misocp = failed(&e);
            return row;
        }
    };
    let (mi, t) = timed(|| gcpp::misocp_bruteforce(&inst, &cfg.relaxation.solver));
    row.misocp = match mi {
        Ok(s) if s.failed_branches == 0 => Cell { value: Some(s.value), time: Some(t), status: CellStatus::Ok, kkt: None },
        Ok(s) => failed(&format!("{} branch solves failed", s.failed_branches)),
        Err(e) => failed(&e),
    };
    let g = match gcpp::burer_reformulate(&inst) {
        Ok(g) => g,
        Err(e) => {
            row.sdp = failed(&e);
            return row;
        }
    };
    for &v in &cfg.variants {
        let cap = if v == Variant::Nn { cfg.nn_cap } else { cfg.cap };
        let cell = if n > cap {
            Cell::empty(CellStatus::Oom)
        } else if v == Variant::Bd {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (r, t) = timed(|| gcpp::solve_bd_exchange(&g, &cfg.exchange, &mut rng));
            match r {
                Ok(r) => Cell { value: Some(r.value), time: Some(t), status: CellStatus::Ok, kkt: Some(r.kkt) },
                Err(e) => failed(&e),
            }
        } else {
            let (r, t) = timed(|| gcpp::solve_relaxation(&g, v, &cfg.relaxation));
            match r {
                Ok(r) => Cell { value: Some(r.value), time: Some(t), status: CellStatus::Ok, kkt: Some(r.kkt) },
                Err(gcpp::GcppError::Gdnn(gdnn::GdnnError::LevelTooLarge { .. })) => Cell::empty(CellStatus::Oom),
                Err(e) => failed(&e),
            }
        };
        match v {
            Variant::Nn => row.nn = cell,
            Variant::Zvp => row.zvp = cell,
            Variant::Bd => row.bd = cell,
            Variant::Sdp => row.sdp = cell,
        }
    }
    row
}

/// Solve every `(n, no)` instance; rows are sorted by `(n, no)`.
pub fn run_tables(cfg: &TableConfig) -> ExperimentReport<TableRow> {
    let jobs: Vec<(usize, usize)> = cfg.ns.iter().flat_map(|&n| (0..cfg.instances).map(move |no| (n, no))).collect();
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, no)) = jobs.get(k) else { break };
                let row = run_row(cfg, n, no);
                rows.lock().expect("no poisoned workers").push(row);
            });
        }
    });
    let mut rows = rows.into_inner().expect("no poisoned workers");
    rows.sort_by_key(|r| (r.n, r.no));

    let violations: Vec<String> = rows
        .iter()
        .flat_map(|r| r.sandwich_violations().into_iter().map(move |v| format!("n={} no={}: {v}", r.n, r.no)))
        .collect();
    let both = |a: Variant, b: Variant| rows.iter().filter_map(move |r| Some((r.value(a)?, r.value(b)?)));
    let bd_le_nn = both(Variant::Bd, Variant::Nn).filter(|(bd, nn)| *bd <= nn + 1e-5 * (1.0 + nn.abs())).count();
    let bd_nn = both(Variant::Bd, Variant::Nn).count();
    let tight = |v: Variant| {
        let pairs: Vec<(f64, f64)> =
            rows.iter().filter_map(|r| Some((r.value(v)?, (r.misocp.status == CellStatus::Ok).then_some(r.misocp.value?)?))).collect();
        let k = pairs.iter().filter(|(a, m)| (a - m).abs() <= 1e-5 * (1.0 + m.abs())).count();
        serde_json::json!({ "tight": k, "of": pairs.len() })
    };
    let max_kkt = rows
        .iter()
        .flat_map(|r| [&r.nn, &r.zvp, &r.bd, &r.sdp])
        .filter_map(|c| c.kkt)
        .fold(0.0f64, f64::max);
    let failures = rows
        .iter()
        .flat_map(|r| [&r.misocp, &r.nn, &r.zvp, &r.bd, &r.sdp])
        .filter(|c| matches!(c.status, CellStatus::Failed(_)))
        .count();
    let summary = serde_json::json!({
        "rows": rows.len(),
        "sandwich_violations": violations,
        "bd_le_nn": { "holds": bd_le_nn, "of": bd_nn },
        "zvp_tight": tight(Variant::Zvp),
        "bd_tight": tight(Variant::Bd),
        "max_kkt": max_kkt,
        "failed_cells": failures,
    });
    ExperimentReport { experiment: "tables".into(), seed: cfg.seed, records: rows, summary, version: VERSION }
}

/// Columns `n, no` then `{misocp, nn, zvp, bd, sdp} × {value, time}`.
pub fn tables_csv(rows: &[TableRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n".to_string(), "no".to_string()];
    for name in ["misocp", "nn", "zvp", "bd", "sdp"] {
        header.push(format!("{name}_value"));
        header.push(format!("{name}_time"));
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), (r.no + 1).to_string()];
        for c in [&r.misocp, &r.nn, &r.zvp, &r.bd, &r.sdp] {
            rec.push(c.csv_value());
            rec.push(c.csv_time());
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagonalCheck {
    pub dim: usize,
    /// Optimum fixed by construction through complementary slackness.
    pub known: f64,
    pub lp: f64,
    pub sdp: f64,
}

/// Random LPs with a planted optimal pair, each also solved as the SDP over
/// diagonal-only data.
pub fn diagonal_sdp_vs_lp(count: usize, seed: u64) -> Result<Vec<DiagonalCheck>, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = conicsolver::SolverOptions::default();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let d = rng.random_range(2..=7usize);
        let m = rng.random_range(1..d);
        let a = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let support: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let x: Vec<f64> = support.iter().map(|&s| if s { rng.random_range(0.5..2.0) } else { 0.0 }).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let s: Vec<f64> = support.iter().map(|&s| if s { 0.0 } else { rng.random_range(0.5..2.0) }).collect();
        let b: Vec<f64> = (0..m).map(|i| (0..d).map(|j| a[(i, j)] * x[j]).sum()).collect();
        let c: Vec<f64> = (0..d).map(|j| (0..m).map(|i| a[(i, j)] * y[i]).sum::<f64>() + s[j]).collect();
        let known: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();

        let lp_a = SparseMatrix::from_triplets(m, d, (0..m).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])));
        let lp = BlockConicProgram::standard(ConeSpec::nonneg(d), 0, c.clone(), lp_a, b.clone())?;
        let lp = conicsolver::solve(&lp, &opts)?;

        let sd = d * (d + 1) / 2;
        let diag = |j: usize| j * (j + 1) / 2 + j;
        let mut sc = vec![0.0; sd];
        for j in 0..d {
            sc[diag(j)] = c[j];
        }
        let sdp_a = SparseMatrix::from_triplets(m, sd, (0..m).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| (i, diag(j), a[(i, j)])));
        let sdp = BlockConicProgram::standard(ConeSpec::psd(d), 0, sc, sdp_a, b)?;
        let sdp = conicsolver::solve(&sdp, &opts)?;
        let value = |s: &conicsolver::Solution| if s.is_near_optimal(1e-6) { s.primal_objective } else { f64::NAN };
        out.push(DiagonalCheck { dim: d, known, lp: value(&lp), sdp: value(&sdp) });
    }
    Ok(out)
}
