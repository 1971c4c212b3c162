//! Phase-I feasibility for conic systems `A x = b, h − G x ∈ K`.

use super::{solve, BlockConicProgram, SolveStatus, SolverError, SolverOptions, SparseMatrix};
use crate::jordan::{self, Block, ConeSpec};
use serde::{Deserialize, Serialize};

/// The system `A x = b`, `h − G x ∈ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySystem {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub g: SparseMatrix,
    pub h: Vec<f64>,
    pub cone: ConeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibilityOutcome {
    /// `x` with `h − G x − t e ∈ K`; `margin` is the optimal shift `t`.
    Feasible { x: Vec<f64>, margin: f64 },
    /// Dual witness: `y`, `z ∈ K` with `Aᵀy + Gᵀz = 0` up to solver accuracy and
    /// `bᵀy + hᵀz < 0`.
    Infeasible { y: Vec<f64>, z: Vec<f64>, margin: f64 },
    Indeterminate { status: SolveStatus },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }
}

/// Solve `max t` subject to `A x = b`, `h − G x − t e ∈ K`, `t ≤ 1`, and
/// declare the system feasible when `t* ≥ −eps`.
pub fn solve_feasibility(
    sys: &FeasibilitySystem,
    eps: f64,
    opts: &SolverOptions,
) -> Result<FeasibilityOutcome, SolverError> {
    let n = sys.g.cols();
    let k = sys.cone.ambient_dim();
    if sys.a.cols() != n {
        return Err(SolverError::InvalidProgram(format!("A has {} columns, G has {n}", sys.a.cols())));
    }
    let e = jordan::identity(&sys.cone);
    let mut g_trip: Vec<(usize, usize, f64)> = sys.g.triplets().collect();
    g_trip.extend(e.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, n, *v)));
    g_trip.push((k, n, 1.0));
    let g = SparseMatrix::from_triplets(k + 1, n + 1, g_trip);
    let a = SparseMatrix::from_triplets(sys.a.rows(), n + 1, sys.a.triplets());
    let mut h = sys.h.clone();
    h.push(1.0);
    let mut blocks = sys.cone.blocks().to_vec();
    blocks.push(Block::Nonneg { dim: 1 });
    let cone = ConeSpec::new(blocks);
    let mut c = vec![0.0; n + 1];
    c[n] = -1.0;
    let prog = BlockConicProgram::new(c, a, sys.b.clone(), g, h, cone)?;
    let sol = solve(&prog, opts)?;
    Ok(match sol.status {
        SolveStatus::PrimalInfeasible => {
            FeasibilityOutcome::Infeasible { y: sol.y, z: sol.z[..k].to_vec(), margin: f64::NEG_INFINITY }
        }
        _ if sol.is_near_optimal(1e-6) => {
            let t = sol.x[n];
            if t >= -eps {
                FeasibilityOutcome::Feasible { x: sol.x[..n].to_vec(), margin: t }
            } else {
                FeasibilityOutcome::Infeasible { y: sol.y, z: sol.z[..k].to_vec(), margin: t }
            }
        }
        status => FeasibilityOutcome::Indeterminate { status },
    })
}
