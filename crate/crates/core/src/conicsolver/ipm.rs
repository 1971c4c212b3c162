//! Homogeneous self-dual interior-point iterations.

use super::kkt::{KktFactor, KktStructure, Scaling};
use super::presolve::{reduce_rows, RowReduction};
use super::{BlockConicProgram, IterationRecord, Solution, SolveStatus, SolverError, SolverOptions};
use crate::jordan::{self, ConeSpec};
use crate::linalg::{axpy, dot, norm2};

const STEP_FRACTION: f64 = 0.99;

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    rt: f64,
}

/// Solve `prog`; deterministic for identical inputs and options.
pub fn solve(prog: &BlockConicProgram, opts: &SolverOptions) -> Result<Solution, SolverError> {
    prog.validate()?;
    if !opts.presolve || prog.a.rows() == 0 {
        return Ok(solve_reduced(prog, opts));
    }
    match reduce_rows(&prog.a, &prog.b) {
        RowReduction::Independent(keep) if keep.len() == prog.a.rows() => Ok(solve_reduced(prog, opts)),
        RowReduction::Independent(keep) => {
            let reduced = BlockConicProgram {
                c: prog.c.clone(),
                a: prog.a.select_rows(&keep),
                b: keep.iter().map(|&i| prog.b[i]).collect(),
                g: prog.g.clone(),
                h: prog.h.clone(),
                cone: prog.cone.clone(),
            };
            let mut sol = solve_reduced(&reduced, opts);
            let mut y = vec![0.0; prog.a.rows()];
            for (k, &i) in keep.iter().enumerate() {
                y[i] = sol.y[k];
            }
            sol.y = y;
            Ok(sol)
        }
        RowReduction::Inconsistent(y) => Ok(Solution {
            status: SolveStatus::PrimalInfeasible,
            x: vec![0.0; prog.num_vars()],
            s: vec![0.0; prog.h.len()],
            y,
            z: vec![0.0; prog.h.len()],
            primal_objective: f64::INFINITY,
            dual_objective: f64::INFINITY,
            gap: f64::NAN,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            iterations: 0,
            history: vec![],
        }),
    }
}

fn residuals(prog: &BlockConicProgram, it: &Iterate) -> Residuals {
    let mut rx = prog.a.mul_t_vec(&it.y);
    prog.g.mul_t_vec_add(1.0, &it.z, &mut rx);
    axpy(it.tau, &prog.c, &mut rx);
    let mut ry = prog.a.mul_vec(&it.x);
    axpy(-it.tau, &prog.b, &mut ry);
    let mut rz = prog.g.mul_vec(&it.x);
    axpy(1.0, &it.s, &mut rz);
    axpy(-it.tau, &prog.h, &mut rz);
    let rt = it.kappa + dot(&prog.c, &it.x) + dot(&prog.b, &it.y) + dot(&prog.h, &it.z);
    Residuals { rx, ry, rz, rt }
}

/// Shift `v` by `(1 + t) e` with `t = −λ_min(v)` unless it is already well inside the cone.
fn shift_into_cone(cone: &ConeSpec, v: &mut [f64]) {
    let lmin = jordan::min_eigenvalue(cone, v).unwrap_or(f64::NEG_INFINITY);
    let lmin = if lmin.is_finite() { lmin } else { -1.0 };
    let t = -lmin;
    if t >= -1e-8 * norm2(v).max(1.0) {
        let e = jordan::identity(cone);
        axpy(1.0 + t, &e, v);
    }
}

fn max_step_all(cone: &ConeSpec, it: &Iterate, d: &Direction) -> f64 {
    let mut a = jordan::max_step(cone, &it.s, &d.s, f64::INFINITY).unwrap_or(0.0);
    a = a.min(jordan::max_step(cone, &it.z, &d.z, f64::INFINITY).unwrap_or(0.0));
    if d.tau < 0.0 {
        a = a.min(-it.tau / d.tau);
    }
    if d.kappa < 0.0 {
        a = a.min(-it.kappa / d.kappa);
    }
    a
}

struct Norms {
    c: f64,
    b: f64,
    h: f64,
}

fn failed(prog: &BlockConicProgram, status: SolveStatus, history: Vec<IterationRecord>) -> Solution {
    Solution {
        status,
        x: vec![0.0; prog.num_vars()],
        s: vec![0.0; prog.h.len()],
        y: vec![0.0; prog.b.len()],
        z: vec![0.0; prog.h.len()],
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations: history.len(),
        history,
    }
}

fn solve_reduced(prog: &BlockConicProgram, opts: &SolverOptions) -> Solution {
    let cone = &prog.cone;
    let deg = cone.degree() as f64;
    let st = KktStructure::new(prog);
    let norms = Norms { c: norm2(&prog.c).max(1.0), b: norm2(&prog.b).max(1.0), h: norm2(&prog.h).max(1.0) };
    let e = jordan::identity(cone);

    let Ok(f0) = KktFactor::new(prog, &st, &e) else {
        return failed(prog, SolveStatus::Numerical, vec![]);
    };
    let m = prog.b.len();
    let zeros_h = vec![0.0; prog.h.len()];
    let neg_c: Vec<f64> = prog.c.iter().map(|v| -v).collect();
    let (x0, _, zp) = f0.solve(prog, &e, &e, &vec![0.0; prog.num_vars()], &prog.b, &prog.h, opts.refinement);
    let mut s0: Vec<f64> = zp.iter().map(|v| -v).collect();
    let (_, y0, mut z0) = f0.solve(prog, &e, &e, &neg_c, &vec![0.0; m], &zeros_h, opts.refinement);
    shift_into_cone(cone, &mut s0);
    shift_into_cone(cone, &mut z0);
    let mut it = Iterate { x: x0, y: y0, z: z0, s: s0, tau: 1.0, kappa: 1.0 };

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut best: Option<(f64, Solution)> = None;

    for iter in 0..=opts.max_iter {
        let r = residuals(prog, &it);
        let sz = dot(&it.s, &it.z);
        let mu = (sz + it.tau * it.kappa) / (deg + 1.0);
        let pcost = dot(&prog.c, &it.x) / it.tau;
        let dcost = -(dot(&prog.b, &it.y) + dot(&prog.h, &it.z)) / it.tau;
        let pres = (norm2(&r.ry) / norms.b).max(norm2(&r.rz) / norms.h) / it.tau;
        let dres = norm2(&r.rx) / norms.c / it.tau;
        let gap = (sz / (it.tau * it.tau)) / pcost.abs().min(dcost.abs()).max(1.0);

        let current = || Solution {
            status: SolveStatus::Optimal,
            x: it.x.iter().map(|v| v / it.tau).collect(),
            s: it.s.iter().map(|v| v / it.tau).collect(),
            y: it.y.iter().map(|v| v / it.tau).collect(),
            z: it.z.iter().map(|v| v / it.tau).collect(),
            primal_objective: pcost,
            dual_objective: dcost,
            gap,
            primal_residual: pres,
            dual_residual: dres,
            iterations: iter,
            history: vec![],
        };

        if pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol {
            let mut sol = current();
            sol.history = history;
            return sol;
        }
        let merit = pres.max(dres).max(gap);
        if merit.is_finite() && best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((merit, current()));
        }

        let hz_by = dot(&prog.h, &it.z) + dot(&prog.b, &it.y);
        if hz_by < 0.0 {
            let mut aty = prog.a.mul_t_vec(&it.y);
            prog.g.mul_t_vec_add(1.0, &it.z, &mut aty);
            let dres_inf = norm2(&aty) / norms.c / (-hz_by);
            if dres_inf <= opts.feas_tol {
                let scale = 1.0 / -hz_by;
                let mut sol = failed(prog, SolveStatus::PrimalInfeasible, history);
                sol.y = it.y.iter().map(|v| v * scale).collect();
                sol.z = it.z.iter().map(|v| v * scale).collect();
                sol.dual_residual = dres_inf;
                sol.iterations = iter;
                return sol;
            }
        }
        let cx = dot(&prog.c, &it.x);
        if cx < 0.0 {
            let ax = prog.a.mul_vec(&it.x);
            let mut gxs = prog.g.mul_vec(&it.x);
            axpy(1.0, &it.s, &mut gxs);
            let pres_inf = (norm2(&ax) / norms.b).max(norm2(&gxs) / norms.h) / (-cx);
            if pres_inf <= opts.feas_tol {
                let scale = 1.0 / -cx;
                let mut sol = failed(prog, SolveStatus::DualInfeasible, history);
                sol.x = it.x.iter().map(|v| v * scale).collect();
                sol.s = it.s.iter().map(|v| v * scale).collect();
                sol.primal_residual = pres_inf;
                sol.iterations = iter;
                return sol;
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(w) = Scaling::new(cone, &it.s, &it.z) else {
            return finish(best, SolveStatus::Numerical, history, prog);
        };
        let Ok(fac) = KktFactor::new(prog, &st, &w.w_inv) else {
            return finish(best, SolveStatus::Numerical, history, prog);
        };
        let (x2, y2, z2) = fac.solve(prog, &w.w, &w.w_inv, &neg_c, &prog.b, &prog.h, opts.refinement);
        let denom2 = dot(&prog.c, &x2) + dot(&prog.b, &y2) + dot(&prog.h, &z2) - it.kappa / it.tau;

        let direction = |eta: f64, ds_target: &[f64], dk_target: f64| -> Option<Direction> {
            let lam_div = jordan::jordan_divide(cone, &w.lambda, ds_target).ok()?;
            let w_lam = jordan::quadratic_representation(cone, &w.w_sqrt, &lam_div).ok()?;
            let r1: Vec<f64> = r.rx.iter().map(|v| -eta * v).collect();
            let r2: Vec<f64> = r.ry.iter().map(|v| -eta * v).collect();
            let r3: Vec<f64> = r.rz.iter().zip(&w_lam).map(|(v, q)| -eta * v - q).collect();
            let (x1, y1, z1) = fac.solve(prog, &w.w, &w.w_inv, &r1, &r2, &r3, opts.refinement);
            let num = -eta * r.rt - dk_target / it.tau - (dot(&prog.c, &x1) + dot(&prog.b, &y1) + dot(&prog.h, &z1));
            let dtau = num / denom2;
            let mut dx = x1;
            axpy(dtau, &x2, &mut dx);
            let mut dy = y1;
            axpy(dtau, &y2, &mut dy);
            let mut dz = z1;
            axpy(dtau, &z2, &mut dz);
            let pdz = jordan::quadratic_representation(cone, &w.w, &dz).ok()?;
            let mut ds = w_lam;
            axpy(-1.0, &pdz, &mut ds);
            let dkappa = (dk_target - it.kappa * dtau) / it.tau;
            let d = Direction { x: dx, y: dy, z: dz, s: ds, tau: dtau, kappa: dkappa };
            let ok = d.x.iter().chain(&d.z).chain(&d.s).chain(&d.y).all(|v| v.is_finite()) && dtau.is_finite();
            ok.then_some(d)
        };

        let lam_sq = jordan::jordan_product(cone, &w.lambda, &w.lambda).expect("dimensions checked");
        let aff_target: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let Some(aff) = direction(1.0, &aff_target, -it.tau * it.kappa) else {
            return finish(best, SolveStatus::Numerical, history, prog);
        };
        let alpha_aff = max_step_all(cone, &it, &aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        let ds_scaled = jordan::quadratic_representation(cone, &w.w_inv_sqrt, &aff.s).expect("dimensions checked");
        let dz_scaled = jordan::quadratic_representation(cone, &w.w_sqrt, &aff.z).expect("dimensions checked");
        let corr = jordan::jordan_product(cone, &ds_scaled, &dz_scaled).expect("dimensions checked");
        let comb_target: Vec<f64> =
            lam_sq.iter().zip(&corr).zip(&e).map(|((l, c), ei)| -l - c + sigma * mu * ei).collect();
        let comb_kappa = -it.tau * it.kappa - aff.tau * aff.kappa + sigma * mu;
        let Some(d) = direction(1.0 - sigma, &comb_target, comb_kappa) else {
            return finish(best, SolveStatus::Numerical, history, prog);
        };
        let alpha = (STEP_FRACTION * max_step_all(cone, &it, &d)).min(1.0);

        history.push(IterationRecord {
            primal_objective: pcost,
            dual_objective: dcost,
            gap,
            primal_residual: pres,
            dual_residual: dres,
            tau: it.tau,
            kappa: it.kappa,
            step: alpha,
        });

        if !(alpha > 1e-12) {
            return finish(best, SolveStatus::Numerical, history, prog);
        }
        axpy(alpha, &d.x, &mut it.x);
        axpy(alpha, &d.y, &mut it.y);
        axpy(alpha, &d.z, &mut it.z);
        axpy(alpha, &d.s, &mut it.s);
        it.tau += alpha * d.tau;
        it.kappa += alpha * d.kappa;
        if !(it.tau > 0.0) || !(it.kappa > 0.0) {
            return finish(best, SolveStatus::Numerical, history, prog);
        }
    }
    finish(best, SolveStatus::MaxIter, history, prog)
}

fn finish(
    best: Option<(f64, Solution)>,
    status: SolveStatus,
    history: Vec<IterationRecord>,
    prog: &BlockConicProgram,
) -> Solution {
    match best {
        Some((_, mut sol)) => {
            sol.status = status;
            sol.iterations = history.len();
            sol.history = history;
            sol
        }
        None => failed(prog, status, history),
    }
}
