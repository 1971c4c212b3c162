use gdnn_core::gcpp::{self, ExchangeParams, MisocpInstance, RelaxationOptions, Variant};
use gdnn_core::conicsolver::SolverOptions;
use gdnn_core::{bdsep, gdnn, linalg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn small(n: usize, seed: u64) -> MisocpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nb = ((0.4 * n as f64).round() as usize).max(1);
    MisocpInstance { n, c, binary: (1..=nb).collect(), seed: Some(seed) }
}

#[test]
fn two_variable_example() {
    let inst = MisocpInstance { n: 2, c: vec![-1.0, -1.0], binary: vec![1], seed: None };
    let sol = gcpp::misocp_bruteforce(&inst, &SolverOptions::default()).unwrap();
    assert!((sol.value + 3.0).abs() < 1e-6, "{}", sol.value);
    let x = sol.x.unwrap();
    assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    assert_eq!(sol.branches, 2);
}

#[test]
fn invalid_instances() {
    let bad = [
        MisocpInstance { n: 1, c: vec![1.0], binary: vec![], seed: None },
        MisocpInstance { n: 3, c: vec![1.0; 2], binary: vec![], seed: None },
        MisocpInstance { n: 3, c: vec![1.0; 3], binary: vec![0], seed: None },
        MisocpInstance { n: 3, c: vec![1.0; 3], binary: vec![3], seed: None },
        MisocpInstance { n: 3, c: vec![1.0; 3], binary: vec![1, 1], seed: None },
    ];
    for inst in bad {
        assert!(gcpp::burer_reformulate(&inst).is_err(), "{inst:?}");
    }
}

#[test]
fn lift_of_feasible_points_is_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=6 {
        let inst = small(n, n as u64);
        let g = gcpp::burer_reformulate(&inst).unwrap();
        assert_eq!(g.order(), 3 * n + 1);
        assert_eq!(g.constraints.len(), 4 * n + inst.binary.len() + 1);
        for _ in 0..20 {
            let mut x: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
            for &i in &inst.binary {
                x[i] = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            }
            let tail = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            x[0] = rng.random_range(tail.min(2.0)..=2.0f64.max(tail));
            if x[0] < tail {
                continue;
            }
            let y = inst.lift(&x);
            assert!(g.equality_residual(&y) < 1e-12);
            let cx: f64 = inst.c.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((linalg::frobenius(&g.objective, &y) - cx).abs() < 1e-12);
            let z = inst.lift_vector(&x);
            assert!(gdnn_core::jordan::min_eigenvalue(&g.cone, &z).unwrap() >= -1e-12);
        }
    }
}

#[test]
fn relaxations_are_sandwiched() {
    let opts = RelaxationOptions::default();
    for (n, seed) in [(2, 1), (2, 2), (3, 3), (3, 4)] {
        let inst = small(n, seed);
        let g = gcpp::burer_reformulate(&inst).unwrap();
        let sdp = gcpp::solve_relaxation(&g, Variant::Sdp, &opts).unwrap();
        let zvp = gcpp::solve_relaxation(&g, Variant::Zvp, &opts).unwrap();
        let nn = gcpp::solve_relaxation(&g, Variant::Nn, &opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ExchangeParams { random_idempotents: 200, ..ExchangeParams::default() };
        let bd = gcpp::solve_bd_exchange(&g, &params, &mut rng).unwrap();
        let mi = gcpp::misocp_bruteforce(&inst, &opts.solver).unwrap();
        let tol = 1e-5 * (1.0 + mi.value.abs());
        assert!(sdp.value - tol <= zvp.value, "n={n}: sdp {} zvp {}", sdp.value, zvp.value);
        assert!(zvp.value - tol <= nn.value, "n={n}: zvp {} nn {}", zvp.value, nn.value);
        assert!(sdp.value - tol <= bd.value, "n={n}: sdp {} bd {}", sdp.value, bd.value);
        assert!(nn.value - tol <= mi.value, "n={n}: nn {} mi {}", nn.value, mi.value);
        assert!(bd.value - tol <= mi.value, "n={n}: bd {} mi {}", bd.value, mi.value);
        for r in [&sdp, &zvp, &nn] {
            assert!(r.kkt <= 1e-6, "{:?} kkt {}", r.variant, r.kkt);
            assert!(g.equality_residual(&r.y) <= 1e-6);
        }
        assert!(bd.kkt <= 1e-6);
        assert!(bd.gamma <= params.tau);
        eprintln!("n={n} sdp {:.6} zvp {:.6} nn {:.6} bd {:.6} ({} solves) misocp {:.6}", sdp.value, zvp.value, nn.value, bd.value, bd.solves, mi.value);
    }
}

#[test]
fn toy_values() {
    let opts = RelaxationOptions::default();
    let cases = [(vec![-1.0, 0.0], vec![], -2.0), (vec![0.0, 0.0], vec![1], 0.0), (vec![0.3, 1.2, 0.5], vec![2], 0.0)];
    for (c, binary, opt) in cases {
        let inst = MisocpInstance { n: c.len(), c, binary, seed: None };
        let mi = gcpp::misocp_bruteforce(&inst, &opts.solver).unwrap();
        assert!((mi.value - opt).abs() < 1e-6, "{inst:?}: {}", mi.value);
        let g = gcpp::burer_reformulate(&inst).unwrap();
        for v in [Variant::Zvp, Variant::Nn] {
            let r = gcpp::solve_relaxation(&g, v, &opts).unwrap();
            assert!((opt - 1e-5..=opt + 1e-5).contains(&r.value), "{v:?} {}", r.value);
        }
    }
}

#[test]
fn zvp_row_count() {
    for n in 2..=6 {
        let g = gcpp::burer_reformulate(&small(n, 1)).unwrap();
        let prog = gcpp::build_relaxation(&g, Variant::Zvp, &RelaxationOptions::default()).unwrap();
        let nonneg: usize = prog
            .cone
            .blocks()
            .iter()
            .map(|b| match b {
                gdnn_core::jordan::Block::Nonneg { dim } => *dim,
                _ => 0,
            })
            .sum();
        assert_eq!(nonneg, 1 + (2 * n + 2) * (2 * n + 3) / 2);
    }
}

#[test]
fn rank_one_lifts_are_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 2..=3 {
        let inst = small(n, 20 + n as u64);
        let g = gcpp::burer_reformulate(&inst).unwrap();
        for _ in 0..5 {
            let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.6)).collect();
            for &i in &inst.binary {
                x[i] = rng.random_range(0..2) as f64;
            }
            x[0] = rng.random_range(1.5..2.0);
            let y = inst.lift(&x);
            assert!(gdnn::zvp_membership(&g.cone, &y, 1e-9).unwrap().member);
            assert!(gdnn::bd_membership(&g.cone, &y, 1e-9).unwrap().member);
            assert!(gdnn::nn_membership(&g.cone, &y, 1e-7).unwrap().member);
        }
    }
}

#[test]
fn exchange_invariants() {
    let params = ExchangeParams { random_idempotents: 300, ..ExchangeParams::default() };
    for (n, seed) in [(4, 1), (5, 2), (6, 3), (8, 4)] {
        let g = gcpp::burer_reformulate(&small(n, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bd = gcpp::solve_bd_exchange(&g, &params, &mut rng).unwrap();
        let lmin = linalg::min_eigenvalue(&bd.y).unwrap();
        assert!(lmin >= -1e-7, "λ_min {lmin}");
        assert!(bdsep::separate(&g.cone, &bd.y, 2.0 * params.tau).unwrap().is_inside());
        for w in bd.trace.windows(2) {
            assert!(w[1].objective >= w[0].objective - 1e-6 * (1.0 + w[0].objective.abs()));
        }
        let sdp = gcpp::solve_relaxation(&g, Variant::Sdp, &RelaxationOptions::default()).unwrap();
        assert!(sdp.value - 1e-5 <= bd.value);
    }
}

#[test]
fn relaxations_never_exceed_misocp() {
    let opts = RelaxationOptions::default();
    for n in 2..=4 {
        for seed in 0..3 {
            let inst = small(n, 100 + seed);
            let g = gcpp::burer_reformulate(&inst).unwrap();
            let mi = gcpp::misocp_bruteforce(&inst, &opts.solver).unwrap().value;
            let tol = 1e-5 * (1.0 + mi.abs());
            let zvp = gcpp::solve_relaxation(&g, Variant::Zvp, &opts).unwrap().value;
            let bd = gcpp::solve_bd_exchange(&g, &ExchangeParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().value;
            assert!(zvp <= mi + tol && bd <= mi + tol, "n={n}: zvp {zvp} bd {bd} misocp {mi}");
            if n <= 3 {
                let nn = gcpp::solve_relaxation(&g, Variant::Nn, &opts).unwrap().value;
                assert!(zvp - tol <= nn && nn <= mi + tol, "n={n}: zvp {zvp} nn {nn} misocp {mi}");
            }
        }
    }
}
