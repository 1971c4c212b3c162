use gdnn_core::gdnn::{self, C0Map, Condition, Evidence, GeneratorKind};
use gdnn_core::jordan::{self, Block, ConeSpec};
use gdnn_core::polymoment::{self, MomentVector, MultiIndex};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const TOL: f64 = gdnn::DEFAULT_TOL;

fn mixed() -> ConeSpec {
    ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::SecondOrder { dim: 3 }])
}

fn zvp_not_bd() -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, &[2., 0., 1., 1., 0., 2., 0., 0., 1., 0., 1., 0., 1., 0., 0., 1.])
}

fn bd_not_zvp() -> DMatrix<f64> {
    let r = 1.0 / 2f64.sqrt();
    DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, r, r]))
}

/// `A_{1,21} = A_{1,22} = 1`, symmetric, zero elsewhere.
fn kzvp0_counterexample() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(4, 4);
    for (i, j) in [(0, 1), (0, 2)] {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

fn identity_outer(spec: &ConeSpec) -> DMatrix<f64> {
    let e = DVector::from_vec(jordan::identity(spec));
    &e * e.transpose()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&g + g.transpose()) * 0.5
}

#[test]
fn generator_examples() {
    let g = gdnn::zvp_generators(&mixed());
    assert_eq!(g.j_list.len(), 1);
    assert!(g.jij_list.is_empty());
    assert_eq!(g.j_list[0].matrix, DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, -1.0, -1.0])));
    assert_eq!(g.j_list[0].matrix.trace(), 1.0 - 2.0);
    assert_eq!(g.nonneg_index_set, vec![0, 1]);

    let g = gdnn::zvp_generators(&ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::PsdVec { order: 2 }]));
    assert!(g.j_list.is_empty());
    assert_eq!(g.jij_list.len(), 1);
    let m = &g.jij_list[0].matrix;
    assert_eq!(g.jij_list[0].kind, GeneratorKind::Psd { block: 1, i: 0, j: 1 });
    assert_eq!((m[(1, 3)], m[(3, 1)], m[(2, 2)]), (1.0, 1.0, -1.0));
    assert_eq!(m.iter().filter(|v| **v != 0.0).count(), 3);
    assert_eq!(g.nonneg_index_set, vec![0, 1, 3]);

    let g = gdnn::zvp_generators(&ConeSpec::nonneg(4));
    assert!(g.is_empty());
    assert_eq!(g.nonneg_index_set, vec![0, 1, 2, 3]);
}

#[test]
fn zvp_examples() {
    let spec = mixed();
    let a = zvp_not_bd();
    assert!(gdnn_core::linalg::min_eigenvalue(&a).unwrap() >= -1e-12);
    assert!(gdnn::zvp_membership(&spec, &a, TOL).unwrap().member);

    let r = gdnn::zvp_membership(&spec, &bd_not_zvp(), TOL).unwrap();
    assert!(!r.member);
    match r.evidence {
        Evidence::Violation { condition: Condition::Generator(GeneratorKind::SecondOrder { block: 1 }), value } => {
            assert!((value - (1.0 - 2f64.sqrt())).abs() < 1e-12)
        }
        other => panic!("unexpected evidence {other:?}"),
    }
    assert!(gdnn::zvp_membership(&spec, &identity_outer(&spec), TOL).unwrap().member);
}

#[test]
fn zvp_on_orthant_is_dnn() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = ConeSpec::nonneg(4);
    for _ in 0..200 {
        let g = DMatrix::from_fn(4, 3, |_, _| rng.sample::<f64, _>(StandardNormal) + 0.4);
        let x = &g * g.transpose();
        let dnn = x.iter().all(|v| *v >= -TOL);
        assert_eq!(gdnn::zvp_membership(&spec, &x, TOL).unwrap().member, dnn);
    }
}

#[test]
fn bd_examples() {
    let spec = mixed();
    assert!(gdnn::bd_membership(&spec, &bd_not_zvp(), TOL).unwrap().member);
    let r = gdnn::bd_membership(&spec, &zvp_not_bd(), TOL).unwrap();
    assert!(!r.member);
    assert!(matches!(r.evidence, Evidence::Cut(_)));
    assert!(gdnn::bd_membership(&spec, &identity_outer(&spec), TOL).unwrap().member);
    let psd = ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::PsdVec { order: 2 }]);
    assert!(matches!(gdnn::bd_membership(&psd, &DMatrix::identity(4, 4), TOL), Err(gdnn::GdnnError::Unsupported(_))));
}

#[test]
fn kzvp0_examples() {
    let spec = mixed();
    let j2 = gdnn::zvp_generators(&spec).j_list[0].matrix.clone();
    let r = gdnn::kzvp0_membership(&spec, &j2, TOL).unwrap();
    assert!(r.member, "{:?}", r.evidence);
    let Evidence::Decomposition { p, t, n } = r.evidence else { panic!() };
    let recon = &p + &j2 * t[0] + &n;
    assert!((recon - &j2).amax() < 1e-6);

    assert!(!gdnn::kzvp0_membership(&spec, &kzvp0_counterexample(), TOL).unwrap().member);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = DMatrix::from_fn(4, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
    assert!(gdnn::kzvp0_membership(&spec, &(&g * g.transpose()), TOL).unwrap().member);
}

#[test]
fn knn_examples() {
    let spec = mixed();
    let r = gdnn::knn_membership(&spec, &kzvp0_counterexample(), 0, TOL).unwrap();
    assert!(r.member, "{:?}", r.evidence);
    let Evidence::Gram(cert) = r.evidence else { panic!() };
    assert!(cert.residual < 1e-6);

    let psd = ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::PsdVec { order: 2 }]);
    let mut a = DMatrix::zeros(4, 4);
    for (k, v) in [(1, 1.0), (2, 0.5), (3, 1.0)] {
        a[(0, k)] = v;
        a[(k, 0)] = v;
    }
    assert!(gdnn::knn_membership(&psd, &a, 0, TOL).unwrap().member);
    assert!(!gdnn::kzvp0_membership(&psd, &a, TOL).unwrap().member);

    for r in 0..2 {
        let res = gdnn::knn_membership(&spec, &(-DMatrix::<f64>::identity(4, 4)), r, TOL).unwrap();
        assert!(!res.member);
        let Evidence::SosWitness { value, .. } = res.evidence else { panic!() };
        assert!(value < 0.0);
    }
    assert!(matches!(
        gdnn::knn_membership(&ConeSpec::nonneg(30), &DMatrix::identity(30, 30), 6, TOL),
        Err(gdnn::GdnnError::LevelTooLarge { .. })
    ));
}

#[test]
fn dual_side_inclusion_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = mixed();
    let mut agree = 0;
    for k in 0..12 {
        let a = if k % 3 == 0 {
            let g = DMatrix::from_fn(4, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
            &g * g.transpose()
        } else {
            random_sym(&mut rng, 4).map(|v| v + 0.3)
        };
        let z = gdnn::kzvp0_membership(&spec, &a, TOL).unwrap().member;
        let nn = gdnn::knn_membership(&spec, &a, 0, TOL).unwrap().member;
        if z {
            assert!(nn, "K_ZVP,0 member outside K_NN,0: {a}");
            agree += 1;
        }
        if k % 3 == 0 {
            assert!(nn);
        }
    }
    assert!(agree > 0);
}

#[test]
fn c0_on_orthant_and_points() {
    let spec = ConeSpec::nonneg(3);
    let map = C0Map::new(&spec).unwrap();
    let basis = map.basis().clone();
    let y: Vec<f64> = (0..basis.len()).map(|k| k as f64 + 1.0).collect();
    let c = map.apply(&y);
    for i in 0..3 {
        for j in 0..3 {
            let k = basis.index_of_vars(&[i, i, j, j]).unwrap();
            assert_eq!(c[(i, j)], y[k]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for spec in [mixed(), ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::PsdVec { order: 2 }])] {
        let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let y = MomentVector::point_mass(&x, 4).unwrap();
        let sq = DVector::from_vec(jordan::jordan_product(&spec, &x, &x).unwrap());
        let c = gdnn::nn_c0(&spec, &y).unwrap();
        assert!((c - &sq * sq.transpose()).amax() < 1e-10 * (1.0 + sq.norm_squared()));
    }
}

#[test]
fn c0_is_linear() {
    let spec = ConeSpec::new(vec![Block::Nonneg { dim: 2 }, Block::SecondOrder { dim: 3 }]);
    let map = C0Map::new(&spec).unwrap();
    let m = map.basis().len();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y1: Vec<f64> = (0..m).map(|_| rng.random_range(-50..50) as f64).collect();
    let y2: Vec<f64> = (0..m).map(|_| rng.random_range(-50..50) as f64).collect();
    let comb: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| 3.0 * a - 2.0 * b).collect();
    assert_eq!(map.apply(&comb), map.apply(&y1) * 3.0 - map.apply(&y2) * 2.0);
}

/// Entry formulas for `K = R₊^{n1} × L^{n2}` written directly from the
/// case list of the closed form.
fn c0_closed_form(n1: usize, n2: usize, y: &dyn Fn(&[usize]) -> f64) -> DMatrix<f64> {
    let n = n1 + n2;
    let h1 = n1;
    let ih: Vec<usize> = (n1..n).collect();
    let ihm: Vec<usize> = (n1 + 1..n).collect();
    let mut c = DMatrix::zeros(n, n);
    let mut set = |i: usize, j: usize, v: f64| {
        c[(i, j)] = v;
        c[(j, i)] = v;
    };
    for i in 0..n1 {
        for j in 0..n1 {
            set(i, j, y(&[i, i, j, j]));
        }
        set(i, h1, ih.iter().map(|&k| y(&[i, i, k, k])).sum());
        for &j in &ihm {
            set(i, j, 2.0 * y(&[i, i, h1, j]));
        }
    }
    set(h1, h1, ih.iter().flat_map(|&k| ih.iter().map(move |&l| (k, l))).map(|(k, l)| y(&[k, k, l, l])).sum());
    for &j in &ihm {
        set(h1, j, ih.iter().map(|&k| 2.0 * y(&[k, k, h1, j])).sum());
    }
    for &i in &ihm {
        for &j in &ihm {
            set(i, j, 4.0 * y(&[h1, i, h1, j]));
        }
    }
    c
}

#[test]
fn c0_matches_closed_form_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (n1, n2) in [(1, 3), (2, 3)] {
        let spec = ConeSpec::new(vec![Block::Nonneg { dim: n1 }, Block::SecondOrder { dim: n2 }]);
        let map = C0Map::new(&spec).unwrap();
        let basis = map.basis().clone();
        for _ in 0..50 {
            let y: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1000..=1000) as f64).collect();
            let lookup = |vars: &[usize]| y[basis.index_of(&MultiIndex::from_vars(n1 + n2, vars)).unwrap()];
            assert_eq!(map.apply(&y), c0_closed_form(n1, n2, &lookup));
        }
    }
}

#[test]
fn nn_examples() {
    let spec = mixed();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let sq = DVector::from_vec(jordan::jordan_product(&spec, &x, &x).unwrap());
        let r = gdnn::nn_membership(&spec, &(&sq * sq.transpose()), TOL).unwrap();
        assert!(r.member, "{:?}", r.evidence);
        let Evidence::Moments(y) = r.evidence else { panic!() };
        let mm = polymoment::moment_matrix(&y).unwrap();
        assert!(gdnn_core::linalg::min_eigenvalue(&mm).unwrap() > -1e-6 * mm.amax());
    }
    assert!(!gdnn::nn_membership(&spec, &bd_not_zvp(), TOL).unwrap().member);
}

#[test]
fn single_second_order_cone_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let spec = ConeSpec::second_order(3);
    let mut d = DMatrix::identity(3, 3) * -1.0;
    d[(0, 0)] = 1.0;
    for _ in 0..30 {
        let g = DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &g * g.transpose() + DMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 0 { 2.0 } else { 0.0 });
        let expect = gdnn_core::linalg::frobenius(&d, &x) >= 0.0;
        assert_eq!(gdnn::zvp_membership(&spec, &x, 1e-6).unwrap().member, expect);
        assert_eq!(gdnn::nn_membership(&spec, &x, 1e-6).unwrap().member, expect);
    }
}

#[test]
fn cp_generators_pass_every_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let spec = mixed();
    for _ in 0..5 {
        let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let z = DVector::from_vec(jordan::jordan_product(&spec, &x, &x).unwrap());
        let zz = &z * z.transpose();
        assert!(gdnn::zvp_membership(&spec, &zz, TOL).unwrap().member);
        assert!(gdnn::bd_membership(&spec, &zz, TOL).unwrap().member);
        assert!(gdnn::nn_membership(&spec, &zz, TOL).unwrap().member);
    }
}

#[test]
fn nn_implies_zvp_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for spec in [mixed(), ConeSpec::new(vec![Block::Nonneg { dim: 2 }, Block::SecondOrder { dim: 3 }])] {
        let n = spec.ambient_dim();
        let map = C0Map::new(&spec).unwrap();
        let (mut members, mut outside) = (0, 0);
        for k in 0..200 {
            let mut y = vec![0.0; map.basis().len()];
            for _ in 0..3 {
                let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let w: f64 = rng.random_range(0.1..1.0);
                for (yi, pi) in y.iter_mut().zip(MomentVector::point_mass(&x, 4).unwrap().y) {
                    *yi += w * pi;
                }
            }
            let base = map.apply(&y);
            let x = if k % 2 == 0 { base } else { &base + random_sym(&mut rng, n) * (0.3 * base.amax()) };
            if gdnn::nn_membership(&spec, &x, TOL).unwrap().member {
                members += 1;
                assert!(gdnn::zvp_membership(&spec, &x, TOL).unwrap().member, "NN member outside ZVP: {x}");
            } else {
                outside += 1;
            }
        }
        assert!(members >= 100 && outside > 0, "{members} members, {outside} outside");
    }
}
