use gdnn_core::jordan::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixed_spec() -> ConeSpec {
    ConeSpec::new(vec![
        Block::Nonneg { dim: 2 },
        Block::SecondOrder { dim: 3 },
        Block::PsdVec { order: 3 },
        Block::SecondOrder { dim: 4 },
    ])
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn product_examples() {
    let s = ConeSpec::nonneg(2);
    assert_eq!(jordan_product(&s, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
    let s = ConeSpec::second_order(3);
    assert_eq!(jordan_product(&s, &[1.0, 0.0, 0.0], &[2.0, -1.0, 5.0]).unwrap(), vec![2.0, -1.0, 5.0]);
    let s = ConeSpec::psd(2);
    let a = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
    let b = svec(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let expect = svec(&DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0])).unwrap();
    let got = jordan_product(&s, &a, &b).unwrap();
    assert!(max_abs_diff(&got, &expect) < 1e-15);
    assert!(matches!(
        jordan_product(&s, &[1.0], &[1.0, 2.0, 3.0]),
        Err(JordanError::DimensionMismatch { expected: 3, actual: 1 })
    ));
}

#[test]
fn identity_examples() {
    let s = ConeSpec::new(vec![Block::Nonneg { dim: 2 }, Block::SecondOrder { dim: 3 }]);
    assert_eq!(identity(&s), vec![1.0, 1.0, 1.0, 0.0, 0.0]);
    assert_eq!(identity(&ConeSpec::psd(2)), vec![1.0, 0.0, 1.0]);
    let m = mixed_spec();
    assert!((min_eigenvalue(&m, &identity(&m)).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_examples() {
    let d = spectral_decompose(&ConeSpec::second_order(3), &[5.0, 3.0, 4.0]).unwrap();
    assert!((d.eigenvalues[0]).abs() < 1e-12 && (d.eigenvalues[1] - 10.0).abs() < 1e-12);

    let d = spectral_decompose(&ConeSpec::nonneg(3), &[2.0, -1.0, 0.0]).unwrap();
    assert_eq!(d.eigenvalues, vec![-1.0, 0.0, 2.0]);
    assert_eq!(d.idempotents, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);

    let x = svec(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
    let d = spectral_decompose(&ConeSpec::psd(2), &x).unwrap();
    assert!((d.eigenvalues[0] + 1.0).abs() < 1e-12 && (d.eigenvalues[1] - 1.0).abs() < 1e-12);

    // Degenerate second-order element: frame along the first direction.
    let d = spectral_decompose(&ConeSpec::second_order(3), &[2.0, 0.0, 0.0]).unwrap();
    assert_eq!(d.idempotents[0], vec![0.5, -0.5, 0.0]);
    assert_eq!(d.idempotents[1], vec![0.5, 0.5, 0.0]);
}

#[test]
fn min_eigenvalue_examples() {
    assert!(min_eigenvalue(&ConeSpec::second_order(3), &[1.0, 1.0, 0.0]).unwrap().abs() < 1e-15);
    let s = ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::SecondOrder { dim: 2 }]);
    assert!((min_eigenvalue(&s, &[0.5, 3.0, -4.0]).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn second_order_of_dim_one_is_nonneg() {
    let s = ConeSpec::second_order(1);
    assert_eq!(s.blocks(), &[Block::Nonneg { dim: 1 }]);
}

#[test]
fn spec_json_schema() {
    let text = r#"{"blocks":[{"kind":"nonneg","dim":3},{"kind":"soc","dim":4},{"kind":"psd","order":2}]}"#;
    let s: ConeSpec = serde_json::from_str(text).unwrap();
    assert_eq!(s.ambient_dim(), 10);
    assert_eq!(s.rank(), 3 + 2 + 2);
    assert_eq!(serde_json::to_string(&s).unwrap(), text);
    assert_eq!(s.nonneg_index_set(), vec![0, 1, 2, 3, 7, 9]);
    assert_eq!(s.psd_index(2, 0, 1), 8);
}

#[test]
fn idempotent_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = mixed_spec();
    for h in 0..s.blocks().len() {
        for _ in 0..20 {
            let c = sample_primitive_idempotent(&s, h, &mut rng).unwrap();
            let cc = jordan_product(&s, &c, &c).unwrap();
            assert!(max_abs_diff(&cc, &c) <= 1e-12);
            let d = spectral_decompose(&s, &c).unwrap();
            let ones = d.eigenvalues.iter().filter(|l| (*l - 1.0).abs() < 1e-9).count();
            assert_eq!(ones, 1, "primitive idempotent has exactly one unit eigenvalue");
        }
    }
    let mut seen = [false; 3];
    for _ in 0..60 {
        let c = sample_primitive_idempotent(&ConeSpec::nonneg(3), 0, &mut rng).unwrap();
        seen[c.iter().position(|v| *v == 1.0).unwrap()] = true;
    }
    assert_eq!(seen, [true; 3]);
    assert!(matches!(
        sample_primitive_idempotent(&s, 9, &mut rng),
        Err(JordanError::BlockIndex { index: 9, count: 4 })
    ));
}

#[test]
fn quadratic_forms_examples() {
    let s = ConeSpec::new(vec![Block::Nonneg { dim: 1 }, Block::SecondOrder { dim: 3 }]);
    let t = square_quadratic_forms(&s);
    assert_eq!(t.forms[1], DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0, 1.0])));
    let mut q = DMatrix::zeros(4, 4);
    q[(1, 2)] = 1.0;
    q[(2, 1)] = 1.0;
    assert_eq!(t.forms[2], q);
    assert_eq!(t.forms[0][(0, 0)], 1.0);

    let p = ConeSpec::psd(2);
    let x = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
    let x: Vec<f64> = x.iter().map(|v| 1.7 * v).collect();
    let tq = square_quadratic_forms(&p);
    assert!(max_abs_diff(&tq.evaluate(&x), &jordan_product(&p, &x, &x).unwrap()) < 1e-12);
}

#[test]
fn svec_round_trip_and_isometry() {
    let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, -1.0, 0.5, 3.0, 0.5, 4.0]);
    let b = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -2.0, 1.0, 2.0, 1.5, -2.0, 1.5, 1.0]);
    let va = svec(&a).unwrap();
    assert_eq!(smat(&va).unwrap().map(|v| (v * 1e12).round()), a.map(|v| (v * 1e12).round()));
    let ip: f64 = a.component_mul(&b).sum();
    let vb = svec(&b).unwrap();
    assert!((ip - va.iter().zip(&vb).map(|(p, q)| p * q).sum::<f64>()).abs() < 1e-12);
    assert_eq!(svec(&DMatrix::identity(2, 2)).unwrap(), vec![1.0, 0.0, 1.0]);
    assert!(matches!(svec(&DMatrix::zeros(2, 3)), Err(JordanError::NotSquare { .. })));
    assert!(matches!(smat(&[1.0, 2.0]), Err(JordanError::NotTriangular(2))));
}

#[test]
fn quadratic_representation_and_division() {
    let s = mixed_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vec<f64> = random_unit(s.ambient_dim(), &mut rng);
        let y: Vec<f64> = random_unit(s.ambient_dim(), &mut rng);
        let xy = jordan_product(&s, &x, &y).unwrap();
        let x_xy = jordan_product(&s, &x, &xy).unwrap();
        let xx = jordan_product(&s, &x, &x).unwrap();
        let xx_y = jordan_product(&s, &xx, &y).unwrap();
        let expect: Vec<f64> = x_xy.iter().zip(&xx_y).map(|(a, b)| 2.0 * a - b).collect();
        let got = quadratic_representation(&s, &x, &y).unwrap();
        assert!(max_abs_diff(&got, &expect) < 1e-12);

        let e = identity(&s);
        let interior: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + 2.0 * b).collect();
        let u = jordan_divide(&s, &interior, &y).unwrap();
        let back = jordan_product(&s, &interior, &u).unwrap();
        assert!(max_abs_diff(&back, &y) < 1e-10);

        let alpha = max_step(&s, &interior, &y, f64::INFINITY).unwrap();
        if alpha.is_finite() {
            let edge: Vec<f64> = interior.iter().zip(&y).map(|(a, b)| a + alpha * b).collect();
            assert!(min_eigenvalue(&s, &edge).unwrap().abs() < 1e-9);
        }
    }
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3.0f64..3.0, n)
}

proptest! {
    #[test]
    fn power_associativity(x in vec_strategy(15), y in vec_strategy(15)) {
        let s = mixed_spec();
        let xx = jordan_product(&s, &x, &x).unwrap();
        let lhs = jordan_product(&s, &x, &jordan_product(&s, &xx, &y).unwrap()).unwrap();
        let rhs = jordan_product(&s, &xx, &jordan_product(&s, &x, &y).unwrap()).unwrap();
        let scale = norm(&x).powi(3) * norm(&y) + 1.0;
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10 * scale);
    }

    #[test]
    fn associative_inner_product(x in vec_strategy(15), y in vec_strategy(15), z in vec_strategy(15)) {
        let s = mixed_spec();
        let l: f64 = jordan_product(&s, &x, &y).unwrap().iter().zip(&z).map(|(a, b)| a * b).sum();
        let r: f64 = jordan_product(&s, &y, &z).unwrap().iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((l - r).abs() <= 1e-10 * (norm(&x) * norm(&y) * norm(&z) + 1.0));
    }

    #[test]
    fn commutative_and_identity(x in vec_strategy(15), y in vec_strategy(15)) {
        let s = mixed_spec();
        prop_assert!(max_abs_diff(&jordan_product(&s, &x, &y).unwrap(), &jordan_product(&s, &y, &x).unwrap()) < 1e-12);
        prop_assert!(max_abs_diff(&jordan_product(&s, &identity(&s), &x).unwrap(), &x) < 1e-12);
    }

    #[test]
    fn membership_matches_blockwise_tests(x in vec_strategy(15)) {
        let s = mixed_spec();
        let lmin = min_eigenvalue(&s, &x).unwrap();
        let nonneg = x[0] >= 0.0 && x[1] >= 0.0;
        let soc1 = x[2] >= (x[3] * x[3] + x[4] * x[4]).sqrt();
        let m = smat(&x[5..11]).unwrap();
        let psd = nalgebra::SymmetricEigen::new(m).eigenvalues.min() >= 0.0;
        let soc2 = x[11] >= (x[12] * x[12] + x[13] * x[13] + x[14] * x[14]).sqrt();
        let inside = nonneg && soc1 && psd && soc2;
        if lmin.abs() > 1e-9 {
            prop_assert_eq!(lmin >= 0.0, inside);
        }
    }

    #[test]
    fn spectral_reconstruction(x in vec_strategy(15)) {
        let s = mixed_spec();
        let d = spectral_decompose(&s, &x).unwrap();
        prop_assert_eq!(d.eigenvalues.len(), s.rank());
        prop_assert!(max_abs_diff(&d.reconstruct(), &x) <= 1e-10 * (norm(&x) + 1e-12).max(1.0));
        let e = identity(&s);
        let mut sum = vec![0.0; s.ambient_dim()];
        for (i, c) in d.idempotents.iter().enumerate() {
            let cc = jordan_product(&s, c, c).unwrap();
            prop_assert!(max_abs_diff(&cc, c) < 1e-10);
            for (j, c2) in d.idempotents.iter().enumerate() {
                if i != j && d.block_of[i] == d.block_of[j] {
                    let p = jordan_product(&s, c, c2).unwrap();
                    prop_assert!(p.iter().all(|v| v.abs() < 1e-10));
                }
            }
            for (t, v) in sum.iter_mut().zip(c) {
                *t += v;
            }
        }
        prop_assert!(max_abs_diff(&sum, &e) < 1e-10);
    }

    #[test]
    fn quadratic_forms_evaluate_square(x in vec_strategy(15)) {
        let s = mixed_spec();
        let t = square_quadratic_forms(&s);
        let sq = jordan_product(&s, &x, &x).unwrap();
        prop_assert!(max_abs_diff(&t.evaluate(&x), &sq) <= 1e-12 * norm(&x).powi(2).max(1.0));
    }
}
