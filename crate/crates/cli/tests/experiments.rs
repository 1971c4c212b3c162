use gdnn_cli::experiments::{self, CellStatus, ExperimentError, TableConfig};
use gdnn_core::gcpp::Variant;
use gdnn_core::linalg;
use gdnn_core::polymoment;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn instance_generation() {
    assert_eq!(experiments::generate_instance(5, 1).unwrap().binary.len(), 2);
    assert_eq!(experiments::generate_instance(10, 1).unwrap().binary.len(), 4);
    assert_eq!(experiments::generate_instance(7, 9).unwrap(), experiments::generate_instance(7, 9).unwrap());
    assert_ne!(experiments::generate_instance(7, 9).unwrap().c, experiments::generate_instance(7, 10).unwrap().c);
    assert!(matches!(experiments::generate_instance(2, 0), Err(ExperimentError::TooSmall(2))));
    for seed in 0..20 {
        let inst = experiments::generate_instance(12, seed).unwrap();
        assert!(inst.binary.iter().all(|&i| (1..12).contains(&i)));
        assert!(inst.binary.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn m44_ties_make_a_moment_matrix() {
    let classes = experiments::m44_classes();
    assert_eq!(classes.len(), 35);
    let tied = classes.values().filter(|e| e.iter().filter(|(i, j)| i <= j).count() > 1).count();
    assert_eq!(tied, 19);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let g = DMatrix::from_fn(10, 10, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut m = &g * g.transpose();
        assert!(experiments::check_m44_ties(&m).is_err());
        experiments::apply_m44_ties(&mut m);
        assert_eq!(m[(0, 1)], m[(4, 4)]);
        experiments::check_m44_ties(&m).unwrap();
    }
}

#[test]
fn accepted_m44_samples_are_moment_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut accepted = Vec::new();
    for _ in 0..2_000_000 {
        match experiments::sample_m44(&mut rng) {
            Ok(y) => accepted.push(y),
            Err(ExperimentError::Rejected { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        if accepted.len() == 3 {
            break;
        }
    }
    assert_eq!(accepted.len(), 3);
    for y in accepted {
        assert_eq!((y.n, y.degree, y.y.len()), (4, 4, 35));
        let m = polymoment::moment_matrix(&y).unwrap();
        assert!(linalg::min_eigenvalue(&m).unwrap() >= -1e-9 * m.trace());
    }
}

#[test]
fn m44_acceptance_rate() {
    let small = experiments::m44_accepted(10_000, 0);
    let large = experiments::m44_accepted(400_000, 0);
    println!("accepted {small} of 10^4 and {large} of 4*10^5 draws");
    assert!(large > 0);
    assert!(large >= small);
}

#[test]
fn m44_seed_is_deterministic() {
    let a = experiments::generate_m44_vector(5);
    let b = experiments::generate_m44_vector(5);
    match (a, b) {
        (Ok(a), Ok(b)) => assert_eq!(a, b),
        (Err(ExperimentError::Rejected { lambda_min: Some(a) }), Err(ExperimentError::Rejected { lambda_min: Some(b) })) => assert_eq!(a, b),
        other => panic!("{other:?}"),
    }
}

#[test]
fn short_fig1_run() {
    let a = experiments::run_fig1(3, 4).unwrap();
    let b = experiments::run_fig1(3, 4).unwrap();
    assert_eq!(a.records.len(), 3);
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.summary["trs_negative"], 0);
    for r in &a.records {
        assert!(r.min_eigenvalue >= -1e-9 * 1e4);
    }
}

#[test]
fn tables_mark_caps_and_format_csv() {
    let cfg = TableConfig { ns: vec![10], instances: 1, variants: vec![Variant::Nn], ..TableConfig::default() };
    let report = experiments::run_tables(&cfg);
    assert_eq!(report.records.len(), 1);
    let row = &report.records[0];
    assert_eq!(row.nn.status, CellStatus::Oom);
    assert_eq!(row.misocp.status, CellStatus::Ok);
    assert_eq!(row.zvp.status, CellStatus::NotRun);

    let csv = experiments::tables_csv(&report.records).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut expect = vec!["n".to_string(), "no".to_string()];
    for name in ["misocp", "nn", "zvp", "bd", "sdp"] {
        expect.push(format!("{name}_value"));
        expect.push(format!("{name}_time"));
    }
    assert_eq!(header, expect);
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((fields[0], fields[1], fields[4], fields[6]), ("10", "1", "OOM", "-"));
}

#[test]
fn tables_are_deterministic_and_sandwiched() {
    let cfg = TableConfig { ns: vec![5], instances: 2, variants: vec![Variant::Zvp, Variant::Bd, Variant::Sdp], seed: 3, ..TableConfig::default() };
    let a = experiments::run_tables(&cfg);
    let b = experiments::run_tables(&TableConfig { workers: 2, ..cfg.clone() });
    assert_eq!(a.summary["failed_cells"], 0);
    assert!(a.summary["sandwich_violations"].as_array().unwrap().is_empty());
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!((ra.n, ra.no, ra.seed), (rb.n, rb.no, rb.seed));
        for v in [Variant::Zvp, Variant::Bd, Variant::Sdp] {
            let (x, y) = (ra.cell(v).value.unwrap(), rb.cell(v).value.unwrap());
            assert!((x - y).abs() <= 1e-9, "{v:?}: {x} vs {y}");
        }
        assert!(ra.sandwich_violations().is_empty());
    }
}

#[test]
fn instance_seeds_are_distinct() {
    let mut seeds: Vec<u64> = [5, 10, 20, 30].iter().flat_map(|&n| (0..5).map(move |no| experiments::instance_seed(0, n, no))).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 20);
}

#[test]
fn diagonal_sdp_matches_lp() {
    for c in experiments::diagonal_sdp_vs_lp(8, 1).unwrap() {
        assert!((c.lp - c.known).abs() <= 1e-6 * (1.0 + c.known.abs()), "{c:?}");
        assert!((c.sdp - c.known).abs() <= 1e-6 * (1.0 + c.known.abs()), "{c:?}");
    }
}
