use pspin_qaoa::experiment::*;
use pspin_qaoa::optimizer::{multi_start, optimize, task_seed, InitScheme, OptimizerConfig, Summary};
use pspin_qaoa::ProblemSpec;
use std::f64::consts::PI;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn synthetic_row(depth: usize, critical: usize, residual: f64) -> SweepRow {
    SweepRow {
        n_sites: 13,
        p_exponent: 3,
        field: 0.5,
        depth,
        scheme: SchemeKind::Random,
        critical_depth: critical,
        collapse: 0.0,
        critical_field: None,
        n_restarts: 1,
        n_failed: 0,
        n_converged: 1,
        residual: Summary::of(&[residual]),
        iterations: None,
        annealing_time_mean: None,
        fidelity_mean: None,
        error: None,
    }
}

#[test]
fn fit_recovers_generating_exponent() {
    let rows: Vec<SweepRow> =
        (1..=14).map(|p| synthetic_row(p, 14, 0.3 * (1.0 - p as f64 / 14.0).max(0.0).powi(3))).collect();
    let fit = fit_scaling_exponent(&rows).unwrap();
    assert!((fit.exponent - 3.0).abs() < 1e-6, "{}", fit.exponent);
    // the P = P* row is an exact zero and P = 1 lies below the window
    assert_eq!(fit.fit.n_points, 11);
}

#[test]
fn fit_refuses_too_few_rows() {
    assert!(fit_scaling_exponent(&[synthetic_row(5, 14, 0.1)]).is_err());
    let rows = [synthetic_row(5, 14, 0.1), synthetic_row(6, 14, 0.05), synthetic_row(13, 14, 1e-12)];
    assert!(fit_scaling_exponent(&rows).is_err());
}

#[test]
fn collapse_coordinates() {
    let even = ProblemSpec::new(8, 2, 0.0).unwrap();
    let odd = ProblemSpec::new(5, 3, 0.0).unwrap();
    assert_eq!(collapse_coordinate(&even, 6), 0.5);
    assert_eq!(collapse_coordinate(&odd, 6), 1.0);
}

fn small_scaling() -> ExperimentConfig {
    ExperimentConfig { n_sites: vec![6, 7], depths: vec![1, 2, 5], n_restarts: 4, ..ExperimentConfig::default() }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let a = run_experiment(&ExperimentConfig { workers: 1, ..small_scaling() }).unwrap();
    let b = run_experiment(&ExperimentConfig { workers: 3, ..small_scaling() }).unwrap();
    assert_eq!(a, b);
    assert!(!a.has_failures());
}

#[test]
fn json_roundtrip_and_rerun_reproduce_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let config = ExperimentConfig { out: Some(path.clone()), format: OutputFormat::Json, ..small_scaling() };
    let table = run_experiment(&config).unwrap();
    emit_results(&table, &config, OutputFormat::Json, Some(&path)).unwrap();
    let doc = read_results(&path).unwrap();
    assert_eq!(doc.table, table);
    assert_eq!(doc.config, config);
    let rerun = run_experiment(&doc.config).unwrap();
    let (Table::Sweep(a), Table::Sweep(b)) = (&table, &rerun) else { panic!("sweep tables expected") };
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.residual.unwrap().mean.to_bits(), y.residual.unwrap().mean.to_bits());
    }
}

#[test]
fn csv_has_documented_header_and_full_precision() {
    let config = small_scaling();
    let table = run_experiment(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&table, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    assert_eq!(lines.count(), table.len());
    // the field column carries 17 significant digits
    assert!(text.contains("6.1803398874989490e-1"), "{text}");
}

#[test]
fn emit_rejects_unwritable_path() {
    let table = run_experiment(&ExperimentConfig::for_kind(ExperimentKind::P1Table)).unwrap();
    let err = emit_results(&table, &ExperimentConfig::default(), OutputFormat::Csv, Some("/nonexistent/x.csv".as_ref()));
    assert!(err.unwrap_err().to_string().contains("/nonexistent/x.csv"));
}

#[test]
fn multi_start_equals_sequential_single_runs() {
    let spec = ProblemSpec::new(7, 3, 0.4).unwrap();
    let cfg = OptimizerConfig::default();
    let stats = multi_start(&spec, 3, InitScheme::Random, 6, 11, &cfg).unwrap();
    for (r, res) in stats.results.iter().enumerate() {
        let seed = task_seed(11, 7, 3, 0.4, r);
        assert_eq!(res, &optimize(&spec, 3, InitScheme::Random, &cfg, seed).unwrap());
    }
}

#[test]
fn scaling_examples() {
    let config = ExperimentConfig { n_sites: vec![8], depths: vec![6], n_restarts: 10, ..ExperimentConfig::default() };
    let Table::Sweep(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    assert!(rows[0].residual.unwrap().mean < 1e-10);

    let config = ExperimentConfig {
        n_sites: vec![5],
        p_exponents: vec![3],
        fields: vec![0.0],
        depths: vec![1],
        ..ExperimentConfig::default()
    };
    let Table::Sweep(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    assert!(rows[0].residual.unwrap().min < 1e-12);
}

#[test]
fn threshold_plunge_for_odd_p() {
    let config = ExperimentConfig {
        n_sites: vec![5],
        p_exponents: vec![3],
        fields: vec![golden()],
        depths: vec![3, 6],
        ..ExperimentConfig::default()
    };
    let Table::Sweep(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    assert!(rows[0].residual.unwrap().mean > 1e-6);
    assert!(rows[1].residual.unwrap().min < 1e-10);
}

#[test]
fn zero_field_at_critical_depth_both_schemes() {
    let config = ExperimentConfig {
        kind: ExperimentKind::FieldSweep,
        n_sites: vec![5],
        p_exponents: vec![3],
        fields: vec![0.0],
        depths: vec![6],
        schemes: vec![SchemeKind::Random, SchemeKind::Linear],
        n_restarts: 5,
        ..ExperimentConfig::default()
    };
    let Table::Sweep(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert!(row.residual.unwrap().min < 1e-10, "{row:?}");
        assert_eq!(row.critical_field, Some(1.2956));
    }
}

#[test]
fn p1_table_columns() {
    let config = ExperimentConfig {
        n_sites: vec![4, 5, 7, 9],
        p_exponents: vec![2, 3],
        ..ExperimentConfig::for_kind(ExperimentKind::P1Table)
    };
    let Table::P1(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    for r in &rows {
        if r.n_sites % 2 == 0 {
            assert_eq!(r.note.as_deref(), Some("no closed form"));
            assert!(r.gamma.is_none());
            continue;
        }
        assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-12);
        if r.p_exponent == 2 {
            assert_eq!(r.gamma, Some(PI / 8.0));
        }
    }
    let tau = |n: u32| rows.iter().find(|r| r.p_exponent == 3 && r.n_sites == n).unwrap().annealing_time.unwrap();
    let config3 = ExperimentConfig { n_sites: vec![3], p_exponents: vec![3], ..config };
    let Table::P1(r3) = run_experiment(&config3).unwrap() else { unreachable!() };
    let ratio = tau(9) / r3[0].annealing_time.unwrap();
    assert!(ratio > 8.0 && ratio < 9.0, "{ratio}");
}

#[test]
fn iteration_rows_use_the_critical_depth() {
    let config = ExperimentConfig {
        n_sites: vec![6, 8],
        n_restarts: 3,
        ..ExperimentConfig::for_kind(ExperimentKind::IterationScaling)
    };
    let Table::Iterations(rows) = run_experiment(&config).unwrap() else { unreachable!() };
    assert_eq!(rows.iter().map(|r| r.depth).collect::<Vec<_>>(), vec![5, 6]);
    assert!(rows.iter().all(|r| r.iterations.unwrap().count == 3));
    let mut buf = Vec::new();
    write_csv(&Table::Iterations(rows), &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with(ITERATIONS_HEADER));
}

#[test]
fn gap_table_and_fit() {
    let config = ExperimentConfig { n_sites: vec![16, 32, 64], ..ExperimentConfig::for_kind(ExperimentKind::GapScaling) };
    let Table::Gap(t) = run_experiment(&config).unwrap() else { unreachable!() };
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows.windows(2).all(|w| w[1].min_gap < w[0].min_gap));
    let fit = t.fits[0].fit.unwrap();
    assert_eq!(t.fits[0].model, GapModel::PowerLaw);
    assert!(fit.slope < 0.0);
}

#[test]
fn invalid_config_is_an_error() {
    let config = ExperimentConfig { n_sites: vec![], ..ExperimentConfig::default() };
    assert!(run_experiment(&config).is_err());
    assert!(run_scaling_experiment(&ExperimentConfig::for_kind(ExperimentKind::P1Table)).is_err());
}
