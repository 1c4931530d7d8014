use std::io::Write;

use dissipative::config::ExperimentConfig;
use dissipative::experiments::*;
use dissipative::Error;

fn cfg(potential: &str, rs: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        potential: potential.into(),
        r_list: rs.to_vec(),
        threads: Some(1),
        ..ExperimentConfig::default()
    }
}

#[test]
fn sweep_counts_grow_and_stay_below_the_compact_bound() {
    let sweep = run_sweep(&cfg("zero", &[10.0, 20.0, 40.0])).unwrap();
    let counts: Vec<u64> = sweep.rows.iter().map(|r| r.count).collect();
    assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
    let reports = sweep_reports(&sweep).unwrap();
    assert!(reports.iter().any(|r| r.bound_name == "count_compact"));
    assert!(!reports.iter().any(|r| r.bound_name == "count_exponential"));
    assert!(reports.iter().all(|r| r.satisfied), "{reports:?}");
    let json = sweep_report_json(&sweep).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let mut one = cfg("box:A=1,Q=1", &[8.0, 12.0]);
    let a = run_sweep(&one).unwrap();
    one.threads = Some(2);
    let b = run_sweep(&one).unwrap();
    let csv = |s: &Sweep| eigen_csv(&s.sets.iter().collect::<Vec<_>>());
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(sweep_report_json(&a).unwrap(), sweep_report_json(&b).unwrap());
}

#[test]
fn decaying_potential_gets_the_naimark_report() {
    let sweep = run_sweep(&cfg("expdecay:A=1,k=5", &[10.0])).unwrap();
    let reports = sweep_reports(&sweep).unwrap();
    let r = reports.iter().find(|r| r.bound_name == "count_exponential").unwrap();
    assert!(r.satisfied);
    assert!(reports.iter().all(|r| r.bound_name != "count_compact"));
    assert!(sweep.rows[0].c2 > 0.0);
}

#[test]
fn eigenvalue_rows_respect_the_residual_tolerance() {
    let c = ExperimentConfig { r: Some(15.0), tol: 1e-9, ..ExperimentConfig::default() };
    let set = eigs_at(&c, &c.build_potential().unwrap(), 15.0).unwrap();
    assert!(set.entries.iter().all(|e| e.residual <= 1e-9));
    let csv = eigen_csv(&[&set]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), set.entries.len());
}

#[test]
fn verify_is_seeded() {
    let a = (verify_hpm(3, 2000), verify_gronwall(3, 50).unwrap(), verify_jensen(3, 10).unwrap());
    let b = (verify_hpm(3, 2000), verify_gronwall(3, 50).unwrap(), verify_jensen(3, 10).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.0.failed + a.1.failed + a.2.failed, 0);
}

#[test]
fn jensen_demo_refuses_potentials_beyond_the_barrier() {
    let c = ExperimentConfig { potential: "box:A=1,Q=30".into(), r: Some(20.0), ..ExperimentConfig::default() };
    assert!(matches!(jensen_demo(&c), Err(Error::Precondition(_))));
    let c = ExperimentConfig { potential: "expdecay:A=1,k=2".into(), r: Some(20.0), ..ExperimentConfig::default() };
    assert!(matches!(jensen_demo(&c), Err(Error::Precondition(_))));
}

#[test]
fn baselines_table_has_one_row_per_r() {
    let sweep = run_sweep(&cfg("box:A=1,Q=1", &[10.0, 20.0])).unwrap();
    let table = baselines_csv(&sweep).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("R,N,"));
    assert!(lines[1].starts_with("10,"));
}

#[test]
fn config_files_load_from_disk() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "potential = expdecay:A=1,k=5\nR_list = 20,40\nre_max = 10").unwrap();
    let c = ExperimentConfig::from_file(f.path()).unwrap();
    assert_eq!(c.r_values().unwrap(), vec![20.0, 40.0]);
    assert_eq!(c.re_max, Some(10.0));
    assert!(ExperimentConfig::from_file(std::path::Path::new("/nonexistent/cfg")).is_err());
}
