//! Every registered experiment at a small scale: runs, writes, and keeps its schema.

use timechange_core::config::ExperimentConfig;
use timechange_core::experiments::{self, EXPERIMENTS};

fn small(name: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name).unwrap();
    cfg.samples = 200;
    for (key, value) in [
        ("lifetime_samples", "200"),
        ("msd_samples", "200"),
        ("clock_samples", "100"),
        ("points", "5"),
        ("dt_x", "1e-2"),
    ] {
        if cfg.parameters.contains_key(key) {
            cfg.set_parameter(key, value).unwrap();
        }
    }
    cfg
}

#[test]
fn all_experiments_write_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    for e in EXPERIMENTS {
        let mut cfg = small(e.name);
        cfg.output_dir = dir.path().to_path_buf();
        let report = experiments::run(&cfg).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        let csv = std::fs::read_to_string(&report.csv_path).unwrap();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        let expected: Vec<&str> = e.columns.iter().map(|c| c.0).collect();
        assert_eq!(header, expected, "{}", e.name);
        assert!(csv.lines().count() > 1, "{}", e.name);
        let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(&report.summary_path).unwrap()).unwrap();
        assert_eq!(summary["experiment"], e.name);
        assert!(summary["wall_time_seconds"].as_f64().unwrap() >= 0.0);
        assert!(!summary["checks"].as_array().unwrap().is_empty(), "{}", e.name);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    for name in ["ex1_inverse_stable_msd", "ex6_gamma_subordinator", "thm_lifetimes"] {
        let mut a = small(name);
        a.threads = Some(1);
        let mut b = small(name);
        b.threads = Some(4);
        let (x, y) = (experiments::compute(&a).unwrap(), experiments::compute(&b).unwrap());
        assert_eq!(x.table.to_csv().unwrap(), y.table.to_csv().unwrap(), "{name}");
    }
}

#[test]
fn seed_changes_output() {
    let a = small("ex3_halfline");
    let mut b = small("ex3_halfline");
    b.seed += 1;
    assert_ne!(experiments::compute(&a).unwrap().table.rows, experiments::compute(&b).unwrap().table.rows);
}

#[test]
fn fbm_table_reproduces_the_four_cells() {
    let mut cfg = small("ex8_fbm_table");
    cfg.samples = 2000;
    cfg.set_parameter("lifetime_samples", "5000").unwrap();
    cfg.set_parameter("slope_tol", "0.1").unwrap();
    cfg.set_parameter("level_tol", "0.2").unwrap();
    let out = experiments::compute(&cfg).unwrap();
    let cells = out.results["cells"].as_array().unwrap();
    let got: Vec<(String, String)> =
        cells.iter().map(|c| (c["verdict"].as_str().unwrap().into(), c["diffusion"].as_str().unwrap().into())).collect();
    let want = [("rushed", "sub"), ("rushed", "super"), ("delayed", "sub"), ("delayed", "super")];
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0.as_str(), g.1.as_str()), w);
    }
}
