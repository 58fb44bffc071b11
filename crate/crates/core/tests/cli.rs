use std::path::{Path, PathBuf};

use vgval::cli::run;
use vgval::garch::FitReport;

fn vgval(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["vgval"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn simulate_csv(dir: &Path, name: &str, preset: &str, length: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let (code, _, err) = vgval(&[
        "simulate",
        "--preset",
        preset,
        "--length",
        &length.to_string(),
        "--seed",
        &seed.to_string(),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    path
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn fit_recovers_reference_persistence() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "merval.csv", "merval", 5000, 11);
    let json = dir.path().join("fit.json");
    let (code, out, err) = vgval(&["fit", "--input", input.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("parameter") && out.contains("std. error") && out.contains("p-value"));
    for name in ["alpha0", "alpha1", "beta1", "gamma1", "dof"] {
        assert!(out.contains(name));
    }
    let report: FitReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let se = report.persistence_std_error().unwrap();
    let persistence = report.params.persistence();
    assert!((persistence - 0.966).abs() <= 3.0 * se, "{persistence} +- {se}");
}

#[test]
fn fit_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "sp.csv", "sp500", 600, 2);
    let json = dir.path().join("fit.json");
    let (code, out, _) = vgval(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let from_file: FitReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let from_stdout: FitReport = serde_json::from_str(&out).unwrap();
    assert_eq!(from_file, from_stdout);
    let again: FitReport = serde_json::from_str(&serde_json::to_string(&from_file).unwrap()).unwrap();
    assert_eq!(again, from_file);
}

#[test]
fn short_or_malformed_input_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "short.csv", "sp500", 100, 1);
    let (code, _, err) = vgval(&["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("250"), "{err}");

    let (code, _, err) = vgval(&["fit", "--input", input.to_str().unwrap(), "--price-column", "price"]);
    assert_eq!(code, 2);
    assert!(err.contains("price"));

    assert_eq!(vgval(&["fit", "--input", "/nonexistent/x.csv"]).0, 2);
    assert_eq!(vgval(&["bogus"]).0, 2);
    assert_eq!(vgval(&["--help"]).0, 0);
}

#[test]
fn indicator_window_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 2999, 5);
    let args = |out: &str| {
        vec![
            "indicator".to_string(),
            "--input".into(),
            input.to_str().unwrap().into(),
            "--preset".into(),
            "sp500".into(),
            "--ensemble-size".into(),
            "40".into(),
            "--seed".into(),
            "9".into(),
            "--quiet".into(),
            "--output".into(),
            dir.path().join(out).to_str().unwrap().into(),
        ]
    };
    let run_to = |out: &str| {
        let a = args(out);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(vgval(&refs).0, 0);
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run_to("a.csv");
    let b = run_to("b.csv");
    assert_eq!(a, b);
    // length counts returns; one extra price row
    assert_eq!(data_rows(&a).len(), (3000 - 1 - 500) / 60 + 1);
    assert!(a.contains("# seed=9\n"));
    assert_eq!(column(&a, "end_index")[0], "500");
}

#[test]
fn rho_one_validates_every_edge() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "dax", 800, 6);
    let (code, out, err) = vgval(&[
        "indicator",
        "--input",
        input.to_str().unwrap(),
        "--rho",
        "1.0",
        "--window",
        "300",
        "--shift",
        "100",
        "--ensemble-size",
        "20",
        "--quiet",
    ]);
    assert_eq!(code, 0, "{err}");
    let n = column(&out, "n");
    let deg = column(&out, "mean_deg_vg");
    assert_eq!(n.len(), (800 - 300) / 100 + 1);
    for (n, d) in n.iter().zip(&deg) {
        let edges = d.parse::<f64>().unwrap() * 300.0 / 2.0;
        assert_eq!(n.parse::<f64>().unwrap(), edges.round());
    }
}

#[test]
fn indicator_json_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 400, 7);
    let labels = dir.path().join("events.txt");
    std::fs::write(&labels, "# crises\n2008-09-15\n2011-08-05\n").unwrap();
    let (code, out, _) = vgval(&[
        "indicator",
        "--input",
        input.to_str().unwrap(),
        "--preset",
        "sp500",
        "--window",
        "200",
        "--ensemble-size",
        "10",
        "--labels",
        labels.to_str().unwrap(),
        "--format",
        "json",
        "--quiet",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["provenance"]["events"], serde_json::json!(["2008-09-15", "2011-08-05"]));
    assert_eq!(v["provenance"]["config"]["window"], 200);
    assert_eq!(v["run"]["common"]["seed"], 0);
    assert_eq!(v["records"].as_array().unwrap().len(), (400 - 200) / 60 + 1);
}

#[test]
fn sweep_grid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 700, 8);
    let out = dir.path().join("sweep");
    let (code, _, err) = vgval(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--preset",
        "sp500",
        "--rhos",
        "0.05,0.1",
        "--windows",
        "250,500",
        "--shifts",
        "60",
        "--ensemble-size",
        "30",
        "--quiet",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let mut files: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|f| f.starts_with("indicator_"))
        .collect();
    files.sort();
    assert_eq!(
        files,
        vec![
            "indicator_rho0.05_w250_l60.csv",
            "indicator_rho0.05_w500_l60.csv",
            "indicator_rho0.1_w250_l60.csv",
            "indicator_rho0.1_w500_l60.csv",
        ]
    );
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(data_rows(&summary).len(), 2);

    let (code, _, _) = vgval(&["sweep", "--input", input.to_str().unwrap(), "--rhos", "1.5", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn degenerate_sweep_matches_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 500, 9);
    let common = ["--preset", "sp500", "--ensemble-size", "25", "--window", "250", "--quiet"];
    let mut ind = vec!["indicator", "--input", input.to_str().unwrap()];
    ind.extend(common);
    let (code, single, _) = vgval(&ind);
    assert_eq!(code, 0);
    let out = dir.path().join("sweep");
    let mut sw = vec![
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--rhos",
        "0.1",
        "--windows",
        "250",
        "--shifts",
        "60",
        "--output",
        out.to_str().unwrap(),
    ];
    sw.extend(common);
    assert_eq!(vgval(&sw).0, 0);
    let grid = std::fs::read_to_string(out.join("indicator_rho0.1_w250_l60.csv")).unwrap();
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# run=")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&single), strip(&grid));
}

#[test]
fn probe_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 600, 10);
    let out = dir.path().join("probe");
    let (code, _, err) = vgval(&[
        "probe",
        "--input",
        input.to_str().unwrap(),
        "--preset",
        "sp500",
        "--window",
        "200",
        "--ensemble-size",
        "100",
        "--null-samples",
        "20",
        "--stability-sizes",
        "10,1000",
        "--repeats",
        "20",
        "--quiet",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let profile = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    assert_eq!(data_rows(&profile).len(), 199);
    let stability = std::fs::read_to_string(out.join("stability.csv")).unwrap();
    let cv: Vec<f64> = column(&stability, "coefficient_of_variation")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(cv.len(), 2);
    assert!(cv[0] > cv[1], "{cv:?}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let p = summary["rank_sum"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let degrees = std::fs::read_to_string(out.join("degrees.csv")).unwrap();
    let null_total: u64 = column(&degrees, "null").iter().map(|v| v.parse::<u64>().unwrap()).sum();
    assert_eq!(null_total, 20 * 600);
}

// Same limitation as the pooled degree comparison in the pipeline tests.
#[test]
#[ignore = "pooled-degree rank-sum test is liberal under volatility clustering"]
fn probe_calibration_on_own_null() {
    let dir = tempfile::tempdir().unwrap();
    let mut accepted = 0;
    for seed in 0..100u64 {
        let input = simulate_csv(dir.path(), "s.csv", "sp500", 1000, 1000 + seed);
        let out = dir.path().join("p");
        let s = seed.to_string();
        let (code, _, _) = vgval(&[
            "probe",
            "--input",
            input.to_str().unwrap(),
            "--window",
            "100",
            "--ensemble-size",
            "10",
            "--null-samples",
            "50",
            "--stability-sizes",
            "",
            "--seed",
            &s,
            "--quiet",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        if summary["rank_sum"]["p_value"].as_f64().unwrap() > 0.05 {
            accepted += 1;
        }
    }
    assert!(accepted >= 90, "{accepted} of 100");
}

#[test]
fn graph_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.csv");
    std::fs::write(&input, "date,close\n2020-01-01,3\n2020-01-02,1\n2020-01-03,2\n2020-01-04,0.5\n").unwrap();
    let (code, out, _) = vgval(&["graph", "--input", input.to_str().unwrap(), "--series", "price", "--quiet"]);
    assert_eq!(code, 0);
    assert_eq!(data_rows(&out), vec!["1,2", "1,3", "2,3", "3,4"]);
    let (code, out, _) = vgval(&[
        "graph",
        "--input",
        input.to_str().unwrap(),
        "--series",
        "price",
        "--kind",
        "ivg",
        "--format",
        "json",
        "--quiet",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["edges"], serde_json::json!([[2, 4]]));
}

#[test]
fn config_file_feeds_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulate_csv(dir.path(), "null.csv", "sp500", 300, 12);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "window=150\nshift=50\nensemble_size=10\npreset=sp500\nquiet=true\n").unwrap();
    let (code, out, err) = vgval(&[
        "indicator",
        "--input",
        input.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--shift",
        "75",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(err.is_empty());
    assert_eq!(column(&out, "end_index"), vec!["150", "225", "300"]);
}
