//! End-to-end checks of the `sib` binary: flag handling, CSV shapes, exit
//! codes, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn sib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn write_bsc(dir: &Path, crossover: f64) -> std::path::PathBuf {
    let same = 0.5 * (1.0 - crossover);
    let diff = 0.5 * crossover;
    let path = dir.join("source.txt");
    std::fs::write(
        &path,
        format!("x_alphabet: 0 1\ny_alphabet: 0 1\njoint:\n{same} {diff}\n{diff} {same}\n"),
    )
    .unwrap();
    path
}

#[test]
fn region_binary_prints_stage_lines() {
    let out = sib(&["region-binary", "--p", "0.2", "--rates", "0,0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        assert!(line.contains("Delta_max = 0.000000"), "{line}");
    }

    let out = sib(&["region-binary", "--p", "0.2", "--rates", "10,10"]);
    let text = stdout(&out);
    assert_eq!(text.matches("0.278072").count(), 2, "{text}");

    let out = sib(&["region-binary", "--p", "0.2", "--rates", "0.16,0.16"]);
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().contains("= 0.056"), "{text}");
}

#[test]
fn region_binary_rejects_negative_rates() {
    let out = sib(&["region-binary", "--p", "0.2", "--rates", "0.1,-0.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nonnegative"), "{}", stderr(&out));
}

#[test]
fn region_binary_rejects_bad_crossover() {
    let out = sib(&["region-binary", "--p", "0.7", "--rates", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[0, 1/2]"));
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = sib(&["region-binary", "--p", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tradeoff_binary_reports_threshold_footer() {
    let out = sib(&[
        "tradeoff", "--model", "binary", "--p", "0.2", "--fix", "2=0.11", "--grid", "50",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("rate,delta1,delta2\n"));
    let footer = text
        .lines()
        .find(|l| l.starts_with("# threshold:"))
        .expect("threshold footer");
    let grab = |key: &str| -> f64 {
        footer
            .split([' ', ','])
            .find_map(|tok| tok.strip_prefix(key))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((grab("Delta=") - 0.056).abs() < 5e-3, "{footer}");
    assert!((grab("R=") - 0.16).abs() < 5e-3, "{footer}");
}

#[test]
fn tradeoff_gaussian_reports_threshold_footer() {
    let out = sib(&[
        "tradeoff", "--model", "gaussian", "--snr-db", "5", "--fix", "2=0.5", "--grid", "50",
    ]);
    assert!(out.status.success());
    let footer_line = stdout(&out);
    let footer = footer_line
        .lines()
        .find(|l| l.starts_with("# threshold:"))
        .expect("threshold footer");
    assert!(footer.contains("Delta=2.7"), "{footer}");
    assert!(footer.contains("R=3.8") || footer.contains("R=3.9"), "{footer}");
}

#[test]
fn tradeoff_zero_fix_threshold_at_origin() {
    let out = sib(&[
        "tradeoff", "--model", "binary", "--p", "0.2", "--fix", "2=0", "--grid", "10",
    ]);
    let text = stdout(&out);
    let footer = text
        .lines()
        .find(|l| l.starts_with("# threshold:"))
        .expect("threshold footer");
    assert!(footer.contains("Delta=0.00000000e0"), "{footer}");
    assert!(footer.contains("R=0.00000000e0"), "{footer}");
}

#[test]
fn tradeoff_rejects_infeasible_fix_with_interval() {
    let out = sib(&[
        "tradeoff", "--model", "binary", "--p", "0.2", "--fix", "2=0.9", "--grid", "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("feasible interval"), "{}", stderr(&out));
}

#[test]
fn tradeoff_rows_sorted_and_round_trip_at_nine_digits() {
    let out = sib(&[
        "tradeoff", "--model", "binary", "--p", "0.15", "--fix", "1=0.1", "--grid", "40",
    ]);
    let text = stdout(&out);
    let mut prev = f64::NEG_INFINITY;
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        let rate: f64 = fields[0].parse().unwrap();
        assert!(rate >= prev, "rows must be sorted by rate");
        prev = rate;
        for field in fields {
            let value: f64 = field.parse().unwrap();
            assert_eq!(format!("{value:.8e}"), field, "nine-digit round trip");
        }
    }
}

#[test]
fn ba_zero_betas_gives_near_zero_point() {
    let dir = tempfile::tempdir().unwrap();
    let source = write_bsc(dir.path(), 0.1);
    let out = sib(&[
        "ba", "--source", source.to_str().unwrap(), "--betas", "0,0", "--seed", "1",
        "--restarts", "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let rate: f64 = fields[1].parse().unwrap();
        let relevance: f64 = fields[2].parse().unwrap();
        assert!(rate.abs() < 1e-6 && relevance.abs() < 1e-6, "{line}");
        assert_eq!(fields[5], "true");
    }
}

#[test]
fn ba_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let source = write_bsc(dir.path(), 0.1);
    let args = [
        "ba", "--source", source.to_str().unwrap(), "--betas", "4,8", "--seed", "7",
    ];
    let first = sib(&args);
    let second = sib(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn ba_point_lands_near_binary_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let source = write_bsc(dir.path(), 0.1);
    let out = sib(&[
        "ba", "--source", source.to_str().unwrap(), "--betas", "4,8", "--seed", "7",
    ]);
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .take(5)
                .map(|f| f.parse().unwrap())
                .collect()
        })
        .collect();
    let model = sib_core::BinaryModel::new(0.1, 2).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let boundary = sib_core::binary_max_relevance(&model, &rates).unwrap();
    for (row, cap) in rows.iter().zip(boundary) {
        assert!((row[2] - cap).abs() < 0.02, "relevance {} vs boundary {cap}", row[2]);
    }
}

#[test]
fn ba_sweep_orders_entries_and_reports_failures_inline() {
    let dir = tempfile::tempdir().unwrap();
    let source = write_bsc(dir.path(), 0.1);
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "# three vectors, one invalid\n1.0,2.0\n-1.0,2.0\n4.0,8.0\n").unwrap();
    let out = sib(&[
        "ba-sweep", "--source", source.to_str().unwrap(), "--beta-grid",
        grid.to_str().unwrap(), "--seed", "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let indices: Vec<usize> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    let mut sorted = indices.clone();
    sorted.sort_unstable();
    assert_eq!(indices, sorted);
    assert_eq!(indices.iter().filter(|&&i| i == 0).count(), 2);
    // The bad entry is diagnosed in place and does not abort the sweep.
    assert!(text.contains("# entry 1 failed:"), "{text}");
    assert!(indices.contains(&2));

    // Under --strict the same sweep exits with the numerical-failure code.
    let strict = sib(&[
        "ba-sweep", "--source", source.to_str().unwrap(), "--beta-grid",
        grid.to_str().unwrap(), "--seed", "3", "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn update_rule_flag_selects_equivalent_single_stage_map() {
    // The two exponents define the same map for one stage; the objective
    // column must agree across the flag values.
    let dir = tempfile::tempdir().unwrap();
    let source = write_bsc(dir.path(), 0.15);
    let objective = |rule: &str| -> f64 {
        let out = sib(&[
            "ba", "--source", source.to_str().unwrap(), "--betas", "3", "--seed", "9",
            "--update-rule", rule,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(4)
            .unwrap()
            .parse()
            .unwrap()
    };
    let stationary = objective("stationary");
    let scaled = objective("companion-scaled");
    assert!((stationary - scaled).abs() < 1e-6, "{stationary} vs {scaled}");
}

#[test]
fn source_parse_error_reports_line_and_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "x_alphabet: 0 1\ny_alphabet: 0 1\njoint:\n0.5 0.5\n0.1 x\n").unwrap();
    let out = sib(&["ba", "--source", path.to_str().unwrap(), "--betas", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));
}

#[test]
fn classify_bound_zero_rate_rows_are_half() {
    let out = sib(&[
        "classify-bound", "--p-list", "0.1,0.3", "--stages", "2", "--rate-grid", "0:1:3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("sum_rate,p,stage,error_bound\n"));
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let sum_rate: f64 = fields[0].parse().unwrap();
        let bound: f64 = fields[3].parse().unwrap();
        if sum_rate == 0.0 {
            assert_eq!(bound, 0.5, "{line}");
        }
    }
}

#[test]
fn classify_bound_increases_with_crossover() {
    let out = sib(&[
        "classify-bound", "--p-list", "0.1,0.2,0.3", "--stages", "3", "--rate-grid", "0:1.5:10",
    ]);
    let text = stdout(&out);
    // Group rows by (sum_rate, stage): the bound must rise with p.
    let mut groups: std::collections::BTreeMap<(String, usize), Vec<(f64, f64)>> =
        std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let key = (fields[0].to_string(), fields[2].parse().unwrap());
        groups
            .entry(key)
            .or_default()
            .push((fields[1].parse().unwrap(), fields[3].parse().unwrap()));
    }
    assert_eq!(groups.len(), 10 * 3);
    for ((rate, stage), mut entries) in groups {
        entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(entries.len(), 3);
        for w in entries.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-12,
                "rate {rate} stage {stage}: bound fell from {} to {}",
                w[0].1,
                w[1].1
            );
        }
    }
}

#[test]
fn out_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sib"))
        .args(["classify-bound", "--rate-grid", "0:1:2", "--out", "bounds.csv"])
        .env("SIB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("bounds.csv").exists());
}

#[test]
fn absolute_out_path_ignores_env() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("curve.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_sib"))
        .args([
            "tradeoff", "--model", "binary", "--p", "0.2", "--fix", "2=0.11", "--grid", "10",
            "--out", target.to_str().unwrap(),
        ])
        .env("SIB_OUT_DIR", "/nonexistent")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(target.exists());
}
