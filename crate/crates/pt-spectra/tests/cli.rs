//! End-to-end checks of the command-line surface: subcommand output
//! formats, exit codes, determinism, and the CSV round trip into `wkbfit`.

use pt_spectra::analysis::wkb_growth_fit;
use pt_spectra::cli::run;
use std::fs;
use std::path::Path;

fn run_args(args: &[&str]) -> i32 {
    let argv = std::iter::once("pt-spectra").chain(args.iter().copied());
    run(argv)
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn shoot_emits_oscillator_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ho.csv");
    let code = run_args(&[
        "shoot", "--epsilon", "0", "--emin", "0", "--emax", "8",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,epsilon,branch,index,re_E,im_E,residual,N");
    assert_eq!(lines.len(), 5);
    for (line, want) in lines[1..].iter().zip([1.0, 3.0, 5.0, 7.0]) {
        let re_e: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((re_e - want).abs() < 1e-8, "{line}");
        assert!(line.ends_with(','), "N column must be empty: {line}");
    }
}

#[test]
fn shoot_branch_one_negative_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("neg.csv");
    let code = run_args(&[
        "shoot", "--epsilon", "0", "--branch", "1", "--emin", "-8", "--emax", "0",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4);
    for (got, want) in values.iter().zip([-7.0, -5.0, -3.0, -1.0]) {
        assert!((got - want).abs() < 1e-8);
    }
}

#[test]
fn shoot_empty_window_emits_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    let code = run_args(&[
        "shoot", "--epsilon", "0", "--emin", "1.5", "--emax", "2.5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(read(&out), "method,epsilon,branch,index,re_E,im_E,residual,N\n");
}

#[test]
fn truncate_rows_keep_conjugate_partners_adjacent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t20.csv");
    let code = run_args(&[
        "truncate", "--epsilon", "1", "--n", "20",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let rows: Vec<(f64, f64, &str)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[4].parse().unwrap(), f[5].parse().unwrap(), f[7])
        })
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.2 == "20"));
    let mut i = 0;
    while i < rows.len() {
        let (re, im, _) = rows[i];
        if im.abs() > 1e-8 * (1.0 + re.abs()) {
            let (re2, im2, _) = rows[i + 1];
            assert!((re - re2).abs() <= 1e-8 * (1.0 + re.abs()), "row {i}");
            assert!((im + im2).abs() <= 1e-8 * (1.0 + im.abs()), "row {i}");
            i += 2;
        } else {
            i += 1;
        }
    }
}

#[test]
fn truncate_writes_matrix_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let matrix = dir.path().join("h.csv");
    let code = run_args(&[
        "truncate", "--epsilon", "1", "--n", "2",
        "--matrix-out", matrix.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&matrix);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,col,re,im");
    assert_eq!(lines.len(), 5);
    // entry (0, 1) of the eps = 1 section is i*3/(2*sqrt(2))
    let f: Vec<&str> = lines[2].split(',').collect();
    assert_eq!((f[0], f[1]), ("0", "1"));
    let im: f64 = f[3].parse().unwrap();
    assert!((im - 1.0606601717798212).abs() < 1e-11);
}

#[test]
fn compare_json_reports_settled_count_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.json");
    let code = run_args(&[
        "compare", "--epsilon", "1", "--levels", "6", "--nmax", "100",
        "--format", "json", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let settled = doc["settled_count"].as_u64().unwrap();
    assert!((4..=10).contains(&settled), "settled {settled}");
    assert_eq!(doc["basis_valid"], serde_json::json!(true));
    assert_eq!(doc["verdicts"].as_array().unwrap().len(), 6);
    assert!(doc["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v == "artifact"));
}

#[test]
fn wkbfit_round_trip_matches_in_process_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ix3.csv");
    let code = run_args(&[
        "shoot", "--epsilon", "1", "--emin", "0", "--emax", "21", "--grid", "201",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let fit_out = dir.path().join("fit.csv");
    let code = run_args(&[
        "wkbfit", "--input", csv.to_str().unwrap(), "--from", "0", "--to", "5",
        "--out", fit_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&fit_out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let slope: f64 = fields[3].parse().unwrap();
    let stderr: f64 = fields[4].parse().unwrap();

    // recompute from the same CSV contents
    let levels: Vec<(usize, f64)> = read(&csv)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    let fit = wkb_growth_fit(&levels, 0, 5).unwrap();
    // the emitted numbers carry exactly 12 significant digits; the CLI adds
    // no error beyond that pinned formatting
    assert_eq!(slope, pt_spectra::cli::round_sig(fit.slope));
    assert_eq!(stderr, pt_spectra::cli::round_sig(fit.stderr));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let code = run_args(&[
            "shoot", "--epsilon", "1.5", "--emin", "0", "--emax", "10",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let ja = dir.path().join("a.json");
    let jb = dir.path().join("b.json");
    for out in [&ja, &jb] {
        let code = run_args(&[
            "wedges", "--epsilon", "2.5", "--format", "json",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(fs::read(&ja).unwrap(), fs::read(&jb).unwrap());
}

#[test]
fn wedge_svg_labels_follow_geometry() {
    let dir = tempfile::tempdir().unwrap();
    for (eps, labels) in [
        ("0", vec!["0.0&#176;", "180.0&#176;", "opening = 90.0&#176;"]),
        ("1", vec!["-18.0&#176;", "-162.0&#176;", "opening = 72.0&#176;"]),
        ("2", vec!["-30.0&#176;", "-150.0&#176;", "opening = 60.0&#176;"]),
    ] {
        let svg = dir.path().join(format!("w{eps}.svg"));
        let code = run_args(&[
            "wedges", "--epsilon", eps, "--svg", svg.to_str().unwrap(),
            "--out", dir.path().join("geo.csv").to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = read(&svg);
        for label in labels {
            assert!(text.contains(label), "eps={eps}: missing {label}");
        }
        assert!(text.contains("polyline"));
    }
}

#[test]
fn exit_codes_distinguish_usage_and_domain_errors() {
    // missing required argument: usage error
    assert_eq!(run_args(&["shoot", "--epsilon", "0", "--emin", "0"]), 2);
    assert_eq!(run_args(&["nonsense"]), 2);
    // unsupported truncation deformation: domain error
    assert_eq!(run_args(&["truncate", "--epsilon", "3", "--n", "10"]), 1);
    // negative epsilon: domain error
    assert_eq!(
        run_args(&["shoot", "--epsilon", "-1", "--emin", "0", "--emax", "4"]),
        1
    );
    // inverted window: domain error
    assert_eq!(
        run_args(&["shoot", "--epsilon", "0", "--emin", "5", "--emax", "1"]),
        1
    );
    // --help is not an error
    assert_eq!(run_args(&["--help"]), 0);
}

#[test]
fn thread_cap_env_is_honored_in_subprocess() {
    let bin = env!("CARGO_BIN_EXE_pt-spectra");
    let out = std::process::Command::new(bin)
        .args(["shoot", "--epsilon", "0", "--emin", "0", "--emax", "8"])
        .env("PT_SPECTRA_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let single = String::from_utf8(out.stdout).unwrap();
    let out = std::process::Command::new(bin)
        .args(["shoot", "--epsilon", "0", "--emin", "0", "--emax", "8"])
        .env("PT_SPECTRA_THREADS", "0")
        .output()
        .unwrap();
    assert!(out.status.success());
    let auto = String::from_utf8(out.stdout).unwrap();
    assert_eq!(single, auto, "thread cap must not change results");
    assert!(single.lines().count() == 5);
}
