use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcolor(args: &[&str]) -> Output {
    tcolor_threads(args, None)
}

fn tcolor_threads(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tcolor"));
    cmd.args(args).env_remove("TCOLOR_THREADS");
    if let Some(t) = threads {
        cmd.env("TCOLOR_THREADS", t.to_string());
    }
    cmd.output().expect("tcolor runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_records(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn record<'a>(records: &'a [Value], kind: &str, name: Option<&str>) -> &'a Value {
    records
        .iter()
        .find(|r| r["record"] == kind && name.is_none_or(|n| r["name"] == n))
        .unwrap_or_else(|| panic!("no {kind} record"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_verify_and_color_in_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let out = tcolor(&["build", "--n", "1", "--R", "8", "--seed", "0", "--out", path_str(&file), "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = json_records(&out);
    assert_eq!(record(&recs, "check", Some("covering"))["passed"], true);
    assert_eq!(record(&recs, "build", None)["x_default"], true);

    let out = tcolor(&["verify", "--coloring", path_str(&file), "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = json_records(&out);
    assert_eq!(record(&recs, "verify", None)["sampling_matches_seed"], true);
    for name in ["separation", "covering", "site-count", "cell-faces", "s-separation", "red-pair"] {
        assert_eq!(record(&recs, "check", Some(name))["passed"], true, "{name}");
    }

    let out = tcolor(&["color", "--coloring", path_str(&file), "--at", "-3.25"]);
    assert_eq!(out.status.code(), Some(0));
    let word = stdout(&out);
    assert!(word == "red\n" || word == "blue\n", "{word:?}");
}

#[test]
fn overridden_x_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let out = tcolor(&["build", "--n", "2", "--R", "2.5", "--x", "0.05", "--seed", "1", "--out", path_str(&file), "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = json_records(&out);
    let build = record(&recs, "build", None);
    assert_eq!(build["x_default"], false);
    assert_eq!(build["x"].as_f64(), Some(0.05));
    assert_eq!(record(&recs, "check", Some("covering"))["passed"], true);
}

#[test]
fn small_periods_need_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let f = path_str(&file);
    assert_eq!(tcolor(&["build", "--n", "1", "--R", "1.5", "--out", f]).status.code(), Some(2));
    assert_eq!(tcolor(&["build", "--n", "1", "--R", "1.9", "--out", f]).status.code(), Some(2));
    assert_eq!(tcolor(&["build", "--n", "1", "--R", "1.5", "--allow-small-R", "--out", f]).status.code(), Some(2));
    assert_eq!(tcolor(&["build", "--n", "1", "--R", "1.9", "--allow-small-R", "--out", f]).status.code(), Some(0));
    assert_eq!(tcolor(&["verify", "--coloring", f]).status.code(), Some(0));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_reports_close_red_sites() {
    // two S members 5/3 apart on a circle of length 6, no margin
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<String> = (0..18).map(|i| format!("{}", i as f64 / 3.0)).collect();
    let text = format!(
        "1 6 0.3333333333333333 18\n{}\n0.05 0 1e-9\n0 5\n0 5\n",
        pts.join("\n")
    );
    // sites are i/3 apart by construction; ids 0 and 5 lie at 0 and 5/3
    let f = write(dir.path(), "close.txt", &text);
    let out = tcolor(&["verify", "--coloring", &f, "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = json_records(&out);
    let red = record(&recs, "check", Some("red-pair"));
    assert_eq!(red["separation_passed"], false);
    assert_eq!(red["covering_passed"], true);
    assert!(red["failures"].as_str().unwrap().starts_with("(b)"));
    assert_eq!(record(&recs, "verify", None)["sampling_matches_seed"], false);

    // red sites one apart: whole intervals of red unit pairs
    let text = text.replace("\n0 5\n0 5\n", "\n0 3\n0 3\n");
    let f = write(dir.path(), "closer.txt", &text);
    let out = tcolor(&["search-red", "--coloring", &f, "--trials", "20000", "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(1));
    let found = &json_records(&out)[1];
    assert_eq!(found["found"], true);
    assert!((found["distance"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn verify_rejects_a_short_period() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "short.txt",
        "1 1.6 0.3333333333333333 4\n0\n0.4\n0.8\n1.2\n0.2 0 1e-9\n0\n0\n",
    );
    let out = tcolor(&["verify", "--coloring", &f, "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = json_records(&out);
    let red = record(&recs, "check", Some("red-pair"));
    assert_eq!(red["period_passed"], false);
    assert_eq!(red["covering_passed"], true);
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(tcolor(&["verify", "--coloring", path_str(&missing)]).status.code(), Some(3));
    let garbage = write(dir.path(), "bad.txt", "1 4 nope 2\n");
    let out = tcolor(&["verify", "--coloring", &garbage]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert_eq!(tcolor(&["build", "--n", "1"]).status.code(), Some(2));
    assert_eq!(tcolor(&["bounds", "--n", "2", "--R", "4"]).status.code(), Some(2));
}

#[test]
fn bounds_reports() {
    let out = tcolor(&["bounds", "--n", "2", "--R", "4", "--K", "2e8", "--format", "json-lines"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json_records(&out)[1];
    assert_eq!(r["feasible"], true);
    assert!(r["margin_a"].as_f64().unwrap() > 0.0 && r["margin_b"].as_f64().unwrap() > 0.0);

    let out = tcolor(&["bounds", "--n", "1", "--R", "4", "--min-k", "--format", "json-lines"]);
    let min_k = json_records(&out)[1]["min_k"].as_f64().unwrap();
    let feasible = |k: f64| {
        let out = tcolor(&["bounds", "--n", "1", "--R", "4", "--K", &k.to_string(), "--format", "json-lines"]);
        json_records(&out)[1]["feasible"].as_bool().unwrap()
    };
    assert!(feasible(min_k) && !feasible(min_k - 1.0));

    let out = tcolor(&["bounds", "--n", "1", "--ell-m", "1e5", "--format", "json-lines"]);
    assert_eq!(json_records(&out)[1]["hypothesis_holds"], false);
}

#[test]
fn searches_and_exact_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let f = path_str(&file);
    let built = tcolor(&["build", "--n", "1", "--R", "7.3", "--x", "0.3", "--seed", "2", "--out", f]);
    assert_eq!(built.status.code(), Some(0));
    let exact = tcolor(&["exact-1d", "--coloring", f, "--format", "json-lines"]);
    let exact = json_records(&exact)[1]["longest_blue_run"].as_str().unwrap().to_string();
    let longest = tcolor(&["search-blue", "--coloring", f, "--longest", "--trials", "2000", "--format", "json-lines"]);
    let mc = json_records(&longest)[1]["longest_blue_run"].as_u64().unwrap();
    if let Ok(e) = exact.parse::<u64>() {
        assert!(mc <= e, "mc {mc} exact {e}");
    }

    let k = write(dir.path(), "k.txt", "0\n1\n2.5\n");
    let placed = tcolor(&["search-blue", "--coloring", f, "--k", &k, "--trials", "1000", "--format", "json-lines"]);
    assert_eq!(placed.status.code(), Some(0));
    assert_eq!(json_records(&placed)[1]["k"], 3);
}

#[test]
fn runs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let f = path_str(&file);
    let build = |threads| {
        let out = tcolor_threads(&["build", "--n", "2", "--R", "4", "--x", "0.1", "--seed", "3", "--out", f], Some(threads));
        (stdout(&out), std::fs::read_to_string(&file).unwrap())
    };
    assert_eq!(build(1), build(2));
    for args in [
        vec!["search-red", "--coloring", f, "--trials", "5000", "--format", "json-lines"],
        vec!["search-blue", "--coloring", f, "--m", "4", "--trials", "5000", "--format", "csv"],
        vec!["search-blue", "--coloring", f, "--longest", "--trials", "500"],
        vec!["verify", "--coloring", f],
        vec!["sweep", "--n", "1,2", "--R", "3", "--seed", "0", "--trials", "300", "--resample-trials", "500", "--density-samples", "2000", "--format", "csv"],
    ] {
        let one = tcolor_threads(&args, Some(1));
        let two = tcolor_threads(&args, Some(2));
        assert_eq!(one.status.code(), two.status.code());
        assert_eq!(stdout(&one), stdout(&two), "{args:?}");
    }
}

#[test]
fn sweep_matches_individual_commands_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = tcolor(&[
        "sweep", "--n", "1", "--R", "5.5", "--x", "0.2", "--seed", "4", "--trials", "1000",
        "--resample-trials", "2000", "--density-samples", "5000", "--out", path_str(&csv_path), "--format", "json-lines",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cell = json_records(&out)[1].clone();

    let file = dir.path().join("c.txt");
    let built = tcolor(&[
        "build", "--n", "1", "--R", "5.5", "--x", "0.2", "--seed", "4", "--density-samples", "5000",
        "--out", path_str(&file), "--format", "json-lines",
    ]);
    let build = json_records(&built)[1].clone();
    for key in ["sites", "q", "s", "red_density", "min_s_distance", "x"] {
        assert_eq!(cell[key], build[key], "{key}");
    }
    let longest = tcolor(&["search-blue", "--coloring", path_str(&file), "--longest", "--trials", "1000", "--m-max", "1024", "--seed", "4", "--format", "json-lines"]);
    assert_eq!(cell["longest_blue_run"], json_records(&longest)[1]["longest_blue_run"]);
    let exact = tcolor(&["exact-1d", "--coloring", path_str(&file), "--format", "json-lines"]);
    assert_eq!(cell["exact_blue_run"], json_records(&exact)[1]["longest_blue_run"]);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    for (h, v) in headers.iter().zip(rows[0].iter()) {
        if h == "record" {
            assert_eq!(v, "cell");
            continue;
        }
        let expected = &cell[h];
        match expected {
            Value::Number(n) => assert_eq!(v.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{h}"),
            Value::Bool(b) => assert_eq!(v, b.to_string()),
            Value::String(s) => assert_eq!(v, s),
            other => panic!("{h}: {other:?}"),
        }
    }
}

#[test]
fn sweep_rows_respect_the_exact_oracle() {
    let out = tcolor(&[
        "sweep", "--n", "1", "--R", "2.5,3.7,6.2", "--x", "0.3,0.6", "--seed", "0,1", "--trials", "1000",
        "--resample-trials", "500", "--density-samples", "1000", "--format", "json-lines",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cells: Vec<Value> = json_records(&out).into_iter().filter(|r| r["record"] == "cell").collect();
    assert_eq!(cells.len(), 12);
    for c in cells {
        let mc = c["longest_blue_run"].as_u64().unwrap();
        if let Ok(e) = c["exact_blue_run"].as_str().unwrap().parse::<u64>() {
            assert!(mc <= e, "{c}");
        }
        assert_eq!(c["red_pair_passed"], true);
    }
}
