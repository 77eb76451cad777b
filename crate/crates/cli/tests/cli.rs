use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn dualgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualgame"))
        .args(args)
        .env_remove("DUALGAME_MAX_DIM")
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str], dir: &Path) -> (Output, Value) {
    let path = dir.join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--json", p]);
    let out = dualgame(&full);
    let doc = std::fs::read_to_string(&path)
        .map(|t| serde_json::from_str(&t).unwrap())
        .unwrap_or(Value::Null);
    (out, doc)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn presets_are_always_won_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["trine3", "sixpair4", "twopair4"] {
        let (out, doc) = json_report(&["run-game", "--preset", preset], dir.path());
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        for key in ["ways", "phases", "overall"] {
            let p = doc["results"]["exact"][key].as_f64().unwrap();
            assert!((p - 1.0).abs() <= 1e-9, "{preset} {key} = {p}");
        }
        assert_eq!(doc["verdicts"]["always_won"], "yes");
        assert_eq!(doc["command"], "run-game");
    }
}

#[test]
fn sampled_trine_game_is_always_won() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = json_report(
        &[
            "run-game", "--preset", "trine3", "--trials", "1000", "--seed", "7",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(doc["results"]["monte_carlo"]["rate"].as_f64(), Some(1.0));
    assert_eq!(doc["results"]["monte_carlo"]["wins"].as_u64(), Some(1000));
    assert!(doc["results"].get("exact").is_none());
    assert_eq!(doc["seed"], 7);
    let bound = doc["results"]["original_game_bound"].as_f64().unwrap();
    assert!((bound - 0.788675134595).abs() <= 1e-9);
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "run-game", "--preset", "sixpair4", "--trials", "2000", "--seed", "3", "--exact",
    ];
    let (oa, da) = json_report(&args, a.path());
    let (ob, db) = json_report(&args, b.path());
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(da, db);
    assert_eq!(da["inputs_digest"].as_str().unwrap().len(), 64);
    let (_, dc) = json_report(
        &[
            "run-game", "--preset", "sixpair4", "--trials", "2000", "--seed", "4", "--exact",
        ],
        a.path(),
    );
    assert_ne!(da["inputs_digest"], dc["inputs_digest"]);
}

#[test]
fn duality_saturation_by_preset() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = json_report(&["check-duality", "--preset", "twopair4"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = &doc["results"];
    assert!((r["phase_information"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert!((r["path_information"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert!(r["slack"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(doc["verdicts"]["saturated"], "yes");
    assert_eq!(doc["verdicts"]["duality"], "pass");

    let (out, doc) = json_report(&["check-duality", "--preset", "sixpair4"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(doc["verdicts"]["saturated"], "no");
    assert!(doc["results"]["slack"].as_f64().unwrap() > 1e-3);

    let (out, doc) = json_report(&["check-duality", "--preset", "trine3"], dir.path());
    assert_eq!(code(&out), 0);
    assert!((doc["results"]["slack"].as_f64().unwrap() - 0.415037499279).abs() <= 1e-9);
}

#[test]
fn partition_scan_for_six() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = json_report(&["scan-partitions", "--n-max", "6"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows: Vec<(u64, u64, String)> = doc["results"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["total"] == 6)
        .map(|r| {
            (
                r["n_ways"].as_u64().unwrap(),
                r["n_phases"].as_u64().unwrap(),
                r["verdict"].as_str().unwrap().into(),
            )
        })
        .collect();
    let get = |w, p| {
        rows.iter()
            .find(|r| r.0 == w && r.1 == p)
            .map(|r| r.2.as_str())
            .unwrap()
    };
    assert_eq!(get(1, 6), "feasible-with-equality");
    assert_eq!(get(2, 3), "feasible-with-equality");
    assert_eq!(get(2, 2), "feasible");
    assert_eq!(get(3, 3), "infeasible");
    assert_eq!(doc["verdicts"]["symmetric_rows_match_sqrt_rule"], "pass");
}

#[test]
fn partition_scan_respects_cap() {
    let out = dualgame(&["scan-partitions", "--n-max", "65"]);
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_dualgame"))
        .args(["scan-partitions", "--n-max", "20"])
        .env("DUALGAME_MAX_DIM", "16")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn fuzz_finds_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (out, doc) = json_report(&["fuzz", "--count", "1000", "--seed", "1"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(doc["verdicts"]["duality"], "pass");
    assert_eq!(doc["verdicts"]["holevo_dominance"], "pass");
    assert_eq!(
        doc["results"]["duality_violation_streams"],
        Value::Array(vec![])
    );
    assert!(doc["results"]["min_slack"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn fuzz_rejects_out_of_range_dims() {
    for dims in ["1-4", "2-9", "5-3", "x"] {
        let out = dualgame(&["fuzz", "--count", "5", "--dims", dims]);
        assert_eq!(code(&out), 2, "dims {dims}");
    }
    assert_eq!(code(&dualgame(&["fuzz", "--count", "5", "--dims", "3"])), 0);
}

#[test]
fn scenario_file_round_trip_through_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, r#"{"schema_version": 1, "preset": "twopair4"}"#).unwrap();
    let p = path.to_str().unwrap();
    let (out, from_file) = json_report(&["check-duality", "--scenario", p], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, from_preset) = json_report(&["check-duality", "--preset", "twopair4"], dir.path());
    assert_eq!(from_file, from_preset);
}

#[test]
fn malformed_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"schema_version\": 1,\n  \"n_paths\": 2,\n  \"weights\": [0.5, \"half\"]\n}\n",
    )
    .unwrap();
    let out = dualgame(&["run-game", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("weights[1]"), "{err}");
    assert!(err.contains("line 4"), "{err}");

    std::fs::write(
        &path,
        r#"{"schema_version": 1, "n_paths": 2, "weights": [0.7, 0.7]}"#,
    )
    .unwrap();
    let out = dualgame(&["run-game", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("weights"), "{}", stderr(&out));

    let out = dualgame(&[
        "run-game",
        "--scenario",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&dualgame(&["run-game"])), 2);
    assert_eq!(
        code(&dualgame(&[
            "run-game",
            "--preset",
            "trine3",
            "--scenario",
            "x.json"
        ])),
        2
    );
    assert_eq!(code(&dualgame(&["run-game", "--preset", "pentagon"])), 2);
    assert_eq!(
        code(&dualgame(&[
            "run-game", "--preset", "trine3", "--trials", "0"
        ])),
        2
    );
    assert_eq!(code(&dualgame(&["bogus"])), 2);
}

#[test]
fn dimension_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_dualgame"))
        .args(["run-game", "--preset", "sixpair4"])
        .env("DUALGAME_MAX_DIM", "8")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_dualgame"))
        .args(["run-game", "--preset", "trine3"])
        .env("DUALGAME_MAX_DIM", "6")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}
