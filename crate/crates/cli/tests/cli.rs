use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stopgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stopgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const CONSTANT: &str = r#"{
  "grid": [0, "1/2", 1],
  "nodes": [
    {"id": 0, "depth": 0},
    {"id": 1, "depth": 1, "parent": 0, "p": "1/3"},
    {"id": 2, "depth": 1, "parent": 0, "p": "2/3"},
    {"id": 3, "depth": 2, "parent": 1, "p": "1"},
    {"id": 4, "depth": 2, "parent": 2, "p": "1/2"},
    {"id": 5, "depth": 2, "parent": 2, "p": "1/2"}
  ],
  "payoff": {"kind": "constant", "c": "7/2"}
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn counterexample_reports_one_zero_zero_one() {
    let out = stopgame(&["counterexample"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let g = &doc["instances"][0]["result"]["game_values"];
    assert_eq!([&g["A_upper"], &g["A_lower"], &g["B_upper"], &g["B_lower"]], ["1", "0", "0", "1"]);
    let switch = &doc["instances"][0]["result"]["half_switch_map"];
    assert_eq!(switch["type_ii"], true);
    assert!(switch["type_i"]["violation"].is_string());
    assert_eq!(stopgame(&["counterexample"]).stdout, out.stdout);
}

#[test]
fn constant_payoff_solves_to_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "constant.json", CONSTANT);
    let out = stopgame(&["solve", "--instance", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let result = &json(&out)["instances"][0]["result"];
    for family in ["V1", "V1+", "V2", "V2+"] {
        assert!(result["families"][family].as_array().unwrap().iter().all(|v| v == "7/2"));
    }
    for game in result["dynkin"].as_array().unwrap() {
        assert_eq!(game["closed_loop"]["root_value"], "7/2");
        assert_eq!(game["jj"]["value"], "7/2");
    }
    assert!(result["open_loop"].as_array().unwrap().iter().all(|d| d["value"] == "7/2"));
}

#[test]
fn refinement_csv_has_the_step_sizes() {
    let out = stopgame(&["refine", "--payoff", "abs_time_diff", "--levels", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["instance", "quantity", "value_num", "value_den", "mode", "witness_id"]);
    let spreads: Vec<(String, String, String)> = reader
        .records()
        .map(|r| r.unwrap())
        .filter(|r| r[1].contains("spread") && !r[1].contains("dvalue"))
        .map(|r| (r[1].to_string(), r[2].to_string(), r[3].to_string()))
        .collect();
    let expect = [("N=2:spread", "1", "2"), ("N=4:spread", "1", "4"), ("N=8:spread_bound", "1", "8")];
    assert_eq!(spreads.len(), 3);
    for (got, want) in spreads.iter().zip(expect) {
        assert_eq!((got.0.as_str(), got.1.as_str(), got.2.as_str()), want);
    }
}

#[test]
fn verify_passes_and_reports_every_check() {
    let out = stopgame(&["verify", "--instance", "cex", "--instance", "b2-table", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["status"], "PASS");
    for inst in doc["instances"].as_array().unwrap() {
        let checks = inst["result"]["checks"].as_array().unwrap();
        assert_eq!(checks.len(), 14);
        assert!(checks.iter().all(|c| c["status"] == "PASS"));
    }
}

#[test]
fn exit_codes() {
    assert_eq!(stopgame(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(stopgame(&["solve"]).status.code(), Some(1));
    assert_eq!(stopgame(&["refine", "--payoff", "w_process", "--mode", "rational"]).status.code(), Some(1));
    assert_eq!(stopgame(&["solve", "--instance", "no-such-fixture"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"grid\": [0, 1]");
    assert_eq!(stopgame(&["solve", "--instance", &broken]).status.code(), Some(2));
    let bad_tree = CONSTANT.replace("\"p\": \"2/3\"", "\"p\": \"1/3\"");
    let bad_tree = write(dir.path(), "bad_tree.json", &bad_tree);
    assert_eq!(stopgame(&["solve", "--instance", &bad_tree]).status.code(), Some(2));

    let capped = stopgame(&["oracle", "--instance", "cex", "--cap-maps", "2"]);
    assert_eq!(capped.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("capacity"));
    assert_eq!(stopgame(&["oracle", "--instance", "b2-table", "--cap-stopping-times", "4"]).status.code(), Some(3));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["verify", "--instance", "b2-table", "--instance", "cex", "--instance", "b1-table", "--format", "csv"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_stopgame"))
            .args(args)
            .env("STOPGAME_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(run("4").stdout, one.stdout);
    assert_eq!(run("0").status.code(), Some(1));
}

#[test]
fn report_aggregates_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("oracle.json");
    let b = dir.path().join("verify.json");
    let a = a.to_str().unwrap();
    let b = b.to_str().unwrap();
    assert_eq!(stopgame(&["oracle", "--instance", "cex", "--out", a]).status.code(), Some(0));
    assert_eq!(stopgame(&["verify", "--instance", "grid2", "--mode", "float", "--out", b]).status.code(), Some(0));

    let out = stopgame(&["report", a, b]);
    assert_eq!(out.status.code(), Some(0));
    let runs = json(&out)["instances"][0]["result"]["runs"].clone();
    assert_eq!(runs[0]["command"], "oracle");
    assert_eq!(runs[1]["mode"], "float");

    let csv_out = stopgame(&["report", a, b, "--format", "csv"]);
    let text = String::from_utf8(csv_out.stdout).unwrap();
    assert!(text.starts_with("instance,quantity,value_num,value_den,mode,witness_id\n"));
    assert!(text.contains("cex,A_upper,1,1,rational,map:0.0.0"));
    assert!(text.contains("grid2,A_upper,0.5,1,float,"));

    let junk = dir.path().join("junk.json");
    fs::write(&junk, "[]").unwrap();
    assert_eq!(stopgame(&["report", junk.to_str().unwrap()]).status.code(), Some(2));
}
