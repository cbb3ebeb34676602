use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimo-sdr"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mimo-sdr-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_check_solve_and_oracle_agree() {
    let dir = scratch("single");
    let inst = dir.join("inst.json");
    run(bin().args(["--seed", "3", "generate", "--m", "4", "--n", "2", "-M", "8", "--snr-db", "20", "--out"]).arg(&inst));

    let report = json(&run(bin().arg("check").arg("--instance").arg(&inst)));
    assert!(report["esdry_necessary"].is_boolean());

    let ml = json(&run(bin().arg("oracle").arg("--instance").arg(&inst)));
    assert_eq!(ml["num_candidates"], 64);

    let sol = json(&run(bin().args(["solve", "--model", "ESDR-Y", "--instance"]).arg(&inst)));
    assert_eq!(sol["status"], "Solved");
    let bound = sol["objective_with_constant"].as_f64().unwrap();
    assert!(bound <= ml["objective"].as_f64().unwrap() + 1e-6);
}

#[test]
fn simulate_writes_header_and_one_row_per_snr() {
    let dir = scratch("sim");
    let csv = dir.join("sweep.csv");
    let records = dir.join("trials.jsonl");
    run(bin()
        .args(["--seed", "11", "simulate", "--m", "4", "--n", "2", "--snr", "5,15", "--trials", "3", "--models", "ESDR-X"])
        .arg("--records")
        .arg(&records)
        .arg("--out")
        .arg(&csv));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("snr_db,trials,ESDR-X_solved"));
    assert!(lines[0].ends_with("wall_seconds"));
    let width = lines[0].split(',').count();
    assert!(lines[1..].iter().all(|l| l.split(',').count() == width));
    assert_eq!(std::fs::read_to_string(&records).unwrap().lines().count(), 6);
}

#[test]
fn sweep_is_reproducible_from_a_config_file() {
    let dir = scratch("cfg");
    let cfg = dir.join("exp.toml");
    std::fs::write(
        &cfg,
        "m = 3\nn = 2\nM = 8\nsnr_grid_db = [10.0]\ntrials_per_point = 2\nmodels = [\"ESDR-Y\"]\nconditions = [\"esdry_necessary\"]\nmaster_seed = 5\n",
    )
    .unwrap();
    let a = run(bin().arg("--config").arg(&cfg).arg("simulate"));
    let b = run(bin().arg("--config").arg(&cfg).args(["--workers", "1", "simulate"]));
    let strip = |o: &Output| -> Vec<String> {
        // the timing columns differ between runs
        String::from_utf8_lossy(&o.stdout).lines().map(|l| l.split(',').take(6).collect::<Vec<_>>().join(",")).collect()
    };
    assert_eq!(strip(&a), strip(&b));
    assert!(String::from_utf8_lossy(&a.stdout).contains("esdry_necessary_freq"));
}

#[test]
fn partition_lift_and_restrict_round_trip() {
    let dir = scratch("lift");
    let part = dir.join("part.json");
    run(bin().args(["partition", "--shat", "1:8", "--out"]).arg(&part));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&part).unwrap()).unwrap();
    let p: Vec<Vec<f64>> = serde_json::from_value(doc["p"].clone()).unwrap();

    // vertex t = e_2
    let t: Vec<f64> = (0..8).map(|j| if j == 2 { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = p.iter().map(|row| row.iter().zip(&t).map(|(a, b)| a * b).sum()).collect();
    let outer = |v: &[f64]| -> Vec<Vec<f64>> { v.iter().map(|a| v.iter().map(|b| a * b).collect()).collect() };
    let point = serde_json::json!({
        "y": y,
        "yy": outer(&y),
        "groups": [{ "t": t, "tt": outer(&t) }],
    });
    let point_path = dir.join("point.json");
    std::fs::write(&point_path, point.to_string()).unwrap();

    let lifted = run(bin().arg("lift").arg("--partition").arg(&part).arg("--point").arg(&point_path));
    let lifted_path = dir.join("lifted.json");
    std::fs::write(&lifted_path, &lifted.stdout).unwrap();
    let lv = json(&lifted);
    let lt: Vec<f64> = serde_json::from_value(lv["t"].clone()).unwrap();
    assert!(lt.iter().zip(&t).all(|(a, b)| (a - b).abs() < 1e-9));

    let back = json(&run(bin().arg("restrict").arg("--partition").arg(&part).arg("--point").arg(&lifted_path)));
    let bt: Vec<f64> = serde_json::from_value(back["groups"][0]["t"].clone()).unwrap();
    assert!(bt.iter().zip(&t).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn csv_columns_are_documented_in_help() {
    let help = String::from_utf8(run(bin().arg("--help")).stdout).unwrap();
    for col in ["mean_rel_diff", "ratio_2t_over_y", "<model>_tight_freq", "<condition>_freq"] {
        assert!(help.contains(col), "{col}");
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bin().args(["solve", "--instance", "/nonexistent.json"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().args(["simulate", "--models", "ESDR-Z"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ESDR-Z"));
}
