//! End-to-end coverage of the binary: generate, solve, render, and bench,
//! including the degenerate zero-action case and CSV reproducibility.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use rearrange_core::{validate_plan, Instance, Plan, PlanFile};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rearrange"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rearrange-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gen_solve_render_round_trip() {
    let dir = scratch("round-trip");
    let inst_path = dir.join("inst.json");
    let plan_path = dir.join("plan.json");
    let svg_path = dir.join("anim.svg");
    let dot_path = dir.join("deps.dot");

    let out = bin()
        .args(["gen", "--family", "random", "--n", "9", "--rho", "0.3", "--seed", "11"])
        .arg("--out")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin()
        .args(["solve", "--cfg", "RBM-SP-BST", "--seed", "11"])
        .arg("--instance")
        .arg(&inst_path)
        .arg("--out")
        .arg(&plan_path)
        .arg("--dot")
        .arg(&dot_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let inst = Instance::from_json(&fs::read_to_string(&inst_path).unwrap()).unwrap();
    let file = PlanFile::from_json(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    let plan = Plan { actions: file.actions };
    assert!(validate_plan(&plan, &inst).is_ok());
    assert_eq!(file.stats.actions, plan.len());
    assert!(fs::read_to_string(&dot_path).unwrap().starts_with("digraph"));

    let out = bin()
        .arg("render")
        .arg("--instance")
        .arg(&inst_path)
        .arg("--plan")
        .arg(&plan_path)
        .arg("--out")
        .arg(&svg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("class=\"frame\"").count(), plan.len() + 1);
    if plan.actions.iter().any(|a| a.kind == rearrange_core::ActionKind::SB) {
        assert!(svg.contains("stroke-dasharray"));
    }
}

#[test]
fn solved_identity_instance_needs_zero_actions() {
    let dir = scratch("identity");
    let inst_path = dir.join("inst.json");
    let plan_path = dir.join("plan.json");
    let out = bin()
        .args(["gen", "--family", "random", "--n", "6", "--rho", "0.2", "--seed", "4"])
        .arg("--out")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert!(out.status.success());

    // Rewrite the goal to equal the start: already solved.
    let mut inst = Instance::from_json(&fs::read_to_string(&inst_path).unwrap()).unwrap();
    inst.goal = inst.start.clone();
    fs::write(&inst_path, inst.to_json()).unwrap();

    let out = bin()
        .arg("solve")
        .arg("--instance")
        .arg(&inst_path)
        .arg("--out")
        .arg(&plan_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let file = PlanFile::from_json(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(file.actions.len(), 0);
}

#[test]
fn solve_reports_timeout_with_distinct_exit_code() {
    let dir = scratch("timeout");
    let inst_path = dir.join("inst.json");
    let out = bin()
        .args(["gen", "--family", "dense-small", "--n", "6", "--seed", "1"])
        .arg("--out")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    // A zero budget expires before the first search iteration, so the outcome
    // is a timeout no matter how easy the instance is.
    let out = bin()
        .args(["solve", "--time-limit", "0"])
        .arg("--instance")
        .arg(&inst_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("timeout"));
}

#[test]
fn bench_writes_full_grid_and_reproducible_counts() {
    let dir = scratch("bench");
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");
    for csv in [&csv_a, &csv_b] {
        let out = bin()
            .args([
                "bench",
                "--family",
                "random",
                "--n",
                "5,7",
                "--rho",
                "0.2,0.3",
                "--cfg",
                "RBM-SP-BST,TBM-SP-OS",
                "--trials",
                "2",
                "--time-limit",
                "20",
                "--seed",
                "9",
            ])
            .arg("--out")
            .arg(csv)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    let a = fs::read_to_string(&csv_a).unwrap();
    let rows: Vec<&str> = a.trim_end().lines().collect();
    assert_eq!(rows[0], "family,n,rho,cfg,success,mean_time,mean_actions_ratio,mean_checks");
    // 2 sizes x 2 densities x 2 configs.
    assert_eq!(rows.len(), 1 + 8);

    // Everything except wall time must reproduce bit for bit.
    let strip_time = |text: &str| -> Vec<String> {
        text.trim_end()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                if f.len() == 8 {
                    f[5] = "-";
                }
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip_time(&a), strip_time(&fs::read_to_string(&csv_b).unwrap()));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["points"].as_array().unwrap().len(), 4);
    for p in manifest["points"].as_array().unwrap() {
        assert_eq!(p["seeds"].as_array().unwrap().len(), 2);
    }
}
