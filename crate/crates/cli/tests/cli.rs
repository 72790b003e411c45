use std::path::Path;
use std::process::{Command, Output};

use mstn::model_export::parse_cbf;
use mstn::{generate, GeneratorConfig, Neighborhood};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn mstn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstn")).args(args).output().expect("binary runs")
}

fn mstn_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstn"))
        .args(args)
        .env("MSTN_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sha(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_writes_sixty_instances_and_a_hashed_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = mstn(&["gen", "--n", "5,6,7", "--dim", "2", "--scenarios", "1,2,3,4", "--seed", "1", "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let manifest = read_json(&a.join("manifest.json"));
    let entries = manifest["instances"].as_array().unwrap();
    assert_eq!(entries.len(), 60);
    let files: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 61);
    for e in entries {
        let file = e["file"].as_str().unwrap();
        let bytes = std::fs::read(a.join(file)).unwrap();
        assert_eq!(e["sha256"].as_str().unwrap(), sha(&bytes));
        assert_eq!(bytes, std::fs::read(b.join(file)).unwrap(), "{file} differs between runs");
        let seed = e["seed"].as_u64().unwrap();
        assert!((1..=5).contains(&seed));
    }
    assert_eq!(
        std::fs::read(a.join("manifest.json")).unwrap(),
        std::fs::read(b.join("manifest.json")).unwrap()
    );
}

#[test]
fn solve_example1_reports_the_merged_tree() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "5", "--scenarios", "1", "--per-combo", "1", "--example1", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("report.json");
    let o = mstn(&["solve", p(&dir.path().join("example1.json")), "--method", "exact-bc", "--out", p(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&report);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["method"], "exact-bc");
    assert!(!v["git_revision"].as_str().unwrap().is_empty());
    assert_eq!(v["options"]["exact"]["time_limit"], 60.0);
    let mut labels: Vec<(u64, u64)> = v["tree_labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_u64().unwrap(), e[1].as_u64().unwrap()))
        .collect();
    labels.sort();
    assert_eq!(labels, vec![(1, 3), (1, 4), (2, 5), (4, 5), (5, 6), (6, 7), (6, 8)]);
}

#[test]
fn tiny_time_limit_keeps_the_initial_incumbent_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "6", "--scenarios", "4", "--per-combo", "1", "--out", p(dir.path())]);
    assert!(o.status.success());
    let report = dir.path().join("t.json");
    let o = mstn(&["solve", p(&dir.path().join("r4_n6_d2_0.json")), "--time-limit", "0.001", "--out", p(&report)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v = read_json(&report);
    assert_eq!(v["status"], "time-limit");
    let obj = v["objective"].as_f64().unwrap();
    let ub = v["center_mst_value"].as_f64().unwrap();
    assert!(obj <= ub * (1.0 + 1e-9));
    assert_eq!(v["tree_labels"].as_array().unwrap().len(), 5);
}

#[test]
fn enumerate_and_branch_and_cut_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "6", "--scenarios", "2,3", "--per-combo", "1", "--seed", "7", "--out", p(dir.path())]);
    assert!(o.status.success());
    for r in [2, 3] {
        let inst = dir.path().join(format!("r{r}_n6_d2_0.json"));
        let mut objs = Vec::new();
        for m in ["exact-bc", "exact-iter", "enumerate"] {
            let out = dir.path().join(format!("{r}-{m}.json"));
            let o = mstn(&["solve", p(&inst), "--method", m, "--out", p(&out)]);
            assert!(o.status.success(), "{m}: {}", stderr(&o));
            objs.push(read_json(&out)["objective"].as_f64().unwrap());
        }
        for w in &objs[1..] {
            assert!((w - objs[0]).abs() <= 1e-6 * objs[0].max(1.0), "{objs:?}");
        }
    }
}

#[test]
fn heuristic_report_and_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "5", "--scenarios", "3", "--per-combo", "1", "--out", p(dir.path())]);
    assert!(o.status.success());
    let inst = dir.path().join("r3_n5_d2_0.json");
    let o = mstn(&["solve", p(&inst), "--method", "heuristic"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "feasible");
    assert!(!v["starts"].as_array().unwrap().is_empty());

    let o = mstn(&["solve", p(&inst), "--method", "simplex"]);
    assert!(!o.status.success());
    let o = mstn(&["solve", p(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

const HEADER: &str = "r,n,method,cpu_s,sec_cuts,benders_cuts,nodes,gap0_pct,gap_pct,solved_pct,obj,lb,ub";

#[test]
fn bench_rows_are_sorted_and_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "5,6", "--scenarios", "1,4", "--per-combo", "2", "--out", p(dir.path())]);
    assert!(o.status.success());
    let manifest = dir.path().join("manifest.json");
    let one = dir.path().join("one.csv");
    let three = dir.path().join("three.csv");
    let o = mstn_env(&["bench", p(&manifest), "--method", "heuristic,exact-bc", "--out", p(&one)], "1");
    assert!(o.status.success(), "{}", stderr(&o));
    let o = mstn_env(&["bench", p(&manifest), "--method", "heuristic,exact-bc", "--out", p(&three)], "3");
    assert!(o.status.success(), "{}", stderr(&o));

    let (h1, r1) = csv_rows(&one);
    let (h3, r3) = csv_rows(&three);
    assert_eq!(h1, HEADER);
    assert_eq!(h3, HEADER);
    assert_eq!(r1.len(), 16);
    let strip = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter().map(|r| r.iter().enumerate().filter(|(i, _)| *i != 3).map(|(_, s)| s.clone()).collect()).collect()
    };
    assert_eq!(strip(&r1), strip(&r3));
    let keys: Vec<(u32, usize, usize)> = r1
        .iter()
        .map(|r| {
            let m = if r[2] == "exact-bc" { 0 } else { 1 };
            (r[0].parse().unwrap(), r[1].parse().unwrap(), m)
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &r1 {
        if r[2] == "exact-bc" {
            assert_eq!(r[8].parse::<f64>().unwrap(), 0.0);
            assert_eq!(r[9], "100.0");
        }
    }

    let (hb, blocks) = csv_rows(&dir.path().join("one.blocks.csv"));
    assert_eq!(hb, HEADER);
    assert_eq!(blocks.len(), 8);
    let (hd, devs) = csv_rows(&dir.path().join("one.dev.csv"));
    assert!(hd.starts_with("r,n,method,instances,dev_lb_pct,dev_ub_pct,mst_pct"));
    for d in devs.iter().filter(|d| d[0] == "4") {
        // Scenario 4 balls overlap heavily, so MST(u~) is close to zero.
        assert!(d[4].parse::<f64>().unwrap() > 90.0, "{d:?}");
    }
}

#[test]
fn bench_on_points_has_zero_upper_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let mut entries = Vec::new();
    for seed in 0..3u64 {
        let inst = generate(&GeneratorConfig::new(6, 2, 1, seed))
            .unwrap()
            .map_neighborhoods(|nb| match nb {
                Neighborhood::Ball { center, .. } => Neighborhood::ball(center.clone(), 0.0),
                other => other.clone(),
            })
            .unwrap();
        let file = format!("p{seed}.json");
        let text = inst.to_json();
        std::fs::write(dir.path().join(&file), &text).unwrap();
        entries.push(serde_json::json!({
            "file": file, "name": inst.name(), "n": 6, "dimension": 2,
            "scenario": 0, "seed": seed, "sha256": sha(text.as_bytes()),
        }));
    }
    let manifest = dir.path().join("manifest.json");
    std::fs::write(&manifest, serde_json::json!({"seed_base": 0, "instances": entries}).to_string()).unwrap();
    let out = dir.path().join("pts.csv");
    let o = mstn(&["bench", p(&manifest), "--method", "heuristic,exact-bc", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, devs) = csv_rows(&dir.path().join("pts.dev.csv"));
    assert_eq!(devs.len(), 2);
    for d in devs {
        assert!(d[5].parse::<f64>().unwrap().abs() < 1e-9, "{d:?}");
        assert_eq!(d[6], "100.0");
    }
}

#[test]
fn bench_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "5", "--scenarios", "1", "--per-combo", "2", "--out", p(dir.path())]);
    assert!(o.status.success());
    let manifest = dir.path().join("manifest.json");
    let mut v = read_json(&manifest);
    v["instances"][0]["sha256"] = Value::from("00");
    std::fs::write(&manifest, v.to_string()).unwrap();
    let out = dir.path().join("f.csv");
    let o = mstn(&["bench", p(&manifest), "--method", "exact-bc", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    let failed: Vec<_> = rows.iter().filter(|r| r[9] == "0.0").collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0][10].is_empty());
    let status = std::fs::read_to_string(dir.path().join("f.status.csv")).unwrap();
    assert!(status.contains("Failed") && status.contains("sha256"), "{status}");
    assert!(status.contains("Optimal"));
}

#[test]
fn export_writes_parseable_cbf() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstn(&["gen", "--n", "5", "--scenarios", "2", "--per-combo", "1", "--out", p(dir.path())]);
    assert!(o.status.success());
    let inst = dir.path().join("r2_n5_d2_0.json");
    for fmt in ["mtz", "sec"] {
        let out = dir.path().join(format!("{fmt}.cbf"));
        let o = mstn(&["export", p(&inst), "--format", fmt, "--out", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let doc = parse_cbf(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(doc.num_vars > 0);
    }
    let out = dir.path().join("bad.cbf");
    let o = mstn(&["export", p(&inst), "--format", "sec", "--max-subset-size", "9", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}
