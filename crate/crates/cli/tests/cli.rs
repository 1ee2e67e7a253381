use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dclut::synth::{motivating_family, planted_table, rng};

fn dclut(args: &[&str], paths: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dclut"));
    cmd.args(args);
    for p in paths {
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

fn run(line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dclut"))
        .args(line.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_family(dir: &Path) {
    let (t, m) = motivating_family();
    fs::write(dir.join("fam.tbl"), t.to_hex_text()).unwrap();
    fs::write(dir.join("fam.mask"), m.to_text()).unwrap();
}

#[test]
fn compress_writes_three_files() {
    let d = tempfile::tempdir().unwrap();
    write_family(d.path());
    let p = d.path().display();
    let o = run(&format!(
        "compress --table {p}/fam.tbl --mask {p}/fam.mask --max-tsize 2 --out {p}/build"
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for ext in ["v", "plan", "report"] {
        assert!(d.path().join(format!("build/fam.{ext}")).exists(), "{ext}");
    }
    let report = fs::read_to_string(d.path().join("build/fam.report")).unwrap();
    assert!(report.contains("ust_pre"));
    assert!(report.contains("w_out=5 inferred"));
    let chosen = report.lines().find(|l| l.ends_with(" *")).unwrap();
    let cols: Vec<&str> = chosen.split_whitespace().collect();
    assert_eq!(&cols[8..10], &["2", "1"]);
    assert!(stdout(&o).contains("chosen: lb_in=2,lb_out=0 (48 bits"));
}

#[test]
fn omitted_mask_and_zero_exiguity_match_the_stage_off() {
    let d = tempfile::tempdir().unwrap();
    write_family(d.path());
    let p = d.path().display();
    let a = run(&format!(
        "compress --table {p}/fam.tbl --mask {p}/fam.mask --exiguity 0 --json --out {p}/a"
    ));
    let b = run(&format!(
        "compress --table {p}/fam.tbl --mask {p}/fam.mask --no-dc --json --out {p}/b"
    ));
    let c = run(&format!("compress --table {p}/fam.tbl --json --out {p}/c"));
    let bits = |o: &Output| {
        let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        let chosen = v["chosen"].as_u64().unwrap() as usize;
        v["entries"][chosen]["total_bits"].as_u64().unwrap()
    };
    assert_eq!(bits(&a), bits(&b));
    assert!(bits(&c) >= bits(&a));
    assert_eq!(
        fs::read_to_string(d.path().join("a/fam.v")).unwrap(),
        fs::read_to_string(d.path().join("b/fam.v")).unwrap()
    );
}

#[test]
fn compress_error_paths() {
    let d = tempfile::tempdir().unwrap();
    write_family(d.path());
    let p = d.path().display();
    let o = run(&format!("compress --table {p}/missing.tbl --out {p}"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.tbl"));

    fs::write(d.path().join("short.mask"), "1\n0\n1\n").unwrap();
    let o = run(&format!(
        "compress --table {p}/fam.tbl --mask {p}/short.mask --out {p}"
    ));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3 entries"));

    fs::write(d.path().join("bad.tbl"), "1\n2\nzz\n3\n").unwrap();
    let o = run(&format!("compress --table {p}/bad.tbl --out {p}"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&format!(
        "compress --table {p}/fam.tbl --out {p} --name 9bad"
    ));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mask_from_observations() {
    let d = tempfile::tempdir().unwrap();
    let obs = d.path().join("obs.txt");
    fs::write(&obs, "0000\n# seen twice\n0000\n0x3\n1111\n").unwrap();
    let out = d.path().join("m.mask");
    let o = dclut(&["mask", "--win", "4", "--obs"], &[&obs]);
    assert_eq!(o.status.code(), Some(2), "missing --out is a usage error");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dclut"));
    let o = cmd
        .args(["mask", "--win", "4", "--obs"])
        .arg(&obs)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0.1875"));
    let mask = fs::read_to_string(&out).unwrap();
    assert_eq!(mask.lines().filter(|l| *l == "1").count(), 3);

    fs::write(&obs, "0001\n10000\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dclut"))
        .args(["mask", "--win", "4", "--obs"])
        .arg(&obs)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn verify_pass_fail_and_mismatch() {
    let d = tempfile::tempdir().unwrap();
    write_family(d.path());
    let p = d.path().display();
    assert_eq!(
        run(&format!(
            "compress --table {p}/fam.tbl --mask {p}/fam.mask --out {p}"
        ))
        .status
        .code(),
        Some(0)
    );

    let o = run(&format!(
        "verify --table {p}/fam.tbl --mask {p}/fam.mask --plan {p}/fam.plan"
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 care mismatches, 1 don't cares changed"));

    // Without the mask the rewritten don't care now counts against the plan.
    let o = run(&format!("verify --table {p}/fam.tbl --plan {p}/fam.plan"));
    assert_eq!(o.status.code(), Some(1));

    let plan = fs::read_to_string(d.path().join("fam.plan")).unwrap();
    let bad = plan.replacen(
        "table t_bias count=4 width=5\n3\n",
        "table t_bias count=4 width=5\n4\n",
        1,
    );
    assert_ne!(bad, plan);
    fs::write(d.path().join("bad.plan"), bad).unwrap();
    let o = run(&format!(
        "verify --table {p}/fam.tbl --mask {p}/fam.mask --plan {p}/bad.plan"
    ));
    assert_eq!(o.status.code(), Some(1));

    let (t, _) = planted_table(&mut rng(1), 5, 5, 2, 1, 0.0).unwrap();
    fs::write(d.path().join("big.tbl"), t.to_hex_text()).unwrap();
    let o = run(&format!("verify --table {p}/big.tbl --plan {p}/fam.plan"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn batch_outputs_and_totals() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().display();
    let o = run(&format!(
        "generate --kind planted --count 5 --win 8 --wout 6 --dc 0.6 --seed 3 --out {p}/in"
    ));
    assert_eq!(o.status.code(), Some(0));
    let o = run(&format!(
        "batch --dir {p}/in --out {p}/out --compare --json"
    ));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let verilog = fs::read_dir(d.path().join("out"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "v")
        })
        .count();
    assert_eq!(verilog, 5);

    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tables = v["tables"].as_array().unwrap();
    let sum = |key: &str| tables.iter().map(|t| t[key].as_u64().unwrap()).sum::<u64>();
    assert_eq!(v["total_bits"].as_u64().unwrap(), sum("bits"));
    assert_eq!(v["total_pluts"].as_u64().unwrap(), sum("pluts"));
    assert_eq!(
        v["total_all_care_bits"].as_u64().unwrap(),
        sum("all_care_bits")
    );
    assert!(v["median_reduction_pct"].as_f64().unwrap() > 0.0);
    assert!(d.path().join("out/batch.report").exists());
}

#[test]
fn batch_family_reduces_and_reports_failures() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().display();
    run(&format!("generate --kind family --count 3 --out {p}/in"));
    let o = run(&format!("batch --dir {p}/in --out {p}/out --compare"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("median reduction"));

    fs::write(d.path().join("in/broken.tbl"), "1\n2\n3\n").unwrap();
    let o = run(&format!("batch --dir {p}/in --out {p}/out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAILED broken"));
    assert!(d.path().join("out/t002.v").exists());
}

#[test]
fn batch_empty_directory() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().display();
    let o = run(&format!("batch --dir {p} --out {p}/out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no tables found"));
}
