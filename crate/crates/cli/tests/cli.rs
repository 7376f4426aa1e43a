use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn slp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn permanent_gadget_of_all_ones_matrix() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "1 1\n1 1\n");
    let q = dir.path().join("q.slp");
    let o = slp(&["reduce", "per-zmc", s(&a), "--d", "2", "-o", s(&q)]);
    assert!(o.status.success(), "{o:?}");
    // per = 2, so the coefficient of Y1*Y2 is 2 - 2
    let o = slp(&["zmc", s(&q), "--monomial", "Y1*Y2", "--mode", "exact", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["result"]["answer"], "coefficient-zero");
    assert_eq!(r["result"]["coefficient"], "0");

    let o = slp(&["reduce", "per-zmc", s(&a), "--d", "-1", "-o", s(&q)]);
    assert!(o.status.success());
    let o = slp(&["zmc", s(&q), "--monomial", "Y1*Y2", "--json"]);
    assert_eq!(json(&o)["result"]["coefficient"], "3");
}

#[test]
fn analyze_reports_stats() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "c.slp",
        "g1 = var X\ng2 = const -1\ng3 = add g1 g2\ng4 = mul g3 g3\nout g4\n",
    );
    let o = slp(&["analyze", s(&f)]);
    assert!(o.status.success());
    let stats: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["size"], 4);
    assert_eq!(stats["is_mult_disjoint"], false);
    assert_eq!(stats["syntactic_degree"]["total"], "2");
}

#[test]
fn expand_and_eval() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "c.slp",
        "a = var X\nb = var Y\nm = mul a b\nn = const -1\ns = add m n\nout s\n",
    );
    let o = slp(&["expand", s(&f)]);
    assert_eq!(stdout(&o).trim(), "X*Y - 1");
    let o = slp(&["eval", s(&f), "--at", "X=4,Y=-5"]);
    assert_eq!(stdout(&o).trim(), "-21");
    let o = slp(&["eval", s(&f), "--at", "X=4,Y=-5", "--modulus", "11"]);
    assert_eq!(stdout(&o).trim(), "1");
    let o = slp(&["eval", s(&f), "--at", "X=4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cyc = write(&dir, "cyc.slp", "g1 = add g2 g1\ng2 = var X\nout g1\n");
    let o = slp(&["parse", s(&cyc)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(slp(&["parse", "/nonexistent/file.slp"]).status.code(), Some(1));
    assert_eq!(slp(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(slp(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_exhaustion_exits_two() {
    let dir = TempDir::new().unwrap();
    let mut net = String::from("g0 = var X\ng1 = const 1\nh0 = add g0 g1\n");
    for i in 1..=12 {
        net += &format!("h{i} = mul h{} h{}\n", i - 1, i - 1);
    }
    net += "out h12\n";
    let f = write(&dir, "sq.slp", &net);
    let o = slp(&["expand", s(&f), "--budget-terms", "100"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let o = slp(&["expand", s(&f), "--budget-degree", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_mode_requires_a_seed() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.slp", "a = var X\nb = var X\nm = mul a b\nout m\n");
    let o = slp(&["acit", s(&f), "--mode", "randomized", "--strict"]);
    assert_eq!(o.status.code(), Some(1));
    let o = slp(&["acit", s(&f), "--mode", "randomized"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
    let o = slp(&["acit", s(&f), "--mode", "randomized", "--strict", "--seed", "9"]);
    assert_eq!(stdout(&o).trim(), "nonzero");
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn seeded_runs_are_reproducible_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "1 -1 1\n1 1 0\n-1 1 1\n");
    let q = dir.path().join("q.slp");
    assert!(slp(&["reduce", "per-zmc", s(&a), "--d", "1", "-o", s(&q)])
        .status
        .success());
    let run = |threads: &str| {
        let o = slp(&[
            "zmc",
            s(&q),
            "--monomial",
            "Y1*Y2*Y3",
            "--mode",
            "randomized",
            "--seed",
            "77",
            "--trials",
            "50",
            "--threads",
            threads,
            "--json",
        ]);
        assert!(o.status.success());
        without_time(json(&o))
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
    assert_eq!(one["seed"], 77);
    assert_eq!(one["trials"], 50);
    assert_eq!(one["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn counting_chain_matches_model_oracle() {
    let dir = TempDir::new().unwrap();
    // x1 ∨ ¬y1, x2 ∨ y1: the assignments 01, 10, 11 of (x1, x2) are satisfiable
    let f = write(&dir, "f.cnf", "xy 2 1\np cnf 3 2\n1 -3 0\n2 3 0\n");
    let o = slp(&["oracle", "models", s(&f), "--json"]);
    assert_eq!(json(&o)["result"]["satisfiable"], 3);
    let cm = dir.path().join("cm.slp");
    for (k, expected) in [(3, true), (4, false)] {
        let o = slp(&[
            "reduce",
            "cexists-cm",
            s(&f),
            "--k",
            &k.to_string(),
            "-o",
            s(&cm),
            "--json",
        ]);
        let t = json(&o)["result"]["params"]["threshold"].as_str().unwrap().to_string();
        let o = slp(&["countmon", s(&cm), "--threshold", &t, "--json"]);
        assert_eq!(json(&o)["result"]["at_least"], expected, "k = {k}");
    }
}

#[test]
fn exact_cover_through_monotone_search() {
    let dir = TempDir::new().unwrap();
    let yes = write(&dir, "yes.txt", "6\n1 2 3\n4 5 6\n1 4 5\n");
    let no = write(&dir, "no.txt", "6\n1 2 3\n3 4 5\n1 4 5\n");
    for (inst, expected) in [(&yes, "coefficient-nonzero"), (&no, "coefficient-zero")] {
        let q = dir.path().join("x.slp");
        let o = slp(&["reduce", "x3c-zmc", s(inst), "-o", s(&q), "--json"]);
        let m = json(&o)["result"]["params"]["monomial"].as_str().unwrap().to_string();
        let o = slp(&["zmc", s(&q), "--monomial", &m, "--mode", "monotone"]);
        assert_eq!(stdout(&o).trim(), expected);
    }
    let o = slp(&["oracle", "exact-cover", s(&yes)]);
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn determinant_and_multilinear_counting() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("d.slp");
    assert!(slp(&["reduce", "det", "--n", "3", "-o", s(&d)]).status.success());
    let o = slp(&["checkml", s(&d)]);
    assert_eq!(stdout(&o).trim(), "multilinear");
    let o = slp(&["countmon", s(&d), "--threshold", "6"]);
    assert!(stdout(&o).starts_with("true (count 6)"));

    let a = write(&dir, "a.txt", "1 1 0\n0 1 1\n1 0 1\n");
    let p = dir.path().join("p.slp");
    assert!(slp(&["reduce", "per-mlcm", s(&a), "-o", s(&p)]).status.success());
    let per = stdout(&slp(&["oracle", "permanent", s(&a)])).trim().to_string();
    assert_eq!(per, "2");
    let o = slp(&["mlcountmon", s(&p), "--threshold", "2"]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = slp(&["mlcountmon", s(&p), "--threshold", "3"]);
    assert_eq!(stdout(&o).trim(), "false");
}

#[test]
fn monml_and_extmon() {
    let dir = TempDir::new().unwrap();
    // X^2 + X*Y
    let f = write(
        &dir,
        "c.slp",
        "a = var X\nb = var Y\nx2 = mul a a\nxy = mul a b\ns = add x2 xy\nout s\n",
    );
    let o = slp(&["monml", s(&f), "--mode", "randomized", "--seed", "3"]);
    assert_eq!(stdout(&o).trim(), "exists");
    let o = slp(&["extmon", s(&f), "--monomial", "Y"]);
    assert_eq!(stdout(&o).trim(), "exists");
    let o = slp(&["extmon", s(&f), "--monomial", "X", "--threshold", "1"]);
    assert!(stdout(&o).starts_with("true (count 1)"));
    let o = slp(&["checkml", s(&f), "--mode", "randomized", "--seed", "4"]);
    assert_eq!(stdout(&o).trim(), "not-multilinear");
    let o = slp(&["mlzmc", s(&f), "--monomial", "X*Y"]);
    assert_eq!(stdout(&o).trim(), "not-multilinear");
}

#[test]
fn selftest_small_criterion() {
    let o = slp(&["selftest", "--level", "small", "--criterion", "1", "--json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(json(&o)["result"]["passed"], true);
    assert_eq!(slp(&["selftest", "--criterion", "42"]).status.code(), Some(1));
}
