use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bfo_qap::generate::{uniform_mqap, uniform_qap};
use bfo_qap::io::{mqap_to_string, qaplib_to_string, read_front};
use bfo_qap::{brute_force_front, Cost, Permutation, QapInstance};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bfo-qap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn brute_optimum(inst: &QapInstance) -> Cost {
    fn rec(inst: &QapInstance, p: &mut Vec<usize>, k: usize, best: &mut Cost) {
        if k == p.len() {
            let c = inst
                .evaluate(&Permutation::new(p.clone()).unwrap())
                .unwrap();
            *best = (*best).min(c);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(inst, p, k + 1, best);
            p.swap(k, i);
        }
    }
    let mut best = Cost::MAX;
    rec(inst, &mut (0..inst.n()).collect(), 0, &mut best);
    best
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL: [&str; 10] = [
    "--S", "10", "--Nc", "4", "--Nre", "2", "--Ned", "2", "--eras", "3",
];

#[test]
fn verify_optimum_exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = uniform_qap(7, 20, 5);
    let opt = brute_optimum(&inst);
    let path = write(dir.path(), "toy7.dat", &qaplib_to_string(&inst));
    let out = dir.path().join("out");
    let p = path.to_str().unwrap();
    let o = out.to_str().unwrap();
    let good = opt.to_string();
    let mut args = vec![
        "solve",
        p,
        "--solver",
        "bfo",
        "--out",
        o,
        "--verify-optimum",
        &good,
    ];
    args.extend(SMALL);
    let res = run(&args);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("verified"), "{stdout}");

    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("instance,run,seed,best_cost,evals,wall_ms")
    );
    assert_eq!(lines.count(), 3);
    for k in 0..3 {
        assert!(out.join(format!("toy7.bfo.run{k}.trace")).exists());
    }

    let bad = (opt - 1).to_string();
    let mut args = vec![
        "solve",
        p,
        "--solver",
        "bfo",
        "--out",
        o,
        "--verify-optimum",
        &bad,
    ];
    args.extend(SMALL);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn parse_errors_fail_fast() {
    let dir = TempDir::new().unwrap();
    let o = dir.path().join("out");
    let res = run(&["solve", "/nonexistent/x.dat", "--out", o.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!o.exists(), "nothing is written before inputs validate");

    let bad = write(dir.path(), "bad.dat", "3\n1 2 3\n");
    let res = run(&["solve", bad.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bad.dat"));

    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(
        run(&["solve", "x", "--solver", "ga"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["solve", "x", "--mutation", "scramble"]).status.code(),
        Some(1)
    );

    let good = write(
        dir.path(),
        "ok.dat",
        &qaplib_to_string(&uniform_qap(4, 5, 1)),
    );
    let res = run(&[
        "solve",
        good.to_str().unwrap(),
        "--S",
        "3",
        "--out",
        o.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1), "odd population is rejected");
    let res = run(&[
        "solve",
        good.to_str().unwrap(),
        "--solver",
        "mobfo",
        "--out",
        o.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(1),
        "single-objective file for mobfo"
    );
}

#[test]
fn front_command() {
    let dir = TempDir::new().unwrap();
    let text = "2 2\n0 1\n1 0\n0 50\n50 0\n0 100\n100 0\n";
    let inst = write(dir.path(), "two.dat", text);
    let out = dir.path().join("fronts/two.front");
    let res = run(&[
        "front",
        inst.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    // both permutations cost (100, 200); duplicates collapse to the first found
    let body = fs::read_to_string(&out).unwrap();
    assert_eq!(body, "100 200 0 1\n");

    let big = uniform_mqap(12, 2, 5, 1);
    let big_path = write(dir.path(), "big.dat", &mqap_to_string(&big));
    let res = run(&[
        "front",
        big_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("11"));
}

#[test]
fn reference_front_verification() {
    let dir = TempDir::new().unwrap();
    let inst = uniform_mqap(5, 2, 20, 3);
    let path = write(dir.path(), "kc5.dat", &mqap_to_string(&inst));
    let front_path = dir.path().join("kc5.ref");
    let res = run(&[
        "front",
        path.to_str().unwrap(),
        "--out",
        front_path.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let expected = brute_force_front(&inst).unwrap().objective_set();
    let got: Vec<_> = read_front(&fs::read_to_string(&front_path).unwrap(), 2)
        .unwrap()
        .into_iter()
        .map(|p| p.objectives)
        .collect();
    assert_eq!(got, expected);

    let out = dir.path().join("out");
    let mut args = vec![
        "solve",
        path.to_str().unwrap(),
        "--solver",
        "mobfo",
        "--out",
        out.to_str().unwrap(),
        "--reference-front",
        front_path.to_str().unwrap(),
    ];
    args.extend(SMALL);
    let res = run(&args);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let merged = fs::read_to_string(out.join("kc5.mobfo.front")).unwrap();
    let merged: Vec<_> = read_front(&merged, 2)
        .unwrap()
        .into_iter()
        .map(|p| p.objectives)
        .collect();
    assert_eq!(merged, expected);
    for k in 0..3 {
        assert!(out.join(format!("kc5.mobfo.run{k}.front")).exists());
    }
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().split(',').nth(3) == Some(""));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let q = write(
        dir.path(),
        "q8.dat",
        &qaplib_to_string(&uniform_qap(8, 50, 2)),
    );
    let m = write(
        dir.path(),
        "m6.dat",
        &mqap_to_string(&uniform_mqap(6, 2, 50, 2)),
    );
    for (path, solver) in [
        (&q, "bfo"),
        (&q, "bfo-baseline"),
        (&m, "mobfo"),
        (&m, "mobfo-baseline"),
    ] {
        let mut outputs = Vec::new();
        for (k, jobs) in ["1", "3"].iter().enumerate() {
            let out = dir.path().join(format!("{solver}{k}"));
            let mut args = vec![
                "solve",
                path.to_str().unwrap(),
                "--solver",
                solver,
                "--seed",
                "17",
                "--no-timing",
                "--jobs",
                jobs,
                "--out",
                out.to_str().unwrap(),
            ];
            args.extend(SMALL);
            let res = run(&args);
            assert_eq!(
                res.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&res.stderr)
            );
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let p = e.unwrap().path();
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        fs::read(&p).unwrap(),
                    )
                })
                .collect();
            files.sort();
            outputs.push(files);
        }
        assert_eq!(outputs[0], outputs[1], "{solver}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let q = write(
        dir.path(),
        "q6.dat",
        &qaplib_to_string(&uniform_qap(6, 9, 4)),
    );
    let cfg = write(
        dir.path(),
        "run.cfg",
        "S=6\nNc=2\nNre=1\nNed=1\nera=2\nseed=5\n",
    );
    let out = dir.path().join("out");
    let res = run(&[
        "solve",
        q.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--eras",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5, "flag eras=4 wins over file era=2");

    let bad = write(dir.path(), "bad.cfg", "population=6\n");
    let res = run(&[
        "solve",
        q.to_str().unwrap(),
        "--config",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn qaplib_fixture_verifies() {
    let dir = TempDir::new().unwrap();
    let inst = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/chr12c.dat");
    let out = dir.path().join("out");
    let res = run(&[
        "solve",
        inst,
        "--out",
        out.to_str().unwrap(),
        "--verify-optimum",
        "11156",
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let best = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<i64>().unwrap())
        .min();
    assert_eq!(best, Some(11156));
}
