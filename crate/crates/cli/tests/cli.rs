use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use parity_spectrum::model::BnSpec;
use parity_spectrum_cli::{Cli, Command as Sub};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parity-spectrum"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn status(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(std::iter::once("parity-spectrum").chain(args.iter().copied()))
}

#[test]
fn effects_defaults() {
    let cli = parse(&[
        "effects",
        "--data",
        "d.csv",
        "--schema",
        "s.cfg",
        "--outcome",
        "y=1",
    ])
    .unwrap();
    let Sub::Effects(a) = cli.command else {
        panic!("wrong command")
    };
    assert_eq!(a.data.bins, 20);
    assert_eq!(a.bootstrap.replicates, 1000);
    assert_eq!(a.bootstrap.level, 0.95);
    assert_eq!(a.outcome.to_string(), "y=1");
}

#[test]
fn audit_vector_decodes() {
    let cli = parse(&[
        "audit", "--bn", "001", "--data", "d.csv", "--schema", "s.cfg", "--yhat", "yhat_np",
    ])
    .unwrap();
    let Sub::Audit(a) = cli.command else {
        panic!("wrong command")
    };
    assert_eq!(a.bn, BnSpec::new(false, false, true));
    assert_eq!(a.yhat, "yhat_np");
}

#[test]
fn pareto_sweep_config() {
    let cli = parse(&[
        "pareto",
        "--bn-sets",
        "000,001,010,011",
        "--reps",
        "10",
        "--seed",
        "7",
    ])
    .unwrap();
    let Sub::Pareto(a) = cli.command else {
        panic!("wrong command")
    };
    assert_eq!(a.bn_sets.len(), 4);
    assert_eq!(a.bn_sets[2], BnSpec::new(false, true, false));
    assert_eq!((a.reps, a.seed), (10, 7));
}

#[test]
fn usage_errors() {
    let e = parse(&["effects", "--data", "d.csv", "--outcome", "y=1"]).unwrap_err();
    assert!(e.to_string().contains("--schema"), "{e}");
    assert_eq!(e.exit_code(), 2);
    for bad in [
        &["effects", "--bogus"][..],
        &[
            "audit", "--bn", "01", "--data", "d", "--schema", "s", "--yhat", "p",
        ],
        &["simulate", "--scm", "s1"],
        &[
            "effects",
            "--data",
            "d",
            "--schema",
            "s",
            "--outcome",
            "y=1",
            "--level",
            "1.5",
        ],
    ] {
        assert_eq!(parse(bad).unwrap_err().exit_code(), 2, "{bad:?}");
        assert_eq!(status(&run(bad)), 2, "{bad:?}");
    }
}

/// 400 rows: x, z, w, y with y depending on all three; `copy` equals y and
/// `flat` is constant.
fn write_fixture(dir: &Path) {
    let mut csv = String::from("x,z,w,y,copy,flat\n");
    for i in 0..400u32 {
        let x = i % 2;
        let z = (i / 2) % 2;
        let w = u32::from((i / 4) % 5 < 2 + x + z);
        let y = u32::from((i * 7 + 3) % 11 < 3 + 2 * x + 2 * w + z);
        csv.push_str(&format!("{},{z},{w},{y},{y},k\n", ["a", "b"][x as usize]));
    }
    fs::write(dir.join("d.csv"), csv).unwrap();
    fs::write(
        dir.join("s.toml"),
        "x = \"x\"\nx0 = \"a\"\nx1 = \"b\"\nz = [\"z\"]\nw = [\"w\"]\ny = \"y\"\nyhat = [\"copy\", \"flat\"]\n",
    )
    .unwrap();
}

fn audit(dir: &Path, yhat: &str, bn: &str) -> Output {
    let d = dir.join("d.csv");
    let s = dir.join("s.toml");
    let args = [
        "audit",
        "--data",
        d.to_str().unwrap(),
        "--schema",
        s.to_str().unwrap(),
        "--yhat",
        yhat,
        "--bn",
        bn,
        "--replicates",
        "200",
        "--seed",
        "3",
    ];
    run(&args)
}

#[test]
fn audit_exit_status_gates_on_verdict() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    assert_eq!(status(&audit(dir.path(), "copy", "111")), 0);
    assert_eq!(status(&audit(dir.path(), "flat", "000")), 0);
    let fail = audit(dir.path(), "copy", "000");
    assert_eq!(status(&fail), 3);
    let report: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(report["overall"], "FAIL");
    assert_eq!(report["config"]["bn"], "000");
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let s = dir.path().join("s.toml");
    let o = run(&[
        "effects",
        "--data",
        "/nonexistent/d.csv",
        "--schema",
        s.to_str().unwrap(),
        "--outcome",
        "y=1",
    ]);
    assert_eq!(status(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn undefined_parity_is_estimation_error() {
    let dir = tempfile::tempdir().unwrap();
    // the predictor separates the groups, so no level has both strata
    fs::write(
        dir.path().join("d.csv"),
        "x,y,p\na,1,u\na,0,u\nb,1,v\nb,0,v\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "x = \"x\"\nx0 = \"a\"\nx1 = \"b\"\ny = \"y\"\nyhat = [\"p\"]\n",
    )
    .unwrap();
    let d = dir.path().join("d.csv");
    let s = dir.path().join("s.toml");
    let o = run(&[
        "effects",
        "--data",
        d.to_str().unwrap(),
        "--schema",
        s.to_str().unwrap(),
        "--outcome",
        "y=1",
        "--yhat",
        "p",
        "--replicates",
        "0",
    ]);
    assert_eq!(status(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn chain_model_effects() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        status(&run(&[
            "simulate", "--scm", "s1", "--n", "50000", "--seed", "5", "--out", out
        ])),
        0
    );
    fs::write(
        dir.path().join("s.toml"),
        "x = \"X\"\nx0 = \"0\"\nx1 = \"1\"\nw = [\"W\"]\ny = \"Y\"\n",
    )
    .unwrap();
    let d = dir.path().join("panel.csv");
    let s = dir.path().join("s.toml");
    let o = run(&[
        "effects",
        "--data",
        d.to_str().unwrap(),
        "--schema",
        s.to_str().unwrap(),
        "--outcome",
        "Y=1",
        "--replicates",
        "50",
        "--out",
        out,
    ]);
    assert_eq!(status(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let dec = &report["decomposition"];
    for (key, want) in [("de", 0.0), ("ie", -1.0), ("se", 0.0), ("spm", 1.0)] {
        assert!(
            (dec[key].as_f64().unwrap() - want).abs() <= 0.02,
            "{key}: {dec}"
        );
    }
    assert_eq!(dec["residual"].as_f64().unwrap(), 0.0);
    assert_eq!(fs::read(dir.path().join("effects.json")).unwrap(), o.stdout);
}

#[test]
fn verify_pp_residuals_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "verify-pp",
        "--scm",
        "gaussian-mediators",
        "--n",
        "10000",
        "--seed",
        "11",
        "--out",
        out,
    ]);
    assert_eq!(status(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["max_abs_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(report["n_bins"], 20);
    let bins = fs::read_to_string(dir.path().join("pp_bins.csv")).unwrap();
    assert!(bins.starts_with("bin,lo,hi,term1,term2,term3,ppm,residual\n"));
    assert_eq!(
        bins.lines().count(),
        1 + report["bins"].as_array().unwrap().len()
    );
}

#[test]
fn outputs_are_byte_identical_per_seed() {
    let args = ["pareto", "--n", "3000", "--reps", "3", "--seed", "9"];
    let a = run(&args);
    let b = bin()
        .args(args)
        .env("PARITY_SPECTRUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(status(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout.iter().filter(|&&c| c == b'\n').count(), 5);
    let sim = [
        "simulate",
        "--scm",
        "confounded",
        "--n",
        "500",
        "--seed",
        "2",
    ];
    assert_eq!(run(&sim).stdout, run(&sim).stdout);
    let other = run(&[
        "simulate",
        "--scm",
        "confounded",
        "--n",
        "500",
        "--seed",
        "3",
    ]);
    assert_ne!(run(&sim).stdout, other.stdout);
}

#[test]
fn bad_thread_cap_is_usage_error() {
    let o = bin()
        .args(["simulate", "--scm", "s1", "--n", "5", "--seed", "1"])
        .env("PARITY_SPECTRUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(status(&o), 2);
}

#[test]
fn binned_numeric_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("g,income,y\n");
    for i in 0..200 {
        csv.push_str(&format!(
            "{},{}.5,{}\n",
            ["m", "f"][i % 2],
            i * 37 % 1000,
            u8::from(i % 3 == 0)
        ));
    }
    fs::write(dir.path().join("d.csv"), csv).unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "x = \"g\"\nx0 = \"m\"\nx1 = \"f\"\nw = [\"income\"]\ny = \"y\"\nbin = [\"income\"]\n",
    )
    .unwrap();
    let d = dir.path().join("d.csv");
    let s = dir.path().join("s.toml");
    let o = run(&[
        "effects",
        "--data",
        d.to_str().unwrap(),
        "--schema",
        s.to_str().unwrap(),
        "--outcome",
        "y=1",
        "--bins",
        "5",
        "--replicates",
        "20",
    ]);
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
