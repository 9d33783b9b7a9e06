use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gca_cli::problem::RawProblem;
use gca_cli::render::Format;
use gca_cli::{run, verify_certificates, CliError, Options, Problem, Report};
use serde_json::{json, Value};

fn zoo_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/zoo.json")
}

fn zoo() -> Problem {
    Problem::load(&zoo_path()).expect("zoo loads")
}

fn opts(p: &Problem) -> Options {
    Options { budget: p.budget, cross_check: false }
}

fn analyze(p: &Problem, map: &str) -> Report {
    run(&gca_cli::Command::Analyze { map: map.into(), max_side: 3 }, p, &opts(p)).unwrap().report
}

fn gca(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gca")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn with_zoo<'a>(args: &[&'a str], zoo: &'a str) -> Vec<&'a str> {
    args.iter().copied().chain(["--input", zoo]).collect()
}

fn edited(f: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(zoo_path()).unwrap()).unwrap();
    f(&mut v);
    v.to_string()
}

#[test]
fn zoo_loads_and_verifies_every_map() {
    let p = zoo();
    assert!(p.maps.values().all(|m| m.hom.is_verified()));
    assert!(p.maps.contains_key("XOR"));
}

#[test]
fn nonhomomorphic_rule_is_rejected() {
    let text = edited(|v| {
        v["maps"]["BAD"] = json!({ "domain": "FULLS3", "rule": "x[0] * x[1]" });
    });
    let e = Problem::from_str("bad.json", &text).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().contains("not a group homomorphism"), "{e}");
}

#[test]
fn undefined_group_is_an_unresolved_reference() {
    let text = edited(|v| {
        v["shifts"]["FULLZ5"] = json!({ "group": "Z5", "dim": 1 });
    });
    let e = Problem::from_str("bad.json", &text).unwrap_err();
    assert!(matches!(&e, CliError::Validation(m) if m.contains("unresolved reference") && m.contains("Z5")), "{e}");
}

#[test]
fn unknown_keys_and_syntax_errors() {
    let text = edited(|v| {
        v["shifts"]["FULLZ2"]["forbiden"] = json!([]);
    });
    let e = Problem::from_str("typo.json", &text).unwrap_err();
    assert!(matches!(e, CliError::Parse { .. }), "{e}");
    let e = Problem::from_str("broken.json", "{\n  \"groups\": {,\n}").unwrap_err();
    let CliError::Parse { line, column, .. } = e else { panic!("expected a parse error") };
    assert_eq!((line, column), (2, 14));
}

#[test]
fn non_group_shift_is_rejected() {
    let text = edited(|v| {
        v["shifts"]["GOLDEN"] = json!({ "group": "Z2", "dim": 1, "forbidden": [{ "cells": [[0], [1]], "values": ["1", "1"] }] });
    });
    let e = Problem::from_str("golden.json", &text).unwrap_err();
    assert!(e.to_string().contains("not a group shift"), "{e}");
}

#[test]
fn cayley_tables() {
    let p = zoo();
    assert_eq!(p.group("V4").unwrap().order(), 4);
    let text = edited(|v| {
        v["groups"]["BAD"] = json!({ "cayley": [["e", "a"], ["a", "a"]] });
    });
    assert!(Problem::from_str("bad.json", &text).is_err());
}

fn verdict<'a>(r: &'a Report, property: &str) -> &'a Value {
    &r.verdict(property).unwrap_or_else(|| panic!("no verdict {property}")).verdict
}

#[test]
fn analyze_xor() {
    let r = analyze(&zoo(), "XOR");
    assert_eq!(verdict(&r, "surjective"), &json!(true));
    assert_eq!(verdict(&r, "injective"), &json!(false));
    let cert = serde_json::to_value(&r.verdict("injective").unwrap().certificate).unwrap();
    assert_eq!(cert, json!({ "kind": "configuration", "configuration": { "periods": [1], "rows": [["1"]] } }));
    assert_eq!(verdict(&r, "sensitivity"), &json!("sensitive"));
    assert_eq!(verdict(&r, "nilpotent"), &json!(false));
}

#[test]
fn analyze_two_point() {
    let start = Instant::now();
    let r = analyze(&zoo(), "TWOPOINT");
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(verdict(&r, "surjective"), &json!(false));
    let cert = serde_json::to_value(&r.verdict("surjective").unwrap().certificate).unwrap();
    assert_eq!(cert, json!({ "kind": "pattern", "pattern": { "cells": [[0]], "values": ["1"] } }));
    assert_eq!(verdict(&r, "pre-injective"), &json!(true));
    assert_eq!(verdict(&r, "nilpotent"), &json!(true));
    assert_eq!(verdict(&r, "eventually periodic"), &json!(true));
    let d = r.verdict("eventually periodic").unwrap().details.as_ref().unwrap();
    assert_eq!((&d["preperiod"], &d["period"]), (&json!(1), &json!(1)));
}

#[test]
fn entropy_of_the_full_shift() {
    let p = zoo();
    let r = run(&gca_cli::Command::Entropy { shift: "FULLZ2".into() }, &p, &opts(&p)).unwrap().report;
    let h = verdict(&r, "entropy").as_f64().unwrap();
    assert!((h - 0.693147).abs() < 1e-6);
}

#[test]
fn reports_round_trip_and_certificates_reverify() {
    let p = zoo();
    let maps = ["XOR", "TWOPOINT", "SHIFT", "ID", "DOUBLE", "ZERO", "XOR3", "V4SWAP"];
    let mut checked = 0;
    for m in maps {
        let r = analyze(&p, m);
        let back = Report::from_json("report.json", &r.to_json()).unwrap();
        assert_eq!(back, r);
        for (property, ok) in verify_certificates(&back, &p).unwrap() {
            assert!(ok, "{m}: {property} certificate fails");
            checked += 1;
        }
    }
    assert!(checked >= 2 * maps.len());
    use gca_cli::Command as C;
    for cmd in [
        C::Member { shift: "FULLZ2".into(), pattern: "ZEROONE".into() },
        C::Member { shift: "TWOPOINTS".into(), pattern: "ZEROONE".into() },
        C::Member { shift: "LEDRAPPIER".into(), pattern: "DOMINO".into() },
        C::Compare { first: "FULLZ2".into(), second: "TWOPOINTS".into() },
    ] {
        let r = run(&cmd, &p, &opts(&p)).unwrap().report;
        let checks = verify_certificates(&Report::from_json("r.json", &r.to_json()).unwrap(), &p).unwrap();
        assert!(!checks.is_empty() && checks.iter().all(|(_, ok)| *ok), "{cmd:?}");
    }
}

#[test]
fn forged_certificates_fail() {
    let p = zoo();
    let mut r = analyze(&p, "XOR");
    let e = r.verdicts.iter_mut().find(|v| v.property == "injective").unwrap();
    e.certificate = Some(serde_json::from_value(json!({ "kind": "configuration", "configuration": { "periods": [2], "rows": [["0", "1"]] } })).unwrap());
    let checks = verify_certificates(&r, &p).unwrap();
    assert!(checks.iter().any(|(prop, ok)| prop == "injective" && !ok));
}

#[test]
fn presentations_reload_as_shifts() {
    let p = zoo();
    let r = run(&gca_cli::Command::Kernel { map: "XOR".into() }, &p, &opts(&p)).unwrap().report;
    let k = p.build_shift(&r.presentations["kernel"]).unwrap();
    let ones = gca_core::shape::PeriodicConfiguration::uniform(p.group("Z2").unwrap(), 1, 1);
    assert!(k.torus_member(&ones));
    let mut raw: RawProblem = serde_json::from_str(&std::fs::read_to_string(zoo_path()).unwrap()).unwrap();
    raw.shifts.insert("KER".into(), r.presentations["kernel"].clone());
    assert!(Problem::from_raw("with-kernel.json", raw).is_ok());
}

#[test]
fn orbit_rendering() {
    let p = zoo();
    let orbit = |map: &str, config: &str, steps, format| {
        run(&gca_cli::Command::Orbit { map: map.into(), config: config.into(), steps, format }, &p, &opts(&p))
            .unwrap()
            .artifact
            .unwrap()
    };
    let text = String::from_utf8(orbit("XOR", "SEED16", 16, Format::Text)).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[3], "#............###");
    assert_eq!(rows[15], "################");
    let id = String::from_utf8(orbit("ID", "ALT", 4, Format::Text)).unwrap();
    assert_eq!(id, ".#\\n".replace("\\n", "\n").repeat(4));
    let zero = String::from_utf8(orbit("ZERO", "ONES", 2, Format::Pgm)).unwrap();
    assert_eq!(zero, "P2\n1 2\n255\n0\n255\n");
}

#[test]
fn exit_codes() {
    let z = zoo_path().display().to_string();
    let (code, out, _) = gca(&with_zoo(&["analyze", "TWOPOINT"], &z));
    assert_eq!(code, 0, "false verdicts are not errors");
    let r = Report::from_json("stdout", &out).unwrap();
    assert_eq!(r.version, env!("CARGO_PKG_VERSION"));
    assert_eq!((r.budget.period, r.budget.max_box, r.budget.steps), (8, 8, 5_000_000));
    let (code, _, err) = gca(&with_zoo(&["member", "LEDRAPPIER", "DOMINO", "--budget-period", "1", "--budget-box", "1"], &z));
    assert_eq!(code, 2, "{err}");
    let (code, _, err) = gca(&with_zoo(&["analyze", "NOSUCHMAP"], &z));
    assert_eq!(code, 3);
    assert!(err.contains("unresolved reference"));
    let (code, _, _) = gca(&with_zoo(&["orbit", "TWOPOINT", "--config", "ALT"], &z));
    assert_eq!(code, 3, "configuration outside the shift");
    let (code, _, _) = gca(&["frobnicate"]);
    assert_eq!(code, 3);
    let (code, _, _) = gca(&["analyze", "XOR", "--input", "/nonexistent/zoo.json"]);
    assert_eq!(code, 1);
}

#[test]
fn report_and_artifact_files() {
    let z = zoo_path().display().to_string();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let pgm = dir.path().join("orbit.pgm");
    let (r, o) = (report.display().to_string(), pgm.display().to_string());
    let args = ["orbit", "XOR", "--config", "SEED16", "--steps", "16", "--format", "pgm", "--out", &o, "--report", &r];
    let (code, _, err) = gca(&with_zoo(&args, &z));
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(&pgm).unwrap().starts_with("P2\n16 16\n255\n"));
    let rep = Report::from_json(&r, &std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep.command, "orbit");
    let (code, out, _) = gca(&with_zoo(&["image", "XOR", "--cross-check"], &z));
    assert_eq!(code, 0);
    let rep = Report::from_json("stdout", &out).unwrap();
    assert_eq!(verdict(&rep, "routes agree"), &json!(true));
    assert!(rep.presentations["image"].forbidden.is_empty());
}
