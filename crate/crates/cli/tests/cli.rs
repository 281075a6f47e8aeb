//! End-to-end runs of the `isc` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isc_core::curves::SupportCurves;
use isc_core::num::rat;
use isc_core::DiscreteMeasure;
use serde_json::Value;

const EX1: &str = r#"{"mu":[{"x":"0","w":"1"}],"nu":[{"x":"-2","w":"1/2"},{"x":"1","w":"1/2"}]}"#;
const W: &str = r#"{"mu":[{"x":"-1","w":"1/2"},{"x":"1","w":"1/2"}],"nu":[{"x":"-2","w":"1/2"},{"x":"0","w":"0.5"}]}"#;
/// The middle atom of the three-point target and the two outer atoms.
const NESTED: &str = r#"{"mu":[{"x":"0","w":"1/3"}],"nu":[{"x":"-2","w":"1/3"},{"x":"2","w":"1/3"}]}"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn isc(args: &[&str], input: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isc"));
    cmd.args(args);
    if let Some(p) = input {
        cmd.arg("-i").arg(p);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn atoms(v: &Value) -> Vec<(String, String)> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|a| (a["x"].as_str().unwrap().to_string(), a["w"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn shadow_outputs_exact_rationals() {
    let ws = Workspace::new();
    let out = isc(&["shadow"], Some(&ws.file("nested.json", NESTED)));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(atoms(&v["shadow"]), [("-2".into(), "1/6".into()), ("2".into(), "1/6".into())]);
    assert_eq!(v["excess"], "0");
}

#[test]
fn ustar_prints_a_bare_rational() {
    let ws = Workspace::new();
    let out = isc(&["ustar"], Some(&ws.file("ex1.json", EX1)));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "3/4");
}

#[test]
fn couple_and_verify_exit_codes() {
    let ws = Workspace::new();
    let w = ws.file("w.json", W);
    let out = isc(&["couple", "--method", "increasing", "--verify"], Some(&w));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["all_ok"], true);
    let saved = ws.file("pi.json", &String::from_utf8(out.stdout).unwrap());

    let out = isc(&["couple", "--method", "antitone", "--verify"], Some(&w));
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["report"]["supermartingale"]["ok"], false);
    let antitone = ws.file("at.json", &serde_json::to_string(&v["coupling"]).unwrap());

    let out = isc(&["verify", "--coupling", saved.to_str().unwrap()], Some(&w));
    assert_eq!(out.status.code(), Some(0));
    let out = isc(&["verify", "--coupling", antitone.to_str().unwrap()], Some(&w));
    assert_eq!(out.status.code(), Some(1));
    let flat = ws.file("flat.json", r#"[{"x":"-1","y":"-2","p":"1/2"},{"x":"1","y":"0","p":"1/2"}]"#);
    let out = isc(&["verify", "--coupling", flat.to_str().unwrap()], Some(&w));
    assert_eq!(out.status.code(), Some(1), "the quantile coupling is not left-monotone here");
}

#[test]
fn curves_csv_matches_the_library() {
    let ws = Workspace::new();
    let out = isc(&["curves", "--grid", "15", "--csv"], Some(&ws.file("w.json", W)));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,region,G,R,S,T,phi"));
    let mu = DiscreteMeasure::new([(rat(-1, 1), rat(1, 2)), (rat(1, 1), rat(1, 2))]).unwrap();
    let nu = DiscreteMeasure::new([(rat(-2, 1), rat(1, 2)), (rat(0, 1), rat(1, 2))]).unwrap();
    let curves = SupportCurves::new(&mu, &nu).unwrap();
    let show = |r: &Option<isc_core::Rational>| r.as_ref().map(ToString::to_string).unwrap_or_default();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15);
    for (k, row) in rows.iter().enumerate() {
        let t = curves.triple_at(&rat(k as i64 + 1, 16)).unwrap();
        let expected =
            [t.u.to_string(), t.region.as_str().into(), t.g.to_string(), show(&t.r), show(&t.s), show(&t.t), show(&t.phi)]
                .join(",");
        assert_eq!(*row, expected);
    }
    assert!(rows.contains(&"5/8,supermartingale,1,,,0,3/8"));
}

#[test]
fn oracle_checks() {
    let ws = Workspace::new();
    let out = isc(&["oracle", "--check", "minimality"], Some(&ws.file("n.json", NESTED)));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["minimal"], true);

    let out = isc(&["oracle", "--check", "optimality"], Some(&ws.file("w.json", W)));
    let v = json(&out);
    assert_eq!((v["cost"].as_str(), v["lp_minimum"].as_str(), v["lp_maximum"].as_str()), (Some("15/2"), Some("11/2"), Some("15/2")));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seeded_instances_round_trip() {
    let ws = Workspace::new();
    for seed in 0..20u64 {
        let out = isc(&["instance", "--seed", &seed.to_string()], None);
        assert_eq!(out.status.code(), Some(0));
        let first = String::from_utf8(out.stdout).unwrap();
        let path = ws.file("inst.json", &first);
        let again = isc(&["instance"], Some(&path));
        assert_eq!(String::from_utf8(again.stdout).unwrap(), first);
    }
}

#[test]
fn decompose_reports_components() {
    let ws = Workspace::new();
    let body = r#"{"mu":[{"x":"-1","w":"1/4"},{"x":"0","w":"1/4"},{"x":"1","w":"1/4"},{"x":"3","w":"1/4"}],
                   "nu":[{"x":"-2","w":"1/8"},{"x":"0","w":"1/2"},{"x":"2","w":"1/4"},{"x":"4","w":"1/8"}]}"#;
    let out = isc(&["decompose"], Some(&ws.file("d.json", body)));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["martingale"].as_array().unwrap().len(), 3);
    assert_eq!(atoms(&v["fixed_part"]), [("0".into(), "1/4".into())]);
    assert_eq!(v["x_star"], "+inf");
}

#[test]
fn input_errors_exit_with_two() {
    let ws = Workspace::new();
    let wrong_way = ws.file("up.json", r#"{"mu":[{"x":"0","w":"1"}],"nu":[{"x":"1","w":"1"}]}"#);
    assert_eq!(isc(&["ustar"], Some(&wrong_way)).status.code(), Some(2));
    assert_eq!(isc(&["shadow"], Some(&ws.file("bad.json", "{"))).status.code(), Some(2));
    let negative = ws.file("neg.json", r#"{"mu":[{"x":"0","w":"-1"}],"nu":[{"x":"0","w":"1"}]}"#);
    assert_eq!(isc(&["shadow"], Some(&negative)).status.code(), Some(2));
    let half = ws.file("half.json", r#"{"mu":[{"x":"0","w":"1/2"}],"nu":[{"x":"0","w":"1/2"}]}"#);
    assert_eq!(isc(&["couple"], Some(&half)).status.code(), Some(2), "coupling needs probabilities");
    assert_eq!(isc(&["ustar"], None).status.code(), Some(2));
}
