use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value as Json;
use tempfile::TempDir;

fn vor(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("vor").chain(args.iter().copied());
    let code = vor_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn generated(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let mut args = vec!["gen", name, "-o", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, _, err) = vor(&args);
    assert_eq!(code, 0, "{err}");
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fig2_ratio() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig2", &[]);
    let (code, out, _) = vor(&["vor", s(&f), "--concept", "opt"]);
    assert_eq!(code, 0);
    let doc: Json = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["ratio"]["exact"], "9/4");
    assert_eq!(doc["ratio"]["approx"], "2.25000000000");
    assert_eq!(doc["recall"]["utility"]["exact"], "3/2");
}

#[test]
fn fig1_worst_cdt() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig1", &["--eps", "1/100"]);
    let (code, out, err) = vor(&["solve", s(&f), "--concept", "cdt", "--worst"]);
    assert_eq!(code, 0, "{err}");
    let doc: Json = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["concept"], "wCDT");
    assert_eq!(doc["utilities"][0], "2");
}

#[test]
fn unknown_subcommand_exits_2() {
    let status = Command::new(env!("CARGO_BIN_EXE_vor")).arg("frobnicate").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert_eq!(vor(&["frobnicate"]).0, 2);
    assert_eq!(vor(&["solve"]).0, 2);
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig3", &[]);
    assert_eq!(vor(&["validate", s(&f)]), (0, "ok\n".to_string(), String::new()));

    let text = std::fs::read_to_string(&f).unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, text.replacen("\"a\",", "\"ghost\",", 1)).unwrap();
    let (code, out, _) = vor(&["validate", s(&broken)]);
    assert_eq!(code, 1);
    assert!(out.contains("ghost"), "{out}");

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, &text[..text.len() / 2]).unwrap();
    let (code, _, err) = vor(&["validate", s(&garbled)]);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");

    assert_eq!(vor(&["validate", s(&dir.path().join("missing.json"))]).0, 2);
}

#[test]
fn bad_concept_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig2", &[]);
    assert_eq!(vor(&["solve", s(&f), "--concept", "xdt"]).0, 2);
    assert_eq!(vor(&["solve", s(&f), "--concept", "edt", "--best", "--worst"]).0, 2);
}

#[test]
fn domain_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig1", &[]);
    assert_eq!(vor(&["bounds", s(&f)]).0, 1);
    let f = generated(&dir, "x3c", &[]);
    let (code, _, err) = vor(&["partial-best", s(&f), "--k", "2", "--max-refinements", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn refine_then_validate() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig2", &[]);
    let fine = dir.path().join("fine.json");
    assert_eq!(vor(&["refine", s(&f), "--player", "1", "-o", s(&fine)]).0, 0);
    assert_eq!(vor(&["validate", s(&fine)]).0, 0);
    let (_, out, _) = vor(&["solve", s(&fine), "--concept", "opt"]);
    let doc: Json = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["utilities"][0], "3/2");
}

#[test]
fn generators_are_byte_stable() {
    let (_, a, _) = vor(&["gen", "random", "--seed", "9", "--depth", "3", "--absentminded"]);
    let (_, b, _) = vor(&["gen", "random", "--seed", "9", "--depth", "3", "--absentminded"]);
    assert_eq!(a, b);
    let env = Command::new(env!("CARGO_BIN_EXE_vor"))
        .args(["gen", "random", "--depth", "3", "--absentminded"])
        .env("VOR_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), a);
    for name in ["fig5", "dory", "sat", "x3c", "valid-utility"] {
        let (code, out, err) = vor(&["gen", name]);
        assert_eq!(code, 0, "{name}: {err}");
        assert!(out.starts_with('{'));
    }
}

#[test]
fn partial_best_writes_the_winner() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "x3c", &["--n", "6", "--family", "1 2 3; 4 5 6; 1 2 4"]);
    let win = dir.path().join("win.json");
    let (code, out, err) = vor(&["partial-best", s(&f), "--k", "1", "-o", s(&win)]);
    assert_eq!(code, 0, "{err}");
    let doc: Json = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["utility"]["exact"], "1");
    assert!(doc.get("game").is_none());
    assert_eq!(vor(&["validate", s(&win)]).0, 0);
}

#[test]
fn smooth_check_verdicts() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "valid-utility", &[]);
    let (code, out, _) = vor(&["smooth-check", s(&f), "--lambda", "1", "--mu", "1", "--samples", "500"]);
    assert_eq!(code, 0);
    let doc: Json = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["verdict"], "pure-verified");
    assert_eq!(doc["equilibria"]["holds"], true);
    let (code, out, _) = vor(&["smooth-check", s(&f), "--lambda", "1", "--mu", "0", "--samples", "500"]);
    assert_eq!(code, 1);
    assert!(out.contains("falsified"));
    assert_eq!(vor(&["smooth-check", s(&f), "--lambda", "0", "--mu", "1"]).0, 2);
}

#[test]
fn dot_output() {
    let dir = TempDir::new().unwrap();
    let f = generated(&dir, "fig2", &[]);
    let (code, out, _) = vor(&["export-dot", s(&f)]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph"));
    assert_eq!(out.matches("style=dashed").count(), 2);
}

#[test]
fn help_shows_defaults() {
    let (code, out, _) = vor(&["solve", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("[default: 0.015625]"), "{out}");
    assert!(out.contains("VOR_SEED"));
}
