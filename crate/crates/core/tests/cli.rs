use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use laminar::complex::*;
use laminar::io::parse;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn laminar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laminar"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sink_disks_on_disk_sink() {
    let o = laminar(&["sink-disks", "fixtures/disk_sink"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("s0"));
}

#[test]
fn laminate_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c");
    let cert = cert.to_str().unwrap();
    assert_eq!(code(&laminar(&["laminate", "fixtures/necklace3", "--out", cert])), 0);
    assert_eq!(code(&laminar(&["laminate", "--check", cert])), 0);

    let text = std::fs::read_to_string(cert).unwrap();
    let (mutated, _) = laminar::lamination::mutate_step_field(&text, 3).unwrap();
    std::fs::write(cert, mutated).unwrap();
    assert_eq!(code(&laminar(&["laminate", "--check", cert])), 1);
    std::fs::write(cert, "{").unwrap();
    assert_eq!(code(&laminar(&["laminate", "--check", cert])), 2);
}

#[test]
fn corrupted_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad");
    let text = std::fs::read_to_string(fixtures().join("pita")).unwrap();
    std::fs::write(&bad, text.replacen("euler_char = 0", "euler_char = zero", 1)).unwrap();
    let o = laminar(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 17"));
    assert_eq!(code(&laminar(&["validate", "no/such/file"])), 2);
    assert_eq!(code(&laminar(&["validate", "gen:necklace(1)"])), 2);
}

#[test]
fn verdicts_match_the_library() {
    for name in fixture_names() {
        let path = format!("fixtures/{name}");
        let b = parse(&std::fs::read_to_string(fixtures().join(&name)).unwrap()).unwrap();
        let expect = |empty: bool| if empty { 0 } else { 1 };
        assert_eq!(code(&laminar(&["sink-disks", &path])), expect(find_sink_disks(&b).is_empty()), "{name}");
        assert_eq!(code(&laminar(&["removable", &path])), expect(find_removable_disks(&b).is_empty()), "{name}");
        assert_eq!(code(&laminar(&["bubbles", &path])), expect(find_bubble_candidates(&b).is_empty()), "{name}");
        assert_eq!(code(&laminar(&["chains", &path])), expect(decompose_chains_cycles(&b).is_ok()), "{name}");
        assert_eq!(code(&laminar(&["validate", &path])), 0, "{name}");
    }
}

#[test]
fn fixture_directory_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_laminar"))
        .args(["sink-disks", "fixtures/disk_sink"])
        .env("LAMINAR_FIXTURES", fixtures())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("s0"));
}

#[test]
fn split_script_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("moves");
    std::fs::write(&script, "split 1 @ e0\nsplit 1 @ e1\n").unwrap();
    let trace = dir.path().join("trace");
    let o = laminar(&[
        "split",
        "fixtures/split_ladder",
        "--script",
        script.to_str().unwrap(),
        "--region",
        "s0",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("laminar, conditional"));
    for i in 0..3 {
        let text = std::fs::read_to_string(trace.join(format!("step{i:03}"))).unwrap();
        assert!(parse(&text).is_ok());
    }

    std::fs::write(&script, "split 1 @ e0\nsplit 1 @ e0\n").unwrap();
    let o = laminar(&["split", "fixtures/split_ladder", "--script", script.to_str().unwrap(), "--region", "s0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("move 2"));
    std::fs::write(&script, "slide e0\n").unwrap();
    let o = laminar(&["split", "fixtures/split_ladder", "--script", script.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn dot_has_one_node_per_disk() {
    let o = laminar(&["export-dot", "gen:necklace(4)"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.matches("shape=").count(), 4);
    assert_eq!(text.matches(" -> ").count(), 4);
}

#[test]
fn epsilon_and_outputs() {
    assert_eq!(code(&laminar(&["laminate", "fixtures/genus2", "--epsilon", "1e-9"])), 0);
    assert_eq!(code(&laminar(&["laminate", "fixtures/genus2", "--epsilon", "0"])), 2);
    assert_eq!(code(&laminar(&["laminate", "fixtures/disk_sink"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eff");
    assert_eq!(code(&laminar(&["make-efficient", "gen:pita", "--out", out.to_str().unwrap()])), 0);
    let reduced = parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(find_removable_disks(&reduced).is_empty());
    let o = laminar(&["collapse", "fixtures/pita", "--pair", "s0", "s1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(parse(&stdout(&o)).unwrap().sectors.len(), 1);
    assert_eq!(code(&laminar(&["collapse", "fixtures/necklace3", "--pair", "s0", "s1"])), 1);
}
