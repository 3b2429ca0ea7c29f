use std::path::Path;
use std::process::{Command, Output};

fn hopcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopcut"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

#[test]
fn two_vertex_run_gives_a_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let (t, g) = (dir.path().join("t.json"), dir.path().join("g.txt"));
    let out = hopcut(&["run", "--n", "2", "--out", arg(&t), "--graph-out", arg(&g)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let graph = hopcut::graph::parse_edge_list(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(graph.edges(), &[(0, 1)]);
    let out = hopcut(&["verify", "--transcript", arg(&t), "--graph", arg(&g)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
}

#[test]
fn corrupted_degree_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (t, g) = (dir.path().join("t.json"), dir.path().join("g.txt"));
    let out = hopcut(&["run", "--n", "16", "--seed", "3", "--out", arg(&t), "--graph-out", arg(&g)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    let recorded = value["final_phase"]["delta_measured"].as_u64().unwrap();
    value["final_phase"]["delta_measured"] = (recorded + 1).into();
    std::fs::write(&t, serde_json::to_string(&value).unwrap()).unwrap();
    let out = hopcut(&["verify", "--transcript", arg(&t), "--graph", arg(&g)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("degree"), "{}", text(&out));
}

#[test]
fn warmup_prints_exact_increments() {
    let out = hopcut(&["warmup", "--n", "16", "--k", "4", "--t", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let expected = format!("{:.9}", 16.0 * 4f64.ln());
    assert_eq!(stdout.matches(&format!("delta {expected}")).count(), 2, "{stdout}");
}

#[test]
fn warmup_over_budget_fails() {
    assert_eq!(hopcut(&["warmup", "--n", "16", "--k", "4", "--t", "1"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hopcut(&["warmup", "--n", "15", "--k", "4", "--t", "2"]).status.code(), Some(2));
    assert_eq!(hopcut(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(hopcut(&["run", "--n", "8", "--player", "nobody"]).status.code(), Some(2));
    assert_eq!(hopcut(&["verify", "--transcript", "/nonexistent", "--graph", "/nonexistent"]).status.code(), Some(2));
}

#[test]
fn no_color_output_is_plain() {
    let out = hopcut(&["krv", "--barbell", "5", "--phi", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(!text(&out).contains('\u{1b}'));
}

#[test]
fn golden_transcript_is_reproduced() {
    let dir = tempfile::tempdir().unwrap();
    let (t, g) = (dir.path().join("t.json"), dir.path().join("g.txt"));
    let out = hopcut(&[
        "run", "--n", "64", "--player", "random", "--seed", "7", "--override", "k=4", "--override", "324=2",
        "--override", "36=2", "--out", arg(&t), "--graph-out", arg(&g),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    assert_eq!(std::fs::read(&t).unwrap(), std::fs::read(golden.join("run_n64_seed7.json")).unwrap());
    assert_eq!(std::fs::read(&g).unwrap(), std::fs::read(golden.join("run_n64_seed7.graph")).unwrap());
    let transcript =
        hopcut::game::GameTranscript::from_json(&std::fs::read_to_string(&t).unwrap()).unwrap();
    let f = transcript.final_phase.unwrap();
    assert!(f.b_used <= f.b_max);
}

#[test]
fn cover_and_decompose_compose() {
    let dir = tempfile::tempdir().unwrap();
    let (g, c) = (dir.path().join("g.txt"), dir.path().join("c.json"));
    let cycle = hopcut::graph::MultiGraph::cycle(200);
    std::fs::write(&g, hopcut::graph::write_edge_list(&cycle)).unwrap();
    let out = hopcut(&["cover", "--graph", arg(&g), "--h-sep", "2", "--h-diam", "4", "--load-max", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    std::fs::write(&c, &out.stdout).unwrap();
    let out = hopcut(&["decompose", "--cover", arg(&c), "--c", "0.5", "--k", "2", "--k-prime", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
}
