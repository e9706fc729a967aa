use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pathdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathdec")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn complete_digraph_on_five_vertices_has_twenty_edges() {
    let o = pathdec(&["generate", "--n", "5", "--p", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("5 20"));
}

#[test]
fn example_class_has_t_regular_bipartite_part() {
    let o = pathdec(&["generate", "--class", "example", "--n", "6", "--t", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("6 6"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&pathdec(&["generate"])), 64);
    assert_eq!(code(&pathdec(&["generate", "--n", "5"])), 64);
    assert_eq!(code(&pathdec(&["frobnicate"])), 64);
    assert_eq!(code(&pathdec(&["--help"])), 0);
}

#[test]
fn round_trip_generate_decompose_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let p = dir.path().join("p.txt");
    let o = pathdec(&["generate", "--class", "example", "--n", "200", "--t", "80", "--euler-deg", "8", "--seed", "2", "--out", s(&g)]);
    assert_eq!(code(&o), 0);
    let o = pathdec(&["decompose", "--in", s(&g), "--mode", "permissive", "--seed", "2", "--trace", "--out", s(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("medium cycle=") || l.starts_with("short cycle=")));
    let o = pathdec(&["verify", "--graph", s(&g), "--paths", s(&p)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("PASS"));

    // Tampering: drop the last path.
    let text = fs::read_to_string(&p).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let k: usize = lines[0].split_whitespace().nth(1).unwrap().parse().unwrap();
    lines.pop();
    let header = format!("paths {}", k - 1);
    lines[0] = &header;
    fs::write(&p, lines.join("\n")).unwrap();
    let o = pathdec(&["verify", "--graph", s(&g), "--paths", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("covered 0 of 1"));
}

#[test]
fn verify_names_an_absent_edge() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let p = dir.path().join("p.txt");
    fs::write(&g, "3 1\n0 1\n").unwrap();
    fs::write(&p, "paths 1\n0 2\n").unwrap();
    let o = pathdec(&["verify", "--graph", s(&g), "--paths", s(&p)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("edge 0->2 used 1 times, present 0 times"));
}

#[test]
fn eulerian_input_exits_2_and_bad_input_exits_66() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "3 3\n0 1\n1 2\n2 0\n").unwrap();
    let o = pathdec(&["decompose", "--in", s(&g)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("zero-excess"));
    fs::write(&g, "3 2\n0 1\n").unwrap();
    assert_eq!(code(&pathdec(&["decompose", "--in", s(&g)])), 66);
    assert_eq!(code(&pathdec(&["decompose", "--in", "/nonexistent/file"])), 66);
}

#[test]
fn montecarlo_rows_follow_the_header() {
    let o = pathdec(&["montecarlo", "--n-list", "5", "--p-list", "0.4", "--trials", "200", "--seed", "1", "--cap", "20"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p,trials,fraction,ci_lo,ci_hi,method");
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols.len(), 7);
    let f: f64 = cols[3].parse().unwrap();
    let lo: f64 = cols[4].parse().unwrap();
    let hi: f64 = cols[5].parse().unwrap();
    assert!((0.0..=1.0).contains(&f) && lo <= f && f <= hi);
}

#[test]
fn montecarlo_marks_rows_over_the_cap() {
    let o = pathdec(&["montecarlo", "--n-list", "8", "--p-list", "0.9", "--trials", "5", "--cap", "10"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("8,0.9,5,skipped,,,oracle"));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pathdec"))
            .args(["montecarlo", "--n-list", "5,6", "--p-list", "0.5", "--trials", "100", "--seed", "4", "--cap", "30"])
            .env("PATHDEC_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
