use std::path::Path;
use std::process::{Command, Output};

fn gract(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gract")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

// one ship, cell size 1, one ping per second
fn ship_csv(dir: &Path) -> std::path::PathBuf {
    let cells = [
        (0, 2),
        (1, 3),
        (3, 4),
        (4, 5),
        (6, 6),
        (7, 7),
        (7, 8),
        (9, 9),
        (10, 10),
        (10, 11),
        (12, 12),
    ];
    let mut s = String::from("objectId,timestamp,x,y\n");
    for (t, (x, y)) in cells.iter().enumerate() {
        s += &format!("ship,{t},{x}.5,{y}.5\n");
    }
    let path = dir.join("ship.csv");
    std::fs::write(&path, s).unwrap();
    path
}

fn build_ship(dir: &Path, mode: &str) -> std::path::PathBuf {
    let csv = ship_csv(dir);
    let idx = dir.join(format!("ship-{mode}.idx"));
    let o = gract(&[
        "build",
        "--input",
        p(&csv),
        "--out",
        p(&idx),
        "--period",
        "20",
        "--mode",
        mode,
        "--cell-size",
        "1",
        "--time-step",
        "1",
        "--origin-x",
        "0",
        "--origin-y",
        "0",
        "--width",
        "16",
        "--height",
        "16",
        "--t0",
        "0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    idx
}

#[test]
fn worked_example_prints_position() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["gract", "scdc"] {
        let idx = build_ship(dir.path(), mode);
        let o = gract(&["query", "position", "--index", p(&idx), "--object", "ship", "--t", "5"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "7 7\n");
        let o = gract(&[
            "--json",
            "query",
            "position",
            "--index",
            p(&idx),
            "--object",
            "0",
            "--t",
            "5",
        ]);
        let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(v["x"], 7);
        assert_eq!(v["object"], "ship");
    }
}

#[test]
fn query_rows_are_sorted_and_plain() {
    let dir = tempfile::tempdir().unwrap();
    let idx = build_ship(dir.path(), "gract");
    let o = gract(&[
        "query",
        "trajectory",
        "--index",
        p(&idx),
        "--object",
        "ship",
        "--from",
        "3",
        "--to",
        "5",
    ]);
    assert_eq!(stdout(&o), "3 4 5\n4 6 6\n5 7 7\n");
    let o = gract(&["query", "slice", "--index", p(&idx), "--rect", "6,6,8,8", "--t", "5"]);
    assert_eq!(stdout(&o), "ship 7 7\n");
    let o = gract(&[
        "query",
        "interval",
        "--index",
        p(&idx),
        "--rect",
        "0,0,2,2",
        "--from",
        "3",
        "--to",
        "10",
    ]);
    assert_eq!(stdout(&o), "");
    let o = gract(&[
        "query",
        "interval",
        "--index",
        p(&idx),
        "--rect",
        "0,0,2,2",
        "--from",
        "0",
        "--to",
        "10",
    ]);
    assert_eq!(stdout(&o), "ship\n");
    let o = gract(&["stats", "--index", p(&idx)]);
    assert!(stdout(&o).contains("total"));
}

#[test]
fn gen_build_verify() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let idx = dir.path().join("g.idx");
    let o = gract(&[
        "gen",
        "--objects",
        "40",
        "--instants",
        "400",
        "--seed",
        "9",
        "--out",
        p(&csv),
    ]);
    assert!(o.status.success());
    let o = gract(&[
        "build",
        "--input",
        p(&csv),
        "--period",
        "50",
        "--mode",
        "gract",
        "--out",
        p(&idx),
    ]);
    assert!(o.status.success());
    let o = gract(&[
        "verify",
        "--input",
        p(&csv),
        "--period",
        "50",
        "--queries",
        "200",
        "--seed",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().all(|l| l.ends_with("200/200 match")), "{text}");
    let o = gract(&[
        "--json",
        "bench",
        "--index",
        p(&idx),
        "--workload",
        "20",
        "--threads",
        "3",
    ]);
    assert!(o.status.success());
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["count"], 20);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = gract(&["build", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let csv = ship_csv(dir.path());
    let o = gract(&["build", "--input", p(&csv), "--out", "x.idx", "--period", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let idx = build_ship(dir.path(), "scdc");
    let o = gract(&["query", "position", "--index", p(&idx), "--object", "ship", "--t", "11"]);
    assert_eq!(o.status.code(), Some(1));
    let o = gract(&[
        "query",
        "position",
        "--index",
        p(&idx),
        "--object",
        "nobody",
        "--t",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = gract(&["stats", "--index", p(&csv)]);
    assert_eq!(o.status.code(), Some(3));
    let o = gract(&["stats", "--index", p(&dir.path().join("missing.idx"))]);
    assert_eq!(o.status.code(), Some(3));
}
