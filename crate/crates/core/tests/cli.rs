use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TINY_GRID: &str = r#"rows = 2
cols = 3
ap = ["g", "d"]
p_intended = 0.8
p_side = 0.1
start = "0,0"

[labels]
"1,2" = ["g"]
"#;

const TINY_RUN: &str = r#"grid = "tiny.grid"
task_ltl = "F g"
out = "out"

[ids]
m = 0
n = 1
extended = true

[learn]
seed = 3
gamma = 0.999
epsilon = [0.5, 0.05]
alpha = [0.5, 0.05]

[learn.quick]
episodes = 300
steps = 40
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specgame"));
    c.env_remove("SPECGAME_SEED");
    c
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tiny_workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.grid"), TINY_GRID).unwrap();
    std::fs::write(dir.path().join("tiny.run"), TINY_RUN).unwrap();
    dir
}

fn report_number(report: &str, prefix: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no {prefix:?} line in\n{report}"));
    line[prefix.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(bin().args(["parse", "F ("]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("no-such-command").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("translate").output().unwrap().status.code(), Some(1));
    let missing = bin()
        .args(["product", "--grid", "/nonexistent/x.grid", "--task-ltl", "F g"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/x.grid"));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn parse_prints_normal_form_and_expansion() {
    let o = bin().args(["parse", "--expand", "F<=1 a & X b"]).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["F<=1 a & X b", "X a & X b"]);
    // The normal form parses back to itself.
    let again = bin().args(["parse", lines[0]]).output().unwrap();
    assert_eq!(stdout(&again).trim(), lines[0]);
}

#[test]
fn translate_writes_hoa() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ids.hoa");
    let o = bin()
        .args(["translate", "--ids-m", "0", "--ids-n", "1", "--extended", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let hoa = std::fs::read_to_string(&path).unwrap();
    assert!(hoa.starts_with("HOA: v1"));
    assert!(hoa.contains("acc-name: Rabin 1"));
    let parsed = specgame::automata::parse_hoa(&hoa).unwrap();
    assert!(stdout(&o).contains(&format!("({} states)", parsed.num_states())));

    let o = bin().args(["translate", "--ltl", "F a"]).output().unwrap();
    assert!(stdout(&o).starts_with("HOA: v1"));
}

#[test]
fn product_reports_sizes() {
    let f = fixtures();
    let o = bin()
        .current_dir(&f)
        .args([
            "product",
            "--grid",
            "surveillance.grid",
            "--task",
            "task_surveillance.hoa",
            "--ids-m",
            "0",
            "--ids-n",
            "1",
            "--extended",
        ])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    // 7x9 cells: one controller, four attacker and sixteen chance states each.
    assert!(text.contains("game states: 1323 (controller 63, attacker 252, chance 1008)"), "{text}");
    assert!(text.contains("acceptance pairs: 1"));
}

#[test]
fn scenarios_report_event_probabilities() {
    let f = fixtures();
    let o = bin()
        .current_dir(&f)
        .args(["evaluate", "--scenario", "corridor.scenario", "--scenario", "drag.scenario"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("probability 0.640000"), "{text}");
    assert!(text.contains("probability 0.512000"), "{text}");
}

#[test]
fn learn_then_evaluate_with_oracles() {
    let dir = tiny_workspace();
    let run = dir.path().join("tiny.run");
    let o = bin()
        .arg("learn")
        .arg(&run)
        .args(["--episodes", "40000", "--full"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in ["qtable.txt", "controller.strategy", "attacker.strategy", "learning_curve.csv", "summary.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("episodes 40000"));
    assert!(summary.contains("seed 3"));
    let curve = std::fs::read_to_string(out.join("learning_curve.csv")).unwrap();
    assert!(curve.lines().count() > 100);

    let o = bin().arg("evaluate").arg(&run).arg("--oracle").output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["heatmap.csv", "arrows.csv", "oracle_report.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let heat = std::fs::read_to_string(out.join("heatmap.csv")).unwrap();
    assert!(heat.lines().count() >= 2);
    let report = std::fs::read_to_string(out.join("oracle_report.txt")).unwrap();
    let learned = report_number(&report, "learned initial value:");
    let vi = report_number(&report, "value iteration initial value:");
    let br = report_number(&report, "best response to learned controller:");
    assert!((learned - vi).abs() < 0.05, "{report}");
    assert!(br <= vi + 1e-6 && br > vi - 0.05, "{report}");
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tiny_workspace();
    let run = dir.path().join("tiny.run");
    let learn = |seed: Option<&str>, flag: Option<&str>, out: &str| {
        let mut c = bin();
        c.arg("learn").arg(&run).args(["--out", out]);
        if let Some(s) = seed {
            c.env("SPECGAME_SEED", s);
        }
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        assert!(c.current_dir(dir.path()).output().unwrap().status.success());
        std::fs::read_to_string(dir.path().join(out).join("summary.txt")).unwrap()
    };
    assert!(learn(None, None, "a").contains("seed 3\n"));
    assert!(learn(Some("17"), None, "b").contains("seed 17\n"));
    assert!(learn(Some("17"), Some("5"), "c").contains("seed 5\n"));
    let q = |d: &str| std::fs::read_to_string(dir.path().join(d).join("qtable.txt")).unwrap();
    let again = learn(Some("17"), None, "d");
    assert!(again.contains("seed 17\n"));
    assert_eq!(q("b"), q("d"));
}

#[test]
fn several_runs_write_a_mean_curve() {
    let dir = tiny_workspace();
    let o = bin()
        .current_dir(dir.path())
        .args(["learn", "tiny.run", "--runs", "2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".csv")), "{names:?}");
    let runs: Vec<&String> = names.iter().filter(|n| n.starts_with("run-")).collect();
    assert_eq!(runs.len(), 2, "{names:?}");
    let s0 = std::fs::read_to_string(out.join(runs[0]).join("summary.txt")).unwrap();
    let s1 = std::fs::read_to_string(out.join(runs[1]).join("summary.txt")).unwrap();
    assert_ne!(s0.contains("seed 3\n"), s1.contains("seed 3\n"));
    assert!(s0.contains("seed 4\n") || s1.contains("seed 4\n"));
}
