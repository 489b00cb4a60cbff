use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bsg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsg")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("game.cfg");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn sweep_csv_layout_and_determinism() {
    let dir = TempDir::new().unwrap();
    let first = bsg(&["sweep"], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "alpha_d,alpha_a,x_1,x_2,x_3,x_4,y_1,y_2,y_3,y_4,perceived_cost,true_loss_a0,true_loss,iterations,residual,converged"
    );
    assert_eq!(lines.len(), 10);
    let alphas: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(alphas, ["0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9", "1"]);
    assert!(lines.iter().all(|l| !l.ends_with(',')));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));

    let again = TempDir::new().unwrap();
    assert_eq!(bsg(&["sweep"], again.path()).status.code(), Some(0));
    assert_eq!(csv, fs::read_to_string(again.path().join("sweep.csv")).unwrap());
}

fn attribute<'a>(tag: &'a str, name: &str) -> &'a str {
    let start = tag.find(&format!(" {name}=\"")).unwrap() + name.len() + 3;
    let len = tag[start..].find('"').unwrap();
    &tag[start..start + len]
}

// (alpha_d, value) text pairs in document order
fn markers(svg: &str) -> Vec<(String, String)> {
    svg.lines()
        .filter(|l| l.starts_with("<circle"))
        .map(|l| (attribute(l, "data-alpha-d").to_string(), attribute(l, "data-value").to_string()))
        .collect()
}

#[test]
fn plots_show_exactly_the_csv_values() {
    let dir = TempDir::new().unwrap();
    let out = bsg(&["sweep", "--svg", "--alpha-d-grid", "0.4:1.0:0.2", "--zero-inherent"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let n = 4;

    let expected_by_column = |column: usize| -> Vec<(String, String)> {
        rows.iter().map(|r| (r[0].to_string(), r[column].to_string())).collect()
    };
    let defense = fs::read_to_string(dir.path().join("defense_vs_alpha.svg")).unwrap();
    let attack = fs::read_to_string(dir.path().join("attack_vs_alpha.svg")).unwrap();
    let loss = fs::read_to_string(dir.path().join("loss_vs_alpha.svg")).unwrap();
    for svg in [&defense, &attack, &loss] {
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        assert!(svg.contains(r#"version="1.1""#));
    }
    let x: Vec<_> = (0..n).flat_map(|i| expected_by_column(2 + i)).collect();
    let y: Vec<_> = (0..n).flat_map(|i| expected_by_column(2 + n + i)).collect();
    assert_eq!(markers(&defense), x);
    assert_eq!(markers(&attack), y);
    assert_eq!(markers(&loss), expected_by_column(2 + 2 * n + 1));
}

#[test]
fn single_point_sweep_reproduces_solve() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bsg(&["solve"], dir.path()).status.code(), Some(0));
    assert_eq!(bsg(&["sweep", "--alpha-d-grid", "1.0"], dir.path()).status.code(), Some(0));
    let solve = fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(solve, sweep);
    assert_eq!(solve.lines().count(), 2);
}

#[test]
fn non_convergence_exits_with_two_and_is_flagged() {
    let dir = TempDir::new().unwrap();
    let out = bsg(&["sweep", "--alpha-d-grid", "0.2", "--max-rounds", "2", "--svg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not converged at alpha_d = 0.2"));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",false"));
    let svg = fs::read_to_string(dir.path().join("loss_vs_alpha.svg")).unwrap();
    assert!(svg.contains("did not converge"));
    assert!(svg.contains(r#"data-converged="false""#));

    let out = bsg(&["solve", "--alpha-d-grid", "0.2", "--max-rounds", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let missing = write_config(dir.path(), "defender_budget = 4\nasset 10 10 1\n");
    let out = bsg(&["solve", "--config", &missing], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing required field `attacker_budget`"));

    let bad_alpha =
        write_config(dir.path(), "defender_budget = 4\nattacker_budget = 4\nalpha_d = 1.5\nasset 10 10 1\n");
    let out = bsg(&["solve", "--config", &bad_alpha], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha_d out of (0,1]"));

    let out = bsg(&["solve", "--config", "/nonexistent/game.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = bsg(&["sweep", "--alpha-d-grid", "1:0:0.1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = bsg(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = bsg(&["solve", "--alpha-d-grid", "0.5:1:0.25"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn warnings_do_not_stop_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "defender_budget = 2\nattacker_budget = 3\nasset 20 20 0.5\nasset 5 5 0.5\n");
    let out = bsg(&["solve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("warning: asset 1: inherent defense 0.5 < 1"));
}

#[test]
fn verify_and_closed_form_on_bundled_game() {
    let dir = TempDir::new().unwrap();
    let out = bsg(&["verify", "--seed", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("all checks passed\n"));

    let out = bsg(&["closed-form"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("defender support 4, attacker support 4"));
    assert!(text.contains("4.91415686865"));
}

#[test]
fn oracle_command() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "defender_budget = 3\nattacker_budget = 2\nalpha_d = 0.6\nasset 40 60 1\nasset 10 10 1\n",
    );
    let out = bsg(&["oracle", "--config", &cfg, "--step", "0.001"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches(" ok").count(), 10);

    let out = bsg(&["oracle"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at most 3 assets"));
}
