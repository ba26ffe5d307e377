use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stratreg_cli::{ScenarioFile, SolverSettings};
use stratreg_core::{CostModel, GameParams, Matrix};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn classroom() -> PathBuf {
    root().join("scenarios/classroom.json")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratreg"))
        .args(args)
        .env_remove("STRAT_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_ok_and_errors() {
    let o = run(&["validate", path_str(&classroom())]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok: classroom"));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(classroom()).unwrap();
    let bad = write(dir.path(), "t0.json", &text.replace("\"T\": 3", "\"T\": 0"));
    let o = run(&["validate", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("T: horizon must be at least 1"));

    let extra = write(dir.path(), "foo.json", &text.replacen('{', "{\"foo\": 1,", 1));
    assert_eq!(run(&["validate", path_str(&extra)]).status.code(), Some(2));
    assert_eq!(run(&["validate", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn scenario_round_trip_is_exact() {
    let params = GameParams::new(
        Matrix::from_rows(&[[0.1, 1.0 / 3.0], [2.0 / 7.0, 1e-17]]),
        vec![0.3, std::f64::consts::FRAC_1_SQRT_2],
        vec![1.0 / 9.0, 0.7],
        4,
        CostModel::Quadratic,
    )
    .with_s0(vec![0.125, 1.0 / 11.0]);
    let mut file = ScenarioFile::from_params("rt", &params);
    file.solver = Some(SolverSettings {
        eps: Some(0.01),
        seed: Some(u64::MAX),
        ..SolverSettings::default()
    });
    let back = ScenarioFile::from_json(&file.to_json()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_params().unwrap(), params);

    let mut offset = params.clone();
    offset.feature_offset = vec![0.5, 0.25];
    let back = ScenarioFile::from_json(&ScenarioFile::from_params("o", &offset).to_json()).unwrap();
    assert_eq!(back.to_params().unwrap(), offset);
}

#[test]
fn best_response_table_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let policy = write(dir.path(), "p.json", "[[0.5,0.5],[0.5,0.5],[0.5,0.5]]");
    let csv = dir.path().join("br.csv");
    let o = run(&["best-response", path_str(&classroom()), "--policy", path_str(&policy), "--csv", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let actions: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(actions, ["study", "study", "cheat_test"]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), golden("classroom.csv"));

    let malformed = write(dir.path(), "m.json", "{\"rules\": 3}");
    let o = run(&["best-response", path_str(&classroom()), "--policy", path_str(&malformed)]);
    assert_eq!(o.status.code(), Some(2));
    let off_simplex = write(dir.path(), "s.json", "[[0.5,0.6],[0.5,0.5],[0.5,0.5]]");
    let o = run(&["best-response", path_str(&classroom()), "--policy", path_str(&off_simplex)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quadratic_best_response() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(classroom()).unwrap().replace("fixed_budget", "quadratic");
    let scenario = write(dir.path(), "q.json", &text);
    let policy = write(dir.path(), "p.json", "[[1,0],[1,0],[1,0]]");
    let o = run(&["best-response", path_str(&scenario), "--policy", path_str(&policy)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1\t[3, 3, 0]"), "{}", stdout(&o));
}

#[test]
fn membership_and_recover() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "e.json", "[[0,1,0],[0,1,0],[1,0,0]]");
    let o = run(&["membership", path_str(&classroom()), "--efforts", path_str(&good)]);
    assert!(stdout(&o).contains("incentivizable: true"));
    let csv = dir.path().join("rec.csv");
    let o = run(&["recover", path_str(&classroom()), "--efforts", path_str(&good), "--csv", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validated: true"));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("round,basis_index,theta_TE,theta_HW,"));

    let bad = write(dir.path(), "b.json", "[[0,1,0],[0,1,0],[0,1,0]]");
    let o = run(&["membership", path_str(&classroom()), "--efforts", path_str(&bad)]);
    assert!(stdout(&o).contains("incentivizable: false"));
    let o = run(&["recover", path_str(&classroom()), "--efforts", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(3));

    let short = write(dir.path(), "s.json", "[[0,1,0]]");
    let o = run(&["membership", path_str(&classroom()), "--efforts", path_str(&short)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_grid_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&["solve", path_str(&classroom()), "--method", "grid", "--grid-k", "20", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden("solve_grid.csv"));
}

fn value_column(csv: &str) -> f64 {
    let mut lines = csv.lines();
    let headers: Vec<&str> = lines.next().unwrap().split(',').collect();
    let c = headers.iter().position(|&h| h == "value").unwrap();
    lines.next().unwrap().split(',').nth(c).unwrap().parse().unwrap()
}

#[test]
fn solve_anneal_within_eps_of_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let o = run(&["solve", path_str(&classroom()), "--method", "anneal", "--seed", "7", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let anneal = value_column(&std::fs::read_to_string(&out).unwrap());
    let grid = value_column(&golden("solve_grid.csv"));
    assert!((anneal - grid).abs() <= 0.05, "anneal {anneal} vs grid {grid}");
}

#[test]
fn strat_seed_overrides_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_stratreg"))
        .args(["solve", path_str(&classroom()), "--seed", "7", "--eps", "0.2", "--delta", "0.5"])
        .env("STRAT_SEED", "11")
        .output()
        .unwrap();
    assert!(stdout(&out).starts_with("seed: 11\n"));
    let bad = Command::new(env!("CARGO_BIN_EXE_stratreg"))
        .args(["solve", path_str(&classroom())])
        .env("STRAT_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn solve_quadratic_basis_indices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = run(&["solve", path_str(&root().join("scenarios/switching.json")), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, golden("solve_quadratic.csv"));
    let basis: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(basis.iter().filter(|&&b| b == "0").count(), 115);
    assert!(basis[115..].iter().all(|&b| b == "1"));

    // Wrong solver for the cost model is an input error.
    let o = run(&["solve", path_str(&classroom()), "--method", "quadratic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bounds_commands() {
    let o = run(&["bounds", "implementability", path_str(&classroom()), "--action", "study"]);
    assert!(stdout(&o).contains("horizon: 3\n"));
    let o = run(&["bounds", "implementability", path_str(&classroom()), "--action", "study", "--statement-order"]);
    assert!(stdout(&o).contains("horizon: 1\n") && stdout(&o).contains("verified: false"));
    let o = run(&["bounds", "implementability", path_str(&classroom()), "--action", "nap"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(classroom()).unwrap().replace("fixed_budget", "quadratic");
    let scenario = write(dir.path(), "q.json", &text);
    let o = run(&["bounds", "effort-level", path_str(&scenario), "--action", "study", "--effort", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("horizon: 3\n"), "{}", stdout(&o));
    let o = run(&["bounds", "effort-level", path_str(&scenario), "--action", "cheat_test", "--effort", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn figures_are_byte_stable() {
    for (kind, file) in [("regions", "regions.csv"), ("omega-sweep", "omega_sweep.csv"), ("classroom", "classroom.csv")] {
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let o = run(&["figures", kind, path_str(&classroom()), "--out", path_str(dir.path())]);
            assert_eq!(o.status.code(), Some(0), "{kind}");
            assert_eq!(std::fs::read_to_string(dir.path().join(file)).unwrap(), golden(file), "{kind}");
        }
    }
}

#[test]
fn regions_grow_with_horizon() {
    let text = golden("regions.csv");
    let mut best = [f64::NEG_INFINITY; 6];
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (t, study, flag): (usize, f64, &str) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[3]);
        if flag == "1" {
            best[t] = best[t].max(study);
        }
        if t == 1 && flag == "1" {
            assert_eq!(study, 0.0);
        }
    }
    assert!(best[1..].windows(2).all(|w| w[0] <= w[1]), "{best:?}");
    assert!(best[5] > best[1]);
}
