use std::process::{Command, Output};

fn cubacode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubacode")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn params_for_two_shell_24cell() {
    let o = cubacode(&["params", "--catalog", "twoshell_24cell", "--tau", "2", "--normalize", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("((2, 2, 0.559943, "), "{s}");
    assert!(s.contains("⟨6,8,12⟩"), "{s}");
    assert!(s.starts_with("# cubacode params |") && s.contains("ceiling=24") && s.contains("tol="));
}

#[test]
fn show_describes_catalog_entries() {
    let s = stdout(&cubacode(&["show", "cell16_qutrit"]));
    assert!(s.contains("2 modes, 3 codewords, 8 points each, single shell"), "{s}");
    for flag in ["--catalog", "--code"] {
        let s = stdout(&cubacode(&["show", flag, "cat", "--m", "8"]));
        assert!(s.contains("8 points each"), "{s}");
    }
    let o = cubacode(&["show", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("polygon_shells") && stderr(&o).lines().count() == 1);
}

#[test]
fn sweep_alpha_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let o = cubacode(&[
            "bench", "sweep-alpha", "--catalog", "cat", "--m", "4", "--K", "2", "--gamma", "0.1", "--grid", "1:3:5", "--jobs", jobs,
            "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).lines().next().unwrap().contains("cutoff=40"));
        let file = std::fs::read(&path).unwrap();
        // stdout carries the same table after the header line
        let printed = stdout(&o);
        assert_eq!(printed.split_once('\n').unwrap().1.as_bytes(), &file[..]);
        bytes.push(file);
    }
    assert_eq!(bytes[0], bytes[1]);
    let text = String::from_utf8(bytes[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "code,gamma,scale,nbar,fidelity,infidelity,cutoff,tail_mass,kraus_lmax");
    let row = lines.next().unwrap();
    assert!(row.starts_with("\"cat(m=4,K=2)\","), "{row}");
    let row: Vec<&str> = row.rsplitn(9, ',').collect::<Vec<_>>().into_iter().rev().collect();
    let row = &row[1..];
    assert_eq!(row.len(), 8);
    // twelve significant digits
    assert_eq!(row[3].split('e').next().unwrap().replace('.', "").len(), 12);
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn malformed_file_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "x", "modes": 1, "logicals": [[{"point": [[1, 0]], "weight": -1}]]}"#).unwrap();
    let o = cubacode(&["params", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("logicals[0][0].weight"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn code_file_round_trip_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.json");
    let code = cubacode_core::constellation::catalog::cat(2, 2).unwrap();
    cubacode_core::constellation::file::write_code(&code, &path).unwrap();
    let s = stdout(&cubacode(&["params", path.to_str().unwrap()]));
    assert!(s.contains("⟨2,2,2⟩"), "{s}");
}

#[test]
fn numerical_failure_exits_one() {
    // codewords indistinguishable at tiny amplitude
    let o = cubacode(&["kl", "cat", "--scale", "1e-4"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn validation_failures_exit_two() {
    assert_eq!(cubacode(&["kl", "cat", "--catalog", "cat"]).status.code(), Some(2));
    assert_eq!(cubacode(&["bench", "sweep-alpha", "cat", "--grid", "3:1:4"]).status.code(), Some(2));
    assert_eq!(cubacode(&["bench", "sweep-alpha", "cat", "--gamma", "1.5"]).status.code(), Some(2));
    assert_eq!(cubacode(&["kl", "cat", "--code", "cat"]).status.code(), Some(2));
    assert_eq!(cubacode(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn dimension_budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cubacode"))
        .args(["bench", "sweep-alpha", "cell16_qutrit", "--grid", "1:1:1", "--cutoff", "20"])
        .env("CUBACODE_DIM_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("400"), "{}", stderr(&o));
}

#[test]
fn pair_benchmark() {
    let s = stdout(&cubacode(&["bench", "pair", "--qsc", "qsc8", "--qcc", "qsc8", "--gammas", "0.1"]));
    let last: Vec<&str> = s.lines().last().unwrap().split(',').collect();
    let r: f64 = last[6].parse().unwrap();
    assert!((r - 1.0).abs() < 1e-9);
    let o = cubacode(&["bench", "pair", "--qsc", "qsc24", "--qcc", "qcc24"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--big"));
}

#[test]
fn stab_with_user_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("poly.json");
    std::fs::write(&path, r#"[{"terms": [{"u": [4], "re": 1.0}, {"u": [0], "re": -1.0}]}]"#).unwrap();
    let o = cubacode(&["stab", "cat", "--scale", "2", "--cutoff", "40", "--poly", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let z: f64 = s.lines().find(|l| l.starts_with("z,")).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(z < 1e-8, "{s}");
    assert!(s.contains("xtype,phase 2pi/2"));
}
