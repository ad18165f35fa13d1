use std::process::{Command, Output};

fn dos_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dos-lab")).args(args).env_remove("DOS_LAB_SEED").output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let idx = csv.lines().next().unwrap().split(',').position(|c| c == name).unwrap();
    rows(csv).iter().map(|r| r[idx]).collect()
}

#[test]
fn solve_perfect() {
    let out = stdout(&dos_lab(&["solve-perfect", "--rho", "1", "--delta", "0.1", "--ps", "0.367879"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x_star"));
    let value = lines.next().unwrap();
    assert_eq!(value.split('.').nth(1).unwrap().len(), 6);
    assert!(value.starts_with("0.610"), "{value}");
}

#[test]
fn exit_codes() {
    assert_eq!(dos_lab(&["solve-perfect"]).status.code(), Some(2));
    let domain = dos_lab(&["solve-perfect", "--rho", "0"]);
    assert_eq!(domain.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("domain"));
    assert_eq!(
        dos_lab(&["optimize", "--rho", "1", "--alpha", "1", "--max-iter", "1", "--eps", "1e-12"]).status.code(),
        Some(4)
    );
    let starve = dos_lab(&["simulate", "--rho", "1", "--alpha", "1", "--sigma", "0.3", "--threshold", "1e9"]);
    assert_eq!(starve.status.code(), Some(5));
    assert_eq!(dos_lab(&["table", "V"]).status.code(), Some(2));
    assert_eq!(dos_lab(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn optimize_traces() {
    let out = stdout(&dos_lab(&["optimize", "--rho", "1", "--alpha", "1"]));
    assert_eq!(out.lines().next(), Some("k,x_k,sigma_k"));
    let last = rows(&out).pop().unwrap();
    assert!((last[1] - 0.301).abs() < 0.002 && (last[2] - 0.285).abs() < 0.002, "{out}");

    let out = stdout(&dos_lab(&["optimize", "--rho", "0.5", "--alpha", "1", "--x0", "0.5"]));
    let xs = column(&out, "x_k");
    for (got, want) in xs[1..5].iter().zip([0.177, 0.246, 0.254, 0.254]) {
        assert!((got - want).abs() < 0.002, "{out}");
    }

    let out = stdout(&dos_lab(&["optimize", "--alpha", "0", "--rho", "1"]));
    let last = rows(&out).pop().unwrap();
    assert_eq!(last[2], 1.0);
    assert!((last[1] - 0.610).abs() < 0.002);
}

#[test]
fn tables() {
    let t1 = stdout(&dos_lab(&["table", "I"]));
    assert_eq!(t1.lines().next(), Some("rho,x0,x1,x2,x3,x_star,sigma_star"));
    assert_eq!(rows(&t1).len(), 5);

    let t3 = stdout(&dos_lab(&["table", "III"]));
    assert_eq!(column(&t3, "rho"), vec![0.5, 1.0, 2.0, 5.0, 10.0, 100.0]);
    let g = column(&t3, "gain_pct");
    assert!(g.windows(2).all(|w| w[1] < w[0]));

    let t4 = stdout(&dos_lab(&["table", "IV"]));
    let g = column(&t4, "gain_pct");
    assert!((g[0] - 35.2).abs() < 1.0 && (g[5] - 38.8).abs() < 1.0, "{t4}");

    let t2 = stdout(&dos_lab(&["table", "II"]));
    let alpha5 = rows(&t2).pop().unwrap();
    assert!((alpha5[alpha5.len() - 2] - 0.123).abs() < 0.002);
}

#[test]
fn figures() {
    let f1 = stdout(&dos_lab(&["figure", "1", "--x", "0.1", "--rho", "1", "--alpha", "1"]));
    let phi = column(&f1, "phi_rho_1");
    assert!(phi[0].abs() < 1e-9 && phi[phi.len() - 1].abs() < 1e-9);
    assert!(phi.iter().cloned().fold(0.0, f64::max) > 0.1);

    let f3 = stdout(&dos_lab(&["figure", "3"]));
    let s = column(&f3, "sigma_star_rho_1");
    assert!(s.windows(2).all(|w| w[1] < w[0]));

    let f4 = stdout(&dos_lab(&["figure", "4", "--rho", "1", "--rho", "10", "--T", "10"]));
    let tau = column(&f4, "tau");
    let mut best = Vec::new();
    for name in ["x_star_rho_1", "x_star_rho_10"] {
        let x = column(&f4, name);
        let i = (0..x.len()).max_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap();
        assert!(i > 0 && i + 1 < x.len(), "{name} peaks at the edge");
        best.push(tau[i]);
    }
    assert!(best[1] < best[0]);
    assert_eq!(dos_lab(&["figure", "4", "--rho", "1"]).status.code(), Some(2));
}

#[test]
fn simulate_matches_analytic_value() {
    let args = ["simulate", "--rho", "1", "--alpha", "1", "--episodes", "1000000", "--seed", "42", "--auto-policy"];
    let first = dos_lab(&args);
    let csv = stdout(&first);
    let x = column(&csv, "empirical_throughput")[0];
    assert!((x - 0.301357).abs() / 0.301357 < 0.01, "{csv}");
    assert_eq!(first.stdout, dos_lab(&args).stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let base = ["simulate", "--rho", "1", "--alpha", "1", "--auto-policy", "--episodes", "5000"];
    let flagged = dos_lab(&[&base[..], &["--seed", "7"]].concat());
    let from_env = Command::new(env!("CARGO_BIN_EXE_dos-lab")).args(base).env("DOS_LAB_SEED", "7").output().unwrap();
    assert_eq!(stdout(&flagged), stdout(&from_env));
    assert_ne!(stdout(&flagged), stdout(&dos_lab(&base)));
}

#[test]
fn replications_report_interval_and_json() {
    let out = stdout(&dos_lab(&[
        "simulate",
        "--rho",
        "2",
        "--alpha",
        "1",
        "--auto-policy",
        "--episodes",
        "20000",
        "--replications",
        "8",
        "--parallel",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["replications"], 8);
    assert!(v["ci_halfwidth_95"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_and_out_flag() {
    let dir = std::env::temp_dir().join(format!("dos-lab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "rho = 1.0\nalpha = 1.0\nsigma = 0.2846\nthreshold = 0.3014\nepisodes = 20000\nseed = 3\n")
        .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&dos_lab(&["simulate", "--config", cfg]));
    let from_flags = stdout(&dos_lab(&[
        "simulate",
        "--rho",
        "1",
        "--alpha",
        "1",
        "--sigma",
        "0.2846",
        "--threshold",
        "0.3014",
        "--episodes",
        "20000",
        "--seed",
        "3",
    ]));
    assert_eq!(from_file, from_flags);
    let overridden = stdout(&dos_lab(&["simulate", "--config", cfg, "--seed", "4"]));
    assert_ne!(from_file, overridden);

    let out_path = dir.join("table.csv");
    let out = dos_lab(&["table", "I", "--out", out_path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("rho,"));

    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "rho = 1.0\nunknown_key = 3\n").unwrap();
    assert_eq!(dos_lab(&["solve-perfect", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}
