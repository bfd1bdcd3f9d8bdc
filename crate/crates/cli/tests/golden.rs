mod common;

use common::{golden_path, read_golden, run, INVOCATIONS};

fn transcript(name: &str) -> String {
    let inv = INVOCATIONS.iter().find(|i| i.name == name).unwrap();
    run(inv).1
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .take_while(|l| !l.starts_with("--- "))
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn outputs_match_golden_files() {
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    let mut stale = Vec::new();
    for inv in INVOCATIONS {
        let (code, text) = run(inv);
        assert_eq!(code, inv.exit, "{}: exit code\n{text}", inv.name);
        let path = golden_path(inv.name);
        if update {
            std::fs::write(&path, &text).unwrap();
        } else if read_golden(&path).as_deref() != Some(text.as_str()) {
            stale.push(inv.name);
        }
    }
    assert!(
        stale.is_empty(),
        "golden mismatch (rerun with UPDATE_GOLDEN=1 to accept): {stale:?}"
    );
}

#[test]
fn middle_layer_probability() {
    let rows = csv_rows(&transcript("antichain_prob_middle"));
    assert_eq!(column(&rows, "probability"), vec!["0.375"]);
}

#[test]
fn non_antichain_names_the_pair() {
    let text = transcript("antichain_check_chain");
    let stderr = text.split("--- stderr ---").nth(1).unwrap();
    assert!(stderr.contains("[1, 0, 0, 0] and [1, 1, 0, 0]"), "{stderr}");
}

#[test]
fn uniform_scan_spot_value() {
    let rows = csv_rows(&transcript("beta_scan_uniform"));
    let ps = column(&rows, "p");
    let betas = column(&rows, "beta_plus");
    let half = ps.iter().position(|p| p == "0.5").unwrap();
    assert_eq!(betas[half].parse::<f64>().unwrap(), 0.5);
    for (p, b) in ps.iter().zip(&betas) {
        let p: f64 = p.parse().unwrap();
        let b: f64 = b.parse().unwrap();
        // Y2 - Y1 = 1 - p + p t - (1 - p) t is smallest at t = 1 or t = 0.
        assert!((b - p.min(1.0 - p)).abs() < 1e-12, "p={p} beta={b}");
    }
}

#[test]
fn two_atom_scan_peaks_at_balance() {
    let rows = csv_rows(&transcript("beta_scan_two_atom"));
    let betas: Vec<f64> = column(&rows, "beta_plus")
        .iter()
        .map(|b| b.parse().unwrap())
        .collect();
    assert_eq!(betas, vec![0.0, 1.0, 0.0]);
}

#[test]
fn max_antichain_within_sperner_bound() {
    let rows = csv_rows(&transcript("antichain_max_12"));
    let weight: f64 = column(&rows, "weight")[0].parse().unwrap();
    let bound: f64 = column(&rows, "bound")[0].parse().unwrap();
    assert_eq!(weight, 924.0 / 4096.0);
    assert!(weight <= bound);
}

#[test]
fn concentration_rows() {
    let rows = csv_rows(&transcript("concentration_sum_uniform_n100"));
    let q: f64 = column(&rows, "q_hat")[0].parse().unwrap();
    assert!(q <= 1.2);

    for name in ["concentration_bernoulli4", "concentration_wsum_three_atom"] {
        let rows = csv_rows(&transcript(name));
        let q: f64 = column(&rows, "q_hat")[0].parse().unwrap();
        let se: f64 = column(&rows, "std_error")[0].parse().unwrap();
        let exact: f64 = column(&rows, "exact_q")[0].parse().unwrap();
        assert!((q - exact).abs() <= 3.0 * se, "{name}: {q} vs {exact}");
    }
}

#[test]
fn lattice_split_verifies() {
    for name in ["lattice_three_atom_cross", "lattice_uniform_line"] {
        let text = transcript(name);
        assert!(text.contains("# verify passed=true"), "{name}");
    }
}

#[test]
fn seed_flag_beats_environment() {
    use std::process::Command;
    let base = [
        "lattice",
        "--dist",
        "data/measures/two_atom.txt",
        "--stencil",
        "data/stencils/line1d.txt",
        "--box",
        "16",
    ];
    let go = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pacman"));
        cmd.args(base)
            .args(extra)
            .current_dir(common::crate_dir())
            .env_remove("PACMAN_SEED");
        if let Some(s) = env {
            cmd.env("PACMAN_SEED", s);
        }
        String::from_utf8(cmd.output().unwrap().stdout).unwrap()
    };
    let from_env = go(&[], Some("17"));
    assert!(from_env.contains("# seed: 17"));
    assert_eq!(from_env, go(&["--seed", "17"], Some("3")));
    assert!(go(&[], None).contains("# seed: 0"));
}

#[test]
fn thread_count_does_not_change_output() {
    use std::process::Command;
    let go = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pacman"))
            .args([
                "--threads",
                threads,
                "concentration",
                "--config",
                "data/concentration/bernoulli4.cfg",
            ])
            .current_dir(common::crate_dir())
            .env_remove("PACMAN_SEED")
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(go("1"), go("4"));
}
