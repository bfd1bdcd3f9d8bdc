use std::path::{Path, PathBuf};
use std::process::Command;

/// A bundled example invocation and the exit code it must produce.
pub struct Invocation {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const INVOCATIONS: &[Invocation] = &[
    Invocation {
        name: "decompose_three_atom",
        args: &[
            "decompose",
            "--dist",
            "data/measures/three_atom.txt",
            "--p",
            "0.5",
            "--grid",
            "3",
        ],
        exit: 0,
    },
    Invocation {
        name: "decompose_uniform_colliding",
        args: &[
            "decompose",
            "--dist",
            "data/measures/uniform.txt",
            "--p",
            "0.25",
            "--variant",
            "colliding",
        ],
        exit: 0,
    },
    Invocation {
        name: "decompose_mixed_auto",
        args: &["decompose", "--dist", "data/measures/mixed.txt"],
        exit: 0,
    },
    Invocation {
        name: "decompose_empirical",
        args: &[
            "decompose",
            "--dist",
            "data/samples/two_blocks.txt",
            "--empirical",
            "--p",
            "0.5",
            "--grid",
            "4",
        ],
        exit: 0,
    },
    Invocation {
        name: "beta_scan_uniform",
        args: &[
            "beta-scan",
            "--dist",
            "data/measures/uniform.txt",
            "--steps",
            "9",
        ],
        exit: 0,
    },
    Invocation {
        name: "beta_scan_two_atom",
        args: &[
            "beta-scan",
            "--dist",
            "data/measures/two_atom.txt",
            "--p-grid",
            "0.25,0.5,0.75",
        ],
        exit: 0,
    },
    Invocation {
        name: "beta_scan_point",
        args: &["beta-scan", "--dist", "data/measures/point.txt"],
        exit: 2,
    },
    Invocation {
        name: "antichain_check_middle",
        args: &[
            "antichain",
            "check",
            "--input",
            "data/antichains/middle_layer4.txt",
        ],
        exit: 0,
    },
    Invocation {
        name: "antichain_check_chain",
        args: &[
            "antichain",
            "check",
            "--input",
            "data/antichains/chain4.txt",
        ],
        exit: 3,
    },
    Invocation {
        name: "antichain_lym_layers",
        args: &["antichain", "lym", "--input", "data/antichains/layers4.txt"],
        exit: 0,
    },
    Invocation {
        name: "antichain_prob_middle",
        args: &[
            "antichain",
            "prob",
            "--input",
            "data/antichains/middle_layer4.txt",
            "--p",
            "0.5",
        ],
        exit: 0,
    },
    Invocation {
        name: "antichain_prob_profile",
        args: &[
            "antichain",
            "prob",
            "--input",
            "data/antichains/layers4.txt",
            "--profile",
            "0.2,0.4,0.6,0.8",
        ],
        exit: 0,
    },
    Invocation {
        name: "antichain_max_12",
        args: &["antichain", "max", "-N", "12", "--p", "0.5"],
        exit: 0,
    },
    Invocation {
        name: "antichain_max_members",
        args: &[
            "antichain",
            "max",
            "-N",
            "4",
            "--profile",
            "0.1,0.3,0.5,0.9",
            "--members",
        ],
        exit: 0,
    },
    Invocation {
        name: "antichain_max_too_large",
        args: &["antichain", "max", "-N", "20", "--p", "0.5"],
        exit: 5,
    },
    Invocation {
        name: "antichain_bounds_layers",
        args: &[
            "antichain",
            "bounds",
            "--input",
            "data/antichains/layers4.txt",
            "--p",
            "0.5",
        ],
        exit: 0,
    },
    Invocation {
        name: "concentration_bernoulli4",
        args: &[
            "concentration",
            "--config",
            "data/concentration/bernoulli4.cfg",
        ],
        exit: 0,
    },
    Invocation {
        name: "concentration_mixed_signed",
        args: &[
            "concentration",
            "--config",
            "data/concentration/mixed_signed.cfg",
        ],
        exit: 0,
    },
    Invocation {
        name: "concentration_wsum_three_atom",
        args: &[
            "concentration",
            "--config",
            "data/concentration/wsum_three_atom.cfg",
        ],
        exit: 0,
    },
    Invocation {
        name: "concentration_sum_uniform_n100",
        args: &[
            "concentration",
            "--config",
            "data/concentration/sum_uniform_N100.cfg",
        ],
        exit: 0,
    },
    Invocation {
        name: "concentration_margin_violation",
        args: &[
            "concentration",
            "--config",
            "data/concentration/margin_violation.cfg",
        ],
        exit: 4,
    },
    Invocation {
        name: "lattice_three_atom_cross",
        args: &[
            "lattice",
            "--dist",
            "data/measures/three_atom.txt",
            "--stencil",
            "data/stencils/cross2d.txt",
            "--box",
            "32x32",
            "--seed",
            "1",
        ],
        exit: 0,
    },
    Invocation {
        name: "lattice_uniform_line",
        args: &[
            "lattice",
            "--dist",
            "data/measures/uniform.txt",
            "--stencil",
            "data/stencils/line1d.txt",
            "--box",
            "64",
            "--p",
            "0.5",
            "--seed",
            "9",
        ],
        exit: 0,
    },
    Invocation {
        name: "missing_input",
        args: &[
            "decompose",
            "--dist",
            "data/measures/no_such_file.txt",
            "--p",
            "0.5",
        ],
        exit: 1,
    },
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.out"))
}

/// Runs the binary from the crate directory with a clean seed environment
/// and returns `(exit code, transcript)`. The transcript is stdout, then
/// stderr and the exit code when the run fails.
pub fn run(inv: &Invocation) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pacman"))
        .args(inv.args)
        .current_dir(crate_dir())
        .env_remove("PACMAN_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("failed to launch pacman");
    let code = out.status.code().unwrap_or(-1);
    let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
    if code != 0 {
        text.push_str("--- stderr ---\n");
        text.push_str(&String::from_utf8_lossy(&out.stderr));
        text.push_str(&format!("--- exit {code} ---\n"));
    }
    (code, text)
}

pub fn read_golden(path: &Path) -> Option<String> {
    std::fs::read_to_string(path).ok()
}
