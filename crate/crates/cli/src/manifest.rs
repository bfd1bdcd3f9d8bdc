use std::fmt::Display;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Comment block written at the top of every output: tool version,
/// subcommand, parsed flags, resolved seed and input digests. No
/// timestamps, so identical runs give identical bytes.
#[derive(Debug)]
pub struct Manifest {
    command: String,
    flags: Vec<(String, String)>,
    seed: Option<u64>,
    inputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            flags: Vec::new(),
            seed: None,
            inputs: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Display) {
        self.flags.push((name.to_string(), value.to_string()));
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        let digest = hex::encode(Sha256::digest(bytes));
        self.inputs.push((path.display().to_string(), digest));
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# pacman {}\n# command: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        for (k, v) in &self.flags {
            out.push_str(&format!("# flag {k}={v}\n"));
        }
        if let Some(s) = self.seed {
            out.push_str(&format!("# seed: {s}\n"));
        }
        for (path, digest) in &self.inputs {
            out.push_str(&format!("# input {path} sha256={digest}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_in_fixed_order() {
        let mut m = Manifest::new("decompose");
        m.flag("p", 0.5);
        m.seed(3);
        m.input(Path::new("a.txt"), b"abc");
        let text = m.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "# command: decompose");
        assert_eq!(lines[2], "# flag p=0.5");
        assert_eq!(lines[3], "# seed: 3");
        assert_eq!(
            lines[4],
            "# input a.txt sha256=ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
