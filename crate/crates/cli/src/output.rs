//! CSV with a `#` metadata block.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts a file with the metadata block: command, version, config hash,
    /// seed, then every effective config entry and run parameter.
    pub fn new(command: &str, canonical_config: &str, seed: Option<u64>, params: &[(String, String)]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# command: {command}");
        let _ = writeln!(text, "# version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# config_sha256: {}", sha256_hex(canonical_config));
        match seed {
            Some(s) => {
                let _ = writeln!(text, "# seed: {s}");
            }
            None => text.push_str("# seed: none\n"),
        }
        for line in canonical_config.lines() {
            let _ = writeln!(text, "# config: {line}");
        }
        for (k, v) in params {
            let _ = writeln!(text, "# {k}: {v}");
        }
        Self { text }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# {key}: {value}");
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5] {
            assert_eq!(fmt_f(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
