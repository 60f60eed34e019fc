//! Run configuration, read from JSON.
//!
//! ```json
//! {
//!   "model": "heisenberg",
//!   "n": 100,
//!   "sitetype": "S=1/2",
//!   "conserve_qns": true,
//!   "init": "neel",
//!   "init_linkdim": 10,
//!   "sweeps": { "nsweep": 5, "maxdim": [10, 20, 100, 100, 200], "cutoff": [1e-11] },
//!   "seed": 1234,
//!   "output": "psi.tnk",
//!   "excited": 0
//! }
//! ```
//!
//! `model` is `"heisenberg"`, `"tfim"` or `{ "opsum": "<file>" }`. The
//! operator-sum file holds one term per line: a coefficient (`0.5`, `1+2i`)
//! followed by operator and site pairs, e.g. `0.5 S+ 1 S- 2`. Blank lines
//! and lines starting with `#` are skipped. A relative path is resolved
//! against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tnkit_core::C64;
use tnkit_mps::{OpSum, Sweeps};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Named(String),
    Custom { opsum: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Init {
    /// `"neel"`, `"up"` or `"dn"`, or a state name repeated on every site.
    Pattern(String),
    Explicit(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub nsweep: usize,
    #[serde(default)]
    pub maxdim: Vec<usize>,
    #[serde(default)]
    pub cutoff: Vec<f64>,
    #[serde(default)]
    pub mindim: Vec<usize>,
    #[serde(default)]
    pub maxiter: Vec<usize>,
}

fn default_sitetype() -> String {
    "S=1/2".into()
}

fn default_init() -> Init {
    Init::Pattern("neel".into())
}

fn default_linkdim() -> usize {
    10
}

fn default_output() -> PathBuf {
    "out.tnk".into()
}

fn default_weight() -> f64 {
    10.0
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    #[serde(default = "default_sitetype")]
    pub sitetype: String,
    #[serde(default)]
    pub conserve_qns: bool,
    #[serde(default = "default_init")]
    pub init: Init,
    /// Link dimension of the random initial state; 1 keeps the product state.
    #[serde(default = "default_linkdim")]
    pub init_linkdim: usize,
    pub sweeps: SweepTable,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Excited states to find after the ground state.
    #[serde(default)]
    pub excited: usize,
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Ising coupling of `tfim`.
    #[serde(default = "default_coupling")]
    pub j: f64,
    /// Transverse field of `tfim`.
    #[serde(default = "default_coupling")]
    pub h: f64,
}

fn bad(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads and validates `path`; relative paths inside are resolved
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut c = RunConfig::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if let Model::Custom { opsum } = &mut c.model {
            if opsum.is_relative() {
                *opsum = dir.join(&*opsum);
            }
        }
        if c.output.is_relative() {
            c.output = dir.join(&c.output);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(bad("n must be at least 2"));
        }
        if let Model::Named(m) = &self.model {
            if m != "heisenberg" && m != "tfim" {
                return Err(bad(format!("unknown model `{m}`")));
            }
            if m == "tfim" && self.conserve_qns {
                return Err(bad("tfim has no conserved quantum number"));
            }
        }
        if self.init_linkdim == 0 {
            return Err(bad("init_linkdim must be positive"));
        }
        if let Init::Explicit(v) = &self.init {
            if v.len() != self.n {
                return Err(bad(format!("init lists {} states for {} sites", v.len(), self.n)));
            }
        }
        if self.weight.is_nan() || self.weight <= 0.0 {
            return Err(bad("weight must be positive"));
        }
        self.sweeps().check().map_err(|e| bad(e.to_string()))
    }

    pub fn sweeps(&self) -> Sweeps {
        let t = &self.sweeps;
        let mut s = Sweeps::new(t.nsweep);
        if !t.maxdim.is_empty() {
            s = s.maxdim(&t.maxdim);
        }
        if !t.cutoff.is_empty() {
            s = s.cutoff(&t.cutoff);
        }
        if !t.mindim.is_empty() {
            s = s.mindim(&t.mindim);
        }
        if !t.maxiter.is_empty() {
            s = s.maxiter(&t.maxiter);
        }
        s
    }

    /// State names for every site.
    pub fn initial_states(&self) -> Vec<String> {
        match &self.init {
            Init::Explicit(v) => v.clone(),
            Init::Pattern(p) => {
                let (up, dn) = match self.sitetype.as_str() {
                    "S=3/2" => ("3/2", "-3/2"),
                    "Boson" => ("1", "0"),
                    _ => ("Up", "Dn"),
                };
                (0..self.n)
                    .map(|j| match p.as_str() {
                        "neel" => if j % 2 == 0 { up } else { dn }.to_string(),
                        "up" => up.to_string(),
                        "dn" => dn.to_string(),
                        other => other.to_string(),
                    })
                    .collect()
            }
        }
    }

    pub fn opsum(&self) -> Result<OpSum, CliError> {
        let n = self.n;
        let mut a = OpSum::new();
        let mut add = |c: f64, f: &[(&str, usize)]| a.add_term(c, f).map(|_| ()).map_err(CliError::from);
        match &self.model {
            Model::Named(m) if m == "heisenberg" => return Ok(tnkit_mps::heisenberg(n)),
            Model::Named(_) => {
                // Pauli convention: -J Σ σz σz - h Σ σx.
                for j in 1..n {
                    add(-4.0 * self.j, &[("Sz", j), ("Sz", j + 1)])?;
                }
                for j in 1..=n {
                    add(-2.0 * self.h, &[("Sx", j)])?;
                }
            }
            Model::Custom { opsum } => {
                let text =
                    std::fs::read_to_string(opsum).map_err(|e| CliError::Io(format!("{}: {e}", opsum.display())))?;
                return parse_opsum(&text, n);
            }
        }
        Ok(a)
    }
}

/// Parses the operator-sum term list.
pub fn parse_opsum(text: &str, n: usize) -> Result<OpSum, CliError> {
    let mut a = OpSum::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| bad(format!("opsum line {}: {m}", k + 1));
        let mut words = line.split_whitespace();
        let coef: C64 = words
            .next()
            .expect("line is nonempty")
            .parse()
            .map_err(|_| err("bad coefficient"))?;
        let rest: Vec<&str> = words.collect();
        if rest.is_empty() || !rest.len().is_multiple_of(2) {
            return Err(err("expected operator and site pairs"));
        }
        let mut factors = Vec::with_capacity(rest.len() / 2);
        for pair in rest.chunks(2) {
            let site: usize = pair[1].parse().map_err(|_| err("bad site number"))?;
            if site == 0 || site > n {
                return Err(err(&format!("site {site} outside 1..={n}")));
            }
            factors.push((pair[0], site));
        }
        a.add_term(coef, &factors).map_err(|e| err(&e.to_string()))?;
    }
    if a.is_empty() {
        return Err(bad("opsum file has no terms"));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"model": "heisenberg", "n": 4, "sweeps": {"nsweep": 2}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.sitetype, "S=1/2");
        assert_eq!(c.initial_states(), ["Up", "Dn", "Up", "Dn"]);
        assert_eq!(c.sweeps().nsweep, 2);
        assert_eq!(c.excited, 0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            r#"{"model": "heisenberg", "n": 1, "sweeps": {"nsweep": 2}}"#,
            r#"{"model": "potts", "n": 4, "sweeps": {"nsweep": 2}}"#,
            r#"{"model": "heisenberg", "n": 4, "sweeps": {"nsweep": 0}}"#,
            r#"{"model": "heisenberg", "n": 4, "sweeps": {"nsweep": 2, "cutoff": [-1]}}"#,
            r#"{"model": "tfim", "n": 4, "conserve_qns": true, "sweeps": {"nsweep": 2}}"#,
            r#"{"model": "heisenberg", "n": 4, "init": ["Up"], "sweeps": {"nsweep": 2}}"#,
            r#"{"model": "heisenberg", "n": 4, "sweeps": {"nsweep": 2}, "typo": 1}"#,
            "not json",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn opsum_file_grammar() {
        let a = parse_opsum("# xx\n0.5 S+ 1 S- 2\n\n0.5 S- 1 S+ 2\n1+2i Sz 3\n", 3).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.terms()[2].coef, C64::new(1.0, 2.0));
        assert!(parse_opsum("0.5 S+ 1 S-", 3).is_err());
        assert!(parse_opsum("x Sz 1", 3).is_err());
        assert!(parse_opsum("1 Sz 4", 3).is_err());
        assert!(parse_opsum("# only comments\n", 3).is_err());
    }
}
