use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// An input error, reported as `decorr: <input>: <message>` with exit 2.
#[derive(Debug)]
pub struct Failure {
    pub input: String,
    pub message: String,
}

impl Failure {
    pub fn new(input: impl Into<String>, message: impl Display) -> Self {
        Self {
            input: input.into(),
            message: message.to_string().replace('\n', " "),
        }
    }

    pub fn at(path: &Path, message: impl Display) -> Self {
        Self::new(path.display().to_string(), message)
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

/// A file read for a command, kept with its digest.
pub struct Input {
    pub text: String,
    pub digest: InputDigest,
}

pub fn read_input(role: &'static str, path: &Path) -> Result<Input, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::at(path, e))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::at(path, "not valid UTF-8"))?;
    Ok(Input {
        text,
        digest: InputDigest {
            role,
            path: path.display().to_string(),
            sha256,
        },
    })
}

/// Resolved settings; every field is present in every report.
#[derive(Debug, Serialize)]
pub struct Config {
    pub command: &'static str,
    pub tol: f64,
    pub resolution: usize,
    #[serde(rename = "N")]
    pub bodies: [usize; 2],
    pub n_max: usize,
    pub quadrature_order: usize,
    pub lambda: Option<f64>,
    pub samples: usize,
    pub points: usize,
    pub seed: u64,
    pub eps: Option<f64>,
}

impl Config {
    pub fn defaults(command: &'static str, tol: f64) -> Self {
        let n = decorr_core::nbody::DEFAULT_BODIES;
        Self {
            command,
            tol,
            resolution: decorr_core::mixture::DEFAULT_RESOLUTION,
            bodies: [n, n],
            n_max: decorr_core::basis::DEFAULT_N_MAX,
            quadrature_order: decorr_core::basis::DEFAULT_QUADRATURE_ORDER,
            lambda: None,
            samples: 200,
            points: 40,
            seed: 0,
            eps: None,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a Config,
    inputs: Vec<&'a InputDigest>,
    result: &'a T,
}

pub fn render<T: Serialize>(config: &Config, inputs: &[&Input], result: &T) -> String {
    let envelope = Envelope {
        tool: "decorr",
        version: env!("CARGO_PKG_VERSION"),
        config,
        inputs: inputs.iter().map(|i| &i.digest).collect(),
        result,
    };
    let mut s = serde_json::to_string_pretty(&envelope).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::at(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new("stdout", e)),
    }
}
