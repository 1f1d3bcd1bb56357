//! Scenario files: a named Gaussian source in JSON.
//!
//! ```json
//! { "name": "scalar", "Q_X": [[1.0]], "C": [[1.0]], "D": [[1.0]], "units": "bits" }
//! ```
//!
//! or the joint form with `Q_Y` and `Q_XY` in place of `C` and `D`.

use std::fmt;

use clap::ValueEnum;
use rdkit_core::gaussian::{GaussianSourceSpec, Matrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(rename = "Q_X")]
    q_x: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D")]
    d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q_Y")]
    q_y: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q_XY")]
    q_xy: Option<Vec<Vec<f64>>>,
    units: Option<Units>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub units: Units,
    pub spec: GaussianSourceSpec,
    /// SHA-256 of the file bytes, hex encoded.
    pub hash: String,
}

/// 1-based line and column of byte offset `at` in `text`.
fn position(text: &str, at: usize) -> (usize, usize) {
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Input error located at the first occurrence of `"key"` (or the start).
fn located(text: &str, key: &str, msg: impl fmt::Display) -> CliError {
    let at = text.find(&format!("\"{key}\"")).unwrap_or(0);
    let (line, column) = position(text, at);
    CliError::Input(format!("line {line}, column {column}: {msg}"))
}

fn to_matrix(text: &str, key: &str, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n_cols == 0 {
        return Err(located(text, key, format_args!("{key} must be a non-empty matrix")));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n_cols) {
        return Err(located(
            text,
            key,
            format_args!("{key} is not rectangular: row {i} has {} entries, expected {n_cols}", rows[i].len()),
        ));
    }
    Ok(Matrix::from_row_iterator(rows.len(), n_cols, rows.iter().flatten().copied()))
}

/// Parse scenario JSON. Syntax and shape problems are input errors carrying
/// a line and column; a covariance that is not symmetric PSD is a math error.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
        CliError::Input(format!("line {}, column {}: {msg}", e.line(), e.column()))
    })?;
    let observation = raw.c.is_some() || raw.d.is_some();
    let joint = raw.q_y.is_some() || raw.q_xy.is_some();
    let q_x = to_matrix(text, "Q_X", &raw.q_x)?;
    let built = match (observation, joint) {
        (true, true) => {
            let key = if raw.q_y.is_some() { "Q_Y" } else { "Q_XY" };
            return Err(located(text, key, "give either {C, D} or {Q_Y, Q_XY}, not both"));
        }
        (false, false) => {
            return Err(located(text, "Q_X", "missing side information: give {C, D} or {Q_Y, Q_XY}"));
        }
        (true, false) => {
            let (Some(c), Some(d)) = (&raw.c, &raw.d) else {
                let key = if raw.c.is_some() { "C" } else { "D" };
                return Err(located(text, key, "observation form needs both C and D"));
            };
            let c = to_matrix(text, "C", c)?;
            let d = to_matrix(text, "D", d)?;
            (GaussianSourceSpec::observation(q_x, c, d), "C")
        }
        (false, true) => {
            let (Some(q_y), Some(q_xy)) = (&raw.q_y, &raw.q_xy) else {
                let key = if raw.q_y.is_some() { "Q_Y" } else { "Q_XY" };
                return Err(located(text, key, "joint form needs both Q_Y and Q_XY"));
            };
            let q_y = to_matrix(text, "Q_Y", q_y)?;
            let q_xy = to_matrix(text, "Q_XY", q_xy)?;
            (GaussianSourceSpec::joint(q_x, q_y, q_xy), "Q_Y")
        }
    };
    let spec = match built {
        (Ok(spec), _) => spec,
        (Err(rdkit_core::Error::ShapeError(msg)), key) => return Err(located(text, key, msg)),
        (Err(e), _) => return Err(CliError::Math(e)),
    };
    Ok(Scenario {
        name: raw.name,
        units: raw.units.unwrap_or_default(),
        spec,
        hash: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALAR: &str = r#"{"name": "scalar", "Q_X": [[1.0]], "C": [[1.0]], "D": [[1.0]]}"#;

    fn input_message(r: Result<Scenario, CliError>) -> String {
        match r {
            Err(CliError::Input(m)) => m,
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn parses_observation_form() {
        let s = parse_scenario(SCALAR).unwrap();
        assert_eq!(s.name, "scalar");
        assert_eq!(s.units, Units::Nats);
        assert_eq!(s.spec.n_x(), 1);
        assert_eq!(s.hash.len(), 64);
    }

    #[test]
    fn parses_joint_form_row_major() {
        let text = r#"{
  "name": "joint",
  "Q_X": [[2.0, 0.5], [0.5, 1.0]],
  "Q_Y": [[1.0]],
  "Q_XY": [[0.3], [0.1]],
  "units": "bits"
}"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.units, Units::Bits);
        assert_eq!(s.spec.q_xy()[(1, 0)], 0.1);
        assert_eq!(s.spec.q_x()[(0, 1)], 0.5);
    }

    #[test]
    fn syntax_error_has_position() {
        let msg = input_message(parse_scenario("{\n  \"name\": \"x\",\n  \"Q_X\": [[1.0,]]\n}"));
        assert!(msg.starts_with("line 3, column"), "{msg}");
    }

    #[test]
    fn both_forms_rejected() {
        let text = "{\"name\": \"x\", \"Q_X\": [[1]], \"C\": [[1]], \"D\": [[1]],\n \"Q_Y\": [[1]], \"Q_XY\": [[1]]}";
        let msg = input_message(parse_scenario(text));
        assert!(msg.starts_with("line 2, column 2"), "{msg}");
    }

    #[test]
    fn ragged_and_inconsistent_matrices_rejected() {
        let ragged = r#"{"name": "x", "Q_X": [[1, 0], [0]], "C": [[1, 0]], "D": [[1]]}"#;
        assert!(input_message(parse_scenario(ragged)).contains("not rectangular"));
        let shape = r#"{"name": "x", "Q_X": [[1]], "C": [[1, 0]], "D": [[1]]}"#;
        input_message(parse_scenario(shape));
        let missing = r#"{"name": "x", "Q_X": [[1]], "C": [[1]]}"#;
        assert!(input_message(parse_scenario(missing)).contains("both C and D"));
        let unknown = r#"{"name": "x", "Q_X": [[1]], "C": [[1]], "D": [[1]], "extra": 1}"#;
        input_message(parse_scenario(unknown));
    }

    #[test]
    fn indefinite_covariance_is_math_error() {
        let text = r#"{"name": "x", "Q_X": [[-1.0]], "C": [[1]], "D": [[1]]}"#;
        assert!(matches!(parse_scenario(text), Err(CliError::Math(_))));
    }

    #[test]
    fn bits_conversion() {
        assert!((Units::Bits.convert(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(Units::Nats.convert(0.3), 0.3);
    }
}
