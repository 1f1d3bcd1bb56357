//! JSON records written by every command.

use rdkit_core::channel::{
    check_structure, parallel_form, reassemble, Diagnostics, ParallelChannel, StructureReport,
    TestChannelRealization, STRUCTURE_TOL,
};
use rdkit_core::gaussian::Matrix;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Flags of the invocation, echoed into the record. Paths are left out so
/// the record depends only on the scenario contents and parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord<T> {
    pub command: CommandEcho,
    pub scenario: ScenarioInfo,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: T,
}

impl<T: Serialize> RunRecord<T> {
    pub fn new(command: CommandEcho, scenario: &Scenario, seed: Option<u64>, outputs: T) -> Self {
        RunRecord {
            command,
            scenario: ScenarioInfo {
                name: scenario.name.clone(),
                hash: scenario.hash.clone(),
            },
            seed,
            version: VERSION.to_string(),
            outputs,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }
}

/// Row-major nested vectors.
pub fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(field: &str, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(CliError::Input(format!("{field} is not rectangular")));
    }
    Ok(Matrix::from_row_iterator(rows.len(), n_cols, rows.iter().flatten().copied()))
}

/// Serialized optimal realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub distortion: f64,
    pub rate_nats: f64,
    pub rate_bits: f64,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "Q_W")]
    pub q_w: Vec<Vec<f64>>,
    #[serde(rename = "Sigma_Delta")]
    pub sigma_delta: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    pub eigvals: Vec<f64>,
    pub deltas: Vec<f64>,
    #[serde(rename = "K")]
    pub estimator_gain: Vec<Vec<f64>>,
    #[serde(rename = "Q_X_given_Y")]
    pub q_cond: Vec<Vec<f64>>,
    pub parallel_channels: Vec<ParallelChannel>,
    pub diagnostics: Diagnostics,
    pub structure: StructureReport,
}

impl RealizationRecord {
    pub fn from_realization(real: &TestChannelRealization, distortion: f64) -> Result<Self, CliError> {
        Ok(RealizationRecord {
            distortion,
            rate_nats: real.rate_nats,
            rate_bits: crate::Units::Bits.convert(real.rate_nats),
            h: rows(&real.h),
            g: rows(&real.g),
            q_w: rows(&real.q_w),
            sigma_delta: rows(&real.sigma_delta),
            u: rows(&real.eigvecs),
            eigvals: real.eigvals.clone(),
            deltas: real.deltas.clone(),
            estimator_gain: rows(&real.estimator_gain),
            q_cond: rows(&real.q_cond),
            parallel_channels: parallel_form(real).map_err(CliError::Math)?,
            diagnostics: real.diagnostics.clone(),
            structure: real.structure_report(),
        })
    }

    /// Recompute every structural residual from the stored matrices, and
    /// check that the parallel channels reassemble to `(H, Q_W, Sigma_Delta)`
    /// and that the two rate fields agree.
    pub fn validate(&self) -> Result<StructureReport, CliError> {
        let h = from_rows("H", &self.h)?;
        let g = from_rows("G", &self.g)?;
        let q_w = from_rows("Q_W", &self.q_w)?;
        let sigma = from_rows("Sigma_Delta", &self.sigma_delta)?;
        let u = from_rows("U", &self.u)?;
        let k = from_rows("K", &self.estimator_gain)?;
        let q_cond = from_rows("Q_X_given_Y", &self.q_cond)?;
        let n = h.nrows();
        let square = [&h, &q_w, &sigma, &u, &q_cond].iter().all(|m| m.shape() == (n, n));
        if !square || g.shape() != k.shape() || g.nrows() != n || self.parallel_channels.len() != n {
            return Err(CliError::Input("realization matrices have inconsistent shapes".into()));
        }
        let report = check_structure(&h, &g, &q_w, &sigma, &u, &q_cond, &k);
        if !report.holds() {
            return Err(CliError::Math(rdkit_core::Error::StructureError(format!(
                "worst residual {:.3e}: {report:?}",
                report.worst()
            ))));
        }
        let scale = q_cond.abs().max().max(f64::MIN_POSITIVE);
        let (h2, w2, s2) = reassemble(&u, &self.parallel_channels);
        let drift = [(h2 - &h).abs().max(), (w2 - &q_w).abs().max() / scale, (s2 - &sigma).abs().max() / scale]
            .into_iter()
            .fold(0.0, f64::max);
        if drift > STRUCTURE_TOL {
            return Err(CliError::Math(rdkit_core::Error::StructureError(format!(
                "parallel channels do not reassemble the realization (residual {drift:.3e})"
            ))));
        }
        if (self.rate_bits - crate::Units::Bits.convert(self.rate_nats)).abs() > 1e-12 * self.rate_bits.abs().max(1.0) {
            return Err(CliError::Input("rate_bits does not match rate_nats".into()));
        }
        Ok(report)
    }
}
