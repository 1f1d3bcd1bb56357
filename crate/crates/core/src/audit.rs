//! Audit of two auxiliary channels proposed in earlier work for the
//! decoder-side-information problem, specialised to a remote source equal to
//! `X`.
//!
//! Both channels have the form `Z = U^T X + N` with diagonal `N` in the
//! eigenbasis of `Q_{X|Y}` and use the same water-fill allocation
//! `(lambda_i, delta_i)` as the optimal channel:
//!
//! - Tian-Chen: `var N_i = delta_i / (lambda_i - delta_i)`
//! - Zahedi-Ostergaard: `var N_i = lambda_i delta_i / (lambda_i - delta_i)`
//!
//! Each is decoded with the MMSE estimator `E{X | Y, Z}`. The audit reports
//! rate and achieved distortion side by side with the optimal channel and
//! does not presume which way any rate gap goes.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::{
    conditional_mmse, synthesize_decoder_only, AuxiliaryChannel, ChannelLabel,
};
use crate::error::{Error, Result};
use crate::gaussian::{conditional_stats, GaussianSourceSpec, Matrix};
use crate::verify::channel_information;
use crate::waterfill::rdf_conditional;

/// Slack allowed when comparing achieved MMSE against the target.
pub const MMSE_SLACK: f64 = 1e-9;

/// Fractions of `Q_{X|Y}` used for the singular-limit table.
pub const SINGULAR_FRACTIONS: [f64; 3] = [0.9, 0.98, 0.999];

fn eigen_allocation(spec: &GaussianSourceSpec, distortion: f64) -> Result<(Matrix, Vec<f64>, Vec<f64>)> {
    let (sol, stats) = rdf_conditional(spec, distortion)?;
    Ok((stats.eigvecs, stats.eigvals, sol.full_deltas()))
}

fn prior_work_channel(
    spec: &GaussianSourceSpec,
    distortion: f64,
    label: ChannelLabel,
) -> Result<AuxiliaryChannel> {
    let (u, lambdas, deltas) = eigen_allocation(spec, distortion)?;
    let mut vars = Vec::with_capacity(lambdas.len());
    for (i, (&l, &d)) in lambdas.iter().zip(&deltas).enumerate() {
        let m = l.min(d);
        if !(l - m > 0.0) {
            return Err(Error::SingularChannel { index: i });
        }
        vars.push(match label {
            ChannelLabel::TianChen => m / (l - m),
            _ => l * m / (l - m),
        });
    }
    let n = lambdas.len();
    AuxiliaryChannel::new(
        u.transpose(),
        Matrix::from_diagonal(&DVector::from_vec(vars)),
        Matrix::zeros(n, spec.n_y()),
        label,
    )
}

/// `Z = U^T X + N_3` with `var N_3,i = delta_i / (lambda_i - delta_i)`.
pub fn tian_chen_channel(spec: &GaussianSourceSpec, distortion: f64) -> Result<AuxiliaryChannel> {
    prior_work_channel(spec, distortion, ChannelLabel::TianChen)
}

/// `Z = U^T X + nu` with `var nu_i = lambda_i delta_i / (lambda_i - delta_i)`.
pub fn zahedi_ostergaard_channel(
    spec: &GaussianSourceSpec,
    distortion: f64,
) -> Result<AuxiliaryChannel> {
    prior_work_channel(spec, distortion, ChannelLabel::ZahediOstergaard)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub label: ChannelLabel,
    /// Noise variances per eigen-coordinate.
    pub noise_vars: Vec<f64>,
    /// `I(X; Z) - I(Y; Z)`.
    pub rate_nats: f64,
    /// `I(X; Z | Y)`; equals `rate_nats` for channels with `Z - X - Y`.
    pub conditional_rate_nats: f64,
    /// `trace cov(X | Y, Z)`.
    pub achieved_mmse: f64,
    pub meets_distortion: bool,
    /// `rate_nats` minus the optimal channel's rate.
    pub rate_gap_vs_wyner: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularLimitRow {
    pub fraction: f64,
    /// Largest optimal-channel gain `h_i = 1 - fraction`.
    pub wyner_max_gain: f64,
    /// Smallest noise variance across coordinates.
    pub tian_chen_min_noise: f64,
    pub zahedi_ostergaard_min_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub distortion_target: f64,
    pub wyner_rate_nats: f64,
    pub records: Vec<AuditRecord>,
    pub singular_limit: Vec<SingularLimitRow>,
}

impl AuditReport {
    pub fn record(&self, label: ChannelLabel) -> Option<&AuditRecord> {
        self.records.iter().find(|r| r.label == label)
    }
}

/// Noise variances of the audited channels as `Sigma_Delta -> fraction * Q_{X|Y}`,
/// i.e. `delta_i = fraction * lambda_i` on every coordinate.
pub fn singular_limit(spec: &GaussianSourceSpec, fractions: &[f64]) -> Result<Vec<SingularLimitRow>> {
    let stats = conditional_stats(spec)?;
    let positive: Vec<f64> = stats.eigvals[..stats.eigvals.len() - stats.null_dims()].to_vec();
    if positive.is_empty() {
        return Err(Error::SingularChannel { index: 0 });
    }
    fractions
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParam(format!("fraction must be in (0, 1), got {f}")));
            }
            let tc = positive
                .iter()
                .map(|&l| (f * l) / (l - f * l))
                .fold(f64::INFINITY, f64::min);
            let zo = positive
                .iter()
                .map(|&l| l * (f * l) / (l - f * l))
                .fold(f64::INFINITY, f64::min);
            Ok(SingularLimitRow {
                fraction: f,
                wyner_max_gain: 1.0 - f,
                tian_chen_min_noise: tc,
                zahedi_ostergaard_min_noise: zo,
            })
        })
        .collect()
}

fn audit_record(
    spec: &GaussianSourceSpec,
    channel: &AuxiliaryChannel,
    noise_vars: Vec<f64>,
    distortion: f64,
    wyner_rate: f64,
) -> Result<AuditRecord> {
    let info = channel_information(spec, channel)?;
    let rate_nats = info.i_x_z - info.i_y_z;
    let achieved_mmse = conditional_mmse(spec, channel)?.trace();
    Ok(AuditRecord {
        label: channel.label,
        noise_vars,
        rate_nats,
        conditional_rate_nats: info.i_x_z_given_y,
        achieved_mmse,
        meets_distortion: achieved_mmse <= distortion + MMSE_SLACK,
        rate_gap_vs_wyner: rate_nats - wyner_rate,
    })
}

fn diagonal_in(u: &Matrix, m: &Matrix) -> Vec<f64> {
    let r = u.transpose() * m * u;
    (0..r.nrows()).map(|i| r[(i, i)]).collect()
}

/// Compare the optimal channel with the two audited ones at `distortion`.
pub fn audit_compare(spec: &GaussianSourceSpec, distortion: f64) -> Result<AuditReport> {
    let tian_chen = tian_chen_channel(spec, distortion)?;
    let zahedi = zahedi_ostergaard_channel(spec, distortion)?;
    let (wyner, wyner_rate) = synthesize_decoder_only(spec, distortion)?;
    let stats = conditional_stats(spec)?;

    let records = vec![
        audit_record(
            spec,
            &wyner,
            diagonal_in(&stats.eigvecs, &wyner.q_n),
            distortion,
            wyner_rate,
        )?,
        audit_record(
            spec,
            &tian_chen,
            tian_chen.q_n.diagonal().iter().copied().collect(),
            distortion,
            wyner_rate,
        )?,
        audit_record(
            spec,
            &zahedi,
            zahedi.q_n.diagonal().iter().copied().collect(),
            distortion,
            wyner_rate,
        )?,
    ];
    Ok(AuditReport {
        distortion_target: distortion,
        wyner_rate_nats: wyner_rate,
        records,
        singular_limit: singular_limit(spec, &SINGULAR_FRACTIONS)?,
    })
}
