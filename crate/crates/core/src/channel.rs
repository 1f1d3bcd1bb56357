//! Optimal test-channel realizations.
//!
//! With encoder and decoder side information the optimal reproduction is
//!
//! ```text
//! X^ = H X + (I - H) K Y + W,   W ~ N(0, Q_W)
//! H   = I - Sigma_Delta Q_{X|Y}^{-1}
//! Q_W = H Sigma_Delta
//! ```
//!
//! where `K = Q_XY Q_Y^{-1}` and `Sigma_Delta` is the water-filled distortion
//! covariance. `Q_{X|Y}`, `Sigma_Delta`, `H` and `Q_W` share the eigenbasis of
//! `Q_{X|Y}`, so the channel splits into independent scalar channels
//! `h_i X_i + W_i` with `h_i = 1 - delta_i / lambda_i` and `var W_i = h_i delta_i`.
//!
//! With side information at the decoder only, the encoder sends the
//! auxiliary `Z = H X + W` and the decoder forms `X^ = (I - H) K Y + Z`, at no
//! loss of rate.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    asymmetry, max_abs, pinv_psd, pinv_psd_scaled, schur, symmetrize, BlockCovariance, GaussianSourceSpec, Matrix,
};
use crate::waterfill::{rdf_conditional, RdfSolution};

/// Tolerance for every structural identity of a realization.
pub const STRUCTURE_TOL: f64 = 1e-9;

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(v))
}

/// Operator 2-norm of a symmetric matrix (largest absolute eigenvalue).
fn sym_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    nalgebra::SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn min_eig(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    nalgebra::SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Off-diagonal mass of `U^T M U` relative to `|trace|` (or to the largest
/// entry when the trace vanishes).
fn off_diagonal_ratio(u: &Matrix, m: &Matrix) -> f64 {
    let rotated = u.transpose() * m * u;
    let mut off = 0.0;
    for i in 0..rotated.nrows() {
        for j in 0..rotated.ncols() {
            if i != j {
                off += rotated[(i, j)].abs();
            }
        }
    }
    let scale = rotated.trace().abs().max(max_abs(&rotated));
    if scale == 0.0 {
        0.0
    } else {
        off / scale
    }
}

/// Diagnostics recorded while synthesizing a realization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Eigen-directions of `Q_{X|Y}` with zero variance; X is a
    /// deterministic function of Y there.
    pub null_dims: usize,
    /// Eigen-coordinates with `delta_i = lambda_i` (channel gain zero).
    pub saturated: Vec<usize>,
}

/// Optimal realization of the reproduction for the conditional RDF.
#[derive(Debug, Clone, PartialEq)]
pub struct TestChannelRealization {
    pub h: Matrix,
    pub g: Matrix,
    pub q_w: Matrix,
    pub sigma_delta: Matrix,
    /// Shared eigenbasis (eigenvectors of `Q_{X|Y}`, descending eigenvalues).
    pub eigvecs: Matrix,
    /// Eigenvalues of `Q_{X|Y}`.
    pub eigvals: Vec<f64>,
    /// Per-coordinate distortions, zero on null directions.
    pub deltas: Vec<f64>,
    /// `h_i = 1 - delta_i / lambda_i`.
    pub gains: Vec<f64>,
    /// Covariance of `Psi` with `W = H Psi`, on the subspace where `H > 0`.
    pub q_psi: Matrix,
    pub rate_nats: f64,
    /// `K = Q_XY Q_Y^{-1}`.
    pub estimator_gain: Matrix,
    pub q_cond: Matrix,
    pub diagnostics: Diagnostics,
}

/// Auxiliary channel `Z = A X + N`, `N ~ N(0, Q_N)` independent of `(X, Y)`,
/// decoded as `X^ = B Y + Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryChannel {
    pub a: Matrix,
    pub q_n: Matrix,
    pub b: Matrix,
    pub label: ChannelLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelLabel {
    Wyner,
    TianChen,
    ZahediOstergaard,
}

impl ChannelLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelLabel::Wyner => "wyner",
            ChannelLabel::TianChen => "tian_chen",
            ChannelLabel::ZahediOstergaard => "zahedi_ostergaard",
        }
    }
}

/// Block indices of [`AuxiliaryChannel::joint_covariance`].
pub mod blocks {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const Z: usize = 2;
    pub const XHAT: usize = 3;
}

impl AuxiliaryChannel {
    pub fn new(a: Matrix, q_n: Matrix, b: Matrix, label: ChannelLabel) -> Result<Self> {
        let n = a.nrows();
        if q_n.nrows() != n || q_n.ncols() != n {
            return Err(Error::ShapeError(format!(
                "Q_N must be {n}x{n}, got {}x{}",
                q_n.nrows(),
                q_n.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::ShapeError(format!(
                "B must have {n} rows, got {}",
                b.nrows()
            )));
        }
        crate::gaussian::ensure_psd(&q_n, "Q_N")?;
        Ok(Self { a, q_n, b, label })
    }

    fn check_against(&self, spec: &GaussianSourceSpec) -> Result<()> {
        if self.a.ncols() != spec.n_x() || self.b.ncols() != spec.n_y() {
            return Err(Error::ShapeError(format!(
                "channel is {}x{} with combiner {}x{}, source has n_x={}, n_y={}",
                self.a.nrows(),
                self.a.ncols(),
                self.b.nrows(),
                self.b.ncols(),
                spec.n_x(),
                spec.n_y()
            )));
        }
        Ok(())
    }

    /// Joint covariance of `(X, Y, Z, X^)`. Built as a linear image of
    /// `(X, Y, N)` so that `Z` depends on `Y` only through `X`.
    pub fn joint_covariance(&self, spec: &GaussianSourceSpec) -> Result<BlockCovariance> {
        self.check_against(spec)?;
        let (n_x, n_y, n_z) = (spec.n_x(), spec.n_y(), self.a.nrows());
        let inputs = n_x + n_y + n_z;
        let mut base = Matrix::zeros(inputs, inputs);
        base.view_mut((0, 0), (n_x + n_y, n_x + n_y))
            .copy_from(&spec.joint_covariance());
        base.view_mut((n_x + n_y, n_x + n_y), (n_z, n_z))
            .copy_from(&symmetrize(&self.q_n));

        let outputs = n_x + n_y + 2 * n_z;
        let mut map = Matrix::zeros(outputs, inputs);
        for i in 0..n_x + n_y {
            map[(i, i)] = 1.0;
        }
        // Z = A X + N
        map.view_mut((n_x + n_y, 0), (n_z, n_x)).copy_from(&self.a);
        map.view_mut((n_x + n_y, n_x + n_y), (n_z, n_z))
            .copy_from(&Matrix::identity(n_z, n_z));
        // X^ = B Y + A X + N
        let r = n_x + n_y + n_z;
        map.view_mut((r, 0), (n_z, n_x)).copy_from(&self.a);
        map.view_mut((r, n_x), (n_z, n_y)).copy_from(&self.b);
        map.view_mut((r, n_x + n_y), (n_z, n_z))
            .copy_from(&Matrix::identity(n_z, n_z));

        let sigma = symmetrize(&(&map * base * map.transpose()));
        BlockCovariance::new(vec![n_x, n_y, n_z, n_z], sigma)
    }
}

impl TestChannelRealization {
    pub fn n_x(&self) -> usize {
        self.h.nrows()
    }

    /// The same realization viewed as `Z = H X + W`, `X^ = G Y + Z`.
    pub fn auxiliary(&self) -> AuxiliaryChannel {
        AuxiliaryChannel {
            a: self.h.clone(),
            q_n: symmetrize(&self.q_w),
            b: self.g.clone(),
            label: ChannelLabel::Wyner,
        }
    }

    /// Residuals of every structural identity, each normalised to a relative
    /// scale. A realization is valid when all are at most [`STRUCTURE_TOL`].
    pub fn structure_report(&self) -> StructureReport {
        check_structure(
            &self.h,
            &self.g,
            &self.q_w,
            &self.sigma_delta,
            &self.eigvecs,
            &self.q_cond,
            &self.estimator_gain,
        )
    }
}

/// Normalised residuals of the structural identities of a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `||H - H^T|| / max(1, ||H||)`.
    pub h_symmetry: f64,
    /// `max(0, -lambda_min(H))`.
    pub h_negativity: f64,
    /// `||H - (I - Sigma Q^{-1})||`, computed on the range of `Q_{X|Y}`.
    pub h_formula: f64,
    /// `max(||Q_W - H Sigma||, ||Q_W - Sigma H||) / max(tiny, ||Sigma||)`.
    pub q_w_product: f64,
    /// `max(0, -lambda_min(Q_W)) / ||Sigma||`.
    pub q_w_negativity: f64,
    /// `||G - (I - H) K|| / max(1, ||K||)`.
    pub g_formula: f64,
    /// `||Q Sigma - Sigma Q|| / (||Q|| ||Sigma||)`.
    pub commutation: f64,
    /// Off-diagonal mass of `U^T M U` for `M` in `{Q, Sigma, H, Q_W}`.
    pub codiagonalization: f64,
    /// `||H K + G - K|| / max(1, ||K||)`: E{X|Y} = E{X^|Y}.
    pub condition_mean: f64,
    /// `||Q H^T - H Q H^T - Q_W|| / ||Q||`: cov(X, X^|Y) cov(X^|Y)^{-1} = I.
    pub condition_cov: f64,
    /// `||Q - Sigma||` negativity: `max(0, -lambda_min(Q - Sigma)) / ||Q||`.
    pub distortion_dominance: f64,
}

impl StructureReport {
    pub fn worst(&self) -> f64 {
        [
            self.h_symmetry,
            self.h_negativity,
            self.h_formula,
            self.q_w_product,
            self.q_w_negativity,
            self.g_formula,
            self.commutation,
            self.codiagonalization,
            self.condition_mean,
            self.condition_cov,
            self.distortion_dominance,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.worst() <= STRUCTURE_TOL
    }
}

/// Structural checks on raw matrices; also used to re-validate realizations
/// read back from disk.
pub fn check_structure(
    h: &Matrix,
    g: &Matrix,
    q_w: &Matrix,
    sigma_delta: &Matrix,
    eigvecs: &Matrix,
    q_cond: &Matrix,
    gain: &Matrix,
) -> StructureReport {
    let n = h.nrows();
    let eye = Matrix::identity(n, n);
    let q_norm = sym_norm(q_cond).max(f64::MIN_POSITIVE);
    let s_norm = sym_norm(sigma_delta).max(f64::MIN_POSITIVE);
    let k_scale = max_abs(gain).max(1.0);
    let h_scale = max_abs(h).max(1.0);

    // On the range of Q the formula H = I - Sigma Q^+ applies; null
    // directions of Q carry h = 0 by construction.
    let q_pinv = pinv_psd(q_cond);
    let range_proj = q_cond * &q_pinv;
    let h_from_formula = &range_proj - sigma_delta * &q_pinv;
    let h_formula = max_abs(&(h - &h_from_formula)) / h_scale;

    let q_w_product = max_abs(&(q_w - h * sigma_delta))
        .max(max_abs(&(q_w - sigma_delta * h)))
        / s_norm;

    let mut codiag = 0.0_f64;
    for m in [q_cond, sigma_delta, h, q_w] {
        codiag = codiag.max(off_diagonal_ratio(eigvecs, m));
    }

    let condition_cov =
        max_abs(&(q_cond * h.transpose() - h * q_cond * h.transpose() - q_w)) / q_norm;

    StructureReport {
        h_symmetry: asymmetry(h) / h_scale,
        h_negativity: (-min_eig(h)).max(0.0),
        h_formula,
        q_w_product,
        q_w_negativity: (-min_eig(q_w)).max(0.0) / s_norm,
        g_formula: max_abs(&(g - (&eye - h) * gain)) / k_scale,
        commutation: max_abs(&(q_cond * sigma_delta - sigma_delta * q_cond)) / (q_norm * s_norm),
        codiagonalization: codiag,
        condition_mean: max_abs(&(h * gain + g - gain)) / k_scale,
        condition_cov,
        distortion_dominance: (-min_eig(&(q_cond - sigma_delta))).max(0.0) / q_norm,
    }
}

fn build_realization(sol: &RdfSolution, stats: &crate::gaussian::ConditionalStats) -> TestChannelRealization {
    let n = stats.q_cond.nrows();
    let u = &stats.eigvecs;
    let deltas = sol.full_deltas();
    let active = n - sol.null_dims;

    let gains: Vec<f64> = (0..n)
        .map(|i| if i < active { 1.0 - deltas[i] / stats.eigvals[i] } else { 0.0 })
        .collect();
    let saturated = (0..active).filter(|&i| gains[i] == 0.0).collect();

    let eye = Matrix::identity(n, n);
    // Spectral form of I - Sigma Q^{-1}; exact zeros on saturated and null
    // coordinates. The formula itself is checked in `check_structure`.
    let h = u * diag(&gains) * u.transpose();
    let q_w = &h * &sol.sigma_delta;
    let g = (&eye - &h) * &stats.gain;

    let psi: Vec<f64> = (0..n)
        .map(|i| if gains[i] > 0.0 { deltas[i] / gains[i] } else { 0.0 })
        .collect();
    let q_psi = u * diag(&psi) * u.transpose();

    TestChannelRealization {
        h,
        g,
        q_w,
        sigma_delta: sol.sigma_delta.clone(),
        eigvecs: u.clone(),
        eigvals: stats.eigvals.clone(),
        deltas,
        gains,
        q_psi,
        rate_nats: sol.rate_nats(),
        estimator_gain: stats.gain.clone(),
        q_cond: stats.q_cond.clone(),
        diagnostics: Diagnostics {
            null_dims: sol.null_dims,
            saturated,
        },
    }
}

/// Optimal realization with side information at encoder and decoder.
pub fn synthesize_encoder_decoder_si(
    spec: &GaussianSourceSpec,
    distortion: f64,
) -> Result<TestChannelRealization> {
    let (sol, stats) = rdf_conditional(spec, distortion)?;
    Ok(build_realization(&sol, &stats))
}

/// Optimal auxiliary channel with side information at the decoder only,
/// together with its rate.
///
/// The rate is the conditional water-fill rate; it is cross-checked against
/// the closed form `I(X; Z) - I(Y; Z)` and a mismatch beyond
/// [`STRUCTURE_TOL`] is reported as a [`Error::StructureError`].
pub fn synthesize_decoder_only(
    spec: &GaussianSourceSpec,
    distortion: f64,
) -> Result<(AuxiliaryChannel, f64)> {
    let real = synthesize_encoder_decoder_si(spec, distortion)?;
    let channel = real.auxiliary();
    let joint = channel.joint_covariance(spec)?;
    let i_xz = crate::gaussian::gaussian_mi(&joint, &[blocks::X], &[blocks::Z], &[])?;
    let i_yz = crate::gaussian::gaussian_mi(&joint, &[blocks::Y], &[blocks::Z], &[])?;
    let closed_form = i_xz - i_yz;
    if (closed_form - real.rate_nats).abs() > STRUCTURE_TOL * real.rate_nats.max(1.0) {
        return Err(Error::StructureError(format!(
            "I(X;Z) - I(Y;Z) = {closed_form} differs from R_X|Y = {}",
            real.rate_nats
        )));
    }
    Ok((channel, real.rate_nats))
}

/// Rate `I(X; Z)` when the decoder uses the side information causally,
/// evaluated at the optimal `(H, Q_W)`.
///
/// `Q_{X|Z} = Q_X - Q_X H^T (H Q_X H^T + Q_W)^{-1} H Q_X`.
pub fn csi_rate(spec: &GaussianSourceSpec, distortion: f64) -> Result<f64> {
    let real = synthesize_encoder_decoder_si(spec, distortion)?;
    let q_x = spec.q_x();
    let h = &real.h;
    let q_z = symmetrize(&(h * q_x * h.transpose() + &real.q_w));
    let cross = q_x * h.transpose();
    let scale = max_abs(q_x);
    let q_x_given_z =
        symmetrize(&(q_x - &cross * pinv_psd_scaled(&q_z, scale) * cross.transpose()));

    // log det(Q_X Q_{X|Z}^{-1}) over the range of Q_X
    let n = spec.n_x();
    let mut sigma = Matrix::zeros(n, n);
    sigma.copy_from(q_x);
    let prior = crate::gaussian::spectral(&sigma)?;
    let top = prior.eigvals.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..n)
        .filter(|&k| prior.eigvals[k] > crate::gaussian::PINV_RTOL * top)
        .collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let basis = prior.eigvecs.select_columns(&keep);
    let post = basis.transpose() * q_x_given_z * &basis;
    let post_eig = nalgebra::SymmetricEigen::new(symmetrize(&post));
    let mut log_ratio = 0.0;
    for &k in &keep {
        log_ratio += prior.eigvals[k].ln();
    }
    for &v in post_eig.eigenvalues.iter() {
        if v <= crate::gaussian::PINV_RTOL * top {
            return Ok(f64::INFINITY);
        }
        log_ratio -= v.ln();
    }
    Ok((0.5 * log_ratio).max(0.0))
}

/// One scalar channel of the parallel decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelChannel {
    pub gain: f64,
    pub eigval: f64,
    pub delta: f64,
    pub noise_var: f64,
}

/// Per-coordinate channels in the shared eigenbasis. Fails when the
/// realization does not co-diagonalize.
pub fn parallel_form(real: &TestChannelRealization) -> Result<Vec<ParallelChannel>> {
    let report = real.structure_report();
    if report.codiagonalization > STRUCTURE_TOL {
        return Err(Error::StructureError(format!(
            "matrices are not co-diagonal in U (off-diagonal ratio {:.3e})",
            report.codiagonalization
        )));
    }
    let u = &real.eigvecs;
    let h_rot = u.transpose() * &real.h * u;
    let w_rot = u.transpose() * &real.q_w * u;
    let s_rot = u.transpose() * &real.sigma_delta * u;
    Ok((0..real.n_x())
        .map(|i| ParallelChannel {
            gain: h_rot[(i, i)],
            eigval: real.eigvals[i],
            delta: s_rot[(i, i)],
            noise_var: w_rot[(i, i)],
        })
        .collect())
}

/// Rebuild `(H, Q_W, Sigma_Delta)` from the parallel channels.
pub fn reassemble(eigvecs: &Matrix, channels: &[ParallelChannel]) -> (Matrix, Matrix, Matrix) {
    let pick = |f: fn(&ParallelChannel) -> f64| {
        let v: Vec<f64> = channels.iter().map(f).collect();
        eigvecs * diag(&v) * eigvecs.transpose()
    };
    (pick(|c| c.gain), pick(|c| c.noise_var), pick(|c| c.delta))
}

/// Wyner's scalar source `Y = alpha (X + U)`, `X ~ N(0, sigma_x2)`,
/// `U ~ N(0, sigma_u2)`, and its optimal channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarWynerChannel {
    /// Channel gain `H`.
    pub a: f64,
    /// `sigma_x2 / (sigma_x2 + sigma_u2)`; `c sigma_u2 = var(X|Y)`.
    pub c: f64,
    pub alpha: f64,
    /// `var(Psi) = Delta / a`, `None` at zero rate.
    pub q_psi: Option<f64>,
    /// Weight on `Y` in `X^ = a X + (c / alpha)(1 - a) Y + a Psi`.
    pub y_weight: f64,
    pub rate_nats: f64,
}

pub fn scalar_wyner(
    sigma_x2: f64,
    sigma_u2: f64,
    alpha: f64,
    distortion: f64,
) -> Result<ScalarWynerChannel> {
    for (name, v) in [
        ("sigma_x2", sigma_x2),
        ("sigma_u2", sigma_u2),
        ("alpha", alpha),
        ("distortion", distortion),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
        }
    }
    let c = sigma_x2 / (sigma_x2 + sigma_u2);
    let cond = c * sigma_u2;
    let (a, q_psi, rate_nats) = if distortion < cond {
        let a = (cond - distortion) / cond;
        (a, Some(distortion / a), 0.5 * (cond / distortion).ln())
    } else {
        (0.0, None, 0.0)
    };
    Ok(ScalarWynerChannel {
        a,
        c,
        alpha,
        q_psi,
        y_weight: c / alpha * (1.0 - a),
        rate_nats,
    })
}

impl ScalarWynerChannel {
    /// The equivalent one-dimensional observation-form source.
    pub fn source(sigma_x2: f64, sigma_u2: f64, alpha: f64) -> Result<GaussianSourceSpec> {
        GaussianSourceSpec::observation(
            Matrix::from_element(1, 1, sigma_x2),
            Matrix::from_element(1, 1, alpha),
            Matrix::from_element(1, 1, alpha * sigma_u2.sqrt()),
        )
    }
}

/// Error covariance of the MMSE estimate of `X` from `(Y, Z)`.
pub fn conditional_mmse(
    spec: &GaussianSourceSpec,
    channel: &AuxiliaryChannel,
) -> Result<Matrix> {
    let joint = channel.joint_covariance(spec)?;
    let x = joint.coords(&[blocks::X])?;
    let yz = joint.coords(&[blocks::Y, blocks::Z])?;
    Ok(schur(joint.sigma(), &x, &yz))
}
