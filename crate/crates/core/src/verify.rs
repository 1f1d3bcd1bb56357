//! Verification of the structural properties of test channels.
//!
//! Information identities are checked in closed form on covariance matrices.
//! Monte Carlo is used only where a statement is about moments: the
//! distortion `E||X - X^||^2` and the regression of `X` on `(X^, Y)`, which
//! for the optimal channel must come out as `X^` itself.
//!
//! Sampling uses ChaCha8 seeded from a `u64`; Gaussian variates come from the
//! ziggurat sampler of `rand_distr`. Identical seeds give bit-identical
//! samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{blocks, AuxiliaryChannel, TestChannelRealization};
use crate::error::{Error, Result};
use crate::gaussian::{
    gaussian_mi, pinv_psd, source_mi, sqrt_psd, symmetrize, BlockCovariance, GaussianSourceSpec,
    Matrix, SourceForm, PINV_RTOL,
};
use crate::waterfill::{rdf_conditional, rdf_marginal};

/// Equality tolerance for closed-form information identities.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub confidence_sigmas: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 200_000,
            seed: 0,
            confidence_sigmas: 3.0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(Error::InvalidParam(format!(
                "n_samples must be at least 1000, got {}",
                self.n_samples
            )));
        }
        if !(self.confidence_sigmas > 0.0) {
            return Err(Error::InvalidParam("confidence_sigmas must be positive".into()));
        }
        Ok(())
    }
}

/// Draws of `(X, Y, Z, X^)`, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
    pub xhat: Matrix,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn standard_normals(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_slice(rows, cols, &data)
}

/// Sample the source and push it through the channel.
///
/// Observation-form sources are generated as `X = Q_X^{1/2} xi`,
/// `Y = C X + D V`; joint-form sources through the symmetric square root of
/// the joint covariance.
pub fn sample_joint(
    spec: &GaussianSourceSpec,
    channel: &AuxiliaryChannel,
    cfg: &McConfig,
) -> Result<Samples> {
    cfg.validate()?;
    // shape check
    channel.joint_covariance(spec)?;
    let n = cfg.n_samples;
    let (n_x, n_y, n_z) = (spec.n_x(), spec.n_y(), channel.a.nrows());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xi = standard_normals(&mut rng, n, n_x + n_y);
    let eta = standard_normals(&mut rng, n, n_z);

    let (x, y) = match spec.form() {
        SourceForm::Observation { c, d } => {
            let x = xi.columns(0, n_x) * sqrt_psd(spec.q_x());
            let y = &x * c.transpose() + xi.columns(n_x, n_y) * d.transpose();
            (x, y)
        }
        SourceForm::Joint { .. } => {
            let xy = &xi * sqrt_psd(&spec.joint_covariance());
            (xy.columns(0, n_x).into_owned(), xy.columns(n_x, n_y).into_owned())
        }
    };
    let noise = eta * sqrt_psd(&channel.q_n);
    let z = &x * channel.a.transpose() + noise;
    let xhat = &y * channel.b.transpose() + &z;
    Ok(Samples { x, y, z, xhat })
}

/// Sample covariance of the stacked `(X, Y)` columns (population mean zero).
pub fn sample_covariance_xy(samples: &Samples) -> Matrix {
    let n = samples.len() as f64;
    let mut stacked = Matrix::zeros(samples.len(), samples.x.ncols() + samples.y.ncols());
    stacked.columns_mut(0, samples.x.ncols()).copy_from(&samples.x);
    stacked
        .columns_mut(samples.x.ncols(), samples.y.ncols())
        .copy_from(&samples.y);
    stacked.transpose() * &stacked / n
}

/// Outcome of the Monte Carlo structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_samples: usize,
    pub target_distortion: f64,
    pub empirical_distortion: f64,
    pub distortion_se: f64,
    /// Row `j` holds the coefficients of `X_j` on the components of `X^`.
    pub regression_on_xhat: Vec<Vec<f64>>,
    pub regression_on_y: Vec<Vec<f64>>,
    pub se_xhat: Vec<Vec<f64>>,
    pub se_y: Vec<Vec<f64>>,
    /// Regressor covariance was rank deficient; coefficients are the
    /// minimum-norm least-squares solution.
    pub rank_deficient: bool,
    pub pass: McPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McPass {
    pub distortion: bool,
    pub xhat_identity: bool,
    pub y_zero: bool,
}

impl McPass {
    pub fn all(&self) -> bool {
        self.distortion && self.xhat_identity && self.y_zero
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn centered(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    out
}

/// Regress `X` on `(X^, Y)` with an intercept and compare against the
/// structural property `E{X | X^, Y} = X^`: coefficients on `X^` must be the
/// identity and on `Y` zero, each within `confidence_sigmas` standard errors.
/// The empirical distortion is compared with `target_distortion` the same way.
pub fn check_conditional_mean(
    samples: &Samples,
    target_distortion: f64,
    confidence_sigmas: f64,
) -> Result<McReport> {
    let n = samples.len();
    if n < 1000 {
        return Err(Error::InvalidParam(format!(
            "need at least 1000 samples, got {n}"
        )));
    }
    let (n_x, n_y) = (samples.x.ncols(), samples.y.ncols());
    let p = n_x + n_y;
    let nf = n as f64;

    let err = &samples.x - &samples.xhat;
    let sq: Vec<f64> = err.row_iter().map(|r| r.norm_squared()).collect();
    let mean_sq = sq.iter().sum::<f64>() / nf;
    let var_sq = sq.iter().map(|v| (v - mean_sq).powi(2)).sum::<f64>() / (nf - 1.0);
    let distortion_se = (var_sq / nf).sqrt();

    let mut reg = Matrix::zeros(n, p);
    reg.columns_mut(0, n_x).copy_from(&samples.xhat);
    reg.columns_mut(n_x, n_y).copy_from(&samples.y);
    let reg = centered(&reg);
    let target = centered(&samples.x);

    let gram = symmetrize(&(reg.transpose() * &reg));
    let gram_inv = pinv_psd(&gram);
    let eig = nalgebra::SymmetricEigen::new(gram.clone());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
    let rank_deficient = eig.eigenvalues.iter().any(|&v| v <= PINV_RTOL * top);

    // beta: p x n_x, column j regresses X_j
    let beta = &gram_inv * (reg.transpose() * &target);
    let resid = &target - &reg * &beta;
    let dof = (nf - p as f64 - 1.0).max(1.0);
    let mut se = Matrix::zeros(p, n_x);
    for j in 0..n_x {
        let s2 = resid.column(j).norm_squared() / dof;
        for k in 0..p {
            se[(k, j)] = (s2 * gram_inv[(k, k)].max(0.0)).sqrt();
        }
    }

    let coef = beta.transpose(); // n_x x p
    let se_t = se.transpose();
    let on_xhat = coef.columns(0, n_x).into_owned();
    let on_y = coef.columns(n_x, n_y).into_owned();
    let se_xhat = se_t.columns(0, n_x).into_owned();
    let se_y = se_t.columns(n_x, n_y).into_owned();

    let within = |value: f64, expected: f64, se: f64| {
        (value - expected).abs() <= confidence_sigmas * se
    };
    let mut xhat_identity = !rank_deficient;
    for j in 0..n_x {
        for k in 0..n_x {
            let expected = if j == k { 1.0 } else { 0.0 };
            xhat_identity &= within(on_xhat[(j, k)], expected, se_xhat[(j, k)]);
        }
    }
    let mut y_zero = !rank_deficient;
    for j in 0..n_x {
        for k in 0..n_y {
            y_zero &= within(on_y[(j, k)], 0.0, se_y[(j, k)]);
        }
    }

    Ok(McReport {
        n_samples: n,
        target_distortion,
        empirical_distortion: mean_sq,
        distortion_se,
        regression_on_xhat: rows(&on_xhat),
        regression_on_y: rows(&on_y),
        se_xhat: rows(&se_xhat),
        se_y: rows(&se_y),
        rank_deficient,
        pass: McPass {
            distortion: within(mean_sq, target_distortion, distortion_se),
            xhat_identity,
            y_zero,
        },
    })
}

/// Mutual informations induced by an auxiliary channel, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelInformation {
    pub i_x_xhat_given_y: f64,
    pub i_x_xhat: f64,
    pub i_x_y: f64,
    pub i_x_z_given_y: f64,
    pub i_x_z: f64,
    pub i_y_z: f64,
}

pub fn channel_information(
    spec: &GaussianSourceSpec,
    channel: &AuxiliaryChannel,
) -> Result<ChannelInformation> {
    let joint = channel.joint_covariance(spec)?;
    let mi = |a: usize, b: usize, c: &[usize]| gaussian_mi(&joint, &[a], &[b], c);
    Ok(ChannelInformation {
        i_x_xhat_given_y: mi(blocks::X, blocks::XHAT, &[blocks::Y])?,
        i_x_xhat: mi(blocks::X, blocks::XHAT, &[])?,
        i_x_y: mi(blocks::X, blocks::Y, &[])?,
        i_x_z_given_y: mi(blocks::X, blocks::Z, &[blocks::Y])?,
        i_x_z: mi(blocks::X, blocks::Z, &[])?,
        i_y_z: mi(blocks::Y, blocks::Z, &[])?,
    })
}

/// The five rate expressions that coincide for the optimal realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiIdentities {
    /// `I(X; X^ | Y)`.
    pub cond_xhat: f64,
    /// `I(X; X^) - I(X; Y)`.
    pub xhat_minus_xy: f64,
    /// `I(X; Z | Y)`.
    pub cond_z: f64,
    /// `I(X; Z) - I(Y; Z)`.
    pub z_minus_yz: f64,
    pub waterfill_rate: f64,
}

impl MiIdentities {
    pub fn values(&self) -> [f64; 5] {
        [
            self.cond_xhat,
            self.xhat_minus_xy,
            self.cond_z,
            self.z_minus_yz,
            self.waterfill_rate,
        ]
    }

    /// Largest pairwise disagreement among the five values.
    pub fn spread(&self) -> f64 {
        let v = self.values();
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }

    pub fn holds(&self) -> bool {
        self.spread() <= IDENTITY_TOL * self.waterfill_rate.max(1.0)
    }
}

pub fn mi_identities(
    spec: &GaussianSourceSpec,
    real: &TestChannelRealization,
) -> Result<MiIdentities> {
    let info = channel_information(spec, &real.auxiliary())?;
    Ok(MiIdentities {
        cond_xhat: info.i_x_xhat_given_y,
        xhat_minus_xy: info.i_x_xhat - info.i_x_y,
        cond_z: info.i_x_z_given_y,
        z_minus_yz: info.i_x_z - info.i_y_z,
        waterfill_rate: real.rate_nats,
    })
}

/// `I(X; Z | Y) - I(X; X^ | Y)`; non-negative for any decoder that is a
/// function of `(Y, Z)`.
pub fn data_processing_gap(spec: &GaussianSourceSpec, channel: &AuxiliaryChannel) -> Result<f64> {
    let info = channel_information(spec, channel)?;
    Ok(info.i_x_z_given_y - info.i_x_xhat_given_y)
}

/// `(I(X; X^ | Y), I(X - K Y; X^ - K Y))`: the rate evaluated directly and on
/// the innovations with respect to `Y`.
pub fn translated_information(
    spec: &GaussianSourceSpec,
    real: &TestChannelRealization,
) -> Result<(f64, f64)> {
    let joint = real.auxiliary().joint_covariance(spec)?;
    let direct = gaussian_mi(&joint, &[blocks::X], &[blocks::XHAT], &[blocks::Y])?;

    let (n_x, n_y) = (spec.n_x(), spec.n_y());
    let k = &real.estimator_gain;
    // (X, Y, Z, X^) -> (X - K Y, X^ - K Y)
    let mut map = Matrix::zeros(2 * n_x, 3 * n_x + n_y);
    map.view_mut((0, 0), (n_x, n_x)).copy_from(&Matrix::identity(n_x, n_x));
    map.view_mut((0, n_x), (n_x, n_y)).copy_from(&(-k));
    map.view_mut((n_x, 2 * n_x + n_y), (n_x, n_x))
        .copy_from(&Matrix::identity(n_x, n_x));
    map.view_mut((n_x, n_x), (n_x, n_y)).copy_from(&(-k));
    let sigma = symmetrize(&(&map * joint.sigma() * map.transpose()));
    let translated = BlockCovariance::new(vec![n_x, n_x], sigma)?;
    let innovations = gaussian_mi(&translated, &[0], &[1], &[])?;
    Ok((direct, innovations))
}

/// Comparison of the conditional RDF with Gray's lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayReport {
    pub distortion: f64,
    /// `n_x * lambda_min(Q_{X|Y})`.
    pub region_bound: f64,
    /// `R_{X|Y}(Delta)`.
    pub lhs: f64,
    /// `R_X(Delta) - I(X; Y)`.
    pub rhs: f64,
    pub gap: f64,
    pub in_region: bool,
}

pub fn gray_check(spec: &GaussianSourceSpec, distortion: f64) -> Result<GrayReport> {
    let (cond, stats) = rdf_conditional(spec, distortion)?;
    let marginal = rdf_marginal(spec.q_x(), distortion)?;
    let i_xy = source_mi(spec)?;
    let lambda_min = stats.eigvals.last().copied().unwrap_or(0.0).max(0.0);
    let region_bound = spec.n_x() as f64 * lambda_min;
    let lhs = cond.rate_nats();
    let rhs = marginal.rate_nats() - i_xy;
    Ok(GrayReport {
        distortion,
        region_bound,
        lhs,
        rhs,
        gap: lhs - rhs,
        in_region: distortion <= region_bound,
    })
}
