//! Covariance algebra for jointly Gaussian vectors.
//!
//! A source is described by the law of the pair `(X, Y)`: either through the
//! observation model `Y = C X + D V` with `V ~ N(0, I)`, or directly through
//! the blocks `Q_Y` and `Q_XY` of the joint covariance. Everything downstream
//! (water-filling, test channels, verification) is built from the conditional
//! covariance `Q_{X|Y}` computed here and from [`gaussian_mi`].
//!
//! All information quantities are in nats.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative tolerance for symmetry and positive-semidefiniteness checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues below this fraction of the largest one are treated as zero
/// (pseudo-inverse cutoff, pseudo-determinant support).
pub const PINV_RTOL: f64 = 1e-12;

/// Largest absolute entry, used as the scale for relative tolerances.
pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub(crate) fn asymmetry(m: &Matrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeError(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidCovariance(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Checks symmetry and positive semidefiniteness within [`SYMMETRY_TOL`].
pub(crate) fn ensure_psd(m: &Matrix, what: &str) -> Result<()> {
    ensure_square(m, what)?;
    ensure_finite(m, what)?;
    let scale = max_abs(m);
    if asymmetry(m) > SYMMETRY_TOL * scale {
        return Err(Error::InvalidCovariance(format!("{what} is not symmetric")));
    }
    if m.nrows() == 0 {
        return Ok(());
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -SYMMETRY_TOL * norm.max(scale) {
        return Err(Error::InvalidCovariance(format!(
            "{what} has negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Orthonormal eigenvectors (columns) with eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral {
    pub eigvecs: Matrix,
    pub eigvals: Vec<f64>,
}

impl Spectral {
    pub fn reconstruct(&self) -> Matrix {
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(self.eigvals.clone()));
        &self.eigvecs * d * self.eigvecs.transpose()
    }
}

/// Spectral decomposition of a symmetric matrix.
///
/// Eigenvalues come out sorted descending. Each eigenvector is flipped so
/// that its first entry of non-negligible magnitude is positive, which makes
/// the basis reproducible across runs and comparable across matrices.
pub fn spectral(m: &Matrix) -> Result<Spectral> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    let n = m.nrows();
    let scale = max_abs(m);
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            tolerance: SYMMETRY_TOL * scale,
        });
    }
    if n == 0 {
        return Ok(Spectral {
            eigvecs: Matrix::zeros(0, 0),
            eigvals: Vec::new(),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigvecs = Matrix::zeros(n, n);
    let mut eigvals = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let lead = v.iter().find(|x| x.abs() > 1e-8).copied().unwrap_or(0.0);
        if lead < 0.0 {
            v.neg_mut();
        }
        eigvecs.set_column(col, &v);
        eigvals.push(eig.eigenvalues[src]);
    }
    Ok(Spectral { eigvecs, eigvals })
}

/// Moore-Penrose inverse of a symmetric PSD matrix via its spectrum, with
/// eigenvalues below `PINV_RTOL * lambda_max` dropped.
pub(crate) fn pinv_psd(m: &Matrix) -> Matrix {
    pinv_psd_scaled(m, 0.0)
}

/// As [`pinv_psd`], with the cutoff taken relative to `max(lambda_max, scale)`
/// so that a block that is numerically zero inside a larger covariance is
/// treated as zero.
pub(crate) fn pinv_psd_scaled(m: &Matrix, scale: f64) -> Matrix {
    let n = m.nrows();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v)).max(scale);
    let mut out = Matrix::zeros(n, n);
    if top <= 0.0 {
        return out;
    }
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > PINV_RTOL * top {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

/// Symmetric PSD square root; slightly negative eigenvalues are clamped.
pub(crate) fn sqrt_psd(m: &Matrix) -> Matrix {
    let n = m.nrows();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut out = Matrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) * lambda.sqrt();
        }
    }
    out
}

/// How the pair `(X, Y)` is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceForm {
    /// `Y = C X + D V`, `V ~ N(0, I_{n_y})` independent of `X`.
    Observation { c: Matrix, d: Matrix },
    /// Direct covariance blocks.
    Joint { q_y: Matrix, q_xy: Matrix },
}

/// Zero-mean jointly Gaussian source `(X, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSourceSpec {
    q_x: Matrix,
    form: SourceForm,
}

impl GaussianSourceSpec {
    /// Observation form. `D D^T` must be positive definite so that
    /// `I(X; Y)` is finite.
    pub fn observation(q_x: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        ensure_psd(&q_x, "Q_X")?;
        let n_x = q_x.nrows();
        if c.ncols() != n_x {
            return Err(Error::ShapeError(format!(
                "C must have {n_x} columns, got {}",
                c.ncols()
            )));
        }
        let n_y = c.nrows();
        if d.nrows() != n_y || d.ncols() != n_y {
            return Err(Error::ShapeError(format!(
                "D must be {n_y}x{n_y}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        ensure_finite(&c, "C")?;
        ensure_finite(&d, "D")?;
        let ddt = &d * d.transpose();
        if n_y > 0 {
            let eig = SymmetricEigen::new(symmetrize(&ddt));
            let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if top <= 0.0 || min <= PINV_RTOL * top {
                return Err(Error::InvalidCovariance(
                    "D D^T must be positive definite".into(),
                ));
            }
        }
        Ok(Self {
            q_x,
            form: SourceForm::Observation { c, d },
        })
    }

    /// Joint form; the stacked covariance `[[Q_X, Q_XY], [Q_XY^T, Q_Y]]`
    /// must be PSD.
    pub fn joint(q_x: Matrix, q_y: Matrix, q_xy: Matrix) -> Result<Self> {
        ensure_psd(&q_x, "Q_X")?;
        ensure_psd(&q_y, "Q_Y")?;
        let (n_x, n_y) = (q_x.nrows(), q_y.nrows());
        if q_xy.nrows() != n_x || q_xy.ncols() != n_y {
            return Err(Error::ShapeError(format!(
                "Q_XY must be {n_x}x{n_y}, got {}x{}",
                q_xy.nrows(),
                q_xy.ncols()
            )));
        }
        ensure_finite(&q_xy, "Q_XY")?;
        let spec = Self {
            q_x,
            form: SourceForm::Joint { q_y, q_xy },
        };
        ensure_psd(&spec.joint_covariance(), "joint covariance of (X, Y)")?;
        Ok(spec)
    }

    pub fn n_x(&self) -> usize {
        self.q_x.nrows()
    }

    pub fn n_y(&self) -> usize {
        match &self.form {
            SourceForm::Observation { c, .. } => c.nrows(),
            SourceForm::Joint { q_y, .. } => q_y.nrows(),
        }
    }

    pub fn form(&self) -> &SourceForm {
        &self.form
    }

    pub fn q_x(&self) -> &Matrix {
        &self.q_x
    }

    pub fn q_y(&self) -> Matrix {
        match &self.form {
            SourceForm::Observation { c, d } => {
                c * &self.q_x * c.transpose() + d * d.transpose()
            }
            SourceForm::Joint { q_y, .. } => q_y.clone(),
        }
    }

    /// Cross-covariance `E{X Y^T}`.
    pub fn q_xy(&self) -> Matrix {
        match &self.form {
            SourceForm::Observation { c, .. } => &self.q_x * c.transpose(),
            SourceForm::Joint { q_xy, .. } => q_xy.clone(),
        }
    }

    /// Covariance of the stacked vector `(X, Y)`.
    pub fn joint_covariance(&self) -> Matrix {
        let (n_x, n_y) = (self.n_x(), self.n_y());
        let mut out = Matrix::zeros(n_x + n_y, n_x + n_y);
        let q_xy = self.q_xy();
        out.view_mut((0, 0), (n_x, n_x)).copy_from(&self.q_x);
        out.view_mut((0, n_x), (n_x, n_y)).copy_from(&q_xy);
        out.view_mut((n_x, 0), (n_y, n_x)).copy_from(&q_xy.transpose());
        out.view_mut((n_x, n_x), (n_y, n_y)).copy_from(&self.q_y());
        out
    }

    /// Same law with `Y` made independent of `X` (the `C = 0` degenerate case).
    pub fn without_side_information(&self) -> Self {
        let n_y = self.n_y();
        Self {
            q_x: self.q_x.clone(),
            form: SourceForm::Joint {
                q_y: self.q_y(),
                q_xy: Matrix::zeros(self.n_x(), n_y),
            },
        }
    }
}

/// MMSE estimator of `X` from `Y` and the error covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStats {
    /// `K = Q_XY Q_Y^{-1}` (pseudo-inverse when `Q_Y` is singular).
    pub gain: Matrix,
    /// `Q_{X|Y} = Q_X - K Q_XY^T`.
    pub q_cond: Matrix,
    /// Descending eigenvalues of `q_cond`.
    pub eigvals: Vec<f64>,
    /// Orthonormal eigenvectors of `q_cond`, one per column.
    pub eigvecs: Matrix,
}

impl ConditionalStats {
    /// Number of eigenvalues at or below the pseudo-inverse cutoff.
    pub fn null_dims(&self) -> usize {
        null_count(&self.eigvals)
    }
}

pub(crate) fn null_count(eigvals: &[f64]) -> usize {
    let top = eigvals.first().copied().unwrap_or(0.0).max(0.0);
    eigvals.iter().filter(|&&l| l <= PINV_RTOL * top).count()
}

/// Conditional statistics of `X` given `Y` via the Schur complement.
pub fn conditional_stats(spec: &GaussianSourceSpec) -> Result<ConditionalStats> {
    let q_xy = spec.q_xy();
    let q_y = spec.q_y();
    let gain = &q_xy * pinv_psd(&q_y);
    let q_cond = symmetrize(&(spec.q_x() - &gain * q_xy.transpose()));
    let Spectral { eigvecs, mut eigvals } = spectral(&q_cond)?;
    let scale = spectral(spec.q_x())?.eigvals.first().copied().unwrap_or(0.0);
    if let Some(&min) = eigvals.last() {
        if min < -SYMMETRY_TOL * scale {
            return Err(Error::InvalidCovariance(format!(
                "Q_{{X|Y}} has negative eigenvalue {min:.3e}"
            )));
        }
    }
    // round-off below zero is clamped so downstream logs stay finite
    for v in eigvals.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(ConditionalStats {
        gain,
        q_cond,
        eigvals,
        eigvecs,
    })
}

/// Joint covariance of a vector split into consecutive blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCovariance {
    dims: Vec<usize>,
    sigma: Matrix,
}

impl BlockCovariance {
    pub fn new(dims: Vec<usize>, sigma: Matrix) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if sigma.nrows() != total || sigma.ncols() != total {
            return Err(Error::ShapeError(format!(
                "block dims sum to {total} but covariance is {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        ensure_psd(&sigma, "block covariance")?;
        Ok(Self { dims, sigma })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Scalar coordinates covered by the given blocks, in block order.
    pub fn coords(&self, blocks: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &b in blocks {
            if b >= self.dims.len() {
                return Err(Error::InvalidPartition(format!(
                    "block {b} out of range ({} blocks)",
                    self.dims.len()
                )));
            }
            let start: usize = self.dims[..b].iter().sum();
            out.extend(start..start + self.dims[b]);
        }
        Ok(out)
    }

    /// Covariance of the selected blocks.
    pub fn marginal(&self, blocks: &[usize]) -> Result<Matrix> {
        let idx = self.coords(blocks)?;
        Ok(self.sigma.select_rows(&idx).select_columns(&idx))
    }

    /// Covariance of blocks `a` given blocks `cond`.
    pub fn conditional(&self, a: &[usize], cond: &[usize]) -> Result<Matrix> {
        let ia = self.coords(a)?;
        let ic = self.coords(cond)?;
        Ok(schur(&self.sigma, &ia, &ic))
    }
}

/// `Sigma_aa - Sigma_ac Sigma_cc^+ Sigma_ca`.
pub(crate) fn schur(sigma: &Matrix, a: &[usize], c: &[usize]) -> Matrix {
    let s_aa = sigma.select_rows(a).select_columns(a);
    if c.is_empty() {
        return s_aa;
    }
    let s_ac = sigma.select_rows(a).select_columns(c);
    let s_cc = sigma.select_rows(c).select_columns(c);
    let scale = sigma.diagonal().iter().fold(0.0_f64, |a, v| a.max(*v));
    symmetrize(&(s_aa - &s_ac * pinv_psd_scaled(&s_cc, scale) * s_ac.transpose()))
}

fn log_det_pd(m: &Matrix) -> Option<f64> {
    if m.nrows() == 0 {
        return Some(0.0);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut acc = 0.0;
    for &v in eig.eigenvalues.iter() {
        if v <= 0.0 {
            return None;
        }
        acc += v.ln();
    }
    Some(acc)
}

/// Conditional mutual information `I(A; B | C)` in nats for jointly Gaussian
/// blocks; `group_*` are block indices.
///
/// Evaluated as `1/2 [log det Q_{A|C} - log det Q_{A|B,C}]` on the non-null
/// eigenspace of `Q_{A|C}`: directions of `A` that are deterministic given
/// `C` carry no information. If `B` pins down a direction that `C` leaves
/// random, the result is `+inf`.
pub fn gaussian_mi(
    block: &BlockCovariance,
    group_a: &[usize],
    group_b: &[usize],
    group_cond: &[usize],
) -> Result<f64> {
    let mut seen = std::collections::BTreeSet::new();
    for &g in group_a.iter().chain(group_b).chain(group_cond) {
        if !seen.insert(g) {
            return Err(Error::InvalidPartition(format!(
                "block {g} appears in more than one group"
            )));
        }
    }
    let ia = block.coords(group_a)?;
    let ib = block.coords(group_b)?;
    let ic = block.coords(group_cond)?;
    if ia.is_empty() || ib.is_empty() {
        return Ok(0.0);
    }
    let q_a_c = schur(&block.sigma, &ia, &ic);
    let mut ibc = ib.clone();
    ibc.extend(&ic);
    let q_a_bc = schur(&block.sigma, &ia, &ibc);

    let eig = SymmetricEigen::new(q_a_c.clone());
    let scale = block.sigma.diagonal().iter().fold(0.0_f64, |a, v| a.max(*v));
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
    if top <= PINV_RTOL * scale {
        return Ok(0.0);
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > PINV_RTOL * top.max(scale))
        .collect();
    let basis = eig.eigenvectors.select_columns(&keep);
    let restricted_prior: f64 = keep.iter().map(|&k| eig.eigenvalues[k].ln()).sum();
    let restricted_post = basis.transpose() * &q_a_bc * &basis;
    // Posterior variance below the cutoff relative to the prior means B
    // determines that direction exactly.
    let post_eig = SymmetricEigen::new(symmetrize(&restricted_post));
    let post_min = post_eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if post_min <= PINV_RTOL * top {
        return Ok(f64::INFINITY);
    }
    let post = log_det_pd(&restricted_post).unwrap_or(f64::NEG_INFINITY);
    Ok((0.5 * (restricted_prior - post)).max(0.0))
}

/// `I(X; Y)` of a source, in nats.
pub fn source_mi(spec: &GaussianSourceSpec) -> Result<f64> {
    let block = BlockCovariance::new(vec![spec.n_x(), spec.n_y()], spec.joint_covariance())?;
    gaussian_mi(&block, &[0], &[1], &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn scalar() -> GaussianSourceSpec {
        GaussianSourceSpec::observation(dmatrix![1.0], dmatrix![1.0], dmatrix![1.0]).unwrap()
    }

    #[test]
    fn scalar_conditional_stats() {
        let st = conditional_stats(&scalar()).unwrap();
        assert!((st.gain[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((st.q_cond[(0, 0)] - 0.5).abs() < 1e-15);
        // independent 2x2 Schur complement of [[1,1],[1,2]]
        let (a, b, d) = (1.0, 1.0, 2.0);
        assert!((st.q_cond[(0, 0)] - (a - b * b / d)).abs() < 1e-15);
    }

    #[test]
    fn uninformative_side_information() {
        let spec = GaussianSourceSpec::observation(
            dmatrix![2.0, 0.0; 0.0, 1.0],
            dmatrix![0.0, 0.0],
            dmatrix![1.0],
        )
        .unwrap();
        let st = conditional_stats(&spec).unwrap();
        assert_eq!(st.gain, Matrix::zeros(2, 1));
        assert_eq!(st.q_cond, *spec.q_x());
    }

    #[test]
    fn diagonal_joint_form() {
        let spec = GaussianSourceSpec::joint(
            dmatrix![2.0, 0.0; 0.0, 1.0],
            Matrix::identity(2, 2),
            Matrix::zeros(2, 2),
        )
        .unwrap();
        let st = conditional_stats(&spec).unwrap();
        assert_eq!(st.eigvals, vec![2.0, 1.0]);
        assert!((st.eigvecs.clone() - Matrix::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let err = GaussianSourceSpec::observation(dmatrix![-1.0], dmatrix![1.0], dmatrix![1.0]);
        assert!(matches!(err, Err(Error::InvalidCovariance(_))));
        let err = GaussianSourceSpec::observation(dmatrix![1.0], dmatrix![1.0, 2.0], dmatrix![1.0]);
        assert!(matches!(err, Err(Error::ShapeError(_))));
        let err = GaussianSourceSpec::observation(dmatrix![1.0], dmatrix![1.0], dmatrix![0.0]);
        assert!(matches!(err, Err(Error::InvalidCovariance(_))));
        // |corr| > 1
        let err = GaussianSourceSpec::joint(dmatrix![1.0], dmatrix![1.0], dmatrix![2.0]);
        assert!(matches!(err, Err(Error::InvalidCovariance(_))));
    }

    #[test]
    fn spectral_contract() {
        let s = spectral(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(s.eigvals, vec![1.0; 3]);
        assert!((s.eigvecs.clone() - Matrix::identity(3, 3)).abs().max() < 1e-15);

        let s = spectral(&dmatrix![1.0, 0.0; 0.0, 2.0]).unwrap();
        assert_eq!(s.eigvals, vec![2.0, 1.0]);
        assert!((s.eigvecs.clone() - dmatrix![0.0, 1.0; 1.0, 0.0]).abs().max() < 1e-15);

        // x^2 - 4x + 3 = (x - 3)(x - 1)
        let m = dmatrix![2.0, 1.0; 1.0, 2.0];
        let s = spectral(&m).unwrap();
        assert!((s.eigvals[0] - 3.0).abs() < 1e-12 && (s.eigvals[1] - 1.0).abs() < 1e-12);
        assert!((s.reconstruct() - &m).abs().max() < 1e-12);
        assert!(s.eigvecs[(0, 0)] > 0.0 && s.eigvecs[(0, 1)] > 0.0);

        let err = spectral(&dmatrix![1.0, 2.0; 0.0, 1.0]);
        assert!(matches!(err, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn scalar_mutual_information() {
        let mi = source_mi(&scalar()).unwrap();
        assert!((mi - 0.5 * 2f64.ln()).abs() < 1e-14);
        assert!((mi - 0.346_573_590_279_972_6).abs() < 1e-12);
    }

    #[test]
    fn independence_gives_zero_mi() {
        let sigma = dmatrix![2.0, 0.0; 0.0, 3.0];
        let block = BlockCovariance::new(vec![1, 1], sigma).unwrap();
        assert_eq!(gaussian_mi(&block, &[0], &[1], &[]).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let block = BlockCovariance::new(vec![1, 1], Matrix::identity(2, 2)).unwrap();
        assert!(matches!(
            gaussian_mi(&block, &[0], &[0], &[]),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            gaussian_mi(&block, &[0], &[1], &[1]),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn deterministic_direction_is_ignored() {
        // A = (X, 0): the zero coordinate carries no information.
        let sigma = dmatrix![
            1.0, 0.0, 1.0;
            0.0, 0.0, 0.0;
            1.0, 0.0, 2.0
        ];
        let block = BlockCovariance::new(vec![2, 1], sigma).unwrap();
        let mi = gaussian_mi(&block, &[0], &[1], &[]).unwrap();
        assert!((mi - 0.5 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn exact_copy_is_infinite() {
        let block = BlockCovariance::new(vec![1, 1], Matrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(gaussian_mi(&block, &[0], &[1], &[]).unwrap(), f64::INFINITY);
    }
}
