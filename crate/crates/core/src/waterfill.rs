//! Reverse water-filling over the eigenvalues of a conditional covariance.
//!
//! The distortion budget is spread as `delta_i = min(mu, lambda_i)` with the
//! water level `mu` chosen so that the allocations sum to the budget. The
//! level is solved exactly: with eigenvalues sorted descending, the active
//! set is always a prefix, and for each candidate prefix length the level is
//! an affine function of the budget.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{csi_rate, synthesize_decoder_only};
use crate::error::{Error, Result};
use crate::gaussian::{conditional_stats, null_count, spectral, ConditionalStats, GaussianSourceSpec, Matrix};

/// Result of a reverse water-filling solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfillAllocation {
    /// Descending, strictly positive.
    pub eigvals: Vec<f64>,
    pub deltas: Vec<f64>,
    pub water_level: f64,
    pub rate_nats: f64,
    pub total_distortion: f64,
}

impl WaterfillAllocation {
    /// Coordinates where `delta_i < lambda_i` (the water level is active).
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.eigvals
            .iter()
            .zip(&self.deltas)
            .enumerate()
            .filter(|(_, (l, d))| d < l)
            .map(|(i, _)| i)
    }
}

/// Solve the allocation for descending positive `eigvals` and a positive
/// distortion budget. Budgets at or above the trace are clamped: every
/// coordinate is saturated and the rate is zero.
pub fn solve_waterfill(eigvals: &[f64], distortion_budget: f64) -> Result<WaterfillAllocation> {
    if distortion_budget.is_nan() || distortion_budget <= 0.0 {
        return Err(Error::InfiniteRate(distortion_budget));
    }
    for (i, &l) in eigvals.iter().enumerate() {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalue {i} is {l}; expected a finite positive value"
            )));
        }
        if i > 0 && l > eigvals[i - 1] {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues must be sorted descending (index {i})"
            )));
        }
    }
    let n = eigvals.len();
    let trace: f64 = eigvals.iter().sum();

    if distortion_budget >= trace {
        return Ok(WaterfillAllocation {
            eigvals: eigvals.to_vec(),
            deltas: eigvals.to_vec(),
            water_level: eigvals.first().copied().unwrap_or(0.0),
            rate_nats: 0.0,
            total_distortion: trace,
        });
    }

    // Largest k such that the flat level over the first k coordinates,
    // after saturating the tail, does not exceed lambda_k.
    let mut tail = 0.0;
    let mut level = distortion_budget;
    for k in (1..=n).rev() {
        let mu = (distortion_budget - tail) / k as f64;
        if mu <= eigvals[k - 1] {
            level = mu;
            break;
        }
        tail += eigvals[k - 1];
    }

    let deltas: Vec<f64> = eigvals.iter().map(|&l| level.min(l)).collect();
    let rate_nats = 0.5
        * eigvals
            .iter()
            .zip(&deltas)
            .map(|(l, d)| (l / d).ln())
            .sum::<f64>();
    Ok(WaterfillAllocation {
        eigvals: eigvals.to_vec(),
        total_distortion: deltas.iter().sum(),
        deltas,
        water_level: level,
        rate_nats,
    })
}

/// Water-filling solution attached to the spectrum it was solved on.
///
/// Eigen-directions with (numerically) zero variance are excluded from the
/// allocation; they are the trailing `null_dims` columns of `eigvecs` and
/// carry zero distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct RdfSolution {
    pub allocation: WaterfillAllocation,
    pub eigvecs: Matrix,
    pub null_dims: usize,
    /// `U diag(delta) U^T`.
    pub sigma_delta: Matrix,
}

impl RdfSolution {
    fn from_spectrum(eigvals: &[f64], eigvecs: Matrix, distortion: f64) -> Result<Self> {
        let null_dims = null_count(eigvals);
        let positive = &eigvals[..eigvals.len() - null_dims];
        let allocation = solve_waterfill(positive, distortion)?;
        let mut full = allocation.deltas.clone();
        full.resize(eigvals.len(), 0.0);
        let sigma_delta =
            &eigvecs * Matrix::from_diagonal(&DVector::from_vec(full)) * eigvecs.transpose();
        Ok(Self {
            allocation,
            eigvecs,
            null_dims,
            sigma_delta,
        })
    }

    pub fn rate_nats(&self) -> f64 {
        self.allocation.rate_nats
    }

    /// Per-eigenvector distortions including the zero entries of null
    /// directions.
    pub fn full_deltas(&self) -> Vec<f64> {
        let mut out = self.allocation.deltas.clone();
        out.resize(out.len() + self.null_dims, 0.0);
        out
    }
}

/// Conditional RDF `R_{X|Y}(Delta)`, water-filled over the spectrum of
/// `Q_{X|Y}`. Also returns the conditional statistics it was built on.
pub fn rdf_conditional(
    spec: &GaussianSourceSpec,
    distortion: f64,
) -> Result<(RdfSolution, ConditionalStats)> {
    if distortion.is_nan() || distortion <= 0.0 {
        return Err(Error::InfiniteRate(distortion));
    }
    let stats = conditional_stats(spec)?;
    let sol = RdfSolution::from_spectrum(&stats.eigvals, stats.eigvecs.clone(), distortion)?;
    Ok((sol, stats))
}

/// Marginal RDF `R_X(Delta)` of the source alone.
pub fn rdf_marginal(q_x: &Matrix, distortion: f64) -> Result<RdfSolution> {
    if distortion.is_nan() || distortion <= 0.0 {
        return Err(Error::InfiniteRate(distortion));
    }
    let mut sp = spectral(q_x)?;
    for v in sp.eigvals.iter_mut() {
        *v = v.max(0.0);
    }
    RdfSolution::from_spectrum(&sp.eigvals, sp.eigvecs, distortion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Conditional,
    Marginal,
    DecoderOnly,
    Csi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdCurvePoint {
    pub distortion: f64,
    pub rate_nats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub mode: CurveMode,
    pub points: Vec<RdCurvePoint>,
    /// Set when a second difference falls below `-1e-9`.
    pub convexity_warning: bool,
}

/// Rate at a single distortion for the given mode.
pub fn rate_at(spec: &GaussianSourceSpec, distortion: f64, mode: CurveMode) -> Result<f64> {
    match mode {
        CurveMode::Conditional => Ok(rdf_conditional(spec, distortion)?.0.rate_nats()),
        CurveMode::Marginal => Ok(rdf_marginal(spec.q_x(), distortion)?.rate_nats()),
        CurveMode::DecoderOnly => Ok(synthesize_decoder_only(spec, distortion)?.1),
        CurveMode::Csi => csi_rate(spec, distortion),
    }
}

/// Sweep `n_points` evenly spaced distortions over `[d_min, d_max]`,
/// ascending. Points are evaluated in parallel; output order is fixed.
pub fn rd_curve(
    spec: &GaussianSourceSpec,
    d_min: f64,
    d_max: f64,
    n_points: usize,
    mode: CurveMode,
) -> Result<RdCurve> {
    if !(d_min > 0.0) || !(d_max >= d_min) || !d_max.is_finite() {
        return Err(Error::RangeError(format!(
            "need 0 < d_min <= d_max, got [{d_min}, {d_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::RangeError(format!("need at least 2 points, got {n_points}")));
    }
    let grid: Vec<f64> = if d_min == d_max {
        vec![d_min]
    } else {
        let step = (d_max - d_min) / (n_points - 1) as f64;
        (0..n_points)
            .map(|i| if i + 1 == n_points { d_max } else { d_min + step * i as f64 })
            .collect()
    };
    let points = grid
        .par_iter()
        .map(|&d| {
            rate_at(spec, d, mode).map(|rate_nats| RdCurvePoint {
                distortion: d,
                rate_nats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let convexity_warning = points.windows(3).any(|w| {
        let (h1, h2) = (w[1].distortion - w[0].distortion, w[2].distortion - w[1].distortion);
        let slope1 = (w[1].rate_nats - w[0].rate_nats) / h1;
        let slope2 = (w[2].rate_nats - w[1].rate_nats) / h2;
        slope2 - slope1 < -1e-9
    });
    Ok(RdCurve {
        mode,
        points,
        convexity_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn scalar() -> GaussianSourceSpec {
        GaussianSourceSpec::observation(dmatrix![1.0], dmatrix![1.0], dmatrix![1.0]).unwrap()
    }

    /// Brute force over the simplex sum(delta) = budget, delta_i in (0, lambda_i].
    fn grid_rate_2d(l: [f64; 2], budget: f64, steps: usize) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..=steps {
            let d1 = budget * k as f64 / steps as f64;
            let d2 = budget - d1;
            if d1 <= 0.0 || d2 <= 0.0 {
                continue;
            }
            let r = 0.5 * ((l[0] / d1.min(l[0])).ln() + (l[1] / d2.min(l[1])).ln());
            // allocations above lambda are wasted budget; still feasible
            best = best.min(r);
        }
        best
    }

    #[test]
    fn two_coordinate_examples() {
        let a = solve_waterfill(&[2.0, 1.0], 1.0).unwrap();
        assert!((a.water_level - 0.5).abs() < 1e-15);
        assert_eq!(a.deltas, vec![0.5, 0.5]);
        assert!((a.rate_nats - 1.5 * LN2).abs() < 1e-14);
        assert!((a.rate_nats - 1.039_720_770_839_918).abs() < 1e-12);
        assert!((a.rate_nats - grid_rate_2d([2.0, 1.0], 1.0, 10_000)).abs() < 1e-6);

        let a = solve_waterfill(&[2.0, 1.0], 2.5).unwrap();
        assert_eq!(a.deltas, vec![1.5, 1.0]);
        assert!((a.water_level - 1.5).abs() < 1e-15);
        assert!((a.rate_nats - 0.5 * (2.0f64 / 1.5).ln()).abs() < 1e-14);
        assert!((a.rate_nats - 0.143_841_036_225_890_2).abs() < 1e-12);
        assert!((a.rate_nats - grid_rate_2d([2.0, 1.0], 2.5, 10_000)).abs() < 1e-6);

        let a = solve_waterfill(&[2.0, 1.0], 3.0).unwrap();
        assert_eq!(a.deltas, vec![2.0, 1.0]);
        assert_eq!(a.rate_nats, 0.0);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(solve_waterfill(&[1.0], 0.0), Err(Error::InfiniteRate(_))));
        assert!(matches!(solve_waterfill(&[1.0], -1.0), Err(Error::InfiniteRate(_))));
        assert!(matches!(solve_waterfill(&[f64::NAN], 1.0), Err(Error::InvalidSpectrum(_))));
        assert!(matches!(solve_waterfill(&[-1.0], 1.0), Err(Error::InvalidSpectrum(_))));
        assert!(matches!(solve_waterfill(&[1.0, 2.0], 1.0), Err(Error::InvalidSpectrum(_))));
    }

    #[test]
    fn empty_spectrum_has_zero_rate() {
        let a = solve_waterfill(&[], 1.0).unwrap();
        assert_eq!(a.rate_nats, 0.0);
        assert!(a.deltas.is_empty());
    }

    #[test]
    fn scalar_conditional_rdf() {
        let (sol, _) = rdf_conditional(&scalar(), 0.25).unwrap();
        assert!((sol.rate_nats() - 0.5 * LN2).abs() < 1e-15);
        assert!((sol.sigma_delta[(0, 0)] - 0.25).abs() < 1e-15);
        for d in [0.5, 0.75, 10.0] {
            assert_eq!(rdf_conditional(&scalar(), d).unwrap().0.rate_nats(), 0.0);
        }
    }

    #[test]
    fn independent_side_information_matches_plain_waterfill() {
        let spec = GaussianSourceSpec::observation(
            dmatrix![2.0, 0.0; 0.0, 1.0],
            dmatrix![0.0, 0.0],
            dmatrix![1.0],
        )
        .unwrap();
        let (sol, _) = rdf_conditional(&spec, 1.0).unwrap();
        assert_eq!(sol.allocation, solve_waterfill(&[2.0, 1.0], 1.0).unwrap());
    }

    #[test]
    fn marginal_examples() {
        assert!((rdf_marginal(&dmatrix![1.0], 0.25).unwrap().rate_nats() - LN2).abs() < 1e-15);
        let q = dmatrix![2.0, 0.0; 0.0, 1.0];
        assert_eq!(rdf_marginal(&q, 3.0).unwrap().rate_nats(), 0.0);
        assert!((rdf_marginal(&q, 1.0).unwrap().rate_nats() - 1.5 * LN2).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_conditional_covariance() {
        // Y observes the second coordinate of X exactly (up to tiny noise free form).
        let spec = GaussianSourceSpec::joint(
            dmatrix![2.0, 0.0; 0.0, 1.0],
            dmatrix![1.0],
            dmatrix![0.0; 1.0],
        )
        .unwrap();
        let (sol, stats) = rdf_conditional(&spec, 0.5).unwrap();
        assert_eq!(stats.null_dims(), 1);
        assert_eq!(sol.null_dims, 1);
        assert_eq!(sol.full_deltas(), vec![0.5, 0.0]);
        assert!((sol.rate_nats() - 0.5 * 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn scalar_curve_endpoints() {
        let c = rd_curve(&scalar(), 0.1, 0.5, 5, CurveMode::Conditional).unwrap();
        assert_eq!(c.points.len(), 5);
        assert!((c.points[0].rate_nats - 0.5 * 5f64.ln()).abs() < 1e-14);
        assert_eq!(c.points[4].rate_nats, 0.0);
        assert_eq!(c.points[4].distortion, 0.5);
        assert!(!c.convexity_warning);

        let one = rd_curve(&scalar(), 0.3, 0.3, 4, CurveMode::Conditional).unwrap();
        assert_eq!(one.points.len(), 1);

        assert!(matches!(
            rd_curve(&scalar(), 0.5, 0.1, 3, CurveMode::Conditional),
            Err(Error::RangeError(_))
        ));
        assert!(matches!(
            rd_curve(&scalar(), 0.0, 0.1, 3, CurveMode::Conditional),
            Err(Error::RangeError(_))
        ));
        assert!(matches!(
            rd_curve(&scalar(), 0.1, 0.2, 1, CurveMode::Conditional),
            Err(Error::RangeError(_))
        ));
    }

    #[test]
    fn marginal_minus_conditional_is_source_mi() {
        let m = rate_at(&scalar(), 0.25, CurveMode::Marginal).unwrap();
        let c = rate_at(&scalar(), 0.25, CurveMode::Conditional).unwrap();
        assert!((m - c - 0.5 * LN2).abs() < 1e-14);
    }

    fn spectrum() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..10.0, 1..=6).prop_map(|mut v| {
            v.sort_by(|a, b| b.total_cmp(a));
            v
        })
    }

    proptest! {
        #[test]
        fn allocation_invariants(eig in spectrum(), frac in 0.001f64..1.5) {
            let trace: f64 = eig.iter().sum();
            let budget = frac * trace;
            let a = solve_waterfill(&eig, budget).unwrap();
            prop_assert!((a.total_distortion - budget.min(trace)).abs() <= 1e-10 * trace.max(1.0));
            prop_assert!(a.rate_nats >= 0.0);
            for (l, d) in eig.iter().zip(&a.deltas) {
                prop_assert!(*d > 0.0 && d <= l);
                // complementarity: active at the level, or saturated below it
                let active = (*d - a.water_level).abs() <= 1e-12 * trace;
                let saturated = d == l && a.water_level >= *l - 1e-12 * trace;
                prop_assert!(active || saturated);
            }
            let all_saturated = eig.iter().zip(&a.deltas).all(|(l, d)| l == d);
            prop_assert_eq!(a.rate_nats == 0.0, all_saturated);
            if a.active().count() == eig.len() {
                let det_q: f64 = eig.iter().product();
                let det_s: f64 = a.deltas.iter().product();
                prop_assert!((a.rate_nats - 0.5 * (det_q / det_s).ln()).abs() <= 1e-9 * a.rate_nats.max(1.0));
            }
        }

        #[test]
        fn strictly_decreasing_below_trace(eig in spectrum(), f1 in 0.01f64..0.98) {
            let trace: f64 = eig.iter().sum();
            let r1 = solve_waterfill(&eig, f1 * trace).unwrap().rate_nats;
            let r2 = solve_waterfill(&eig, (f1 + 0.01) * trace).unwrap().rate_nats;
            prop_assert!(r2 < r1);
        }
    }
}
