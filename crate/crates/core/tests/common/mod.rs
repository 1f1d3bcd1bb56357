#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rdkit_core::gaussian::{GaussianSourceSpec, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Observation-form source with well-conditioned `Q_X` and `D`.
pub fn random_spec(rng: &mut ChaCha8Rng, n_x: usize, n_y: usize) -> GaussianSourceSpec {
    let a = gaussian_matrix(rng, n_x, n_x);
    let q_x = &a * a.transpose() / n_x as f64 + Matrix::identity(n_x, n_x) * 0.2;
    let c = gaussian_matrix(rng, n_y, n_x) * 0.8;
    let d = Matrix::identity(n_y, n_y) * rng.random_range(0.5..1.5)
        + gaussian_matrix(rng, n_y, n_y) * 0.2;
    GaussianSourceSpec::observation(q_x, c, d).expect("random spec is valid")
}

/// Joint-form source from a random PSD joint covariance.
pub fn random_joint_spec(rng: &mut ChaCha8Rng, n_x: usize, n_y: usize) -> GaussianSourceSpec {
    let n = n_x + n_y;
    let a = gaussian_matrix(rng, n, n);
    let sigma = &a * a.transpose() / n as f64 + Matrix::identity(n, n) * 0.1;
    GaussianSourceSpec::joint(
        sigma.view((0, 0), (n_x, n_x)).into_owned(),
        sigma.view((n_x, n_x), (n_y, n_y)).into_owned(),
        sigma.view((0, n_x), (n_x, n_y)).into_owned(),
    )
    .expect("random joint spec is valid")
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: usize) -> (usize, usize) {
    (rng.random_range(1..=max), rng.random_range(1..=max))
}

fn rate_of(lambdas: &[f64], deltas: &[f64]) -> f64 {
    0.5 * lambdas
        .iter()
        .zip(deltas)
        .map(|(l, d)| (l / d.min(*l)).ln())
        .sum::<f64>()
}

/// Brute-force reverse water-filling: minimise `1/2 sum ln(lambda_i / min(delta_i, lambda_i))`
/// over `delta_i > 0`, `sum delta_i = budget`, by exhaustive grid search
/// with successive zooming around the incumbent. Independent of any
/// water-level logic. Returns `(rate, evaluations)`.
pub fn grid_oracle(lambdas: &[f64], budget: f64) -> (f64, usize) {
    match lambdas.len() {
        1 => (rate_of(lambdas, &[budget]), 1),
        2 => {
            let mut evals = 0;
            let (mut lo, mut hi) = (0.0, budget);
            let mut best = (f64::INFINITY, budget / 2.0);
            for &m in &[10_000usize, 1_000, 1_000, 1_000] {
                let h = (hi - lo) / m as f64;
                for k in 0..=m {
                    let d1 = lo + h * k as f64;
                    let d2 = budget - d1;
                    if d1 <= 0.0 || d2 <= 0.0 {
                        continue;
                    }
                    evals += 1;
                    let r = rate_of(lambdas, &[d1, d2]);
                    if r < best.0 {
                        best = (r, d1);
                    }
                }
                lo = (best.1 - 4.0 * h).max(0.0);
                hi = (best.1 + 4.0 * h).min(budget);
            }
            (best.0, evals)
        }
        3 => {
            let mut evals = 0;
            let mut window = ((0.0, budget), (0.0, budget));
            let mut best = (f64::INFINITY, budget / 3.0, budget / 3.0);
            for &m in &[300usize, 100, 100, 100, 100, 100] {
                let ((a0, a1), (b0, b1)) = window;
                let (ha, hb) = ((a1 - a0) / m as f64, (b1 - b0) / m as f64);
                for i in 0..=m {
                    let d1 = a0 + ha * i as f64;
                    if d1 <= 0.0 {
                        continue;
                    }
                    for j in 0..=m {
                        let d2 = b0 + hb * j as f64;
                        let d3 = budget - d1 - d2;
                        if d2 <= 0.0 || d3 <= 0.0 {
                            continue;
                        }
                        evals += 1;
                        let r = rate_of(lambdas, &[d1, d2, d3]);
                        if r < best.0 {
                            best = (r, d1, d2);
                        }
                    }
                }
                window = (
                    ((best.1 - 4.0 * ha).max(0.0), (best.1 + 4.0 * ha).min(budget)),
                    ((best.2 - 4.0 * hb).max(0.0), (best.2 + 4.0 * hb).min(budget)),
                );
            }
            (best.0, evals)
        }
        n => panic!("grid oracle supports n <= 3, got {n}"),
    }
}
