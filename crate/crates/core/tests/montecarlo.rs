mod common;

use rdkit_core::audit::tian_chen_channel;
use rdkit_core::channel::synthesize_encoder_decoder_si;
use rdkit_core::gaussian::{GaussianSourceSpec, Matrix};
use rdkit_core::verify::{check_conditional_mean, sample_covariance_xy, sample_joint, McConfig};

use common::{random_joint_spec, random_spec, rng};

fn scalar() -> GaussianSourceSpec {
    GaussianSourceSpec::observation(
        Matrix::from_element(1, 1, 1.0),
        Matrix::from_element(1, 1, 1.0),
        Matrix::from_element(1, 1, 1.0),
    )
    .unwrap()
}

fn assert_covariance_matches(spec: &GaussianSourceSpec, seed: u64) {
    let real = synthesize_encoder_decoder_si(spec, 0.1).unwrap();
    let cfg = McConfig {
        seed,
        ..McConfig::default()
    };
    let s = sample_joint(spec, &real.auxiliary(), &cfg).unwrap();
    let emp = sample_covariance_xy(&s);
    let pop = spec.joint_covariance();
    let n = cfg.n_samples as f64;
    for i in 0..pop.nrows() {
        for j in 0..pop.ncols() {
            let se = ((pop[(i, i)] * pop[(j, j)] + pop[(i, j)].powi(2)) / n).sqrt();
            assert!(
                (emp[(i, j)] - pop[(i, j)]).abs() <= 3.0 * se,
                "entry ({i},{j}): {} vs {} (se {se})",
                emp[(i, j)],
                pop[(i, j)]
            );
        }
    }
}

#[test]
fn sample_covariance_matches_model() {
    assert_covariance_matches(&scalar(), 11);
    let mut r = rng(5);
    assert_covariance_matches(&random_spec(&mut r, 2, 1), 12);
    assert_covariance_matches(&random_joint_spec(&mut r, 1, 2), 13);
}

#[test]
fn scalar_optimal_channel_passes() {
    let real = synthesize_encoder_decoder_si(&scalar(), 0.25).unwrap();
    let cfg = McConfig {
        seed: 2024,
        ..McConfig::default()
    };
    let s = sample_joint(&scalar(), &real.auxiliary(), &cfg).unwrap();
    let rep = check_conditional_mean(&s, 0.25, cfg.confidence_sigmas).unwrap();
    assert!(rep.pass.all(), "{rep:?}");
    assert!((rep.empirical_distortion - 0.25).abs() <= 3.0 * rep.distortion_se);
    assert!((rep.regression_on_xhat[0][0] - 1.0).abs() < 0.02);
    assert!(rep.regression_on_y[0][0].abs() < 0.02);
}

#[test]
fn tian_chen_fails_the_regression_check() {
    // X^ = Z = X + N3 with var N3 = 1: population regression of X on (Z, Y)
    // is (1/3, 1/3).
    let ch = tian_chen_channel(&scalar(), 0.25).unwrap();
    let cfg = McConfig {
        seed: 99,
        ..McConfig::default()
    };
    let s = sample_joint(&scalar(), &ch, &cfg).unwrap();
    let rep = check_conditional_mean(&s, 0.25, cfg.confidence_sigmas).unwrap();
    assert!(!rep.pass.y_zero);
    assert!(!rep.pass.xhat_identity);
    assert!((rep.regression_on_y[0][0] - 1.0 / 3.0).abs() < 0.01);
    assert!((rep.regression_on_xhat[0][0] - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn standard_errors_shrink_with_sample_size() {
    let real = synthesize_encoder_decoder_si(&scalar(), 0.25).unwrap();
    let small = McConfig {
        n_samples: 50_000,
        seed: 3,
        ..McConfig::default()
    };
    let large = McConfig {
        n_samples: 100_000,
        ..small
    };
    let a = check_conditional_mean(&sample_joint(&scalar(), &real.auxiliary(), &small).unwrap(), 0.25, 3.0).unwrap();
    let b = check_conditional_mean(&sample_joint(&scalar(), &real.auxiliary(), &large).unwrap(), 0.25, 3.0).unwrap();
    let ratio = a.se_xhat[0][0] / b.se_xhat[0][0];
    assert!((ratio - 2f64.sqrt()).abs() < 0.05, "ratio {ratio}");
    let ratio = a.distortion_se / b.distortion_se;
    assert!((ratio - 2f64.sqrt()).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn rank_deficient_regressors_are_flagged() {
    // zero-rate endpoint: X^ = K Y is collinear with Y
    let real = synthesize_encoder_decoder_si(&scalar(), 0.5).unwrap();
    let cfg = McConfig {
        n_samples: 5000,
        seed: 1,
        ..McConfig::default()
    };
    let s = sample_joint(&scalar(), &real.auxiliary(), &cfg).unwrap();
    let rep = check_conditional_mean(&s, 0.5, 3.0).unwrap();
    assert!(rep.rank_deficient);
}
