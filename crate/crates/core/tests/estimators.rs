use std::f64::consts::PI;

use cls_core::cls::{
    cls_ensemble, cls_single, cls_weighted_avg, oracle_lda, oracle_monte_carlo, oracle_probit, oracle_probit_smallnoise, EnsembleWeights,
    LdaOracleParams, ProbitOracleParams,
};
use cls_core::models::{Algorithm, ModelSpec};
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::{rng, Dataset, LossKind};
use proptest::prelude::*;

fn pair(kind: SettingKind, c: f64, n: usize, seed: u64) -> (Setting, Dataset, Dataset) {
    let setting = Setting::draw(kind, c, 10, &mut rng::seeded(seed)).unwrap();
    let t = sample_dataset(&GeneratorSpec::new(setting.clone(), Role::Target, seed), n, seed).unwrap();
    let s = sample_dataset(&GeneratorSpec::new(setting.clone(), Role::Source, seed + 1), n, seed + 1).unwrap();
    (setting, t, s)
}

fn probit_params(setting: &Setting) -> ProbitOracleParams {
    match setting {
        Setting::Probit { .. } => match (setting.oracle(Role::Target).unwrap(), setting.oracle(Role::Source).unwrap()) {
            (cls_core::synth::OracleModel::Probit { beta: bt, noise_var }, cls_core::synth::OracleModel::Probit { beta: bs, .. }) => {
                ProbitOracleParams { beta_target: bt, beta_source: bs, noise_var }
            }
            _ => unreachable!(),
        },
        _ => panic!("not a probit setting"),
    }
}

#[test]
fn lda_closed_form_anchors() {
    let mu = vec![0.3; 10];
    let score = |src: Vec<f64>| oracle_lda(&LdaOracleParams { mu_target: mu.clone(), mu_source: src }).unwrap();
    let orthogonal: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 0.3 } else { -0.3 }).collect();
    assert!((score(mu.clone()) - 0.1714).abs() < 1e-4);
    assert!((score(vec![-0.3; 10]) - 0.8286).abs() < 1e-4);
    assert_eq!(score(orthogonal), 0.5);
}

#[test]
fn mc_oracle_matches_closed_forms() {
    for c in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let (setting, _, _) = pair(SettingKind::Probit, c, 2, 31);
        let exact = oracle_probit(&probit_params(&setting)).unwrap();
        let mc = oracle_monte_carlo(&setting.oracle(Role::Target).unwrap(), &setting.oracle(Role::Source).unwrap(), 200_000, 5).unwrap();
        let se = mc.mc_se.unwrap();
        assert!((mc.score - exact).abs() <= 3.0 * se, "probit c={c}: {} vs {exact} (se {se})", mc.score);
    }
    let setting = Setting::draw(SettingKind::Lda, 0.3, 10, &mut rng::seeded(1)).unwrap();
    let o = setting.oracle(Role::Target).unwrap();
    let mc = oracle_monte_carlo(&o, &o, 200_000, 6).unwrap();
    let bayes = 0.171_41;
    assert!((mc.score - bayes).abs() <= 3.0 * mc.mc_se.unwrap() + 1e-5);
}

#[test]
fn mc_standard_error_halves_when_samples_quadruple() {
    let setting = Setting::draw(SettingKind::Probit, 0.5, 10, &mut rng::seeded(2)).unwrap();
    let (t, s) = (setting.oracle(Role::Target).unwrap(), setting.oracle(Role::Source).unwrap());
    let small = oracle_monte_carlo(&t, &s, 10_000, 3).unwrap().mc_se.unwrap();
    let large = oracle_monte_carlo(&t, &s, 40_000, 3).unwrap().mc_se.unwrap();
    let ratio = small / large;
    assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "ratio {ratio}");
}

#[test]
fn nonlinear_regression_oracle_at_unit_similarity_is_noise_variance() {
    let setting = Setting::draw(SettingKind::NonlinearRegression, 1.0, 10, &mut rng::seeded(4)).unwrap();
    let mc = oracle_monte_carlo(&setting.oracle(Role::Target).unwrap(), &setting.oracle(Role::Source).unwrap(), 200_000, 4).unwrap();
    assert!((mc.score - 1.0).abs() <= 3.0 * mc.mc_se.unwrap(), "{} ± {}", mc.score, mc.mc_se.unwrap());
}

#[test]
fn closed_form_oracles_decrease_along_the_grid() {
    for kind in [SettingKind::Probit, SettingKind::Lda] {
        let base = Setting::draw(kind, -1.0, 10, &mut rng::seeded(7)).unwrap();
        let scores: Vec<f64> = kind
            .default_grid()
            .iter()
            .map(|c| {
                let s = base.with_similarity(*c);
                match kind {
                    SettingKind::Probit => oracle_probit(&probit_params(&s)).unwrap(),
                    _ => match (s.oracle(Role::Target).unwrap(), s.oracle(Role::Source).unwrap()) {
                        (cls_core::synth::OracleModel::Lda { mu: a }, cls_core::synth::OracleModel::Lda { mu: b }) => {
                            oracle_lda(&LdaOracleParams { mu_target: a, mu_source: b }).unwrap()
                        }
                        _ => unreachable!(),
                    },
                }
            })
            .collect();
        for w in scores.windows(2) {
            assert!(w[1] < w[0], "{kind}: {scores:?}");
        }
    }
}

#[test]
fn logreg_score_is_close_to_the_oracle_at_unit_similarity() {
    let (setting, t, s) = pair(SettingKind::Probit, 1.0, 200, 12);
    let est = cls_single(&ModelSpec::new(Algorithm::LogReg), &t, &s, LossKind::ZeroOne).unwrap();
    let exact = oracle_probit(&probit_params(&setting)).unwrap();
    assert!((est.score - exact).abs() < 0.05, "{} vs {exact}", est.score);
}

#[test]
fn averaged_schemes_with_one_model_equal_the_single_score() {
    let (_, t, s) = pair(SettingKind::Logistic, 0.5, 120, 14);
    let spec = ModelSpec::new(Algorithm::Lda);
    let single = cls_single(&spec, &t, &s, LossKind::ZeroOne).unwrap().score;
    let avg = cls_weighted_avg(std::slice::from_ref(&spec), &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap().score;
    let ens = cls_ensemble(std::slice::from_ref(&spec), &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap().score;
    let twice = cls_weighted_avg(&[spec.clone(), spec], &t, &s, 5, 500.0, LossKind::ZeroOne, 1).unwrap().score;
    assert_eq!(single, avg);
    assert_eq!(single, ens);
    assert!((single - twice).abs() < 1e-15);
}

#[test]
fn lambda_zero_average_is_the_plain_mean() {
    let (_, t, s) = pair(SettingKind::Probit, 0.0, 120, 15);
    let models = [ModelSpec::new(Algorithm::LogReg), ModelSpec::new(Algorithm::Lda), ModelSpec::new(Algorithm::Gbt)];
    let est = cls_weighted_avg(&models, &t, &s, 5, 0.0, LossKind::ZeroOne, 3).unwrap();
    let singles: Vec<f64> = models.iter().map(|m| cls_single(m, &t, &s, LossKind::ZeroOne).unwrap().score).collect();
    let mean = singles.iter().sum::<f64>() / 3.0;
    assert!((est.score - mean).abs() < 1e-12);
}

#[test]
fn dominant_model_takes_nearly_all_weight() {
    let w = EnsembleWeights::new(&[0.1, 0.2], 500.0).unwrap().weights;
    let expected = 1.0 / (1.0 + (-50.0_f64).exp());
    assert!((w[0] - expected).abs() < 1e-15);
}

#[test]
fn symmetric_four_class_and_regression_scores() {
    let (_, t, s) = pair(SettingKind::FourClass, 0.5, 200, 16);
    let est = cls_ensemble(&ModelSpec::default_set(t.task()), &t, &s, 5, 500.0, LossKind::ZeroOne, 2).unwrap();
    assert!((0.0..=1.0).contains(&est.score));
    let (_, t, s) = pair(SettingKind::LinearRegression, 0.5, 200, 16);
    let est = cls_ensemble(&ModelSpec::default_set(t.task()), &t, &s, 5, 500.0, LossKind::SquaredError, 2).unwrap();
    assert!(est.score >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_score_is_symmetric_and_bounded(seed in 0u64..1_000, c in -1.0f64..=1.0, alg in prop::sample::select(vec![Algorithm::LogReg, Algorithm::Lda, Algorithm::SvmLinear])) {
        let (_, t, s) = pair(SettingKind::Probit, c, 60, seed);
        let spec = ModelSpec::new(alg);
        let ab = cls_single(&spec, &t, &s, LossKind::ZeroOne).unwrap();
        let ba = cls_single(&spec, &s, &t, LossKind::ZeroOne).unwrap();
        prop_assert_eq!(ab.score, ba.score);
        prop_assert_eq!(ab.e_t, ba.e_s);
        prop_assert_eq!(ab.e_s, ba.e_t);
        prop_assert!((0.0..=1.0).contains(&ab.score));
    }

    #[test]
    fn ensemble_weights_form_a_simplex(errs in prop::collection::vec(0.0f64..1.0, 1..8), lambda in 0.0f64..2000.0) {
        let w = EnsembleWeights::new(&errs, lambda).unwrap().weights;
        prop_assert!(w.iter().all(|v| *v >= 0.0 && *v <= 1.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let uniform = EnsembleWeights::new(&errs, 0.0).unwrap().weights;
        prop_assert!(uniform.iter().all(|v| *v == 1.0 / errs.len() as f64));
    }

    #[test]
    fn noiseless_probit_is_the_angle_over_pi(a in prop::collection::vec(-2.0f64..2.0, 5), b in prop::collection::vec(-2.0f64..2.0, 5)) {
        let na = a.iter().map(|v| v * v).sum::<f64>();
        let nb = b.iter().map(|v| v * v).sum::<f64>();
        prop_assume!(na > 1e-6 && nb > 1e-6);
        let params = ProbitOracleParams { beta_target: a, beta_source: b, noise_var: 0.0 };
        let theta = params.theta().unwrap();
        prop_assert!((oracle_probit(&params).unwrap() - oracle_probit_smallnoise(theta).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=PI).contains(&theta));
    }
}
