use cls_core::dataset::make_folds;
use cls_core::models::{cv_error, fit, Algorithm, ModelSpec};
use cls_core::synth::{bayes_predict, sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::{cls, rng, Dataset, LossKind, TaskKind};

fn draw(kind: SettingKind, c: f64, n: usize, seed: u64) -> (Setting, Dataset) {
    let setting = Setting::draw(kind, c, 10, &mut rng::seeded(seed)).unwrap();
    let data = sample_dataset(&GeneratorSpec::new(setting.clone(), Role::Target, seed), n, seed).unwrap();
    (setting, data)
}

fn disagreement(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
}

#[test]
fn lda_recovers_class_means() {
    let (_, data) = draw(SettingKind::Lda, 1.0, 2000, 3);
    let m = fit(&ModelSpec::new(Algorithm::Lda), &data).unwrap();
    let means = m.class_means().unwrap();
    assert_eq!(m.classes(), &[0, 1]);
    for v in &means[1] {
        assert!((v - 0.3).abs() < 0.1, "class-1 mean coordinate {v}");
    }
    for v in &means[0] {
        assert!((v + 0.3).abs() < 0.1, "class-0 mean coordinate {v}");
    }
}

#[test]
fn boosting_fits_xor() {
    let mut r = rng::seeded(11);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..200 {
        let (a, b) = (2.0 * rng::uniform(&mut r) - 1.0, 2.0 * rng::uniform(&mut r) - 1.0);
        rows.push(vec![a, b]);
        y.push(if (a > 0.0) != (b > 0.0) { 1.0 } else { 0.0 });
    }
    let data = Dataset::from_rows(&rows, y, TaskKind::Binary).unwrap();
    let m = fit(&ModelSpec::new(Algorithm::Gbt), &data).unwrap();
    let err = disagreement(&m.predict(&data).unwrap(), data.labels());
    assert!(err < 0.1, "training error {err}");
}

#[test]
fn discriminants_approach_the_bayes_rule() {
    let (setting, train) = draw(SettingKind::Lda, 1.0, 5000, 21);
    let spec = GeneratorSpec::new(setting, Role::Target, 22);
    let test = sample_dataset(&spec, 5000, 22).unwrap();
    let bayes = bayes_predict(&spec.oracle().unwrap(), &test).unwrap();
    for alg in [Algorithm::Lda, Algorithm::Qda] {
        let pred = fit(&ModelSpec::new(alg), &train).unwrap().predict(&test).unwrap();
        let d = disagreement(&pred, &bayes);
        assert!(d <= 0.05, "{alg}: disagreement {d}");
    }
}

#[test]
fn rbf_svm_predicts_four_classes() {
    let (_, data) = draw(SettingKind::FourClass, 0.5, 200, 5);
    let m = fit(&ModelSpec::new(Algorithm::SvmRbf), &data).unwrap();
    let pred = m.predict(&data).unwrap();
    assert!(pred.iter().all(|v| [0.0, 1.0, 2.0, 3.0].contains(v)));
    assert!(disagreement(&pred, data.labels()) < 0.5);
}

#[test]
fn one_vs_rest_with_two_classes_is_the_binary_model() {
    let (_, binary) = draw(SettingKind::Probit, 1.0, 120, 8);
    let spread: Vec<f64> = binary.labels().iter().map(|y| 2.0 * y).collect();
    let three = Dataset::new(binary.raw().to_vec(), binary.p(), spread, TaskKind::MultiClass(3)).unwrap();
    for alg in [Algorithm::SvmLinear, Algorithm::SvmRbf, Algorithm::Gbt, Algorithm::Lda] {
        let a = fit(&ModelSpec::new(alg), &binary).unwrap().predict(&binary).unwrap();
        let b = fit(&ModelSpec::new(alg), &three).unwrap().predict(&three).unwrap();
        let mapped: Vec<f64> = a.iter().map(|y| 2.0 * y).collect();
        assert_eq!(mapped, b, "{alg}");
    }
}

#[test]
fn iterative_objectives_do_not_increase() {
    let (_, data) = draw(SettingKind::Probit, 1.0, 200, 13);
    let (_, four) = draw(SettingKind::FourClass, 1.0, 200, 13);
    let cases = [
        (Algorithm::LogReg, &data),
        (Algorithm::Probit, &data),
        (Algorithm::Gbt, &data),
        (Algorithm::MultinomLogReg, &four),
        (Algorithm::Gbt, &four),
    ];
    for (alg, d) in cases {
        let m = fit(&ModelSpec::new(alg), d).unwrap();
        let obj = &m.summary.objective;
        assert!(obj.len() >= 2, "{alg} recorded {} objective values", obj.len());
        for w in obj.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{alg}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn logreg_cv_error_is_near_bayes_error() {
    let (setting, data) = draw(SettingKind::Probit, 1.0, 200, 2);
    let folds = make_folds(&data, 5, 2).unwrap();
    let cv = cv_error(&ModelSpec::new(Algorithm::LogReg), &data, &folds, LossKind::ZeroOne).unwrap();
    let oracle = setting.oracle(Role::Target).unwrap();
    let bayes = cls::oracle_monte_carlo(&oracle, &oracle, cls::DEFAULT_MC_SAMPLES, 9).unwrap().score;
    assert!((cv.mean - bayes).abs() <= 3.0 * cv.se, "cv {} ± {} vs Bayes {bayes}", cv.mean, cv.se);
}

#[test]
fn cv_is_deterministic() {
    let (_, data) = draw(SettingKind::Logistic, 1.0, 200, 4);
    let folds = make_folds(&data, 5, 4).unwrap();
    for spec in ModelSpec::default_set(TaskKind::Binary) {
        let a = cv_error(&spec, &data, &folds, LossKind::ZeroOne).unwrap();
        let b = cv_error(&spec, &data, &folds, LossKind::ZeroOne).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn regression_models_fit_a_linear_signal() {
    let (_, data) = draw(SettingKind::LinearRegression, 1.0, 200, 6);
    let var = {
        let y = data.labels();
        let m = y.iter().sum::<f64>() / y.len() as f64;
        y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / y.len() as f64
    };
    for spec in ModelSpec::default_set(TaskKind::Regression) {
        let m = fit(&spec, &data).unwrap();
        let mse = cls_core::dataset::mean_loss(&m.predict(&data).unwrap(), data.labels(), LossKind::SquaredError).unwrap();
        assert!(mse < var, "{}: training mse {mse} vs label variance {var}", spec.algorithm);
    }
}
