use cls_core::dataset::make_folds;
use cls_core::enchead::{cls_enc_head, head_spec, train_joint_encoder, EncoderConfig};
use cls_core::models::{cv_error, Algorithm, ModelSpec};
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::transfer::{naive_pool_transfer, tradaboost, tradaboost_fit};
use cls_core::zone::{baseline_error, classify, thresholds, BaselineScheme, Zone};
use cls_core::{rng, Dataset, LossKind};
use proptest::prelude::*;

fn sample(setting: &Setting, role: Role, n: usize, seed: u64) -> Dataset {
    sample_dataset(&GeneratorSpec::new(setting.clone(), role, seed), n, seed).unwrap()
}

fn flip(d: &Dataset) -> Dataset {
    d.with_labels(d.labels().iter().map(|y| 1.0 - y).collect()).unwrap()
}

/// 30 rows per class from a 200-row target draw, a 5000-row target test set
/// and a 200-row source draw.
fn transfer_split(c: f64, seed: u64) -> (Dataset, Dataset, Dataset) {
    let setting = Setting::draw(SettingKind::Probit, c, 10, &mut rng::seeded(seed)).unwrap();
    let pool = sample(&setting, Role::Target, 200, 3 * seed + 1);
    let ids = pool.class_ids();
    let mut rows = Vec::new();
    for class in 0..2 {
        rows.extend((0..pool.n()).filter(|i| ids[*i] == class).take(30));
    }
    let train = pool.subset(&rows).unwrap();
    (train, sample(&setting, Role::Target, 5000, 3 * seed + 2), sample(&setting, Role::Source, 200, 3 * seed + 3))
}

#[test]
fn lda_ensemble_baseline_is_near_the_bayes_error() {
    let setting = Setting::draw(SettingKind::Lda, 1.0, 10, &mut rng::seeded(0)).unwrap();
    let target = sample(&setting, Role::Target, 200, 17);
    let scheme = BaselineScheme::Ensemble { models: ModelSpec::default_set(target.task()), lambda: 500.0 };
    let b = baseline_error(&scheme, &target, 5, 17).unwrap();
    assert!((b.e0 - 0.1714).abs() <= 3.0 * b.se, "{} ± {}", b.e0, b.se);
    assert_eq!(b, baseline_error(&scheme, &target, 5, 17).unwrap());
}

#[test]
fn naive_pooling_helps_with_a_matching_source_and_hurts_with_a_flipped_one() {
    let base = ModelSpec::new(Algorithm::LogReg);
    let (mut helped, mut hurt) = (0, 0);
    for seed in 0..20 {
        let (train, test, source) = transfer_split(1.0, seed);
        helped += usize::from(naive_pool_transfer(&base, &train, Some(&source), &test, LossKind::ZeroOne).unwrap().beat_baseline);
        hurt += usize::from(!naive_pool_transfer(&base, &train, Some(&flip(&source)), &test, LossKind::ZeroOne).unwrap().beat_baseline);
    }
    assert!(helped >= 16, "matching source beat the baseline {helped}/20 times");
    assert!(hurt >= 16, "flipped source failed to beat the baseline {hurt}/20 times");
}

#[test]
fn tradaboost_on_a_duplicated_target_tracks_naive_pooling() {
    let base = ModelSpec::new(Algorithm::LogReg);
    let (train, test, _) = transfer_split(1.0, 40);
    let naive = naive_pool_transfer(&base, &train, Some(&train), &test, LossKind::ZeroOne).unwrap();
    let boosted = tradaboost(&base, &train, Some(&train), &test, 20, 40).unwrap();
    assert!((boosted.test_error - naive.test_error).abs() <= 0.05, "{} vs {}", boosted.test_error, naive.test_error);
}

#[test]
fn flipped_source_loses_mass_and_empty_source_is_the_baseline() {
    let base = ModelSpec::new(Algorithm::LogReg);
    let (train, test, source) = transfer_split(1.0, 41);
    let m = tradaboost_fit(&base, &train, &flip(&source), 10, 41).unwrap();
    assert!(m.source_mass.last().unwrap() < &m.source_mass[0]);
    let none = tradaboost(&base, &train, None, &test, 10, 41).unwrap();
    assert_eq!(none.test_error, none.baseline_error);
    assert!(!none.beat_baseline);
    let naive = naive_pool_transfer(&base, &train, None, &test, LossKind::ZeroOne).unwrap();
    assert_eq!(naive.test_error, none.baseline_error);
}

#[test]
fn learned_embedding_keeps_the_head_competitive() {
    let setting = Setting::draw(SettingKind::Lda, 1.0, 10, &mut rng::seeded(0)).unwrap();
    let target = sample(&setting, Role::Target, 200, 51);
    let source = sample(&setting, Role::Source, 200, 52);
    let config = EncoderConfig { seed: 5, ..EncoderConfig::default() };
    let encoder = train_joint_encoder(&config, &target, &source).unwrap();
    let embedded = encoder.embed(&target).unwrap();
    let folds = make_folds(&target, 5, 5).unwrap();
    let head = cv_error(&head_spec(), &embedded, &folds, LossKind::ZeroOne).unwrap().mean;
    let raw = cv_error(&ModelSpec::new(Algorithm::LogReg), &target, &folds, LossKind::ZeroOne).unwrap().mean;
    assert!(head <= raw + 0.05, "head {head} vs raw {raw}");
}

#[test]
fn encoder_head_score_is_the_mean_of_its_directions() {
    let setting = Setting::draw(SettingKind::Lda, 1.0, 10, &mut rng::seeded(0)).unwrap();
    let (tt, te) = (sample(&setting, Role::Target, 200, 61), sample(&setting, Role::Target, 200, 62));
    let (st, se) = (sample(&setting, Role::Source, 200, 63), sample(&setting, Role::Source, 200, 64));
    let r = cls_enc_head(&EncoderConfig { seed: 6, ..EncoderConfig::default() }, &tt, &te, &st, &se).unwrap();
    assert!((r.cls_enc_head - 0.5 * (r.e_t + r.e_s)).abs() <= 1e-12);
    let flipped = cls_enc_head(&EncoderConfig { seed: 6, ..EncoderConfig::default() }, &tt, &te, &flip(&st), &flip(&se)).unwrap();
    assert_eq!(flipped.zone, Zone::NegativeTransfer);
}

proptest! {
    #[test]
    fn verdicts_never_improve_as_the_score_grows(e0 in 0.0f64..1.0, se in 0.0f64..0.1, a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let t = thresholds(e0, se, 1.0, 5.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(classify(lo, &t).rank() <= classify(hi, &t).rank());
    }

    #[test]
    fn scores_just_outside_the_thresholds_are_decided(e0 in 0.0f64..1.0, se in 1e-4f64..0.1, eps in 1e-9f64..1.0) {
        let t = thresholds(e0, se, 1.0, 5.0).unwrap();
        prop_assert_eq!(classify(t.tau1 - eps, &t), Zone::PositiveTransfer);
        prop_assert_eq!(classify(t.tau2 + eps, &t), Zone::NegativeTransfer);
        prop_assert_eq!(classify(t.tau1, &t), Zone::Ambiguous);
        prop_assert_eq!(classify(t.tau2, &t), Zone::Ambiguous);
    }
}
