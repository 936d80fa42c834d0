use cls_core::metrics::{kl_between, kl_gaussian, otdd_gaussian, w2_gaussian, w2_squared_between, GaussianFit};
use cls_core::synth::{sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
use cls_core::{rng, Dataset, TaskKind};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn spd(entries: &[f64], p: usize) -> DMatrix<f64> {
    let m = DMatrix::from_row_slice(p, p, entries);
    &m * m.transpose() + DMatrix::identity(p, p) * 0.1
}

/// `tr A + tr B - 2 Σ sqrt(eig(L' B L))` with `A = L L'`; the spectrum of
/// `L' B L` is that of `A B`.
fn bures_by_cholesky(ma: &DVector<f64>, a: &DMatrix<f64>, mb: &DVector<f64>, b: &DMatrix<f64>) -> f64 {
    let l = a.clone().cholesky().unwrap().l();
    let inner = l.transpose() * b * &l;
    let roots: f64 = inner.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).sum();
    (ma - mb).norm_squared() + a.trace() + b.trace() - 2.0 * roots
}

fn kl_by_inverse(ma: &DVector<f64>, a: &DMatrix<f64>, mb: &DVector<f64>, b: &DMatrix<f64>) -> f64 {
    let inv_b = b.clone().try_inverse().unwrap();
    let d = mb - ma;
    0.5 * ((&inv_b * a).trace() + (d.transpose() * &inv_b * &d)[(0, 0)] - a.nrows() as f64 + (b.determinant() / a.determinant()).ln())
}

fn draw(kind: SettingKind, c: f64, n: usize, seed: u64, role: Role) -> Dataset {
    let setting = Setting::draw(kind, c, 10, &mut rng::seeded(1)).unwrap();
    sample_dataset(&GeneratorSpec::new(setting, role, seed), n, seed).unwrap()
}

#[test]
fn one_dimensional_kl_of_a_unit_shift() {
    let mut r = rng::seeded(3);
    let n = 100_000;
    let a: Vec<f64> = (0..n).map(|_| rng::normal(&mut r)).collect();
    let b: Vec<f64> = (0..n).map(|_| 1.0 + rng::normal(&mut r)).collect();
    let da = Dataset::new(a, 1, vec![0.0; n], TaskKind::Regression).unwrap();
    let db = Dataset::new(b, 1, vec![0.0; n], TaskKind::Regression).unwrap();
    let kl = kl_gaussian(&da, &db).unwrap();
    assert!((kl - 0.5).abs() < 0.02, "{kl}");
}

#[test]
fn self_distances_vanish() {
    let d = draw(SettingKind::Lda, 1.0, 200, 4, Role::Target);
    assert_eq!(kl_gaussian(&d, &d).unwrap(), 0.0);
    assert!(w2_gaussian(&d, &d).unwrap() <= 1e-6);
    assert!(otdd_gaussian(&d, &d).unwrap().abs() <= 1e-6);
}

#[test]
fn independent_draws_of_one_distribution_are_close_but_not_equal() {
    let a = draw(SettingKind::Logistic, 1.0, 200, 5, Role::Target);
    let b = draw(SettingKind::Logistic, 1.0, 200, 6, Role::Target);
    let kl = kl_gaussian(&a, &b).unwrap();
    let w2 = w2_gaussian(&a, &b).unwrap();
    assert!(kl > 0.0 && kl < 1.0, "kl {kl}");
    assert!(w2 > 0.0 && w2 < 2.0, "w2 {w2}");
}

#[test]
fn otdd_ignores_relabelling_but_sees_scrambled_labels() {
    let a = draw(SettingKind::Lda, 1.0, 200, 7, Role::Target);
    let flipped = a.with_labels(a.labels().iter().map(|y| 1.0 - y).collect()).unwrap();
    assert!(otdd_gaussian(&a, &flipped).unwrap() <= 1e-6);
    let mut labels = a.labels().to_vec();
    rng::shuffle(&mut rng::seeded(70), &mut labels);
    let scrambled = a.with_labels(labels).unwrap();
    assert!(otdd_gaussian(&a, &scrambled).unwrap() > otdd_gaussian(&a, &a).unwrap() + 0.1);
}

#[test]
fn otdd_is_symmetric_on_two_lda_draws() {
    let a = draw(SettingKind::Lda, 1.0, 200, 8, Role::Target);
    let b = draw(SettingKind::Lda, 1.0, 200, 9, Role::Source);
    let ab = otdd_gaussian(&a, &b).unwrap();
    let ba = otdd_gaussian(&b, &a).unwrap();
    assert!(ab.is_finite() && ab > 0.0);
    assert!((ab - ba).abs() <= 1e-9, "{ab} vs {ba}");
}

#[test]
fn kl_is_asymmetric_on_skewed_fits() {
    let a = GaussianFit::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
    let b = GaussianFit::new(DVector::from_vec(vec![1.0, 0.0]), DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.25]))).unwrap();
    let (ab, ba) = (kl_between(&a, &b).unwrap(), kl_between(&b, &a).unwrap());
    assert!(ab >= 0.0 && ba >= 0.0);
    assert!((ab - ba).abs() > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bures_matches_the_cholesky_route(
        ea in prop::collection::vec(-1.0f64..1.0, 16),
        eb in prop::collection::vec(-1.0f64..1.0, 16),
        ma in prop::collection::vec(-2.0f64..2.0, 4),
        mb in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let (a, b) = (spd(&ea, 4), spd(&eb, 4));
        let (ma, mb) = (DVector::from_vec(ma), DVector::from_vec(mb));
        let expected = bures_by_cholesky(&ma, &a, &mb, &b);
        let fa = GaussianFit::new(ma.clone(), a.clone()).unwrap();
        let fb = GaussianFit::new(mb.clone(), b.clone()).unwrap();
        let got = w2_squared_between(&fa, &fb).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * (1.0 + expected), "{} vs {}", got, expected);
        let back = w2_squared_between(&fb, &fa).unwrap();
        prop_assert!((got - back).abs() <= 1e-10 * (1.0 + got));
    }

    #[test]
    fn kl_matches_the_inverse_route(
        ea in prop::collection::vec(-1.0f64..1.0, 9),
        eb in prop::collection::vec(-1.0f64..1.0, 9),
        ma in prop::collection::vec(-2.0f64..2.0, 3),
        mb in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let (a, b) = (spd(&ea, 3), spd(&eb, 3));
        let (ma, mb) = (DVector::from_vec(ma), DVector::from_vec(mb));
        let expected = kl_by_inverse(&ma, &a, &mb, &b);
        let got = kl_between(&GaussianFit::new(ma, a).unwrap(), &GaussianFit::new(mb, b).unwrap()).unwrap();
        prop_assert!(got >= 0.0);
        prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected), "{} vs {}", got, expected);
    }
}
