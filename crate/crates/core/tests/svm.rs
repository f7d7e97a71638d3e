mod common;

use common::oracle;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vqcsvm_core::rng::seeded;
use vqcsvm_core::svm::{dual_objective, kkt_violation, train_svm, SvmConfig};
use vqcsvm_core::{Dataset, Label, SvmModel};

const KKT_TOL: f64 = 1e-3;

fn random_dataset(seed: u64, max_rows: usize, max_dim: usize) -> Dataset {
    let mut r = seeded(seed);
    let m = r.random_range(2..=max_rows);
    let d = r.random_range(1..=max_dim);
    let features: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let mut labels: Vec<Label> =
        (0..m).map(|_| if r.random::<bool>() { Label::Positive } else { Label::Negative }).collect();
    labels[0] = Label::Positive;
    labels[1] = Label::Negative;
    Dataset::unnamed(features, labels).unwrap()
}

fn check_invariants(model: &SvmModel, ds: &Dataset) {
    let y: Vec<f64> = ds.labels().iter().map(|l| l.sign()).collect();
    assert!(model.alphas.iter().all(|&a| (0.0..=model.c).contains(&a)));
    let balance: f64 = model.alphas.iter().zip(&y).map(|(a, yi)| a * yi).sum();
    assert!(balance.abs() < 1e-8, "sum alpha y = {balance}");
    for j in 0..ds.n_features() {
        let wj: f64 = (0..ds.n_samples()).map(|i| model.alphas[i] * y[i] * ds.features()[i][j]).sum();
        assert!((wj - model.w[j]).abs() < 1e-12);
    }
    let kkt = kkt_violation(model, ds, 1e-8).unwrap();
    assert!(kkt <= KKT_TOL, "KKT violation {kkt}");
}

#[test]
fn dual_objective_matches_projected_gradient_oracle() {
    for case in 0..20u64 {
        let ds = random_dataset(case, 8, 3);
        let model = train_svm(&ds, &SvmConfig::with_c(1.0)).unwrap();
        check_invariants(&model, &ds);
        let y: Vec<f64> = ds.labels().iter().map(|l| l.sign()).collect();
        let alpha = oracle::svm_dual_projected_gradient(ds.features(), &y, 1.0, 100_000);
        let reference = oracle::svm_dual_value(ds.features(), &y, &alpha);
        let got = dual_objective(&model.alphas, &ds);
        assert!((got - reference).abs() < 1e-4, "case {case}: smo {got} oracle {reference}");
    }
}

#[test]
fn six_point_two_feature_example() {
    let mut r = seeded(6);
    let features: Vec<Vec<f64>> = (0..6).map(|_| vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).collect();
    let labels = vec![Label::Positive, Label::Negative, Label::Positive, Label::Negative, Label::Positive, Label::Negative];
    let ds = Dataset::unnamed(features, labels).unwrap();
    let model = train_svm(&ds, &SvmConfig::with_c(1.0)).unwrap();
    let y: Vec<f64> = ds.labels().iter().map(|l| l.sign()).collect();
    let alpha = oracle::svm_dual_projected_gradient(ds.features(), &y, 1.0, 100_000);
    assert!((dual_objective(&model.alphas, &ds) - oracle::svm_dual_value(ds.features(), &y, &alpha)).abs() < 1e-4);
}

/// Separable sets with a known geometric margin: hard-margin training gives
/// `‖w‖ = 2 / width`.
#[test]
fn hard_margin_recovers_margin_width() {
    let cases: Vec<(Vec<Vec<f64>>, Vec<Label>, f64)> = vec![
        (
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![-1.0, 3.0], vec![4.0, -2.0]],
            vec![Label::Negative, Label::Positive, Label::Negative, Label::Positive],
            2.0,
        ),
        (
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![-1.0, -0.5], vec![2.0, 3.0]],
            vec![Label::Negative, Label::Positive, Label::Negative, Label::Positive],
            2f64.sqrt(),
        ),
        (vec![vec![-0.25], vec![0.25], vec![-3.0], vec![5.0]], vec![Label::Negative, Label::Positive, Label::Negative, Label::Positive], 0.5),
    ];
    for (features, labels, width) in cases {
        let ds = Dataset::unnamed(features, labels).unwrap();
        let model = train_svm(&ds, &SvmConfig::with_c(1e6)).unwrap();
        let wnorm = model.w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((wnorm - 2.0 / width).abs() < 1e-3, "‖w‖ = {wnorm}, expected {}", 2.0 / width);
        check_invariants(&model, &ds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_hold_on_random_data(seed in any::<u64>(), c in 0.05f64..20.0) {
        let ds = random_dataset(seed, 30, 4);
        let model = train_svm(&ds, &SvmConfig::with_c(c)).unwrap();
        check_invariants(&model, &ds);
    }

    #[test]
    fn row_order_does_not_move_the_solution(seed in any::<u64>()) {
        let ds = random_dataset(seed, 20, 3);
        let mut order: Vec<usize> = (0..ds.n_samples()).collect();
        order.shuffle(&mut seeded(seed ^ 0x5eed));
        let shuffled = ds.subset(&order);
        let a = train_svm(&ds, &SvmConfig::default()).unwrap();
        let b = train_svm(&shuffled, &SvmConfig::default()).unwrap();
        for (wa, wb) in a.w.iter().zip(&b.w) {
            prop_assert!((wa - wb).abs() < 1e-6, "w {:?} vs {:?}", a.w, b.w);
        }
        prop_assert!((a.b - b.b).abs() < 1e-6, "b {} vs {}", a.b, b.b);
    }
}
