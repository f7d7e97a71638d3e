use proptest::prelude::*;
use rand::Rng;
use vqcsvm_core::preprocess::{f_scores, fit_scaler, rank_by_f_score, select_top_k};
use vqcsvm_core::rng::seeded;
use vqcsvm_core::{Dataset, Label};

fn matrix(seed: u64, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut r = seeded(seed);
    (0..rows).map(|_| (0..cols).map(|_| r.random_range(-50.0..50.0)).collect()).collect()
}

/// One-way ANOVA by the textbook sums-of-squares formula, two groups.
fn anova_f(values: &[f64], labels: &[Label]) -> f64 {
    let group = |l: Label| values.iter().zip(labels).filter(|(_, y)| **y == l).map(|(v, _)| *v).collect::<Vec<_>>();
    let (a, b) = (group(Label::Positive), group(Label::Negative));
    let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let grand = m(values);
    let ssb = a.len() as f64 * (m(&a) - grand).powi(2) + b.len() as f64 * (m(&b) - grand).powi(2);
    let ssw: f64 = a.iter().map(|v| (v - m(&a)).powi(2)).sum::<f64>() + b.iter().map(|v| (v - m(&b)).powi(2)).sum::<f64>();
    ssb / (ssw / (values.len() as f64 - 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_transform_round_trips(seed in any::<u64>(), rows in 2usize..30, cols in 1usize..6) {
        let train = matrix(seed, rows, cols);
        let params = fit_scaler(&train, (0.0, std::f64::consts::PI)).unwrap();
        let back = params.inverse_transform(&params.transform(&train).unwrap()).unwrap();
        for (r, s) in train.iter().zip(&back) {
            for (a, b) in r.iter().zip(s) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scaling_preserves_order_within_columns(seed in any::<u64>(), a in 0.01f64..100.0, shift in -10.0f64..10.0) {
        let train = matrix(seed, 25, 3);
        let stretched: Vec<Vec<f64>> = train.iter().map(|r| r.iter().map(|v| a * v + shift).collect()).collect();
        let t = fit_scaler(&stretched, (0.0, 1.0)).unwrap().transform(&stretched).unwrap();
        for j in 0..3 {
            for i in 0..25 {
                for k in 0..25 {
                    if train[i][j] < train[k][j] {
                        prop_assert!(t[i][j] <= t[k][j]);
                    }
                }
            }
        }
    }

    #[test]
    fn f_ranking_survives_min_max_scaling(seed in any::<u64>()) {
        let mut r = seeded(seed);
        let labels: Vec<Label> = (0..30).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect();
        let features: Vec<Vec<f64>> = labels
            .iter()
            .map(|y| (0..5).map(|j| y.sign() * j as f64 * 0.3 + r.random_range(-1.0..1.0) * (j + 1) as f64).collect())
            .collect();
        let ds = Dataset::unnamed(features.clone(), labels.clone()).unwrap();
        let scaled = fit_scaler(&features, (0.0, std::f64::consts::PI)).unwrap().transform(&features).unwrap();
        let ds_scaled = Dataset::unnamed(scaled, labels).unwrap();
        prop_assert_eq!(rank_by_f_score(&ds).unwrap().indices(), rank_by_f_score(&ds_scaled).unwrap().indices());
        for (a, b) in f_scores(&ds).unwrap().iter().zip(f_scores(&ds_scaled).unwrap()) {
            prop_assert!((a.score - b.score).abs() <= 1e-8 * a.score.abs().max(1.0));
        }
    }
}

#[test]
fn label_copy_ranks_first() {
    let mut r = seeded(40);
    let labels: Vec<Label> = (0..40).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect();
    // Label copy plus small noise keeps the within-class variance non-zero.
    let features: Vec<Vec<f64>> = labels
        .iter()
        .map(|y| {
            let copy = if *y == Label::Positive { 1.0 } else { 0.0 };
            vec![r.random::<f64>(), copy, r.random::<f64>(), r.random::<f64>()]
        })
        .collect();
    let ds = Dataset::unnamed(features, labels.clone()).unwrap();
    let ranking = rank_by_f_score(&ds).unwrap();
    assert_eq!(ranking.indices()[0], 1);
    assert!(ranking.entries()[0].degenerate);
    for e in &ranking.entries()[1..] {
        let oracle = anova_f(&ds.column(e.index), &labels);
        assert!((e.score - oracle).abs() <= 1e-9 * oracle.max(1.0), "feature {}: {} vs {}", e.index, e.score, oracle);
    }
    // A noisy copy still wins, now with a finite statistic.
    let noisy: Vec<Vec<f64>> = ds
        .features()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            row[1] += 0.05 * r.random::<f64>();
            row
        })
        .collect();
    let ds = Dataset::unnamed(noisy, labels.clone()).unwrap();
    let ranking = rank_by_f_score(&ds).unwrap();
    assert_eq!(ranking.indices()[0], 1);
    assert!(!ranking.entries()[0].degenerate);
    let oracle = anova_f(&ds.column(1), &labels);
    assert!((ranking.entries()[0].score - oracle).abs() <= 1e-9 * oracle);
    assert_eq!(select_top_k(&ranking, 1).unwrap(), vec![1]);
}

#[test]
fn scaler_never_sees_test_rows() {
    let train = vec![vec![0.0], vec![10.0]];
    let params = fit_scaler(&train, (0.0, 1.0)).unwrap();
    let test = vec![vec![-5.0], vec![5.0], vec![12.0]];
    assert_eq!(params.transform(&test).unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
    assert_eq!(params.mins(), &[0.0]);
    assert_eq!(params.maxs(), &[10.0]);
}
