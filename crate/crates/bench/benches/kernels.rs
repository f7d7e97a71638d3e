use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vqcsvm_bench::scaled_cohort;
use vqcsvm_core::circuits;
use vqcsvm_core::svm::{train_svm, SvmConfig};
use vqcsvm_core::vqc;
use vqcsvm_core::{AnsatzSpec, DataMap, FeatureMapSpec, Statevector, TrainConfig, VqcModel};

fn feature_map(c: &mut Criterion) {
    let mut group = c.benchmark_group("feature_map_run");
    for n in [2usize, 5, 10] {
        let spec = FeatureMapSpec::new(n, DataMap::Havlicek).with_repetitions(2);
        let x: Vec<f64> = (0..n).map(|i| 0.1 * i as f64).collect();
        let zero = Statevector::zero_state(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| circuits::build_feature_map(black_box(&x), &spec).unwrap().run(&zero).unwrap())
        });
    }
    group.finish();
}

fn vqc_loss(c: &mut Criterion) {
    let mut group = c.benchmark_group("vqc_loss_166_rows");
    for (k, shots) in [(2usize, 0u64), (5, 0), (5, 1024)] {
        let ds = scaled_cohort(k, 0);
        let ansatz = AnsatzSpec::new(k, 2);
        let template = VqcModel::new(FeatureMapSpec::new(k, DataMap::Product).with_repetitions(2), ansatz, vec![0.0; ansatz.parameter_count()]).unwrap();
        let config = TrainConfig { shots, ..Default::default() };
        let theta: Vec<f64> = (0..ansatz.parameter_count()).map(|i| 0.3 * i as f64).collect();
        group.bench_function(format!("k{k}_shots{shots}"), |b| {
            b.iter(|| vqc::loss(black_box(&theta), &ds, &template, &config).unwrap())
        });
    }
    group.finish();
}

fn smo(c: &mut Criterion) {
    let mut group = c.benchmark_group("smo_train_166_rows");
    for k in [2usize, 5, 10] {
        let ds = scaled_cohort(k, 1);
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| train_svm(black_box(&ds), &SvmConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, feature_map, vqc_loss, smo);
criterion_main!(benches);
