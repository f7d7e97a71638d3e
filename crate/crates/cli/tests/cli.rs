use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use vqcsvm_cli::output::{plot_tables, DatasetSummary};
use vqcsvm_cli::run::{MODELS, SVM, VQC};
use vqcsvm_cli::{run_experiment, run_sweep, CliError, ExperimentConfig, Results, Split};

const BIN: &str = env!("CARGO_BIN_EXE_vqcsvm");

/// A cheap synthetic config; keys in `extra` replace the defaults here.
fn small(extra: &str) -> ExperimentConfig {
    let mut text = String::new();
    for line in ["synth.n_samples = 60", "synth.noise_features = 4", "optimizer.max_evaluations = 40", "shots = 128"] {
        let key = line.split('=').next().unwrap();
        if !extra.lines().any(|l| l.starts_with(key)) {
            text.push_str(line);
            text.push('\n');
        }
    }
    ExperimentConfig::parse(&(text + extra)).unwrap()
}

fn write_csv(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn record_count_and_shared_digests() {
    let config = small("feature_counts = 2, 3\nseeds = 4, 9");
    let results = run_sweep(&config).unwrap();
    assert!(results.is_complete(), "{:?}", results.failures);
    // models × k values × seeds × splits
    assert_eq!(results.records.len(), 2 * 2 * 2 * 2);
    let mut digests: HashMap<(usize, u64), Vec<&str>> = HashMap::new();
    let mut rows: HashMap<(&str, usize, u64), usize> = HashMap::new();
    for r in &results.records {
        digests.entry((r.k, r.seed)).or_default().push(&r.feature_digest);
        assert_eq!(r.features.len(), r.k);
        *rows.entry((r.model.as_str(), r.k, r.seed)).or_default() += r.tp + r.fp + r.fn_ + r.tn;
    }
    assert!(rows.values().all(|&n| n == 60));
    assert_eq!(digests.len(), 4);
    for list in digests.values() {
        assert_eq!(list.len(), 4);
        assert!(list.iter().all(|d| *d == list[0]));
    }
    let order: Vec<(usize, u64, &str, Split)> =
        results.records.iter().map(|r| (r.k, r.seed, r.model.as_str(), r.split)).collect();
    assert_eq!(order[..4], [(2, 4, VQC, Split::Train), (2, 4, VQC, Split::Test), (2, 4, SVM, Split::Train), (2, 4, SVM, Split::Test)]);
}

#[test]
fn exact_mode_runs_are_identical() {
    let config = small("feature_counts = 2\nseeds = 1\nshots = 0");
    let mut a = run_sweep(&config).unwrap();
    let mut b = run_sweep(&config).unwrap();
    for r in a.records.iter_mut().chain(b.records.iter_mut()) {
        r.wall_time_ms = 0;
    }
    assert_eq!(a, b);
}

#[test]
fn two_feature_csv_gives_one_pair_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,label\n");
    for i in 0..24 {
        let y = i % 2;
        text.push_str(&format!("{},{},{}\n", i as f64 * 0.1 + y as f64, (i % 5) as f64, y));
    }
    let csv = write_csv(dir.path(), "two.csv", &text);
    let config = small(&format!("data.source = csv\ndata.path = {}\nfeature_counts = 2\nseeds = 0, 1, 2", csv.display()));
    let results = run_sweep(&config).unwrap();
    assert!(results.is_complete(), "{:?}", results.failures);
    for seed in [0, 1, 2] {
        for split in [Split::Train, Split::Test] {
            let models: Vec<&str> =
                results.records.iter().filter(|r| r.seed == seed && r.split == split).map(|r| r.model.as_str()).collect();
            assert_eq!(models, vec![VQC, SVM]);
        }
    }
}

#[test]
fn feature_count_above_column_count_is_a_config_error() {
    let config = small("synth.noise_features = 1\nfeature_counts = 6");
    assert!(matches!(run_sweep(&config), Err(CliError::Config(_))));
}

#[test]
fn plot_files_have_one_row_per_model_and_k() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small("feature_counts = 2, 3\nseeds = 5");
    config.output_dir = dir.path().to_path_buf();
    let outcome = run_experiment(&config).unwrap();
    assert_eq!(outcome.written.len(), 5);
    for metric in ["accuracy", "precision", "recall", "f1"] {
        let text = std::fs::read_to_string(dir.path().join(format!("plot_{metric}.csv"))).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,model,mean,sd");
        assert_eq!(lines.len(), 1 + 2 * 2);
        assert!(lines[1..].iter().all(|l| l.ends_with(",0.0")), "single seed has sd 0: {text}");
        assert_eq!(lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect::<Vec<_>>(), ["svm", "svm", "vqc", "vqc"]);
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 8);
    assert_eq!(json["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn missing_model_series_is_dropped_with_warning() {
    let mut results = run_sweep(&small("feature_counts = 2\nseeds = 0")).unwrap();
    results.records.retain(|r| r.model == SVM);
    let partial = Results {
        config: results.config.clone(),
        dataset: DatasetSummary { ..results.dataset.clone() },
        records: results.records.clone(),
        failures: vec![],
    };
    let (tables, warnings) = plot_tables(&partial, &MODELS);
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("vqc"));
    assert!(tables.iter().all(|(_, body)| body.lines().count() == 2 && !body.contains("vqc")));
}

#[test]
fn failed_cells_give_nonzero_exit_and_keep_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    // Two positives: the training split keeps one, too few for the F-score.
    let mut text = String::from("a,b,c,label\n");
    for i in 0..20 {
        let y = (i < 2) as u8;
        text.push_str(&format!("{},{},{},{}\n", i, i * 2, 20 - i, y));
    }
    write_csv(dir.path(), "tiny.csv", &text);
    let out = dir.path().join("out");
    write_csv(
        dir.path(),
        "run.kv",
        &format!("data.source = csv\ndata.path = tiny.csv\nfeature_counts = 2\nseeds = 0, 1\noutput_dir = {}\n", out.display()),
    );
    let status = Command::new(BIN).arg("run").arg("--config").arg(dir.path().join("run.kv")).env_remove("VQCSVM_OUT_DIR").output().unwrap();
    assert_eq!(status.status.code(), Some(1), "{}", String::from_utf8_lossy(&status.stderr));
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("[rank]"), "{stderr}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["failures"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_csv(dir.path(), "bad.kv", "feature_counts = 1\n");
    let status = Command::new(BIN).arg("run").arg("--config").arg(dir.path().join("bad.kv")).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn output_directory_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let elsewhere = dir.path().join("elsewhere");
    write_csv(
        dir.path(),
        "run.kv",
        "synth.n_samples = 40\nsynth.noise_features = 2\nfeature_counts = 2\nseeds = 0\noptimizer.max_evaluations = 20\nshots = 64\noutput_dir = unused\n",
    );
    let out = Command::new(BIN)
        .current_dir(dir.path())
        .args(["run", "--config", "run.kv"])
        .env("VQCSVM_OUT_DIR", &elsewhere)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(elsewhere.join("results.json").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn synth_then_rank() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cohort.csv");
    let out = Command::new(BIN)
        .args(["synth", "--out"])
        .arg(&csv)
        .args(["--seed", "3", "--n-samples", "80", "--noise-features", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "female,age,schooling,chronic_diseases,noise_00,noise_01,noise_02,dementia");
    assert_eq!(text.lines().count(), 81);

    let out = Command::new(BIN).args(["rank", "--label-column", "dementia", "--data"]).arg(&csv).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "rank\tindex\tfeature\tscore");
    assert_eq!(lines.len(), 1 + 7);
    let scores: Vec<f64> = lines[1..].iter().map(|l| l.split('\t').nth(3).unwrap().parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    let ranking = write_csv(dir.path(), "rank.csv", "feature_name,score\nnoise_01,5\nage,2\n");
    let out = Command::new(BIN)
        .args(["rank", "--label-column", "dementia", "--scorer", "imported", "--ranking-file"])
        .arg(&ranking)
        .arg("--data")
        .arg(&csv)
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().nth(1).unwrap(), "1\t5\tnoise_01\t5");
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = ExperimentConfig::from_file(root.join("default.kv")).unwrap();
    assert_eq!(default, ExperimentConfig::default());
    ExperimentConfig::from_file(root.join("smoke.kv")).unwrap();
}
