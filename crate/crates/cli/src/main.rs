use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vqcsvm_core::data::{self, CsvOptions};
use vqcsvm_core::preprocess::{self, Scorer};
use vqcsvm_core::SynthSpec;
use vqcsvm_cli::{config::OUT_DIR_ENV, run_experiment, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "vqcsvm", version, about = "Compare a variational quantum classifier with a linear SVM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the feature-count × seed sweep described by a config file.
    #[command(after_help = format!("The output directory can be overridden with {OUT_DIR_ENV}."))]
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic cohort as CSV.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 166)]
        n_samples: usize,
        #[arg(long, default_value_t = 95)]
        noise_features: usize,
        #[arg(long, default_value = "dementia")]
        label_column: String,
    },
    /// Print the feature ranking of a CSV file.
    Rank {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "label")]
        label_column: String,
        #[arg(long, default_value = "1")]
        positive_token: String,
        /// `f_score`, or `imported` together with --ranking-file.
        #[arg(long, default_value = "f_score")]
        scorer: Scorer,
        #[arg(long)]
        ranking_file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Synth { out, seed, n_samples, noise_features, label_column } => {
            let spec = SynthSpec { seed, n_samples, n_noise_features: noise_features, ..Default::default() };
            cmd_synth(&spec, &out, &label_column)
        }
        Command::Rank { data, label_column, positive_token, scorer, ranking_file } => {
            cmd_rank(&data, &label_column, &positive_token, scorer, ranking_file)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(path: PathBuf) -> Result<ExitCode, CliError> {
    let config = ExperimentConfig::from_file(&path)?;
    let outcome = run_experiment(&config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for f in &outcome.results.failures {
        let model = f.model.as_deref().map(|m| format!(" {m}")).unwrap_or_default();
        eprintln!("failed: k={} seed={}{model} [{}] {}", f.k, f.seed, f.stage, f.message);
    }
    println!(
        "{} records, {} failures; wrote {}",
        outcome.results.records.len(),
        outcome.results.failures.len(),
        outcome.output_dir.display()
    );
    Ok(if outcome.results.is_complete() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_synth(spec: &SynthSpec, out: &PathBuf, label_column: &str) -> Result<ExitCode, CliError> {
    let ds = data::generate_synthetic(spec).map_err(|e| CliError::stage("synth", e))?;
    data::write_csv(&ds, out, label_column).map_err(|e| CliError::stage("write", e))?;
    let (pos, neg) = ds.class_counts();
    println!("wrote {} rows ({pos} positive, {neg} negative) to {}", ds.n_samples(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(
    path: &PathBuf,
    label_column: &str,
    positive_token: &str,
    scorer: Scorer,
    ranking_file: Option<PathBuf>,
) -> Result<ExitCode, CliError> {
    let (ds, report) =
        data::load_csv(path, &CsvOptions::new(label_column, positive_token)).map_err(|e| CliError::stage("load", e))?;
    if report.rows_dropped > 0 {
        eprintln!("warning: dropped {} incomplete rows", report.rows_dropped);
    }
    let ranking = match (scorer, ranking_file) {
        (Scorer::FScore, _) => preprocess::rank_by_f_score(&ds),
        (Scorer::Imported, Some(file)) => preprocess::load_ranking(file, ds.names()),
        (Scorer::Imported, None) => return Err(CliError::Config("--scorer imported needs --ranking-file".into())),
        (Scorer::PermutationImportance, _) => {
            return Err(CliError::Config("permutation importance needs a trained model; use it from `run`".into()))
        }
    }
    .map_err(|e| CliError::stage("rank", e))?;
    println!("rank\tindex\tfeature\tscore");
    for (r, e) in ranking.entries().iter().enumerate() {
        let flag = if e.degenerate { "\t(degenerate)" } else { "" };
        println!("{}\t{}\t{}\t{}{flag}", r + 1, e.index, ds.names()[e.index], e.score);
    }
    Ok(ExitCode::SUCCESS)
}
