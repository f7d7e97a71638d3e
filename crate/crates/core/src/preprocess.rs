//! Min-max scaling and feature ranking.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::{rng, Classifier};

/// Default target range of the scaler.
///
/// `PhaseZ(λ)` puts a relative phase of 2λ between |0⟩ and |1⟩, so inputs in
/// `[0, π/2]` span half a turn and the two ends of the range encode distinct
/// states. On `[0, π]` they would coincide.
pub const DEFAULT_RANGE: (f64, f64) = (0.0, std::f64::consts::FRAC_PI_2);

/// Per-column min/max recorded from a training matrix, plus the target range.
///
/// Only [`fit_scaler`] constructs these, so test data can be transformed but
/// never contributes statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalerParams {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    lo: f64,
    hi: f64,
}

pub fn fit_scaler(train: &[Vec<f64>], range: (f64, f64)) -> Result<ScalerParams> {
    let (lo, hi) = range;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::config(format!("scaled range [{lo}, {hi}] is empty or unbounded")));
    }
    let first = train.first().ok_or_else(|| Error::argument("cannot fit a scaler on an empty matrix"))?;
    let width = first.len();
    let mut mins = vec![f64::INFINITY; width];
    let mut maxs = vec![f64::NEG_INFINITY; width];
    for row in train {
        if row.len() != width {
            return Err(Error::Dimension { expected: width, actual: row.len() });
        }
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    Ok(ScalerParams { mins, maxs, lo, hi })
}

impl ScalerParams {
    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn n_features(&self) -> usize {
        self.mins.len()
    }

    /// A column whose training values were all equal.
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.maxs[j] == self.mins[j]
    }

    pub fn degenerate_columns(&self) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| self.is_degenerate(j)).collect()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_features() {
            return Err(Error::Dimension { expected: self.n_features(), actual: row.len() });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.is_degenerate(j) {
                    return self.lo;
                }
                let t = self.lo + (v - self.mins[j]) * (self.hi - self.lo) / (self.maxs[j] - self.mins[j]);
                t.clamp(self.lo, self.hi)
            })
            .collect())
    }

    pub fn transform(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        matrix.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Degenerate columns come back as their single training value.
    pub fn inverse_transform(&self, matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        matrix
            .iter()
            .map(|row| {
                if row.len() != self.n_features() {
                    return Err(Error::Dimension { expected: self.n_features(), actual: row.len() });
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| {
                        self.mins[j] + (t - self.lo) * (self.maxs[j] - self.mins[j]) / (self.hi - self.lo)
                    })
                    .collect())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    #[default]
    FScore,
    PermutationImportance,
    /// Scores read from a `feature_name,score` file.
    Imported,
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scorer::FScore => "f_score",
            Scorer::PermutationImportance => "permutation_importance",
            Scorer::Imported => "imported",
        })
    }
}

impl FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f_score" => Ok(Scorer::FScore),
            "permutation_importance" => Ok(Scorer::PermutationImportance),
            "imported" => Ok(Scorer::Imported),
            other => Err(Error::config(format!("unknown scorer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub index: usize,
    pub score: f64,
    /// Set when the score is a sentinel rather than a finite statistic.
    pub degenerate: bool,
}

/// Features ordered by descending score; ties go to the lower index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    entries: Vec<RankEntry>,
    scorer: Scorer,
}

impl FeatureRanking {
    pub fn new(mut entries: Vec<RankEntry>, scorer: Scorer) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(e.index)) {
            return Err(Error::argument(format!("feature {} ranked twice", dup.index)));
        }
        if let Some(bad) = entries.iter().find(|e| e.score.is_nan()) {
            return Err(Error::argument(format!("feature {} has a NaN score", bad.index)));
        }
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
        Ok(FeatureRanking { entries, scorer })
    }

    pub fn entries(&self) -> &[RankEntry] {
        &self.entries
    }

    pub fn scorer(&self) -> Scorer {
        self.scorer
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }
}

/// One-way ANOVA F statistic of each column against the label.
///
/// A column with zero within-class variance scores `f64::MAX` (flagged); if
/// it is constant overall it scores 0 (also flagged).
pub fn f_scores(dataset: &Dataset) -> Result<Vec<RankEntry>> {
    let (pos, neg) = dataset.class_counts();
    if pos < 2 || neg < 2 {
        return Err(Error::argument(format!(
            "F-score needs at least 2 samples per class (got {pos} positive, {neg} negative)"
        )));
    }
    let n = dataset.n_samples() as f64;
    let groups = [Label::Positive, Label::Negative];
    let mut out = Vec::with_capacity(dataset.n_features());
    for j in 0..dataset.n_features() {
        let mut sum = [0.0; 2];
        let mut count = [0.0; 2];
        for (row, y) in dataset.features().iter().zip(dataset.labels()) {
            let g = (*y == Label::Negative) as usize;
            sum[g] += row[j];
            count[g] += 1.0;
        }
        let means = [sum[0] / count[0], sum[1] / count[1]];
        let grand = (sum[0] + sum[1]) / n;
        let mut within = 0.0;
        for (row, y) in dataset.features().iter().zip(dataset.labels()) {
            let g = (*y == Label::Negative) as usize;
            within += (row[j] - means[g]).powi(2);
        }
        let between: f64 = (0..2).map(|g| count[g] * (means[g] - grand).powi(2)).sum();
        // Two groups: between has 1 degree of freedom, within has n − 2.
        let ms_between = between / (groups.len() - 1) as f64;
        let ms_within = within / (n - groups.len() as f64);
        let entry = if ms_within > 0.0 {
            RankEntry { index: j, score: ms_between / ms_within, degenerate: false }
        } else if ms_between > 0.0 {
            RankEntry { index: j, score: f64::MAX, degenerate: true }
        } else {
            RankEntry { index: j, score: 0.0, degenerate: true }
        };
        out.push(entry);
    }
    Ok(out)
}

pub fn rank_by_f_score(dataset: &Dataset) -> Result<FeatureRanking> {
    FeatureRanking::new(f_scores(dataset)?, Scorer::FScore)
}

fn accuracy(model: &dyn Classifier, rows: &[Vec<f64>], labels: &[Label]) -> Result<f64> {
    let mut correct = 0usize;
    for (i, (row, y)) in rows.iter().zip(labels).enumerate() {
        if model.classify_row(row, i)? == *y {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len() as f64)
}

/// Mean accuracy drop over `repeats` seeded shuffles of each column.
pub fn permutation_importance(
    dataset: &Dataset,
    model: &dyn Classifier,
    repeats: usize,
    seed: u64,
) -> Result<FeatureRanking> {
    if dataset.is_empty() || repeats == 0 {
        return Err(Error::argument("permutation importance needs rows and at least one repeat"));
    }
    let baseline = accuracy(model, dataset.features(), dataset.labels())?;
    let mut entries = Vec::with_capacity(dataset.n_features());
    let mut rows = dataset.features().to_vec();
    for j in 0..dataset.n_features() {
        let original = dataset.column(j);
        let mut total = 0.0;
        for r in 0..repeats {
            let mut column = original.clone();
            let mut rng = rng::seeded(rng::derive_seed(seed, &[j as u64, r as u64]));
            rand::seq::SliceRandom::shuffle(column.as_mut_slice(), &mut rng);
            for (row, v) in rows.iter_mut().zip(&column) {
                row[j] = *v;
            }
            total += baseline - accuracy(model, &rows, dataset.labels())?;
        }
        for (row, v) in rows.iter_mut().zip(&original) {
            row[j] = *v;
        }
        entries.push(RankEntry { index: j, score: total / repeats as f64, degenerate: false });
    }
    FeatureRanking::new(entries, Scorer::PermutationImportance)
}

/// Read `feature_name,score` rows (an optional header line is skipped) and
/// resolve names against `names`.
pub fn load_ranking(path: impl AsRef<Path>, names: &[String]) -> Result<FeatureRanking> {
    let path = path.as_ref();
    let load_err = |message: String| Error::Load { path: path.to_path_buf(), message };
    let lookup: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| load_err(e.to_string()))?;
    let mut entries = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_err(e.to_string()))?;
        if record.len() != 2 {
            return Err(load_err(format!("line {}: expected `feature_name,score`", line + 1)));
        }
        let score: f64 = match record[1].parse() {
            Ok(s) => s,
            Err(_) if line == 0 => continue,
            Err(_) => return Err(load_err(format!("line {}: bad score {:?}", line + 1, &record[1]))),
        };
        let index = *lookup
            .get(&record[0])
            .ok_or_else(|| load_err(format!("line {}: unknown feature {:?}", line + 1, &record[0])))?;
        entries.push(RankEntry { index, score, degenerate: false });
    }
    if entries.is_empty() {
        return Err(load_err("ranking file has no entries".into()));
    }
    FeatureRanking::new(entries, Scorer::Imported)
}

/// The first `k` indices of `ranking`.
pub fn select_top_k(ranking: &FeatureRanking, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > ranking.len() {
        return Err(Error::argument(format!("k = {k} outside 1..={}", ranking.len())));
    }
    Ok(ranking.entries[..k].iter().map(|e| e.index).collect())
}
