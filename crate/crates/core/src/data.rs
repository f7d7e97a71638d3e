//! Datasets: CSV ingestion, stratified splitting and seeded synthetic cohorts.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::statistics::Distribution as _;

use crate::error::{Error, Result};
use crate::rng;

/// Binary class label. `Positive` is the +1 class (dementia present).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// Non-negative values map to `Positive`.
    pub fn from_sign(v: f64) -> Label {
        if v >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Csv { path: PathBuf },
    Synthetic { seed: u64 },
    InMemory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeta {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Row-major feature matrix with one ±1 label per row.
///
/// `row_ids` track each row's position in the dataset it was originally
/// loaded or generated as, so splits can be checked for leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    names: Vec<String>,
    row_ids: Vec<usize>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Label>, names: Vec<String>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::argument(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some((i, row)) = features.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(Error::argument(format!(
                "row {i} has {} values but there are {} feature names",
                row.len(),
                names.len()
            )));
        }
        let row_ids = (0..features.len()).collect();
        Ok(Dataset { features, labels, names, row_ids, provenance: Provenance::InMemory })
    }

    /// Columns named `x0, x1, …`.
    pub fn unnamed(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let width = features.first().map_or(0, Vec::len);
        Self::new(features, labels, (0..width).map(|j| format!("x{j}")).collect())
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.features.iter().map(|r| r[j]).collect()
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    pub fn feature_meta(&self) -> Vec<FeatureMeta> {
        (0..self.n_features())
            .map(|j| {
                let (min, max) = self
                    .features
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
                FeatureMeta { name: self.names[j].clone(), min, max }
            })
            .collect()
    }

    /// Keep only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::argument(format!(
                "column {bad} out of range for {} features",
                self.n_features()
            )));
        }
        Ok(Dataset {
            features: self.features.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            labels: self.labels.clone(),
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            row_ids: self.row_ids.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Same rows and labels over a replacement matrix of identical shape.
    pub fn with_features(&self, features: Vec<Vec<f64>>) -> Result<Dataset> {
        if features.len() != self.n_samples() || features.iter().any(|r| r.len() != self.n_features()) {
            return Err(Error::argument("replacement matrix has a different shape"));
        }
        Ok(Dataset { features, ..self.clone() })
    }

    /// Rows at the given positions (positions into this dataset, not row ids).
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: rows.iter().map(|&i| self.features[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
            row_ids: rows.iter().map(|&i| self.row_ids[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    /// Label cells equal to this token are `Positive`; anything else non-empty
    /// is `Negative`.
    pub positive_token: String,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>, positive_token: impl Into<String>) -> Self {
        CsvOptions { label_column: label_column.into(), positive_token: positive_token.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    /// 1-based data line numbers (header excluded) of dropped rows.
    pub dropped_rows: Vec<usize>,
}

/// Read a headed CSV. Rows with a missing or unparseable cell are dropped and
/// listed in the report.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<(Dataset, LoadReport)> {
    let path = path.as_ref();
    let load_err = |message: String| Error::Load { path: path.to_path_buf(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| load_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| load_err(e.to_string()))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == opts.label_column)
        .ok_or_else(|| load_err(format!("no label column {:?} in header", opts.label_column)))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut report = LoadReport::default();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_err(e.to_string()))?;
        report.rows_read += 1;
        match parse_row(&record, label_idx, headers.len(), &opts.positive_token) {
            Some((row, label)) => {
                features.push(row);
                labels.push(label);
            }
            None => {
                report.rows_dropped += 1;
                report.dropped_rows.push(line + 1);
            }
        }
    }
    if features.is_empty() {
        return Err(load_err(format!(
            "no usable rows ({} read, {} dropped)",
            report.rows_read, report.rows_dropped
        )));
    }
    let ds = Dataset::new(features, labels, names)?
        .with_provenance(Provenance::Csv { path: path.to_path_buf() });
    Ok((ds, report))
}

fn parse_row(record: &csv::StringRecord, label_idx: usize, width: usize, positive: &str) -> Option<(Vec<f64>, Label)> {
    if record.len() != width {
        return None;
    }
    let mut row = Vec::with_capacity(width - 1);
    let mut label = None;
    for (i, cell) in record.iter().enumerate() {
        if cell.is_empty() {
            return None;
        }
        if i == label_idx {
            label = Some(if cell == positive { Label::Positive } else { Label::Negative });
        } else {
            let v: f64 = cell.parse().ok()?;
            if !v.is_finite() {
                return None;
            }
            row.push(v);
        }
    }
    label.map(|l| (row, l))
}

/// Write `dataset` as CSV with the label last, encoded as `1`/`0`.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = dataset.names().iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header)?;
    for (row, label) in dataset.features().iter().zip(dataset.labels()) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(if *label == Label::Positive { "1".into() } else { "0".into() });
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Stratified split. Each class contributes `round(test_fraction · n_c)` rows
/// to the test side, clamped so both sides keep at least one row of it.
pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::argument(format!("test fraction {test_fraction} not in (0, 1)")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (tag, class) in [Label::Negative, Label::Positive].into_iter().enumerate() {
        let mut idx: Vec<usize> = (0..dataset.n_samples()).filter(|&i| dataset.labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::argument(format!(
                "class {class} has {} samples; stratified split needs at least 2",
                idx.len()
            )));
        }
        let mut rng = rng::seeded(rng::derive_seed(seed, &[tag as u64]));
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let n_test = ((test_fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// A normal variable truncated to `[lo, hi]` (hi may be +∞), optionally
/// rounded to the nearest integer after truncation.
///
/// `mean` and `sd` are the moments to reproduce: the location of the parent
/// normal is solved so that the truncated (and rounded) variable has mean
/// `mean`, with `sd` as the parent scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedVar {
    pub mean: f64,
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
    pub round: bool,
}

impl TruncatedVar {
    fn validate(&self, what: &str) -> Result<()> {
        if !(self.sd >= 0.0 && self.mean.is_finite() && self.lo < self.hi) {
            return Err(Error::config(format!("invalid {what} distribution {self:?}")));
        }
        if !(self.mean > self.lo && self.mean < self.hi) {
            return Err(Error::config(format!("{what} mean {} outside its range", self.mean)));
        }
        Ok(())
    }

    /// Mean of the truncated (and possibly rounded) variable when the parent
    /// normal is centred at `loc`.
    pub fn mean_at(&self, loc: f64) -> f64 {
        let parent = Normal::new(loc, self.sd).expect("sd validated positive");
        let z = mass(&parent, self.lo, self.hi);
        if !self.round {
            return loc + self.sd * self.sd * (parent.pdf(self.lo) - parent.pdf(self.hi)) / z;
        }
        let top = if self.hi.is_finite() { self.hi } else { loc + 12.0 * self.sd };
        let mut total = 0.0;
        let mut k = self.lo.round();
        while k <= top.round() {
            let a = (k - 0.5).max(self.lo);
            let b = (k + 0.5).min(self.hi);
            if b > a {
                total += k * mass(&parent, a, b);
            }
            k += 1.0;
        }
        total / z
    }

    /// Parent location whose truncated mean equals `self.mean`.
    pub fn location(&self) -> f64 {
        if self.sd == 0.0 {
            return self.mean;
        }
        let (mut a, mut b) = (self.mean - 10.0 * self.sd, self.mean + 10.0 * self.sd);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.mean_at(mid) < self.mean {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Rejection sampling from the parent normal centred at `loc`.
    fn sample<R: Rng + ?Sized>(&self, loc: f64, rng: &mut R) -> f64 {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            let v = loc + self.sd * z;
            if v >= self.lo && v <= self.hi {
                return if self.round { v.round() } else { v };
            }
        }
    }
}

/// P(a ≤ X ≤ b), taken from whichever tail keeps the difference accurate.
fn mass(parent: &Normal, a: f64, b: f64) -> f64 {
    if a > parent.mean().unwrap_or(0.0) {
        parent.sf(a) - parent.sf(b)
    } else {
        parent.cdf(b) - parent.cdf(a)
    }
}

/// Synthetic cohort with fixed demographic target moments (the defaults).
///
/// Sample means at `n_samples = n` are expected within 3σ of the targets:
/// `target ± 3·sd/√n` for age, schooling and chronic diseases, and
/// `p ± 3·√(p(1−p)/n)` for the female fraction `p`. At n = 166 that is
/// ±1.81 years, ±0.90 years of schooling, ±0.31 diseases and ±0.099.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub fraction_female: f64,
    pub age: TruncatedVar,
    pub schooling: TruncatedVar,
    pub chronic: TruncatedVar,
    /// Uniform `[0, 1)` columns padding the table toward its clinical width.
    pub n_noise_features: usize,
    /// Logistic label model over standardised (age, schooling, chronic):
    /// `(intercept, age, schooling, chronic)`.
    pub label_coefficients: [f64; 4],
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_samples: 166,
            fraction_female: 0.76,
            age: TruncatedVar { mean: 78.90, sd: 7.7939, lo: 65.0, hi: 90.0, round: false },
            schooling: TruncatedVar { mean: 3.46, sd: 3.8767, lo: 0.0, hi: f64::INFINITY, round: false },
            chronic: TruncatedVar { mean: 2.96, sd: 1.3242, lo: 0.0, hi: f64::INFINITY, round: true },
            n_noise_features: 95,
            label_coefficients: [0.0, 1.5, -1.0, 1.0],
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 4 {
            return Err(Error::config(format!("n_samples {} below 4", self.n_samples)));
        }
        if !(0.0..=1.0).contains(&self.fraction_female) {
            return Err(Error::config(format!("fraction_female {} not in [0, 1]", self.fraction_female)));
        }
        self.age.validate("age")?;
        self.schooling.validate("schooling")?;
        self.chronic.validate("chronic")?;
        if self.label_coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("non-finite label coefficient"));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["female", "age", "schooling", "chronic_diseases"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend((0..self.n_noise_features).map(|i| format!("noise_{i:02}")));
        names
    }

    /// Logit of P(+1) for one row's (age, schooling, chronic).
    pub fn logit(&self, age: f64, schooling: f64, chronic: f64) -> f64 {
        let [b0, ba, bs, bc] = self.label_coefficients;
        let z = |v: f64, t: &TruncatedVar| if t.sd > 0.0 { (v - t.mean) / t.sd } else { 0.0 };
        b0 + ba * z(age, &self.age) + bs * z(schooling, &self.schooling) + bc * z(chronic, &self.chronic)
    }
}

/// Columns: `female` (1/0), `age`, `schooling`, `chronic_diseases`, then the
/// noise columns.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let locs = [spec.age.location(), spec.schooling.location(), spec.chronic.location()];
    let mut rng = rng::seeded(spec.seed);
    let mut features = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for _ in 0..spec.n_samples {
        let female = if rng.random::<f64>() < spec.fraction_female { 1.0 } else { 0.0 };
        let age = spec.age.sample(locs[0], &mut rng);
        let schooling = spec.schooling.sample(locs[1], &mut rng);
        let chronic = spec.chronic.sample(locs[2], &mut rng);
        let p = sigmoid(spec.logit(age, schooling, chronic));
        labels.push(if rng.random::<f64>() < p { Label::Positive } else { Label::Negative });
        let mut row = vec![female, age, schooling, chronic];
        row.extend((0..spec.n_noise_features).map(|_| rng.random::<f64>()));
        features.push(row);
    }
    Ok(Dataset::new(features, labels, spec.feature_names())?
        .with_provenance(Provenance::Synthetic { seed: spec.seed }))
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Two-feature, class-balanced set in `[0, side]²` separated by the line
/// `x₂ = x₁` with an empty band of width `margin` around it.
///
/// The default `side` is the upper end of the default scaled range, so
/// min-max scaling into that range can only widen the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableSpec {
    pub n_samples: usize,
    pub margin: f64,
    pub side: f64,
    pub seed: u64,
}

impl Default for SeparableSpec {
    fn default() -> Self {
        SeparableSpec { n_samples: 40, margin: 0.5, side: crate::preprocess::DEFAULT_RANGE.1, seed: 0 }
    }
}

/// Labels alternate so the classes are balanced; `+1` lies above the line.
pub fn generate_separable(spec: &SeparableSpec) -> Result<Dataset> {
    let span = spec.side;
    if spec.n_samples < 2 || !(span > 0.0 && span.is_finite() && spec.margin >= 0.0 && spec.margin < span / 2.0) {
        return Err(Error::config(format!("invalid separable spec {spec:?}")));
    }
    let mut rng = rng::seeded(spec.seed);
    let half = spec.margin / 2.0;
    let mut features = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
        let point = loop {
            let p = [rng.random::<f64>() * span, rng.random::<f64>() * span];
            let signed = (p[1] - p[0]) / std::f64::consts::SQRT_2;
            if signed * label.sign() >= half {
                break p.to_vec();
            }
        };
        features.push(point);
        labels.push(label);
    }
    Ok(Dataset::unnamed(features, labels)?.with_provenance(Provenance::Synthetic { seed: spec.seed }))
}
