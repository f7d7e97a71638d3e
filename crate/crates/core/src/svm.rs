//! Soft-margin linear SVM trained on the dual by sequential minimal
//! optimisation.
//!
//! Pair selection follows Platt's scheme: alternate full passes and
//! non-bound passes over first-choice candidates; the second index is the
//! non-bound sample maximising `|E1 − E2|`, falling back to scans over the
//! non-bound set and then all samples. Scans start at a position derived from
//! the first index rather than a random one, so training is deterministic.

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kv::{KvMap, KvWriter};
use crate::Classifier;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    /// KKT tolerance used while choosing pairs.
    pub tol: f64,
    /// Minimum relative change of α for a step to count.
    pub eps: f64,
    /// Cap on outer passes before giving up.
    pub max_passes: usize,
    /// α above this marks a support vector.
    pub alpha_tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, tol: 1e-9, eps: 1e-12, max_passes: 100_000, alpha_tol: 1e-8 }
    }
}

impl SvmConfig {
    pub fn with_c(c: f64) -> Self {
        SvmConfig { c, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub w: Vec<f64>,
    pub b: f64,
    pub support_indices: Vec<usize>,
    pub c: f64,
}

impl SvmModel {
    pub fn decision_function(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::Dimension { expected: self.w.len(), actual: x.len() });
        }
        Ok(dot(&self.w, x) + self.b)
    }

    /// Sign of the decision value; exactly 0 maps to +1.
    pub fn classify(&self, x: &[f64]) -> Result<Label> {
        self.decision_function(x).map(Label::from_sign)
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter().map(|r| self.classify(r)).collect()
    }

    pub fn to_kv(&self) -> String {
        let mut w = KvWriter::new();
        w.put("model", "svm").put_f64("c", self.c).put_f64("b", self.b);
        w.put_indexed_f64("w", &self.w);
        w.put_indexed_f64("alpha", &self.alphas);
        w.put_list("support", &self.support_indices);
        w.finish()
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let kv = KvMap::parse(text)?;
        if kv.require_str("model")? != "svm" {
            return Err(Error::config("not an svm model"));
        }
        let model = SvmModel {
            alphas: kv.get_indexed("alpha")?,
            w: kv.get_indexed("w")?,
            b: kv.require("b")?,
            support_indices: kv.get_list("support")?.unwrap_or_default(),
            c: kv.require("c")?,
        };
        if model.w.is_empty() {
            return Err(Error::config("svm model has no weights"));
        }
        Ok(model)
    }
}

impl Classifier for SvmModel {
    fn classify_row(&self, x: &[f64], _index: usize) -> Result<Label> {
        self.classify(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σα − ½ ΣΣ α_i α_j y_i y_j x_iᵀx_j`.
pub fn dual_objective(alphas: &[f64], dataset: &Dataset) -> f64 {
    let x = dataset.features();
    let y: Vec<f64> = dataset.labels().iter().map(|l| l.sign()).collect();
    let mut quad = 0.0;
    for i in 0..alphas.len() {
        for j in 0..alphas.len() {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * dot(&x[i], &x[j]);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Largest KKT violation of `model` on its training set.
pub fn kkt_violation(model: &SvmModel, dataset: &Dataset, alpha_tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for ((x, y), &a) in dataset.features().iter().zip(dataset.labels()).zip(&model.alphas) {
        let m = y.sign() * model.decision_function(x)?;
        let v = if a <= alpha_tol {
            (1.0 - m).max(0.0)
        } else if a >= model.c - alpha_tol {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

pub fn train_svm(dataset: &Dataset, config: &SvmConfig) -> Result<SvmModel> {
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(Error::config(format!("C must be positive, got {}", config.c)));
    }
    let (pos, neg) = dataset.class_counts();
    if pos == 0 || neg == 0 {
        return Err(Error::argument("SVM training needs both classes present"));
    }
    let mut smo = Smo::new(dataset, config);
    smo.solve()?;
    Ok(smo.into_model(dataset))
}

struct Smo<'a> {
    cfg: &'a SvmConfig,
    n: usize,
    y: Vec<f64>,
    gram: Vec<f64>,
    alpha: Vec<f64>,
    /// `Σ_j α_j y_j K(x_j, x_i)`, kept in step with `alpha`.
    f: Vec<f64>,
    b: f64,
}

impl<'a> Smo<'a> {
    fn new(dataset: &Dataset, cfg: &'a SvmConfig) -> Self {
        let x = dataset.features();
        let n = x.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = dot(&x[i], &x[j]);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        Smo {
            cfg,
            n,
            y: dataset.labels().iter().map(|l| l.sign()).collect(),
            gram,
            alpha: vec![0.0; n],
            f: vec![0.0; n],
            b: 0.0,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    fn error(&self, i: usize) -> f64 {
        self.f[i] + self.b - self.y[i]
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.cfg.c
    }

    fn violation(&self, i: usize) -> f64 {
        let r = self.error(i) * self.y[i];
        if self.alpha[i] < self.cfg.c && r < 0.0 {
            -r
        } else if self.alpha[i] > 0.0 && r > 0.0 {
            r
        } else {
            0.0
        }
    }

    fn solve(&mut self) -> Result<()> {
        let mut examine_all = true;
        let mut passes = 0;
        loop {
            let mut changed = 0;
            for i in 0..self.n {
                if (examine_all || self.non_bound(i)) && self.examine(i) {
                    changed += 1;
                }
            }
            passes += 1;
            if examine_all {
                if changed == 0 {
                    return Ok(());
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
            if passes >= self.cfg.max_passes {
                let max_violation = (0..self.n).map(|i| self.violation(i)).fold(0.0, f64::max);
                return Err(Error::SvmNotConverged { passes, max_violation });
            }
        }
    }

    fn examine(&mut self, i2: usize) -> bool {
        if self.violation(i2) <= self.cfg.tol {
            return false;
        }
        let e2 = self.error(i2);
        let mut best = None;
        let mut best_gap = -1.0;
        for i in 0..self.n {
            if self.non_bound(i) {
                let gap = (self.error(i) - e2).abs();
                if gap > best_gap {
                    best_gap = gap;
                    best = Some(i);
                }
            }
        }
        if let Some(i1) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        let start = i2 + 1;
        for offset in 0..self.n {
            let i1 = (start + offset) % self.n;
            if self.non_bound(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        for offset in 0..self.n {
            let i1 = (start + offset) % self.n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let c = self.cfg.c;
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (c + a2 - a1).min(c))
        } else {
            ((a1 + a2 - c).max(0.0), (a1 + a2).min(c))
        };
        if lo >= hi {
            return false;
        }
        let (k11, k12, k22) = (self.k(i1, i1), self.k(i1, i2), self.k(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Objective is linear along the constraint line: pick the better end.
            let f1 = y1 * (e1 - self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 - self.b) - s * a1 * k12 - a2 * k22;
            let l1 = a1 + s * (a2 - lo);
            let h1 = a1 + s * (a2 - hi);
            let obj = |a1x: f64, a2x: f64| {
                a1x * f1 + a2x * f2 + 0.5 * a1x * a1x * k11 + 0.5 * a2x * a2x * k22 + s * a2x * a1x * k12
            };
            let (lobj, hobj) = (obj(l1, lo), obj(h1, hi));
            if lobj < hobj - self.cfg.eps {
                lo
            } else if lobj > hobj + self.cfg.eps {
                hi
            } else {
                a2
            }
        };
        if a2_new < 1e-12 * c {
            a2_new = 0.0;
        } else if a2_new > c * (1.0 - 1e-12) {
            a2_new = c;
        }
        if (a2_new - a2).abs() < self.cfg.eps * (a2_new + a2 + self.cfg.eps) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < 0.0 {
            a1_new = 0.0;
        } else if a1_new > c {
            a1_new = c;
        }

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let nb1 = a1_new > 0.0 && a1_new < c;
        let nb2 = a2_new > 0.0 && a2_new < c;
        self.b = if nb1 {
            b1
        } else if nb2 {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        for i in 0..self.n {
            self.f[i] += d1 * self.k(i1, i) + d2 * self.k(i2, i);
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        true
    }

    /// Range of b for which every bound α satisfies its KKT condition.
    fn bias_interval(&self, w: &[f64], x: &[Vec<f64>]) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for ((xi, &yi), &ai) in x.iter().zip(&self.y).zip(&self.alpha) {
            let r = yi - dot(w, xi);
            // α = 0 needs y·f ≥ 1, α = C needs y·f ≤ 1.
            let at_zero = ai <= self.cfg.alpha_tol;
            if at_zero == (yi > 0.0) {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
        (lo, hi)
    }

    fn into_model(self, dataset: &Dataset) -> SvmModel {
        let x = dataset.features();
        let dim = dataset.n_features();
        let tol = self.cfg.alpha_tol;
        let c = self.cfg.c;
        let mut w = vec![0.0; dim];
        for ((xi, yi), ai) in x.iter().zip(&self.y).zip(&self.alpha) {
            for (wj, xj) in w.iter_mut().zip(xi) {
                *wj += ai * yi * xj;
            }
        }
        let support: Vec<usize> = (0..self.n).filter(|&i| self.alpha[i] > tol).collect();
        let free: Vec<usize> = support.iter().copied().filter(|&i| self.alpha[i] < c - tol).collect();
        let pool = if free.is_empty() { &support } else { &free };
        let mut b = if pool.is_empty() {
            self.b
        } else {
            pool.iter().map(|&i| self.y[i] - dot(&w, &x[i])).sum::<f64>() / pool.len() as f64
        };
        if free.is_empty() {
            // With every α at a bound, b is only pinned to an interval; the
            // plain average can fall outside it.
            let (lo, hi) = self.bias_interval(&w, x);
            if lo <= hi {
                b = b.clamp(lo, hi);
            }
        }
        SvmModel { alphas: self.alpha, w, b, support_indices: support, c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn ds(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Dataset {
        Dataset::unnamed(features, labels).unwrap()
    }

    #[test]
    fn one_dimensional_margin() {
        let d = ds(vec![vec![0.0], vec![2.0]], vec![N, P]);
        let m = train_svm(&d, &SvmConfig::with_c(10.0)).unwrap();
        assert!((m.w[0] - 1.0).abs() < 1e-9);
        assert!((m.b + 1.0).abs() < 1e-9);
        assert_eq!(m.support_indices, vec![0, 1]);
        assert!(m.decision_function(&[1.0]).unwrap().abs() < 1e-9);
        assert_eq!(m.classify(&[1.0 + 1e-6]).unwrap(), P);
        assert_eq!(m.classify(&[2.0]).unwrap(), P);
        assert_eq!(m.classify(&[0.0]).unwrap(), N);
        assert!(m.decision_function(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_decision_is_positive() {
        let m = SvmModel { alphas: vec![], w: vec![1.0], b: -1.0, support_indices: vec![], c: 1.0 };
        assert_eq!(m.classify(&[1.0]).unwrap(), P);
    }

    #[test]
    fn symmetric_two_dimensional() {
        let d = ds(vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![-2.0, 1.0], vec![2.0, 1.0]], vec![N, P, N, P]);
        let m = train_svm(&d, &SvmConfig::with_c(10.0)).unwrap();
        assert!((m.w[0] - 1.0).abs() < 1e-9, "{:?}", m.w);
        assert!(m.w[1].abs() < 1e-9);
        assert!(m.b.abs() < 1e-9);
        assert!(kkt_violation(&m, &d, 1e-8).unwrap() < 1e-6);
    }

    #[test]
    fn argument_errors() {
        let one_class = ds(vec![vec![0.0], vec![1.0]], vec![P, P]);
        assert!(matches!(train_svm(&one_class, &SvmConfig::default()), Err(Error::Argument(_))));
        let d = ds(vec![vec![0.0], vec![1.0]], vec![N, P]);
        assert!(matches!(train_svm(&d, &SvmConfig::with_c(0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn pass_cap_reports_diagnostics() {
        let d = ds(vec![vec![0.0], vec![0.5], vec![1.0], vec![0.7]], vec![N, P, N, P]);
        let cfg = SvmConfig { max_passes: 1, ..SvmConfig::with_c(1.0) };
        match train_svm(&d, &cfg) {
            Err(Error::SvmNotConverged { passes, max_violation }) => {
                assert_eq!(passes, 1);
                assert!(max_violation.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn kv_round_trip() {
        let d = ds(vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![1.0, 3.0]], vec![N, P, N]);
        let m = train_svm(&d, &SvmConfig::default()).unwrap();
        let back = SvmModel::from_kv(&m.to_kv()).unwrap();
        assert_eq!(back, m);
        assert!(SvmModel::from_kv("model = vqc\n").is_err());
    }
}
