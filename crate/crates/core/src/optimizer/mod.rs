//! Derivative-free minimisation of (possibly noisy) scalar objectives.
//!
//! [`minimize`] dispatches to COBYLA (linear models over a simplex inside a
//! shrinking trust region) or SPSA (simultaneous-perturbation gradient
//! estimates). Both report the best point they evaluated, so the result is
//! never worse than the starting point.

mod cobyla;
mod spsa;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Cobyla,
    Spsa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cobyla => "cobyla",
            Method::Spsa => "spsa",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cobyla" => Ok(Method::Cobyla),
            "spsa" => Ok(Method::Spsa),
            other => Err(Error::config(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// SPSA gain sequences `a_k = a / (k + 1 + A)^α`, `c_k = c / (k + 1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant `A`; negative means "10% of the iteration budget".
    pub stability: f64,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains { a: 0.2, c: 0.1, alpha: 0.602, gamma: 0.101, stability: -1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evaluations: usize,
    pub seed: u64,
    pub spsa: SpsaGains,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Cobyla,
            rho_begin: 1.0,
            rho_end: 1e-4,
            max_evaluations: 500,
            seed: 0,
            spsa: SpsaGains::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn cobyla(max_evaluations: usize) -> Self {
        OptimizerConfig { max_evaluations, ..Default::default() }
    }

    pub fn spsa(max_evaluations: usize, seed: u64) -> Self {
        OptimizerConfig { method: Method::Spsa, max_evaluations, seed, ..Default::default() }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if dimension == 0 {
            return Err(Error::argument("cannot optimise over zero parameters"));
        }
        if !(self.rho_end > 0.0 && self.rho_end < self.rho_begin && self.rho_begin.is_finite()) {
            return Err(Error::config(format!(
                "trust radii must satisfy 0 < rho_end < rho_begin (got {} and {})",
                self.rho_end, self.rho_begin
            )));
        }
        if self.max_evaluations < dimension + 2 {
            return Err(Error::config(format!(
                "max_evaluations {} below dimension + 2 = {}",
                self.max_evaluations,
                dimension + 2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// COBYLA shrank its trust radius to `rho_end`, or SPSA ran its schedule.
    RadiusReached,
    BudgetExhausted,
    /// The objective returned NaN or ±∞.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations_used: usize,
    /// False only when the run aborted on a non-finite objective value.
    pub converged: bool,
    pub termination: Termination,
    /// Trust radius when the run stopped (COBYLA only; SPSA reports `c_k`).
    pub final_radius: f64,
}

/// One objective evaluation as seen by a trace callback.
#[derive(Debug, Clone, Copy)]
pub struct TraceEvent<'a> {
    /// 1-based evaluation counter.
    pub index: usize,
    pub point: &'a [f64],
    pub value: f64,
    /// Trust radius (COBYLA) or perturbation size (SPSA) at this evaluation.
    pub radius: f64,
}

/// Minimise `objective` from `x0`.
pub fn minimize<F>(objective: F, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> f64,
{
    minimize_traced(objective, x0, config, |_| {})
}

/// As [`minimize`], reporting every evaluation to `trace`.
pub fn minimize_traced<F, T>(
    objective: F,
    x0: &[f64],
    config: &OptimizerConfig,
    trace: T,
) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> f64,
    T: FnMut(TraceEvent<'_>),
{
    config.validate(x0.len())?;
    if let Some(v) = x0.iter().find(|v| !v.is_finite()) {
        return Err(Error::argument(format!("non-finite starting coordinate {v}")));
    }
    let mut eval = Evaluator {
        objective,
        trace,
        used: 0,
        budget: config.max_evaluations,
        best_point: x0.to_vec(),
        best_value: f64::INFINITY,
        radius: config.rho_begin,
    };
    let termination = match config.method {
        Method::Cobyla => cobyla::run(&mut eval, x0, config),
        Method::Spsa => spsa::run(&mut eval, x0, config),
    };
    Ok(OptimizationResult {
        converged: termination != Termination::NonFinite,
        best_point: eval.best_point,
        best_value: eval.best_value,
        evaluations_used: eval.used,
        termination,
        final_radius: eval.radius,
    })
}

/// Why an evaluation could not produce a usable value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Budget,
    NonFinite,
}

impl From<Stop> for Termination {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Budget => Termination::BudgetExhausted,
            Stop::NonFinite => Termination::NonFinite,
        }
    }
}

/// Budget accounting and incumbent tracking around the user objective.
pub(crate) struct Evaluator<F, T> {
    objective: F,
    trace: T,
    used: usize,
    budget: usize,
    best_point: Vec<f64>,
    best_value: f64,
    pub(crate) radius: f64,
}

impl<F, T> Evaluator<F, T>
where
    F: FnMut(&[f64]) -> f64,
    T: FnMut(TraceEvent<'_>),
{
    pub(crate) fn eval(&mut self, x: &[f64]) -> Result<f64, Stop> {
        if self.used >= self.budget {
            return Err(Stop::Budget);
        }
        self.used += 1;
        let value = (self.objective)(x);
        (self.trace)(TraceEvent { index: self.used, point: x, value, radius: self.radius });
        if !value.is_finite() {
            return Err(Stop::NonFinite);
        }
        if value < self.best_value {
            self.best_value = value;
            self.best_point.clear();
            self.best_point.extend_from_slice(x);
        }
        Ok(value)
    }

    pub(crate) fn remaining(&self) -> usize {
        self.budget - self.used
    }
}
