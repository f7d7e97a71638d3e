//! Simultaneous-perturbation stochastic approximation.
//!
//! Two evaluations per iteration estimate the gradient along a random
//! Rademacher direction. The start point and the final iterate are evaluated
//! too, so the incumbent is never worse than `x0`.

use rand::Rng;

use super::{Evaluator, OptimizerConfig, Stop, Termination, TraceEvent};
use crate::rng;

pub(super) fn run<F, T>(eval: &mut Evaluator<F, T>, x0: &[f64], config: &OptimizerConfig) -> Termination
where
    F: FnMut(&[f64]) -> f64,
    T: FnMut(TraceEvent<'_>),
{
    match iterate(eval, x0, config) {
        Ok(()) => Termination::RadiusReached,
        Err(stop) => stop.into(),
    }
}

fn iterate<F, T>(eval: &mut Evaluator<F, T>, x0: &[f64], config: &OptimizerConfig) -> Result<(), Stop>
where
    F: FnMut(&[f64]) -> f64,
    T: FnMut(TraceEvent<'_>),
{
    let gains = config.spsa;
    let iterations = config.max_evaluations.saturating_sub(2) / 2;
    let stability = if gains.stability < 0.0 { 0.1 * iterations as f64 } else { gains.stability };
    let mut rng = rng::seeded(config.seed);

    eval.radius = gains.c;
    eval.eval(x0)?;

    let mut x = x0.to_vec();
    let mut delta = vec![0.0; x.len()];
    let mut plus = vec![0.0; x.len()];
    let mut minus = vec![0.0; x.len()];
    for k in 0..iterations {
        let step = gains.a / (k as f64 + 1.0 + stability).powf(gains.alpha);
        let width = gains.c / (k as f64 + 1.0).powf(gains.gamma);
        eval.radius = width;
        for d in delta.iter_mut() {
            *d = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        for i in 0..x.len() {
            plus[i] = x[i] + width * delta[i];
            minus[i] = x[i] - width * delta[i];
        }
        let fp = eval.eval(&plus)?;
        let fm = eval.eval(&minus)?;
        let slope = (fp - fm) / (2.0 * width);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi -= step * slope / di;
        }
    }
    if eval.remaining() > 0 {
        eval.eval(&x)?;
    }
    Ok(())
}
