//! Unconstrained COBYLA.
//!
//! The simplex is stored relative to its best vertex (the "pole"): `sim[j]` is
//! the displacement of vertex `j` and `simi` is the matrix whose rows satisfy
//! `simi[j] · sim[k] = δ_jk`. Each iteration either
//!
//! * takes a step of length `delta` down the linear model fitted through the
//!   n + 1 vertices, or
//! * replaces a badly placed vertex to restore simplex acceptability, or
//! * halves `rho` once the model has stopped paying off at `delta == rho`.
//!
//! `rho` is the trust radius proper: it starts at `rho_begin`, only ever
//! shrinks, and bottoms out at `rho_end`. `delta` is the step radius used for
//! the model step and the geometry tests. It lives in `[rho, rho_begin]`,
//! doubling after steps whose actual reduction beats 70% of the predicted one
//! and halving after steps that earn less than 10%. With `delta` pinned to
//! `rho` this is Powell's original iteration; letting it float is what allows
//! progress along curved valleys once `rho` has become small.
//!
//! The constraint set is empty, so the merit function is the objective itself.
//!
//! Vertex choices compare lengths and weights that are often equal in exact
//! arithmetic (edges created by the same kind of step). Such comparisons
//! treat values within a relative [`TIE`] as equal and keep the lower index,
//! so rounding noise in the absolute coordinates cannot change the choice.

use super::{Evaluator, OptimizerConfig, Stop, Termination, TraceEvent};

/// Lower bound on vertex-to-face distance, as a fraction of `delta`.
const ALPHA: f64 = 0.25;
/// Upper bound on edge length from the pole, as a multiple of `delta`.
const BETA: f64 = 2.1;
/// Length of a geometry-improving step, as a fraction of `delta`.
const GAMMA: f64 = 0.5;
/// Edge length above which a trust step may evict a far vertex.
const DELTA: f64 = 1.1;
/// Relative tolerance under which two geometric quantities count as equal.
const TIE: f64 = 1e-10;

/// `a` beats `b` by more than rounding noise.
fn exceeds(a: f64, b: f64) -> bool {
    a > b + TIE * b.abs().max(a.abs())
}

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

struct Simplex {
    pole: Vec<f64>,
    f_pole: f64,
    sim: Vec<Vec<f64>>,
    simi: Vec<Vec<f64>>,
    fval: Vec<f64>,
}

fn iterate<F, T>(eval: &mut Evaluator<F, T>, x0: &[f64], config: &OptimizerConfig) -> Result<(), Stop>
where
    F: FnMut(&[f64]) -> f64,
    T: FnMut(TraceEvent<'_>),
{
    let n = x0.len();
    let mut rho = config.rho_begin;
    eval.radius = rho;

    let f_pole = eval.eval(x0)?;
    let mut s = Simplex {
        pole: x0.to_vec(),
        f_pole,
        sim: (0..n).map(|j| unit(n, j, rho)).collect(),
        simi: (0..n).map(|j| unit(n, j, 1.0 / rho)).collect(),
        fval: Vec::with_capacity(n),
    };
    for j in 0..n {
        let x: Vec<f64> = x0.iter().zip(&s.sim[j]).map(|(a, b)| a + b).collect();
        s.fval.push(eval.eval(&x)?);
    }

    let mut last_move: Option<Vec<f64>> = None;
    let mut delta = rho;
    // Set after a geometry step so that the next iteration tries the model.
    let mut geometry_done = false;

    loop {
        if let Some(d) = s.promote_best() {
            last_move = Some(d);
        }
        s.check_inverse();

        let vsig: Vec<f64> = s.simi.iter().map(|row| 1.0 / norm(row)).collect();
        let veta: Vec<f64> = s.sim.iter().map(|row| norm(row)).collect();
        let parsig = ALPHA * delta;
        let pareta = BETA * delta;
        let acceptable = vsig.iter().all(|&v| v >= parsig) && veta.iter().all(|&v| v <= pareta);
        let grad = s.gradient();

        if !geometry_done && !acceptable {
            let j = match argmax_above(&veta, pareta) {
                Some(j) => j,
                None => argmin(&vsig),
            };
            let scale = GAMMA * delta * vsig[j];
            let mut dx: Vec<f64> = s.simi[j].iter().map(|v| v * scale).collect();
            if dot(&grad, &dx) > 0.0 {
                dx.iter_mut().for_each(|v| *v = -*v);
            }
            let x = s.point(&dx);
            let f = eval.eval(&x)?;
            s.replace(j, dx, f);
            geometry_done = true;
            continue;
        }

        let gnorm = norm(&grad);
        let step = if gnorm > 0.0 && gnorm.is_finite() {
            Some((grad.iter().map(|g| -delta * g / gnorm).collect::<Vec<_>>(), delta * gnorm))
        } else {
            // Flat model: keep moving the way the incumbent last moved.
            last_move.as_ref().map(|d| {
                let len = norm(d);
                (d.iter().map(|v| delta * v / len).collect(), 0.0)
            })
        };

        let mut success = false;
        let mut shrink_only = false;
        if let Some((step, predicted)) = step {
            let x = s.point(&step);
            let f = eval.eval(&x)?;
            let actual = s.f_pole - f;

            // Drop the vertex whose barycentric weight in the new point is
            // largest, unless some vertex sits too far from the pole.
            let mut best_weight = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut drop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let w = dot(&s.simi[j], &step).abs();
                if exceeds(w, best_weight) {
                    drop = Some(j);
                    best_weight = w;
                }
                sigbar[j] = w * vsig[j];
            }
            let mut edge_max = DELTA * delta;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                    let dist = if actual > 0.0 { distance(&step, &s.sim[j]) } else { veta[j] };
                    if exceeds(dist, edge_max) {
                        far = Some(j);
                        edge_max = dist;
                    }
                }
            }
            if let Some(j) = far.or(drop) {
                s.replace(j, step, f);
            }
            let ratio = if predicted > 0.0 {
                actual / predicted
            } else if actual > 0.0 {
                1.0
            } else {
                -1.0
            };
            success = actual > 0.0 && ratio >= 0.1;
            let used = delta;
            delta = if ratio < 0.1 {
                0.5 * used
            } else if ratio <= 0.7 {
                used
            } else {
                (2.0 * used).min(config.rho_begin)
            };
            if delta <= 1.5 * rho {
                delta = rho;
            }
            // A failed step at delta > rho shrinks delta first, rho later.
            shrink_only = used > rho;
        }
        if success {
            continue;
        }
        if !acceptable {
            geometry_done = false;
            continue;
        }
        if shrink_only {
            continue;
        }
        if rho > config.rho_end {
            rho *= 0.5;
            if rho <= 1.5 * config.rho_end {
                rho = config.rho_end;
            }
            eval.radius = rho;
            delta = (0.5 * delta).max(rho);
            continue;
        }
        return Ok(());
    }
}

impl Simplex {
    fn point(&self, d: &[f64]) -> Vec<f64> {
        self.pole.iter().zip(d).map(|(p, v)| p + v).collect()
    }

    /// Gradient of the linear interpolant through the vertices.
    fn gradient(&self) -> Vec<f64> {
        let n = self.pole.len();
        let mut g = vec![0.0; n];
        for (row, &f) in self.simi.iter().zip(&self.fval) {
            let df = f - self.f_pole;
            for (gi, r) in g.iter_mut().zip(row) {
                *gi += df * r;
            }
        }
        g
    }

    /// Make the lowest vertex the pole. Returns the pole displacement.
    fn promote_best(&mut self) -> Option<Vec<f64>> {
        let (l, &fl) = self
            .fval
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        if fl >= self.f_pole {
            return None;
        }
        let d = self.sim[l].clone();
        for (p, v) in self.pole.iter_mut().zip(&d) {
            *p += v;
        }
        self.fval[l] = self.f_pole;
        self.f_pole = fl;
        for (k, row) in self.sim.iter_mut().enumerate() {
            if k == l {
                row.iter_mut().for_each(|v| *v = -*v);
            } else {
                row.iter_mut().zip(&d).for_each(|(v, di)| *v -= di);
            }
        }
        let n = d.len();
        let col_sums: Vec<f64> = (0..n).map(|i| -self.simi.iter().map(|r| r[i]).sum::<f64>()).collect();
        self.simi[l] = col_sums;
        Some(d)
    }

    /// Put `d` (relative to the pole) in place of vertex `j`.
    fn replace(&mut self, j: usize, d: Vec<f64>, f: f64) {
        let pivot = dot(&self.simi[j], &d);
        if pivot == 0.0 || !pivot.is_finite() {
            return;
        }
        self.simi[j].iter_mut().for_each(|v| *v /= pivot);
        let pivot_row = self.simi[j].clone();
        for (k, row) in self.simi.iter_mut().enumerate() {
            if k != j {
                let t = dot(row, &d);
                row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= t * p);
            }
        }
        self.sim[j] = d;
        self.fval[j] = f;
    }

    /// Re-invert `sim` from scratch when the rank-one updates have drifted.
    fn check_inverse(&mut self) {
        let n = self.sim.len();
        let mut err: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                err = err.max((dot(&self.simi[j], &self.sim[k]) - target).abs());
            }
        }
        if err > 1e-10 {
            if let Some(inv) = invert_rows(&self.sim) {
                self.simi = inv;
            }
        }
    }
}

/// Rows `r_j` with `r_j · rows[k] = δ_jk`, i.e. the inverse of the matrix
/// whose columns are `rows`. Gauss-Jordan with partial pivoting.
fn invert_rows(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = rows.len();
    // a[i][k] = rows[k][i]; augment with the identity.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r: Vec<f64> = (0..n).map(|k| rows[k][i]).collect();
            r.extend((0..n).map(|c| if c == i { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= p);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col];
                if factor != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= factor * pv);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn unit(n: usize, j: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = scale;
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn argmax_above(v: &[f64], floor: f64) -> Option<usize> {
    let mut best = None;
    let mut top = floor;
    for (j, &x) in v.iter().enumerate() {
        if exceeds(x, top) {
            best = Some(j);
            top = x;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if exceeds(v[best], x) {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_permuted_scaling() {
        let rows = vec![vec![0.0, 2.0], vec![-1.0, 0.5]];
        let inv = invert_rows(&rows).unwrap();
        for (j, inv_row) in inv.iter().enumerate() {
            for (k, row) in rows.iter().enumerate() {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((dot(inv_row, row) - expected).abs() < 1e-14);
            }
        }
        assert!(invert_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).is_none());
    }

    #[test]
    fn pole_swap_keeps_inverse_consistent() {
        let mut s = Simplex {
            pole: vec![0.0, 0.0],
            f_pole: 5.0,
            sim: vec![vec![1.0, 0.0], vec![0.3, 0.8]],
            simi: invert_rows(&[vec![1.0, 0.0], vec![0.3, 0.8]]).unwrap(),
            fval: vec![6.0, 1.0],
        };
        let d = s.promote_best().unwrap();
        assert_eq!(d, vec![0.3, 0.8]);
        assert_eq!(s.pole, vec![0.3, 0.8]);
        assert_eq!(s.f_pole, 1.0);
        for j in 0..2 {
            for k in 0..2 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((dot(&s.simi[j], &s.sim[k]) - expected).abs() < 1e-14);
            }
        }
    }
}
