//! Reference implementations used only by tests.
//!
//! The circuit oracle builds every gate as a full 2^n × 2^n matrix from
//! Kronecker products of 2 × 2 blocks and multiplies dense matrices, sharing
//! no code with the bit-twiddling simulator. The QP oracle solves the SVM dual
//! by projected gradient ascent.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use vqcsvm_core::GateOp;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim).map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Matrix, s: Complex64) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn apply(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn dagger(m: &Matrix) -> Matrix {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i].conj()).collect()).collect()
}

fn mat2(a: [[Complex64; 2]; 2]) -> Matrix {
    vec![a[0].to_vec(), a[1].to_vec()]
}

pub fn pauli_z() -> Matrix {
    mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub fn pauli_x() -> Matrix {
    mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

fn proj0() -> Matrix {
    mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]])
}

fn proj1() -> Matrix {
    mat2([[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
}

/// Place 2 × 2 factors on the listed qubits (identity elsewhere). Qubit 0 is
/// the rightmost Kronecker factor so that it is the least significant bit.
pub fn embed(n: usize, factors: &[(usize, Matrix)]) -> Matrix {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let f = factors.iter().find(|(k, _)| *k == q).map(|(_, m)| m.clone()).unwrap_or_else(|| identity(2));
        out = kron(&out, &f);
    }
    out
}

/// Full-register matrix of one gate.
pub fn gate_matrix(n: usize, gate: &GateOp) -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        GateOp::H(q) => embed(n, &[(q, mat2([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]))]),
        GateOp::PhaseZ(q, l) => {
            // exp(iλZ) = cos λ · I + i sin λ · Z
            let m = add(&scale(&identity(2), c(l.cos(), 0.0)), &scale(&pauli_z(), c(0.0, l.sin())));
            embed(n, &[(q, m)])
        }
        GateOp::ZZPhase(p, q, l) => {
            let zz = embed(n, &[(p, pauli_z()), (q, pauli_z())]);
            add(&scale(&identity(1 << n), c(l.cos(), 0.0)), &scale(&zz, c(0.0, l.sin())))
        }
        GateOp::RY(q, t) => {
            let (s, co) = (t / 2.0).sin_cos();
            embed(n, &[(q, mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]))])
        }
        GateOp::RZ(q, t) => {
            let m = mat2([
                [Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
                [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
            ]);
            embed(n, &[(q, m)])
        }
        GateOp::CX { control, target } => add(
            &embed(n, &[(control, proj0())]),
            &embed(n, &[(control, proj1()), (target, pauli_x())]),
        ),
    }
}

/// Product of gate matrices, first gate rightmost.
pub fn circuit_matrix(n: usize, gates: &[GateOp]) -> Matrix {
    gates.iter().fold(identity(1 << n), |acc, g| matmul(&gate_matrix(n, g), &acc))
}

pub fn random_gate<R: Rng>(n: usize, rng: &mut R) -> GateOp {
    let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    let q = rng.random_range(0..n);
    let other = |rng: &mut R| loop {
        let r = rng.random_range(0..n);
        if r != q {
            break r;
        }
    };
    let kinds = if n > 1 { 6 } else { 4 };
    match rng.random_range(0..kinds) {
        0 => GateOp::H(q),
        1 => GateOp::PhaseZ(q, angle),
        2 => GateOp::RY(q, angle),
        3 => GateOp::RZ(q, angle),
        4 => GateOp::ZZPhase(q, other(rng), angle),
        _ => GateOp::CX { control: q, target: other(rng) },
    }
}

/// Maximise `Σα − ½ αᵀQα` over `0 ≤ α ≤ C`, `yᵀα = 0` by projected gradient
/// ascent, `Q_ij = y_i y_j x_iᵀx_j`. Returns the final α.
pub fn svm_dual_projected_gradient(x: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> Vec<f64> {
    let m = x.len();
    let q: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>()).collect())
        .collect();
    // Step 1/L with L bounded by the Frobenius norm of Q.
    let lipschitz = q.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; m];
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..m).map(|i| 1.0 - (0..m).map(|j| q[i][j] * alpha[j]).sum::<f64>()).collect();
        let z: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        alpha = project_box_hyperplane(&z, y, c);
    }
    alpha
}

/// Euclidean projection onto `{0 ≤ α ≤ C, yᵀα = 0}`: `α = clip(z − νy)` with
/// ν found by bisection on the monotone map `ν ↦ yᵀ clip(z − νy)`.
pub fn project_box_hyperplane(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let clip = |nu: f64| -> Vec<f64> { z.iter().zip(y).map(|(zi, yi)| (zi - nu * yi).clamp(0.0, c)).collect() };
    let g = |nu: f64| -> f64 { clip(nu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let bound = z.iter().map(|v| v.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    // Stop once the bracket is at f64 resolution.
    while hi - lo > f64::EPSILON * bound {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clip(0.5 * (lo + hi))
}

pub fn svm_dual_value(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let m = x.len();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}
