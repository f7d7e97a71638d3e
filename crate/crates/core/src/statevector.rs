//! Dense pure-state simulator.
//!
//! Basis index `b` encodes qubit `k` as bit `k` of `b` (qubit 0 is the least
//! significant bit). States are at most [`MAX_QUBITS`] wide.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub const MAX_QUBITS: usize = 10;

/// One primitive circuit instruction. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    H(usize),
    /// `exp(iλZ) = diag(e^{iλ}, e^{-iλ})`.
    PhaseZ(usize, f64),
    /// Multiplies basis state `b` by `exp(iλ z_1 z_2)` with `z = ±1` from the
    /// two qubit bits (bit 0 → +1).
    ZZPhase(usize, usize, f64),
    RY(usize, f64),
    /// `exp(-iθZ/2) = diag(e^{-iθ/2}, e^{iθ/2})`.
    RZ(usize, f64),
    CX { control: usize, target: usize },
}

impl GateOp {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            GateOp::H(q) | GateOp::PhaseZ(q, _) | GateOp::RY(q, _) | GateOp::RZ(q, _) => (q, None),
            GateOp::ZZPhase(a, b, _) => (a, Some(b)),
            GateOp::CX { control, target } => (control, Some(target)),
        }
    }

    /// Check indices against a register width.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= num_qubits {
                return Err(Error::QubitIndex { index: q, num_qubits });
            }
        }
        if b == Some(a) {
            return Err(Error::InvalidGate(format!("{self} acts twice on qubit {a}")));
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(Error::InvalidGate(format!("non-finite angle in {self}")));
            }
        }
        Ok(())
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateOp::PhaseZ(_, a) | GateOp::ZZPhase(_, _, a) | GateOp::RY(_, a) | GateOp::RZ(_, a) => {
                Some(a)
            }
            GateOp::H(_) | GateOp::CX { .. } => None,
        }
    }

    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::H(q) => GateOp::H(q),
            GateOp::PhaseZ(q, a) => GateOp::PhaseZ(q, -a),
            GateOp::ZZPhase(p, q, a) => GateOp::ZZPhase(p, q, -a),
            GateOp::RY(q, a) => GateOp::RY(q, -a),
            GateOp::RZ(q, a) => GateOp::RZ(q, -a),
            cx @ GateOp::CX { .. } => cx,
        }
    }

    /// True for gates that are diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateOp::PhaseZ(..) | GateOp::ZZPhase(..) | GateOp::RZ(..))
    }

    pub(crate) fn mnemonic(&self) -> &'static str {
        match self {
            GateOp::H(_) => "H",
            GateOp::PhaseZ(..) => "PZ",
            GateOp::ZZPhase(..) => "ZZ",
            GateOp::RY(..) => "RY",
            GateOp::RZ(..) => "RZ",
            GateOp::CX { .. } => "CX",
        }
    }
}

/// `GATE q0 [q1] [angle]`, with angles printed in shortest round-trip form.
impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.mnemonic();
        match *self {
            GateOp::H(q) => write!(f, "{name} {q}"),
            GateOp::PhaseZ(q, a) | GateOp::RY(q, a) | GateOp::RZ(q, a) => write!(f, "{name} {q} {a:?}"),
            GateOp::ZZPhase(p, q, a) => write!(f, "{name} {p} {q} {a:?}"),
            GateOp::CX { control, target } => write!(f, "{name} {control} {target}"),
        }
    }
}

/// Sampled measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsHistogram {
    counts: BTreeMap<usize, u64>,
    shots: u64,
}

impl CountsHistogram {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, basis: usize) -> u64 {
        self.counts.get(&basis).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&b, &c)| (b, c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { num_qubits, amplitudes })
    }

    /// Wrap raw amplitudes. The vector must have power-of-two length and unit
    /// norm (within 1e-10).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::argument(format!("amplitude count {len} is not 2^n with n >= 1")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::argument(format!("state norm {norm} is not 1")));
        }
        Ok(Statevector { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Return `U_gate · self` as a new state.
    pub fn apply_gate(&self, gate: &GateOp) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let amps = &mut self.amplitudes;
        match *gate {
            GateOp::H(q) => {
                let s = FRAC_1_SQRT_2;
                for_each_pair(amps, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                });
            }
            GateOp::PhaseZ(q, lambda) => {
                let (p0, p1) = (Complex64::cis(lambda), Complex64::cis(-lambda));
                for_each_pair(amps, q, |a, b| {
                    *a *= p0;
                    *b *= p1;
                });
            }
            GateOp::RZ(q, theta) => {
                let (p0, p1) = (Complex64::cis(-theta / 2.0), Complex64::cis(theta / 2.0));
                for_each_pair(amps, q, |a, b| {
                    *a *= p0;
                    *b *= p1;
                });
            }
            GateOp::RY(q, theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                for_each_pair(amps, q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * s;
                    *b = x * s + y * c;
                });
            }
            GateOp::ZZPhase(p, q, lambda) => {
                let (same, diff) = (Complex64::cis(lambda), Complex64::cis(-lambda));
                for (b, amp) in amps.iter_mut().enumerate() {
                    let parity = ((b >> p) ^ (b >> q)) & 1;
                    *amp *= if parity == 0 { same } else { diff };
                }
            }
            GateOp::CX { control, target } => {
                let (cm, tm) = (1usize << control, 1usize << target);
                for b in 0..amps.len() {
                    if b & cm != 0 && b & tm == 0 {
                        amps.swap(b, b | tm);
                    }
                }
            }
        }
        Ok(())
    }

    /// `p[b] = |amplitude[b]|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draw `shots` i.i.d. measurements in the computational basis by inverse
    /// CDF over the cumulative probability vector.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<CountsHistogram> {
        if shots == 0 {
            return Err(Error::argument("shots must be at least 1"));
        }
        let mut counts = BTreeMap::new();
        sample_into(&self.probabilities(), shots, seed, |b| {
            *counts.entry(b).or_insert(0) += 1;
        });
        Ok(CountsHistogram { counts, shots })
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension { expected: self.num_qubits, actual: other.num_qubits });
        }
        let inner: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(inner.norm_sqr())
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::config(format!(
            "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Visit every (bit q = 0, bit q = 1) amplitude pair.
fn for_each_pair(amps: &mut [Complex64], q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let stride = 1usize << q;
    for chunk in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a, b);
        }
    }
}

/// Inverse-CDF sampling shared by the histogram API and the classifier's
/// parity readout.
pub(crate) fn sample_into(probs: &[f64], shots: u64, seed: u64, mut visit: impl FnMut(usize)) {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    // Rounding can leave the total a hair below 1; the top bucket absorbs it.
    let last = probs.len() - 1;
    let mut rng = rng::seeded(seed);
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        visit(idx);
    }
}
