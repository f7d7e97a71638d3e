//! Feature-map and ansatz circuits.
//!
//! The feature map repeats `H^⊗n` followed by the diagonal phase block
//! `exp(i Σ_S φ_S(x) Π_{i∈S} Z_i)` over singletons and the configured pairs.
//! The ansatz is a rotation layer (RY then RZ per qubit) followed by `layers`
//! rounds of a linear CX chain and another rotation layer.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{GateOp, Statevector, MAX_QUBITS};

/// How the pair phase `φ_{ij}` is derived from the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMap {
    /// `φ_i = x_i`, `φ_ij = x_i · x_j`.
    #[default]
    Product,
    /// `φ_i = x_i`, `φ_ij = (π − x_i)(π − x_j)`.
    Havlicek,
}

impl DataMap {
    pub fn single(&self, xi: f64) -> f64 {
        xi
    }

    pub fn pair(&self, xi: f64, xj: f64) -> f64 {
        match self {
            DataMap::Product => xi * xj,
            DataMap::Havlicek => (PI - xi) * (PI - xj),
        }
    }
}

impl fmt::Display for DataMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataMap::Product => "product",
            DataMap::Havlicek => "havlicek",
        })
    }
}

impl FromStr for DataMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "product" => Ok(DataMap::Product),
            "havlicek" => Ok(DataMap::Havlicek),
            other => Err(Error::config(format!("unknown data map {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub num_qubits: usize,
    pub repetitions: usize,
    pub data_map: DataMap,
    pub pairs: Vec<(usize, usize)>,
}

impl FeatureMapSpec {
    /// Two repetitions over all pairs `i < j`.
    pub fn new(num_qubits: usize, data_map: DataMap) -> Self {
        let pairs = (0..num_qubits)
            .flat_map(|i| (i + 1..num_qubits).map(move |j| (i, j)))
            .collect();
        FeatureMapSpec { num_qubits, repetitions: 2, data_map, pairs }
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.num_qubits)?;
        if self.repetitions == 0 {
            return Err(Error::config("feature map needs at least one repetition"));
        }
        for &(i, j) in &self.pairs {
            if i == j || i >= self.num_qubits || j >= self.num_qubits {
                return Err(Error::config(format!(
                    "entangling pair ({i}, {j}) invalid for {} qubits",
                    self.num_qubits
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub num_qubits: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(num_qubits: usize, layers: usize) -> Self {
        AnsatzSpec { num_qubits, layers }
    }

    /// `2 · n · (layers + 1)`.
    pub fn parameter_count(&self) -> usize {
        2 * self.num_qubits * (self.layers + 1)
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.num_qubits)?;
        if self.layers == 0 {
            return Err(Error::config("ansatz needs at least one layer"));
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// An ordered gate list on a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Circuit { num_qubits, gates: Vec::new() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Append all gates of `other`, which must have the same width.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Dimension { expected: self.num_qubits, actual: other.num_qubits });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Fold the gates over `initial`.
    pub fn run(&self, initial: &Statevector) -> Result<Statevector> {
        if initial.num_qubits() != self.num_qubits {
            return Err(Error::Dimension { expected: self.num_qubits, actual: initial.num_qubits() });
        }
        let mut state = initial.clone();
        for gate in &self.gates {
            state.apply_in_place(gate)?;
        }
        Ok(state)
    }

    /// Parse the one-gate-per-line debug format produced by `Display`.
    /// The first non-comment line must be `QUBITS n`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines
            .next()
            .ok_or(Error::Parse { line: 0, message: "empty circuit text".into() })?;
        let num_qubits = header
            .strip_prefix("QUBITS ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or(Error::Parse { line, message: format!("expected `QUBITS n`, got {header:?}") })?;
        let mut circuit = Circuit::new(num_qubits)?;
        for (line, text) in lines {
            let gate = parse_gate(text).map_err(|message| Error::Parse { line, message })?;
            circuit.push(gate)?;
        }
        Ok(circuit)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.num_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn parse_gate(text: &str) -> std::result::Result<GateOp, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let qubit = |i: usize| -> std::result::Result<usize, String> {
        fields
            .get(i)
            .ok_or_else(|| format!("missing operand {i} in {text:?}"))?
            .parse()
            .map_err(|e| format!("bad qubit index in {text:?}: {e}"))
    };
    let angle = |i: usize| -> std::result::Result<f64, String> {
        fields
            .get(i)
            .ok_or_else(|| format!("missing angle in {text:?}"))?
            .parse()
            .map_err(|e| format!("bad angle in {text:?}: {e}"))
    };
    let (gate, arity) = match fields[0] {
        "H" => (GateOp::H(qubit(1)?), 2),
        "PZ" => (GateOp::PhaseZ(qubit(1)?, angle(2)?), 3),
        "RY" => (GateOp::RY(qubit(1)?, angle(2)?), 3),
        "RZ" => (GateOp::RZ(qubit(1)?, angle(2)?), 3),
        "ZZ" => (GateOp::ZZPhase(qubit(1)?, qubit(2)?, angle(3)?), 4),
        "CX" => (GateOp::CX { control: qubit(1)?, target: qubit(2)? }, 3),
        other => return Err(format!("unknown gate {other:?}")),
    };
    if fields.len() != arity {
        return Err(format!("trailing operands in {text:?}"));
    }
    Ok(gate)
}

/// Only the diagonal phase block of one repetition, `exp(i Σ φ_S Π Z)`.
pub fn phase_block(x: &[f64], spec: &FeatureMapSpec) -> Result<Circuit> {
    spec.validate()?;
    if x.len() != spec.num_qubits {
        return Err(Error::Dimension { expected: spec.num_qubits, actual: x.len() });
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::argument(format!("non-finite feature value {bad}")));
    }
    let mut c = Circuit::new(spec.num_qubits)?;
    for (q, &xi) in x.iter().enumerate() {
        c.push(GateOp::PhaseZ(q, spec.data_map.single(xi)))?;
    }
    for &(i, j) in &spec.pairs {
        c.push(GateOp::ZZPhase(i, j, spec.data_map.pair(x[i], x[j])))?;
    }
    Ok(c)
}

/// `repetitions × [H^⊗n, phase block]`.
pub fn build_feature_map(x: &[f64], spec: &FeatureMapSpec) -> Result<Circuit> {
    let block = phase_block(x, spec)?;
    let mut c = Circuit::new(spec.num_qubits)?;
    for _ in 0..spec.repetitions {
        for q in 0..spec.num_qubits {
            c.push(GateOp::H(q))?;
        }
        c.extend(&block)?;
    }
    Ok(c)
}

/// Rotation layer, then `layers × [CX chain, rotation layer]`. Parameters are
/// consumed layer by layer, qubit by qubit, RY before RZ.
pub fn build_ansatz(theta: &[f64], spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    if theta.len() != spec.parameter_count() {
        return Err(Error::argument(format!(
            "ansatz expects {} parameters, got {}",
            spec.parameter_count(),
            theta.len()
        )));
    }
    let n = spec.num_qubits;
    let mut c = Circuit::new(n)?;
    let mut params = theta.chunks_exact(2 * n);
    let mut rotations = |c: &mut Circuit| -> Result<()> {
        let layer = params.next().expect("parameter count checked above");
        for (q, pair) in layer.chunks_exact(2).enumerate() {
            c.push(GateOp::RY(q, pair[0]))?;
            c.push(GateOp::RZ(q, pair[1]))?;
        }
        Ok(())
    };
    rotations(&mut c)?;
    for _ in 0..spec.layers {
        for q in 0..n.saturating_sub(1) {
            c.push(GateOp::CX { control: q, target: q + 1 })?;
        }
        rotations(&mut c)?;
    }
    Ok(c)
}

/// Apply `circuit` to `initial`.
pub fn run(circuit: &Circuit, initial: &Statevector) -> Result<Statevector> {
    circuit.run(initial)
}

/// `ZZPhase(p, q, λ)` expressed as `CX(p→q) · PhaseZ(q, λ) · CX(p→q)`.
pub fn zz_decomposition(p: usize, q: usize, lambda: f64) -> [GateOp; 3] {
    [
        GateOp::CX { control: p, target: q },
        GateOp::PhaseZ(q, lambda),
        GateOp::CX { control: p, target: q },
    ]
}
