//! State vectors, single-qubit gates, and circuits.
//!
//! Qubit `i` corresponds to the index bit of significance `2^i` everywhere in
//! this crate: the kernel stride, the dense oracle, rank partitioning and the
//! tensor product below all share that convention.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, SimError};

/// One complex coefficient of a state vector.
pub type Amplitude = Complex64;

/// Tolerance used when validating unitarity and normalization.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Tolerance used for exact-construction checks.
pub const EXACT_TOL: f64 = 1e-12;
/// Storage cost of one double-precision amplitude.
pub const BYTES_PER_AMPLITUDE: u64 = 16;
/// Default upper bound on the number of qubits a single state may hold.
pub const DEFAULT_MAX_QUBITS: usize = 30;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

/// The full `2^n` amplitude vector of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// `|0...0>` with the default qubit cap.
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_capped(n, DEFAULT_MAX_QUBITS)
    }

    /// `|0...0>` with an explicit qubit cap.
    pub fn zero_capped(n: usize, max_qubits: usize) -> Result<Self> {
        if n == 0 || n > max_qubits {
            return Err(SimError::Capacity(format!("qubit count {n} outside 1..={max_qubits}")));
        }
        let mut amps = vec![ZERO; 1usize << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two `>= 2`; no
    /// normalization is enforced so intermediate and test vectors can be built.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::Validation(format!("amplitude count {len} is not a power of two >= 2")));
        }
        if let Some(pos) = amps.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(SimError::Validation(format!("non-finite amplitude at index {pos}")));
        }
        Ok(Self { n: len.trailing_zeros() as usize, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Amplitude] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amps
    }

    /// Largest per-amplitude modulus of the difference to `other`.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(SimError::DimensionMismatch { expected: self.len(), actual: other.len() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// `|0...0>` on `n` qubits.
pub fn make_state(n: usize) -> Result<StateVector> {
    StateVector::zero(n)
}

/// Squared 2-norm, `sum |a|^2`.
pub fn norm2(s: &StateVector) -> f64 {
    s.amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Kronecker product of single-qubit states; `qubits[i]` becomes qubit `i`
/// (index bit `2^i`).
pub fn tensor_states(qubits: &[[Amplitude; 2]]) -> Result<StateVector> {
    if qubits.is_empty() {
        return Err(SimError::Validation("at least one qubit is required".into()));
    }
    if qubits.len() > DEFAULT_MAX_QUBITS {
        return Err(SimError::Capacity(format!("{} qubits exceeds cap {DEFAULT_MAX_QUBITS}", qubits.len())));
    }
    for (q, pair) in qubits.iter().enumerate() {
        let norm = pair[0].norm_sqr() + pair[1].norm_sqr();
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(SimError::Validation(format!("qubit {q} has squared norm {norm}, expected 1")));
        }
    }
    // Build from the most significant qubit down so qubit 0 ends up varying fastest.
    let mut amps = vec![ONE];
    for pair in qubits.iter().rev() {
        amps = amps.iter().flat_map(|&a| [a * pair[0], a * pair[1]]).collect();
    }
    StateVector::from_amplitudes(amps)
}

/// A 2x2 complex matrix `[[q11, q12], [q21, q22]]` acting on one qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate2x2 {
    pub q11: Amplitude,
    pub q12: Amplitude,
    pub q21: Amplitude,
    pub q22: Amplitude,
}

impl Gate2x2 {
    pub const fn new(q11: Amplitude, q12: Amplitude, q21: Amplitude, q22: Amplitude) -> Self {
        Self { q11, q12, q21, q22 }
    }

    /// Builds from eight reals: row-major `re, im` of `q11, q12, q21, q22`.
    pub fn from_reals(r: [f64; 8]) -> Self {
        Self::new(
            Complex64::new(r[0], r[1]),
            Complex64::new(r[2], r[3]),
            Complex64::new(r[4], r[5]),
            Complex64::new(r[6], r[7]),
        )
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let e = self.entries();
        [e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im]
    }

    pub fn entries(&self) -> [Amplitude; 4] {
        [self.q11, self.q12, self.q21, self.q22]
    }

    /// Checked constructor: rejects non-finite or non-unitary matrices.
    pub fn unitary(q11: Amplitude, q12: Amplitude, q21: Amplitude, q22: Amplitude) -> Result<Self> {
        let g = Self::new(q11, q12, q21, q22);
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries().iter().any(|e| !(e.re.is_finite() && e.im.is_finite())) {
            return Err(SimError::Validation("gate has non-finite entries".into()));
        }
        if !is_unitary(self, VALIDATION_TOL) {
            return Err(SimError::Validation("gate is not unitary".into()));
        }
        Ok(())
    }

    pub fn identity() -> Self {
        StandardGate::I.matrix()
    }
}

/// `true` iff every entry of `g^dagger g - I` has modulus at most `tol`.
pub fn is_unitary(g: &Gate2x2, tol: f64) -> bool {
    let [a, b, c, d] = g.entries();
    // columns (a, c) and (b, d)
    let p11 = a.conj() * a + c.conj() * c;
    let p12 = a.conj() * b + c.conj() * d;
    let p21 = b.conj() * a + d.conj() * c;
    let p22 = b.conj() * b + d.conj() * d;
    [(p11 - ONE), p12, p21, (p22 - ONE)].iter().all(|e| e.norm() <= tol)
}

/// The named gates accepted by circuit files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StandardGate {
    I,
    X,
    Y,
    Z,
    H,
}

impl StandardGate {
    pub const ALL: [StandardGate; 5] = [Self::I, Self::X, Self::Y, Self::Z, Self::H];

    pub fn matrix(self) -> Gate2x2 {
        let i = Complex64::new(0.0, 1.0);
        match self {
            Self::I => Gate2x2::new(ONE, ZERO, ZERO, ONE),
            Self::X => Gate2x2::new(ZERO, ONE, ONE, ZERO),
            Self::Y => Gate2x2::new(ZERO, -i, i, ZERO),
            Self::Z => Gate2x2::new(ONE, ZERO, ZERO, -ONE),
            Self::H => {
                let h = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
                Gate2x2::new(h, h, h, -h)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::H => "h",
        }
    }

    /// The standard gate whose matrix equals `g` exactly, if any.
    pub fn identify(g: &Gate2x2) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.matrix() == *g)
    }
}

impl FromStr for StandardGate {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" => Ok(Self::I),
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "z" => Ok(Self::Z),
            "h" => Ok(Self::H),
            other => Err(SimError::Parse { line: 0, message: format!("unknown gate name `{other}`") }),
        }
    }
}

impl fmt::Display for StandardGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Looks up a standard gate by name (`I`, `X`, `Y`, `Z`, `H`, case-insensitive).
pub fn standard_gate(name: &str) -> Result<Gate2x2> {
    name.parse::<StandardGate>().map(StandardGate::matrix)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Single,
    Controlled,
}

/// A single-qubit gate, optionally conditioned on one control qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateOp {
    pub gate: Gate2x2,
    pub target: usize,
    pub control: Option<usize>,
}

impl GateOp {
    pub fn single(gate: Gate2x2, target: usize) -> Self {
        Self { gate, target, control: None }
    }

    pub fn controlled(gate: Gate2x2, control: usize, target: usize) -> Self {
        Self { gate, target, control: Some(control) }
    }

    pub fn kind(&self) -> GateKind {
        match self.control {
            Some(_) => GateKind::Controlled,
            None => GateKind::Single,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.target >= n {
            return Err(SimError::Range(format!("target {} >= {n} qubits", self.target)));
        }
        if let Some(c) = self.control {
            if c >= n {
                return Err(SimError::Range(format!("control {c} >= {n} qubits")));
            }
            if c == self.target {
                return Err(SimError::Validation(format!("control and target are both qubit {c}")));
            }
        }
        self.gate.validate()
    }
}

/// An ordered list of gate applications on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SimError::Capacity("a circuit needs at least one qubit".into()));
        }
        Ok(Self { n, ops: Vec::new() })
    }

    pub fn with_ops(n: usize, ops: Vec<GateOp>) -> Result<Self> {
        let mut c = Self::new(n)?;
        for op in ops {
            c.push(op)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate(self.n)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of gates touching each qubit; a controlled gate counts once for
    /// its target and once for its control.
    pub fn gate_histogram(&self) -> Vec<u64> {
        let mut counts = vec![0; self.n];
        for op in &self.ops {
            counts[op.target] += 1;
            if let Some(c) = op.control {
                counts[c] += 1;
            }
        }
        counts
    }
}
