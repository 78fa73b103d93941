//! Gates, circuits and the one-gate-per-line text format.
//!
//! ```text
//! H 1
//! CNOT 1 2
//! X 1
//! ```
//!
//! Targets may be separated by whitespace or a comma. Blank lines and
//! `#` comments are ignored.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{check_qubit, max_abs_diff, CMatrix, ALGEBRAIC_TOL, ONE};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    Cnot,
    /// Transposition of two qubits; register permutations are products of these.
    Swap,
    Custom(String),
}

impl GateKind {
    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::H | GateKind::X | GateKind::Z => Some(1),
            GateKind::Cnot | GateKind::Swap => Some(2),
            GateKind::Custom(_) => None,
        }
    }

    fn mnemonic(&self) -> &str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::Custom(name) => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: CMatrix,
}

fn real_matrix(dim: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(dim, dim, entries.iter().map(|&x| Complex64::new(x, 0.0)))
}

impl Gate {
    pub fn h(q: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::standard(GateKind::H, vec![q], real_matrix(2, &[s, s, s, -s]))
    }

    pub fn x(q: usize) -> Self {
        Self::standard(GateKind::X, vec![q], real_matrix(2, &[0.0, 1.0, 1.0, 0.0]))
    }

    pub fn z(q: usize) -> Self {
        Self::standard(GateKind::Z, vec![q], real_matrix(2, &[1.0, 0.0, 0.0, -1.0]))
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        #[rustfmt::skip]
        let m = real_matrix(4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ]);
        Self::standard(GateKind::Cnot, vec![control, target], m)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        #[rustfmt::skip]
        let m = real_matrix(4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        Self::standard(GateKind::Swap, vec![a, b], m)
    }

    /// `diag(1, e^{iθ})`, a Z rotation up to global phase.
    pub fn phase(q: usize, theta: f64) -> Self {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = ONE;
        m[(1, 1)] = Complex64::from_polar(1.0, theta);
        Self {
            kind: GateKind::Custom(format!("PHASE({theta})")),
            targets: vec![q],
            matrix: m,
        }
    }

    pub fn custom(name: impl Into<String>, targets: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let name = name.into();
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidGate(format!(
                "{name}: {}x{} matrix for {} targets",
                matrix.nrows(),
                matrix.ncols(),
                targets.len()
            )));
        }
        let defect = max_abs_diff(&(matrix.adjoint() * &matrix), &CMatrix::identity(dim, dim));
        if defect > ALGEBRAIC_TOL {
            return Err(Error::InvalidGate(format!(
                "{name} is not unitary (defect {defect:e})"
            )));
        }
        let gate = Self {
            kind: GateKind::Custom(name),
            targets,
            matrix,
        };
        gate.check_distinct()?;
        Ok(gate)
    }

    fn standard(kind: GateKind, targets: Vec<usize>, matrix: CMatrix) -> Self {
        Self {
            kind,
            targets,
            matrix,
        }
    }

    fn check_distinct(&self) -> Result<()> {
        for (i, a) in self.targets.iter().enumerate() {
            if self.targets[i + 1..].contains(a) {
                return Err(Error::InvalidGate(format!(
                    "{} repeats target {a}",
                    self.kind.mnemonic()
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn check_targets(&self, n_qubits: usize) -> Result<()> {
        self.check_distinct()?;
        for &t in &self.targets {
            check_qubit(t, n_qubits)?;
        }
        Ok(())
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Full `2^n × 2^n` matrix of this gate on an `n_qubits` register.
    pub fn embed(&self, n_qubits: usize) -> Result<CMatrix> {
        self.check_targets(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(crate::state::apply_left(
            &CMatrix::identity(dim, dim),
            n_qubits,
            &self.targets,
            &self.matrix,
        ))
    }

    fn parse(line_no: usize, line: &str) -> Result<Self> {
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut tokens = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty());
        let name = tokens.next().ok_or_else(|| err("empty line".into()))?;
        let targets = tokens
            .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad target {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let gate = match name.to_ascii_uppercase().as_str() {
            "H" => Self::h(0),
            "X" => Self::x(0),
            "Z" => Self::z(0),
            "CNOT" | "CX" => Self::cnot(0, 0),
            "SWAP" => Self::swap(0, 0),
            other => return Err(err(format!("unknown gate {other:?}"))),
        };
        if Some(targets.len()) != gate.kind.arity() {
            return Err(err(format!("{name} takes {:?} targets", gate.kind.arity())));
        }
        if targets.contains(&0) {
            return Err(err("qubit labels start at 1".into()));
        }
        let gate = Self { targets, ..gate };
        gate.check_distinct().map_err(|e| err(e.to_string()))?;
        Ok(gate)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

/// An ordered gate list. Gate order is application order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_gates(gates: Vec<Gate>) -> Self {
        Self { gates }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The inverse circuit. Only defined for self-inverse standard gates.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            if let GateKind::Custom(name) = &g.kind {
                return Err(Error::InvalidGate(format!("no inverse recorded for {name}")));
            }
            gates.push(g.clone());
        }
        Ok(Circuit { gates })
    }

    /// Product of all gates on an `n_qubits` register (last gate leftmost).
    pub fn unitary(&self, n_qubits: usize) -> Result<CMatrix> {
        let dim = 1usize << n_qubits;
        self.gates.iter().try_fold(CMatrix::identity(dim, dim), |acc, g| {
            g.check_targets(n_qubits)?;
            Ok(crate::state::apply_left(&acc, n_qubits, &g.targets, &g.matrix))
        })
    }

    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            gates.push(Gate::parse(i + 1, line)?);
        }
        Ok(Circuit { gates })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
