//! Dense pure and mixed states of small qubit registers.
//!
//! Qubits are labelled `1..=n`. Qubit 1 is the leftmost character of a ket
//! string and the most significant bit of the basis index, so `|0111⟩` is
//! index `0b0111`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for algebraic identities (normalization, Hermiticity, unitarity).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Floor for eigenvalues when checking positive semidefiniteness.
pub const PSD_TOL: f64 = 1e-10;
/// Default cap on register size for dense simulation.
pub const DEFAULT_MAX_QUBITS: usize = 12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit shift of 1-based `qubit` inside an `n_qubits` index.
#[inline]
pub(crate) fn shift_of(qubit: usize, n_qubits: usize) -> usize {
    n_qubits - qubit
}

/// Inserts `bit` at bit position `shift` of `index`, moving higher bits up.
#[inline]
pub(crate) fn insert_bit(index: usize, shift: usize, bit: usize) -> usize {
    let low = index & ((1 << shift) - 1);
    let high = (index >> shift) << (shift + 1);
    high | (bit << shift) | low
}

pub(crate) fn check_qubit(qubit: usize, n_qubits: usize) -> Result<()> {
    if qubit == 0 || qubit > n_qubits {
        return Err(Error::QubitOutOfRange {
            index: qubit,
            n_qubits,
        });
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Applies a `2^k × 2^k` operator acting on `targets` to the left of `m`.
///
/// The operator's own index treats `targets[0]` as its most significant bit.
pub(crate) fn apply_left(m: &CMatrix, n_qubits: usize, targets: &[usize], op: &CMatrix) -> CMatrix {
    let k = targets.len();
    let sub = 1usize << k;
    debug_assert_eq!(op.nrows(), sub);
    let shifts: Vec<usize> = targets.iter().map(|&t| shift_of(t, n_qubits)).collect();
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let offsets: Vec<usize> = (0..sub)
        .map(|local| {
            shifts.iter().enumerate().fold(0usize, |acc, (pos, &s)| {
                let bit = (local >> (k - 1 - pos)) & 1;
                acc | (bit << s)
            })
        })
        .collect();

    let dim = m.nrows();
    let mut out = m.clone();
    let mut gathered = vec![ZERO; sub];
    for col in 0..m.ncols() {
        for base in (0..dim).filter(|i| i & mask == 0) {
            for (slot, off) in gathered.iter_mut().zip(&offsets) {
                *slot = m[(base | off, col)];
            }
            for (row_local, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col_local, g) in gathered.iter().enumerate() {
                    acc += op[(row_local, col_local)] * g;
                }
                out[(base | off, col)] = acc;
            }
        }
    }
    out
}

/// `op · m · op†` with `op` acting on `targets`.
pub(crate) fn conjugate_by(m: &CMatrix, n_qubits: usize, targets: &[usize], op: &CMatrix) -> CMatrix {
    let left = apply_left(m, n_qubits, targets, op);
    apply_left(&left.adjoint(), n_qubits, targets, op).adjoint()
}

/// Traces out one qubit of an arbitrary (not necessarily Hermitian) operator.
pub(crate) fn trace_out(m: &CMatrix, n_qubits: usize, qubit: usize) -> CMatrix {
    let s = shift_of(qubit, n_qubits);
    let dim = 1usize << (n_qubits - 1);
    CMatrix::from_fn(dim, dim, |i, j| {
        (0..2)
            .map(|b| m[(insert_bit(i, s, b), insert_bit(j, s, b))])
            .sum()
    })
}

/// Places a single-qubit operator `sigma` at position `qubit` of the
/// enlarged `n_qubits + 1` register: the result is `m ⊗ sigma` with the
/// factors interleaved.
pub(crate) fn insert_factor(m: &CMatrix, n_qubits: usize, qubit: usize, sigma: &CMatrix) -> CMatrix {
    let n_out = n_qubits + 1;
    let s = shift_of(qubit, n_out);
    let dim = 1usize << n_out;
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v == ZERO {
                continue;
            }
            for a in 0..2 {
                for b in 0..2 {
                    out[(insert_bit(i, s, a), insert_bit(j, s, b))] = v * sigma[(a, b)];
                }
            }
        }
    }
    out
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes: CVector::from_vec(amplitudes),
        })
    }

    /// Normalizes `amplitudes` before construction. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < ALGEBRAIC_TOL {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n_qubits,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index + 1,
            });
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Basis state from a ket label such as `"0110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = parse_bits(bits)?;
        Self::basis(bits.len(), index)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        self.tensor_with_limit(other, DEFAULT_MAX_QUBITS)
    }

    pub fn tensor_with_limit(&self, other: &PureState, max_qubits: usize) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        if n > max_qubits {
            return Err(Error::Capacity {
                requested: n,
                max: max_qubits,
            });
        }
        Ok(PureState {
            n_qubits: n,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

pub(crate) fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() {
        return Err(Error::InvalidState("empty ket label".into()));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidState(format!("bad ket label {bits:?}"))),
    })
}

// ---------------------------------------------------------------------------

/// Hermitian, unit-trace, positive semidefinite `2^n × 2^n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

/// Result of a single-qubit Z-basis measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: u8,
    pub probability: f64,
    pub collapsed: DensityMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and the PSD floor.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let n_qubits = qubits_for_dim(matrix.nrows())?;
        if n_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n_qubits,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        let rho = Self { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(n_qubits: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self::from_raw(n_qubits, CMatrix::identity(dim, dim) / Complex64::from(dim as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_defect(&self.matrix);
        if herm > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max defect {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = self.eigenvalues()[0];
        if min_ev < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        self.tensor_with_limit(other, DEFAULT_MAX_QUBITS)
    }

    pub fn tensor_with_limit(&self, other: &DensityMatrix, max_qubits: usize) -> Result<DensityMatrix> {
        let n = self.n_qubits + other.n_qubits;
        if n > max_qubits {
            return Err(Error::Capacity {
                requested: n,
                max: max_qubits,
            });
        }
        Ok(Self::from_raw(n, self.matrix.kronecker(&other.matrix)))
    }

    pub fn partial_trace(&self, qubit: usize) -> Result<DensityMatrix> {
        if self.n_qubits < 2 {
            return Err(Error::TooFewQubits {
                needed: 2,
                got: self.n_qubits,
            });
        }
        check_qubit(qubit, self.n_qubits)?;
        Ok(Self::from_raw(
            self.n_qubits - 1,
            trace_out(&self.matrix, self.n_qubits, qubit),
        ))
    }

    /// Tensors the single-qubit state `sigma` into position `qubit` of the
    /// enlarged register.
    pub fn insert_qubit(&self, qubit: usize, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        if sigma.n_qubits != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: sigma.n_qubits,
            });
        }
        let n_out = self.n_qubits + 1;
        if n_out > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n_out,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        check_qubit(qubit, n_out)?;
        Ok(Self::from_raw(
            n_out,
            insert_factor(&self.matrix, self.n_qubits, qubit, &sigma.matrix),
        ))
    }

    pub fn apply_gate(&self, gate: &crate::circuit::Gate) -> Result<DensityMatrix> {
        gate.check_targets(self.n_qubits)?;
        Ok(Self::from_raw(
            self.n_qubits,
            conjugate_by(&self.matrix, self.n_qubits, gate.targets(), gate.matrix()),
        ))
    }

    pub fn apply_circuit(&self, circuit: &crate::circuit::Circuit) -> Result<DensityMatrix> {
        circuit
            .gates()
            .iter()
            .try_fold(self.clone(), |rho, g| rho.apply_gate(g))
    }

    /// `Σ_k K_k ρ K_k†` with every Kraus operator acting on `targets`.
    /// Completeness of the set is the caller's responsibility.
    pub fn apply_kraus(&self, targets: &[usize], kraus: &[CMatrix]) -> Result<DensityMatrix> {
        for &t in targets {
            check_qubit(t, self.n_qubits)?;
        }
        let dim = self.dim();
        let matrix = kraus.iter().fold(CMatrix::zeros(dim, dim), |acc, k| {
            acc + conjugate_by(&self.matrix, self.n_qubits, targets, k)
        });
        Ok(Self::from_raw(self.n_qubits, matrix))
    }

    /// Z-basis outcome probabilities `[Pr(0), Pr(1)]` for `qubit`.
    pub fn outcome_probabilities(&self, qubit: usize) -> Result<[f64; 2]> {
        check_qubit(qubit, self.n_qubits)?;
        let s = shift_of(qubit, self.n_qubits);
        let mut p = [0.0; 2];
        for i in 0..self.dim() {
            p[(i >> s) & 1] += self.matrix[(i, i)].re;
        }
        Ok(p)
    }

    pub fn measure_forced(&self, qubit: usize, outcome: u8) -> Result<Measurement> {
        let p = self.outcome_probabilities(qubit)?;
        let outcome = outcome & 1;
        let probability = p[outcome as usize];
        if probability <= ALGEBRAIC_TOL {
            return Err(Error::ImpossibleOutcome {
                qubit,
                outcome,
                probability,
            });
        }
        let s = shift_of(qubit, self.n_qubits);
        let keep = |i: usize| ((i >> s) & 1) as u8 == outcome;
        let scale = Complex64::from(1.0 / probability);
        let collapsed = CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if keep(i) && keep(j) {
                self.matrix[(i, j)] * scale
            } else {
                ZERO
            }
        });
        Ok(Measurement {
            outcome,
            probability,
            collapsed: Self::from_raw(self.n_qubits, collapsed),
        })
    }

    pub fn measure<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<Measurement> {
        let p = self.outcome_probabilities(qubit)?;
        let outcome = u8::from(rng.random::<f64>() >= p[0]);
        self.measure_forced(qubit, outcome)
    }

    /// Forced when `forced` is set, sampled from `rng` otherwise.
    pub fn measure_with<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<Measurement> {
        match forced {
            Some(b) => self.measure_forced(qubit, b),
            None => self.measure(qubit, rng),
        }
    }

    /// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
    pub fn fidelity(&self, psi: &PureState) -> Result<f64> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: psi.n_qubits(),
            });
        }
        let v = psi.amplitudes();
        let f = v.dotc(&(&self.matrix * v)).re;
        Ok(f.clamp(0.0, 1.0))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn to_fixture(&self) -> StateFixture {
        StateFixture {
            n_qubits: self.n_qubits,
            matrix: self.matrix.transpose().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_fixture()).expect("fixture serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fixture: StateFixture =
            serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        fixture.into_density()
    }
}

/// On-disk form of a density matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFixture {
    pub n_qubits: usize,
    pub matrix: Vec<[f64; 2]>,
}

impl StateFixture {
    pub fn into_density(self) -> Result<DensityMatrix> {
        if self.n_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                requested: self.n_qubits,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        if self.matrix.len() != dim * dim {
            return Err(Error::Fixture(format!(
                "expected {} entries for {} qubits, found {}",
                dim * dim,
                self.n_qubits,
                self.matrix.len()
            )));
        }
        let m = CMatrix::from_row_iterator(
            dim,
            dim,
            self.matrix.into_iter().map(|[re, im]| Complex64::new(re, im)),
        );
        DensityMatrix::new(m)
    }
}

// ---------------------------------------------------------------------------

/// A mixture written as weighted pure branches, `{(φ_k, p_k)}`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    branches: Vec<(PureState, f64)>,
}

impl Ensemble {
    pub fn new(branches: Vec<(PureState, f64)>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(Error::InvalidState("empty ensemble".into()));
        };
        let n = first.0.n_qubits();
        if let Some((s, _)) = branches.iter().find(|(s, _)| s.n_qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.n_qubits(),
            });
        }
        if branches.iter().any(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidState("branch probability outside [0,1]".into()));
        }
        let total: f64 = branches.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!(
                "branch probabilities sum to {total}"
            )));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(PureState, f64)] {
        &self.branches
    }

    pub fn densify(&self) -> DensityMatrix {
        let n = self.branches[0].0.n_qubits();
        let dim = 1usize << n;
        let m = self.branches.iter().fold(CMatrix::zeros(dim, dim), |acc, (s, p)| {
            let v = s.amplitudes();
            acc + (v * v.adjoint()) * Complex64::from(*p)
        });
        DensityMatrix::from_raw(n, m)
    }
}
