//! The four-qubit Grassl-Beth-Pellizzari erasure code.
//!
//! ```text
//! |0⟩_L = (|0000⟩ + |1111⟩)/√2
//! |1⟩_L = (|0011⟩ + |1100⟩)/√2
//! ```

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::state::{apply_left, check_qubit, CMatrix, DensityMatrix, PureState, ALGEBRAIC_TOL, PSD_TOL};

pub const GBP_PHYSICAL_QUBITS: usize = 4;

/// `c0|0⟩_L + c1|1⟩_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalQubit {
    c0: Complex64,
    c1: Complex64,
}

impl LogicalQubit {
    pub fn new(c0: Complex64, c1: Complex64) -> Result<Self> {
        let norm = c0.norm_sqr() + c1.norm_sqr();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!(
                "logical amplitudes have squared norm {norm}"
            )));
        }
        Ok(Self { c0, c1 })
    }

    pub fn real(c0: f64, c1: f64) -> Result<Self> {
        Self::new(Complex64::from(c0), Complex64::from(c1))
    }

    /// Haar-random logical state.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                return Self {
                    c0: Complex64::new(g[0], g[1]) / norm,
                    c1: Complex64::new(g[2], g[3]) / norm,
                };
            }
        }
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }
}

fn gbp_codeword(a: usize, b: usize) -> PureState {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let mut amps = vec![Complex64::from(0.0); 16];
    amps[a] = h;
    amps[b] = h;
    PureState::new(amps).expect("codeword is normalized")
}

pub fn logical_zero() -> PureState {
    gbp_codeword(0b0000, 0b1111)
}

pub fn logical_one() -> PureState {
    gbp_codeword(0b0011, 0b1100)
}

/// The encoded pure state as a vector.
pub fn encode_state(lq: &LogicalQubit) -> PureState {
    let amps = logical_zero()
        .amplitudes()
        .iter()
        .zip(logical_one().amplitudes().iter())
        .map(|(z, o)| lq.c0 * z + lq.c1 * o)
        .collect();
    PureState::new(amps).expect("superposition of orthonormal codewords is normalized")
}

pub fn encode(lq: &LogicalQubit) -> DensityMatrix {
    encode_state(lq).to_density()
}

/// A two-dimensional code on `n_physical` qubits.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    n_physical: usize,
    codewords: [PureState; 2],
}

impl CodeSpec {
    pub fn new(codeword_0: PureState, codeword_1: PureState) -> Result<Self> {
        let n = codeword_0.n_qubits();
        let overlap = codeword_0.inner(&codeword_1)?;
        if overlap.norm() > ALGEBRAIC_TOL {
            return Err(Error::InvalidState(format!(
                "codewords are not orthogonal (overlap {overlap})"
            )));
        }
        Ok(Self {
            n_physical: n,
            codewords: [codeword_0, codeword_1],
        })
    }

    pub fn gbp() -> Self {
        Self::new(logical_zero(), logical_one()).expect("GBP codewords are orthonormal")
    }

    /// `{|00⟩, |11⟩}`: detects nothing about phase, so not an erasure code.
    pub fn repetition_2() -> Self {
        Self::new(
            PureState::from_bits("00").expect("valid"),
            PureState::from_bits("11").expect("valid"),
        )
        .expect("orthonormal")
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn codeword(&self, k: usize) -> &PureState {
        &self.codewords[k]
    }
}

pub const PAULI_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

pub fn pauli(index: usize) -> CMatrix {
    let (o, z, i) = (Complex64::from(1.0), Complex64::from(0.0), Complex64::i());
    let entries = match index {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        3 => [o, z, z, -o],
        _ => panic!("pauli index {index} out of range"),
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// Outcome of the erasure condition check at one position.
#[derive(Debug, Clone)]
pub struct ErasureReport {
    pub position: usize,
    pub correctable: bool,
    /// `λ_ab` taken from `⟨0_L|E_a†E_b|0_L⟩`, Paulis ordered I, X, Y, Z.
    pub gram: [[Complex64; 4]; 4],
    /// Largest `|⟨0_L|E_a†E_b|1_L⟩|` (and its mirror) over all pairs.
    pub max_off_diagonal: f64,
    /// Largest `|⟨0_L|E_a†E_b|0_L⟩ − ⟨1_L|E_a†E_b|1_L⟩|` over all pairs.
    pub max_diagonal_spread: f64,
}

/// Checks `⟨i_L|E_a†E_b|j_L⟩ = λ_ab δ_ij` for all single-qubit Paulis
/// `E_a, E_b` supported on `position`.
#[allow(clippy::needless_range_loop)]
pub fn verify_erasure_code(code: &CodeSpec, position: usize) -> Result<ErasureReport> {
    let n = code.n_physical;
    check_qubit(position, n)?;
    let vecs: Vec<CMatrix> = code
        .codewords
        .iter()
        .map(|c| CMatrix::from_column_slice(c.amplitudes().len(), 1, c.amplitudes().as_slice()))
        .collect();

    let mut gram = [[Complex64::from(0.0); 4]; 4];
    let mut max_off: f64 = 0.0;
    let mut max_spread: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let op = pauli(a).adjoint() * pauli(b);
            let acted: Vec<CMatrix> = vecs.iter().map(|v| apply_left(v, n, &[position], &op)).collect();
            let elem = |i: usize, j: usize| (vecs[i].adjoint() * &acted[j])[(0, 0)];
            let (g00, g11, g01, g10) = (elem(0, 0), elem(1, 1), elem(0, 1), elem(1, 0));
            gram[a][b] = g00;
            max_off = max_off.max(g01.norm()).max(g10.norm());
            max_spread = max_spread.max((g00 - g11).norm());
        }
    }
    Ok(ErasureReport {
        position,
        correctable: max_off <= PSD_TOL && max_spread <= PSD_TOL,
        gram,
        max_off_diagonal: max_off,
        max_diagonal_spread: max_spread,
    })
}

/// Codeword-preserving relabelling taking a loss at `position` to a loss at
/// qubit 1. Each permutation is an involution, so it is its own inverse.
pub fn loss_permutation(position: usize) -> Result<Circuit> {
    check_qubit(position, GBP_PHYSICAL_QUBITS)?;
    let gates = match position {
        1 => vec![],
        2 => vec![Gate::swap(1, 2), Gate::swap(3, 4)],
        3 => vec![Gate::swap(1, 3), Gate::swap(2, 4)],
        _ => vec![Gate::swap(1, 4), Gate::swap(2, 3)],
    };
    let circuit = Circuit::from_gates(gates);
    let u = circuit.unitary(GBP_PHYSICAL_QUBITS)?;
    for cw in [logical_zero(), logical_one()] {
        let image = &u * cw.amplitudes();
        let defect = (image - cw.amplitudes()).camax();
        if defect > ALGEBRAIC_TOL {
            return Err(Error::Domain(format!(
                "permutation for position {position} moves a codeword"
            )));
        }
    }
    Ok(circuit)
}
