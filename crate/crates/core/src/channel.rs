//! Linear maps on operators and their Choi matrices.
//!
//! The Choi matrix is stored unnormalized,
//! `J(E) = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, so `Tr J = dim_in`, the identity
//! channel maps to `dim_in·|Φ⁺⟩⟨Φ⁺|` and `Tr_out J = I`. Use
//! [`ChoiMatrix::normalized`] for the unit-trace state form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{hermitian_eigenvalues, max_abs_diff, CMatrix, ALGEBRAIC_TOL, ONE, PSD_TOL, ZERO};

/// A map on `dim_in × dim_in` operators producing `dim_out × dim_out` ones.
///
/// `apply_operator` must accept arbitrary (non-Hermitian, traceless)
/// matrices, since Choi construction feeds it matrix units.
pub trait Channel {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply_operator(&self, op: &CMatrix) -> CMatrix;
}

/// Channel given by a Kraus set, `X ↦ Σ K X K†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates shapes and completeness `Σ K†K = I`.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidChannel("empty Kraus set".into()));
        };
        let (rows, cols) = first.shape();
        if operators.iter().any(|k| k.shape() != (rows, cols)) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        let sum = operators
            .iter()
            .fold(CMatrix::zeros(cols, cols), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs_diff(&sum, &CMatrix::identity(cols, cols));
        if defect > ALGEBRAIC_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus set is not complete (defect {defect:e})"
            )));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }
}

impl Channel for KrausChannel {
    fn dim_in(&self) -> usize {
        self.operators[0].ncols()
    }

    fn dim_out(&self) -> usize {
        self.operators[0].nrows()
    }

    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        let d = self.dim_out();
        self.operators
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * op * k.adjoint())
    }
}

/// Wraps a closure as a [`Channel`].
pub struct FnChannel<F> {
    dim_in: usize,
    dim_out: usize,
    f: F,
}

impl<F: Fn(&CMatrix) -> CMatrix> FnChannel<F> {
    pub fn new(dim_in: usize, dim_out: usize, f: F) -> Self {
        Self { dim_in, dim_out, f }
    }
}

impl<F: Fn(&CMatrix) -> CMatrix> Channel for FnChannel<F> {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        (self.f)(op)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: CMatrix,
}

fn matrix_unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    m
}

/// Builds the Choi matrix of `channel` after checking, on the matrix-unit
/// basis, that it is trace preserving and linear.
pub fn choi_of<C: Channel + ?Sized>(channel: &C) -> Result<ChoiMatrix> {
    let (din, dout) = (channel.dim_in(), channel.dim_out());
    let mut images = Vec::with_capacity(din * din);
    for i in 0..din {
        for j in 0..din {
            let img = channel.apply_operator(&matrix_unit(din, i, j));
            if img.shape() != (dout, dout) {
                return Err(Error::InvalidChannel(format!(
                    "image has shape {:?}, expected {dout}x{dout}",
                    img.shape()
                )));
            }
            let tr = img.trace();
            let expected = if i == j { ONE } else { ZERO };
            if (tr - expected).norm() > ALGEBRAIC_TOL {
                return Err(Error::InvalidChannel(format!(
                    "not trace preserving: Tr E(|{i}⟩⟨{j}|) = {tr}"
                )));
            }
            images.push(img);
        }
    }

    // Linearity probe on a fixed dense combination of matrix units.
    let coeff = |i: usize, j: usize| Complex64::new(0.3 + i as f64 * 0.7 - j as f64 * 0.2, 0.1 * (i * din + j) as f64 - 0.4);
    let mut probe = CMatrix::zeros(din, din);
    let mut expected = CMatrix::zeros(dout, dout);
    for i in 0..din {
        for j in 0..din {
            probe[(i, j)] = coeff(i, j);
            expected += &images[i * din + j] * coeff(i, j);
        }
    }
    let got = channel.apply_operator(&probe);
    let scale = expected.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if got.shape() != expected.shape() || max_abs_diff(&got, &expected) > 1e-10 * scale {
        return Err(Error::InvalidChannel("channel is not linear".into()));
    }

    let mut matrix = CMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let img = &images[i * din + j];
            for a in 0..dout {
                for b in 0..dout {
                    matrix[(i * dout + a, j * dout + b)] = img[(a, b)];
                }
            }
        }
    }
    Ok(ChoiMatrix {
        dim_in: din,
        dim_out: dout,
        matrix,
    })
}

impl ChoiMatrix {
    /// `Σ_k |K_k⟫⟪K_k|` with `|K⟫ = Σ_i |i⟩ ⊗ K|i⟩`. Independent of
    /// [`choi_of`]; no completeness check is made here.
    pub fn from_kraus(operators: &[CMatrix]) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidChannel("empty Kraus set".into()));
        };
        let (dout, din) = first.shape();
        let n = din * dout;
        let mut matrix = CMatrix::zeros(n, n);
        for k in operators {
            if k.shape() != (dout, din) {
                return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
            }
            let v = crate::state::CVector::from_fn(n, |idx, _| k[(idx % dout, idx / dout)]);
            matrix += &v * v.adjoint();
        }
        Ok(Self {
            dim_in: din,
            dim_out: dout,
            matrix,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Unit-trace form `J / dim_in`.
    pub fn normalized(&self) -> CMatrix {
        &self.matrix / Complex64::from(self.dim_in as f64)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr_out J`, equal to the identity for trace-preserving maps.
    pub fn trace_output(&self) -> CMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        CMatrix::from_fn(din, din, |i, j| {
            (0..dout).map(|a| self.matrix[(i * dout + a, j * dout + a)]).sum()
        })
    }

    pub fn is_completely_positive(&self) -> bool {
        self.eigenvalues()[0] >= -PSD_TOL
    }

    pub fn is_trace_preserving(&self) -> bool {
        max_abs_diff(&self.trace_output(), &CMatrix::identity(self.dim_in, self.dim_in)) <= PSD_TOL
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&e| e.abs() > tol).count()
    }

    pub fn max_abs_diff(&self, other: &ChoiMatrix) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        max_abs_diff(&self.matrix, &other.matrix)
    }
}
