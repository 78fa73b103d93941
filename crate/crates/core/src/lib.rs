//! Exact simulation of qubit-loss correction for neutral atoms in an
//! addressable lattice.
//!
//! A logical qubit is stored in the four-qubit GBP erasure code. A lost atom
//! is traced out of the register, detected by a QND sweep, replaced by a
//! fresh `|0⟩` atom and the code state is rebuilt by one projective
//! measurement, a Hadamard and three CNOTs, with no ancillas.
//!
//! Modules:
//! * [`state`]: dense pure and mixed states, partial trace, measurement.
//! * [`circuit`]: gates, circuits and their text format.
//! * [`channel`]: Choi matrices and Kraus channels.
//! * [`code`]: the GBP code and the erasure-condition verifier.
//! * [`loss`]: loss, reinsertion, QND sweeps.
//! * [`correction`]: the recovery circuit.
//! * [`cavity`]: feasibility of the dispersive QND measurement.
//! * [`leakage`]: hyperfine-level leakage identification.
//! * [`montecarlo`]: stochastic failure-rate estimation.

pub mod cavity;
pub mod channel;
pub mod circuit;
pub mod code;
pub mod correction;
pub mod error;
pub mod leakage;
pub mod loss;
pub mod montecarlo;
pub mod state;

pub use channel::{choi_of, Channel, ChoiMatrix, KrausChannel};
pub use circuit::{Circuit, Gate, GateKind};
pub use code::{encode, encode_state, logical_one, logical_zero, loss_permutation, verify_erasure_code, CodeSpec, LogicalQubit};
pub use correction::{correct_after_loss, correction_circuit, destructive_measure_replace, CorrectionOutcome, MeasurementMode};
pub use error::{Error, Result};
pub use loss::{apply_loss, insert_fresh, loss_reset_channel, qnd_sweep, reset_kraus, LossEvent, Register};
pub use state::{DensityMatrix, Ensemble, Measurement, PureState};

pub use num_complex::Complex64;
