//! Recovery of the encoded qubit after a detected loss and reinsertion.
//!
//! With the fresh atom at qubit 1, qubit 2 labels the two branches of the
//! mixture left behind by the loss. Measuring it purifies the state, after
//! which `H(1)`, `CNOT(1,2)`, `CNOT(1,3)`, `CNOT(1,4)` and, for outcome 1,
//! `X(1)` restore the codeword superposition. Loss at another position is
//! first relabelled onto qubit 1 with a codeword-preserving permutation.

use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::code::{encode_state, logical_one, logical_zero, loss_permutation, LogicalQubit, GBP_PHYSICAL_QUBITS};
use crate::error::{Error, Result};
use crate::loss::{apply_loss, insert_fresh};
use crate::state::{check_qubit, DensityMatrix};

/// Qubit whose measurement selects the branch, in the permuted frame.
pub const LABEL_QUBIT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurementMode {
    #[default]
    Projective,
    /// Measure destructively, replace the atom with `|0⟩`, then flip it if
    /// the outcome was 1.
    DestructiveReplace,
}

impl std::str::FromStr for MeasurementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projective" => Ok(Self::Projective),
            "destructive" | "destructive-replace" => Ok(Self::DestructiveReplace),
            other => Err(Error::Domain(format!("unknown measurement mode {other:?}"))),
        }
    }
}

/// `[H(1), CNOT(1,2), CNOT(1,3), CNOT(1,4)]`, then `X(1)` iff `measured_bit = 1`.
pub fn correction_circuit(measured_bit: u8) -> Circuit {
    let mut c = Circuit::from_gates(vec![
        Gate::h(1),
        Gate::cnot(1, 2),
        Gate::cnot(1, 3),
        Gate::cnot(1, 4),
    ]);
    if measured_bit & 1 == 1 {
        c.push(Gate::x(1));
    }
    c
}

/// Measures `qubit` destructively, puts a `|0⟩` atom in its place and
/// flips it when the outcome was 1. Leaves the same state as a projective
/// measurement with the same outcome.
pub fn destructive_measure_replace<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    qubit: usize,
    forced: Option<u8>,
    rng: &mut R,
) -> Result<(u8, f64, DensityMatrix)> {
    let m = rho.measure_with(qubit, forced, rng)?;
    let emptied = apply_loss(&m.collapsed, qubit)?;
    let mut replaced = insert_fresh(&emptied, qubit)?;
    if m.outcome == 1 {
        replaced = replaced.apply_gate(&Gate::x(qubit))?;
    }
    Ok((m.outcome, m.probability, replaced))
}

#[derive(Debug, Clone)]
pub struct CorrectionOutcome {
    pub measured_bit: u8,
    pub branch_probability: f64,
    /// Every gate applied, in order: permutation, recovery, inverse permutation.
    pub circuit_applied: Circuit,
    /// State right after the label measurement, in the permuted frame.
    pub collapsed: DensityMatrix,
    pub output: DensityMatrix,
    /// `Tr(Π_code ρ)`: weight of the output inside the code space.
    pub code_space_weight: f64,
    /// Largest register seen at any stage.
    pub max_register_qubits: usize,
}

impl CorrectionOutcome {
    /// Fidelity of the output with the encoding of `reference`.
    pub fn recovered_fidelity(&self, reference: &LogicalQubit) -> f64 {
        self.output
            .fidelity(&encode_state(reference))
            .expect("output is a 4-qubit state")
    }
}

/// Runs the recovery on the post-reinsertion state `rho_e`.
pub fn correct_after_loss<R: Rng + ?Sized>(
    rho_e: &DensityMatrix,
    lost_site: usize,
    mode: MeasurementMode,
    forced_bit: Option<u8>,
    rng: &mut R,
) -> Result<CorrectionOutcome> {
    if rho_e.n_qubits() != GBP_PHYSICAL_QUBITS {
        return Err(Error::DimensionMismatch {
            expected: GBP_PHYSICAL_QUBITS,
            got: rho_e.n_qubits(),
        });
    }
    check_qubit(lost_site, GBP_PHYSICAL_QUBITS)?;
    rho_e.validate()?;

    let perm = loss_permutation(lost_site)?;
    let unperm = perm.inverse()?;
    let mut max_qubits = rho_e.n_qubits();

    let permuted = rho_e.apply_circuit(&perm)?;
    let (bit, probability, collapsed) = match mode {
        MeasurementMode::Projective => {
            let m = permuted.measure_with(LABEL_QUBIT, forced_bit, rng)?;
            (m.outcome, m.probability, m.collapsed)
        }
        MeasurementMode::DestructiveReplace => {
            destructive_measure_replace(&permuted, LABEL_QUBIT, forced_bit, rng)?
        }
    };
    max_qubits = max_qubits.max(collapsed.n_qubits());

    let recovery = correction_circuit(bit);
    let output = collapsed.apply_circuit(&recovery)?.apply_circuit(&unperm)?;
    max_qubits = max_qubits.max(output.n_qubits());

    let mut circuit_applied = perm;
    circuit_applied.extend(&recovery);
    circuit_applied.extend(&unperm);

    let code_space_weight = output.fidelity(&logical_zero())? + output.fidelity(&logical_one())?;
    Ok(CorrectionOutcome {
        measured_bit: bit,
        branch_probability: probability,
        circuit_applied,
        collapsed,
        output,
        code_space_weight,
        max_register_qubits: max_qubits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::encode;
    use crate::state::PureState;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rho_e(lq: &LogicalQubit, site: usize) -> DensityMatrix {
        insert_fresh(&apply_loss(&encode(lq), site).unwrap(), site).unwrap()
    }

    #[test]
    fn circuit_shapes() {
        assert_eq!(correction_circuit(0).to_text(), "H 1\nCNOT 1 2\nCNOT 1 3\nCNOT 1 4\n");
        let c1 = correction_circuit(1);
        assert_eq!(c1.len(), 5);
        assert_eq!(c1.gates().last().unwrap(), &Gate::x(1));
    }

    #[test]
    fn basis_logical_zero_recovers() {
        let lq = LogicalQubit::real(1.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for bit in 0..2 {
            let out = correct_after_loss(&rho_e(&lq, 1), 1, MeasurementMode::Projective, Some(bit), &mut rng).unwrap();
            assert!(out.recovered_fidelity(&lq) > 1.0 - 1e-12);
            assert!((out.branch_probability - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bit_one_branch_collapse() {
        let lq = LogicalQubit::real(0.6, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = correct_after_loss(&rho_e(&lq, 1), 1, MeasurementMode::Projective, Some(1), &mut rng).unwrap();
        let mut amps = vec![Complex64::from(0.0); 16];
        amps[0b0111] = Complex64::from(0.6);
        amps[0b0100] = Complex64::from(0.8);
        let expect = PureState::new(amps).unwrap();
        assert!(out.collapsed.fidelity(&expect).unwrap() > 1.0 - 1e-12);
        // Before the final X the first qubit is still flipped.
        let before_x = out.collapsed.apply_circuit(&correction_circuit(0)).unwrap();
        assert!(before_x.fidelity(&encode_state(&lq)).unwrap() < 1e-12);
    }

    #[test]
    fn sampled_branches_recover_too() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for site in 1..=4 {
            let lq = LogicalQubit::random(&mut rng);
            for mode in [MeasurementMode::Projective, MeasurementMode::DestructiveReplace] {
                let out = correct_after_loss(&rho_e(&lq, site), site, mode, None, &mut rng).unwrap();
                assert!(out.recovered_fidelity(&lq) > 1.0 - 1e-10);
                assert!((out.code_space_weight - 1.0).abs() < 1e-10);
                assert_eq!(out.max_register_qubits, 4);
            }
        }
    }

    #[test]
    fn destructive_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let one = PureState::from_bits("1").unwrap().to_density();
        let one2 = one.tensor(&one).unwrap();
        let (bit, _, out) = destructive_measure_replace(&one2, 2, None, &mut rng).unwrap();
        assert_eq!(bit, 1);
        assert!(out.max_abs_diff(&one2) < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![h.into(), h.into()]).unwrap().to_density();
        let pp = plus.tensor(&plus).unwrap();
        for b in 0..2u8 {
            let (bit, p, out) = destructive_measure_replace(&pp, 1, Some(b), &mut rng).unwrap();
            assert_eq!(bit, b);
            assert!((p - 0.5).abs() < 1e-15);
            let proj = pp.measure_forced(1, b).unwrap().collapsed;
            assert!(out.max_abs_diff(&proj) < 1e-15);
        }
    }

    #[test]
    fn input_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let lq = LogicalQubit::real(1.0, 0.0).unwrap();
        let three = apply_loss(&encode(&lq), 1).unwrap();
        assert!(correct_after_loss(&three, 1, MeasurementMode::Projective, None, &mut rng).is_err());
        assert!(correct_after_loss(&rho_e(&lq, 1), 5, MeasurementMode::Projective, None, &mut rng).is_err());
        assert_eq!("destructive".parse::<MeasurementMode>().unwrap(), MeasurementMode::DestructiveReplace);
        assert!("weak".parse::<MeasurementMode>().is_err());
    }
}
