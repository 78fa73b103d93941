//! Qubit loss, QND detection and conditional reinsertion.
//!
//! Losing an atom traces its qubit out of the register. Reinserting a fresh
//! ground-state atom at the vacated site tensors `|0⟩⟨0|` back in. Together
//! the two steps act on the lost qubit as the reset channel with Kraus
//! operators `{|0⟩⟨0|, |0⟩⟨1|}`.

use num_complex::Complex64;

use crate::channel::Channel;
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::state::{check_qubit, insert_factor, trace_out, CMatrix, DensityMatrix, ONE};

pub fn ground_state() -> DensityMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = ONE;
    DensityMatrix::new(m).expect("|0⟩⟨0| is a state")
}

/// Removes the atom at `site`.
pub fn apply_loss(rho: &DensityMatrix, site: usize) -> Result<DensityMatrix> {
    check_qubit(site, rho.n_qubits())?;
    rho.partial_trace(site)
}

/// Inserts a `|0⟩` atom so that it becomes qubit `site` of the enlarged
/// register.
pub fn insert_fresh(rho: &DensityMatrix, site: usize) -> Result<DensityMatrix> {
    rho.insert_qubit(site, &ground_state())
}

/// `{|0⟩⟨0|, |0⟩⟨1|}`.
pub fn reset_kraus() -> Vec<CMatrix> {
    let mut k0 = CMatrix::zeros(2, 2);
    k0[(0, 0)] = ONE;
    let mut k1 = CMatrix::zeros(2, 2);
    k1[(0, 1)] = ONE;
    vec![k0, k1]
}

/// Loss followed by ground-state reinsertion on a single qubit.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossResetChannel;

pub fn loss_reset_channel() -> LossResetChannel {
    LossResetChannel
}

impl LossResetChannel {
    /// Applies the channel to qubit `site` of a joint state.
    pub fn apply_at(&self, rho: &DensityMatrix, site: usize) -> Result<DensityMatrix> {
        insert_fresh(&apply_loss(rho, site)?, site)
    }
}

impl Channel for LossResetChannel {
    fn dim_in(&self) -> usize {
        2
    }

    fn dim_out(&self) -> usize {
        2
    }

    fn apply_operator(&self, op: &CMatrix) -> CMatrix {
        // Tracing the only qubit leaves a 1×1 scalar; reinsert into it.
        let traced = trace_out(op, 1, 1);
        insert_factor(&traced, 0, 1, ground_state().matrix())
    }
}

/// Source of replacement atoms. `depolarizing = 0` delivers exactly `|0⟩`;
/// otherwise the delivered state is `(1 − p)|0⟩⟨0| + p·I/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSource {
    depolarizing: f64,
}

impl Default for ConditionalSource {
    fn default() -> Self {
        Self { depolarizing: 0.0 }
    }
}

impl ConditionalSource {
    pub fn new(depolarizing: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&depolarizing) {
            return Err(Error::Domain(format!(
                "depolarizing parameter {depolarizing} outside [0,1]"
            )));
        }
        Ok(Self { depolarizing })
    }

    pub fn delivered_state(&self) -> DensityMatrix {
        let p = self.depolarizing;
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::from(1.0 - p / 2.0);
        m[(1, 1)] = Complex64::from(p / 2.0);
        DensityMatrix::new(m).expect("mixture of states")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossEvent {
    pub site: usize,
    pub detected: bool,
}

/// Reports every vacant site. `occupancy[k]` describes site `k + 1`.
pub fn qnd_sweep(occupancy: &[bool]) -> Vec<LossEvent> {
    occupancy
        .iter()
        .enumerate()
        .filter(|(_, &present)| !present)
        .map(|(k, _)| LossEvent {
            site: k + 1,
            detected: true,
        })
        .collect()
}

/// A fixed set of lattice sites, some of which may be vacant. The density
/// matrix covers only the occupied sites, in site order.
#[derive(Debug, Clone)]
pub struct Register {
    occupancy: Vec<bool>,
    state: DensityMatrix,
}

impl Register {
    pub fn full(state: DensityMatrix) -> Self {
        Self {
            occupancy: vec![true; state.n_qubits()],
            state,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn is_full(&self) -> bool {
        self.occupancy.iter().all(|&o| o)
    }

    pub fn vacancies(&self) -> usize {
        self.occupancy.iter().filter(|&&o| !o).count()
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn into_state(self) -> DensityMatrix {
        self.state
    }

    /// Qubit index within the state for an occupied `site`.
    fn qubit_of(&self, site: usize) -> usize {
        self.occupancy[..site].iter().filter(|&&o| o).count()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        check_qubit(site, self.n_sites())
    }

    pub fn lose(&self, site: usize) -> Result<Register> {
        self.check_site(site)?;
        if !self.occupancy[site - 1] {
            return Err(Error::ProtocolOrder(format!("site {site} is already vacant")));
        }
        let state = apply_loss(&self.state, self.qubit_of(site))?;
        let mut occupancy = self.occupancy.clone();
        occupancy[site - 1] = false;
        Ok(Register { occupancy, state })
    }

    pub fn insert(&self, site: usize, source: &ConditionalSource) -> Result<Register> {
        self.check_site(site)?;
        if self.occupancy[site - 1] {
            return Err(Error::ProtocolOrder(format!("site {site} is not vacant")));
        }
        let q = self.qubit_of(site) + 1;
        let state = self.state.insert_qubit(q, &source.delivered_state())?;
        let mut occupancy = self.occupancy.clone();
        occupancy[site - 1] = true;
        Ok(Register { occupancy, state })
    }

    pub fn insert_fresh(&self, site: usize) -> Result<Register> {
        self.insert(site, &ConditionalSource::default())
    }

    fn map_present(&self, gate_for: impl Fn(usize) -> Gate) -> Result<Register> {
        let n = self.state.n_qubits();
        let state = (1..=n).try_fold(self.state.clone(), |rho, q| rho.apply_gate(&gate_for(q)))?;
        Ok(Register {
            occupancy: self.occupancy.clone(),
            state,
        })
    }
}

/// Dispersive presence detector. The probe imprints a deterministic
/// relative phase `diag(1, e^{iθ})` on every atom it finds; `θ = 0` makes
/// it an exact identity on the qubits.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QndDetector {
    pub relative_phase: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub events: Vec<LossEvent>,
    pub register: Register,
}

impl QndDetector {
    pub fn new(relative_phase: f64) -> Self {
        Self { relative_phase }
    }

    pub fn sweep(&self, register: &Register) -> Result<SweepResult> {
        let events = qnd_sweep(register.occupancy());
        let register = if self.relative_phase == 0.0 {
            register.clone()
        } else {
            register.map_present(|q| Gate::phase(q, self.relative_phase))?
        };
        Ok(SweepResult { events, register })
    }

    /// Undoes the phase imprinted by one sweep on the atoms now present.
    /// Atoms inserted after the sweep must not be compensated, so callers
    /// compensate before reinsertion.
    pub fn compensate(&self, register: &Register) -> Result<Register> {
        if self.relative_phase == 0.0 {
            return Ok(register.clone());
        }
        register.map_present(|q| Gate::phase(q, -self.relative_phase))
    }
}
