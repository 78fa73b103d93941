//! Stochastic loss and leakage on an encoded qubit, with periodic QND
//! sweeps, reinsertion and correction.
//!
//! Time advances in abstract cycles. In each cycle every atom still in
//! place is lost with probability `p_loss`; an atom that survives and has
//! not already leaked leaks with probability `p_leak`. A sweep runs after
//! every `sweep_period` cycles and after the last cycle. A sweep interval
//! in which two or more distinct sites were erased is unrecoverable: the
//! trial is flagged as failed and stops.
//!
//! RNG streams: trial `t` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` with stream number `t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{encode, encode_state, LogicalQubit};
use crate::correction::{correct_after_loss, MeasurementMode};
use crate::error::{Error, Result};
use crate::leakage::{Identified, LeakageClassifier, LevelLabel, GROUND};
use crate::loss::{qnd_sweep, QndDetector, Register};

const SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Loss,
    Leak,
}

/// An erasure scheduled at a fixed cycle, in addition to random ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedEvent {
    pub cycle: usize,
    pub site: usize,
    pub kind: EventKind,
    /// Level the atom leaks to; ignored for losses.
    pub leak_level: Option<LevelLabel>,
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub p_loss: f64,
    pub p_leak: f64,
    pub cycles: usize,
    pub sweep_period: usize,
    pub seed: u64,
    pub logical: LogicalQubit,
    pub mode: MeasurementMode,
    pub qnd_phase: f64,
    pub scripted: Vec<ScriptedEvent>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            p_loss: 0.0,
            p_leak: 0.0,
            cycles: 1,
            sweep_period: 1,
            seed: 0,
            logical: LogicalQubit::real(1.0, 0.0).expect("normalized"),
            mode: MeasurementMode::Projective,
            qnd_phase: 0.0,
            scripted: Vec::new(),
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_loss", self.p_loss), ("p_leak", self.p_leak)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} outside [0,1]")));
            }
        }
        if self.sweep_period == 0 {
            return Err(Error::Domain("sweep_period must be at least 1".into()));
        }
        for ev in &self.scripted {
            if ev.site == 0 || ev.site > SITES {
                return Err(Error::QubitOutOfRange {
                    index: ev.site,
                    n_qubits: SITES,
                });
            }
            if let Some(l) = ev.leak_level {
                if l.is_qubit() {
                    return Err(Error::Domain(format!("{l} is a qubit level, not a leak")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub cycle: usize,
    pub interval: usize,
    pub site: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub failed: bool,
    pub n_losses: usize,
    pub n_leaks: usize,
    pub n_corrections: usize,
    pub final_fidelity: f64,
    pub events: Vec<EventRecord>,
}

fn leak_targets() -> Vec<LevelLabel> {
    LevelLabel::all().into_iter().filter(|l| !l.is_qubit()).collect()
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    run_trial_indexed(cfg, 0)
}

pub fn run_trial_indexed(cfg: &TrialConfig, trial: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let mut rng = trial_rng(cfg.seed, trial);
    let detector = QndDetector::new(cfg.qnd_phase);
    let classifier = LeakageClassifier::default();
    let targets = leak_targets();

    let mut reg = Register::full(encode(&cfg.logical));
    let mut leaked: [Option<LevelLabel>; SITES] = [None; SITES];
    let mut erased = [false; SITES];
    let mut result = TrialResult {
        failed: false,
        n_losses: 0,
        n_leaks: 0,
        n_corrections: 0,
        final_fidelity: 1.0,
        events: Vec::new(),
    };

    'cycles: for cycle in 0..cfg.cycles {
        let interval = cycle / cfg.sweep_period;
        let scripted: Vec<&ScriptedEvent> = cfg.scripted.iter().filter(|e| e.cycle == cycle).collect();
        for site in 1..=SITES {
            let idx = site - 1;
            let in_place = reg.occupancy()[idx] || leaked[idx].is_some();
            if !in_place {
                continue;
            }
            let forced = scripted.iter().find(|e| e.site == site);
            let kind = match forced {
                Some(e) => Some(e.kind),
                None if rng.random::<f64>() < cfg.p_loss => Some(EventKind::Loss),
                None if leaked[idx].is_none() && rng.random::<f64>() < cfg.p_leak => Some(EventKind::Leak),
                None => None,
            };
            match kind {
                Some(EventKind::Loss) => {
                    if leaked[idx].take().is_none() {
                        reg = reg.lose(site)?;
                    }
                    result.n_losses += 1;
                }
                Some(EventKind::Leak) if leaked[idx].is_none() => {
                    let level = match forced.and_then(|e| e.leak_level) {
                        Some(l) => l,
                        None => targets[rng.random_range(0..targets.len())],
                    };
                    // The qubit's information leaves the computational space.
                    reg = reg.lose(site)?;
                    leaked[idx] = Some(level);
                    result.n_leaks += 1;
                }
                _ => continue,
            }
            erased[idx] = true;
            result.events.push(EventRecord {
                cycle,
                interval,
                site,
                kind: kind.expect("matched above"),
            });
            if erased.iter().filter(|&&e| e).count() >= 2 {
                // Unrecoverable; the sweep that would follow only confirms it.
                result.failed = true;
                for ev in qnd_sweep(reg.occupancy()) {
                    reg = reg.insert_fresh(ev.site)?;
                }
                break 'cycles;
            }
        }

        let end_of_interval = (cycle + 1) % cfg.sweep_period == 0 || cycle + 1 == cfg.cycles;
        if !end_of_interval {
            continue;
        }

        let swept = detector.sweep(&reg)?;
        reg = detector.compensate(&swept.register)?;
        if let Some(ev) = swept.events.first() {
            let idx = ev.site - 1;
            if let Some(level) = leaked[idx].take() {
                let c = classifier.classify(level);
                debug_assert_eq!(c.identified, Identified::Leaked(level));
                let executed = c.plan.clone().then(&c.recovery_plan());
                if executed.simulate(level) != GROUND {
                    return Err(Error::Domain(format!("leak recovery from {level} missed |0⟩")));
                }
            }
            reg = reg.insert_fresh(ev.site)?;
            let outcome = correct_after_loss(reg.state(), ev.site, cfg.mode, None, &mut rng)?;
            reg = Register::full(outcome.output);
            result.n_corrections += 1;
        }
        erased = [false; SITES];
    }

    result.final_fidelity = if reg.is_full() {
        reg.state().fidelity(&encode_state(&cfg.logical))?
    } else {
        0.0
    };
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEstimate {
    pub trials: usize,
    pub failures: usize,
    pub p_fail_hat: f64,
    pub stderr: f64,
}

/// Runs `n_trials` independent trials (in parallel) and returns the mean
/// failure indicator with its binomial standard error, plus every result
/// in trial order.
pub fn run_trials(cfg: &TrialConfig, n_trials: usize) -> Result<Vec<TrialResult>> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    cfg.validate()?;
    (0..n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial_indexed(cfg, t))
        .collect()
}

pub fn summarize(results: &[TrialResult]) -> FailureEstimate {
    let trials = results.len();
    let failures = results.iter().filter(|r| r.failed).count();
    let p = failures as f64 / trials as f64;
    FailureEstimate {
        trials,
        failures,
        p_fail_hat: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
    }
}

pub fn estimate_failure(cfg: &TrialConfig, n_trials: usize) -> Result<FailureEstimate> {
    Ok(summarize(&run_trials(cfg, n_trials)?))
}

/// Probability that at least two of four sites are erased when each is
/// erased independently with probability `q`.
pub fn interval_failure_probability(q: f64) -> f64 {
    1.0 - (1.0 - q).powi(4) - 4.0 * q * (1.0 - q).powi(3)
}

/// Closed-form trial failure probability under the model above.
pub fn analytic_failure(cfg: &TrialConfig) -> f64 {
    let per_cycle_survive = (1.0 - cfg.p_loss) * (1.0 - cfg.p_leak);
    let full = cfg.cycles / cfg.sweep_period;
    let rest = cfg.cycles % cfg.sweep_period;
    let interval = |len: usize| interval_failure_probability(1.0 - per_cycle_survive.powi(len as i32));
    let mut survive = (1.0 - interval(cfg.sweep_period)).powi(full as i32);
    if rest > 0 {
        survive *= 1.0 - interval(rest);
    }
    1.0 - survive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leakage::LevelLabel;

    fn scripted(cycle: usize, site: usize, kind: EventKind) -> ScriptedEvent {
        ScriptedEvent {
            cycle,
            site,
            kind,
            leak_level: None,
        }
    }

    #[test]
    fn noiseless_trial() {
        let cfg = TrialConfig {
            cycles: 5,
            logical: LogicalQubit::real(0.6, 0.8).unwrap(),
            ..Default::default()
        };
        let r = run_trial(&cfg).unwrap();
        assert!(!r.failed);
        assert!((r.final_fidelity - 1.0).abs() < 1e-12);
        assert_eq!((r.n_losses, r.n_leaks, r.n_corrections), (0, 0, 0));
    }

    #[test]
    fn single_scripted_loss_is_corrected() {
        for site in 1..=4 {
            let cfg = TrialConfig {
                cycles: 6,
                sweep_period: 3,
                logical: LogicalQubit::real(0.6, -0.8).unwrap(),
                scripted: vec![scripted(1, site, EventKind::Loss)],
                seed: site as u64,
                ..Default::default()
            };
            let r = run_trial(&cfg).unwrap();
            assert!(!r.failed);
            assert_eq!(r.n_corrections, 1);
            assert!(r.final_fidelity > 1.0 - 1e-10);
        }
    }

    #[test]
    fn two_losses_in_one_interval_fail() {
        let cfg = TrialConfig {
            cycles: 4,
            sweep_period: 2,
            scripted: vec![scripted(0, 1, EventKind::Loss), scripted(1, 3, EventKind::Loss)],
            ..Default::default()
        };
        assert!(run_trial(&cfg).unwrap().failed);
        // Same two losses in different intervals are both corrected.
        let cfg = TrialConfig {
            scripted: vec![scripted(0, 1, EventKind::Loss), scripted(2, 3, EventKind::Loss)],
            ..cfg
        };
        let r = run_trial(&cfg).unwrap();
        assert!(!r.failed);
        assert_eq!(r.n_corrections, 2);
    }

    #[test]
    fn scripted_leak_routes_through_classifier() {
        let cfg = TrialConfig {
            cycles: 2,
            logical: LogicalQubit::real(0.8, 0.6).unwrap(),
            scripted: vec![ScriptedEvent {
                cycle: 0,
                site: 2,
                kind: EventKind::Leak,
                leak_level: Some(LevelLabel::new(2, -1).unwrap()),
            }],
            ..Default::default()
        };
        let r = run_trial(&cfg).unwrap();
        assert_eq!((r.n_leaks, r.n_corrections), (1, 1));
        assert!(r.final_fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn seed_determinism() {
        let cfg = TrialConfig {
            p_loss: 0.2,
            p_leak: 0.1,
            cycles: 10,
            sweep_period: 2,
            seed: 77,
            logical: LogicalQubit::real(0.6, 0.8).unwrap(),
            ..Default::default()
        };
        assert_eq!(run_trial(&cfg).unwrap(), run_trial(&cfg).unwrap());
        let a = estimate_failure(&cfg, 200).unwrap();
        let b = estimate_failure(&cfg, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validation() {
        let bad = TrialConfig {
            sweep_period: 0,
            ..Default::default()
        };
        assert!(run_trial(&bad).is_err());
        let bad = TrialConfig {
            p_loss: 1.5,
            ..Default::default()
        };
        assert!(run_trial(&bad).is_err());
        assert!(estimate_failure(&TrialConfig::default(), 0).is_err());
    }

    #[test]
    fn zero_loss_estimate() {
        let e = estimate_failure(&TrialConfig::default(), 100).unwrap();
        assert_eq!(e.p_fail_hat, 0.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn analytic_model_edges() {
        assert_eq!(interval_failure_probability(0.0), 0.0);
        assert!((interval_failure_probability(1.0) - 1.0).abs() < 1e-15);
        let cfg = TrialConfig {
            p_loss: 0.01,
            ..Default::default()
        };
        assert!((analytic_failure(&cfg) - interval_failure_probability(0.01)).abs() < 1e-15);
    }
}
