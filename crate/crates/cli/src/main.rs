use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use atomloss::cavity::{self, CavityParams, OpticalDensity};
use atomloss::code::{verify_erasure_code, CodeSpec};
use atomloss::loss::{apply_loss, insert_fresh, QndDetector, Register};
use atomloss::montecarlo::{analytic_failure, run_trials, summarize, TrialConfig};
use atomloss::{correct_after_loss, encode, Complex64, DensityMatrix, LogicalQubit, MeasurementMode};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

mod config;

#[derive(Parser)]
#[command(name = "atomloss", version, about = "Qubit-loss detection and correction on a 4-atom code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Amplitudes {
    /// Real part of the |0_L> amplitude.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c0: f64,
    /// Real part of the |1_L> amplitude.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c0_im: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c1_im: f64,
}

impl Amplitudes {
    /// The amplitudes rescaled to unit norm.
    fn logical(&self) -> Result<LogicalQubit> {
        let c0 = Complex64::new(self.c0, self.c0_im);
        let c1 = Complex64::new(self.c1, self.c1_im);
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            bail!("logical amplitudes must be finite and not both zero");
        }
        Ok(LogicalQubit::new(c0 / norm, c1 / norm)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Projective,
    Destructive,
}

impl From<Mode> for MeasurementMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Projective => MeasurementMode::Projective,
            Mode::Destructive => MeasurementMode::DestructiveReplace,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeChoice {
    Gbp,
    Repetition2,
}

#[derive(Subcommand)]
enum Command {
    /// Write the encoded 4-qubit density matrix as a JSON fixture.
    Encode {
        #[command(flatten)]
        amplitudes: Amplitudes,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Trace out one atom, optionally reinserting a fresh |0>.
    Lose {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        site: usize,
        #[arg(long)]
        reinsert: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the recovery on a post-reinsertion 4-qubit state.
    Correct {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        lost_site: usize,
        /// Post-select this label outcome instead of sampling it.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1), conflicts_with = "seed")]
        force_bit: Option<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Projective)]
        mode: Mode,
        /// Write the applied gate list to this file.
        #[arg(long)]
        emit_circuit: Option<PathBuf>,
        /// Write the corrected state fixture to this file.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Encode, lose, detect, reinsert and correct in one go.
    RunProtocol {
        #[command(flatten)]
        amplitudes: Amplitudes,
        #[arg(long, default_value_t = 1)]
        lost_site: usize,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1), conflicts_with = "seed")]
        force_bit: Option<u8>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Projective)]
        mode: Mode,
        /// Relative phase the detection sweep imprints (compensated).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        qnd_phase: f64,
    },
    /// Tabulate cavity-detection feasibility as CSV.
    SweepCavity {
        /// `key = value` file; flags given on the command line win.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        finesse: Option<Vec<f64>>,
        /// δ/Γ values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        detuning_ratio: Option<Vec<f64>>,
        /// Probe photon numbers.
        #[arg(long, value_delimiter = ',')]
        photons: Option<Vec<f64>>,
        #[arg(long, conflicts_with = "atom_radius")]
        optical_density: Option<f64>,
        /// Derive the optical density from this cross-section radius (m).
        #[arg(long)]
        atom_radius: Option<f64>,
        /// w/w₀.
        #[arg(long)]
        waist_ratio: Option<f64>,
        /// Metres.
        #[arg(long)]
        wavelength: Option<f64>,
        #[arg(long)]
        noise_constant: Option<f64>,
    },
    /// Estimate the logical failure rate by simulation.
    Montecarlo {
        #[arg(long, default_value_t = 0.01)]
        p_loss: f64,
        #[arg(long, default_value_t = 0.0)]
        p_leak: f64,
        #[arg(long, default_value_t = 1)]
        cycles: usize,
        #[arg(long, default_value_t = 1)]
        sweep_period: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Projective)]
        mode: Mode,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        qnd_phase: f64,
        #[command(flatten)]
        amplitudes: Amplitudes,
        /// Write one row per trial to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the erasure-correction conditions of a code.
    VerifyCode {
        /// A position 1-4, or `all`.
        #[arg(long, default_value = "all")]
        position: String,
        #[arg(long, value_enum, default_value_t = CodeChoice::Gbp)]
        code: CodeChoice,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DensityMatrix::from_json(&text).with_context(|| format!("loading state from {}", path.display()))
}

fn fixture_text(rho: &DensityMatrix) -> String {
    format!("{}\n", rho.to_json())
}

#[derive(Serialize)]
struct CorrectionSummary {
    measured_bit: u8,
    branch_probability: f64,
    code_space_weight: f64,
    max_register_qubits: usize,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    p_loss: f64,
    p_leak: f64,
    cycles: usize,
    sweep_period: usize,
    seed: u64,
    trials: usize,
    failures: usize,
    p_fail_hat: f64,
    stderr: f64,
    analytic: f64,
}

fn sweep_cavity(
    config: Option<&Path>,
    overrides: [(&str, Option<Vec<f64>>); 8],
) -> Result<String> {
    let mut values = match config {
        Some(p) => config::parse(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => Default::default(),
    };
    for (key, v) in overrides {
        if let Some(v) = v {
            values.insert(key.to_string(), v);
        }
    }
    let scalar = |key: &str| -> Result<Option<f64>> {
        match values.get(key).map(Vec::as_slice) {
            None => Ok(None),
            Some([x]) => Ok(Some(*x)),
            Some(_) => bail!("{key} takes a single value"),
        }
    };
    let defaults = CavityParams::default();
    let optical_density = match (scalar("optical_density")?, scalar("atom_radius")?) {
        (Some(_), Some(_)) => bail!("give optical_density or atom_radius, not both"),
        (Some(d), None) => OpticalDensity::Direct(d),
        (None, Some(r)) => OpticalDensity::FromGeometry { atom_radius: r },
        (None, None) => defaults.optical_density,
    };
    let base = CavityParams {
        optical_density,
        waist_ratio: scalar("waist_ratio")?.unwrap_or(defaults.waist_ratio),
        wavelength: scalar("wavelength")?.unwrap_or(defaults.wavelength),
        noise_constant: scalar("noise_constant")?.unwrap_or(defaults.noise_constant),
        ..defaults
    };
    let list = |key: &str, default: f64| values.get(key).cloned().unwrap_or_else(|| vec![default]);

    let mut csv = format!("{}\n", cavity::CSV_HEADER);
    for &finesse in &list("finesse", defaults.finesse) {
        for &detuning_ratio in &list("detuning_ratio", defaults.detuning_ratio) {
            for &photon_number in &list("photons", defaults.photon_number) {
                let params = CavityParams { finesse, detuning_ratio, photon_number, ..base };
                let report = cavity::feasibility(&params)?;
                csv.push_str(&report.csv_row());
                csv.push('\n');
            }
        }
    }
    Ok(csv)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { amplitudes, output } => {
            let rho = encode(&amplitudes.logical()?);
            write_out(output.as_deref(), &fixture_text(&rho))
        }
        Command::Lose { input, site, reinsert, output } => {
            let mut rho = apply_loss(&read_state(&input)?, site)?;
            if reinsert {
                rho = insert_fresh(&rho, site)?;
            }
            write_out(output.as_deref(), &fixture_text(&rho))
        }
        Command::Correct { input, lost_site, force_bit, seed, mode, emit_circuit, output } => {
            let rho = read_state(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = correct_after_loss(&rho, lost_site, mode.into(), force_bit, &mut rng)?;
            if let Some(path) = emit_circuit {
                fs::write(&path, out.circuit_applied.to_text())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = output {
                write_out(Some(&path), &fixture_text(&out.output))?;
            }
            let summary = CorrectionSummary {
                measured_bit: out.measured_bit,
                branch_probability: out.branch_probability,
                code_space_weight: out.code_space_weight,
                max_register_qubits: out.max_register_qubits,
            };
            write_out(None, &format!("{}\n", serde_json::to_string_pretty(&summary)?))
        }
        Command::RunProtocol { amplitudes, lost_site, force_bit, seed, mode, qnd_phase } => {
            let lq = amplitudes.logical()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let detector = QndDetector::new(qnd_phase);
            let reg = Register::full(encode(&lq)).lose(lost_site)?;
            let swept = detector.sweep(&reg)?;
            let mut reg = detector.compensate(&swept.register)?;
            for ev in &swept.events {
                reg = reg.insert_fresh(ev.site)?;
            }
            let detected: Vec<String> = swept.events.iter().map(|e| e.site.to_string()).collect();
            let out = correct_after_loss(reg.state(), lost_site, mode.into(), force_bit, &mut rng)?;
            let text = format!(
                "lost site: {lost_site}\ndetected: {}\nmeasured bit: {}\nbranch probability: {}\nrecovered fidelity: {:.12}\ncircuit:\n{}",
                detected.join(","),
                out.measured_bit,
                out.branch_probability,
                out.recovered_fidelity(&lq),
                out.circuit_applied.to_text()
            );
            write_out(None, &text)
        }
        Command::SweepCavity {
            config,
            finesse,
            detuning_ratio,
            photons,
            optical_density,
            atom_radius,
            waist_ratio,
            wavelength,
            noise_constant,
        } => {
            let one = |x: Option<f64>| x.map(|v| vec![v]);
            let csv = sweep_cavity(
                config.as_deref(),
                [
                    ("finesse", finesse),
                    ("detuning_ratio", detuning_ratio),
                    ("photons", photons),
                    ("optical_density", one(optical_density)),
                    ("atom_radius", one(atom_radius)),
                    ("waist_ratio", one(waist_ratio)),
                    ("wavelength", one(wavelength)),
                    ("noise_constant", one(noise_constant)),
                ],
            )?;
            eprintln!("note: {}", cavity::UNMODELED_NOTE);
            write_out(None, &csv)
        }
        Command::Montecarlo {
            p_loss,
            p_leak,
            cycles,
            sweep_period,
            trials,
            seed,
            mode,
            qnd_phase,
            amplitudes,
            csv,
        } => {
            if trials == 0 {
                bail!("--trials must be positive");
            }
            let cfg = TrialConfig {
                p_loss,
                p_leak,
                cycles,
                sweep_period,
                seed,
                logical: amplitudes.logical()?,
                mode: mode.into(),
                qnd_phase,
                scripted: Vec::new(),
            };
            let results = run_trials(&cfg, trials)?;
            if let Some(path) = csv {
                let mut rows = String::from("trial,failed,n_losses,n_leaks,final_fidelity\n");
                for (t, r) in results.iter().enumerate() {
                    rows.push_str(&format!("{t},{},{},{},{}\n", r.failed, r.n_losses, r.n_leaks, r.final_fidelity));
                }
                write_out(Some(&path), &rows)?;
            }
            let est = summarize(&results);
            let summary = MonteCarloSummary {
                p_loss,
                p_leak,
                cycles,
                sweep_period,
                seed,
                trials: est.trials,
                failures: est.failures,
                p_fail_hat: est.p_fail_hat,
                stderr: est.stderr,
                analytic: analytic_failure(&cfg),
            };
            write_out(None, &format!("{}\n", serde_json::to_string_pretty(&summary)?))
        }
        Command::VerifyCode { position, code } => {
            let code_spec = match code {
                CodeChoice::Gbp => CodeSpec::gbp(),
                CodeChoice::Repetition2 => CodeSpec::repetition_2(),
            };
            let positions: Vec<usize> = if position == "all" {
                (1..=code_spec.n_physical()).collect()
            } else {
                vec![position.parse().with_context(|| format!("bad position {position:?}"))?]
            };
            let mut text = String::new();
            for p in positions {
                let r = verify_erasure_code(&code_spec, p)?;
                text.push_str(&format!(
                    "position {p}: correctable: {} (off-diagonal {:.1e}, diagonal spread {:.1e})\n",
                    r.correctable, r.max_off_diagonal, r.max_diagonal_spread
                ));
            }
            write_out(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
