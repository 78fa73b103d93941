//! Feasibility arithmetic for detecting an atom through the dispersive phase
//! shift it imprints on a cavity field.
//!
//! * single-pass shift `φ₁ = D₀ / (4 δ/Γ)`
//! * total shift `φ = f φ₁`
//! * shot-noise uncertainty `Δφ = k / √N`
//! * scattered photons `N_sc = N f (Γ/δ)²`
//! * resolvability bound `N > (δ/Γ)² / f²`, equivalently `N_sc > 1/f`
//! * low-disturbance bound `N_sc < 1`, i.e. `N < (δ/Γ)² / f`
//!
//! All quantities are dimensionless except the wavelength and atom radius,
//! which are in metres. Orientation-dependent dipole factors are not
//! modelled; they would multiply `φ₁`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "f,detuning_ratio,N,phi,delta_phi,N_sc,cond_i,cond_ii";

pub const UNMODELED_NOTE: &str = "dipole-orientation geometric factor not modelled (multiplies phi)";

/// `C = (π/4)·erf((w/w₀)/√2)`, the overlap of a Gaussian mode of waist `w`
/// with an atomic cross-section of radius `w₀`.
pub fn geometric_factor(waist_ratio: f64) -> Result<f64> {
    if waist_ratio.is_nan() || waist_ratio <= 0.0 {
        return Err(Error::Domain(format!(
            "waist ratio must be positive, got {waist_ratio}"
        )));
    }
    Ok(FRAC_PI_4 * libm::erf(waist_ratio / SQRT_2))
}

/// `dC/dx = (π/4)·√(2/π)·exp(−x²/2)`.
pub fn geometric_factor_derivative(waist_ratio: f64) -> f64 {
    FRAC_PI_4 * (2.0 / PI).sqrt() * (-waist_ratio * waist_ratio / 2.0).exp()
}

/// `σ₀ = λ²/2π`.
pub fn resonant_cross_section(wavelength: f64) -> f64 {
    wavelength * wavelength / (2.0 * PI)
}

/// How the resonant optical density `D₀` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalDensity {
    /// `D₀` given directly.
    Direct(f64),
    /// `D₀ = nL·σ₀` with `nL = C/σ` and `σ = π w₀²`, `w₀` the atomic
    /// cross-section radius in metres.
    FromGeometry { atom_radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub finesse: f64,
    /// `δ/Γ`.
    pub detuning_ratio: f64,
    /// Metres.
    pub wavelength: f64,
    /// `w/w₀`.
    pub waist_ratio: f64,
    pub photon_number: f64,
    pub optical_density: OpticalDensity,
    /// Prefactor `k` in `Δφ = k/√N`.
    pub noise_constant: f64,
}

impl Default for CavityParams {
    /// Rb-87 D1 line, `f = 10⁵`, `δ/Γ = 10³`, one photon, `D₀ = 4`.
    fn default() -> Self {
        Self {
            finesse: 1e5,
            detuning_ratio: 1e3,
            wavelength: 794.978e-9,
            waist_ratio: 1.0,
            photon_number: 1.0,
            optical_density: OpticalDensity::Direct(4.0),
            noise_constant: 1.0,
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Domain(format!("invalid {what}: {v}")));
        if !(self.finesse > 0.0) {
            return bad("finesse", self.finesse);
        }
        if self.detuning_ratio == 0.0 || !self.detuning_ratio.is_finite() {
            return Err(Error::Domain(
                "zero detuning: resonant regime is outside the dispersive model".into(),
            ));
        }
        if !(self.photon_number >= 0.0) {
            return bad("photon number", self.photon_number);
        }
        if !(self.waist_ratio > 0.0) {
            return bad("waist ratio", self.waist_ratio);
        }
        if !(self.noise_constant > 0.0) {
            return bad("noise constant", self.noise_constant);
        }
        match self.optical_density {
            OpticalDensity::Direct(d) if !(d >= 0.0) => bad("optical density", d),
            OpticalDensity::FromGeometry { atom_radius } if !(atom_radius > 0.0) => {
                bad("atom radius", atom_radius)
            }
            _ if !(self.wavelength > 0.0) => bad("wavelength", self.wavelength),
            _ => Ok(()),
        }
    }

    pub fn optical_density(&self) -> Result<f64> {
        match self.optical_density {
            OpticalDensity::Direct(d) => Ok(d),
            OpticalDensity::FromGeometry { atom_radius } => {
                let sigma = PI * atom_radius * atom_radius;
                Ok(geometric_factor(self.waist_ratio)? / sigma * resonant_cross_section(self.wavelength))
            }
        }
    }
}

/// `φ₁ = D₀ / (4 δ/Γ)`.
pub fn single_pass_phase(optical_density: f64, detuning_ratio: f64) -> Result<f64> {
    if detuning_ratio == 0.0 {
        return Err(Error::Domain(
            "zero detuning: resonant regime is outside the dispersive model".into(),
        ));
    }
    Ok(optical_density / (4.0 * detuning_ratio))
}

/// `φ = f φ₁`.
pub fn total_phase(params: &CavityParams) -> Result<f64> {
    params.validate()?;
    Ok(params.finesse * single_pass_phase(params.optical_density()?, params.detuning_ratio)?)
}

/// `N_sc = N (Γ/δ)² f`.
pub fn scattered_photons(params: &CavityParams) -> Result<f64> {
    params.validate()?;
    Ok(params.photon_number * params.finesse / (params.detuning_ratio * params.detuning_ratio))
}

/// `Δφ = k/√N`.
pub fn phase_uncertainty(photon_number: f64, noise_constant: f64) -> Result<f64> {
    if !(photon_number > 0.0) {
        return Err(Error::Domain(format!(
            "phase uncertainty needs N > 0, got {photon_number}"
        )));
    }
    Ok(noise_constant / photon_number.sqrt())
}

/// Smallest photon number for which the shift is resolvable,
/// `(δ/Γ)²/f²`.
pub fn min_photons(finesse: f64, detuning_ratio: f64) -> f64 {
    detuning_ratio * detuning_ratio / (finesse * finesse)
}

/// Photon number at which one photon is expected to scatter, `(δ/Γ)²/f`.
pub fn max_photons(finesse: f64, detuning_ratio: f64) -> f64 {
    detuning_ratio * detuning_ratio / finesse
}

/// Open interval of photon numbers satisfying both bounds, or `None` when
/// `f ≤ 1`.
pub fn photon_window(finesse: f64, detuning_ratio: f64) -> Option<(f64, f64)> {
    if finesse <= 1.0 {
        return None;
    }
    Some((min_photons(finesse, detuning_ratio), max_photons(finesse, detuning_ratio)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub finesse: f64,
    pub detuning_ratio: f64,
    pub photon_number: f64,
    pub phi: f64,
    /// Infinite when `N = 0`.
    pub delta_phi: f64,
    pub n_sc: f64,
    /// `N > (δ/Γ)²/f²`.
    pub condition_i: bool,
    /// `N_sc < 1`.
    pub condition_ii: bool,
    /// Direct comparison `φ > Δφ`; agrees with `condition_i` only when
    /// `D₀ ≈ 4k`.
    pub phase_resolved: bool,
    pub window: Option<(f64, f64)>,
    pub note: &'static str,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.condition_i && self.condition_ii
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.finesse,
            self.detuning_ratio,
            self.photon_number,
            self.phi,
            self.delta_phi,
            self.n_sc,
            self.condition_i,
            self.condition_ii
        )
    }
}

pub fn feasibility(params: &CavityParams) -> Result<FeasibilityReport> {
    let phi = total_phase(params)?;
    let n = params.photon_number;
    let delta_phi = if n > 0.0 {
        phase_uncertainty(n, params.noise_constant)?
    } else {
        f64::INFINITY
    };
    let n_sc = scattered_photons(params)?;
    Ok(FeasibilityReport {
        finesse: params.finesse,
        detuning_ratio: params.detuning_ratio,
        photon_number: n,
        phi,
        delta_phi,
        n_sc,
        condition_i: n > min_photons(params.finesse, params.detuning_ratio),
        condition_ii: n_sc < 1.0,
        phase_resolved: phi.abs() > delta_phi,
        window: photon_window(params.finesse, params.detuning_ratio),
        note: UNMODELED_NOTE,
    })
}
