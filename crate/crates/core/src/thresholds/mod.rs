//! Closed-form scaled threshold laws and the photonic-basis model.
//!
//! Every threshold is a scaled field `F_s = F / ω^{4/3}` expressed as a power
//! law in the initial relative frequency `s0 = ω n0³`.

mod bessel;

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bessel::{bessel_jn, MAX_ARGUMENT, MAX_ORDER};

pub const STATIC_COEFFICIENT: f64 = 0.130;
pub const HCP_COEFFICIENT: f64 = 0.14;
pub const HCP_UNSCALED_COEFFICIENT: f64 = 0.3;
pub const MULTIPHOTON_BASE: f64 = 7.05;

/// Which mechanism produced a threshold value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismTag {
    StaticLimit,
    ChaosOnsetMw,
    HcpExperimental,
    PhotonicBasis,
    Multiphoton,
    SimulatedClassical,
}

impl MechanismTag {
    pub const ALL: [MechanismTag; 6] = [
        MechanismTag::StaticLimit,
        MechanismTag::ChaosOnsetMw,
        MechanismTag::HcpExperimental,
        MechanismTag::PhotonicBasis,
        MechanismTag::Multiphoton,
        MechanismTag::SimulatedClassical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismTag::StaticLimit => "static_limit",
            MechanismTag::ChaosOnsetMw => "chaos_onset_mw",
            MechanismTag::HcpExperimental => "hcp_experimental",
            MechanismTag::PhotonicBasis => "photonic_basis",
            MechanismTag::Multiphoton => "multiphoton",
            MechanismTag::SimulatedClassical => "simulated_classical",
        }
    }
}

impl std::fmt::Display for MechanismTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_s0(s0: f64) -> Result<()> {
    if s0 > 0.0 && s0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("s0", format!("relative frequency must be > 0, got {s0}")))
    }
}

/// Static-field limit `0.130 / s0^{4/3}`, i.e. `F n0⁴ = 0.130`.
pub fn static_threshold(s0: f64) -> Result<f64> {
    check_s0(s0)?;
    Ok(STATIC_COEFFICIENT / s0.powf(4.0 / 3.0))
}

/// Parameters of the chaos-onset law `F_s = 1 / (coefficient · s0^exponent)`.
///
/// The default reproduces the form `1/(49 s^{5/3})`. The high-frequency
/// literature value has exponent 1/3; override to compare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl Default for ChaosLaw {
    fn default() -> Self {
        ChaosLaw {
            coefficient: 49.0,
            exponent: 5.0 / 3.0,
        }
    }
}

impl ChaosLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient > 0.0) || !self.coefficient.is_finite() || !self.exponent.is_finite() {
            return Err(Error::domain(
                "chaos_mw",
                format!("coefficient must be > 0 and exponent finite, got {self:?}"),
            ));
        }
        Ok(())
    }
}

/// Onset of classical chaos in a high-frequency field, default law.
pub fn chaos_threshold_mw(s0: f64) -> Result<f64> {
    chaos_threshold_mw_with(s0, &ChaosLaw::default())
}

pub fn chaos_threshold_mw_with(s0: f64, law: &ChaosLaw) -> Result<f64> {
    check_s0(s0)?;
    law.validate()?;
    Ok(1.0 / (law.coefficient * s0.powf(law.exponent)))
}

/// Whether the half-cycle-pulse law is inside its stated range `s0 ≥ 1`.
pub fn hcp_in_validity_domain(s0: f64) -> bool {
    s0 >= 1.0
}

/// Observed half-cycle-pulse threshold `0.14 / s0^{2/3}`. Logs a warning below `s0 = 1`.
pub fn hcp_threshold_experimental(s0: f64) -> Result<f64> {
    check_s0(s0)?;
    if !hcp_in_validity_domain(s0) {
        log::warn!("half-cycle pulse threshold law used at s0 = {s0} < 1, outside its range");
    }
    Ok(HCP_COEFFICIENT / s0.powf(2.0 / 3.0))
}

/// Unscaled half-cycle-pulse threshold `0.3 / (n0² τ^{2/3})` in atomic units.
pub fn hcp_threshold_unscaled(n0: f64, tau: f64) -> Result<f64> {
    if !(n0 > 0.0) || !(tau > 0.0) || !n0.is_finite() || !tau.is_finite() {
        return Err(Error::domain(
            "hcp_threshold_unscaled",
            format!("n0 and tau must be > 0, got n0 = {n0}, tau = {tau}"),
        ));
    }
    Ok(HCP_UNSCALED_COEFFICIENT / (n0 * n0 * tau.powf(2.0 / 3.0)))
}

/// Photonic-basis threshold `2 / (e π s0^{2/3})`, where `eK/(2N_i) = 1`.
pub fn photonic_threshold(s0: f64) -> Result<f64> {
    check_s0(s0)?;
    Ok(2.0 / (E * PI * s0.powf(2.0 / 3.0)))
}

/// Multiphoton threshold `1 / (7.05 s0^{2/3})`, where the rate base equals one.
pub fn multiphoton_threshold(s0: f64) -> Result<f64> {
    check_s0(s0)?;
    Ok(1.0 / (MULTIPHOTON_BASE * s0.powf(2.0 / 3.0)))
}

/// Number of photons needed to ionise, `1 / (2 n0² ω)`.
pub fn photon_number(n0: f64, omega: f64) -> Result<f64> {
    if !(n0 > 0.0) || !(omega > 0.0) || !n0.is_finite() || !omega.is_finite() {
        return Err(Error::domain(
            "photon_number",
            format!("n0 and omega must be > 0, got n0 = {n0}, omega = {omega}"),
        ));
    }
    Ok(1.0 / (2.0 * n0 * n0 * omega))
}

/// Interaction parameter `K = π F_s / (2 ω^{1/3})`.
pub fn interaction_parameter(fs: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain("omega", format!("omega must be > 0, got {omega}")));
    }
    if !(fs >= 0.0) || !fs.is_finite() {
        return Err(Error::domain("fs", format!("scaled field must be >= 0, got {fs}")));
    }
    Ok(PI * fs / (2.0 * omega.cbrt()))
}

/// The photonic-basis model: `N_i` photons, coupling `K`, scaled Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonicModel {
    pub photons: f64,
    pub k: f64,
    pub hbar_s: f64,
}

impl PhotonicModel {
    pub fn from_physical(n0: f64, omega: f64, fs: f64) -> Result<Self> {
        Ok(PhotonicModel {
            photons: photon_number(n0, omega)?,
            k: interaction_parameter(fs, omega)?,
            hbar_s: omega.cbrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonicProbability {
    /// `J_N(K)²` with `N` the nearest integer to `N_i`.
    pub exact: f64,
    /// `(2π N_i)^{-1} (eK / 2N_i)^{2N_i}`, flushed to zero below 1e-300.
    pub asymptotic: f64,
    /// Natural log of the asymptotic form; `-inf` at `K = 0`.
    pub ln_asymptotic: f64,
}

const UNDERFLOW: f64 = 1e-300;

pub fn photonic_probability(model: &PhotonicModel) -> Result<PhotonicProbability> {
    let n = model.photons;
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::domain("photons", format!("N_i must be >= 1, got {n}")));
    }
    if !(model.k >= 0.0) || !model.k.is_finite() {
        return Err(Error::domain("k", format!("K must be >= 0, got {}", model.k)));
    }
    let order = n.round() as u32;
    let j = bessel_jn(order, model.k)?;
    let ln_asymptotic = if model.k == 0.0 {
        f64::NEG_INFINITY
    } else {
        -(2.0 * PI * n).ln() + 2.0 * n * (1.0 + model.k.ln() - (2.0 * n).ln())
    };
    let asymptotic = if ln_asymptotic < UNDERFLOW.ln() {
        0.0
    } else {
        ln_asymptotic.exp()
    };
    Ok(PhotonicProbability {
        exact: j * j,
        asymptotic,
        ln_asymptotic,
    })
}

/// One row of the analytic comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub s0: f64,
    pub static_limit: f64,
    pub chaos_mw: f64,
    pub hcp_exp: f64,
    pub photonic: f64,
    pub multiphoton: f64,
}

pub fn comparison_row(s0: f64, chaos: &ChaosLaw) -> Result<ComparisonRow> {
    Ok(ComparisonRow {
        s0,
        static_limit: static_threshold(s0)?,
        chaos_mw: chaos_threshold_mw_with(s0, chaos)?,
        hcp_exp: hcp_threshold_experimental(s0)?,
        photonic: photonic_threshold(s0)?,
        multiphoton: multiphoton_threshold(s0)?,
    })
}

/// Evaluates the closed-form law attached to `tag`. Simulated thresholds have none.
pub fn analytic_threshold(tag: MechanismTag, s0: f64, chaos: &ChaosLaw) -> Option<Result<f64>> {
    match tag {
        MechanismTag::StaticLimit => Some(static_threshold(s0)),
        MechanismTag::ChaosOnsetMw => Some(chaos_threshold_mw_with(s0, chaos)),
        MechanismTag::HcpExperimental => Some(hcp_threshold_experimental(s0)),
        MechanismTag::PhotonicBasis => Some(photonic_threshold(s0)),
        MechanismTag::Multiphoton => Some(multiphoton_threshold(s0)),
        MechanismTag::SimulatedClassical => None,
    }
}
