//! The classical scale transformation.
//!
//! Measuring time in field periods, `t = ω t̃`, the substitutions
//! `r_s = ω^{2/3} r`, `p_s = p / ω^{1/3}`, `F_s = F / ω^{4/3}` and
//! `H_s = H / ω^{2/3}` remove ω from the classical equations of motion, so a
//! trajectory depends only on `F_s` and its scaled initial conditions. The
//! relation for `H_s` is applied pointwise in time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical description of a driven hydrogenic electron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Principal action of the initial state.
    pub n0: f64,
    /// Field angular frequency.
    pub omega: f64,
    /// Field amplitude.
    pub field: f64,
    /// Field phase in radians.
    pub phi: f64,
    /// Electron energy.
    pub energy: f64,
}

impl PhysicalParams {
    /// Unperturbed bound state of principal action `n0`, `E = -1/(2 n0²)`.
    pub fn bound(n0: f64, omega: f64, field: f64, phi: f64) -> Result<Self> {
        check_action(n0)?;
        Ok(PhysicalParams {
            n0,
            omega,
            field,
            phi,
            energy: -0.5 / (n0 * n0),
        })
    }
}

/// Parameters after the scale transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledQuantities {
    /// Scaled field strength `F / ω^{4/3}`.
    pub fs: f64,
    /// Initial relative frequency `ω n0³`.
    pub s0: f64,
    /// Scaled energy `E / ω^{2/3}`.
    pub es: f64,
    /// Scaled Planck constant `ω^{1/3}`.
    pub hbar_s: f64,
    /// Scaled time `ω t̃`, i.e. the field phase advance.
    pub t: f64,
    /// Field phase, unchanged by scaling.
    pub phi: f64,
    /// Multiplier taking a physical position to a scaled one.
    pub position_factor: f64,
    /// Multiplier taking a physical momentum to a scaled one.
    pub momentum_factor: f64,
}

fn check_action(n0: f64) -> Result<()> {
    if n0 > 0.0 && n0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("n0", format!("principal action must be > 0, got {n0}")))
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega >= 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("omega", format!("frequency must be >= 0, got {omega}")))
    }
}

/// Initial relative frequency `s0 = ω n0³`.
pub fn relative_frequency(n0: f64, omega: f64) -> Result<f64> {
    check_action(n0)?;
    check_frequency(omega)?;
    Ok(omega * n0 * n0 * n0)
}

/// Instantaneous relative frequency `s = ω / (-2E)^{3/2}` of a bound electron.
pub fn instantaneous_relative_frequency(omega: f64, energy: f64) -> Result<f64> {
    check_frequency(omega)?;
    if !(energy < 0.0) {
        return Err(Error::domain(
            "energy",
            format!("relative frequency needs a bound energy, got {energy}"),
        ));
    }
    Ok(omega / (-2.0 * energy).powf(1.5))
}

/// Scaled energy of the unperturbed level at relative frequency `s`: `-1/(2 s^{2/3})`.
pub fn scaled_energy(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            "s",
            format!("relative frequency must be > 0, got {s}"),
        ));
    }
    Ok(-0.5 / s.powf(2.0 / 3.0))
}

/// Scaled Planck constant `ω^{1/3}`.
pub fn scaled_planck(omega: f64) -> Result<f64> {
    check_frequency(omega)?;
    Ok(omega.cbrt())
}

fn check_scalable(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "omega",
            format!("scaling requires omega > 0, got {omega}; use physical units"),
        ))
    }
}

/// Scaled position `ω^{2/3} x`.
pub fn scale_position(x: f64, omega: f64) -> Result<f64> {
    check_scalable(omega)?;
    Ok(x * omega.powf(2.0 / 3.0))
}

/// Scaled momentum `p / ω^{1/3}`.
pub fn scale_momentum(p: f64, omega: f64) -> Result<f64> {
    check_scalable(omega)?;
    Ok(p / omega.cbrt())
}

/// Applies the scale transformation to `params` at physical time `t_physical`.
pub fn to_scaled(params: &PhysicalParams, t_physical: f64) -> Result<ScaledQuantities> {
    check_action(params.n0)?;
    check_scalable(params.omega)?;
    let omega = params.omega;
    let cbrt = omega.cbrt();
    let two_thirds = cbrt * cbrt;
    Ok(ScaledQuantities {
        fs: params.field / (two_thirds * two_thirds),
        s0: relative_frequency(params.n0, omega)?,
        es: params.energy / two_thirds,
        hbar_s: cbrt,
        t: omega * t_physical,
        phi: params.phi,
        position_factor: two_thirds,
        momentum_factor: 1.0 / cbrt,
    })
}

/// Inverts [`to_scaled`] for a state of principal action `n0`.
pub fn from_scaled(sq: &ScaledQuantities, n0: f64) -> Result<PhysicalParams> {
    check_action(n0)?;
    if !(sq.s0 > 0.0) || !sq.s0.is_finite() {
        return Err(Error::domain(
            "s0",
            format!("relative frequency must be > 0, got {}", sq.s0),
        ));
    }
    let omega = sq.s0 / (n0 * n0 * n0);
    let cbrt = omega.cbrt();
    let two_thirds = cbrt * cbrt;
    Ok(PhysicalParams {
        n0,
        omega,
        field: sq.fs * two_thirds * two_thirds,
        phi: sq.phi,
        energy: sq.es * two_thirds,
    })
}
