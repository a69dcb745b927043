//! Driving-field waveforms.
//!
//! A [`DrivePulse`] is exactly zero outside `[0, duration]`. Inside, it is a
//! small number of smooth pieces ([`Segment`]s); the integrator stops at every
//! piece boundary so that no step straddles a kink.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    Sinusoidal,
    HalfCycle,
    Static,
}

impl std::fmt::Display for PulseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PulseKind::Sinusoidal => "sinusoidal",
            PulseKind::HalfCycle => "half_cycle",
            PulseKind::Static => "static",
        })
    }
}

/// A time-dependent electric field. The electron feels the force `-field_at(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivePulse {
    pub kind: PulseKind,
    /// Peak amplitude.
    pub amplitude: f64,
    /// Angular frequency. Ignored for `Static`; `π/duration` for `HalfCycle`.
    #[serde(default)]
    pub omega: f64,
    /// Phase of the sinusoid.
    #[serde(default)]
    pub phi: f64,
    /// Total on-time.
    pub duration: f64,
    /// Length of the linear turn-on ramp of a sinusoid.
    #[serde(default)]
    pub ramp: f64,
}

impl DrivePulse {
    /// Sinusoid lasting `periods` field periods with a linear ramp of `ramp_periods`.
    pub fn sinusoidal(amplitude: f64, omega: f64, phi: f64, periods: f64, ramp_periods: f64) -> Self {
        let period = 2.0 * PI / omega;
        DrivePulse {
            kind: PulseKind::Sinusoidal,
            amplitude,
            omega,
            phi,
            duration: periods * period,
            ramp: ramp_periods * period,
        }
    }

    /// Unipolar half-sine of duration `tau`.
    pub fn half_cycle(amplitude: f64, tau: f64) -> Self {
        DrivePulse {
            kind: PulseKind::HalfCycle,
            amplitude,
            omega: PI / tau,
            phi: 0.0,
            duration: tau,
            ramp: 0.0,
        }
    }

    pub fn static_field(amplitude: f64, duration: f64) -> Self {
        DrivePulse {
            kind: PulseKind::Static,
            amplitude,
            omega: 0.0,
            phi: 0.0,
            duration,
            ramp: 0.0,
        }
    }

    /// The frequency that enters the scale transformation.
    pub fn effective_omega(&self) -> f64 {
        match self.kind {
            PulseKind::HalfCycle => PI / self.duration,
            PulseKind::Sinusoidal => self.omega,
            PulseKind::Static => 0.0,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        DrivePulse { amplitude, ..self }
    }

    pub fn with_phase(self, phi: f64) -> Self {
        DrivePulse { phi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what, detail: String| Err(Error::domain(what, detail));
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return bad("amplitude", format!("must be finite and >= 0, got {}", self.amplitude));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return bad("duration", format!("must be finite and > 0, got {}", self.duration));
        }
        if !(self.ramp >= 0.0) || !self.ramp.is_finite() {
            return bad("ramp", format!("must be finite and >= 0, got {}", self.ramp));
        }
        if !self.phi.is_finite() {
            return bad("phi", format!("must be finite, got {}", self.phi));
        }
        match self.kind {
            PulseKind::Sinusoidal if !(self.omega > 0.0) || !self.omega.is_finite() => {
                bad("omega", format!("sinusoid needs omega > 0, got {}", self.omega))
            }
            PulseKind::HalfCycle => {
                let expected = PI / self.duration;
                if ((self.omega - expected) / expected).abs() > 1e-12 {
                    bad(
                        "omega",
                        format!("half-cycle pulse needs omega = pi/duration = {expected}, got {}", self.omega),
                    )
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Field strength at time `t`.
    pub fn field_at(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        self.segments()
            .iter()
            .find(|seg| t <= seg.end)
            .map_or(0.0, |seg| seg.shape.eval(t))
    }

    /// Net momentum transfer magnitude `∫ F(t) dt` over the whole pulse.
    pub fn impulse(&self) -> f64 {
        let f = self.amplitude;
        let d = self.duration;
        match self.kind {
            PulseKind::HalfCycle => 2.0 * f * d / PI,
            PulseKind::Static => f * d,
            PulseKind::Sinusoidal => {
                let w = self.omega;
                let phi = self.phi;
                let r = self.ramp;
                if r == 0.0 {
                    f / w * (phi.cos() - (w * d + phi).cos())
                } else if r >= d {
                    f / r * (-d * (w * d + phi).cos() / w + ((w * d + phi).sin() - phi.sin()) / (w * w))
                } else {
                    // The cos(ωR+φ) terms of the ramp and the flat top cancel.
                    f * ((w * r + phi).sin() - phi.sin()) / (r * w * w) - f * (w * d + phi).cos() / w
                }
            }
        }
    }

    /// Smooth pieces covering `[0, duration]`, in time order.
    pub fn segments(&self) -> Vec<Segment> {
        let amp = self.amplitude;
        match self.kind {
            PulseKind::HalfCycle => vec![Segment {
                start: 0.0,
                end: self.duration,
                shape: Shape::Sine {
                    amplitude: amp,
                    omega: PI / self.duration,
                    phi: 0.0,
                },
            }],
            PulseKind::Static => vec![Segment {
                start: 0.0,
                end: self.duration,
                shape: Shape::Constant { amplitude: amp },
            }],
            PulseKind::Sinusoidal => {
                let sine = Shape::Sine {
                    amplitude: amp,
                    omega: self.omega,
                    phi: self.phi,
                };
                if self.ramp == 0.0 {
                    return vec![Segment {
                        start: 0.0,
                        end: self.duration,
                        shape: sine,
                    }];
                }
                let ramped = Shape::RampedSine {
                    amplitude: amp,
                    omega: self.omega,
                    phi: self.phi,
                    ramp: self.ramp,
                };
                if self.ramp >= self.duration {
                    vec![Segment {
                        start: 0.0,
                        end: self.duration,
                        shape: ramped,
                    }]
                } else {
                    vec![
                        Segment {
                            start: 0.0,
                            end: self.ramp,
                            shape: ramped,
                        },
                        Segment {
                            start: self.ramp,
                            end: self.duration,
                            shape: sine,
                        },
                    ]
                }
            }
        }
    }
}

/// One smooth piece of a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub shape: Shape,
}

/// Analytic form of a field piece. [`Shape::eval`] is not windowed, so an
/// integrator stage that overshoots the segment end sees the smooth continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Off,
    Constant { amplitude: f64 },
    Sine { amplitude: f64, omega: f64, phi: f64 },
    RampedSine { amplitude: f64, omega: f64, phi: f64, ramp: f64 },
}

impl Shape {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Shape::Off => 0.0,
            Shape::Constant { amplitude } => amplitude,
            Shape::Sine { amplitude, omega, phi } => amplitude * (omega * t + phi).sin(),
            Shape::RampedSine {
                amplitude,
                omega,
                phi,
                ramp,
            } => amplitude * (t / ramp) * (omega * t + phi).sin(),
        }
    }
}
