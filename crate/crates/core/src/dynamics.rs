//! Classical 1D driven hydrogen on the half-line `x > 0`.
//!
//! The Coulomb singularity is removed with the Levi-Civita substitution
//! `x = u²`, `p = p_u / (2u)` and the fictitious time `ds = dt / x`. The state
//! integrated is `(u, p_u, E, t)` where `E = p²/2 - 1/x` is the field-free
//! energy, carried as a variable so that the equations stay polynomial:
//!
//! ```text
//! du/ds   = p_u / 4
//! dp_u/ds = 2 u E - 2 u³ F(t)
//! dE/ds   = -u p_u F(t) / 2
//! dt/ds   = u²
//! ```
//!
//! A collision with the nucleus is a smooth zero crossing of `u`, so `x`
//! never goes negative and the electron is reflected.
//!
//! The flow conserves `p_u²/8 - E u² = 1` for any field; after every step the
//! state is projected back onto that surface by a common rescaling of
//! `(u, p_u)`, which keeps `E` and the position/momentum pair consistent.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{DrivePulse, Shape};
use crate::ode::{DenseStep, Dopri5, OdeSystem, StepError, Tolerance};

/// Position, momentum and time of the electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        PhasePoint { x, p, t: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    /// Left the escape radius with positive energy before `t_end`.
    EscapedEarly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryResult {
    pub final_point: PhasePoint,
    /// Field-free energy at the end of the run.
    pub energy_final: f64,
    pub ionised: bool,
    pub max_x: f64,
    pub steps: u64,
    pub status: TrajectoryStatus,
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: f64,
    pub p: f64,
    pub energy: f64,
    pub field: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Relative tolerance of the step controller, in `[1e-14, 1e-6]`.
    pub tol: f64,
    /// Early-exit radius for unbound electrons; defaults to `50 · 2 n0²`.
    pub escape_radius: Option<f64>,
    pub max_steps: u64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tol: 1e-10,
            escape_radius: None,
            max_steps: 100_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegrateOptions {
            tol,
            ..Default::default()
        }
    }
}

fn check_position(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("x", format!("position must be > 0, got {x}")))
    }
}

/// Field-free energy `p²/2 - 1/x`.
pub fn energy(point: &PhasePoint) -> Result<f64> {
    check_position(point.x)?;
    Ok(0.5 * point.p * point.p - 1.0 / point.x)
}

/// Hamilton's equations `(dx/dt, dp/dt) = (p, -1/x² - field)`.
pub fn derivatives(point: &PhasePoint, field: f64) -> Result<(f64, f64)> {
    check_position(point.x)?;
    Ok((point.p, -1.0 / (point.x * point.x) - field))
}

/// Sudden-approximation test: does an instantaneous kick `delta_p` unbind the electron?
pub fn kick_ionises(point: &PhasePoint, delta_p: f64) -> Result<bool> {
    let kicked = PhasePoint {
        p: point.p + delta_p,
        ..*point
    };
    Ok(energy(&kicked)? > 0.0)
}

/// Kepler period `2π n0³`.
pub fn kepler_period(n0: f64) -> f64 {
    2.0 * PI * n0 * n0 * n0
}

/// Effective principal action of a bound energy, `1/√(-2E)`.
pub fn principal_action(energy: f64) -> Option<f64> {
    (energy < 0.0).then(|| 1.0 / (-2.0 * energy).sqrt())
}

/// Right-hand side of the regularised equations for one smooth field piece.
#[derive(Debug, Clone, Copy)]
struct Regularised {
    shape: Shape,
}

impl OdeSystem<4> for Regularised {
    #[inline]
    fn rhs(&self, _s: f64, y: &[f64; 4]) -> [f64; 4] {
        let [u, pu, e, t] = *y;
        let f = self.shape.eval(t);
        let u2 = u * u;
        [0.25 * pu, 2.0 * u * (e - u2 * f), -0.5 * u * pu * f, u2]
    }
}

/// Rescales `(u, p_u)` onto the constraint surface `p_u²/8 - E u² = 1`.
fn project(y: &mut [f64; 4]) {
    let q = 0.125 * y[1] * y[1] - y[2] * y[0] * y[0];
    if q > 0.0 && q.is_finite() {
        let scale = q.sqrt().recip();
        y[0] *= scale;
        y[1] *= scale;
    }
}

fn to_point(y: &[f64; 4]) -> PhasePoint {
    let [u, pu, _, t] = *y;
    PhasePoint {
        x: u * u,
        p: pu / (2.0 * u),
        t,
    }
}

/// Solves `t(s) = target` inside a dense step whose end lies at or past
/// `target`; returns the step fraction and the interpolated state.
fn locate_time(dense: &DenseStep<4>, target: f64) -> (f64, [f64; 4]) {
    let f = |theta: f64| dense.at_fraction(theta)[3] - target;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let (mut fa, mut fb) = (f(a), f(b));
    if fb == 0.0 {
        return (1.0, dense.at_fraction(1.0));
    }
    if fa >= 0.0 {
        return (0.0, dense.at_fraction(0.0));
    }
    // Illinois variant of regula falsi; t(θ) is monotone.
    let mut side = 0;
    let mut theta = 1.0;
    for _ in 0..200 {
        theta = (a * fb - b * fa) / (fb - fa);
        let ft = f(theta);
        if ft.abs() <= 4.0 * f64::EPSILON * target.abs().max(1.0) || (b - a) < 1e-15 {
            break;
        }
        if ft < 0.0 {
            a = theta;
            fa = ft;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = theta;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    (theta, dense.at_fraction(theta))
}

enum Flow {
    Continue,
    Stop,
}

/// Integrates the regularised system across the pieces of a pulse.
struct Propagator {
    shapes: Vec<(f64, Shape)>,
    piece: usize,
    sys: Regularised,
    ode: Dopri5<4>,
    max_steps: u64,
}

impl Propagator {
    fn new(initial: &PhasePoint, pulse: &DrivePulse, tol: f64, max_steps: u64) -> Result<Self> {
        let e0 = energy(initial)?;
        // Natural scales of the orbit keep the error control scale-covariant.
        let n = principal_action(e0).unwrap_or_else(|| initial.x.sqrt());
        let atol = [tol * n, tol, tol / (n * n), tol * n * n * n];

        let mut shapes: Vec<(f64, Shape)> = pulse
            .segments()
            .into_iter()
            .map(|seg| (seg.end, seg.shape))
            .collect();
        shapes.push((f64::INFINITY, Shape::Off));
        let piece = shapes
            .iter()
            .position(|(end, _)| *end > initial.t)
            .unwrap_or(shapes.len() - 1);
        let sys = Regularised {
            shape: shapes[piece].1,
        };

        let u = initial.x.sqrt();
        let y0 = [u, 2.0 * u * initial.p, e0, initial.t];
        let ode = Dopri5::new(&sys, 0.0, y0, 1e-2 * n, Tolerance { rtol: tol, atol }, 1e-14 * n);
        Ok(Propagator {
            shapes,
            piece,
            sys,
            ode,
            max_steps,
        })
    }

    fn state(&self) -> &[f64; 4] {
        self.ode.y()
    }

    fn steps(&self) -> u64 {
        self.ode.accepted_steps()
    }

    fn failure(&self, err: StepError) -> Error {
        let p = to_point(self.state());
        Error::StepFailure {
            t: p.t,
            x: p.x,
            p: p.p,
            step: err.h,
            steps: self.steps(),
            reason: err.reason,
        }
    }

    /// Advances to physical time `target`, calling `on_step` after every
    /// accepted step and at every stop. Returns `false` if `on_step` stopped early.
    fn advance_to(&mut self, target: f64, on_step: &mut dyn FnMut(&[f64; 4]) -> Flow) -> Result<bool> {
        loop {
            let t = self.state()[3];
            let piece_end = self.shapes[self.piece].0;
            if t >= piece_end && self.piece + 1 < self.shapes.len() {
                self.piece += 1;
                self.sys.shape = self.shapes[self.piece].1;
                let y = *self.state();
                let s = self.ode.s();
                self.ode.restart(&self.sys, s, y);
                continue;
            }
            if t >= target {
                return Ok(true);
            }
            let stop = target.min(piece_end);
            if self.steps() >= self.max_steps {
                return Err(self.failure(StepError {
                    s: self.ode.s(),
                    h: 0.0,
                    reason: "step budget exhausted",
                }));
            }
            self.ode.step(&self.sys).map_err(|e| self.failure(e))?;
            let (s, mut y) = if self.state()[3] >= stop {
                let dense = *self.ode.dense().expect("accepted step has dense output");
                let (theta, mut y) = locate_time(&dense, stop);
                y[3] = stop;
                (dense.s0 + theta * dense.h, y)
            } else {
                (self.ode.s(), *self.state())
            };
            project(&mut y);
            self.ode.restart(&self.sys, s, y);
            if let Flow::Stop = on_step(self.state()) {
                return Ok(false);
            }
        }
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if (1e-14..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::domain("tol", format!("tolerance must lie in [1e-14, 1e-6], got {tol}")))
    }
}

/// Integrates from `initial` to `t_end`, which must not precede the end of the pulse.
pub fn integrate(initial: &PhasePoint, pulse: &DrivePulse, t_end: f64, tol: f64) -> Result<TrajectoryResult> {
    integrate_with(initial, pulse, t_end, &IntegrateOptions::with_tol(tol), None)
}

/// [`integrate`] with explicit options and an optional per-step observer.
pub fn integrate_with(
    initial: &PhasePoint,
    pulse: &DrivePulse,
    t_end: f64,
    options: &IntegrateOptions,
    mut observer: Option<&mut dyn FnMut(&StepRecord)>,
) -> Result<TrajectoryResult> {
    check_tolerance(options.tol)?;
    pulse.validate()?;
    let e0 = energy(initial)?;
    let pulse_end = initial.t.max(0.0) + pulse.duration;
    if !(t_end >= pulse.duration) || t_end < initial.t {
        return Err(Error::domain(
            "t_end",
            format!("t_end = {t_end} must be >= the pulse end {pulse_end} and the start time"),
        ));
    }
    let escape = options.escape_radius.unwrap_or_else(|| match principal_action(e0) {
        Some(n) => 100.0 * n * n,
        None => 100.0 * initial.x,
    });

    let mut prop = Propagator::new(initial, pulse, options.tol, options.max_steps)?;
    let mut max_x = initial.x;
    let mut record = |y: &[f64; 4]| {
        if let Some(obs) = observer.as_mut() {
            let pt = to_point(y);
            obs(&StepRecord {
                t: pt.t,
                x: pt.x,
                p: pt.p,
                energy: y[2],
                field: pulse.field_at(pt.t),
            });
        }
    };
    record(prop.state());
    let completed = prop.advance_to(t_end, &mut |y| {
        record(y);
        let x = y[0] * y[0];
        max_x = max_x.max(x);
        if x > escape && y[2] > 0.0 {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;

    let y = *prop.state();
    let status = if completed {
        TrajectoryStatus::Completed
    } else {
        TrajectoryStatus::EscapedEarly
    };
    Ok(TrajectoryResult {
        final_point: to_point(&y),
        energy_final: y[2],
        ionised: y[2] > 0.0 || status == TrajectoryStatus::EscapedEarly,
        max_x,
        steps: prop.steps(),
        status,
    })
}

/// States at the requested physical times (ascending, none before `initial.t`).
/// No early exit is taken.
pub fn sample_trajectory(initial: &PhasePoint, pulse: &DrivePulse, times: &[f64], tol: f64) -> Result<Vec<PhasePoint>> {
    check_tolerance(tol)?;
    pulse.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < initial.t) {
        return Err(Error::domain("times", "sample times must be ascending and not precede the start"));
    }
    let mut prop = Propagator::new(initial, pulse, tol, IntegrateOptions::default().max_steps)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance_to(t, &mut |_| Flow::Continue)?;
        out.push(to_point(prop.state()));
    }
    Ok(out)
}

/// Two physical realisations of one scaled problem, for checking that
/// classical motion depends only on `(s0, F_s)` and scaled initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPair {
    pub s0: f64,
    /// Scaled field of the first setup.
    pub fs_a: f64,
    /// Scaled field of the second setup; equal to `fs_a` unless probing a mismatch.
    pub fs_b: f64,
    pub n0_a: f64,
    pub n0_b: f64,
    pub phi: f64,
    /// Initial point of the first setup; the second is its scaled image.
    pub initial_a: PhasePoint,
    /// Length of the comparison in field periods.
    pub periods: f64,
}

/// Scaled phase-space samples `(r_s, p_s)` taken every eighth of a field period.
pub fn scaled_samples(n0: f64, s0: f64, fs: f64, phi: f64, initial: &PhasePoint, periods: f64, tol: f64) -> Result<Vec<(f64, f64)>> {
    const PER_PERIOD: usize = 8;
    let omega = s0 / (n0 * n0 * n0);
    let pulse = DrivePulse::sinusoidal(fs * omega.powf(4.0 / 3.0), omega, phi, periods, 0.0);
    let total = (periods * PER_PERIOD as f64).floor() as usize;
    let step = 2.0 * PI / (PER_PERIOD as f64 * omega);
    let times: Vec<f64> = (1..=total).map(|k| k as f64 * step).collect();
    let r_factor = omega.powf(2.0 / 3.0);
    let p_factor = omega.cbrt().recip();
    Ok(sample_trajectory(initial, &pulse, &times, tol)?
        .into_iter()
        .map(|pt| (pt.x * r_factor, pt.p * p_factor))
        .collect())
}

/// Largest relative difference between the scaled trajectories of a pair.
///
/// Positions are compared relative to `max(|r_s|, s0^{2/3})` and momenta
/// relative to `max(|p_s|, s0^{-1/3})`, the scaled sizes of the orbit.
pub fn scaling_deviation(pair: &ScalingPair, tol: f64) -> Result<f64> {
    let omega_a = pair.s0 / pair.n0_a.powi(3);
    let omega_b = pair.s0 / pair.n0_b.powi(3);
    let ratio = omega_a / omega_b;
    let initial_b = PhasePoint {
        x: pair.initial_a.x * ratio.powf(2.0 / 3.0),
        p: pair.initial_a.p / ratio.cbrt(),
        t: 0.0,
    };
    let a = scaled_samples(pair.n0_a, pair.s0, pair.fs_a, pair.phi, &pair.initial_a, pair.periods, tol)?;
    let b = scaled_samples(pair.n0_b, pair.s0, pair.fs_b, pair.phi, &initial_b, pair.periods, tol)?;
    let r_nat = pair.s0.powf(2.0 / 3.0);
    let p_nat = pair.s0.cbrt().recip();
    Ok(a.iter().zip(&b).fold(0.0_f64, |worst, (&(ra, pa), &(rb, pb))| {
        let dr = (ra - rb).abs() / ra.abs().max(r_nat);
        let dp = (pa - pb).abs() / pa.abs().max(p_nat);
        worst.max(dr).max(dp)
    }))
}
