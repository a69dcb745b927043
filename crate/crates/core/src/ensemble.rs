//! Microcanonical ensembles, ionisation probabilities and threshold scans.
//!
//! Sample `k` takes its orbital phase (and, when phase averaging, the drive
//! phase) from random stream `k` of the seed. The same samples are reused at
//! every field strength of a scan, so the estimated probability is a
//! deterministic step function of the field. That function need not be
//! monotone, so a scan walks up from below target to the first crossing on
//! a geometric grid before bisecting.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_with, kepler_period, IntegrateOptions, PhasePoint};
use crate::error::{Error, Result};
use crate::fields::{DrivePulse, PulseKind};
use crate::rng::sample_stream;
use crate::thresholds::{hcp_threshold_experimental, static_threshold, MechanismTag};

/// Recipe for a microcanonical ensemble at fixed principal action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSpec {
    pub n0: f64,
    pub count: usize,
    pub seed: u64,
    /// Draw the drive phase uniformly in `[0, 2π)` per sample.
    pub phase_average: bool,
    /// Ionisation probability that defines the threshold.
    #[serde(rename = "target_P")]
    pub target_p: f64,
    /// Relative tolerance of each trajectory integration.
    pub tol: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n0: 10.0,
            count: 2000,
            seed: 1,
            phase_average: true,
            target_p: 0.10,
            tol: 1e-9,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0) || !self.n0.is_finite() {
            return Err(Error::domain("n0", format!("must be > 0, got {}", self.n0)));
        }
        if self.count < 1 {
            return Err(Error::domain("count", "ensemble needs at least one sample"));
        }
        if !(self.target_p > 0.0 && self.target_p < 1.0) {
            return Err(Error::domain(
                "target_P",
                format!("must lie strictly between 0 and 1, got {}", self.target_p),
            ));
        }
        if !(1e-14..=1e-6).contains(&self.tol) {
            return Err(Error::domain("tol", format!("must lie in [1e-14, 1e-6], got {}", self.tol)));
        }
        Ok(())
    }
}

/// Initial condition and drive phase of one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: PhasePoint,
    pub phi: f64,
}

/// `η - sin η`, without cancellation for small `η`.
fn eta_minus_sin(eta: f64) -> f64 {
    if eta < 0.5 {
        let e2 = eta * eta;
        eta * e2 / 6.0 * (1.0 - e2 / 20.0 * (1.0 - e2 / 42.0 * (1.0 - e2 / 72.0 * (1.0 - e2 / 110.0))))
    } else {
        eta - eta.sin()
    }
}

/// Eccentric anomaly of the radial Kepler orbit, `η - sin η = M`, for `M ∈ (0, π]`.
fn eccentric_anomaly(mean_anomaly: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, PI);
    let mut eta = (6.0 * mean_anomaly).cbrt().min(PI);
    for _ in 0..100 {
        let g = eta_minus_sin(eta) - mean_anomaly;
        if g > 0.0 {
            hi = eta;
        } else {
            lo = eta;
        }
        let slope = 2.0 * (0.5 * eta).sin().powi(2);
        let mut next = eta - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - eta).abs() <= 2.0 * f64::EPSILON * eta {
            return next;
        }
        eta = next;
    }
    eta
}

/// Point of the 1D orbit with energy `-1/(2 n0²)` at mean anomaly `M ∈ (0, 2π)`,
/// measured from the nucleus.
pub fn orbit_point(n0: f64, mean_anomaly: f64) -> PhasePoint {
    let (m, sign) = if mean_anomaly <= PI {
        (mean_anomaly, 1.0)
    } else {
        (2.0 * PI - mean_anomaly, -1.0)
    };
    let half = 0.5 * eccentric_anomaly(m);
    let (sin_h, cos_h) = half.sin_cos();
    PhasePoint {
        x: 2.0 * n0 * n0 * sin_h * sin_h,
        p: sign * cos_h / (sin_h * n0),
        t: 0.0,
    }
}

fn draw_sample(spec: &EnsembleSpec, index: usize) -> Sample {
    let mut rng = sample_stream(spec.seed, index as u64);
    let m: f64 = rng.sample(Open01);
    let phase: f64 = rng.random();
    Sample {
        point: orbit_point(spec.n0, 2.0 * PI * m),
        phi: if spec.phase_average { 2.0 * PI * phase } else { 0.0 },
    }
}

/// Ensemble members with their drive phases.
pub fn sample_ensemble(spec: &EnsembleSpec) -> Vec<Sample> {
    (0..spec.count).map(|k| draw_sample(spec, k)).collect()
}

/// `count` points uniformly distributed in time along the unperturbed orbit.
pub fn sample_microcanonical(spec: &EnsembleSpec) -> Vec<PhasePoint> {
    sample_ensemble(spec).into_iter().map(|s| s.point).collect()
}

/// Runs ensemble members, serially or on a fixed-size thread pool. Results are
/// always reduced in sample order.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn serial() -> Self {
        Executor { pool: None }
    }

    pub fn with_jobs(jobs: usize) -> Result<Self> {
        if jobs <= 1 {
            return Ok(Self::serial());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::domain("jobs", e.to_string()))?;
        Ok(Executor { pool: Some(pool) })
    }

    fn map<T, F>(&self, samples: &[Sample], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Sample) -> T + Sync + Send,
    {
        match &self.pool {
            None => samples.iter().map(f).collect(),
            Some(pool) => pool.install(|| samples.par_iter().map(f).collect()),
        }
    }
}

/// Fraction of ionised trajectories with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub p: f64,
    pub stderr: f64,
    pub ionised: usize,
    pub count: usize,
}

impl Probability {
    fn from_counts(ionised: usize, count: usize) -> Self {
        let p = ionised as f64 / count as f64;
        Probability {
            p,
            stderr: (p * (1.0 - p) / count as f64).sqrt(),
            ionised,
            count,
        }
    }
}

/// Ionisation probability of `samples` driven by `pulse`. Each trajectory runs
/// to the end of the pulse plus one Kepler period of the initial orbit.
pub fn probability_of(
    samples: &[Sample],
    spec: &EnsembleSpec,
    pulse: &DrivePulse,
    options: &IntegrateOptions,
    exec: &Executor,
) -> Result<Probability> {
    pulse.validate()?;
    let t_end = pulse.duration + kepler_period(spec.n0);
    let outcomes = exec.map(samples, |s| {
        let driven = pulse.with_phase(if spec.phase_average { s.phi } else { pulse.phi });
        integrate_with(&s.point, &driven, t_end, options, None).map(|r| r.ionised)
    });
    let mut ionised = 0;
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(true) => ionised += 1,
            Ok(false) => {}
            Err(e) => {
                return Err(Error::Sample {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(Probability::from_counts(ionised, samples.len()))
}

/// Ionisation probability of the ensemble described by `spec`.
pub fn ionisation_probability(spec: &EnsembleSpec, pulse: &DrivePulse) -> Result<Probability> {
    spec.validate()?;
    probability_of(
        &sample_ensemble(spec),
        spec,
        pulse,
        &IntegrateOptions::with_tol(spec.tol),
        &Executor::serial(),
    )
}

/// Waveform and bracketing knobs of a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    /// Duration of sinusoidal and static drives, in field periods.
    pub sinusoid_periods: f64,
    /// Linear turn-on of sinusoidal drives, in field periods.
    pub ramp_periods: f64,
    /// Initial bracket is `[guess / factor, guess · factor]`.
    pub bracket_factor: f64,
    /// Maximum number of bracket expansions on each side.
    pub max_expansions: u32,
    /// Ratio of successive probes while walking up to the first crossing.
    pub walk_factor: f64,
    /// Bisection stops once `hi / lo - 1` falls to this value.
    pub rel_width: f64,
    /// Relative offset of the two probes used to estimate `dP/dF_s`.
    pub slope_step: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            sinusoid_periods: 50.0,
            ramp_periods: 2.0,
            bracket_factor: 10.0,
            max_expansions: 4,
            walk_factor: std::f64::consts::SQRT_2,
            rel_width: 1e-2,
            slope_step: 0.1,
        }
    }
}

impl ScanSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sinusoid_periods > 0.0
            && self.ramp_periods >= 0.0
            && self.bracket_factor > 1.0
            && self.walk_factor > 1.0
            && self.rel_width > 0.0
            && self.slope_step > 0.0
            && [self.sinusoid_periods, self.ramp_periods, self.bracket_factor, self.walk_factor, self.rel_width, self.slope_step]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::domain("scan", format!("invalid scan settings {self:?}")))
        }
    }

    /// Physical pulse realising scaled field `fs` at relative frequency `s0` for principal action `n0`.
    pub fn pulse(&self, kind: PulseKind, s0: f64, n0: f64, fs: f64) -> DrivePulse {
        let omega = s0 / (n0 * n0 * n0);
        let amplitude = fs * omega.powf(4.0 / 3.0);
        match kind {
            PulseKind::Sinusoidal => DrivePulse::sinusoidal(amplitude, omega, 0.0, self.sinusoid_periods, self.ramp_periods),
            PulseKind::HalfCycle => DrivePulse::half_cycle(amplitude, PI / omega),
            PulseKind::Static => DrivePulse::static_field(amplitude, self.sinusoid_periods * 2.0 * PI / omega),
        }
    }
}

/// Closed-form starting point for the bracket.
pub fn analytic_guess(kind: PulseKind, s0: f64) -> Result<f64> {
    match kind {
        PulseKind::HalfCycle => hcp_threshold_experimental(s0),
        PulseKind::Sinusoidal | PulseKind::Static => static_threshold(s0),
    }
}

/// One point of a threshold curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub s0: f64,
    pub fs_th: f64,
    pub mechanism: MechanismTag,
    /// Probability at the upper end of the final bracket.
    pub p_at_threshold: f64,
    /// Standard error of `fs_th` from the binomial error and the local slope of `P(F_s)`.
    pub stderr: f64,
    /// Ensemble evaluations spent on this point.
    pub probes: u32,
}

/// Scaled threshold field at which the ensemble ionisation probability reaches `spec.target_p`.
pub fn threshold_scan(spec: &EnsembleSpec, s0: f64, kind: PulseKind) -> Result<ThresholdPoint> {
    threshold_scan_with(spec, s0, kind, &ScanSettings::default(), &Executor::serial())
}

pub fn threshold_scan_with(
    spec: &EnsembleSpec,
    s0: f64,
    kind: PulseKind,
    settings: &ScanSettings,
    exec: &Executor,
) -> Result<ThresholdPoint> {
    spec.validate()?;
    settings.validate()?;
    let guess = analytic_guess(kind, s0)?;
    let samples = sample_ensemble(spec);
    let options = IntegrateOptions::with_tol(spec.tol);
    let target = spec.target_p;
    let mut probes = 0u32;
    let mut prob = |fs: f64| -> Result<Probability> {
        probes += 1;
        let pulse = settings.pulse(kind, s0, spec.n0, fs);
        probability_of(&samples, spec, &pulse, &options, exec)
    };

    let factor = settings.bracket_factor;
    let ceiling = guess * factor.powi(1 + settings.max_expansions as i32);
    let mut lo = guess / factor;
    let mut expansions = 0;
    while prob(lo)?.p >= target {
        if expansions == settings.max_expansions {
            return Err(Error::BracketFailure { lo, hi: guess * factor, target });
        }
        expansions += 1;
        lo /= factor;
    }
    // Walking up from below target finds the smallest crossing on the walk grid.
    let mut hi = lo * settings.walk_factor;
    let mut p_hi = prob(hi)?;
    while p_hi.p < target {
        if hi >= ceiling {
            return Err(Error::BracketFailure { lo, hi, target });
        }
        lo = hi;
        hi *= settings.walk_factor;
        p_hi = prob(hi)?;
    }

    while hi / lo - 1.0 > settings.rel_width {
        let mid = (lo * hi).sqrt();
        let p_mid = prob(mid)?;
        if p_mid.p >= target {
            hi = mid;
            p_hi = p_mid;
        } else {
            lo = mid;
        }
    }
    let fs_th = (lo * hi).sqrt();

    let up = fs_th * (1.0 + settings.slope_step);
    let down = fs_th / (1.0 + settings.slope_step);
    let slope = (prob(up)?.p - prob(down)?.p) / (up - down);
    let sigma_p = (target * (1.0 - target) / spec.count as f64).sqrt();
    let stderr = if slope > 0.0 {
        sigma_p / slope
    } else {
        fs_th * settings.rel_width
    };

    Ok(ThresholdPoint {
        s0,
        fs_th,
        mechanism: MechanismTag::SimulatedClassical,
        p_at_threshold: p_hi.p,
        stderr,
        probes,
    })
}

/// Least-squares power law `log F_s = exponent · log s0 + log prefactor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS deviation of `log F_s` from the fitted line.
    pub residual: f64,
}

/// Threshold points sorted by `s0`, with the power-law fit when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub points: Vec<ThresholdPoint>,
    pub fit: Option<PowerLawFit>,
}

impl ThresholdCurve {
    pub fn new(mut points: Vec<ThresholdPoint>) -> Self {
        points.sort_by(|a, b| a.s0.total_cmp(&b.s0));
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.s0, p.fs_th)).collect();
        let fit = fit_power_law(&pairs).ok();
        ThresholdCurve { points, fit }
    }
}

/// Fits `(s0, F_s)` pairs. Needs at least three strictly positive points.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(&(s, f)) = points.iter().find(|(s, f)| !(*s > 0.0 && *f > 0.0)) {
        return Err(Error::domain("fit_power_law", format!("non-positive point ({s}, {f})")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, f)| (s.ln(), f.ln())).collect();
    let mean_x = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit_power_law", "all points share one s0"));
    }
    let sxy: f64 = logs.iter().map(|l| (l.0 - mean_x) * (l.1 - mean_y)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let residual = (logs
        .iter()
        .map(|l| (l.1 - intercept - exponent * l.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerLawFit {
        exponent,
        prefactor: intercept.exp(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::energy;

    #[test]
    fn kepler_solver_inverts_mean_anomaly() {
        for m in [1e-12, 1e-6, 0.01, 0.3, 1.0, 2.0, 3.0, PI] {
            let eta = eccentric_anomaly(m);
            assert!((eta_minus_sin(eta) - m).abs() <= 1e-14 * m, "M = {m}: {}", eta_minus_sin(eta) - m);
        }
        assert!((eccentric_anomaly(PI) - PI).abs() < 1e-15);
    }

    #[test]
    fn orbit_point_is_on_the_energy_shell() {
        for n0 in [1.0, 10.0, 37.5] {
            for k in 1..100 {
                let pt = orbit_point(n0, 2.0 * PI * k as f64 / 100.0);
                let e = energy(&pt).unwrap();
                assert!((e + 0.5 / (n0 * n0)).abs() <= 1e-12, "n0 {n0} k {k}: {e}");
            }
        }
        let aphelion = orbit_point(3.0, PI);
        assert!((aphelion.x - 18.0).abs() < 1e-12);
        assert!(aphelion.p.abs() < 1e-15);
        assert!(orbit_point(3.0, 1.0).p > 0.0);
        assert!(orbit_point(3.0, 5.0).p < 0.0);
    }

    #[test]
    fn samples_are_microcanonical() {
        let spec = EnsembleSpec {
            n0: 1.0,
            count: 5000,
            seed: 3,
            ..Default::default()
        };
        for pt in sample_microcanonical(&spec) {
            assert!(pt.x > 0.0 && pt.x <= 2.0);
            assert!((energy(&pt).unwrap() + 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_seed_dependent() {
        let spec = EnsembleSpec {
            count: 50,
            ..Default::default()
        };
        assert_eq!(sample_ensemble(&spec), sample_ensemble(&spec));
        let other = EnsembleSpec { seed: 2, ..spec };
        assert_ne!(sample_ensemble(&spec), sample_ensemble(&other));
        // A longer ensemble extends the shorter one.
        let longer = EnsembleSpec { count: 80, ..spec };
        assert_eq!(&sample_ensemble(&longer)[..50], &sample_ensemble(&spec)[..]);
    }

    #[test]
    fn phase_average_switch() {
        let spec = EnsembleSpec {
            count: 20,
            phase_average: false,
            ..Default::default()
        };
        assert!(sample_ensemble(&spec).iter().all(|s| s.phi == 0.0));
        let averaged = EnsembleSpec { phase_average: true, ..spec };
        assert!(sample_ensemble(&averaged).iter().all(|s| (0.0..2.0 * PI).contains(&s.phi)));
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::default().validate().is_ok());
        assert!(EnsembleSpec { count: 0, ..Default::default() }.validate().is_err());
        assert!(EnsembleSpec { target_p: 1.0, ..Default::default() }.validate().is_err());
        assert!(EnsembleSpec { target_p: 0.0, ..Default::default() }.validate().is_err());
        assert!(EnsembleSpec { n0: -1.0, ..Default::default() }.validate().is_err());
        assert!(EnsembleSpec { tol: 1e-3, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn zero_field_never_ionises() {
        let spec = EnsembleSpec {
            count: 40,
            ..Default::default()
        };
        let pulse = DrivePulse::sinusoidal(0.0, 1e-3, 0.0, 3.0, 1.0);
        let p = ionisation_probability(&spec, &pulse).unwrap();
        assert_eq!(p.p, 0.0);
        assert_eq!(p.stderr, 0.0);
    }

    #[test]
    fn fit_recovers_generating_laws() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&s: &f64| (s, 0.14 * s.powf(-2.0 / 3.0))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.exponent + 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.prefactor - 0.14).abs() < 1e-12);
        assert!(fit.residual < 1e-12);

        let pts: Vec<(f64, f64)> = [0.1, 0.5, 2.0, 9.0].iter().map(|&s: &f64| (s, 0.130 * s.powf(-4.0 / 3.0))).collect();
        assert!((fit_power_law(&pts).unwrap().exponent + 4.0 / 3.0).abs() < 1e-12);

        let mut pts: Vec<(f64, f64)> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&s: &f64| (s, 0.14 * s.powf(-2.0 / 3.0))).collect();
        pts[2].1 *= 1.5;
        assert!(fit_power_law(&pts).unwrap().residual > 0.0);
    }

    #[test]
    fn fit_needs_three_positive_points() {
        assert_eq!(
            fit_power_law(&[(1.0, 1.0), (2.0, 0.5)]),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        );
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.2)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 0.5), (1.0, 0.2)]).is_err());
    }

    #[test]
    fn curve_sorts_and_skips_fit_when_short() {
        let point = |s0: f64| ThresholdPoint {
            s0,
            fs_th: 0.1 / s0,
            mechanism: MechanismTag::SimulatedClassical,
            p_at_threshold: 0.1,
            stderr: 0.0,
            probes: 0,
        };
        let curve = ThresholdCurve::new(vec![point(4.0), point(1.0), point(2.0)]);
        assert_eq!(curve.points.iter().map(|p| p.s0).collect::<Vec<_>>(), vec![1.0, 2.0, 4.0]);
        assert!((curve.fit.unwrap().exponent + 1.0).abs() < 1e-12);
        assert!(ThresholdCurve::new(vec![point(1.0)]).fit.is_none());
    }

    #[test]
    fn scan_pulses_carry_the_scaled_parameters() {
        let settings = ScanSettings::default();
        let n0 = 10.0;
        let hcp = settings.pulse(PulseKind::HalfCycle, 2.0, n0, 0.1);
        let omega = 2.0 / 1000.0;
        assert!((hcp.effective_omega() - omega).abs() < 1e-15);
        assert!((hcp.amplitude / omega.powf(4.0 / 3.0) - 0.1).abs() < 1e-14);
        let sine = settings.pulse(PulseKind::Sinusoidal, 2.0, n0, 0.1);
        assert!((sine.duration * omega / (2.0 * PI) - 50.0).abs() < 1e-10);
        assert!((sine.ramp * omega / (2.0 * PI) - 2.0).abs() < 1e-12);
    }
}
