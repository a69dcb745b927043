//! The four commands. Each returns the rendered artifacts and whether the
//! checked property held.

use std::f64::consts::PI;
use std::fmt::Write;

use log::info;
use rand::distr::Open01;
use rand::Rng;
use rydberg_core::dynamics::{energy, integrate_with, scaling_deviation, IntegrateOptions, ScalingPair, StepRecord, TrajectoryStatus};
use rydberg_core::ensemble::{orbit_point, threshold_scan_with, Executor, ThresholdCurve};
use rydberg_core::rng::sample_stream;
use rydberg_core::thresholds::{comparison_row, MechanismTag};
use rydberg_core::Error;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::output::{csv_preamble, float, float_or_empty, json_document};
use crate::CliError;

/// Rendered result of a command.
pub struct Report {
    pub main: String,
    /// Extra JSON document written next to the main output, if any.
    pub summary: Option<String>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    PropertyViolated,
    NumericalFailure,
}

pub fn trajectory(config: &RunConfig) -> Result<Report, CliError> {
    let tc = &config.trajectory;
    let pulse = config.pulse.to_pulse()?;
    let initial = tc.initial()?;
    let t_end = tc.resolved_t_end(&pulse)?;
    let options = IntegrateOptions {
        max_steps: tc.max_steps,
        ..IntegrateOptions::with_tol(tc.tol)
    };

    let e0 = energy(&initial).map_err(|e| CliError::core("trajectory", e))?;
    let mut rows = vec![StepRecord {
        t: 0.0,
        x: initial.x,
        p: initial.p,
        energy: e0,
        field: pulse.field_at(0.0),
    }];
    let mut record = |r: &StepRecord| rows.push(*r);
    let result = integrate_with(&initial, &pulse, t_end, &options, Some(&mut record))
        .map_err(|e| CliError::core("trajectory", e))?;
    let status = match result.status {
        TrajectoryStatus::Completed => "completed",
        TrajectoryStatus::EscapedEarly => "escaped_early",
    };
    let summary = json!({
        "energy_final": result.energy_final,
        "ionised": result.ionised,
        "max_x": result.max_x,
        "steps": result.steps,
        "status": status,
    });

    let main = match config.format {
        Format::Csv => {
            let mut out = csv_preamble(config);
            writeln!(out, "# result: {summary}").unwrap();
            out.push_str("t,x,p,E,field\n");
            for r in &rows {
                writeln!(out, "{},{},{},{},{}", float(r.t), float(r.x), float(r.p), float(r.energy), float(r.field)).unwrap();
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows.iter().map(|r| json!([r.t, r.x, r.p, r.energy, r.field])).collect();
            json_document(
                config,
                json!({ "result": summary, "columns": ["t", "x", "p", "E", "field"], "rows": rows }),
            )
        }
    };
    Ok(Report {
        main,
        summary: None,
        outcome: Outcome::Success,
    })
}

struct ScanRow {
    s0: f64,
    fs_th: Option<f64>,
    stderr: Option<f64>,
    p_at_threshold: Option<f64>,
    probes: Option<u32>,
    status: &'static str,
}

pub fn scan(config: &RunConfig, jobs: usize) -> Result<Report, CliError> {
    let exec = Executor::with_jobs(jobs).map_err(|e| CliError::core("jobs", e))?;
    let spec = &config.ensemble;
    let kind = config.scan.kind;
    let mut rows = Vec::new();
    let mut found = Vec::new();
    let mut numerical = false;
    for &s0 in &config.s0_grid {
        let row = match threshold_scan_with(spec, s0, kind, &config.scan.settings, &exec) {
            Ok(point) => {
                info!(
                    "s0 = {s0}: Fs_th = {:.6e} +- {:.2e} (P = {:.4}, {} probes)",
                    point.fs_th, point.stderr, point.p_at_threshold, point.probes
                );
                found.push(point);
                ScanRow {
                    s0,
                    fs_th: Some(point.fs_th),
                    stderr: Some(point.stderr),
                    p_at_threshold: Some(point.p_at_threshold),
                    probes: Some(point.probes),
                    status: "ok",
                }
            }
            Err(e @ Error::BracketFailure { .. }) => {
                info!("s0 = {s0}: {e}");
                ScanRow::failed(s0, "bracket_failure")
            }
            Err(e) if e.is_numerical() => {
                info!("s0 = {s0}: {e}");
                numerical = true;
                ScanRow::failed(s0, "step_failure")
            }
            Err(e) => return Err(CliError::core("scan", e)),
        };
        rows.push(row);
    }

    let curve = ThresholdCurve::new(found);
    if let Some(fit) = &curve.fit {
        info!("fit: exponent = {:.6}, prefactor = {:.6e}, residual = {:.3e}", fit.exponent, fit.prefactor, fit.residual);
    }
    let mechanism = MechanismTag::SimulatedClassical.as_str();
    let points: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "s0": r.s0,
                "Fs_th": r.fs_th,
                "mechanism": mechanism,
                "target_P": spec.target_p,
                "count": spec.count,
                "seed": spec.seed,
                "stderr": r.stderr,
                "P_at_threshold": r.p_at_threshold,
                "probes": r.probes,
                "status": r.status,
            })
        })
        .collect();
    let mut body = json!({ "points": points });
    if let Some(fit) = &curve.fit {
        body["fit"] = json!({
            "exponent": fit.exponent,
            "prefactor": fit.prefactor,
            "residual": fit.residual,
        });
    }
    let summary_doc = json_document(config, body);

    let (main, summary) = match config.format {
        Format::Csv => {
            let mut out = csv_preamble(config);
            out.push_str("s0,Fs_th,mechanism,target_P,count,seed,stderr,status\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{mechanism},{},{},{},{},{}",
                    float(r.s0),
                    float_or_empty(r.fs_th),
                    float(spec.target_p),
                    spec.count,
                    spec.seed,
                    float_or_empty(r.stderr),
                    r.status
                )
                .unwrap();
            }
            (out, Some(summary_doc))
        }
        Format::Json => (summary_doc, None),
    };
    Ok(Report {
        main,
        summary,
        outcome: if numerical { Outcome::NumericalFailure } else { Outcome::Success },
    })
}

impl ScanRow {
    fn failed(s0: f64, status: &'static str) -> Self {
        ScanRow {
            s0,
            fs_th: None,
            stderr: None,
            p_at_threshold: None,
            probes: None,
            status,
        }
    }
}

pub fn compare(config: &RunConfig) -> Result<Report, CliError> {
    let rows = config
        .s0_grid
        .iter()
        .map(|&s0| comparison_row(s0, &config.compare.chaos_mw))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::core("s0_grid", e))?;
    let main = match config.format {
        Format::Csv => {
            let mut out = csv_preamble(config);
            out.push_str("s0,static,chaos_mw,hcp_exp,photonic,multiphoton\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    float(r.s0),
                    float(r.static_limit),
                    float(r.chaos_mw),
                    float(r.hcp_exp),
                    float(r.photonic),
                    float(r.multiphoton)
                )
                .unwrap();
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "s0": r.s0,
                        "static": r.static_limit,
                        "chaos_mw": r.chaos_mw,
                        "hcp_exp": r.hcp_exp,
                        "photonic": r.photonic,
                        "multiphoton": r.multiphoton,
                    })
                })
                .collect();
            json_document(config, json!({ "rows": rows }))
        }
    };
    Ok(Report {
        main,
        summary: None,
        outcome: Outcome::Success,
    })
}

fn uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

pub fn scaling_check(config: &RunConfig) -> Result<Report, CliError> {
    let c = &config.scaling_check;
    let mut pairs = Vec::with_capacity(c.pairs);
    let mut worst = 0.0f64;
    for k in 0..c.pairs {
        let mut rng = sample_stream(config.ensemble.seed, k as u64);
        let s0 = uniform(&mut rng, c.s0_range);
        let fs = uniform(&mut rng, c.fs_range);
        let n0_a = uniform(&mut rng, c.n0_range);
        let n0_b = uniform(&mut rng, c.n0_range);
        let mean_anomaly = 2.0 * PI * rng.sample::<f64, _>(Open01);
        let phi = 2.0 * PI * rng.random::<f64>();
        let pair = ScalingPair {
            s0,
            fs_a: fs,
            fs_b: fs * (1.0 + c.fs_mismatch),
            n0_a,
            n0_b,
            phi,
            initial_a: orbit_point(n0_a, mean_anomaly),
            periods: c.periods,
        };
        let deviation = scaling_deviation(&pair, c.tol).map_err(|e| CliError::core("scaling_check", e))?;
        info!("pair {k}: s0 = {s0:.4}, Fs = {fs:.4}, n0 = {n0_a:.2} vs {n0_b:.2}: deviation {deviation:.3e}");
        worst = worst.max(deviation);
        pairs.push((pair, mean_anomaly, deviation));
    }
    let passed = worst <= c.threshold;
    info!("max deviation {worst:.3e}, threshold {:.1e}: {}", c.threshold, if passed { "pass" } else { "FAIL" });

    let main = match config.format {
        Format::Csv => {
            let mut out = csv_preamble(config);
            writeln!(out, "# max_deviation: {}", float(worst)).unwrap();
            writeln!(out, "# passed: {passed}").unwrap();
            out.push_str("pair,s0,Fs_a,Fs_b,n0_a,n0_b,mean_anomaly,phi,deviation\n");
            for (k, (p, m, d)) in pairs.iter().enumerate() {
                writeln!(
                    out,
                    "{k},{},{},{},{},{},{},{},{}",
                    float(p.s0),
                    float(p.fs_a),
                    float(p.fs_b),
                    float(p.n0_a),
                    float(p.n0_b),
                    float(*m),
                    float(p.phi),
                    float(*d)
                )
                .unwrap();
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = pairs
                .iter()
                .map(|(p, m, d)| {
                    json!({
                        "s0": p.s0,
                        "Fs_a": p.fs_a,
                        "Fs_b": p.fs_b,
                        "n0_a": p.n0_a,
                        "n0_b": p.n0_b,
                        "mean_anomaly": m,
                        "phi": p.phi,
                        "deviation": d,
                    })
                })
                .collect();
            json_document(
                config,
                json!({
                    "max_deviation": worst,
                    "threshold": c.threshold,
                    "passed": passed,
                    "pairs": rows,
                }),
            )
        }
    };
    Ok(Report {
        main,
        summary: None,
        outcome: if passed { Outcome::Success } else { Outcome::PropertyViolated },
    })
}
