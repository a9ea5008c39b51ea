use std::f64::consts::PI;

use motionskill::synth::{phase_sweep, snr_sweep, PhaseCurve, SnrCurve};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{write_csv, write_json};

pub const SNR_SCHEMA: &str = "motionskill.snr-curve/v1";
pub const PHASE_SCHEMA: &str = "motionskill.phase-curve/v1";
pub const CHECKS_SCHEMA: &str = "motionskill.synth-checks/v1";

/// Largest allowed Spearman correlation between SNR and mean ApEn.
pub const MAX_SPEARMAN: f64 = -0.9;
/// Peak phase window, in units of π.
pub const PEAK_WINDOW: (f64, f64) = (0.35, 0.65);
/// Largest allowed endpoint value relative to the peak.
pub const ENDPOINT_RATIO: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthChecks {
    pub schema: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
}

pub fn snr_checks(curve: &SnrCurve) -> Vec<Check> {
    curve
        .radii
        .iter()
        .zip(curve.spearman_per_radius())
        .map(|(r, rho)| Check {
            name: format!("snr_trend_r{r}"),
            passed: rho <= MAX_SPEARMAN,
            detail: format!("spearman(snr, mean ApEn) = {rho:.4}, need <= {MAX_SPEARMAN}"),
        })
        .collect()
}

pub fn phase_checks(curve: &PhaseCurve) -> Vec<Check> {
    let peak = curve.peak();
    let at = curve.argmax_phase() / PI;
    let first = curve.mean[0];
    let last = *curve.mean.last().expect("non-empty curve");
    vec![
        Check {
            name: "phase_peak_location".into(),
            passed: (PEAK_WINDOW.0..=PEAK_WINDOW.1).contains(&at),
            detail: format!("peak {peak:.4} at {at:.4}π, need within [{}π, {}π]", PEAK_WINDOW.0, PEAK_WINDOW.1),
        },
        Check {
            name: "phase_endpoint_0".into(),
            passed: first <= ENDPOINT_RATIO * peak,
            detail: format!("value at 0 is {:.4} of peak, need <= {ENDPOINT_RATIO}", first / peak),
        },
        Check {
            name: "phase_endpoint_pi".into(),
            passed: last <= ENDPOINT_RATIO * peak,
            detail: format!("value at π is {:.4} of peak, need <= {ENDPOINT_RATIO}", last / peak),
        },
    ]
}

/// Writes both curves and the trend checks; with `enforce`, any failed check is an error.
pub fn run(cfg: &ExperimentConfig, enforce: bool) -> Result<SynthChecks, CliError> {
    let snr = snr_sweep(&cfg.snr_sweep())?;
    let phase = phase_sweep(&cfg.phase_sweep())?;
    let dir = cfg.output_dir().join("synth");
    write_csv(&dir.join("snr_curve.csv"), SNR_SCHEMA, cfg, &snr.to_csv())?;
    write_csv(&dir.join("phase_curve.csv"), PHASE_SCHEMA, cfg, &phase.to_csv())?;

    let mut checks = snr_checks(&snr);
    checks.extend(phase_checks(&phase));
    let report = SynthChecks {
        schema: CHECKS_SCHEMA.into(),
        config: cfg.clone(),
        checks,
    };
    write_json(&dir.join("checks.json"), &report)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if enforce && failed > 0 {
        return Err(CliError::Check(failed));
    }
    Ok(report)
}
