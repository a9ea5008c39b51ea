//! Synthetic signals: noisy sinusoids for the ApEn/XApEn response curves and
//! labelled skill-like multi-dimensional series for end-to-end runs.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{apen_grid, xapen};
use crate::error::{Error, Result};
use crate::learn::{Criterion, SeriesDataset, SeriesSample, SkillClass, Task};
use crate::rng::substream;
use crate::series::{MultiTimeSeries, DEFAULT_RADII};

/// A unit-amplitude sinusoid with optional white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineSpec {
    /// Cycles over the whole window.
    pub cycles: f64,
    /// Phase offset in radians.
    pub phase: f64,
    /// Linear signal-to-noise power ratio; `None` disables noise.
    pub snr: Option<f64>,
    pub length: usize,
    pub seed: u64,
}

impl Default for SineSpec {
    fn default() -> Self {
        Self {
            cycles: 8.0,
            phase: 0.0,
            snr: None,
            length: 1024,
            seed: 0,
        }
    }
}

impl SineSpec {
    fn check(&self) -> Result<()> {
        if self.length < 16 {
            return Err(Error::Parameter(format!("sine length {} below 16", self.length)));
        }
        if let Some(snr) = self.snr {
            if !(snr.is_finite() && snr > 0.0) {
                return Err(Error::Parameter(format!("snr must be positive, got {snr}")));
            }
        }
        Ok(())
    }
}

/// Clean signal and scaled noise, kept apart so the realized SNR can be measured.
pub fn sine_parts(spec: &SineSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.check()?;
    let n = spec.length;
    let signal: Vec<f64> = (0..n)
        .map(|t| (2.0 * PI * spec.cycles * t as f64 / n as f64 + spec.phase).sin())
        .collect();
    let Some(snr) = spec.snr else {
        return Ok((signal, vec![0.0; n]));
    };
    let mut rng = substream(spec.seed, "sine-noise", 0);
    let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let p_signal = power(&signal);
    let p_raw = power(&raw);
    // scale so that p_signal / p_noise equals the requested ratio exactly
    let scale = (p_signal / (snr * p_raw)).sqrt();
    Ok((signal, raw.into_iter().map(|w| w * scale).collect()))
}

/// Mean square.
pub fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

pub fn gen_sine(spec: &SineSpec) -> Result<MultiTimeSeries<f64>> {
    let (s, w) = sine_parts(spec)?;
    MultiTimeSeries::from_single(s.iter().zip(&w).map(|(a, b)| a + b).collect())
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrSweep {
    pub radii: Vec<f64>,
    pub snr_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub cycles: f64,
    pub length: usize,
    pub m: usize,
    pub tau: usize,
}

impl Default for SnrSweep {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII.to_vec(),
            snr_grid: (1..=50).map(f64::from).collect(),
            reps: 20,
            seed: 0,
            cycles: 8.0,
            length: 1024,
            m: 1,
            tau: 1,
        }
    }
}

/// Mean and std of ApEn over repetitions, `[snr][radius]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrCurve {
    pub snr: Vec<f64>,
    pub radii: Vec<f64>,
    pub reps: usize,
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

impl SnrCurve {
    /// Spearman correlation between SNR and mean ApEn, one per radius.
    pub fn spearman_per_radius(&self) -> Vec<f64> {
        (0..self.radii.len())
            .map(|k| {
                let col: Vec<f64> = self.mean.iter().map(|row| row[k]).collect();
                spearman(&self.snr, &col)
            })
            .collect()
    }

    /// Long-format CSV: `snr,radius,mean_apen,std_apen,reps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr,radius,mean_apen,std_apen,reps\n");
        for (i, snr) in self.snr.iter().enumerate() {
            for (k, r) in self.radii.iter().enumerate() {
                let _ = writeln!(out, "{snr},{r},{},{},{}", self.mean[i][k], self.std[i][k], self.reps);
            }
        }
        out
    }
}

pub fn snr_sweep(cfg: &SnrSweep) -> Result<SnrCurve> {
    if cfg.reps == 0 || cfg.snr_grid.is_empty() {
        return Err(Error::Parameter("snr sweep needs reps >= 1 and a non-empty grid".into()));
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = cfg
        .snr_grid
        .par_iter()
        .enumerate()
        .map(|(g, &snr)| {
            let per_rep: Vec<Vec<f64>> = (0..cfg.reps)
                .map(|rep| {
                    let spec = SineSpec {
                        cycles: cfg.cycles,
                        phase: 0.0,
                        snr: Some(snr),
                        length: cfg.length,
                        seed: grid_seed(cfg.seed, "snr-sweep", g, rep),
                    };
                    let s = gen_sine(&spec)?;
                    apen_grid(s.row(0), cfg.m, &cfg.radii, cfg.tau)
                })
                .collect::<Result<_>>()?;
            Ok(column_stats(&per_rep, cfg.radii.len()))
        })
        .collect::<Result<_>>()?;
    let (mean, std) = rows.into_iter().unzip();
    Ok(SnrCurve {
        snr: cfg.snr_grid.clone(),
        radii: cfg.radii.clone(),
        reps: cfg.reps,
        mean,
        std,
    })
}

fn column_stats(per_rep: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    (0..width)
        .map(|k| mean_std(&per_rep.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .unzip()
}

/// Seed for one (grid point, repetition) cell, derived from the sweep seed.
fn grid_seed(seed: u64, label: &str, g: usize, rep: usize) -> u64 {
    substream(seed, label, ((g as u64) << 32) | rep as u64).random::<u64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub phases: Vec<f64>,
    pub snr: f64,
    pub reps: usize,
    pub seed: u64,
    pub cycles: f64,
    pub length: usize,
    /// Absolute radius in z-score units.
    pub radius: f64,
    pub m: usize,
    pub tau: usize,
}

impl Default for PhaseSweep {
    fn default() -> Self {
        Self {
            phases: (0..=16).map(|i| PI * i as f64 / 16.0).collect(),
            snr: 10.0,
            reps: 20,
            seed: 0,
            cycles: 8.0,
            length: 1024,
            radius: 0.2,
            m: 1,
            tau: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurve {
    pub phases: Vec<f64>,
    pub reps: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl PhaseCurve {
    /// Phase with the largest mean XApEn (first on ties).
    pub fn argmax_phase(&self) -> f64 {
        let (i, _) = self
            .mean
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        self.phases[i]
    }

    pub fn peak(&self) -> f64 {
        self.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `phase,phase_over_pi,mean_xapen,std_xapen,reps`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,phase_over_pi,mean_xapen,std_xapen,reps\n");
        for (i, p) in self.phases.iter().enumerate() {
            let _ = writeln!(out, "{p},{},{},{},{}", p / PI, self.mean[i], self.std[i], self.reps);
        }
        out
    }
}

/// XApEn between a noisy phase-0 reference and a noisy copy shifted by each phase.
pub fn phase_sweep(cfg: &PhaseSweep) -> Result<PhaseCurve> {
    if cfg.reps == 0 || cfg.phases.is_empty() {
        return Err(Error::Parameter("phase sweep needs reps >= 1 and a non-empty grid".into()));
    }
    let stats: Vec<(f64, f64)> = cfg
        .phases
        .par_iter()
        .enumerate()
        .map(|(g, &phase)| {
            let vals: Vec<f64> = (0..cfg.reps)
                .map(|rep| {
                    let base = SineSpec {
                        cycles: cfg.cycles,
                        phase: 0.0,
                        snr: Some(cfg.snr),
                        length: cfg.length,
                        seed: grid_seed(cfg.seed, "phase-ref", g, rep),
                    };
                    let shifted = SineSpec {
                        phase,
                        seed: grid_seed(cfg.seed, "phase-shifted", g, rep),
                        ..base
                    };
                    let (a, b) = (gen_sine(&base)?, gen_sine(&shifted)?);
                    xapen(a.row(0), b.row(0), cfg.m, cfg.radius, cfg.tau)
                })
                .collect::<Result<_>>()?;
            Ok(mean_std(&vals))
        })
        .collect::<Result<_>>()?;
    let (mean, std) = stats.into_iter().unzip();
    Ok(PhaseCurve {
        phases: cfg.phases.clone(),
        reps: cfg.reps,
        mean,
        std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillDatasetSpec {
    pub per_class: usize,
    pub dims: usize,
    pub length: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub task: Task,
}

impl Default for SkillDatasetSpec {
    fn default() -> Self {
        Self {
            per_class: 10,
            dims: 6,
            length: 1024,
            seed: 0,
            criterion: Criterion::OP,
            task: Task::KnotTying,
        }
    }
}

/// Class-dependent motion character: irregularity, jerkiness and
/// inter-dimension desynchronization all grow with decreasing skill.
#[derive(Debug, Clone, Copy)]
struct SkillProfile {
    /// Noise std relative to the motion amplitude.
    noise: f64,
    /// Expected impulses per 1000 samples.
    jerks_per_1000: f64,
    /// Std of the per-step phase random walk, radians.
    jitter: f64,
}

fn profile(class: SkillClass) -> SkillProfile {
    match class {
        SkillClass::Expert => SkillProfile {
            noise: 0.05,
            jerks_per_1000: 1.0,
            jitter: 0.004,
        },
        SkillClass::Intermediate => SkillProfile {
            noise: 0.2,
            jerks_per_1000: 6.0,
            jitter: 0.03,
        },
        SkillClass::Beginner => SkillProfile {
            noise: 0.45,
            jerks_per_1000: 15.0,
            jitter: 0.08,
        },
    }
}

/// Labelled K-dimensional series, `per_class` samples for each of the three
/// skill classes, ordered beginner, intermediate, expert.
///
/// Each dimension is a shared periodic motion with a fixed per-dimension
/// phase offset. Amplitude, tempo, per-dimension gain and offset are drawn
/// per sample independently of the class; the class only controls noise,
/// impulse rate and phase jitter.
pub fn gen_skill_dataset(spec: &SkillDatasetSpec) -> Result<SeriesDataset<f64>> {
    if spec.per_class < 4 {
        return Err(Error::Parameter(format!("per_class must be >= 4, got {}", spec.per_class)));
    }
    if spec.dims == 0 || spec.length < 16 {
        return Err(Error::Parameter("skill series need dims >= 1 and length >= 16".into()));
    }
    let samples = SkillClass::ALL
        .iter()
        .flat_map(|&c| (0..spec.per_class).map(move |i| (c, i)))
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(idx, (class, i))| {
            let series = skill_series(spec, class, idx as u64)?;
            Ok(SeriesSample {
                id: format!("{}-{i:02}", class.as_str()),
                series,
                class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesDataset {
        criterion: spec.criterion,
        task: spec.task,
        samples,
    })
}

fn skill_series(spec: &SkillDatasetSpec, class: SkillClass, index: u64) -> Result<MultiTimeSeries<f64>> {
    let p = profile(class);
    let mut rng = substream(spec.seed, "skill-sample", index);
    let n = spec.length;
    let amplitude = (rng.random_range(0.3f64.ln()..3.0f64.ln())).exp();
    let cycles = rng.random_range(5.0..12.0);
    let jerk_prob = p.jerks_per_1000 / 1000.0;
    let rows = (0..spec.dims)
        .map(|d| {
            let gain = amplitude * rng.random_range(0.5..1.5);
            let offset = rng.random_range(-5.0..5.0);
            let base_phase = PI * d as f64 / spec.dims as f64;
            let mut drift = 0.0;
            let mut row = Vec::with_capacity(n);
            for t in 0..n {
                drift += p.jitter * rng.sample::<f64, _>(StandardNormal);
                let clean = (2.0 * PI * cycles * t as f64 / n as f64 + base_phase + drift).sin();
                let noise = p.noise * rng.sample::<f64, _>(StandardNormal);
                row.push(offset + gain * (clean + noise));
            }
            let mut t = 0;
            while t < n {
                if rng.random_bool(jerk_prob) {
                    let size = gain * rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    for (k, decay) in [1.0, 0.6, 0.3].iter().enumerate() {
                        if t + k < n {
                            row[t + k] += size * decay;
                        }
                    }
                }
                t += 1;
            }
            row
        })
        .collect();
    MultiTimeSeries::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::apen;

    #[test]
    fn realized_snr_matches_request() {
        for snr in [1.0, 7.5, 50.0] {
            let (s, w) = sine_parts(&SineSpec {
                snr: Some(snr),
                seed: 3,
                ..Default::default()
            })
            .unwrap();
            let realized = power(&s) / power(&w);
            assert!((realized / snr - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn pi_shift_negates_noiseless_sine() {
        let a = gen_sine(&SineSpec::default()).unwrap();
        let b = gen_sine(&SineSpec {
            phase: PI,
            ..Default::default()
        })
        .unwrap();
        for (x, y) in a.row(0).iter().zip(b.row(0)) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_noise_replays_bit_identically() {
        let spec = SineSpec {
            snr: Some(4.0),
            seed: 12,
            ..Default::default()
        };
        assert_eq!(gen_sine(&spec).unwrap(), gen_sine(&spec).unwrap());
    }

    #[test]
    fn pure_sine_is_most_regular() {
        let pure = apen(gen_sine(&SineSpec::default()).unwrap().row(0), 1, 0.2, 1).unwrap();
        for snr in [1.0, 5.0, 20.0, 50.0] {
            let noisy = gen_sine(&SineSpec {
                snr: Some(snr),
                seed: 1,
                ..Default::default()
            })
            .unwrap();
            assert!(pure < apen(noisy.row(0), 1, 0.2, 1).unwrap());
        }
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.5]) + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn repeated_snr_grid_point_gives_same_distribution_rows() {
        let curve = snr_sweep(&SnrSweep {
            snr_grid: vec![10.0, 10.0],
            reps: 6,
            length: 256,
            ..Default::default()
        })
        .unwrap();
        for k in 0..curve.radii.len() {
            let (a, b) = (curve.mean[0][k], curve.mean[1][k]);
            let band = 4.0 * (curve.std[0][k] + curve.std[1][k]) / (6f64).sqrt();
            assert!((a - b).abs() <= band, "{a} vs {b}");
        }
    }

    #[test]
    fn more_reps_keep_trend_and_tighten_mean() {
        let grid: Vec<f64> = (1..=10).map(|s| f64::from(s * 5)).collect();
        let base = SnrSweep {
            snr_grid: grid,
            radii: vec![0.2],
            length: 512,
            seed: 9,
            ..Default::default()
        };
        let one = snr_sweep(&SnrSweep { reps: 1, ..base.clone() }).unwrap();
        let many = snr_sweep(&SnrSweep { reps: 20, ..base }).unwrap();
        assert!(one.spearman_per_radius()[0] < -0.7);
        assert!(many.spearman_per_radius()[0] <= one.spearman_per_radius()[0] + 0.05);
        assert!(many.std.iter().all(|r| r[0] > 0.0));
    }

    #[test]
    fn skill_dataset_counts_and_determinism() {
        let spec = SkillDatasetSpec {
            per_class: 4,
            dims: 3,
            length: 256,
            seed: 5,
            ..Default::default()
        };
        let a = gen_skill_dataset(&spec).unwrap();
        assert_eq!(a.len(), 12);
        assert_eq!(a, gen_skill_dataset(&spec).unwrap());
        assert!(gen_skill_dataset(&SkillDatasetSpec { per_class: 3, ..spec }).is_err());
    }

    #[test]
    fn experts_have_lowest_mean_apen() {
        let ds = gen_skill_dataset(&SkillDatasetSpec {
            per_class: 5,
            dims: 3,
            length: 512,
            seed: 2,
            ..Default::default()
        })
        .unwrap();
        let mut per_class = [0.0f64; 3];
        let mut counts = [0usize; 3];
        for s in &ds.samples {
            for row in s.series.rows() {
                per_class[s.class.index()] += apen(row, 1, 0.2, 1).unwrap();
                counts[s.class.index()] += 1;
            }
        }
        let means: Vec<f64> = per_class.iter().zip(counts).map(|(s, c)| s / c as f64).collect();
        let expert = means[SkillClass::Expert.index()];
        assert!(expert < means[SkillClass::Intermediate.index()]);
        assert!(expert < means[SkillClass::Beginner.index()]);
    }
}
