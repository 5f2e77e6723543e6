//! Grid sweeps over threshold and refractory period, and the rate-model fit.
//!
//! Cells share nothing but the synthesized input, so they run in parallel and
//! are gathered back in grid order: `t_rfr` outer, `v_th` inner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AdmConfig;
use crate::encoder::encode;
use crate::error::{Error, Result};
use crate::reconstruction::{detrended_rmse, reconstruct, ReconstructionConfig};
use crate::signal::Signal;
use crate::synth::{SynthKind, SynthSpec};

/// `n` values spaced evenly in log between `min` and `max` inclusive.
pub fn log_spaced(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (lo, hi) = (min.ln(), max.ln());
            (0..n)
                .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub v_th_values: Vec<f64>,
    pub t_rfr_values: Vec<f64>,
    pub signal: SynthSpec,
    /// Applied to both the original and the reconstruction; zero disables it.
    pub highpass_cutoff_hz: f64,
    pub initial_level: f64,
}

impl SweepGrid {
    /// 16 thresholds over two decades around the slope-overload point of the
    /// sine, against refractory periods of 0, 0.1, 0.5, 1 and 2 ms.
    ///
    /// The detrending cutoff is a twentieth of the sine frequency.
    pub fn default_for(signal: SynthSpec) -> Self {
        let amplitude = signal.amplitude * signal.gain();
        let cutoff = signal.frequency_hz / 20.0;
        Self {
            v_th_values: log_spaced(2e-3 * amplitude, 0.2 * amplitude, 16),
            t_rfr_values: vec![0.0, 0.1e-3, 0.5e-3, 1e-3, 2e-3],
            signal,
            highpass_cutoff_hz: cutoff,
            initial_level: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_th_values.is_empty() || self.t_rfr_values.is_empty() {
            return Err(Error::InvalidConfig("sweep grids must be non-empty".into()));
        }
        for &v in &self.v_th_values {
            for &t in &self.t_rfr_values {
                AdmConfig::symmetric(v, t)?;
            }
        }
        self.signal.validate()
    }

    pub fn cell_count(&self) -> usize {
        self.v_th_values.len() * self.t_rfr_values.len()
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        self.t_rfr_values
            .iter()
            .flat_map(|&t| self.v_th_values.iter().map(move |&v| (v, t)))
            .collect()
    }
}

impl Default for SweepGrid {
    /// Unit-amplitude 10 Hz sine, half a second at 100 kHz.
    fn default() -> Self {
        Self::default_for(SynthSpec::sine(1.0, 10.0, 0.5, 100_000.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub v_th: f64,
    pub t_rfr_s: f64,
    pub rmse: f64,
    pub event_count: usize,
    pub event_rate_hz: f64,
}

/// Encodes, reconstructs and scores one (threshold, refractory) pair.
pub fn evaluate_cell(
    signal: &Signal,
    v_th: f64,
    t_rfr_s: f64,
    highpass_cutoff_hz: f64,
    initial_level: f64,
) -> Result<SweepRecord> {
    let config = AdmConfig::symmetric(v_th, t_rfr_s)?;
    let events = encode(signal, &config)?;
    let recon = reconstruct(
        &events,
        &ReconstructionConfig {
            initial_level,
            ..ReconstructionConfig::symmetric(v_th).with_cutoff(highpass_cutoff_hz)
        },
    )?;
    Ok(SweepRecord {
        v_th,
        t_rfr_s,
        rmse: detrended_rmse(signal, &recon, highpass_cutoff_hz)?,
        event_count: events.len(),
        event_rate_hz: events.rate_hz(),
    })
}

pub fn rmse_sweep(grid: &SweepGrid) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    let signal = grid.signal.generate()?;
    rmse_sweep_signal(&signal, grid)
}

/// Runs the grid's cells against `signal` instead of the synthesized input.
pub fn rmse_sweep_signal(signal: &Signal, grid: &SweepGrid) -> Result<Vec<SweepRecord>> {
    if grid.v_th_values.is_empty() || grid.t_rfr_values.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must be non-empty".into()));
    }
    grid.cells()
        .into_par_iter()
        .map(|(v, t)| evaluate_cell(signal, v, t, grid.highpass_cutoff_hz, grid.initial_level))
        .collect()
}

/// Minimum-RMSE record; ties go to the smaller threshold, then the smaller
/// refractory period.
pub fn find_min_rmse(records: &[SweepRecord]) -> Result<SweepRecord> {
    records
        .iter()
        .copied()
        .min_by(|a, b| {
            a.rmse
                .total_cmp(&b.rmse)
                .then(a.v_th.total_cmp(&b.v_th))
                .then(a.t_rfr_s.total_cmp(&b.t_rfr_s))
        })
        .ok_or(Error::EmptyRecords)
}

/// Records for one refractory period, ordered by threshold.
pub fn curve(records: &[SweepRecord], t_rfr_s: f64) -> Vec<SweepRecord> {
    let mut out: Vec<SweepRecord> = records
        .iter()
        .copied()
        .filter(|r| r.t_rfr_s == t_rfr_s)
        .collect();
    out.sort_by(|a, b| a.v_th.total_cmp(&b.v_th));
    out
}

/// True when the sequence falls and then rises at most once, ignoring steps
/// whose relative size is within `tolerance`.
pub fn is_quasi_convex(values: &[f64], tolerance: f64) -> bool {
    let mut rising = false;
    for w in values.windows(2) {
        let scale = w[0].abs().max(w[1].abs());
        let rel = if scale > 0.0 {
            (w[1] - w[0]) / scale
        } else {
            0.0
        };
        if rel > tolerance {
            rising = true;
        } else if rel < -tolerance && rising {
            return false;
        }
    }
    true
}

/// One measured point of the rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub v_th: f64,
    pub rate_hz: f64,
}

impl RatePoint {
    /// The model's regressor, `A * f / v_th`.
    pub fn drive(&self) -> f64 {
        self.amplitude * self.frequency_hz / self.v_th
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of `rate = k * A * f / v_th`.
    pub k: f64,
    /// Coefficient of determination about the mean of the measured rates.
    pub r_squared: f64,
    pub points: Vec<RatePoint>,
}

/// Measures the event rate of every sine in the cartesian grid and fits
/// `rate = k * A * f / v_th` through the origin.
///
/// With a refractory period the fit is refused once any rate reaches half
/// the refractory cap, where proportionality no longer holds.
pub fn rate_model_fit(
    amplitudes: &[f64],
    frequencies: &[f64],
    v_th_values: &[f64],
    t_rfr_s: f64,
    template: &SynthSpec,
) -> Result<RateFit> {
    if template.kind != SynthKind::Sine {
        return Err(Error::InvalidSpec(
            "rate model needs a sine template".into(),
        ));
    }
    if amplitudes.is_empty() || frequencies.is_empty() || v_th_values.is_empty() {
        return Err(Error::InvalidConfig(
            "rate model grids must be non-empty".into(),
        ));
    }
    let mut cells = Vec::new();
    for &a in amplitudes {
        for &f in frequencies {
            for &v in v_th_values {
                cells.push((a, f, v));
            }
        }
    }
    let points: Vec<RatePoint> = cells
        .into_par_iter()
        .map(|(amplitude, frequency_hz, v_th)| {
            let spec = SynthSpec {
                amplitude,
                frequency_hz,
                ..template.clone()
            };
            let signal = spec.generate()?;
            let events = encode(&signal, &AdmConfig::symmetric(v_th, t_rfr_s)?)?;
            Ok(RatePoint {
                amplitude,
                frequency_hz,
                v_th,
                rate_hz: events.rate_hz(),
            })
        })
        .collect::<Result<_>>()?;

    if t_rfr_s > 0.0 {
        let limit = 0.5 / t_rfr_s;
        let max = points.iter().map(|p| p.rate_hz).fold(0.0, f64::max);
        if max >= limit {
            return Err(Error::SaturatedRegime {
                max_rate_hz: max,
                limit_hz: limit,
            });
        }
    }

    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.drive(), p.rate_hz)).collect();
    let (k, r_squared) = fit_through_origin(&xy);
    Ok(RateFit {
        k,
        r_squared,
        points,
    })
}

/// Least-squares slope through the origin and its R².
pub fn fit_through_origin(points: &[(f64, f64)]) -> (f64, f64) {
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let k = sxy / sxx;
    let mean = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - k * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    (k, r_squared)
}
