//! Staircase decoding, drift removal and error measurement.

use serde::{Deserialize, Serialize};

use crate::adaptive::lpf_first_order;
use crate::error::{Error, Result};
use crate::signal::{EventStream, Polarity, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub v_thu: f64,
    pub v_thd: f64,
    #[serde(default)]
    pub initial_level: f64,
    /// Zero disables detrending.
    #[serde(default)]
    pub highpass_cutoff_hz: f64,
}

impl ReconstructionConfig {
    /// Symmetric steps, zero origin, no detrending.
    pub fn symmetric(v_th: f64) -> Self {
        Self {
            v_thu: v_th,
            v_thd: v_th,
            initial_level: 0.0,
            highpass_cutoff_hz: 0.0,
        }
    }

    pub fn with_cutoff(self, highpass_cutoff_hz: f64) -> Self {
        Self {
            highpass_cutoff_hz,
            ..self
        }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        for (name, v) in [("v_thu", self.v_thu), ("v_thd", self.v_thd)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !self.initial_level.is_finite() {
            return Err(Error::InvalidConfig("initial_level must be finite".into()));
        }
        let nyquist = sample_rate_hz / 2.0;
        if !(self.highpass_cutoff_hz.is_finite()
            && self.highpass_cutoff_hz >= 0.0
            && self.highpass_cutoff_hz < nyquist)
        {
            return Err(Error::InvalidCutoff {
                cutoff_hz: self.highpass_cutoff_hz,
                nyquist_hz: nyquist,
            });
        }
        Ok(())
    }
}

/// Zero-order-hold staircase: starts at `initial_level` and steps by `+v_thu`
/// or `-v_thd` at each event index.
///
/// The cutoff in `config` is not applied here; see [`highpass_detrend`].
pub fn reconstruct(events: &EventStream, config: &ReconstructionConfig) -> Result<Signal> {
    staircase(events, config, |_| (config.v_thu, config.v_thd))
}

/// Staircase for events produced against a time-varying symmetric threshold;
/// each step uses the threshold in effect at the emitting sample.
pub fn reconstruct_with_threshold_trace(
    events: &EventStream,
    v_th_trace: &Signal,
    initial_level: f64,
) -> Result<Signal> {
    if v_th_trace.len() != events.source_length() {
        return Err(Error::LengthMismatch {
            left: events.source_length(),
            right: v_th_trace.len(),
        });
    }
    let config = ReconstructionConfig {
        initial_level,
        ..ReconstructionConfig::symmetric(1.0)
    };
    let v = v_th_trace.samples();
    staircase(events, &config, |i| (v[i], v[i]))
}

fn staircase(
    events: &EventStream,
    config: &ReconstructionConfig,
    step_at: impl Fn(usize) -> (f64, f64),
) -> Result<Signal> {
    let len = events.source_length();
    if len == 0 {
        return Err(Error::EmptyStreamLength);
    }
    config.validate(events.source_sample_rate_hz())?;
    let mut out = Vec::with_capacity(len);
    let mut level = config.initial_level;
    let mut pending = events.events().iter().peekable();
    for n in 0..len {
        if let Some(e) = pending.next_if(|e| e.index == n) {
            let (up, dn) = step_at(n);
            match e.polarity {
                Polarity::Up => level += up,
                Polarity::Dn => level -= dn,
            }
        }
        out.push(level);
    }
    Signal::new(out, events.source_sample_rate_hz())
}

/// First-order high-pass: the input minus its exponential low-pass with
/// `tau = 1 / (2 pi cutoff_hz)`.
pub fn highpass_detrend(signal: &Signal, cutoff_hz: f64) -> Result<Signal> {
    let nyquist = signal.sample_rate_hz() / 2.0;
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidCutoff {
            cutoff_hz,
            nyquist_hz: nyquist,
        });
    }
    let tau = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    let low = lpf_first_order(signal, tau, 1.0)?;
    Signal::new(
        signal
            .samples()
            .iter()
            .zip(low.samples())
            .map(|(x, l)| x - l)
            .collect(),
        signal.sample_rate_hz(),
    )
}

/// Root-mean-square difference after removing each trace's mean.
pub fn rmse(a: &Signal, b: &Signal) -> Result<f64> {
    a.check_aligned(b)?;
    let (ma, mb) = (a.mean(), b.mean());
    Ok(mean_square(a, b, ma, mb).sqrt())
}

/// Root-mean-square difference without mean removal.
pub fn raw_rmse(a: &Signal, b: &Signal) -> Result<f64> {
    a.check_aligned(b)?;
    Ok(mean_square(a, b, 0.0, 0.0).sqrt())
}

fn mean_square(a: &Signal, b: &Signal, ma: f64, mb: f64) -> f64 {
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| {
            let d = (x - ma) - (y - mb);
            d * d
        })
        .sum();
    sum / a.len() as f64
}

/// Shape error between an original trace and its reconstruction: both are
/// passed through the same high-pass (skipped when `cutoff_hz` is zero) and
/// compared with [`rmse`].
pub fn detrended_rmse(original: &Signal, reconstructed: &Signal, cutoff_hz: f64) -> Result<f64> {
    if cutoff_hz == 0.0 {
        return rmse(original, reconstructed);
    }
    rmse(
        &highpass_detrend(original, cutoff_hz)?,
        &highpass_detrend(reconstructed, cutoff_hz)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Event;
    use std::f64::consts::PI;

    #[test]
    fn no_events_gives_flat_line() {
        let events = EventStream::new(vec![], 1000.0, 100).unwrap();
        let s = reconstruct(&events, &ReconstructionConfig::symmetric(0.1)).unwrap();
        assert_eq!(s.samples(), &[0.0; 100][..]);
    }

    #[test]
    fn single_up_step() {
        let events = EventStream::new(vec![Event::up(50)], 1000.0, 100).unwrap();
        let s = reconstruct(&events, &ReconstructionConfig::symmetric(0.1)).unwrap();
        assert!(s.samples()[..50].iter().all(|v| *v == 0.0));
        assert!(s.samples()[50..].iter().all(|v| *v == 0.1));
    }

    #[test]
    fn asymmetric_steps_and_origin() {
        let events = EventStream::new(vec![Event::up(1), Event::dn(3)], 1000.0, 5).unwrap();
        let cfg = ReconstructionConfig {
            v_thu: 0.5,
            v_thd: 0.25,
            initial_level: 1.0,
            highpass_cutoff_hz: 0.0,
        };
        assert_eq!(
            reconstruct(&events, &cfg).unwrap().samples(),
            &[1.0, 1.5, 1.5, 1.25, 1.25]
        );
    }

    #[test]
    fn zero_length_stream_is_rejected() {
        let events = EventStream::new(vec![], 1000.0, 0).unwrap();
        assert_eq!(
            reconstruct(&events, &ReconstructionConfig::symmetric(0.1)),
            Err(Error::EmptyStreamLength)
        );
    }

    #[test]
    fn threshold_trace_steps() {
        let events = EventStream::new(vec![Event::up(1), Event::dn(2)], 10.0, 4).unwrap();
        let trace = Signal::new(vec![1.0, 2.0, 0.5, 9.0], 10.0).unwrap();
        let s = reconstruct_with_threshold_trace(&events, &trace, 0.0).unwrap();
        assert_eq!(s.samples(), &[0.0, 2.0, 1.5, 1.5]);
    }

    #[test]
    fn detrend_rejects_dc_within_five_tau() {
        let fs = 1000.0;
        let cutoff = 5.0;
        let tau = 1.0 / (2.0 * PI * cutoff);
        let n = (5.0 * tau * fs).ceil() as usize + 2;
        let y = highpass_detrend(&Signal::new(vec![3.0; n], fs).unwrap(), cutoff).unwrap();
        assert!(y.samples().last().unwrap().abs() < 0.01 * 3.0);
    }

    #[test]
    fn detrend_cutoff_validation() {
        let s = Signal::new(vec![1.0; 10], 100.0).unwrap();
        for bad in [0.0, -1.0, 50.0, 60.0, f64::NAN] {
            assert!(matches!(
                highpass_detrend(&s, bad),
                Err(Error::InvalidCutoff { .. })
            ));
        }
    }

    #[test]
    fn rmse_identity_and_mean_removal() {
        let a = Signal::from_fn(100, 100.0, |t| (t * 7.0).sin()).unwrap();
        assert_eq!(rmse(&a, &a), Ok(0.0));
        let zeros = Signal::new(vec![0.0; 100], 100.0).unwrap();
        let twos = Signal::new(vec![2.0; 100], 100.0).unwrap();
        assert_eq!(rmse(&zeros, &twos), Ok(0.0));
        assert_eq!(raw_rmse(&zeros, &twos), Ok(2.0));
        let short = Signal::new(vec![0.0; 99], 100.0).unwrap();
        assert!(matches!(
            rmse(&a, &short),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rmse_of_opposite_sines() {
        // The difference is 2 sin, whose RMS over whole periods is 2 * A / sqrt(2).
        let amp = 1.5;
        let fs = 1000.0;
        let a = Signal::from_fn(1000, fs, |t| amp * (2.0 * PI * 5.0 * t).sin()).unwrap();
        let b = a.scaled(-1.0).unwrap();
        let got = rmse(&a, &b).unwrap();
        assert!((got - 2.0f64.sqrt() * amp).abs() < 1e-12, "{got}");
        assert!((got - 2.0 * a.rms()).abs() < 1e-12);
    }
}
