//! Test-signal generators: amplified sines, band-limited Gaussian background,
//! and background with Hann-windowed tone bursts standing in for recorded
//! high-frequency oscillations.
//!
//! Every generator is a pure function of its [`SynthSpec`]; noise comes from a
//! ChaCha stream seeded by `seed`, so output is identical across runs and
//! platforms.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adaptive::FilterState;
use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Sine,
    BandNoise,
    HfoComposite,
}

/// A windowed tone added on top of the background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Burst {
    pub start_s: f64,
    pub duration_s: f64,
    pub center_hz: f64,
    /// Peak amplitude of the tone at the window centre.
    pub amplitude: f64,
}

impl Burst {
    /// Sample indices touched by the burst.
    pub fn sample_range(&self, sample_rate_hz: f64) -> std::ops::Range<usize> {
        let start = (self.start_s * sample_rate_hz).round() as usize;
        start..start + (self.duration_s * sample_rate_hz).round() as usize
    }
}

fn default_band() -> (f64, f64) {
    (80.0, 250.0)
}

fn default_sections() -> usize {
    4
}

/// Declarative description of a generated trace.
///
/// `amplitude` is the sine's peak for [`SynthKind::Sine`] and the background
/// RMS for the other kinds. `gain_db` models an ideal amplifier applied last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub amplitude: f64,
    #[serde(default)]
    pub frequency_hz: f64,
    #[serde(default = "default_band")]
    pub band: (f64, f64),
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gain_db: f64,
    #[serde(default)]
    pub bursts: Vec<Burst>,
    /// First-order sections per band edge (high-pass and low-pass each).
    #[serde(default = "default_sections")]
    pub band_sections: usize,
}

impl SynthSpec {
    pub fn sine(amplitude: f64, frequency_hz: f64, duration_s: f64, sample_rate_hz: f64) -> Self {
        Self {
            kind: SynthKind::Sine,
            amplitude,
            frequency_hz,
            band: default_band(),
            duration_s,
            sample_rate_hz,
            seed: 0,
            gain_db: 0.0,
            bursts: Vec::new(),
            band_sections: default_sections(),
        }
    }

    pub fn band_noise(
        rms: f64,
        band: (f64, f64),
        duration_s: f64,
        sample_rate_hz: f64,
        seed: u64,
    ) -> Self {
        Self {
            kind: SynthKind::BandNoise,
            band,
            seed,
            ..Self::sine(rms, 0.0, duration_s, sample_rate_hz)
        }
    }

    pub fn hfo_composite(background: SynthSpec, bursts: Vec<Burst>) -> Self {
        Self {
            kind: SynthKind::HfoComposite,
            bursts,
            ..background
        }
    }

    /// 100 uV peak-to-peak sine through a 38 dB amplifier.
    pub fn amplified_sine() -> Self {
        Self {
            gain_db: 38.0,
            ..Self::sine(50e-6, 10.0, 1.0, 100_000.0)
        }
    }

    /// Ten seconds of 80-250 Hz background at 2 kHz with four oscillation
    /// bursts of 100 ms, each peaking at ten times the background RMS.
    pub fn default_hfo_scenario() -> Self {
        let burst = |start_s, center_hz| Burst {
            start_s,
            duration_s: 0.1,
            center_hz,
            amplitude: 10.0,
        };
        Self::hfo_composite(
            Self::band_noise(1.0, default_band(), 10.0, 2000.0, 7),
            vec![
                burst(3.0, 120.0),
                burst(5.0, 150.0),
                burst(6.8, 200.0),
                burst(8.6, 180.0),
            ],
        )
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_gain_db(self, gain_db: f64) -> Self {
        Self { gain_db, ..self }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    /// True on every sample inside a burst, or within `guard_s` after one.
    pub fn burst_mask(&self, guard_s: f64) -> Vec<bool> {
        let fs = self.sample_rate_hz;
        let n = self.sample_count();
        let guard = (guard_s.max(0.0) * fs).ceil() as usize;
        let mut mask = vec![false; n];
        for b in &self.bursts {
            let r = b.sample_range(fs);
            let end = (r.end + guard).min(n);
            mask[r.start.min(n)..end].iter_mut().for_each(|m| *m = true);
        }
        mask
    }

    pub fn gain(&self) -> f64 {
        10f64.powf(self.gain_db / 20.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let fs = self.sample_rate_hz;
        if !(fs.is_finite() && fs > 0.0) {
            return bad(format!("sample_rate_hz must be positive, got {fs}"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) || self.sample_count() == 0 {
            return bad(format!(
                "duration_s must cover at least one sample, got {}",
                self.duration_s
            ));
        }
        if !self.amplitude.is_finite() || !self.gain_db.is_finite() {
            return bad("amplitude and gain_db must be finite".into());
        }
        let nyquist = fs / 2.0;
        match self.kind {
            SynthKind::Sine => {
                if !(self.frequency_hz >= 0.0 && self.frequency_hz < nyquist) {
                    return bad(format!(
                        "frequency {} Hz must lie in [0, {nyquist}) Hz",
                        self.frequency_hz
                    ));
                }
            }
            SynthKind::BandNoise | SynthKind::HfoComposite => {
                let (low, high) = self.band;
                if !(low > 0.0 && low < high && high < nyquist) {
                    return bad(format!(
                        "band ({low}, {high}) Hz must satisfy 0 < low < high < {nyquist}"
                    ));
                }
                if self.amplitude < 0.0 {
                    return bad("background RMS must be non-negative".into());
                }
                if self.band_sections == 0 {
                    return bad("band_sections must be at least 1".into());
                }
            }
        }
        if self.kind != SynthKind::HfoComposite && !self.bursts.is_empty() {
            return bad("bursts are only allowed for hfo_composite".into());
        }
        for (i, b) in self.bursts.iter().enumerate() {
            let (low, high) = self.band;
            if !(b.start_s >= 0.0 && b.duration_s > 0.0) {
                return bad(format!("burst {i} needs start_s >= 0 and duration_s > 0"));
            }
            if b.sample_range(fs).end > self.sample_count() {
                return bad(format!("burst {i} extends past the end of the trace"));
            }
            if !(b.center_hz >= low && b.center_hz <= high) {
                return bad(format!(
                    "burst {i} centre {} Hz is outside the band",
                    b.center_hz
                ));
            }
            if !b.amplitude.is_finite() {
                return bad(format!("burst {i} amplitude must be finite"));
            }
        }
        Ok(())
    }

    /// Generates the trace described by this spec, whatever its kind.
    pub fn generate(&self) -> Result<Signal> {
        match self.kind {
            SynthKind::Sine => synth_sine(self),
            SynthKind::BandNoise => synth_band_noise(self),
            SynthKind::HfoComposite => synth_hfo_composite(self),
        }
    }
}

fn finish(samples: Vec<f64>, spec: &SynthSpec) -> Result<Signal> {
    let gain = spec.gain();
    let samples = if spec.gain_db == 0.0 {
        samples
    } else {
        samples.into_iter().map(|x| x * gain).collect()
    };
    Signal::new(samples, spec.sample_rate_hz)
}

fn expect_kind(spec: &SynthSpec, kind: SynthKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidSpec(format!(
            "expected {kind:?} spec, got {:?}",
            spec.kind
        )));
    }
    spec.validate()
}

/// `A sin(2 pi f t)` on the sample grid, amplified.
pub fn synth_sine(spec: &SynthSpec) -> Result<Signal> {
    expect_kind(spec, SynthKind::Sine)?;
    let w = 2.0 * PI * spec.frequency_hz;
    let fs = spec.sample_rate_hz;
    let samples = (0..spec.sample_count())
        .map(|n| spec.amplitude * (w * n as f64 / fs).sin())
        .collect();
    finish(samples, spec)
}

/// Seeded white Gaussian noise through cascaded first-order high-pass and
/// low-pass sections, scaled to the requested RMS, amplified.
pub fn synth_band_noise(spec: &SynthSpec) -> Result<Signal> {
    expect_kind(spec, SynthKind::BandNoise)?;
    finish(background(spec)?, spec)
}

/// Band noise plus one Hann-windowed tone per burst, amplified.
pub fn synth_hfo_composite(spec: &SynthSpec) -> Result<Signal> {
    expect_kind(spec, SynthKind::HfoComposite)?;
    let fs = spec.sample_rate_hz;
    let mut samples = background(spec)?;
    for burst in &spec.bursts {
        let range = burst.sample_range(fs);
        let len = range.len();
        let w = 2.0 * PI * burst.center_hz / fs;
        for (k, x) in samples[range].iter_mut().enumerate() {
            // Window without zero endpoints so every sample in the range is touched.
            let window = 0.5 * (1.0 - (2.0 * PI * (k + 1) as f64 / (len + 1) as f64).cos());
            *x += burst.amplitude * window * (w * k as f64).cos();
        }
    }
    finish(samples, spec)
}

fn background(spec: &SynthSpec) -> Result<Vec<f64>> {
    let n = spec.sample_count();
    let fs = spec.sample_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (low, high) = spec.band;
    let tau_low = 1.0 / (2.0 * PI * low);
    let tau_high = 1.0 / (2.0 * PI * high);
    for _ in 0..spec.band_sections {
        let mut lp = FilterState::new(x[0], tau_low, 1.0, fs)?;
        let first = x[0];
        x[0] = first - lp.y;
        for v in x.iter_mut().skip(1) {
            *v -= lp.update(*v);
        }
    }
    for _ in 0..spec.band_sections {
        let mut lp = FilterState::new(x[0], tau_high, 1.0, fs)?;
        for v in x.iter_mut().skip(1) {
            *v = lp.update(*v);
        }
    }
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let scale = if rms > 0.0 { spec.amplitude / rms } else { 0.0 };
    x.iter_mut().for_each(|v| *v *= scale);
    Ok(x)
}
