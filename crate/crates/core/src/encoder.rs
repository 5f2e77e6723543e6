//! Discrete-time asynchronous delta modulator.
//!
//! The encoder tracks a baseline (the amplifier reset level). A sample that
//! rises `v_thu` above it emits UP and moves the baseline up by `v_thu`; one
//! that falls `v_thd` below emits DN and moves it down by `v_thd`. After every
//! event the comparators are disabled for a whole number of samples and the
//! baseline is frozen. At most one event is emitted per sample, so a jump of
//! several thresholds is resolved over the following samples.
//!
//! [`encode`] is a fold of [`EncoderState::step`] over the trace; the stepper
//! is the streaming entry point.

use crate::config::AdmConfig;
use crate::error::{Error, Result};
use crate::signal::{Event, EventStream, Polarity, Signal};

/// Relative slack on the comparators. A crossing that is exact in real
/// arithmetic (e.g. a sine peak landing on a multiple of the threshold) must
/// not be lost to rounding in the accumulated baseline.
pub const COMPARATOR_TOLERANCE: f64 = 1e-9;

/// Amplifier gains selectable by the 2-bit feedback-capacitor code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainTable([f64; 4]);

impl GainTable {
    pub fn new(gains: [f64; 4]) -> Result<Self> {
        if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidGainTable(format!(
                "gains must be positive: {gains:?}"
            )));
        }
        if gains.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGainTable(format!(
                "gains must be strictly increasing: {gains:?}"
            )));
        }
        Ok(Self(gains))
    }

    pub fn gains(&self) -> [f64; 4] {
        self.0
    }
}

impl Default for GainTable {
    /// Relative gains 1, 2, 4, 8.
    fn default() -> Self {
        Self([1.0, 2.0, 4.0, 8.0])
    }
}

pub fn select_gain(gain_code: i64, table: &GainTable) -> Result<f64> {
    usize::try_from(gain_code)
        .ok()
        .and_then(|i| table.0.get(i).copied())
        .ok_or(Error::InvalidGainCode(gain_code))
}

/// Number of whole samples the comparators stay disabled after an event,
/// `ceil(t_rfr_s * sample_rate_hz)`.
///
/// Products within 1e-9 (relative) of an integer are taken as that integer so
/// that e.g. 0.1 ms at 100 kHz is 10 samples and not 11.
pub fn refractory_samples(t_rfr_s: f64, sample_rate_hz: f64) -> usize {
    let exact = t_rfr_s * sample_rate_hz;
    let nearest = exact.round();
    let samples = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    samples.max(0.0) as usize
}

/// Per-stream modulator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderState {
    /// Reference level the input is compared against.
    pub baseline: f64,
    /// Samples left before the comparators are re-enabled.
    pub refractory_remaining: usize,
    /// Index of the next sample to be consumed.
    pub sample_cursor: usize,
}

impl EncoderState {
    pub fn new(baseline: f64) -> Self {
        Self {
            baseline,
            refractory_remaining: 0,
            sample_cursor: 0,
        }
    }

    /// Consumes one sample. Thresholds must be positive.
    pub fn step(
        self,
        sample: f64,
        v_thu: f64,
        v_thd: f64,
        refractory_samples: usize,
    ) -> (Self, Option<Event>) {
        let index = self.sample_cursor;
        let mut next = Self {
            sample_cursor: index + 1,
            ..self
        };
        if self.refractory_remaining > 0 {
            next.refractory_remaining -= 1;
            return (next, None);
        }
        let up = sample - self.baseline >= v_thu * (1.0 - COMPARATOR_TOLERANCE);
        let dn = self.baseline - sample >= v_thd * (1.0 - COMPARATOR_TOLERANCE);
        debug_assert!(
            !(up && dn),
            "UP and DN cannot both trip with positive thresholds"
        );
        let polarity = if up {
            next.baseline += v_thu;
            Polarity::Up
        } else if dn {
            next.baseline -= v_thd;
            Polarity::Dn
        } else {
            return (next, None);
        };
        next.refractory_remaining = refractory_samples;
        (next, Some(Event { index, polarity }))
    }
}

/// Encodes with the default gain table.
pub fn encode(signal: &Signal, config: &AdmConfig) -> Result<EventStream> {
    encode_with_gain_table(signal, config, &GainTable::default())
}

pub fn encode_with_gain_table(
    signal: &Signal,
    config: &AdmConfig,
    table: &GainTable,
) -> Result<EventStream> {
    let gain = select_gain(config.gain_code() as i64, table)?;
    let thresholds = std::iter::repeat((config.v_thu(), config.v_thd()));
    run(signal, gain, config.t_rfr_s(), thresholds)
}

/// Encodes with symmetric thresholds that vary sample by sample.
///
/// `v_th_trace` is expressed in post-gain units. The fixed thresholds of
/// `config` are ignored; its refractory period and gain code still apply.
pub fn encode_with_threshold_trace(
    signal: &Signal,
    v_th_trace: &Signal,
    config: &AdmConfig,
) -> Result<EventStream> {
    signal.check_aligned(v_th_trace)?;
    if let Some(index) = v_th_trace.samples().iter().position(|v| *v <= 0.0) {
        return Err(Error::NonPositiveThreshold(index));
    }
    let gain = select_gain(config.gain_code() as i64, &GainTable::default())?;
    let thresholds = v_th_trace.samples().iter().map(|&v| (v, v));
    run(signal, gain, config.t_rfr_s(), thresholds)
}

fn run(
    signal: &Signal,
    gain: f64,
    t_rfr_s: f64,
    thresholds: impl Iterator<Item = (f64, f64)>,
) -> Result<EventStream> {
    let fs = signal.sample_rate_hz();
    let refractory = refractory_samples(t_rfr_s, fs);
    let samples = signal.samples();
    let mut state = EncoderState::new(gain * samples[0]);
    let mut events = Vec::new();
    for (&x, (v_thu, v_thd)) in samples.iter().zip(thresholds) {
        let (next, event) = state.step(gain * x, v_thu, v_thd, refractory);
        state = next;
        events.extend(event);
    }
    EventStream::new(events, fs, samples.len())
}
