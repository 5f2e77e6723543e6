//! Sampled traces and the UP/DN event streams produced from them.
//!
//! Event times are kept as sample indices; seconds only appear at the I/O
//! boundary via [`EventStream::time_s`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Checks the invariants every processed trace must satisfy.
pub fn validate_signal(samples: &[f64], sample_rate_hz: f64) -> Result<()> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::InvalidSampleRate(sample_rate_hz));
    }
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteSample(index));
    }
    Ok(())
}

/// A uniformly sampled, finite, non-empty trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        validate_signal(&samples, sample_rate_hz)?;
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Builds a trace by evaluating `f` at every sample time `n / fs`.
    pub fn from_fn(len: usize, sample_rate_hz: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..len).map(|n| f(n as f64 / sample_rate_hz)).collect();
        Self::new(samples, sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed signal; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Returns a new trace with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|x| x * factor).collect(),
            self.sample_rate_hz,
        )
    }

    /// Same length and sample rate as `other`.
    pub fn check_aligned(&self, other: &Signal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        if self.sample_rate_hz != other.sample_rate_hz {
            return Err(Error::SampleRateMismatch {
                left: self.sample_rate_hz,
                right: other.sample_rate_hz,
            });
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

/// Direction of a threshold crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarity {
    Up,
    Dn,
}

impl Polarity {
    /// +1 for UP, -1 for DN.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Up => 1.0,
            Polarity::Dn => -1.0,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Up => "UP",
            Polarity::Dn => "DN",
        })
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UP" => Ok(Polarity::Up),
            "DN" => Ok(Polarity::Dn),
            other => Err(Error::InvalidEventStream(format!(
                "unknown polarity {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub index: usize,
    pub polarity: Polarity,
}

impl Event {
    pub fn up(index: usize) -> Self {
        Self {
            index,
            polarity: Polarity::Up,
        }
    }

    pub fn dn(index: usize) -> Self {
        Self {
            index,
            polarity: Polarity::Dn,
        }
    }
}

/// Encoder output: events strictly ordered by sample index, plus enough of the
/// source geometry to rebuild a trace of the original length.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    events: Vec<Event>,
    source_sample_rate_hz: f64,
    source_length: usize,
}

impl EventStream {
    pub fn new(
        events: Vec<Event>,
        source_sample_rate_hz: f64,
        source_length: usize,
    ) -> Result<Self> {
        if !(source_sample_rate_hz.is_finite() && source_sample_rate_hz > 0.0) {
            return Err(Error::InvalidSampleRate(source_sample_rate_hz));
        }
        for (i, pair) in events.windows(2).enumerate() {
            if pair[1].index <= pair[0].index {
                return Err(Error::InvalidEventStream(format!(
                    "event {} at index {} does not follow index {}",
                    i + 1,
                    pair[1].index,
                    pair[0].index
                )));
            }
        }
        if let Some(last) = events.last() {
            if last.index >= source_length {
                return Err(Error::InvalidEventStream(format!(
                    "event index {} outside source length {}",
                    last.index, source_length
                )));
            }
        }
        Ok(Self {
            events,
            source_sample_rate_hz,
            source_length,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn source_sample_rate_hz(&self) -> f64 {
        self.source_sample_rate_hz
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn duration_s(&self) -> f64 {
        self.source_length as f64 / self.source_sample_rate_hz
    }

    pub fn time_s(&self, event: &Event) -> f64 {
        event.index as f64 / self.source_sample_rate_hz
    }

    pub fn up_count(&self) -> usize {
        self.count(Polarity::Up)
    }

    pub fn dn_count(&self) -> usize {
        self.count(Polarity::Dn)
    }

    fn count(&self, polarity: Polarity) -> usize {
        self.events
            .iter()
            .filter(|e| e.polarity == polarity)
            .count()
    }

    /// Events per second over the whole source trace.
    pub fn rate_hz(&self) -> f64 {
        self.events.len() as f64 / self.duration_s()
    }

    /// Events per second over the span between the first and last event,
    /// free of the edge effect at both ends of the trace. `None` with fewer
    /// than two events.
    pub fn interval_rate_hz(&self) -> Option<f64> {
        match (self.events.first(), self.events.last()) {
            (Some(first), Some(last)) if last.index > first.index => Some(
                (self.events.len() - 1) as f64 * self.source_sample_rate_hz
                    / (last.index - first.index) as f64,
            ),
            _ => None,
        }
    }

    /// Smallest index difference between consecutive events.
    pub fn min_gap(&self) -> Option<usize> {
        self.events
            .windows(2)
            .map(|w| w[1].index - w[0].index)
            .min()
    }

    /// Number of events whose index falls in `range`.
    pub fn count_in(&self, range: std::ops::Range<usize>) -> usize {
        self.events
            .iter()
            .filter(|e| range.contains(&e.index))
            .count()
    }
}
