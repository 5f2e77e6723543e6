//! Background-tracking threshold for the modulator.
//!
//! The chain is: rectifying envelope follower, two first-order low-pass
//! filters with different time constants (the fast one scaled by `g2 < 1`), a
//! pointwise comparator that goes high while the fast output exceeds the slow
//! one, a retriggerable pulse extender, and a third low-pass filter that holds
//! its output while the extended gate is high. The held output, scaled by
//! `k_th` and floored at `v_th_min`, is the threshold trace.
//!
//! Every filter uses the exponential-integrator update
//! `y[n] = y[n-1] + (1 - exp(-dt/tau)) * (u[n] - y[n-1])`, exact for inputs that
//! are piecewise constant between samples.

use crate::config::{AdaptiveConfig, AdmConfig};
use crate::encoder::{encode_with_threshold_trace, select_gain, GainTable};
use crate::error::{Error, Result};
use crate::signal::{EventStream, Signal};

/// `1 - exp(-dt / tau)`.
pub fn smoothing_coefficient(dt: f64, tau: f64) -> f64 {
    -(-dt / tau).exp_m1()
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// One first-order low-pass section, `tau dy/dt + y = gain * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub y: f64,
    tau_s: f64,
    gain: f64,
    alpha: f64,
}

impl FilterState {
    /// Filter primed with output `gain * first`.
    pub fn new(first: f64, tau_s: f64, gain: f64, sample_rate_hz: f64) -> Result<Self> {
        check_positive("tau_s", tau_s)?;
        check_positive("gain", gain)?;
        Ok(Self {
            y: gain * first,
            tau_s,
            gain,
            alpha: smoothing_coefficient(1.0 / sample_rate_hz, tau_s),
        })
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    #[inline]
    pub fn update(&mut self, input: f64) -> f64 {
        self.y += self.alpha * (self.gain * input - self.y);
        self.y
    }
}

/// Full-wave rectifier followed by asymmetric first-order tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFollower {
    value: f64,
    attack: f64,
    release: f64,
}

impl EnvelopeFollower {
    pub fn new(
        first: f64,
        tau_attack_s: f64,
        tau_release_s: f64,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        check_positive("tau_attack_s", tau_attack_s)?;
        check_positive("tau_release_s", tau_release_s)?;
        let dt = 1.0 / sample_rate_hz;
        Ok(Self {
            value: first.abs(),
            attack: smoothing_coefficient(dt, tau_attack_s),
            release: smoothing_coefficient(dt, tau_release_s),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn update(&mut self, input: f64) -> f64 {
        let rectified = input.abs();
        let alpha = if rectified > self.value {
            self.attack
        } else {
            self.release
        };
        self.value += alpha * (rectified - self.value);
        self.value
    }
}

pub fn envelope(signal: &Signal, tau_attack_s: f64, tau_release_s: f64) -> Result<Signal> {
    let x = signal.samples();
    let mut follower =
        EnvelopeFollower::new(x[0], tau_attack_s, tau_release_s, signal.sample_rate_hz())?;
    let mut out = Vec::with_capacity(x.len());
    out.push(follower.value());
    out.extend(x[1..].iter().map(|&v| follower.update(v)));
    Signal::new(out, signal.sample_rate_hz())
}

/// Exponential low-pass with DC gain `gain`; `y[0] = gain * x[0]`.
pub fn lpf_first_order(signal: &Signal, tau_s: f64, gain: f64) -> Result<Signal> {
    let x = signal.samples();
    let mut filter = FilterState::new(x[0], tau_s, gain, signal.sample_rate_hz())?;
    let mut out = Vec::with_capacity(x.len());
    out.push(filter.y);
    out.extend(x[1..].iter().map(|&v| filter.update(v)));
    Signal::new(out, signal.sample_rate_hz())
}

/// Boolean trace aligned sample-for-sample with a signal.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateTrace(Vec<bool>);

impl GateTrace {
    pub fn new(values: Vec<bool>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_high(&self) -> usize {
        self.0.iter().filter(|g| **g).count()
    }

    /// Half-open index ranges where the gate is high.
    pub fn high_runs(&self) -> Vec<std::ops::Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &g) in self.0.iter().enumerate() {
            match (g, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push(s..self.0.len());
        }
        runs
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.0.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: self.0.len(),
            });
        }
        Ok(())
    }
}

/// High wherever `fast` strictly exceeds `slow`.
pub fn crossover_gate(slow: &Signal, fast: &Signal) -> Result<GateTrace> {
    slow.check_aligned(fast)?;
    Ok(GateTrace(
        slow.samples()
            .iter()
            .zip(fast.samples())
            .map(|(s, f)| f > s)
            .collect(),
    ))
}

/// Retriggerable pulse stretcher over a window of `ceil(t_ext_s * fs)` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseExtender {
    window: usize,
    since_high: Option<usize>,
}

impl PulseExtender {
    pub fn new(t_ext_s: f64, sample_rate_hz: f64) -> Result<Self> {
        check_positive("t_ext_s", t_ext_s)?;
        Ok(Self::with_window(crate::encoder::refractory_samples(
            t_ext_s,
            sample_rate_hz,
        )))
    }

    pub fn with_window(window: usize) -> Self {
        Self {
            window,
            since_high: None,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    #[inline]
    pub fn update(&mut self, gate: bool) -> bool {
        self.since_high = if gate {
            Some(0)
        } else {
            self.since_high.map(|n| n.saturating_add(1))
        };
        matches!(self.since_high, Some(n) if n <= self.window)
    }
}

pub fn extend_pulses(gate: &GateTrace, t_ext_s: f64, sample_rate_hz: f64) -> Result<GateTrace> {
    let mut extender = PulseExtender::new(t_ext_s, sample_rate_hz)?;
    Ok(GateTrace(
        gate.0.iter().map(|&g| extender.update(g)).collect(),
    ))
}

/// Unity-gain low-pass that holds its previous output while the gate is high.
pub fn gated_lpf(signal: &Signal, gate: &GateTrace, tau_s: f64) -> Result<Signal> {
    gate.check_len(signal.len())?;
    let x = signal.samples();
    let mut filter = FilterState::new(x[0], tau_s, 1.0, signal.sample_rate_hz())?;
    let mut out = Vec::with_capacity(x.len());
    out.push(filter.y);
    for (&v, &hold) in x[1..].iter().zip(&gate.0[1..]) {
        if !hold {
            filter.update(v);
        }
        out.push(filter.y);
    }
    Signal::new(out, signal.sample_rate_hz())
}

/// Intermediate traces of the threshold chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub envelope: Signal,
    pub slow: Signal,
    pub fast: Signal,
    /// Raw comparator output, before extension.
    pub crossover: GateTrace,
    /// Extended gate driving the hold filter.
    pub gate: GateTrace,
    /// Held background level, before scaling and clamping.
    pub base: Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutput {
    pub v_th: Signal,
    pub diagnostics: Diagnostics,
}

/// Runs the whole chain over a trace.
pub fn adaptive_threshold(signal: &Signal, config: &AdaptiveConfig) -> Result<AdaptiveOutput> {
    let fs = signal.sample_rate_hz();
    let envelope = envelope(
        signal,
        config.tau_env_attack_s(),
        config.tau_env_release_s(),
    )?;
    let slow = lpf_first_order(&envelope, config.tau1_s(), 1.0)?;
    let fast = lpf_first_order(&envelope, config.tau2_s(), config.g2())?;
    let crossover = crossover_gate(&slow, &fast)?;
    let gate = extend_pulses(&crossover, config.t_ext_s(), fs)?;
    let base = gated_lpf(&envelope, &gate, config.tau3_s())?;
    let v_th = Signal::new(
        base.samples()
            .iter()
            .map(|b| clamp_threshold(config, *b))
            .collect(),
        fs,
    )?;
    Ok(AdaptiveOutput {
        v_th,
        diagnostics: Diagnostics {
            envelope,
            slow,
            fast,
            crossover,
            gate,
            base,
        },
    })
}

#[inline]
fn clamp_threshold(config: &AdaptiveConfig, base: f64) -> f64 {
    (config.k_th() * base).max(config.v_th_min())
}

/// Applies the modulator gain, derives the threshold from the amplified
/// trace, and encodes against it.
pub fn adaptive_encode(
    signal: &Signal,
    adm: &AdmConfig,
    config: &AdaptiveConfig,
) -> Result<(EventStream, AdaptiveOutput)> {
    let gain = select_gain(adm.gain_code() as i64, &GainTable::default())?;
    let amplified = signal.scaled(gain)?;
    let output = adaptive_threshold(&amplified, config)?;
    let events = encode_with_threshold_trace(signal, &output.v_th, adm)?;
    Ok((events, output))
}

/// Samples needed for the hold filter to forget its initial condition,
/// `ceil(5 * tau3 * fs)`. Rates measured before this point reflect start-up,
/// not background.
pub fn settling_samples(config: &AdaptiveConfig, sample_rate_hz: f64) -> usize {
    (5.0 * config.tau3_s() * sample_rate_hz).ceil() as usize
}

/// Event rates inside marked episodes versus the settled remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstContrast {
    pub burst_rate_hz: f64,
    pub background_rate_hz: f64,
}

impl BurstContrast {
    /// `burst_rate / background_rate`, infinite for a silent background.
    pub fn ratio(&self) -> f64 {
        self.burst_rate_hz / self.background_rate_hz
    }
}

/// Splits the event stream into samples where `in_burst` is set and samples
/// that are neither in a burst, in `exclude`, nor before `settle` samples.
pub fn burst_contrast(
    events: &EventStream,
    in_burst: &[bool],
    exclude: &[bool],
    settle: usize,
) -> Result<BurstContrast> {
    let n = events.source_length();
    if in_burst.len() != n || exclude.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: in_burst.len().min(exclude.len()),
        });
    }
    let is_background = |i: usize| i >= settle && !in_burst[i] && !exclude[i];
    let burst_samples = in_burst.iter().filter(|b| **b).count();
    let background_samples = (0..n).filter(|&i| is_background(i)).count();
    let (mut burst_events, mut background_events) = (0usize, 0usize);
    for e in events.events() {
        if in_burst[e.index] {
            burst_events += 1;
        } else if is_background(e.index) {
            background_events += 1;
        }
    }
    let fs = events.source_sample_rate_hz();
    let rate = |count: usize, samples: usize| {
        if samples == 0 {
            0.0
        } else {
            count as f64 * fs / samples as f64
        }
    };
    Ok(BurstContrast {
        burst_rate_hz: rate(burst_events, burst_samples),
        background_rate_hz: rate(background_events, background_samples),
    })
}

/// One sample of the chain's state, as produced by [`AdaptiveStepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSample {
    pub envelope: f64,
    pub slow: f64,
    pub fast: f64,
    pub crossover: bool,
    pub gate: bool,
    pub base: f64,
    pub v_th: f64,
}

/// Streaming form of [`adaptive_threshold`]; folding it over a trace gives the
/// same values as the batch function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveStepper {
    config: AdaptiveConfig,
    sample_rate_hz: f64,
    state: Option<StepperState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct StepperState {
    envelope: EnvelopeFollower,
    slow: FilterState,
    fast: FilterState,
    extender: PulseExtender,
    hold: FilterState,
}

impl AdaptiveStepper {
    pub fn new(config: AdaptiveConfig, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate_hz));
        }
        Ok(Self {
            config,
            sample_rate_hz,
            state: None,
        })
    }

    pub fn push(&mut self, x: f64) -> Result<AdaptiveSample> {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample(0));
        }
        let c = &self.config;
        let fs = self.sample_rate_hz;
        let sample = match &mut self.state {
            None => {
                let envelope =
                    EnvelopeFollower::new(x, c.tau_env_attack_s(), c.tau_env_release_s(), fs)?;
                let e = envelope.value();
                let slow = FilterState::new(e, c.tau1_s(), 1.0, fs)?;
                let fast = FilterState::new(e, c.tau2_s(), c.g2(), fs)?;
                let mut extender = PulseExtender::new(c.t_ext_s(), fs)?;
                let hold = FilterState::new(e, c.tau3_s(), 1.0, fs)?;
                let crossover = fast.y > slow.y;
                let gate = extender.update(crossover);
                self.state = Some(StepperState {
                    envelope,
                    slow,
                    fast,
                    extender,
                    hold,
                });
                AdaptiveSample {
                    envelope: e,
                    slow: slow.y,
                    fast: fast.y,
                    crossover,
                    gate,
                    base: hold.y,
                    v_th: clamp_threshold(c, hold.y),
                }
            }
            Some(s) => {
                let e = s.envelope.update(x);
                let slow = s.slow.update(e);
                let fast = s.fast.update(e);
                let crossover = fast > slow;
                let gate = s.extender.update(crossover);
                if !gate {
                    s.hold.update(e);
                }
                AdaptiveSample {
                    envelope: e,
                    slow,
                    fast,
                    crossover,
                    gate,
                    base: s.hold.y,
                    v_th: clamp_threshold(c, s.hold.y),
                }
            }
        };
        Ok(sample)
    }
}
