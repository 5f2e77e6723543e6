//! Discrete-time simulator for asynchronous delta modulation (ADM).
//!
//! A sampled trace is turned into a stream of UP/DN events by a modulator
//! with comparator thresholds and a refractory period
//! ([`encoder`]). The events can be decoded back to a staircase and scored
//! ([`reconstruction`]), swept over threshold and refractory grids
//! ([`sweep`]), and driven by a threshold that follows the background
//! activity of the input and freezes during large-amplitude episodes
//! ([`adaptive`]). [`synth`] generates the test inputs.
//!
//! ```
//! use adm_core::{encode, reconstruct, AdmConfig, ReconstructionConfig, SynthSpec};
//!
//! let signal = SynthSpec::sine(1.0, 10.0, 1.0, 10_000.0).generate().unwrap();
//! let config = AdmConfig::symmetric(0.05, 0.0).unwrap();
//! let events = encode(&signal, &config).unwrap();
//! assert_eq!(events.up_count() + events.dn_count(), events.len());
//!
//! let staircase = reconstruct(&events, &ReconstructionConfig::symmetric(0.05)).unwrap();
//! assert_eq!(staircase.len(), signal.len());
//! ```

pub mod adaptive;
pub mod config;
pub mod encoder;
pub mod error;
pub mod reconstruction;
pub mod signal;
pub mod sweep;
pub mod synth;

pub use adaptive::{
    adaptive_encode, adaptive_threshold, burst_contrast, crossover_gate, envelope, extend_pulses,
    gated_lpf, lpf_first_order, settling_samples, AdaptiveOutput, AdaptiveSample, AdaptiveStepper,
    BurstContrast, Diagnostics, FilterState, GateTrace,
};
pub use config::{AdaptiveConfig, AdmConfig};
pub use encoder::{
    encode, encode_with_gain_table, encode_with_threshold_trace, refractory_samples, select_gain,
    EncoderState, GainTable,
};
pub use error::{Error, Result};
pub use reconstruction::{
    detrended_rmse, highpass_detrend, raw_rmse, reconstruct, reconstruct_with_threshold_trace,
    rmse, ReconstructionConfig,
};
pub use signal::{validate_signal, Event, EventStream, Polarity, Signal};
pub use sweep::{
    find_min_rmse, is_quasi_convex, rate_model_fit, rmse_sweep, rmse_sweep_signal, RateFit,
    RatePoint, SweepGrid, SweepRecord,
};
pub use synth::{synth_band_noise, synth_hfo_composite, synth_sine, Burst, SynthKind, SynthSpec};
