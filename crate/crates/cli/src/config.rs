//! The TOML run configuration.

use std::path::{Path, PathBuf};

use adm_core::{AdaptiveConfig, AdmConfig, ReconstructionConfig, Signal, SweepGrid, SynthSpec};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::formats::read_trace;

pub const OUT_DIR_ENV: &str = "ADM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "adm-out";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub trace: Option<PathBuf>,
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub v_th_values: Option<Vec<f64>>,
    pub t_rfr_values: Option<Vec<f64>>,
    pub highpass_cutoff_hz: Option<f64>,
    #[serde(default)]
    pub initial_level: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceSection,
    pub adm: AdmConfig,
    pub adaptive: Option<AdaptiveConfig>,
    pub reconstruction: Option<ReconstructionConfig>,
    #[serde(default)]
    pub sweep: SweepSection,
    pub out_dir: Option<PathBuf>,
    /// Set to the config file's directory on load; relative trace paths
    /// resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub enum Source<'a> {
    Trace(&'a Path),
    Synth(&'a SynthSpec),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        match (&self.source.trace, &self.source.synth) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "[source] needs exactly one of `trace` or `synth`, found both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "[source] needs exactly one of `trace` or `synth`".into(),
                ))
            }
            (None, Some(spec)) => {
                spec.validate()?;
                if let Some(r) = &self.reconstruction {
                    r.validate(spec.sample_rate_hz)?;
                }
            }
            (Some(_), None) => {}
        }
        Ok(())
    }

    pub fn source(&self) -> Source<'_> {
        match (&self.source.trace, &self.source.synth) {
            (Some(p), _) => Source::Trace(p),
            (None, Some(s)) => Source::Synth(s),
            (None, None) => unreachable!("validated on load"),
        }
    }

    /// Replaces the synthesis seed; no effect on trace sources.
    pub fn override_seed(&mut self, seed: u64) {
        if let Some(spec) = &mut self.source.synth {
            spec.seed = seed;
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn load_signal(&self) -> Result<Signal> {
        match self.source() {
            Source::Trace(p) => Ok(read_trace(&self.resolve(p))?.1),
            Source::Synth(spec) => Ok(spec.generate()?),
        }
    }

    /// Thresholds and origin for decoding, in the units the encoder compares
    /// in. Falls back to the `[adm]` thresholds.
    pub fn reconstruction(&self) -> ReconstructionConfig {
        self.reconstruction.unwrap_or(ReconstructionConfig {
            v_thu: self.adm.v_thu(),
            v_thd: self.adm.v_thd(),
            initial_level: 0.0,
            highpass_cutoff_hz: 0.0,
        })
    }

    /// Sweep grid with unset fields filled from the synthesis defaults.
    ///
    /// A trace source has no defaults, so `v_th_values` must be given.
    pub fn sweep_grid(&self) -> Result<SweepGrid> {
        let s = &self.sweep;
        let mut grid = match self.source() {
            Source::Synth(spec) => SweepGrid::default_for(spec.clone()),
            Source::Trace(_) => SweepGrid {
                v_th_values: s.v_th_values.clone().ok_or_else(|| {
                    CliError::Config("[sweep] v_th_values is required for a trace source".into())
                })?,
                highpass_cutoff_hz: 0.0,
                ..SweepGrid::default()
            },
        };
        if let Some(v) = &s.v_th_values {
            grid.v_th_values = v.clone();
        }
        if let Some(t) = &s.t_rfr_values {
            grid.t_rfr_values = t.clone();
        }
        if let Some(c) = s.highpass_cutoff_hz {
            grid.highpass_cutoff_hz = c;
        }
        grid.initial_level = s.initial_level;
        if grid.v_th_values.is_empty() || grid.t_rfr_values.is_empty() {
            return Err(CliError::Config("[sweep] grids must be non-empty".into()));
        }
        for &v in &grid.v_th_values {
            for &t in &grid.t_rfr_values {
                AdmConfig::symmetric(v, t)?;
            }
        }
        Ok(grid)
    }

    /// `--out`, then `out_dir`, then `$ADM_OUT_DIR`, then `adm-out`.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.out_dir {
            return self.resolve(p);
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => PathBuf::from(DEFAULT_OUT_DIR),
        }
    }
}
