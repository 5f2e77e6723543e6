//! Validated encoder and adaptive-threshold parameters.
//!
//! Both configs are only obtainable through checked constructors (including
//! deserialization), so downstream code never sees an invalid value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// Fixed-threshold modulator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAdmConfig", into = "RawAdmConfig")]
pub struct AdmConfig {
    v_thu: f64,
    v_thd: f64,
    t_rfr_s: f64,
    gain_code: u8,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdmConfig {
    v_thu: f64,
    v_thd: f64,
    #[serde(default)]
    t_rfr_s: f64,
    #[serde(default)]
    gain_code: i64,
}

impl TryFrom<RawAdmConfig> for AdmConfig {
    type Error = Error;

    fn try_from(raw: RawAdmConfig) -> Result<Self> {
        Self::new(raw.v_thu, raw.v_thd, raw.t_rfr_s, raw.gain_code)
    }
}

impl From<AdmConfig> for RawAdmConfig {
    fn from(c: AdmConfig) -> Self {
        Self {
            v_thu: c.v_thu,
            v_thd: c.v_thd,
            t_rfr_s: c.t_rfr_s,
            gain_code: c.gain_code as i64,
        }
    }
}

impl AdmConfig {
    pub fn new(v_thu: f64, v_thd: f64, t_rfr_s: f64, gain_code: i64) -> Result<Self> {
        positive("v_thu", v_thu)?;
        positive("v_thd", v_thd)?;
        if !(t_rfr_s.is_finite() && t_rfr_s >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_rfr_s must be non-negative, got {t_rfr_s}"
            )));
        }
        if !(0..=3).contains(&gain_code) {
            return Err(Error::InvalidGainCode(gain_code));
        }
        Ok(Self {
            v_thu,
            v_thd,
            t_rfr_s,
            gain_code: gain_code as u8,
        })
    }

    /// Equal UP and DN thresholds, unity gain.
    pub fn symmetric(v_th: f64, t_rfr_s: f64) -> Result<Self> {
        Self::new(v_th, v_th, t_rfr_s, 0)
    }

    pub fn with_gain_code(self, gain_code: i64) -> Result<Self> {
        Self::new(self.v_thu, self.v_thd, self.t_rfr_s, gain_code)
    }

    pub fn v_thu(&self) -> f64 {
        self.v_thu
    }

    pub fn v_thd(&self) -> f64 {
        self.v_thd
    }

    pub fn t_rfr_s(&self) -> f64 {
        self.t_rfr_s
    }

    pub fn gain_code(&self) -> u8 {
        self.gain_code
    }
}

/// Parameters of the background-tracking threshold chain.
///
/// Defaults target a 2 kHz trace with 80-250 Hz content: background tracking
/// runs two orders of magnitude slower than the oscillations of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAdaptiveConfig", into = "RawAdaptiveConfig")]
pub struct AdaptiveConfig {
    tau_env_attack_s: f64,
    tau_env_release_s: f64,
    tau1_s: f64,
    tau2_s: f64,
    g2: f64,
    tau3_s: f64,
    t_ext_s: f64,
    k_th: f64,
    v_th_min: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawAdaptiveConfig {
    tau_env_attack_s: f64,
    tau_env_release_s: f64,
    tau1_s: f64,
    tau2_s: f64,
    g2: f64,
    tau3_s: f64,
    t_ext_s: f64,
    k_th: f64,
    v_th_min: f64,
}

impl Default for RawAdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig::default().into()
    }
}

impl TryFrom<RawAdaptiveConfig> for AdaptiveConfig {
    type Error = Error;

    fn try_from(r: RawAdaptiveConfig) -> Result<Self> {
        AdaptiveConfig::builder()
            .envelope(r.tau_env_attack_s, r.tau_env_release_s)
            .crossover(r.tau1_s, r.tau2_s, r.g2)
            .hold(r.tau3_s, r.t_ext_s)
            .threshold(r.k_th, r.v_th_min)
            .build()
    }
}

impl From<AdaptiveConfig> for RawAdaptiveConfig {
    fn from(c: AdaptiveConfig) -> Self {
        Self {
            tau_env_attack_s: c.tau_env_attack_s,
            tau_env_release_s: c.tau_env_release_s,
            tau1_s: c.tau1_s,
            tau2_s: c.tau2_s,
            g2: c.g2,
            tau3_s: c.tau3_s,
            t_ext_s: c.t_ext_s,
            k_th: c.k_th,
            v_th_min: c.v_th_min,
        }
    }
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            tau_env_attack_s: 2e-3,
            tau_env_release_s: 50e-3,
            tau1_s: 200e-3,
            tau2_s: 20e-3,
            g2: 0.9,
            tau3_s: 500e-3,
            t_ext_s: 100e-3,
            k_th: 2.0,
            v_th_min: 1e-6,
        }
    }
}

/// Unchecked staging area for [`AdaptiveConfig`]; starts from the defaults.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfigBuilder(AdaptiveConfig);

impl AdaptiveConfigBuilder {
    pub fn envelope(mut self, tau_attack_s: f64, tau_release_s: f64) -> Self {
        self.0.tau_env_attack_s = tau_attack_s;
        self.0.tau_env_release_s = tau_release_s;
        self
    }

    /// Slow (`tau1_s`) and fast (`tau2_s`) filters and the fast-path gain.
    pub fn crossover(mut self, tau1_s: f64, tau2_s: f64, g2: f64) -> Self {
        self.0.tau1_s = tau1_s;
        self.0.tau2_s = tau2_s;
        self.0.g2 = g2;
        self
    }

    pub fn hold(mut self, tau3_s: f64, t_ext_s: f64) -> Self {
        self.0.tau3_s = tau3_s;
        self.0.t_ext_s = t_ext_s;
        self
    }

    pub fn threshold(mut self, k_th: f64, v_th_min: f64) -> Self {
        self.0.k_th = k_th;
        self.0.v_th_min = v_th_min;
        self
    }

    pub fn build(self) -> Result<AdaptiveConfig> {
        let c = self.0;
        positive("tau_env_attack_s", c.tau_env_attack_s)?;
        positive("tau_env_release_s", c.tau_env_release_s)?;
        positive("tau1_s", c.tau1_s)?;
        positive("tau2_s", c.tau2_s)?;
        positive("tau3_s", c.tau3_s)?;
        positive("t_ext_s", c.t_ext_s)?;
        positive("k_th", c.k_th)?;
        positive("v_th_min", c.v_th_min)?;
        if c.tau1_s <= c.tau2_s {
            return Err(Error::InvalidConfig(format!(
                "slow filter tau1_s ({}) must exceed fast filter tau2_s ({})",
                c.tau1_s, c.tau2_s
            )));
        }
        if !(c.g2 > 0.0 && c.g2 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "g2 must lie in (0, 1), got {}",
                c.g2
            )));
        }
        Ok(c)
    }
}

impl AdaptiveConfig {
    pub fn builder() -> AdaptiveConfigBuilder {
        AdaptiveConfigBuilder(Self::default())
    }

    pub fn tau_env_attack_s(&self) -> f64 {
        self.tau_env_attack_s
    }

    pub fn tau_env_release_s(&self) -> f64 {
        self.tau_env_release_s
    }

    pub fn tau1_s(&self) -> f64 {
        self.tau1_s
    }

    pub fn tau2_s(&self) -> f64 {
        self.tau2_s
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn tau3_s(&self) -> f64 {
        self.tau3_s
    }

    pub fn t_ext_s(&self) -> f64 {
        self.t_ext_s
    }

    pub fn k_th(&self) -> f64 {
        self.k_th
    }

    pub fn v_th_min(&self) -> f64 {
        self.v_th_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adm_config_rejects_each_violation() {
        assert!(AdmConfig::new(0.1, 0.1, 0.0, 0).is_ok());
        assert!(matches!(
            AdmConfig::new(0.0, 0.1, 0.0, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            AdmConfig::new(0.1, -0.1, 0.0, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            AdmConfig::new(0.1, 0.1, -1e-3, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            AdmConfig::new(f64::NAN, 0.1, 0.0, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert_eq!(
            AdmConfig::new(0.1, 0.1, 0.0, 4),
            Err(Error::InvalidGainCode(4))
        );
        assert_eq!(
            AdmConfig::new(0.1, 0.1, 0.0, -1),
            Err(Error::InvalidGainCode(-1))
        );
    }

    #[test]
    fn adaptive_defaults_are_valid() {
        let d = AdaptiveConfig::default();
        assert_eq!(AdaptiveConfig::builder().build().unwrap(), d);
        assert!(d.tau1_s() > d.tau2_s());
    }

    #[test]
    fn adaptive_config_rejects_each_violation() {
        let b = AdaptiveConfig::builder();
        assert!(b.crossover(0.02, 0.2, 0.9).build().is_err());
        assert!(b.crossover(0.2, 0.2, 0.9).build().is_err());
        assert!(b.crossover(0.2, 0.02, 1.0).build().is_err());
        assert!(b.crossover(0.2, 0.02, 0.0).build().is_err());
        assert!(b.envelope(0.0, 0.05).build().is_err());
        assert!(b.hold(0.5, 0.0).build().is_err());
        assert!(b.threshold(2.0, 0.0).build().is_err());
        assert!(b.threshold(-2.0, 1e-6).build().is_err());
    }
}
