//! Session parameters shared by every pipeline stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{spatial_correlation, ChannelModelConfig};
use crate::error::{Result, SkgError};
use crate::signal::QamConstellation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Alice and Bob share a direct link.
    Direct,
    /// Alice and Bob communicate only through an amplify-and-forward relay.
    Relay,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Direct => "direct",
            Scenario::Relay => "relay",
        })
    }
}

impl FromStr for Scenario {
    type Err = SkgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Scenario::Direct),
            "relay" => Ok(Scenario::Relay),
            other => Err(SkgError::InvalidConfig(format!(
                "unknown scenario {other:?}; expected direct or relay"
            ))),
        }
    }
}

/// How Alice and Bob learn their links to the relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimation {
    /// Exact knowledge; the self-interference residual is zero.
    Perfect,
    /// Least-squares estimate from the relay's known unit-power probe.
    ProbeBased,
}

/// All protocol parameters of one key generation session.
///
/// Noise is normalized to unit power everywhere: in the direct scenario the
/// receiver noise variance is `σ_h² / SNR`, and in the relay scenario the relay
/// and downlink noise are unit variance while transmit powers and the
/// amplification factor are set from `relay_snr_db` and `snr_db`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub scenario: Scenario,
    /// Number of OFDM subcarriers N.
    pub n_subcarriers: usize,
    /// QAM order M of the local randomness.
    pub qam_order: usize,
    /// Quantization resolution δ in bits per real dimension.
    pub delta: u32,
    /// Target average SNR of the correlated observations. `+inf` removes
    /// the receiver noise of the direct scenario.
    pub snr_db: f64,
    /// Reciprocity correlation ζ.
    pub zeta: f64,
    /// Eve's distance from the nearest legitimate node in wavelengths.
    /// Ignored when `rho` is given.
    pub eve_distance: f64,
    /// Explicit per-dimension correlation to Eve's channel.
    pub rho: Option<f64>,
    /// Received SNR at the relay for each uplink (relay scenario).
    pub relay_snr_db: f64,
    /// Received SNR of the relay's channel probe (probe-based estimation).
    pub probe_snr_db: f64,
    pub estimation: Estimation,
    /// Gives Eve noiseless receivers.
    pub eve_noiseless: bool,
    pub sigma_h2: f64,
    pub sigma_g2: f64,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig::direct()
    }
}

impl SessionConfig {
    /// 16-QAM, N = 16, δ = 2 at 20 dB over a reciprocal direct link.
    pub fn direct() -> Self {
        SessionConfig {
            scenario: Scenario::Direct,
            n_subcarriers: 16,
            qam_order: 16,
            delta: 2,
            snr_db: 20.0,
            zeta: 1.0,
            eve_distance: 0.5,
            rho: None,
            relay_snr_db: 40.0,
            probe_snr_db: 50.0,
            estimation: Estimation::Perfect,
            eve_noiseless: false,
            sigma_h2: 1.0,
            sigma_g2: 1.0,
            seed: 1,
        }
    }

    /// 64-QAM, N = 16, δ = 2 at 23 dB through the relay, perfect estimation.
    pub fn relay() -> Self {
        SessionConfig {
            scenario: Scenario::Relay,
            qam_order: 64,
            snr_db: 23.0,
            ..SessionConfig::direct()
        }
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Direct => SessionConfig::direct(),
            Scenario::Relay => SessionConfig::relay(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 {
            return Err(SkgError::InvalidConfig(
                "at least two subcarriers are needed to define a quantizer range".into(),
            ));
        }
        if self.delta == 0 || self.delta > 8 {
            return Err(SkgError::InvalidConfig(format!(
                "delta {} outside 1..=8",
                self.delta
            )));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(SkgError::InvalidConfig(
                "snr_db must be finite or +inf".into(),
            ));
        }
        for (name, value) in [
            ("relay_snr_db", self.relay_snr_db),
            ("probe_snr_db", self.probe_snr_db),
            ("eve_distance", self.eve_distance),
        ] {
            if !value.is_finite() {
                return Err(SkgError::InvalidConfig(format!("{name} must be finite")));
            }
        }
        QamConstellation::new(self.qam_order)?;
        self.channel_model()?.validate()
    }

    /// Per-dimension correlation between Eve's channel and the nearby legitimate link.
    pub fn rho(&self) -> Result<f64> {
        match self.rho {
            Some(rho) => Ok(rho),
            None => spatial_correlation(self.eve_distance),
        }
    }

    pub fn snr_linear(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    pub fn constellation(&self) -> Result<QamConstellation> {
        QamConstellation::new(self.qam_order)
    }

    pub fn channel_model(&self) -> Result<ChannelModelConfig> {
        Ok(ChannelModelConfig {
            n_subcarriers: self.n_subcarriers,
            sigma_h2: self.sigma_h2,
            sigma_g2: self.sigma_g2,
            rho: self.rho()?,
            zeta: self.zeta,
        })
    }

    /// Quantized bits per session, 2δN.
    pub fn quantized_len(&self) -> usize {
        2 * self.delta as usize * self.n_subcarriers
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SessionConfig::direct().validate().unwrap();
        SessionConfig::relay().validate().unwrap();
        assert_eq!(SessionConfig::direct().quantized_len(), 64);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut c = SessionConfig::direct();
        c.qam_order = 32;
        assert!(c.validate().is_err());
        let mut c = SessionConfig::direct();
        c.zeta = 0.0;
        assert!(c.validate().is_err());
        let mut c = SessionConfig::direct();
        c.rho = Some(1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn parses_from_toml() {
        let c: SessionConfig =
            toml::from_str("scenario = \"relay\"\nqam_order = 64\nsnr_db = 23.0").unwrap();
        assert_eq!(c.scenario, Scenario::Relay);
        assert_eq!(c.n_subcarriers, 16);
        assert!(toml::from_str::<SessionConfig>("bogus = 1").is_err());
    }
}
