//! Built-in channel families and the TOML profile format.

use super::{delay_grid, exp_profile_spec, ChannelSpec, PathSpec};
use crate::error::{invalid, Error, Result};
use crate::numeric::db_to_linear;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// Exponential-decay families on a 0..15 sample delay grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelPreset {
    /// Amplitude `exp(-0.5 tau)`, delays `0:0.1:15`.
    Mild,
    /// Amplitude `exp(-0.05 tau)`, delays `0:0.1:15`.
    Severe,
    /// Amplitude `exp(-0.5 tau)`, delays `0:1:15`.
    Integer,
}

impl ChannelPreset {
    pub fn decay(self) -> f64 {
        match self {
            Self::Mild | Self::Integer => 0.5,
            Self::Severe => 0.05,
        }
    }

    pub fn delays(self) -> Vec<f64> {
        match self {
            Self::Mild | Self::Severe => delay_grid(0.0, 0.1, 15.0),
            Self::Integer => delay_grid(0.0, 1.0, 15.0),
        }
    }

    pub fn spec(self) -> ChannelSpec {
        exp_profile_spec(self.decay(), &self.delays()).expect("preset is valid")
    }

    /// Prefix length that covers every delay of the preset.
    pub fn prefix_len(self) -> usize {
        16
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Mild => "mild",
            Self::Severe => "severe",
            Self::Integer => "integer",
        }
    }
}

impl FromStr for ChannelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mild" => Ok(Self::Mild),
            "severe" => Ok(Self::Severe),
            "integer" | "int" => Ok(Self::Integer),
            other => Err(invalid(format!("unknown channel preset '{other}'"))),
        }
    }
}

/// CDL-C tapped delay line: (normalised delay, power in dB).
#[allow(clippy::approx_constant)]
pub const CDL_C_TAPS: [(f64, f64); 24] = [
    (0.0, -4.4),
    (0.2099, -1.2),
    (0.2219, -3.5),
    (0.2329, -5.2),
    (0.2176, -2.5),
    (0.6366, 0.0),
    (0.6448, -2.2),
    (0.6560, -3.9),
    (0.6584, -7.4),
    (0.7935, -7.1),
    (0.8213, -10.7),
    (0.9336, -11.1),
    (1.2285, -5.1),
    (1.3083, -6.8),
    (2.1704, -8.7),
    (2.7105, -13.2),
    (4.2589, -13.9),
    (4.6003, -13.9),
    (5.4902, -15.8),
    (5.6077, -17.1),
    (6.3065, -16.0),
    (6.6374, -15.7),
    (7.0427, -21.6),
    (8.6523, -22.8),
];

/// CDL-C delay profile for a SISO link: delays scaled by
/// `delay_spread_s * sample_rate_hz` samples, random phases, powers
/// normalised to a unit total.
pub fn cdl_c_spec(delay_spread_s: f64, sample_rate_hz: f64) -> Result<ChannelSpec> {
    if !(delay_spread_s > 0.0) || !(sample_rate_hz > 0.0) {
        return Err(invalid("delay spread and sample rate must be positive"));
    }
    let scale = delay_spread_s * sample_rate_hz;
    let paths = CDL_C_TAPS
        .iter()
        .map(|&(d, p)| PathSpec::random_phase(d * scale, db_to_linear(p)))
        .collect();
    Ok(ChannelSpec::from_paths(paths)?.normalized())
}

/// Prefix length `ceil(sample_rate * tau_max)`.
pub fn prefix_len_for(sample_rate_hz: f64, tau_max_s: f64) -> usize {
    // guard against 16.000000000001 style rounding
    let x = sample_rate_hz * tau_max_s;
    (x - 1e-9).ceil().max(0.0) as usize
}

/// On-disk channel description.
///
/// ```toml
/// delays_samples = [0.0, 0.5, 1.7]
/// powers_db = [0.0, -3.0, -6.0]   # or: decay = 0.5
/// doppler = [0.0, 0.0, 0.0]       # optional
/// seed = 7                        # optional
/// max_delay = 16.0                # optional
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelProfile {
    pub delays_samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delay: Option<f64>,
}

impl ChannelProfile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_spec(&self) -> Result<ChannelSpec> {
        let n = self.delays_samples.len();
        let powers: Vec<f64> = match (&self.powers_db, self.decay) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse("give either powers_db or decay, not both".into()))
            }
            (Some(db), None) => {
                if db.len() != n {
                    return Err(Error::Parse(format!(
                        "{} powers for {n} delays",
                        db.len()
                    )));
                }
                db.iter().map(|&p| db_to_linear(p)).collect()
            }
            (None, Some(decay)) => exp_profile_spec(decay, &self.delays_samples)?
                .paths()
                .iter()
                .map(PathSpec::power)
                .collect(),
            (None, None) => return Err(Error::Parse("profile needs powers_db or decay".into())),
        };
        let doppler = match &self.doppler {
            Some(d) if d.len() != n => {
                return Err(Error::Parse(format!("{} doppler values for {n} delays", d.len())))
            }
            Some(d) => d.clone(),
            None => vec![0.0; n],
        };
        let paths: Vec<PathSpec> = self
            .delays_samples
            .iter()
            .zip(powers)
            .zip(doppler)
            .map(|((&t, p), nu)| PathSpec::random_phase(t, p).with_doppler(nu))
            .collect();
        match self.max_delay {
            Some(m) => ChannelSpec::new(paths, m),
            None => ChannelSpec::from_paths(paths),
        }
    }
}
