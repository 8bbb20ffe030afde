//! System configuration shared by the channel, scheduling, and harness
//! layers. Field names double as config-file keys and CLI flag names.

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// ADC resolution: a finite number of bits or ideal (unquantized).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdcBits {
    Finite(u32),
    Infinite,
}

impl AdcBits {
    /// `Some(b)` for a finite resolution, `None` for ideal ADCs.
    pub fn bits(self) -> Option<u32> {
        match self {
            AdcBits::Finite(b) => Some(b),
            AdcBits::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, AdcBits::Infinite)
    }
}

impl fmt::Display for AdcBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdcBits::Finite(b) => write!(f, "{b}"),
            AdcBits::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for AdcBits {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") {
            Ok(AdcBits::Infinite)
        } else {
            s.parse::<u32>()
                .map(AdcBits::Finite)
                .map_err(|_| Error::Config(format!("invalid ADC bits '{s}' (integer or \"inf\")")))
        }
    }
}

// Serialized as a bare integer, or the string "inf" for ideal ADCs.
impl Serialize for AdcBits {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AdcBits::Finite(b) => ser.serialize_u32(*b),
            AdcBits::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for AdcBits {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(b) => Ok(AdcBits::Finite(b)),
            Raw::Str(s) => AdcBits::from_str(&s).map_err(D::Error::custom),
        }
    }
}

/// How user angles of arrival relate to the receive beam grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Every path angle sits exactly on a DFT grid point.
    Aligned,
    /// Path angles are drawn uniformly over the whole angular range.
    Arbitrary,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Aligned => "aligned",
            Scenario::Arbitrary => "arbitrary",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aligned" => Ok(Scenario::Aligned),
            "arbitrary" => Ok(Scenario::Arbitrary),
            _ => Err(Error::Config(format!(
                "invalid scenario '{s}' (aligned | arbitrary)"
            ))),
        }
    }
}

/// How the analog combining matrix is chosen from the DFT beam grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinerPolicy {
    /// Use all M DFT beams; requires as many RF chains as antennas.
    FullDft,
    /// Keep the N beams carrying the most total candidate energy.
    StrongestBeams,
    /// Use the beam indices listed in `combiner_indices`.
    FixedIndices,
}

impl fmt::Display for CombinerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombinerPolicy::FullDft => "full_dft",
            CombinerPolicy::StrongestBeams => "strongest_beams",
            CombinerPolicy::FixedIndices => "fixed_indices",
        })
    }
}

impl FromStr for CombinerPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "full_dft" => Ok(CombinerPolicy::FullDft),
            "strongest_beams" => Ok(CombinerPolicy::StrongestBeams),
            "fixed_indices" => Ok(CombinerPolicy::FixedIndices),
            _ => Err(Error::Config(format!(
                "invalid combiner '{s}' (full_dft | strongest_beams | fixed_indices)"
            ))),
        }
    }
}

/// Full description of one simulated uplink configuration.
///
/// Defaults are the desk-scale working point: 32 antennas, 16 RF chains,
/// 50 candidate users, 4 scheduled, 3-bit ADCs at 6 dB SNR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Receive array size M.
    pub antennas: usize,
    /// RF chains N (beamspace dimension after combining), N ≤ M.
    pub rf_chains: usize,
    /// Candidate user pool size K.
    pub candidates: usize,
    /// Users scheduled per slot S, S ≤ N.
    pub scheduled: usize,
    /// Per-user transmit SNR ρ in dB.
    pub snr_db: f64,
    /// Mean of the (≥1-truncated) Poisson path count per user.
    pub mean_paths: f64,
    /// ADC resolution per branch: integer bits or "inf".
    pub bits: AdcBits,
    /// Angle model for user paths.
    pub scenario: Scenario,
    /// Analog combiner selection policy.
    pub combiner: CombinerPolicy,
    /// Beam indices used by the fixed_indices policy (must have
    /// rf_chains distinct entries, each < antennas).
    pub combiner_indices: Vec<usize>,
    /// Base seed; (seed, purpose, trial, user) determines every draw.
    pub seed: u64,
    /// CSS beamspace-correlation threshold ε.
    pub css_eps: f64,
    /// CSS maximum dominant-beam overlap N_OL.
    pub css_n_ol: usize,
    /// CSS dominant-beam count N_b; default (None) uses each user's path count.
    pub css_n_b: Option<usize>,
    /// Chordal scheduler normalized-distance threshold d_th.
    pub chordal_d_th: f64,
    /// SUS orthogonality threshold ε.
    pub sus_eps: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            antennas: 32,
            rf_chains: 16,
            candidates: 50,
            scheduled: 4,
            snr_db: 6.0,
            mean_paths: 3.0,
            bits: AdcBits::Finite(3),
            scenario: Scenario::Arbitrary,
            combiner: CombinerPolicy::StrongestBeams,
            combiner_indices: Vec::new(),
            seed: 1,
            css_eps: 0.35,
            css_n_ol: 1,
            css_n_b: None,
            chordal_d_th: 0.8,
            sus_eps: 0.4,
        }
    }
}

impl SystemConfig {
    /// Linear per-user SNR ρ.
    pub fn snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.antennas == 0 {
            return fail("antennas must be >= 1".into());
        }
        if self.rf_chains == 0 || self.rf_chains > self.antennas {
            return fail(format!(
                "rf_chains must be in 1..=antennas ({} vs {})",
                self.rf_chains, self.antennas
            ));
        }
        if self.scheduled == 0 || self.scheduled > self.rf_chains {
            return fail(format!(
                "scheduled must be in 1..=rf_chains ({} vs {})",
                self.scheduled, self.rf_chains
            ));
        }
        if self.candidates < self.scheduled {
            return fail(format!(
                "candidates ({}) must be >= scheduled ({})",
                self.candidates, self.scheduled
            ));
        }
        if !self.snr_db.is_finite() {
            return fail(format!("snr_db must be finite, got {}", self.snr_db));
        }
        if !(self.mean_paths > 0.0) || !self.mean_paths.is_finite() {
            return fail(format!("mean_paths must be positive, got {}", self.mean_paths));
        }
        match self.bits {
            AdcBits::Finite(0) => return fail("bits must be >= 1 (or \"inf\")".into()),
            AdcBits::Finite(b) if b > 16 => {
                return fail(format!("bits = {b} exceeds the supported range 1..=16"));
            }
            _ => {}
        }
        if self.combiner == CombinerPolicy::FullDft && self.rf_chains != self.antennas {
            return fail(format!(
                "full_dft combining needs rf_chains == antennas ({} vs {})",
                self.rf_chains, self.antennas
            ));
        }
        if self.combiner == CombinerPolicy::FixedIndices {
            let idx = &self.combiner_indices;
            if idx.len() != self.rf_chains {
                return fail(format!(
                    "fixed_indices needs exactly rf_chains = {} entries, got {}",
                    self.rf_chains,
                    idx.len()
                ));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= self.antennas) {
                return fail(format!("combiner index {bad} out of range 0..{}", self.antennas));
            }
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return fail("combiner_indices contains duplicates".into());
            }
        }
        if !(self.css_eps > 0.0 && self.css_eps <= 1.0) {
            return fail(format!("css_eps must be in (0,1], got {}", self.css_eps));
        }
        if !(0.0..=1.0).contains(&self.chordal_d_th) {
            return fail(format!(
                "chordal_d_th must be in [0,1], got {}",
                self.chordal_d_th
            ));
        }
        if !(self.sus_eps > 0.0 && self.sus_eps <= 1.0) {
            return fail(format!("sus_eps must be in (0,1], got {}", self.sus_eps));
        }
        if let Some(nb) = self.css_n_b {
            if nb == 0 {
                return fail("css_n_b must be >= 1 when set".into());
            }
        }
        Ok(())
    }
}
