//! Simulation world definition: room geometry, stripe placement, radio-unit
//! roster, terminal, blockers, and the config-file loader.
//!
//! A scenario is one TOML file; every field has a documented default, so the
//! empty file is itself a valid scenario. See the repository README for the
//! full grammar.

use crate::geometry::Vec3;
use crate::rfchain::{CentralUnitSpec, FiberSpec, RU_GAIN_CAP_DB};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Malformed config file; the underlying message carries line/column info.
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// An invariant was violated; `field` names the offending entry.
    #[error("validation error: {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuMode {
    Transmit,
    Booster,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Steering {
    FixedBroadside,
    SteeredToTarget,
}

/// Power roll-off exponent q of the cos^q element pattern that pairs with a
/// 6 dBi patch in this model. Documented constant used by all defaults.
pub const DEFAULT_ELEMENT_ROLLOFF: f64 = 1.39;

/// Rectangular antenna array: `n_x * n_y` elements on a half-wavelength grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaSpec {
    pub n_x: u32,
    pub n_y: u32,
    pub element_gain_dbi: f64,
    /// q in the cos^q(theta) element power pattern.
    pub element_rolloff_exponent: f64,
    pub steering: Steering,
}

impl Default for AntennaSpec {
    fn default() -> Self {
        Self {
            n_x: 4,
            n_y: 4,
            element_gain_dbi: 6.0,
            element_rolloff_exponent: DEFAULT_ELEMENT_ROLLOFF,
            steering: Steering::SteeredToTarget,
        }
    }
}

impl AntennaSpec {
    pub fn single_patch() -> Self {
        Self {
            n_x: 1,
            n_y: 1,
            ..Self::default()
        }
    }

    pub fn n_elements(&self) -> u32 {
        self.n_x * self.n_y
    }

    fn validate(&self, field: &str) -> Result<(), ScenarioError> {
        if self.n_x < 1 || self.n_y < 1 {
            return Err(invalid(field, "element counts must be >= 1"));
        }
        if !self.element_gain_dbi.is_finite() {
            return Err(invalid(field, "element_gain_dbi must be finite"));
        }
        if !(self.element_rolloff_exponent >= 0.0) {
            return Err(invalid(field, "element_rolloff_exponent must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Room {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    /// Linear amplitude reflection factor of the walls, in [0, 1].
    /// Only the low-band channel generator looks at this.
    pub wall_reflectivity: f64,
}

impl Default for Room {
    fn default() -> Self {
        Self {
            length_m: 15.0,
            width_m: 6.0,
            height_m: 5.0,
            wall_reflectivity: 0.3,
        }
    }
}

impl Room {
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= 0.0
            && p.x <= self.length_m
            && p.y >= 0.0
            && p.y <= self.width_m
            && p.z >= 0.0
            && p.z <= self.height_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StripePlacement {
    /// CU position; the first RU sits one full spacing further along.
    pub start: Vec3,
    pub direction: Vec3,
    pub length_m: f64,
    pub ru_spacing_m: f64,
    /// Stride of transmit-capable RUs: 1 means every RU can transmit.
    pub transmit_capable_every: u32,
}

impl Default for StripePlacement {
    fn default() -> Self {
        Self {
            start: Vec3::new(0.0, 3.0, 4.5),
            direction: Vec3::new(1.0, 0.0, 0.0),
            length_m: 15.0,
            ru_spacing_m: 1.5,
            transmit_capable_every: 1,
        }
    }
}

impl StripePlacement {
    /// Number of RUs on the stripe: floor(length / spacing).
    pub fn ru_count(&self) -> usize {
        (self.length_m / self.ru_spacing_m + 1e-9).floor() as usize
    }

    pub fn end(&self) -> Vec3 {
        self.start + self.direction * self.length_m
    }
}

/// RU positions along the stripe: start + k * spacing * direction, k = 1..=N.
pub fn ru_positions(stripe: &StripePlacement) -> Vec<Vec3> {
    (1..=stripe.ru_count())
        .map(|k| stripe.start + stripe.direction * (k as f64 * stripe.ru_spacing_m))
        .collect()
}

/// One radio unit of the materialized roster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioUnitSpec {
    pub index: usize,
    pub mode: RuMode,
    pub tx_array: AntennaSpec,
    pub booster_gain_db: f64,
    pub noise_figure_db: f64,
    pub oip3_dbm: f64,
}

/// Template applied to every RU on the stripe; per-RU mode comes from the
/// transmit-capable stride plus explicit overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuDefaults {
    pub tx_array: AntennaSpec,
    /// Amplifier gain per RU. 10.5 dB exactly compensates one default hop
    /// (3 dB/m * 1.5 m fiber + two 3 dB couplers).
    pub booster_gain_db: f64,
    pub noise_figure_db: f64,
    pub oip3_dbm: f64,
}

impl Default for RuDefaults {
    fn default() -> Self {
        Self {
            tx_array: AntennaSpec::default(),
            booster_gain_db: 10.5,
            noise_figure_db: 8.0,
            oip3_dbm: 17.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuOverride {
    pub index: usize,
    pub mode: RuMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserTerminal {
    pub position: Vec3,
    pub rx_array: AntennaSpec,
    /// Used for Doppler reporting only.
    pub speed_mps: f64,
}

impl Default for UserTerminal {
    fn default() -> Self {
        Self {
            position: Vec3::new(7.5, 3.0, 0.5),
            rx_array: AntennaSpec::default(),
            speed_mps: 1.389,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Blocker {
    pub center: Vec3,
    pub radius_m: f64,
    pub penetration_loss_db: f64,
}

impl Default for Blocker {
    fn default() -> Self {
        Self {
            center: Vec3::new(0.0, 0.0, 0.0),
            radius_m: 0.15,
            penetration_loss_db: 40.0,
        }
    }
}

/// Fixed low-band access point used by the dual-band machinery: a uniform
/// linear array at half-wavelength spacing.
///
/// The default sits a quarter room-width off the stripe axis. On the axis the
/// array cannot tell mirror-image terminal positions apart (equal distances to
/// every antenna), which collapses beam labels for half the floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LowbandAp {
    pub position: Vec3,
    pub n_antennas: usize,
    pub axis: Vec3,
    /// Optional CSI noise: per-sample complex Gaussian at this SNR (dB),
    /// seeded from the scenario seed. Absent means noise-free channels.
    pub csi_noise_snr_db: Option<f64>,
}

impl Default for LowbandAp {
    fn default() -> Self {
        Self {
            position: Vec3::new(7.5, 1.5, 5.0),
            n_antennas: 8,
            axis: Vec3::new(1.0, 0.0, 0.0),
            csi_noise_snr_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub room: Room,
    pub stripe: StripePlacement,
    pub cu: CentralUnitSpec,
    pub fiber: FiberSpec,
    pub ru_defaults: RuDefaults,
    pub ru_overrides: Vec<RuOverride>,
    pub terminal: UserTerminal,
    pub blockers: Vec<Blocker>,
    pub lowband_ap: LowbandAp,
    pub carrier_hz: f64,
    pub lowband_hz: f64,
    pub bandwidth_hz: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            room: Room::default(),
            stripe: StripePlacement::default(),
            cu: CentralUnitSpec::default(),
            fiber: FiberSpec::default(),
            ru_defaults: RuDefaults::default(),
            ru_overrides: Vec::new(),
            terminal: UserTerminal::default(),
            blockers: Vec::new(),
            lowband_ap: LowbandAp::default(),
            carrier_hz: 140e9,
            lowband_hz: 6e9,
            bandwidth_hz: 20e9,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Materialize the RU roster: stride-capable RUs default to Transmit,
    /// the rest to Booster, then explicit overrides are applied.
    pub fn radio_units(&self) -> Vec<RadioUnitSpec> {
        let stride = self.stripe.transmit_capable_every.max(1) as usize;
        let mut rus: Vec<RadioUnitSpec> = (0..self.stripe.ru_count())
            .map(|i| RadioUnitSpec {
                index: i,
                mode: if (i + 1) % stride == 0 {
                    RuMode::Transmit
                } else {
                    RuMode::Booster
                },
                tx_array: self.ru_defaults.tx_array,
                booster_gain_db: self.ru_defaults.booster_gain_db,
                noise_figure_db: self.ru_defaults.noise_figure_db,
                oip3_dbm: self.ru_defaults.oip3_dbm,
            })
            .collect();
        for ov in &self.ru_overrides {
            if let Some(ru) = rus.get_mut(ov.index) {
                ru.mode = ov.mode;
            }
        }
        rus
    }

    pub fn ru_positions(&self) -> Vec<Vec3> {
        ru_positions(&self.stripe)
    }

    /// Indices of RUs that may transmit over the air: on the stride and not
    /// disabled.
    pub fn transmit_capable_indices(&self) -> Vec<usize> {
        let stride = self.stripe.transmit_capable_every.max(1) as usize;
        self.radio_units()
            .iter()
            .filter(|ru| (ru.index + 1) % stride == 0 && ru.mode != RuMode::Disabled)
            .map(|ru| ru.index)
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let r = &self.room;
        if !(r.length_m > 0.0 && r.width_m > 0.0 && r.height_m > 0.0) {
            return Err(invalid("room", "all dimensions must be > 0"));
        }
        if !(0.0..=1.0).contains(&r.wall_reflectivity) {
            return Err(invalid("room.wall_reflectivity", "must be in [0, 1]"));
        }

        let s = &self.stripe;
        if !(s.length_m > 0.0) {
            return Err(invalid("stripe.length_m", "must be > 0"));
        }
        if !(s.ru_spacing_m > 0.0 && s.ru_spacing_m <= s.length_m) {
            return Err(invalid("stripe.ru_spacing_m", "must be in (0, length_m]"));
        }
        if (s.direction.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid("stripe.direction", "must be a unit vector"));
        }
        if s.transmit_capable_every < 1 {
            return Err(invalid("stripe.transmit_capable_every", "must be >= 1"));
        }
        if !r.contains(s.start) || !r.contains(s.end()) {
            return Err(invalid("stripe", "stripe must lie inside the room"));
        }

        self.ru_defaults.tx_array.validate("ru_defaults.tx_array")?;
        if !(self.ru_defaults.booster_gain_db < RU_GAIN_CAP_DB) {
            return Err(invalid(
                "ru_defaults.booster_gain_db",
                format!("must be below the {RU_GAIN_CAP_DB} dB self-oscillation cap"),
            ));
        }
        if self.ru_defaults.noise_figure_db < 0.0 {
            return Err(invalid("ru_defaults.noise_figure_db", "must be >= 0"));
        }

        let n_ru = s.ru_count();
        for ov in &self.ru_overrides {
            if ov.index >= n_ru {
                return Err(invalid(
                    "ru_overrides.index",
                    format!("index {} out of range (stripe has {n_ru} RUs)", ov.index),
                ));
            }
        }
        // Disabled RUs must form a suffix of the chain: power for RU k flows
        // through every earlier RU.
        let rus = self.radio_units();
        if let Some(first_disabled) = rus.iter().position(|ru| ru.mode == RuMode::Disabled) {
            if let Some(bad) = rus[first_disabled..].iter().find(|ru| ru.mode != RuMode::Disabled) {
                return Err(invalid(
                    "ru_overrides",
                    format!(
                        "RU {} is active after disabled RU {first_disabled}; \
                         disabling an RU disables all subsequent RUs",
                        bad.index
                    ),
                ));
            }
        }

        self.cu.validate().map_err(|m| invalid("cu", m))?;
        self.fiber.validate().map_err(|m| invalid("fiber", m))?;

        self.terminal.rx_array.validate("terminal.rx_array")?;
        if !r.contains(self.terminal.position) {
            return Err(invalid("terminal.position", "must be inside the room"));
        }
        if self.terminal.speed_mps < 0.0 {
            return Err(invalid("terminal.speed_mps", "must be >= 0"));
        }

        for (i, b) in self.blockers.iter().enumerate() {
            if !(b.radius_m > 0.0) {
                return Err(invalid(&format!("blockers[{i}].radius_m"), "must be > 0"));
            }
            if b.penetration_loss_db < 0.0 {
                return Err(invalid(
                    &format!("blockers[{i}].penetration_loss_db"),
                    "must be >= 0",
                ));
            }
        }

        if self.lowband_ap.n_antennas < 1 {
            return Err(invalid("lowband_ap.n_antennas", "must be >= 1"));
        }
        if (self.lowband_ap.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid("lowband_ap.axis", "must be a unit vector"));
        }
        if !r.contains(self.lowband_ap.position) {
            return Err(invalid("lowband_ap.position", "must be inside the room"));
        }

        if !(self.lowband_hz > 0.0 && self.carrier_hz > self.lowband_hz) {
            return Err(invalid("carrier_hz", "must satisfy carrier_hz > lowband_hz > 0"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(invalid("bandwidth_hz", "must be > 0"));
        }
        Ok(())
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text)
}
