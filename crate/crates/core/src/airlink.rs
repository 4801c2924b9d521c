//! Over-the-air link budget: free-space path loss, array patterns with scan
//! loss, sphere-blocker penetration, serving-RU selection, and the
//! end-to-end fiber+air gain comparison against a single central AP.

use crate::dbmath::linear_to_db;
use crate::geometry::{point_segment_distance, Vec3};
use crate::rfchain::{run_chain_with, ChainError, ChainOptions, FiberSpec};
use crate::scenario::{AntennaSpec, Blocker, ScenarioConfig, Steering};
use serde::Serialize;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, thiserror::Error)]
pub enum AirlinkError {
    #[error("frequency must be > 0 Hz, got {0}")]
    NonPositiveFrequency(f64),
    #[error("distance must be > 0 m, got {0}")]
    NonPositiveDistance(f64),
    #[error("beamwidth estimate needs at least 2 elements per axis, got {0}")]
    ArrayTooSmall(u32),
    #[error("transmitter and terminal positions coincide")]
    CoincidentPositions,
    #[error("position grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub fn wavelength_m(f_hz: f64) -> Result<f64, AirlinkError> {
    if !(f_hz > 0.0) {
        return Err(AirlinkError::NonPositiveFrequency(f_hz));
    }
    Ok(SPEED_OF_LIGHT / f_hz)
}

/// Free-space path loss 20*log10(4*pi*d/lambda).
pub fn fspl_db(f_hz: f64, d_m: f64) -> Result<f64, AirlinkError> {
    if !(d_m > 0.0) {
        return Err(AirlinkError::NonPositiveDistance(d_m));
    }
    let lambda = wavelength_m(f_hz)?;
    Ok(20.0 * (4.0 * std::f64::consts::PI * d_m / lambda).log10())
}

/// Broadside gain of a lossless-feed array: element gain + 10*log10(n).
pub fn array_gain_dbi(spec: &AntennaSpec) -> f64 {
    spec.element_gain_dbi + 10.0 * (spec.n_elements() as f64).log10()
}

/// Half-power beamwidth of an n-element half-wavelength axis at broadside,
/// 0.886 * lambda / (n * lambda/2) radians.
pub fn hpbw_deg(n_elems_axis: u32) -> Result<f64, AirlinkError> {
    if n_elems_axis < 2 {
        return Err(AirlinkError::ArrayTooSmall(n_elems_axis));
    }
    Ok((2.0 * 0.886 / n_elems_axis as f64).to_degrees())
}

/// Max Doppler shift v*f/c.
pub fn doppler_hz(speed_mps: f64, f_hz: f64) -> f64 {
    speed_mps * f_hz / SPEED_OF_LIGHT
}

const ELEMENT_FLOOR_DB: f64 = -40.0;

fn element_factor_db(q: f64, cos_theta: f64) -> f64 {
    if cos_theta <= 0.0 {
        ELEMENT_FLOOR_DB
    } else {
        (q * 10.0 * cos_theta.log10()).max(ELEMENT_FLOOR_DB)
    }
}

fn dirichlet(n: u32, psi: f64) -> f64 {
    let half = 0.5 * psi;
    if half.sin().abs() < 1e-12 {
        n as f64
    } else {
        (n as f64 * half).sin() / half.sin()
    }
}

/// Directive gain of the array toward `obs` when the main beam is steered to
/// `steer`, both unit vectors in the array's local frame (broadside = +z,
/// element rows along local x/y at half-wavelength pitch).
///
/// Normalized so a steered beam observed on-target returns `array_gain_dbi`;
/// off-beam observation pays the array-factor roll-off, off-broadside
/// observation additionally pays the cos^q element roll-off.
pub fn pattern_gain_db(spec: &AntennaSpec, steer: Vec3, obs: Vec3) -> f64 {
    let ef = element_factor_db(spec.element_rolloff_exponent, obs.z);
    let n = spec.n_elements() as f64;
    let psi_x = std::f64::consts::PI * (obs.x - steer.x);
    let psi_y = std::f64::consts::PI * (obs.y - steer.y);
    let af = dirichlet(spec.n_x, psi_x) * dirichlet(spec.n_y, psi_y);
    let af_gain = linear_to_db((af * af / n).max(1e-30));
    spec.element_gain_dbi + ef + af_gain
}

/// Sum of penetration losses over blockers whose sphere cuts the segment.
/// A tangent sphere does not block.
pub fn blockage_loss_db(tx: Vec3, rx: Vec3, blockers: &[Blocker]) -> f64 {
    blockers
        .iter()
        .filter(|b| point_segment_distance(b.center, tx, rx) < b.radius_m)
        .map(|b| b.penetration_loss_db)
        .sum()
}

/// Orthonormal frame mapping global directions into array-local coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ArrayFrame {
    ex: Vec3,
    ey: Vec3,
    ez: Vec3,
}

impl ArrayFrame {
    /// Ceiling-mounted array, broadside straight down.
    pub fn facing_down() -> Self {
        Self {
            ex: Vec3::new(1.0, 0.0, 0.0),
            ey: Vec3::new(0.0, -1.0, 0.0),
            ez: Vec3::new(0.0, 0.0, -1.0),
        }
    }

    /// Terminal array, broadside straight up.
    pub fn facing_up() -> Self {
        Self {
            ex: Vec3::new(1.0, 0.0, 0.0),
            ey: Vec3::new(0.0, 1.0, 0.0),
            ez: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    pub fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.ex), v.dot(self.ey), v.dot(self.ez))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TxId {
    Ru(usize),
    Central,
}

impl std::fmt::Display for TxId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TxId::Ru(i) => write!(f, "{i}"),
            TxId::Central => write!(f, "central"),
        }
    }
}

/// A candidate downlink transmitter (stripe RU or the central AP).
#[derive(Debug, Clone, Copy)]
pub struct Transmitter {
    pub id: TxId,
    pub position: Vec3,
    pub array: AntennaSpec,
    pub frame: ArrayFrame,
    /// Fixed beam direction (global), overriding the array's steering mode.
    pub beam: Option<Vec3>,
}

impl Transmitter {
    pub fn ru(config: &ScenarioConfig, index: usize) -> Self {
        Self {
            id: TxId::Ru(index),
            position: config.ru_positions()[index],
            array: config.ru_defaults.tx_array,
            frame: ArrayFrame::facing_down(),
            beam: None,
        }
    }

    /// Single AP at room-center stripe height.
    pub fn central(config: &ScenarioConfig, steering: Steering) -> Self {
        Self {
            id: TxId::Central,
            position: Vec3::new(
                config.room.length_m / 2.0,
                config.room.width_m / 2.0,
                config.stripe.start.z,
            ),
            array: AntennaSpec {
                steering,
                ..config.ru_defaults.tx_array
            },
            frame: ArrayFrame::facing_down(),
            beam: None,
        }
    }

    pub fn with_beam(mut self, dir: Vec3) -> Self {
        self.beam = Some(dir);
        self
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinkSample {
    pub tx: TxId,
    pub ue_position: Vec3,
    pub path_gain_db: f64,
    pub los_blocked: bool,
}

/// Total path gain tx -> terminal: both antenna patterns, FSPL at the carrier,
/// and blocker penetration. The terminal steers per its own array spec.
pub fn link_path_gain(
    tx: &Transmitter,
    ue_position: Vec3,
    ue_array: &AntennaSpec,
    config: &ScenarioConfig,
) -> Result<LinkSample, AirlinkError> {
    let d = tx.position.distance(ue_position);
    if d == 0.0 {
        return Err(AirlinkError::CoincidentPositions);
    }
    let dir_to_ue = (ue_position - tx.position).normalized();

    let obs_tx = tx.frame.to_local(dir_to_ue);
    let steer_tx = match tx.beam {
        Some(beam) => tx.frame.to_local(beam),
        None => match tx.array.steering {
            Steering::SteeredToTarget => obs_tx,
            Steering::FixedBroadside => Vec3::new(0.0, 0.0, 1.0),
        },
    };

    let ue_frame = ArrayFrame::facing_up();
    let obs_ue = ue_frame.to_local(-dir_to_ue);
    let steer_ue = match ue_array.steering {
        Steering::SteeredToTarget => obs_ue,
        Steering::FixedBroadside => Vec3::new(0.0, 0.0, 1.0),
    };

    let blockage = blockage_loss_db(tx.position, ue_position, &config.blockers);
    let path_gain_db = pattern_gain_db(&tx.array, steer_tx, obs_tx)
        + pattern_gain_db(ue_array, steer_ue, obs_ue)
        - fspl_db(config.carrier_hz, d)?
        - blockage;

    Ok(LinkSample {
        tx: tx.id,
        ue_position,
        path_gain_db,
        los_blocked: blockage > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeProfile {
    pub path_gain_db: Vec<f64>,
    pub serving: Vec<TxId>,
    pub los_blocked: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathGainProfile {
    pub x_grid_m: Vec<f64>,
    pub distributed: ModeProfile,
    pub central_steered: ModeProfile,
    pub central_unsteered: ModeProfile,
}

fn ue_at(config: &ScenarioConfig, x: f64) -> Vec3 {
    Vec3::new(x, config.terminal.position.y, config.terminal.position.z)
}

/// Best transmit-capable RU for the terminal at `ue`, by instantaneous
/// path-gain argmax with lower-index tie-break. No hysteresis.
pub fn serving_ru(config: &ScenarioConfig, ue: Vec3) -> Result<LinkSample, AirlinkError> {
    let mut best: Option<LinkSample> = None;
    for idx in config.transmit_capable_indices() {
        let sample = link_path_gain(&Transmitter::ru(config, idx), ue, &config.terminal.rx_array, config)?;
        best = match best {
            None => Some(sample),
            Some(cur) if sample.path_gain_db > cur.path_gain_db => Some(sample),
            Some(cur) => Some(cur),
        };
    }
    best.ok_or(AirlinkError::EmptyGrid)
}

/// Sweep the terminal along x and record path gain plus serving transmitter
/// for the distributed stripe and for a steered/unsteered central AP.
pub fn serve_and_profile(config: &ScenarioConfig, x_grid: &[f64]) -> Result<PathGainProfile, AirlinkError> {
    if x_grid.is_empty() {
        return Err(AirlinkError::EmptyGrid);
    }
    let mut profile = PathGainProfile {
        x_grid_m: x_grid.to_vec(),
        distributed: ModeProfile {
            path_gain_db: Vec::with_capacity(x_grid.len()),
            serving: Vec::with_capacity(x_grid.len()),
            los_blocked: Vec::with_capacity(x_grid.len()),
        },
        central_steered: ModeProfile {
            path_gain_db: Vec::with_capacity(x_grid.len()),
            serving: Vec::with_capacity(x_grid.len()),
            los_blocked: Vec::with_capacity(x_grid.len()),
        },
        central_unsteered: ModeProfile {
            path_gain_db: Vec::with_capacity(x_grid.len()),
            serving: Vec::with_capacity(x_grid.len()),
            los_blocked: Vec::with_capacity(x_grid.len()),
        },
    };
    let steered = Transmitter::central(config, Steering::SteeredToTarget);
    let unsteered = Transmitter::central(config, Steering::FixedBroadside);
    for &x in x_grid {
        let ue = ue_at(config, x);
        let dist = serving_ru(config, ue)?;
        profile.distributed.path_gain_db.push(dist.path_gain_db);
        profile.distributed.serving.push(dist.tx);
        profile.distributed.los_blocked.push(dist.los_blocked);
        for (tx, mode) in [
            (&steered, &mut profile.central_steered),
            (&unsteered, &mut profile.central_unsteered),
        ] {
            let s = link_path_gain(tx, ue, &config.terminal.rx_array, config)?;
            mode.path_gain_db.push(s.path_gain_db);
            mode.serving.push(s.tx);
            mode.los_blocked.push(s.los_blocked);
        }
    }
    Ok(profile)
}

/// Fiber technology variant for the end-to-end comparison. Booster gain per
/// hop is min(hop loss, cap): boosters compensate what they can but never
/// exceed the cap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiberVariant {
    pub atten_db_per_m: f64,
    pub coupler_loss_db: f64,
    pub booster_gain_cap_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndToEndProfile {
    pub x_grid_m: Vec<f64>,
    /// Central steered AP, air only.
    pub direct_db: Vec<f64>,
    /// Net fiber-chain gain to the serving RU's tap plus its air path gain.
    pub stripe_db: Vec<f64>,
    pub serving: Vec<TxId>,
}

/// Compare the stripe (fiber losses + boosters + short air hop) against a
/// direct central link along the terminal trajectory.
pub fn end_to_end_gain_profile(
    config: &ScenarioConfig,
    x_grid: &[f64],
    variant: &FiberVariant,
) -> Result<EndToEndProfile, AirlinkError> {
    if x_grid.is_empty() {
        return Err(AirlinkError::EmptyGrid);
    }
    let report = run_chain_with(
        config,
        &ChainOptions {
            launch_dbm: None,
            fiber: Some(FiberSpec {
                atten_db_per_m: variant.atten_db_per_m,
                coupler_loss_db: variant.coupler_loss_db,
            }),
            booster_gain_cap_db: Some(variant.booster_gain_cap_db),
        },
    )?;
    let launch = report.taps[0].p_sig_dbm;
    let net_gain: Vec<f64> = report.taps[1..]
        .iter()
        .map(|t| t.p_sig_dbm - launch)
        .collect();

    let central = Transmitter::central(config, Steering::SteeredToTarget);
    let mut out = EndToEndProfile {
        x_grid_m: x_grid.to_vec(),
        direct_db: Vec::with_capacity(x_grid.len()),
        stripe_db: Vec::with_capacity(x_grid.len()),
        serving: Vec::with_capacity(x_grid.len()),
    };
    for &x in x_grid {
        let ue = ue_at(config, x);
        let direct = link_path_gain(&central, ue, &config.terminal.rx_array, config)?;
        let serving = serving_ru(config, ue)?;
        let ru_index = match serving.tx {
            TxId::Ru(i) => i,
            TxId::Central => unreachable!("distributed serving is always an RU"),
        };
        out.direct_db.push(direct.path_gain_db);
        out.stripe_db.push(net_gain[ru_index] + serving.path_gain_db);
        out.serving.push(serving.tx);
    }
    Ok(out)
}
