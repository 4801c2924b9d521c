//! Signal, noise, and third-order intermodulation budgets along the
//! CU -> coupler -> fiber -> RU daisy chain.
//!
//! Everything is integrated power over the configured bandwidth. Noise
//! accumulates as kTB(F-1)G per stage; IMD from distinct stages adds in
//! power (uncorrelated distortion), with each amplifier contributing
//! `3*p_out - 2*oip3` dBm at its output.

use crate::dbmath::{db_to_linear, linear_to_db};
use crate::scenario::{RuMode, ScenarioConfig};
use serde::{Deserialize, Serialize};

/// RU amplifier gain ceiling; higher gain risks self-oscillation through
/// output-to-input coupling at the fiber transitions.
pub const RU_GAIN_CAP_DB: f64 = 30.0;

#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error("bandwidth must be > 0 Hz, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("amplifier gain must lie in (0, {RU_GAIN_CAP_DB}) dB, got {0}")]
    GainOutOfRange(f64),
    #[error("launch power grid is empty")]
    EmptyGrid,
}

/// Central unit: creates and upconverts the signal, then launches it into
/// the fiber at `peak - backoff - margin` dBm.
///
/// `noise_figure_db` is the full transmit-chain noise referred to the thermal
/// floor, and `phase_noise_floor_dbc` is the untrackable white phase-noise
/// floor, folded into the distortion budget as a signal-tracking floor
/// (set to -inf to disable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CentralUnitSpec {
    pub peak_power_dbm: f64,
    pub backoff_db: f64,
    /// Implementation margin between backed-off peak power and what actually
    /// reaches the fiber.
    pub margin_db: f64,
    pub phase_noise_floor_dbc: f64,
    pub noise_figure_db: f64,
}

impl Default for CentralUnitSpec {
    fn default() -> Self {
        Self {
            peak_power_dbm: 10.0,
            backoff_db: 6.0,
            margin_db: 9.0,
            phase_noise_floor_dbc: -55.0,
            noise_figure_db: 25.0,
        }
    }
}

impl CentralUnitSpec {
    pub fn launch_power_dbm(&self) -> f64 {
        self.peak_power_dbm - self.backoff_db - self.margin_db
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.backoff_db < 0.0 {
            return Err("backoff_db must be >= 0".into());
        }
        if self.margin_db < 0.0 {
            return Err("margin_db must be >= 0".into());
        }
        if self.noise_figure_db < 0.0 {
            return Err("noise_figure_db must be >= 0".into());
        }
        Ok(())
    }
}

/// Plastic-fiber segment parameters shared by every hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiberSpec {
    pub atten_db_per_m: f64,
    /// Insertion loss of one chip-to-fiber transition; each hop has two.
    pub coupler_loss_db: f64,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self {
            atten_db_per_m: 3.0,
            coupler_loss_db: 3.0,
        }
    }
}

impl FiberSpec {
    pub fn hop_loss_db(&self, spacing_m: f64) -> f64 {
        self.atten_db_per_m * spacing_m + 2.0 * self.coupler_loss_db
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.atten_db_per_m < 0.0 || self.coupler_loss_db < 0.0 {
            return Err("fiber losses must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Loss,
    Amplifier,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSpec {
    pub kind: StageKind,
    pub gain_db: f64,
    pub noise_figure_db: f64,
    /// Output-referred third-order intercept; only meaningful for amplifiers.
    pub oip3_dbm: f64,
}

impl StageSpec {
    /// Matched attenuator: NF equals the loss.
    pub fn loss(loss_db: f64) -> Self {
        Self {
            kind: StageKind::Loss,
            gain_db: -loss_db.abs(),
            noise_figure_db: loss_db.abs(),
            oip3_dbm: f64::INFINITY,
        }
    }

    pub fn amplifier(gain_db: f64, noise_figure_db: f64, oip3_dbm: f64) -> Result<Self, ChainError> {
        if !(gain_db > 0.0 && gain_db < RU_GAIN_CAP_DB) {
            return Err(ChainError::GainOutOfRange(gain_db));
        }
        Ok(Self {
            kind: StageKind::Amplifier,
            gain_db,
            noise_figure_db,
            oip3_dbm,
        })
    }
}

/// Signal/noise/IMD power triple at one point along the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalState {
    pub p_sig_dbm: f64,
    pub p_noise_dbm: f64,
    pub p_imd_dbm: f64,
    pub position_m: f64,
}

impl SignalState {
    pub fn snr_db(&self) -> f64 {
        self.p_sig_dbm - self.p_noise_dbm
    }

    pub fn sdr_db(&self) -> f64 {
        self.p_sig_dbm - self.p_imd_dbm
    }
}

/// Combined signal-to-noise-and-distortion: 1/sndr = 1/snr + 1/sdr in linear
/// power terms.
pub fn sndr_db(state: &SignalState) -> f64 {
    let s = db_to_linear(state.p_sig_dbm);
    let n = db_to_linear(state.p_noise_dbm);
    let imd = db_to_linear(state.p_imd_dbm);
    linear_to_db(s / (n + imd))
}

/// Integrated thermal noise floor kTB at 290 K: -174 dBm/Hz.
pub fn thermal_noise_floor_dbm(bandwidth_hz: f64) -> Result<f64, ChainError> {
    if !(bandwidth_hz > 0.0) {
        return Err(ChainError::NonPositiveBandwidth(bandwidth_hz));
    }
    Ok(-174.0 + 10.0 * bandwidth_hz.log10())
}

/// Push a signal state through one stage.
///
/// Noise: n_out = n_in*G + kTB*(F-1)*G. IMD: scales with G; an amplifier
/// power-sums a new component at `3*p_out - 2*oip3` dBm. Loss stages are
/// distortion-free.
pub fn apply_stage(state: SignalState, stage: &StageSpec, bandwidth_hz: f64) -> SignalState {
    let g = db_to_linear(stage.gain_db);
    let f = db_to_linear(stage.noise_figure_db);
    let ktb = db_to_linear(-174.0 + 10.0 * bandwidth_hz.log10());

    let p_sig_dbm = state.p_sig_dbm + stage.gain_db;
    let n_out = db_to_linear(state.p_noise_dbm) * g + ktb * (f - 1.0) * g;
    let mut imd_out = db_to_linear(state.p_imd_dbm) * g;
    if stage.kind == StageKind::Amplifier {
        imd_out += db_to_linear(3.0 * p_sig_dbm - 2.0 * stage.oip3_dbm);
    }
    SignalState {
        p_sig_dbm,
        p_noise_dbm: linear_to_db(n_out),
        p_imd_dbm: linear_to_db(imd_out),
        position_m: state.position_m,
    }
}

/// Per-tap report of the full chain; `crossover_m` is the first RU tap where
/// S/IMD drops below S/N (the noise-limited to distortion-limited handoff).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub taps: Vec<SignalState>,
    pub crossover_m: Option<f64>,
}

impl ChainReport {
    pub fn end_tap(&self) -> &SignalState {
        self.taps.last().expect("chain has at least the CU tap")
    }

    pub fn end_sndr_db(&self) -> f64 {
        sndr_db(self.end_tap())
    }
}

/// Overrides for what-if chains (launch sweeps, fiber variants).
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainOptions {
    pub launch_dbm: Option<f64>,
    pub fiber: Option<FiberSpec>,
    /// Cap applied to every RU amplifier: effective gain is
    /// min(hop loss, cap), so boosters compensate a hop but never overdrive.
    pub booster_gain_cap_db: Option<f64>,
}

/// Run the default chain for a scenario.
pub fn run_chain(config: &ScenarioConfig) -> Result<ChainReport, ChainError> {
    run_chain_with(config, &ChainOptions::default())
}

/// Run the chain with optional launch/fiber/booster overrides.
pub fn run_chain_with(config: &ScenarioConfig, opts: &ChainOptions) -> Result<ChainReport, ChainError> {
    let bw = config.bandwidth_hz;
    if !(bw > 0.0) {
        return Err(ChainError::NonPositiveBandwidth(bw));
    }
    let fiber = opts.fiber.unwrap_or(config.fiber);
    let spacing = config.stripe.ru_spacing_m;
    let launch = opts.launch_dbm.unwrap_or_else(|| config.cu.launch_power_dbm());

    let cu_tap = SignalState {
        p_sig_dbm: launch,
        p_noise_dbm: thermal_noise_floor_dbm(bw)? + config.cu.noise_figure_db,
        p_imd_dbm: launch + config.cu.phase_noise_floor_dbc,
        position_m: 0.0,
    };

    let mut taps = vec![cu_tap];
    let mut state = cu_tap;
    for ru in config.radio_units() {
        if ru.mode == RuMode::Disabled {
            break;
        }
        // out coupler, fiber run, in coupler
        state = apply_stage(state, &StageSpec::loss(fiber.coupler_loss_db), bw);
        state = apply_stage(state, &StageSpec::loss(fiber.atten_db_per_m * spacing), bw);
        state = apply_stage(state, &StageSpec::loss(fiber.coupler_loss_db), bw);
        let gain = match opts.booster_gain_cap_db {
            Some(cap) => fiber.hop_loss_db(spacing).min(cap),
            None => ru.booster_gain_db,
        };
        if gain > 0.0 {
            let amp = StageSpec::amplifier(gain, ru.noise_figure_db, ru.oip3_dbm)?;
            state = apply_stage(state, &amp, bw);
        }
        state.position_m = (ru.index + 1) as f64 * spacing;
        taps.push(state);
    }

    let crossover_m = taps
        .iter()
        .filter(|t| t.position_m > 0.0)
        .find(|t| t.sdr_db() < t.snr_db())
        .map(|t| t.position_m);

    Ok(ChainReport { taps, crossover_m })
}

/// Pick the grid point that maximizes end-of-stripe SNDR; ties go to the
/// lower power.
pub fn sweep_launch_power(config: &ScenarioConfig, grid: &[f64]) -> Result<f64, ChainError> {
    if grid.is_empty() {
        return Err(ChainError::EmptyGrid);
    }
    let mut best: Option<(f64, f64)> = None;
    for &p in grid {
        let report = run_chain_with(
            config,
            &ChainOptions {
                launch_dbm: Some(p),
                ..ChainOptions::default()
            },
        )?;
        let sndr = report.end_sndr_db();
        best = match best {
            None => Some((p, sndr)),
            Some((bp, bs)) => {
                if sndr > bs || (sndr == bs && p < bp) {
                    Some((p, sndr))
                } else {
                    Some((bp, bs))
                }
            }
        };
    }
    Ok(best.expect("grid is non-empty").0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(sig: f64, noise: f64, imd: f64) -> SignalState {
        SignalState {
            p_sig_dbm: sig,
            p_noise_dbm: noise,
            p_imd_dbm: imd,
            position_m: 0.0,
        }
    }

    #[test]
    fn thermal_floor_values() {
        assert!((thermal_noise_floor_dbm(1.0).unwrap() - (-174.0)).abs() < 1e-12);
        assert!((thermal_noise_floor_dbm(20e9).unwrap() - (-71.0)).abs() < 0.05);
        assert!(thermal_noise_floor_dbm(0.0).is_err());
    }

    #[test]
    fn unity_stage_is_identity() {
        let s = state(-10.0, -80.0, -90.0);
        let out = apply_stage(s, &StageSpec::loss(0.0), 20e9);
        assert!((out.p_sig_dbm - s.p_sig_dbm).abs() < 1e-12);
        assert!((out.p_noise_dbm - s.p_noise_dbm).abs() < 1e-9);
        assert!((out.p_imd_dbm - s.p_imd_dbm).abs() < 1e-12);
    }

    #[test]
    fn amplifier_imd_two_tone_formula() {
        // -30 dBm in, gain 10, OIP3 20 -> new IMD at 3*(-20) - 2*20 = -100 dBm
        let s = state(-30.0, -120.0, f64::NEG_INFINITY);
        let out = apply_stage(s, &StageSpec::amplifier(10.0, 5.0, 20.0).unwrap(), 20e9);
        assert!((out.p_imd_dbm - (-100.0)).abs() < 1e-9);
    }

    #[test]
    fn two_unity_net_gain_stages_add_3dB_imd() {
        let bw = 20e9;
        let amp = StageSpec::amplifier(10.0, 6.0, 20.0).unwrap();
        let back = StageSpec::loss(10.0);
        let start = state(-20.0, -60.0, f64::NEG_INFINITY);

        let one = apply_stage(apply_stage(start, &amp, bw), &back, bw);
        let two = apply_stage(apply_stage(one, &amp, bw), &back, bw);
        assert!((two.p_imd_dbm - one.p_imd_dbm - 10.0 * 2.0_f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn loss_keeps_floor_noise_at_floor() {
        let bw = 20e9;
        let floor = thermal_noise_floor_dbm(bw).unwrap();
        let s = state(-10.0, floor, f64::NEG_INFINITY);
        let out = apply_stage(s, &StageSpec::loss(7.0), bw);
        assert!((out.p_noise_dbm - floor).abs() < 1e-9);
    }

    #[test]
    fn sndr_composition() {
        let s = state(0.0, -30.0, -30.0);
        assert!((sndr_db(&s) - 26.99).abs() < 0.01);
        let s = state(0.0, -40.0, -20.0);
        assert!((sndr_db(&s) - 19.96).abs() < 0.01);
        let s = state(0.0, -30.0, f64::NEG_INFINITY);
        assert!((sndr_db(&s) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn default_chain_has_flat_signal_and_expected_shape() {
        let cfg = ScenarioConfig::default();
        let report = run_chain(&cfg).unwrap();
        assert_eq!(report.taps.len(), 11);
        let launch = cfg.cu.launch_power_dbm();
        assert!((launch - (-5.0)).abs() < 1e-12);
        for tap in &report.taps {
            assert!((tap.p_sig_dbm - launch).abs() < 1e-9, "unity net hop gain");
        }
        let xo = report.crossover_m.expect("crossover exists");
        assert!((7.5..=10.5).contains(&xo), "crossover at {xo} m");
        assert!(report.end_sndr_db() >= 30.0);
    }

    #[test]
    fn chain_stops_at_first_disabled_ru() {
        let mut cfg = ScenarioConfig::default();
        cfg.ru_overrides = (4..10)
            .map(|index| crate::scenario::RuOverride {
                index,
                mode: RuMode::Disabled,
            })
            .collect();
        cfg.validate().unwrap();
        let report = run_chain(&cfg).unwrap();
        assert_eq!(report.taps.len(), 5); // CU + RUs 0..=3
        assert!((report.end_tap().position_m - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_prefers_interior_optimum_and_low_tie() {
        let cfg = ScenarioConfig::default();
        // single point
        assert_eq!(sweep_launch_power(&cfg, &[-3.0]).unwrap(), -3.0);
        // grid straddling the optimum: fine-grid oracle agrees
        let grid: Vec<f64> = (-160..=40).map(|i| i as f64 * 0.1).collect();
        let best = sweep_launch_power(&cfg, &grid).unwrap();
        assert!(best > grid[0] && best < *grid.last().unwrap(), "interior max");
        // noise-limited regime: monotone, so the highest grid power wins
        let low = sweep_launch_power(&cfg, &[-40.0, -35.0, -30.0]).unwrap();
        assert_eq!(low, -30.0);
        assert!(matches!(
            sweep_launch_power(&cfg, &[]),
            Err(ChainError::EmptyGrid)
        ));
    }

    #[test]
    fn amplifier_gain_cap_enforced() {
        assert!(StageSpec::amplifier(30.0, 5.0, 20.0).is_err());
        assert!(StageSpec::amplifier(0.0, 5.0, 20.0).is_err());
        assert!(StageSpec::amplifier(29.9, 5.0, 20.0).is_ok());
    }
}
