//! Dual-band beam selection: low-band uplink channel fingerprints are mapped
//! to the best sub-THz (RU, beam) pair, replacing the exhaustive
//! N_RU * N_b pilot sweep with a short learned candidate list.
//!
//! Labels always come from the blocker-free geometry; blockers, when present,
//! only affect the gains measured at exploitation time.

use crate::airlink::{link_path_gain, AirlinkError, Transmitter};
use crate::geometry::Vec3;
use crate::rfchain::ChainError;
use crate::scenario::ScenarioConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_BEAMS_PER_RU: usize = 5;
pub const DEFAULT_RING_ELEVATION_DEG: f64 = 30.0;

#[derive(Debug, thiserror::Error)]
pub enum DualbandError {
    #[error("terminal position is outside the room")]
    OutsideRoom,
    #[error("codebook must have at least one RU and one beam")]
    EmptyCodebook,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("candidate count k must be >= 1")]
    ZeroK,
    #[error("test grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Air(#[from] AirlinkError),
}

impl From<ChainError> for DualbandError {
    fn from(e: ChainError) -> Self {
        DualbandError::Air(AirlinkError::Chain(e))
    }
}

/// Per-RU beam grid: beam 0 points at nadir, the rest form one elevation
/// ring with uniform azimuths. All RUs share the same grid.
#[derive(Debug, Clone, Serialize)]
pub struct Codebook {
    /// Global RU indices of the transmit-capable RUs, in chain order.
    pub tx_indices: Vec<usize>,
    /// beam_dirs[ru_slot][beam] as global unit vectors (lower hemisphere).
    pub beam_dirs: Vec<Vec<Vec3>>,
}

impl Codebook {
    pub fn uniform(tx_indices: Vec<usize>, n_beams: usize, ring_elevation_deg: f64) -> Self {
        let mut beams = Vec::with_capacity(n_beams);
        if n_beams > 0 {
            beams.push(Vec3::new(0.0, 0.0, -1.0));
            let (sin_e, cos_e) = ring_elevation_deg.to_radians().sin_cos();
            for k in 0..n_beams.saturating_sub(1) {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / (n_beams - 1) as f64;
                beams.push(Vec3::new(sin_e * phi.cos(), sin_e * phi.sin(), -cos_e));
            }
        }
        let beam_dirs = vec![beams; tx_indices.len()];
        Self { tx_indices, beam_dirs }
    }

    /// Default codebook over a scenario's transmit-capable RUs.
    pub fn from_config(config: &ScenarioConfig, n_beams: usize) -> Self {
        Self::uniform(
            config.transmit_capable_indices(),
            n_beams,
            DEFAULT_RING_ELEVATION_DEG,
        )
    }

    pub fn n_ru(&self) -> usize {
        self.tx_indices.len()
    }

    pub fn n_beams(&self) -> usize {
        self.beam_dirs.first().map_or(0, Vec::len)
    }

    pub fn n_pairs(&self) -> usize {
        self.n_ru() * self.n_beams()
    }
}

/// Low-band uplink channel snapshot at one terminal position: one complex
/// coefficient per AP antenna. The position tags the sample for bookkeeping
/// and is never fed to the model.
#[derive(Debug, Clone, PartialEq)]
pub struct LowbandChannel {
    pub h: Vec<Complex64>,
    pub ue_position: Vec3,
}

/// Image-method channel at the low band: LOS plus one reflection off each of
/// the four walls, amplitude reflectivity * 1/d, phase exp(-j*2*pi*d/lambda).
pub fn lowband_channel(config: &ScenarioConfig, ue_position: Vec3) -> Result<LowbandChannel, DualbandError> {
    if !config.room.contains(ue_position) {
        return Err(DualbandError::OutsideRoom);
    }
    let ap = &config.lowband_ap;
    let lambda = SPEED_OF_LIGHT_LOCAL / config.lowband_hz;
    let m = ap.n_antennas;
    let centred = |i: usize| (i as f64 - (m as f64 - 1.0) / 2.0) * lambda / 2.0;

    // ray images: (amplitude factor, source position)
    let refl = config.room.wall_reflectivity;
    let mut rays = vec![(1.0, ue_position)];
    if refl > 0.0 {
        for (axis, wall) in [
            (0usize, 0.0),
            (0, config.room.length_m),
            (1, 0.0),
            (1, config.room.width_m),
        ] {
            let mut img = ue_position;
            match axis {
                0 => img.x = 2.0 * wall - img.x,
                _ => img.y = 2.0 * wall - img.y,
            }
            rays.push((refl, img));
        }
    }

    let h = (0..m)
        .map(|i| {
            let ant = ap.position + ap.axis * centred(i);
            rays.iter()
                .map(|&(g, src)| {
                    let d = ant.distance(src);
                    Complex64::from_polar(g / d, -2.0 * std::f64::consts::PI * d / lambda)
                })
                .sum()
        })
        .collect();
    Ok(LowbandChannel { h, ue_position })
}

const SPEED_OF_LIGHT_LOCAL: f64 = crate::airlink::SPEED_OF_LIGHT;

fn noise_seed(seed: u64, p: Vec3) -> u64 {
    let mut s = seed ^ 0x5851_F42D_4C95_7F2D;
    for bits in [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()] {
        s = (s ^ bits).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        s ^= s >> 29;
    }
    s
}

/// Unit-normalized [Re(h); Im(h)] feature vector, with optional seeded CSI
/// noise at the configured SNR. The same (config, position) always yields
/// the same vector.
pub fn sample_features(config: &ScenarioConfig, channel: &LowbandChannel) -> Vec<f64> {
    let m = channel.h.len();
    let mut h = channel.h.clone();
    if let Some(snr_db) = config.lowband_ap.csi_noise_snr_db {
        let mean_pow = h.iter().map(|c| c.norm_sqr()).sum::<f64>() / m as f64;
        let sigma = (mean_pow * 10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed(config.seed, channel.ue_position));
        for c in h.iter_mut() {
            // Box-Muller pair
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, co) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            *c += Complex64::new(sigma * r * co, sigma * r * s);
        }
    }
    let mut f: Vec<f64> = h.iter().map(|c| c.re).chain(h.iter().map(|c| c.im)).collect();
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut f {
            *v /= norm;
        }
    }
    f
}

#[derive(Debug, Clone, Serialize)]
pub struct DualBandSample {
    pub position: Vec3,
    pub features: Vec<f64>,
    /// (ru_slot, beam) into the codebook.
    pub label: (usize, usize),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepOutcome {
    pub best: (usize, usize),
    pub best_path_gain_db: f64,
    pub slots_used: usize,
}

/// Exhaustive downlink pilot sweep: one slot per (RU, beam) pair, argmax of
/// measured path gain, lexicographic tie-break.
pub fn oracle_sweep(
    config: &ScenarioConfig,
    codebook: &Codebook,
    ue_position: Vec3,
) -> Result<SweepOutcome, DualbandError> {
    if codebook.n_pairs() == 0 {
        return Err(DualbandError::EmptyCodebook);
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for (slot, &ru_index) in codebook.tx_indices.iter().enumerate() {
        for (b, &dir) in codebook.beam_dirs[slot].iter().enumerate() {
            let tx = Transmitter::ru(config, ru_index).with_beam(dir);
            let sample = link_path_gain(&tx, ue_position, &config.terminal.rx_array, config)?;
            let better = match best {
                None => true,
                Some((_, g)) => sample.path_gain_db > g,
            };
            if better {
                best = Some(((slot, b), sample.path_gain_db));
            }
        }
    }
    let (best, gain) = best.expect("codebook is non-empty");
    Ok(SweepOutcome {
        best,
        best_path_gain_db: gain,
        slots_used: codebook.n_pairs(),
    })
}

/// Cell-centred grid over the floor at terminal height:
/// floor(extent/spacing) points per axis.
pub fn floor_grid(config: &ScenarioConfig, spacing_m: f64) -> Vec<Vec3> {
    let nx = (config.room.length_m / spacing_m + 1e-9).floor() as usize;
    let ny = (config.room.width_m / spacing_m + 1e-9).floor() as usize;
    let z = config.terminal.position.z;
    let mut pts = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            pts.push(Vec3::new(
                (i as f64 + 0.5) * spacing_m,
                (j as f64 + 0.5) * spacing_m,
                z,
            ));
        }
    }
    pts
}

/// The same grid shifted by half a cell diagonally, clipped to the room.
pub fn midpoint_grid(config: &ScenarioConfig, spacing_m: f64) -> Vec<Vec3> {
    floor_grid(config, spacing_m)
        .into_iter()
        .map(|p| Vec3::new(p.x + spacing_m / 2.0, p.y + spacing_m / 2.0, p.z))
        .filter(|p| config.room.contains(*p))
        .collect()
}

/// Labelled samples over a point set. Labels use the blocker-free oracle.
pub fn build_dataset_at(
    config: &ScenarioConfig,
    codebook: &Codebook,
    points: &[Vec3],
) -> Result<Vec<DualBandSample>, DualbandError> {
    let clear = ScenarioConfig {
        blockers: Vec::new(),
        ..config.clone()
    };
    points
        .par_iter()
        .map(|&p| {
            let channel = lowband_channel(&clear, p)?;
            let sweep = oracle_sweep(&clear, codebook, p)?;
            Ok(DualBandSample {
                position: p,
                features: sample_features(&clear, &channel),
                label: sweep.best,
            })
        })
        .collect()
}

/// Regular-grid dataset over the coverage floor.
pub fn build_dataset(
    config: &ScenarioConfig,
    codebook: &Codebook,
    grid_spacing_m: f64,
) -> Result<Vec<DualBandSample>, DualbandError> {
    build_dataset_at(config, codebook, &floor_grid(config, grid_spacing_m))
}

/// Predictor interface: ordered distinct candidate list of (ru_slot, beam).
pub trait MappingModel: Send + Sync {
    fn predict_topk(&self, features: &[f64], k: usize) -> Vec<(usize, usize)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NearestNeighbor,
}

/// Nearest-neighbor over stored samples, Euclidean on feature vectors.
/// Distance ties break on sample index; the candidate list is padded with
/// unseen codebook pairs in lexicographic order once the training labels are
/// exhausted, so an exhaustive k always covers the whole codebook.
pub struct NearestNeighborModel {
    samples: Vec<DualBandSample>,
    n_ru: usize,
    n_beams: usize,
}

pub fn train(
    kind: ModelKind,
    codebook: &Codebook,
    dataset: Vec<DualBandSample>,
) -> Result<NearestNeighborModel, DualbandError> {
    if dataset.is_empty() {
        return Err(DualbandError::EmptyDataset);
    }
    match kind {
        ModelKind::NearestNeighbor => Ok(NearestNeighborModel {
            samples: dataset,
            n_ru: codebook.n_ru(),
            n_beams: codebook.n_beams(),
        }),
    }
}

impl NearestNeighborModel {
    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }
}

impl MappingModel for NearestNeighborModel {
    fn predict_topk(&self, features: &[f64], k: usize) -> Vec<(usize, usize)> {
        let k = k.min(self.n_ru * self.n_beams);
        let mut order: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d2: f64 = s
                    .features
                    .iter()
                    .zip(features)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, i)
            })
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

        let mut out: Vec<(usize, usize)> = Vec::with_capacity(k);
        for (_, i) in order {
            let label = self.samples[i].label;
            if !out.contains(&label) {
                out.push(label);
                if out.len() == k {
                    return out;
                }
            }
        }
        for ru in 0..self.n_ru {
            for b in 0..self.n_beams {
                if out.len() == k {
                    return out;
                }
                if !out.contains(&(ru, b)) {
                    out.push((ru, b));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelectionOutcome {
    pub slots_used: usize,
    pub chosen: (usize, usize),
    pub oracle: (usize, usize),
    pub gain_loss_db: f64,
}

fn measure_pair(
    config: &ScenarioConfig,
    codebook: &Codebook,
    ue: Vec3,
    pair: (usize, usize),
) -> Result<f64, DualbandError> {
    let (slot, b) = pair;
    let tx = Transmitter::ru(config, codebook.tx_indices[slot]).with_beam(codebook.beam_dirs[slot][b]);
    Ok(link_path_gain(&tx, ue, &config.terminal.rx_array, config)?.path_gain_db)
}

/// Exploitation phase: predict k candidates from the low-band channel, spend
/// k slots measuring them, pick the measured best. k = 1 uses the top
/// prediction directly. Regret is against the exhaustive sweep under the
/// same (possibly blocked) conditions.
pub fn exploit(
    model: &dyn MappingModel,
    config: &ScenarioConfig,
    codebook: &Codebook,
    ue: Vec3,
    k: usize,
) -> Result<SelectionOutcome, DualbandError> {
    if k == 0 {
        return Err(DualbandError::ZeroK);
    }
    let channel = lowband_channel(config, ue)?;
    let candidates = model.predict_topk(&sample_features(config, &channel), k);
    let mut chosen = None;
    for &pair in &candidates {
        let gain = measure_pair(config, codebook, ue, pair)?;
        chosen = match chosen {
            None => Some((pair, gain)),
            Some((_, g)) if gain > g => Some((pair, gain)),
            keep => keep,
        };
    }
    let (chosen, achieved) = chosen.expect("k >= 1 yields a candidate");
    let oracle = oracle_sweep(config, codebook, ue)?;
    Ok(SelectionOutcome {
        slots_used: candidates.len(),
        chosen,
        oracle: oracle.best,
        gain_loss_db: oracle.best_path_gain_db - achieved,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricsRow {
    pub k: usize,
    pub topk_rate: f64,
    pub mean_gain_loss_db: f64,
    pub p95_gain_loss_db: f64,
    pub mean_slots: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

fn p95_nearest_rank(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Per-k oracle-containment rate and regret statistics over a test grid.
pub fn evaluate(
    model: &dyn MappingModel,
    config: &ScenarioConfig,
    codebook: &Codebook,
    test_points: &[Vec3],
    k_list: &[usize],
) -> Result<MetricsTable, DualbandError> {
    if test_points.is_empty() {
        return Err(DualbandError::EmptyGrid);
    }
    if k_list.iter().any(|&k| k == 0) {
        return Err(DualbandError::ZeroK);
    }
    let k_max = k_list.iter().copied().max().unwrap().min(codebook.n_pairs());

    struct PointEval {
        oracle_rank: Option<usize>,
        /// prefix_best[i] = best measured gain among the first i+1 candidates
        prefix_best: Vec<f64>,
        oracle_gain: f64,
    }

    let evals: Vec<PointEval> = test_points
        .par_iter()
        .map(|&p| {
            let channel = lowband_channel(config, p)?;
            let candidates = model.predict_topk(&sample_features(config, &channel), k_max);
            let oracle = oracle_sweep(config, codebook, p)?;
            let mut prefix_best = Vec::with_capacity(candidates.len());
            let mut best = f64::NEG_INFINITY;
            for &pair in &candidates {
                best = best.max(measure_pair(config, codebook, p, pair)?);
                prefix_best.push(best);
            }
            Ok(PointEval {
                oracle_rank: candidates.iter().position(|&c| c == oracle.best),
                prefix_best,
                oracle_gain: oracle.best_path_gain_db,
            })
        })
        .collect::<Result<_, DualbandError>>()?;

    let n = evals.len() as f64;
    let rows = k_list
        .iter()
        .map(|&k| {
            let kc = k.min(codebook.n_pairs());
            let hits = evals
                .iter()
                .filter(|e| e.oracle_rank.map_or(false, |r| r < kc))
                .count();
            let mut losses: Vec<f64> = evals
                .iter()
                .map(|e| e.oracle_gain - e.prefix_best[kc - 1])
                .collect();
            losses.sort_by(|a, b| a.partial_cmp(b).expect("finite losses"));
            MetricsRow {
                k,
                topk_rate: hits as f64 / n,
                mean_gain_loss_db: losses.iter().sum::<f64>() / n,
                p95_gain_loss_db: p95_nearest_rank(&losses),
                mean_slots: kc as f64,
            }
        })
        .collect();
    Ok(MetricsTable { rows })
}
