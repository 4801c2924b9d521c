//! Stripe power draw and energy per bit under the chain-disable constraint:
//! serving through RU k keeps RUs 0..=k powered, everything downstream off.

use crate::scenario::RuMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EnergyError {
    #[error("RU {active} is active after disabled RU {first_disabled}; disabled RUs must be a suffix")]
    NotASuffix { first_disabled: usize, active: usize },
    #[error("throughput must be > 0 bit/s, got {0}")]
    NonPositiveThroughput(f64),
}

/// Class-A power figures: boosting and transmitting draw the same.
/// Digital baseband power is excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerModel {
    pub p_ru_active_w: f64,
    pub p_cu_w: f64,
    pub throughput_bps: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_ru_active_w: 0.5,
            p_cu_w: 0.1,
            throughput_bps: 20e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub n_active_rus: usize,
    pub total_power_w: f64,
    pub energy_per_bit_j: f64,
}

/// Count of powered RUs; errors if the disabled set is not a suffix.
pub fn active_set(modes: &[RuMode]) -> Result<usize, EnergyError> {
    let first_disabled = modes.iter().position(|m| *m == RuMode::Disabled);
    match first_disabled {
        None => Ok(modes.len()),
        Some(k) => {
            if let Some(offset) = modes[k..].iter().position(|m| *m != RuMode::Disabled) {
                Err(EnergyError::NotASuffix {
                    first_disabled: k,
                    active: k + offset,
                })
            } else {
                Ok(k)
            }
        }
    }
}

pub fn report(model: &PowerModel, n_active: usize, throughput_bps: f64) -> Result<EnergyReport, EnergyError> {
    if !(throughput_bps > 0.0) {
        return Err(EnergyError::NonPositiveThroughput(throughput_bps));
    }
    let total_power_w = model.p_cu_w + n_active as f64 * model.p_ru_active_w;
    Ok(EnergyReport {
        n_active_rus: n_active,
        total_power_w,
        energy_per_bit_j: total_power_w / throughput_bps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_counts() {
        use RuMode::*;
        assert_eq!(active_set(&[Transmit; 10]).unwrap(), 10);
        let mut modes = vec![Booster, Booster, Booster, Transmit];
        modes.extend([Disabled; 6]);
        assert_eq!(active_set(&modes).unwrap(), 4);
        assert_eq!(active_set(&[Disabled; 3]).unwrap(), 0);
        assert!(active_set(&[Disabled, Transmit]).is_err());
    }

    #[test]
    fn default_figures() {
        let m = PowerModel::default();
        let r = report(&m, 10, m.throughput_bps).unwrap();
        assert_eq!(r.total_power_w, 5.1);
        assert_eq!(r.energy_per_bit_j, 5.1 / 20e9);

        let cu_only = report(&m, 0, m.throughput_bps).unwrap();
        assert_eq!(cu_only.total_power_w, 0.1);

        let one = report(&m, 1, m.throughput_bps).unwrap();
        assert_eq!(one.total_power_w, 0.6);
        assert!((one.energy_per_bit_j * 1e12 - 30.0).abs() < 1e-9);
    }

    #[test]
    fn energy_scales_inversely_with_throughput() {
        let m = PowerModel::default();
        let a = report(&m, 5, 10e9).unwrap();
        let b = report(&m, 5, 20e9).unwrap();
        assert!((a.energy_per_bit_j / b.energy_per_bit_j - 2.0).abs() < 1e-12);
        assert!(report(&m, 5, 0.0).is_err());
    }
}
