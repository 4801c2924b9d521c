//! CSV rendering for every subcommand output plus the run manifest that makes
//! outputs reproducible. All floats use fixed 6-decimal formatting so reruns
//! are byte-identical.

use crate::airlink::{EndToEndProfile, PathGainProfile};
use crate::dualband::{DualBandSample, MetricsTable};
use crate::energy::EnergyReport;
use crate::rfchain::{sndr_db, ChainReport};
use crate::scenario::ScenarioConfig;
use serde::Serialize;
use std::path::Path;

fn f(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fiber_csv(report: &ChainReport) -> String {
    let mut out = String::from("position_m,p_sig_dbm,p_noise_dbm,p_imd_dbm,snr_db,sdr_db,sndr_db\n");
    for tap in &report.taps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f(tap.position_m),
            f(tap.p_sig_dbm),
            f(tap.p_noise_dbm),
            f(tap.p_imd_dbm),
            f(tap.snr_db()),
            f(tap.sdr_db()),
            f(sndr_db(tap)),
        ));
    }
    out
}

pub fn air_csv(profile: &PathGainProfile) -> String {
    let mut out = String::from(
        "x_m,pg_distributed_db,serving_tx,pg_central_steered_db,pg_central_unsteered_db,los_blocked\n",
    );
    for i in 0..profile.x_grid_m.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f(profile.x_grid_m[i]),
            f(profile.distributed.path_gain_db[i]),
            profile.distributed.serving[i],
            f(profile.central_steered.path_gain_db[i]),
            f(profile.central_unsteered.path_gain_db[i]),
            profile.distributed.los_blocked[i],
        ));
    }
    out
}

pub fn endtoend_csv(profile: &EndToEndProfile) -> String {
    let mut out = String::from("x_m,gain_direct_db,gain_stripe_db,serving_ru\n");
    for i in 0..profile.x_grid_m.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            f(profile.x_grid_m[i]),
            f(profile.direct_db[i]),
            f(profile.stripe_db[i]),
            profile.serving[i],
        ));
    }
    out
}

/// Two-variant comparison used by the fig-4 reproduction.
pub fn endtoend_pair_csv(current: &EndToEndProfile, lowloss: &EndToEndProfile) -> String {
    let mut out =
        String::from("x_m,gain_direct_db,gain_stripe_current_db,gain_stripe_lowloss_db,serving_ru\n");
    for i in 0..current.x_grid_m.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            f(current.x_grid_m[i]),
            f(current.direct_db[i]),
            f(current.stripe_db[i]),
            f(lowloss.stripe_db[i]),
            current.serving[i],
        ));
    }
    out
}

pub fn dataset_csv(samples: &[DualBandSample]) -> String {
    let n_feat = samples.first().map_or(0, |s| s.features.len());
    let mut out = String::from("x_m,y_m");
    for i in 0..n_feat {
        out.push_str(&format!(",f{i}"));
    }
    out.push_str(",ru_label,beam_label\n");
    for s in samples {
        out.push_str(&f(s.position.x));
        out.push(',');
        out.push_str(&f(s.position.y));
        for v in &s.features {
            out.push(',');
            out.push_str(&f(*v));
        }
        out.push_str(&format!(",{},{}\n", s.label.0, s.label.1));
    }
    out
}

pub fn metrics_csv(table: &MetricsTable) -> String {
    let mut out = String::from("k,topk_rate,mean_gain_loss_db,p95_gain_loss_db,mean_slots\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            f(r.topk_rate),
            f(r.mean_gain_loss_db),
            f(r.p95_gain_loss_db),
            f(r.mean_slots),
        ));
    }
    out
}

pub fn energy_csv(report: &EnergyReport) -> String {
    format!(
        "n_active_rus,total_w,pj_per_bit\n{},{},{}\n",
        report.n_active_rus,
        f(report.total_power_w),
        f(report.energy_per_bit_j * 1e12),
    )
}

/// Everything needed to reproduce a run byte-for-byte: the resolved config
/// snapshot, the seed, and where the outputs went.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub artifact_version: String,
    pub config: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &ScenarioConfig, outputs: &[&Path]) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            seed: config.seed,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.to_toml_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Manifest path for an output file: `<output>.manifest.json`.
    pub fn sibling_path(output: &Path) -> std::path::PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rfchain::run_chain;

    #[test]
    fn fiber_csv_has_header_and_one_row_per_tap() {
        let cfg = ScenarioConfig::default();
        let report = run_chain(&cfg).unwrap();
        let csv = fiber_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "position_m,p_sig_dbm,p_noise_dbm,p_imd_dbm,snr_db,sdr_db,sndr_db");
        assert_eq!(lines.len(), 1 + report.taps.len());
    }

    #[test]
    fn rendering_is_deterministic() {
        let cfg = ScenarioConfig::default();
        let a = fiber_csv(&run_chain(&cfg).unwrap());
        let b = fiber_csv(&run_chain(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn manifest_sibling_path() {
        let p = Path::new("out/fiber.csv");
        assert_eq!(
            RunManifest::sibling_path(p),
            Path::new("out/fiber.csv.manifest.json")
        );
    }
}
