//! Command-line front-end: every subcommand resolves one scenario (file or
//! built-in defaults, seed overridable by flag), computes, writes CSV plus a
//! sibling `.manifest.json`, and prints a short summary.

use crate::airlink::{end_to_end_gain_profile, serve_and_profile, FiberVariant};
use crate::dualband::{
    build_dataset, evaluate, floor_grid, midpoint_grid, train, Codebook, ModelKind,
    DEFAULT_BEAMS_PER_RU,
};
use crate::energy::{active_set, report as energy_report, PowerModel};
use crate::report::{
    air_csv, dataset_csv, endtoend_csv, endtoend_pair_csv, energy_csv, fiber_csv, metrics_csv,
    RunManifest,
};
use crate::rfchain::{run_chain, run_chain_with, ChainOptions};
use crate::scenario::{load_scenario, RuMode, ScenarioConfig};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "stripe-sim",
    version,
    about = "Link-budget simulator for daisy-chained RF-over-fiber radio stripes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML). Omit for the built-in default scenario.
    #[arg(long, value_name = "PATH", global = false)]
    pub config: Option<PathBuf>,
    /// Override the seed from the scenario file.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_scenario(path).with_context(|| format!("loading {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-tap signal/noise/IMD budget along the fiber chain.
    Fiber {
        #[command(flatten)]
        common: Common,
        /// Override the launch power computed from the CU spec.
        #[arg(long, value_name = "DBM")]
        launch_dbm: Option<f64>,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Over-the-air path-gain profile: distributed stripe vs central AP.
    Air {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05, value_name = "M")]
        grid_step: f64,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// End-to-end (fiber + air) gain vs the direct central link.
    Endtoend {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3.0, value_name = "DB_PER_M")]
        fiber_atten: f64,
        #[arg(long, default_value_t = 3.0, value_name = "DB")]
        coupler_loss: f64,
        /// Booster gain cap; per hop the booster provides min(hop loss, cap).
        #[arg(long, default_value_t = 30.0, value_name = "DB")]
        booster_cap: f64,
        #[arg(long, default_value_t = 0.05, value_name = "M")]
        grid_step: f64,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Dual-band (low-band fingerprint -> best RU/beam) workflows.
    Dualband {
        #[command(subcommand)]
        command: DualbandCommand,
    },
    /// Stripe power draw and energy per bit.
    Energy {
        #[command(flatten)]
        common: Common,
        /// Serve through RU k: RUs 0..=k stay powered, the rest are disabled.
        #[arg(long, value_name = "INDEX")]
        serving_ru: Option<usize>,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Emit the fiber-budget and air-profile CSVs for the calibrated default
    /// scenario (both panels of the signal-degradation figure).
    ReproduceFig3 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Emit the end-to-end comparison CSV: direct link vs current-technology
    /// fiber (3 dB/m, 3 dB couplers) vs low-loss fiber (1 dB/m, 0.5 dB).
    ReproduceFig4 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum DualbandCommand {
    /// Build and save the labelled training dataset.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25, value_name = "M")]
        grid_step: f64,
        #[arg(long, default_value_t = DEFAULT_BEAMS_PER_RU, value_name = "N")]
        beams: usize,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Train on the grid, evaluate on the midpoint-offset grid.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25, value_name = "M")]
        grid_step: f64,
        #[arg(long, default_value_t = DEFAULT_BEAMS_PER_RU, value_name = "N")]
        beams: usize,
        /// Candidate-list sizes, comma separated.
        #[arg(long, default_value = "1,3,5", value_name = "K,K,...")]
        k: String,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
}

fn write_output(path: &Path, content: &str, manifest: &RunManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    let mpath = RunManifest::sibling_path(path);
    std::fs::write(&mpath, manifest.to_json())
        .with_context(|| format!("writing {}", mpath.display()))?;
    Ok(())
}

/// Terminal sweep along the stripe: 0..=length at `step`.
fn x_grid(config: &ScenarioConfig, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!("grid step must be > 0, got {step}");
    }
    let n = (config.stripe.length_m / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

fn parse_k_list(text: &str) -> Result<Vec<usize>> {
    let ks: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad k value '{t}'")))
        .collect::<Result<_>>()?;
    if ks.is_empty() || ks.iter().any(|&k| k == 0) {
        bail!("k list must contain positive integers");
    }
    Ok(ks)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fiber { common, launch_dbm, out } => {
            let cfg = common.resolve()?;
            let report = run_chain_with(
                &cfg,
                &ChainOptions {
                    launch_dbm,
                    ..ChainOptions::default()
                },
            )?;
            let manifest = RunManifest::new("fiber", &cfg, &[&out]);
            write_output(&out, &fiber_csv(&report), &manifest)?;
            match report.crossover_m {
                Some(x) => println!(
                    "fiber: {} taps, noise->distortion crossover at {x:.1} m, end SNDR {:.2} dB",
                    report.taps.len(),
                    report.end_sndr_db()
                ),
                None => println!(
                    "fiber: {} taps, noise-limited throughout, end SNDR {:.2} dB",
                    report.taps.len(),
                    report.end_sndr_db()
                ),
            }
        }
        Command::Air { common, grid_step, out } => {
            let cfg = common.resolve()?;
            let grid = x_grid(&cfg, grid_step)?;
            let profile = serve_and_profile(&cfg, &grid)?;
            let manifest = RunManifest::new("air", &cfg, &[&out]);
            write_output(&out, &air_csv(&profile), &manifest)?;
            let (min, max) = min_max(&profile.distributed.path_gain_db);
            println!(
                "air: {} positions, distributed path gain in [{min:.2}, {max:.2}] dB",
                grid.len()
            );
        }
        Command::Endtoend {
            common,
            fiber_atten,
            coupler_loss,
            booster_cap,
            grid_step,
            out,
        } => {
            let cfg = common.resolve()?;
            let grid = x_grid(&cfg, grid_step)?;
            let profile = end_to_end_gain_profile(
                &cfg,
                &grid,
                &FiberVariant {
                    atten_db_per_m: fiber_atten,
                    coupler_loss_db: coupler_loss,
                    booster_gain_cap_db: booster_cap,
                },
            )?;
            let manifest = RunManifest::new("endtoend", &cfg, &[&out]);
            write_output(&out, &endtoend_csv(&profile), &manifest)?;
            let wins = profile
                .stripe_db
                .iter()
                .zip(&profile.direct_db)
                .filter(|(s, d)| s > d)
                .count();
            println!(
                "endtoend: stripe beats direct at {wins}/{} positions ({fiber_atten} dB/m, {coupler_loss} dB couplers)",
                grid.len()
            );
        }
        Command::Dualband { command } => run_dualband(command)?,
        Command::Energy { common, serving_ru, out } => {
            let cfg = common.resolve()?;
            let rus = cfg.radio_units();
            let n_active = match serving_ru {
                Some(k) => {
                    if k >= rus.len() {
                        bail!("serving RU {k} out of range: stripe has {} RUs", rus.len());
                    }
                    k + 1
                }
                None => active_set(&rus.iter().map(|r| r.mode).collect::<Vec<RuMode>>())?,
            };
            let model = PowerModel::default();
            let rep = energy_report(&model, n_active, model.throughput_bps)?;
            let manifest = RunManifest::new("energy", &cfg, &[&out]);
            write_output(&out, &energy_csv(&rep), &manifest)?;
            println!(
                "energy: {} active RUs, {:.2} W total, {:.1} pJ/bit",
                rep.n_active_rus,
                rep.total_power_w,
                rep.energy_per_bit_j * 1e12
            );
        }
        Command::ReproduceFig3 { common, out_dir } => {
            let cfg = common.resolve()?;
            let fiber_out = out_dir.join("fig3_fiber.csv");
            let air_out = out_dir.join("fig3_air.csv");

            let chain = run_chain(&cfg)?;
            let grid = x_grid(&cfg, 0.05)?;
            let profile = serve_and_profile(&cfg, &grid)?;

            let manifest = RunManifest::new("reproduce-fig3", &cfg, &[&fiber_out, &air_out]);
            write_output(&fiber_out, &fiber_csv(&chain), &manifest)?;
            write_output(&air_out, &air_csv(&profile), &manifest)?;

            let (dmin, dmax) = min_max(&profile.distributed.path_gain_db);
            let (umin, umax) = min_max(&profile.central_unsteered.path_gain_db);
            println!(
                "fig3 fiber: crossover {} m, end SNDR {:.2} dB",
                chain
                    .crossover_m
                    .map_or("none".to_string(), |x| format!("{x:.1}")),
                chain.end_sndr_db()
            );
            println!(
                "fig3 air: distributed swing {:.2} dB, central-unsteered swing {:.2} dB",
                dmax - dmin,
                umax - umin
            );
        }
        Command::ReproduceFig4 { common, out_dir } => {
            let cfg = common.resolve()?;
            let out = out_dir.join("fig4_endtoend.csv");
            let grid = x_grid(&cfg, 0.05)?;
            // Current boosters cannot make up a 10.5 dB hop; cap them at 6 dB
            // so the 3 dB/m curve shows the accumulating deficit.
            let current = end_to_end_gain_profile(
                &cfg,
                &grid,
                &FiberVariant {
                    atten_db_per_m: 3.0,
                    coupler_loss_db: 3.0,
                    booster_gain_cap_db: 6.0,
                },
            )?;
            let lowloss = end_to_end_gain_profile(
                &cfg,
                &grid,
                &FiberVariant {
                    atten_db_per_m: 1.0,
                    coupler_loss_db: 0.5,
                    booster_gain_cap_db: 6.0,
                },
            )?;
            let manifest = RunManifest::new("reproduce-fig4", &cfg, &[&out]);
            write_output(&out, &endtoend_pair_csv(&current, &lowloss), &manifest)?;
            let wins = lowloss
                .stripe_db
                .iter()
                .zip(&lowloss.direct_db)
                .filter(|(s, d)| s > d)
                .count();
            println!(
                "fig4: low-loss stripe beats direct at {wins}/{} positions; current-technology deficit {:.1} dB/hop",
                grid.len(),
                10.5 - 6.0
            );
        }
    }
    Ok(())
}

fn run_dualband(command: DualbandCommand) -> Result<()> {
    match command {
        DualbandCommand::Train {
            common,
            grid_step,
            beams,
            out,
        } => {
            let cfg = common.resolve()?;
            let codebook = Codebook::from_config(&cfg, beams);
            let dataset = build_dataset(&cfg, &codebook, grid_step)?;
            let manifest = RunManifest::new("dualband-train", &cfg, &[&out]);
            write_output(&out, &dataset_csv(&dataset), &manifest)?;
            println!(
                "dualband train: {} samples over a {grid_step} m grid, {} RU x {} beam labels",
                dataset.len(),
                codebook.n_ru(),
                codebook.n_beams()
            );
        }
        DualbandCommand::Eval {
            common,
            grid_step,
            beams,
            k,
            out,
        } => {
            let cfg = common.resolve()?;
            let ks = parse_k_list(&k)?;
            let codebook = Codebook::from_config(&cfg, beams);
            let dataset = build_dataset(&cfg, &codebook, grid_step)?;
            let model = train(ModelKind::NearestNeighbor, &codebook, dataset)?;
            let test = midpoint_grid(&cfg, grid_step);
            let table = evaluate(&model, &cfg, &codebook, &test, &ks)?;
            let manifest = RunManifest::new("dualband-eval", &cfg, &[&out]);
            write_output(&out, &metrics_csv(&table), &manifest)?;
            println!(
                "dualband eval: {} training / {} test points, sweep cost {} slots",
                floor_grid(&cfg, grid_step).len(),
                test.len(),
                codebook.n_pairs()
            );
            for row in &table.rows {
                println!(
                    "  k={:3}  top-k {:6.2}%  mean loss {:.3} dB  p95 {:.3} dB  slots {:.0}",
                    row.k,
                    row.topk_rate * 100.0,
                    row.mean_gain_loss_db,
                    row.p95_gain_loss_db,
                    row.mean_slots
                );
            }
        }
    }
    Ok(())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}
