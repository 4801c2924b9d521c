//! Python extension module exposing the simulator's main types and
//! operations. Build the cdylib and import it as `stripe_sim_py`; see
//! python/smoke_test.py for a worked example.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use stripe_sim::airlink;
use stripe_sim::dualband;
use stripe_sim::energy;
use stripe_sim::geometry::Vec3;
use stripe_sim::rfchain;
use stripe_sim::scenario::{RuMode, ScenarioConfig, ScenarioError};

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated simulation scenario (immutable world description).
#[pyclass(module = "stripe_sim_py")]
#[derive(Clone)]
struct Scenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    /// Built-in default: 15 m stripe, 10 RUs, conference-room geometry.
    #[staticmethod]
    fn default() -> Self {
        Self {
            inner: ScenarioConfig::default(),
        }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: stripe_sim::load_scenario(path).map_err(scenario_err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::from_toml_str(text).map_err(scenario_err)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn carrier_hz(&self) -> f64 {
        self.inner.carrier_hz
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz
    }

    fn ru_count(&self) -> usize {
        self.inner.stripe.ru_count()
    }

    fn ru_positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .ru_positions()
            .into_iter()
            .map(|p| (p.x, p.y, p.z))
            .collect()
    }

    fn transmit_capable(&self) -> Vec<usize> {
        self.inner.transmit_capable_indices()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(stripe {} m, {} RUs, carrier {:.0} GHz)",
            self.inner.stripe.length_m,
            self.inner.stripe.ru_count(),
            self.inner.carrier_hz / 1e9
        )
    }
}

/// Signal/noise/IMD state at one tap along the fiber.
#[pyclass(module = "stripe_sim_py", get_all)]
#[derive(Clone)]
struct ChainTap {
    position_m: f64,
    p_sig_dbm: f64,
    p_noise_dbm: f64,
    p_imd_dbm: f64,
    snr_db: f64,
    sdr_db: f64,
    sndr_db: f64,
}

#[pyclass(module = "stripe_sim_py", get_all)]
struct FiberReport {
    taps: Vec<ChainTap>,
    crossover_m: Option<f64>,
    end_sndr_db: f64,
}

/// Run the fiber chain; one tap after the CU and after each active RU.
#[pyfunction]
#[pyo3(signature = (scenario, launch_dbm=None))]
fn run_fiber_chain(scenario: &Scenario, launch_dbm: Option<f64>) -> PyResult<FiberReport> {
    let report = rfchain::run_chain_with(
        &scenario.inner,
        &rfchain::ChainOptions {
            launch_dbm,
            ..rfchain::ChainOptions::default()
        },
    )
    .map_err(value_err)?;
    Ok(FiberReport {
        taps: report
            .taps
            .iter()
            .map(|t| ChainTap {
                position_m: t.position_m,
                p_sig_dbm: t.p_sig_dbm,
                p_noise_dbm: t.p_noise_dbm,
                p_imd_dbm: t.p_imd_dbm,
                snr_db: t.snr_db(),
                sdr_db: t.sdr_db(),
                sndr_db: rfchain::sndr_db(t),
            })
            .collect(),
        crossover_m: report.crossover_m,
        end_sndr_db: report.end_sndr_db(),
    })
}

/// Grid point maximizing end-of-stripe SNDR (ties to the lower power).
#[pyfunction]
fn sweep_launch_power(scenario: &Scenario, grid: Vec<f64>) -> PyResult<f64> {
    rfchain::sweep_launch_power(&scenario.inner, &grid).map_err(value_err)
}

#[pyfunction]
fn thermal_noise_floor_dbm(bandwidth_hz: f64) -> PyResult<f64> {
    rfchain::thermal_noise_floor_dbm(bandwidth_hz).map_err(value_err)
}

#[pyfunction]
fn wavelength_m(f_hz: f64) -> PyResult<f64> {
    airlink::wavelength_m(f_hz).map_err(value_err)
}

#[pyfunction]
fn fspl_db(f_hz: f64, d_m: f64) -> PyResult<f64> {
    airlink::fspl_db(f_hz, d_m).map_err(value_err)
}

#[pyfunction]
fn hpbw_deg(n_elems_axis: u32) -> PyResult<f64> {
    airlink::hpbw_deg(n_elems_axis).map_err(value_err)
}

#[pyfunction]
fn doppler_hz(speed_mps: f64, f_hz: f64) -> f64 {
    airlink::doppler_hz(speed_mps, f_hz)
}

#[pyfunction]
fn array_gain_dbi(n_x: u32, n_y: u32, element_gain_dbi: f64) -> f64 {
    element_gain_dbi + 10.0 * ((n_x * n_y) as f64).log10()
}

/// Path-gain sweep along the stripe for the three coverage modes.
#[pyclass(module = "stripe_sim_py", get_all)]
struct AirProfile {
    x_m: Vec<f64>,
    distributed_db: Vec<f64>,
    central_steered_db: Vec<f64>,
    central_unsteered_db: Vec<f64>,
    serving_ru: Vec<usize>,
}

fn stripe_grid(cfg: &ScenarioConfig, step: f64) -> PyResult<Vec<f64>> {
    if !(step > 0.0) {
        return Err(PyValueError::new_err("grid step must be > 0"));
    }
    let n = (cfg.stripe.length_m / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

#[pyfunction]
#[pyo3(signature = (scenario, grid_step=0.05))]
fn air_profile(scenario: &Scenario, grid_step: f64) -> PyResult<AirProfile> {
    let grid = stripe_grid(&scenario.inner, grid_step)?;
    let p = airlink::serve_and_profile(&scenario.inner, &grid).map_err(value_err)?;
    let serving_ru = p
        .distributed
        .serving
        .iter()
        .map(|tx| match tx {
            airlink::TxId::Ru(i) => *i,
            airlink::TxId::Central => usize::MAX,
        })
        .collect();
    Ok(AirProfile {
        x_m: p.x_grid_m,
        distributed_db: p.distributed.path_gain_db,
        central_steered_db: p.central_steered.path_gain_db,
        central_unsteered_db: p.central_unsteered.path_gain_db,
        serving_ru,
    })
}

/// Stripe (fiber + air) vs direct central link for one fiber variant.
#[pyclass(module = "stripe_sim_py", get_all)]
struct EndToEnd {
    x_m: Vec<f64>,
    direct_db: Vec<f64>,
    stripe_db: Vec<f64>,
}

#[pyfunction]
#[pyo3(signature = (scenario, atten_db_per_m, coupler_loss_db, booster_cap_db=30.0, grid_step=0.05))]
fn end_to_end(
    scenario: &Scenario,
    atten_db_per_m: f64,
    coupler_loss_db: f64,
    booster_cap_db: f64,
    grid_step: f64,
) -> PyResult<EndToEnd> {
    let grid = stripe_grid(&scenario.inner, grid_step)?;
    let p = airlink::end_to_end_gain_profile(
        &scenario.inner,
        &grid,
        &airlink::FiberVariant {
            atten_db_per_m,
            coupler_loss_db,
            booster_gain_cap_db: booster_cap_db,
        },
    )
    .map_err(value_err)?;
    Ok(EndToEnd {
        x_m: p.x_grid_m,
        direct_db: p.direct_db,
        stripe_db: p.stripe_db,
    })
}

#[pyclass(module = "stripe_sim_py", get_all)]
struct EnergyFigures {
    n_active_rus: usize,
    total_power_w: f64,
    energy_per_bit_j: f64,
}

/// Power draw serving through RU `serving_ru` (everything downstream off),
/// or with the scenario's own mode assignment when omitted.
#[pyfunction]
#[pyo3(signature = (scenario, serving_ru=None))]
fn energy_figures(scenario: &Scenario, serving_ru: Option<usize>) -> PyResult<EnergyFigures> {
    let rus = scenario.inner.radio_units();
    let n_active = match serving_ru {
        Some(k) if k < rus.len() => k + 1,
        Some(k) => {
            return Err(PyValueError::new_err(format!(
                "serving RU {k} out of range ({} RUs)",
                rus.len()
            )))
        }
        None => {
            let modes: Vec<RuMode> = rus.iter().map(|r| r.mode).collect();
            energy::active_set(&modes).map_err(value_err)?
        }
    };
    let model = energy::PowerModel::default();
    let rep = energy::report(&model, n_active, model.throughput_bps).map_err(value_err)?;
    Ok(EnergyFigures {
        n_active_rus: rep.n_active_rus,
        total_power_w: rep.total_power_w,
        energy_per_bit_j: rep.energy_per_bit_j,
    })
}

/// Exhaustive (RU, beam) sweep at floor position (x, y).
/// Returns ((ru_slot, beam), slots_used, best_path_gain_db).
#[pyfunction]
#[pyo3(signature = (scenario, x, y, n_beams=dualband::DEFAULT_BEAMS_PER_RU))]
fn oracle_sweep(
    scenario: &Scenario,
    x: f64,
    y: f64,
    n_beams: usize,
) -> PyResult<((usize, usize), usize, f64)> {
    let cfg = &scenario.inner;
    let codebook = dualband::Codebook::from_config(cfg, n_beams);
    let ue = Vec3::new(x, y, cfg.terminal.position.z);
    let out = dualband::oracle_sweep(cfg, &codebook, ue).map_err(value_err)?;
    Ok((out.best, out.slots_used, out.best_path_gain_db))
}

/// Train the nearest-neighbor mapping on a grid and evaluate it on the
/// midpoint-offset grid. Returns one row per k:
/// (k, topk_rate, mean_gain_loss_db, p95_gain_loss_db, mean_slots).
#[pyfunction]
#[pyo3(signature = (scenario, grid_step=0.25, ks=vec![1, 3, 5], n_beams=dualband::DEFAULT_BEAMS_PER_RU))]
fn dualband_eval(
    scenario: &Scenario,
    grid_step: f64,
    ks: Vec<usize>,
    n_beams: usize,
) -> PyResult<Vec<(usize, f64, f64, f64, f64)>> {
    let cfg = &scenario.inner;
    let codebook = dualband::Codebook::from_config(cfg, n_beams);
    let dataset = dualband::build_dataset(cfg, &codebook, grid_step).map_err(value_err)?;
    let model =
        dualband::train(dualband::ModelKind::NearestNeighbor, &codebook, dataset).map_err(value_err)?;
    let test = dualband::midpoint_grid(cfg, grid_step);
    let table = dualband::evaluate(&model, cfg, &codebook, &test, &ks).map_err(value_err)?;
    Ok(table
        .rows
        .iter()
        .map(|r| (r.k, r.topk_rate, r.mean_gain_loss_db, r.p95_gain_loss_db, r.mean_slots))
        .collect())
}

#[pymodule]
fn stripe_sim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<ChainTap>()?;
    m.add_class::<FiberReport>()?;
    m.add_class::<AirProfile>()?;
    m.add_class::<EndToEnd>()?;
    m.add_class::<EnergyFigures>()?;
    m.add_function(wrap_pyfunction!(run_fiber_chain, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_launch_power, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_noise_floor_dbm, m)?)?;
    m.add_function(wrap_pyfunction!(wavelength_m, m)?)?;
    m.add_function(wrap_pyfunction!(fspl_db, m)?)?;
    m.add_function(wrap_pyfunction!(hpbw_deg, m)?)?;
    m.add_function(wrap_pyfunction!(doppler_hz, m)?)?;
    m.add_function(wrap_pyfunction!(array_gain_dbi, m)?)?;
    m.add_function(wrap_pyfunction!(air_profile, m)?)?;
    m.add_function(wrap_pyfunction!(end_to_end, m)?)?;
    m.add_function(wrap_pyfunction!(energy_figures, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(dualband_eval, m)?)?;
    Ok(())
}
