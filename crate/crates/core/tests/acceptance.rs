//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured numbers (run with `--nocapture` to see them).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use stripe_sim::airlink::{
    end_to_end_gain_profile, link_path_gain, serve_and_profile, FiberVariant, Transmitter, TxId,
};
use stripe_sim::dbmath::db_to_linear;
use stripe_sim::dualband::{
    build_dataset, evaluate, exploit, lowband_channel, midpoint_grid, oracle_sweep,
    sample_features, train, Codebook, MappingModel, ModelKind, DEFAULT_BEAMS_PER_RU,
};
use stripe_sim::energy::{report as energy_report, PowerModel};
use stripe_sim::geometry::Vec3;
use stripe_sim::report::{fiber_csv, metrics_csv};
use stripe_sim::rfchain::{
    apply_stage, run_chain, sndr_db, thermal_noise_floor_dbm, SignalState, StageSpec,
};
use stripe_sim::scenario::{AntennaSpec, RuMode, ScenarioConfig, Steering};

fn x_grid(step: f64, length: f64) -> Vec<f64> {
    let n = (length / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn report_line(criterion: &str, detail: &str, pass: bool) {
    println!(
        "[acceptance] {criterion}: {detail} -> {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: calibrated defaults reproduce the fiber budget's shape —
/// noise->distortion crossover at 9 +/- 1.5 m and >= 30 dB SNDR at 15 m,
/// in under a second.
#[test]
fn criterion_1_fiber_budget_reproduction() {
    let t0 = Instant::now();
    let cfg = ScenarioConfig::default();
    let chain = run_chain(&cfg).unwrap();
    let elapsed = t0.elapsed();

    let crossover = chain.crossover_m.unwrap_or(f64::NAN);
    let end_sndr = chain.end_sndr_db();
    let pass = (7.5..=10.5).contains(&crossover) && end_sndr >= 30.0 && elapsed.as_secs_f64() < 1.0;
    report_line(
        "criterion 1 (fiber budget)",
        &format!(
            "crossover={crossover:.1} m (target 9±1.5), end SNDR={end_sndr:.2} dB (target >=30), runtime={:.3} s (target <1)",
            elapsed.as_secs_f64()
        ),
        pass,
    );
    assert!(pass);
}

/// Single-bin DFT amplitude of a real signal.
fn tone_power_dbm(signal: &[f64], bin: usize) -> f64 {
    let n = signal.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &s) in signal.iter().enumerate() {
        let phase = -2.0 * std::f64::consts::PI * bin as f64 * i as f64 / n;
        re += s * phase.cos();
        im += s * phase.sin();
    }
    let amp = 2.0 * (re * re + im * im).sqrt() / n;
    10.0 * (amp * amp / 2.0 * 1000.0).log10()
}

/// Criterion 2: the per-stage accounting matches independent oracles —
/// closed-form Friis for noise, and a brute-force cubic-nonlinearity
/// two-tone time-domain simulation for IMD, over 100 random cases each.
#[test]
fn criterion_2_cascade_oracles() {
    let bw = 20e9;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);

    let mut worst_friis = 0.0f64;
    for _ in 0..100 {
        let (g1, nf1) = (rng.gen_range(1.0..25.0), rng.gen_range(0.5..12.0));
        let (g2, nf2) = (rng.gen_range(1.0..25.0), rng.gen_range(0.5..12.0));
        let p_in = rng.gen_range(-60.0..-10.0);
        let s0 = SignalState {
            p_sig_dbm: p_in,
            p_noise_dbm: thermal_noise_floor_dbm(bw).unwrap(),
            p_imd_dbm: f64::NEG_INFINITY,
            position_m: 0.0,
        };
        let end = apply_stage(
            apply_stage(s0, &StageSpec::amplifier(g1, nf1, 40.0).unwrap(), bw),
            &StageSpec::amplifier(g2, nf2, 40.0).unwrap(),
            bw,
        );
        let f_total = db_to_linear(nf1) + (db_to_linear(nf2) - 1.0) / db_to_linear(g1);
        let snr_closed = db_to_linear(s0.p_sig_dbm - s0.p_noise_dbm) / f_total;
        let rel = (db_to_linear(end.snr_db()) - snr_closed).abs() / snr_closed;
        worst_friis = worst_friis.max(rel);
    }

    // Two-tone time-domain oracle: y = a1*x + a3*x^3 on commensurate tones,
    // IMD3 read off the 2*f2 - f1 bin (1-ohm power convention).
    let n = 4096usize;
    let (k1, k2) = (350usize, 407usize);
    let mut worst_imd = 0.0f64;
    for _ in 0..100 {
        let gain_db = rng.gen_range(3.0..25.0);
        let oip3_dbm = rng.gen_range(5.0..30.0);
        let p_in_dbm = oip3_dbm - gain_db - rng.gen_range(15.0..40.0);

        let a1 = db_to_linear(gain_db).sqrt();
        let oip3_w = db_to_linear(oip3_dbm - 30.0);
        let a3 = -(2.0 / 3.0) * a1.powi(3) / oip3_w;
        let amp_in = (2.0 * db_to_linear(p_in_dbm - 30.0)).sqrt();

        let signal: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                let x = amp_in
                    * ((2.0 * std::f64::consts::PI * k1 as f64 * t).cos()
                        + (2.0 * std::f64::consts::PI * k2 as f64 * t).cos());
                a1 * x + a3 * x * x * x
            })
            .collect();
        let imd_measured = tone_power_dbm(&signal, 2 * k2 - k1);

        let state = SignalState {
            p_sig_dbm: p_in_dbm,
            p_noise_dbm: -120.0,
            p_imd_dbm: f64::NEG_INFINITY,
            position_m: 0.0,
        };
        let out = apply_stage(
            state,
            &StageSpec::amplifier(gain_db, 5.0, oip3_dbm).unwrap(),
            bw,
        );
        worst_imd = worst_imd.max((out.p_imd_dbm - imd_measured).abs());
    }

    let pass = worst_friis < 1e-9 && worst_imd < 0.1;
    report_line(
        "criterion 2 (cascade oracles)",
        &format!(
            "worst Friis rel err={worst_friis:.2e} (target <1e-9), worst IMD err={worst_imd:.4} dB (target <0.1)"
        ),
        pass,
    );
    assert!(pass);
}

/// Criterion 3: over-the-air comparison — distributed coverage is flat
/// (<= 6 dB swing) while the unsteered central AP swings > 15 dB, and a
/// single-patch stripe matches the steered central 4x4 at the room edge
/// within 3 dB.
#[test]
fn criterion_3_air_profile_reproduction() {
    let cfg = ScenarioConfig::default();
    let grid = x_grid(0.05, cfg.stripe.length_m);
    let profile = serve_and_profile(&cfg, &grid).unwrap();

    let minmax = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (dmin, dmax) = minmax(&profile.distributed.path_gain_db);
    let (umin, umax) = minmax(&profile.central_unsteered.path_gain_db);
    let d_swing = dmax - dmin;
    let u_swing = umax - umin;

    // single-patch stripe at the room edge vs the steered central 4x4
    let mut patch_cfg = cfg.clone();
    patch_cfg.ru_defaults.tx_array = AntennaSpec::single_patch();
    let edge = Vec3::new(0.0, cfg.terminal.position.y, cfg.terminal.position.z);
    let patch_edge = stripe_sim::airlink::serving_ru(&patch_cfg, edge).unwrap().path_gain_db;
    let central_edge = link_path_gain(
        &Transmitter::central(&cfg, Steering::SteeredToTarget),
        edge,
        &cfg.terminal.rx_array,
        &cfg,
    )
    .unwrap()
    .path_gain_db;
    let edge_gap = (patch_edge - central_edge).abs();

    let pass = d_swing <= 6.0 && u_swing > 15.0 && edge_gap <= 3.0;
    report_line(
        "criterion 3 (air profiles)",
        &format!(
            "distributed swing={d_swing:.2} dB (target <=6), central-unsteered swing={u_swing:.2} dB (target >15), single-patch vs central edge gap={edge_gap:.2} dB (target <=3)"
        ),
        pass,
    );
    assert!(pass);
}

/// Criterion 4: end-to-end comparison — low-loss fiber lets the stripe beat
/// the direct link somewhere, and with current losses plus capped boosters
/// the stripe total is monotone non-increasing in serving-RU index.
#[test]
fn criterion_4_end_to_end_properties() {
    let cfg = ScenarioConfig::default();
    let grid = x_grid(0.05, cfg.stripe.length_m);

    let lowloss = end_to_end_gain_profile(
        &cfg,
        &grid,
        &FiberVariant {
            atten_db_per_m: 1.0,
            coupler_loss_db: 0.5,
            booster_gain_cap_db: 6.0,
        },
    )
    .unwrap();
    let beats = (0..grid.len())
        .filter(|&i| lowloss.stripe_db[i] > lowloss.direct_db[i])
        .count();

    let current = end_to_end_gain_profile(
        &cfg,
        &grid,
        &FiberVariant {
            atten_db_per_m: 3.0,
            coupler_loss_db: 3.0,
            booster_gain_cap_db: 6.0,
        },
    )
    .unwrap();
    // stripe total sampled directly under each RU: one value per serving index
    let per_ru: Vec<f64> = (0..10)
        .map(|k| {
            let x = 1.5 * (k + 1) as f64;
            let i = grid.iter().position(|&g| (g - x).abs() < 1e-9).unwrap();
            assert_eq!(current.serving[i], TxId::Ru(k));
            current.stripe_db[i]
        })
        .collect();
    let monotone = per_ru.windows(2).all(|w| w[1] <= w[0] + 1e-9);

    let pass = beats > 0 && monotone;
    report_line(
        "criterion 4 (end-to-end)",
        &format!(
            "low-loss stripe beats direct at {beats}/{} positions (target >0), current-loss per-RU totals monotone non-increasing: {monotone}",
            grid.len()
        ),
        pass,
    );
    assert!(pass);
}

/// Criterion 5: energy arithmetic is exact — 5.1 W for CU + 10 RUs and
/// 255 pJ/bit at 20 Gbit/s.
#[test]
fn criterion_5_energy_exact() {
    let model = PowerModel::default();
    let rep = energy_report(&model, 10, model.throughput_bps).unwrap();
    let total_exact = rep.total_power_w == 5.1;
    let per_bit_def = rep.energy_per_bit_j == rep.total_power_w / model.throughput_bps;
    let pj = rep.energy_per_bit_j * 1e12;
    let pj_exact = (pj - 255.0).abs() < 1e-9;

    let pass = total_exact && per_bit_def && pj_exact;
    report_line(
        "criterion 5 (energy)",
        &format!(
            "total={} W (target exactly 5.1), energy={pj:.6} pJ/bit (target 255)",
            rep.total_power_w
        ),
        pass,
    );
    assert!(pass);
}

/// Criterion 6: dual-band protocol. Slot accounting, training-point recall,
/// exhaustive-k regret, and runtime all hold. The held-out midpoint-grid
/// agreement targets (top-1 >= 80%, top-3 >= 95%) do not: with
/// unit-normalized raw re/im features at a 6 GHz carrier, a 0.25 m training
/// grid undersamples the channel's phase structure by an order of magnitude,
/// so coherent Euclidean nearest-neighbor retrieval is not spatially local.
/// Measured ceilings stay near 30% / 76% across every honest
/// parameterization tried; see the repository notes. The criterion is
/// asserted as specified and reports its failure honestly.
#[test]
fn criterion_6_dual_band_protocol() {
    let t0 = Instant::now();
    let cfg = ScenarioConfig::default();
    let codebook = Codebook::from_config(&cfg, DEFAULT_BEAMS_PER_RU);
    let n_pairs = codebook.n_pairs();

    // slots
    let sweep = oracle_sweep(&cfg, &codebook, cfg.terminal.position).unwrap();
    let slots_ok = sweep.slots_used == n_pairs;
    report_line(
        "criterion 6a (sweep slots)",
        &format!("slots={} (target exactly {n_pairs})", sweep.slots_used),
        slots_ok,
    );

    // training-point recall
    let dataset = build_dataset(&cfg, &codebook, 0.25).unwrap();
    let model = train(ModelKind::NearestNeighbor, &codebook, dataset.clone()).unwrap();
    let recalled = dataset
        .iter()
        .filter(|s| model.predict_topk(&s.features, 1)[0] == s.label)
        .count();
    let recall_ok = recalled == dataset.len();
    report_line(
        "criterion 6b (training recall)",
        &format!("{recalled}/{} training points at rank 1 (target all)", dataset.len()),
        recall_ok,
    );

    // held-out midpoint grid
    let test = midpoint_grid(&cfg, 0.25);
    let table = evaluate(&model, &cfg, &codebook, &test, &[1, 3, n_pairs]).unwrap();
    let top1 = table.rows[0].topk_rate;
    let top3 = table.rows[1].topk_rate;
    let top1_ok = top1 >= 0.80;
    let top3_ok = top3 >= 0.95;
    report_line(
        "criterion 6c (midpoint top-1)",
        &format!("top-1 agreement={:.1}% (target >=80%)", top1 * 100.0),
        top1_ok,
    );
    report_line(
        "criterion 6d (midpoint top-3)",
        &format!("top-3 agreement={:.1}% (target >=95%)", top3 * 100.0),
        top3_ok,
    );

    // exhaustive k has zero regret
    let zero_loss_ok = table.rows[2].mean_gain_loss_db == 0.0;
    report_line(
        "criterion 6e (exhaustive k regret)",
        &format!(
            "mean gain loss at k={n_pairs}: {} dB (target exactly 0)",
            table.rows[2].mean_gain_loss_db
        ),
        zero_loss_ok,
    );

    let elapsed = t0.elapsed().as_secs_f64();
    let runtime_ok = elapsed < 60.0;
    report_line(
        "criterion 6f (runtime)",
        &format!("{elapsed:.1} s for the {}-sample room (target <60)", dataset.len()),
        runtime_ok,
    );

    assert!(slots_ok && recall_ok && zero_loss_ok && runtime_ok);
    assert!(
        top1_ok && top3_ok,
        "held-out agreement targets unmet: top-1 {:.1}% (>=80% required), top-3 {:.1}% (>=95% required); \
         unreachable for Euclidean NN on unit-normalized raw re/im features at 5-lambda grid spacing",
        top1 * 100.0,
        top3 * 100.0
    );
}

/// Criterion 7: a 50 m x 50 m floor sampled at 5 lambda (6 GHz) yields
/// exactly 40 000 labelled samples.
#[test]
fn criterion_7_desk_scale_dataset() {
    let mut cfg = ScenarioConfig::default();
    cfg.room.length_m = 50.0;
    cfg.room.width_m = 50.0;
    cfg.validate().unwrap();
    let spacing = 5.0 * stripe_sim::airlink::SPEED_OF_LIGHT / cfg.lowband_hz;
    let codebook = Codebook::from_config(&cfg, DEFAULT_BEAMS_PER_RU);
    let dataset = build_dataset(&cfg, &codebook, spacing).unwrap();
    let pass = dataset.len() == 40_000;
    report_line(
        "criterion 7 (desk-scale dataset)",
        &format!("{} samples at 5-lambda spacing (target exactly 40000)", dataset.len()),
        pass,
    );
    assert!(pass);
}

/// Criterion 8: representative invariants from every module's property
/// section, asserted directly (the full randomized suites live in the
/// properties test target).
#[test]
fn criterion_8_property_suites() {
    let mut all = true;
    let mut check = |name: &str, ok: bool| {
        report_line(&format!("criterion 8 ({name})"), "", ok);
        all &= ok;
    };

    // FSPL doubling law
    let f = stripe_sim::airlink::fspl_db;
    check(
        "fspl doubling",
        (f(140e9, 8.0).unwrap() - f(140e9, 4.0).unwrap() - 20.0 * 2.0f64.log10()).abs() < 1e-9,
    );

    // third-order +9 dB slope
    let bw = 20e9;
    let amp = StageSpec::amplifier(12.0, 6.0, 15.0).unwrap();
    let mk = |p| SignalState {
        p_sig_dbm: p,
        p_noise_dbm: -90.0,
        p_imd_dbm: f64::NEG_INFINITY,
        position_m: 0.0,
    };
    let lo = apply_stage(mk(-40.0), &amp, bw);
    let hi = apply_stage(mk(-37.0), &amp, bw);
    check("third-order slope", (hi.p_imd_dbm - lo.p_imd_dbm - 9.0).abs() < 1e-9);

    // SNDR composition bound
    let s = SignalState {
        p_sig_dbm: 0.0,
        p_noise_dbm: -31.0,
        p_imd_dbm: -33.0,
        position_m: 0.0,
    };
    check("sndr bound", sndr_db(&s) <= s.snr_db().min(s.sdr_db()));

    // handover periodicity across one interior RU interval
    let cfg = ScenarioConfig::default();
    let xs: Vec<f64> = (0..=30).map(|i| 4.5 + i as f64 * 0.05).collect();
    let shifted: Vec<f64> = xs.iter().map(|x| x + 1.5).collect();
    let a = serve_and_profile(&cfg, &xs).unwrap();
    let b = serve_and_profile(&cfg, &shifted).unwrap();
    check(
        "handover periodicity",
        (0..xs.len()).all(|i| {
            (a.distributed.path_gain_db[i] - b.distributed.path_gain_db[i]).abs() < 1e-6
        }),
    );

    // blockage monotonicity
    let ue = Vec3::new(5.0, 3.0, 0.5);
    let tx = Transmitter::ru(&cfg, 2);
    let clear = link_path_gain(&tx, ue, &cfg.terminal.rx_array, &cfg).unwrap();
    let mut blocked_cfg = cfg.clone();
    blocked_cfg.blockers.push(stripe_sim::scenario::Blocker {
        center: Vec3::new(4.75, 3.0, 2.5),
        radius_m: 0.4,
        penetration_loss_db: 40.0,
    });
    let blocked = link_path_gain(&tx, ue, &cfg.terminal.rx_array, &blocked_cfg).unwrap();
    check("blockage monotonicity", blocked.path_gain_db <= clear.path_gain_db);

    // chain-disable suffix rule
    check(
        "chain-disable suffix",
        stripe_sim::energy::active_set(&[RuMode::Transmit, RuMode::Disabled, RuMode::Booster]).is_err()
            && matches!(
                stripe_sim::energy::active_set(&[RuMode::Booster, RuMode::Disabled, RuMode::Disabled]),
                Ok(1)
            ),
    );

    // top-k monotonicity (nested candidate lists)
    let cb = Codebook::from_config(&cfg, 3);
    let ds = build_dataset(&cfg, &cb, 1.0).unwrap();
    let model = train(ModelKind::NearestNeighbor, &cb, ds).unwrap();
    let ch = lowband_channel(&cfg, Vec3::new(2.3, 4.1, 0.5)).unwrap();
    let feats = sample_features(&cfg, &ch);
    let full = model.predict_topk(&feats, cb.n_pairs());
    check(
        "top-k nesting",
        (1..cb.n_pairs()).all(|k| model.predict_topk(&feats, k) == full[..k]),
    );

    // determinism: byte-identical rerun
    let fiber_a = fiber_csv(&run_chain(&cfg).unwrap());
    let fiber_b = fiber_csv(&run_chain(&cfg).unwrap());
    let test = midpoint_grid(&cfg, 1.0);
    let ma = metrics_csv(&evaluate(&model, &cfg, &cb, &test, &[1, 3]).unwrap());
    let mb = metrics_csv(&evaluate(&model, &cfg, &cb, &test, &[1, 3]).unwrap());
    check("byte-identical rerun", fiber_a == fiber_b && ma == mb);

    // exploit regret is never negative and exhaustive k recovers the oracle
    let out = exploit(&model, &cfg, &cb, Vec3::new(9.4, 1.2, 0.5), cb.n_pairs()).unwrap();
    check(
        "exploit regret",
        out.gain_loss_db == 0.0 && out.chosen == out.oracle && out.slots_used == cb.n_pairs(),
    );

    assert!(all);
}
