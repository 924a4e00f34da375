//! Acceptance suite: end-to-end checks of the simulator against hand-derived
//! oracles, published reference statistics, and its own determinism contract.
//! Each test prints one PASS line with the measured values.

use owf_sim::availability::{build_availability, energy_per_day};
use owf_sim::economics::{settle_terms, settlement_inputs, SettlementInputs};
use owf_sim::model::{load_config, validate_config, ContractTerms, TurbineSpec, ValidatedBundle};
use owf_sim::optimizer::pareto::{compromise_index, hypervolume, non_dominated_fronts};
use owf_sim::optimizer::{run_moga, GaParams, GeneSpec};
use owf_sim::scheduler::build_drv;
use owf_sim::simulator::{sweep, AxisName, ScenarioEngine, SweepAxis, SweepCell};
use owf_sim::stochastic::{derive_demand, sample_failures_for, DailyEnvironment, FailureEvent};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

fn reference_config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../reference_case.json")
}

fn reference_bundle() -> ValidatedBundle {
    load_config(&reference_config_path()).expect("reference config must validate")
}

/// Criterion 1: mean sampled failure counts per mode match the rate
/// expectation `rate * turbines * days` within 5% for every mode whose
/// expectation is at least 10, and the total matches 234 within 5%.
#[test]
fn failure_counts_track_rate_expectations() {
    let start = Instant::now();
    let bundle = reference_bundle();
    let samples = 2000u64;
    let n = bundle.farm.len() as f64;
    let days = bundle.sim.horizon_days as f64;

    let mut counts: HashMap<u32, u64> = HashMap::new();
    let mut total = 0u64;
    for index in 0..samples {
        for event in sample_failures_for(&bundle, bundle.sim.master_seed, index) {
            *counts.entry(event.failure_mode_id).or_insert(0) += 1;
            total += 1;
        }
    }

    let mut checked = 0;
    for mode in &bundle.failures {
        let expected = mode.daily_rate * n * days;
        if expected < 10.0 {
            continue;
        }
        let mean = *counts.get(&mode.id).unwrap_or(&0) as f64 / samples as f64;
        let rel = (mean - expected).abs() / expected;
        assert!(
            rel <= 0.05,
            "mode {} mean {:.2} deviates {:.1}% from expectation {:.2}",
            mode.id,
            mean,
            rel * 100.0,
            expected
        );
        checked += 1;
    }
    assert!(checked >= 10, "reference catalog must exercise the check");

    let total_mean = total as f64 / samples as f64;
    let total_rel = (total_mean - 234.0).abs() / 234.0;
    assert!(
        total_rel <= 0.05,
        "total mean {total_mean:.2} deviates {:.1}% from 234",
        total_rel * 100.0
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 60s");
    println!(
        "PASS failure counts: {checked} modes within 5%, total {total_mean:.2} vs 234, {elapsed:.1}s"
    );
}

/// Criterion 2: the power curve hits its reference points and is continuous
/// at cut-in and rated speed.
#[test]
fn power_curve_matches_reference_points() {
    let spec = TurbineSpec {
        rated_power_kw: 8000.0,
        cut_in_speed: 4.0,
        rated_speed: 13.0,
        cut_out_speed: 25.0,
    };
    assert_eq!(energy_per_day(0.0, &spec), 0.0);
    assert_eq!(energy_per_day(3.999, &spec), 0.0);
    assert_eq!(energy_per_day(25.0, &spec), 0.0);
    assert_eq!(energy_per_day(30.0, &spec), 0.0);
    assert_eq!(energy_per_day(13.0, &spec), 192.0);
    assert_eq!(energy_per_day(24.99, &spec), 192.0);

    let at_ten = energy_per_day(10.0, &spec);
    assert!(
        (at_ten - 84.26).abs() < 0.01,
        "10 m/s energy {at_ten:.4} MWh, expected about 84.26"
    );
    let exact = 192.0 * (1000.0 - 64.0) / (2197.0 - 64.0);
    assert!((at_ten - exact).abs() < 1e-9);

    // Continuity at the cut-in and rated knots, relative to rated output.
    let eps = 1e-9;
    for knot in [4.0, 13.0] {
        let left = energy_per_day(knot - eps, &spec);
        let right = energy_per_day(knot + eps, &spec);
        assert!(
            (left - right).abs() / 192.0 < 1e-6,
            "discontinuity at {knot} m/s: {left} vs {right}"
        );
    }
    println!("PASS power curve: 0 / 192 / {at_ten:.2} MWh reference points, continuous knots");
}

/// Criterion 3: a scripted two-turbine, ten-day realization settles to the
/// hand-computed ledger within one cent, under two contract variants.
#[test]
fn scripted_ledger_matches_hand_computation() {
    let bundle = validate_config(
        r#"{
        "farm": {"distances_km": [10.0, 20.0]},
        "turbine": {"rated_power_kw": 8000.0},
        "failures": [{"id": 1, "name": "pitch system repair", "daily_rate": 0.001,
                      "repair_hours": 11.0, "material_cost": 1900.0, "required_technicians": 2}],
        "transports": [{"name": "ctv", "speed_ms": 10.2, "hourly_cost": 81.03,
                        "per_km_cost": 2.21, "use_rate": 1.0,
                        "max_wind_access_ms": 10.0, "max_wave_access_m": 1.5}],
        "contract": {"technicians": 5, "threshold_us": 0.85, "threshold_ld": 0.80,
                     "cap_fraction": 0.35, "fixed_fee": 10000.0, "annual_salary": 44000.0},
        "weather": {"weibull_shape": 2.0, "weibull_scale_ms": 9.5,
                    "wave_mean_m": 1.0, "wave_std_m": 0.6},
        "sim": {"horizon_days": 10, "startup_energy_mwh": 0.06, "samples": 1,
                "master_seed": 0,
                "price_curve": {"explicit": [50,50,50,50,50,50,50,50,50,50]}}
    }"#,
    )
    .expect("scripted config must validate");

    let wind = vec![9.0; 10];
    let env = DailyEnvironment {
        demand_mwh: derive_demand(&wind, &bundle.turbine, 2),
        wind_ms: wind,
        wave_m: vec![1.0; 10],
        price_eur_mwh: vec![50.0; 10],
    };
    let failures = vec![FailureEvent {
        turbine_id: 1,
        failure_mode_id: 1,
        occurrence_day: 3,
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let plan = build_drv(
        &failures,
        &env.wind_ms,
        &env.wave_m,
        &bundle.contract,
        &bundle.failures,
        &bundle.transports,
        &bundle.sim,
        &mut rng,
    );
    assert_eq!(plan.tasks[0].start_day, Some(3));
    assert_eq!(plan.tasks[0].completion_day, Some(4));

    let matrix = build_availability(&plan.tasks, 2, 10);
    let inputs = settlement_inputs(&bundle, &env, &plan.tasks, &matrix);
    let ledger = settle_terms(&inputs, &bundle.contract, 10);

    let close = |label: &str, got: f64, want: f64| {
        assert!(
            (got - want).abs() < 0.01,
            "{label}: got {got:.6}, hand value {want:.6}"
        );
    };
    close("energy sales", ledger.energy_sales, 53_873.417_722);
    close("shortage", ledger.shortage, 5_985.935_302);
    close("startup", ledger.startup, 3.0);
    close("materials", ledger.materials, 1_900.0);
    close("technician labor", ledger.technician_labor, 6_027.397_260);
    close("transport distance", ledger.transport_distance, 44.20);
    close("transport idle", ledger.transport_idle, 445.665);
    close("turbine penalty", ledger.xi_wt, 0.0);
    close("farm penalty", ledger.xi_wf, 0.0);
    close("generation penalty", ledger.xi_g, 0.0);
    close("liquidated damages", ledger.xi_ld, 0.0);
    close("upside sharing", ledger.xi_us, 3_169.024_572);
    close("owner profit", ledger.owner_profit, 32_815.457_847);
    close("contractor profit", ledger.contractor_profit, 6_651.762_312);
    close("generation", ledger.generation_mwh, 1_077.468_354);
    assert!((ledger.a_wf - 0.9).abs() < 1e-12);
    assert!((ledger.a_g - 0.9).abs() < 1e-12);
    close(
        "profit sum",
        ledger.owner_profit + ledger.contractor_profit,
        39_467.220_159,
    );

    // Variant with tight thresholds: damages hit the cap, no upside.
    let tight = ContractTerms {
        threshold_us: 0.95,
        threshold_ld: 0.95,
        ..bundle.contract.clone()
    };
    let capped = settle_terms(&inputs, &tight, 10);
    close("capped damages", capped.xi_ld, 3_500.0);
    close("no upside", capped.xi_us, 0.0);
    close("owner profit tight", capped.owner_profit, 39_484.482_419);
    close("contractor profit tight", capped.contractor_profit, -17.262_260);
    close(
        "profit sum tight",
        capped.owner_profit + capped.contractor_profit,
        39_467.220_159,
    );
    println!("PASS scripted ledger: 20 components within 0.01 EUR under both contract variants");
}

/// Criterion 4: transfers never exceed their caps and liquidated damages
/// vanish whenever every availability clears the threshold, across 10^4
/// randomized settlements.
#[test]
fn settlement_caps_bound_transfers() {
    let mut rng = ChaCha8Rng::seed_from_u64(417);
    let mut violations = 0u32;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=50usize);
        let a_wt: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let inputs = SettlementInputs {
            base_income: rng.random::<f64>() * 1.0e8,
            a_wf: rng.random::<f64>(),
            a_g: rng.random::<f64>(),
            a_wt,
            generation_mwh: rng.random::<f64>() * 1.0e6,
            shortage: rng.random::<f64>() * 1.0e7,
            startup: rng.random::<f64>() * 1.0e4,
            materials: rng.random::<f64>() * 1.0e6,
            transport_distance: rng.random::<f64>() * 1.0e5,
            transport_idle: rng.random::<f64>() * 1.0e5,
        };
        let contract = ContractTerms {
            technicians: rng.random_range(1..=60),
            threshold_us: 0.05 + rng.random::<f64>() * 0.94,
            threshold_ld: 0.05 + rng.random::<f64>() * 0.94,
            cap_fraction: rng.random::<f64>() * 1.5,
            fixed_fee: rng.random::<f64>() * 1.0e7,
            annual_salary: 44_000.0,
        };
        let cap = contract.cap_fraction * contract.fixed_fee;
        let ledger = settle_terms(&inputs, &contract, 180);
        if ledger.xi_ld > cap + 1e-9 || ledger.xi_us > cap + 1e-9 {
            violations += 1;
        }
        let all_above = inputs.a_wf >= contract.threshold_ld
            && inputs.a_g >= contract.threshold_ld
            && inputs.a_wt.iter().all(|a| *a >= contract.threshold_ld);
        if all_above && ledger.xi_ld != 0.0 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "{violations} cap or zero-penalty violations");
    println!("PASS settlement caps: 10000 randomized settlements, zero violations");
}

/// Criterion 5: on fixed realizations the sum of both parties' profits does
/// not move when the transfer terms (thresholds, cap) change at fixed crew.
#[test]
fn total_profit_invariant_to_transfer_terms() {
    let bundle = reference_bundle();
    let engine = ScenarioEngine::new(&bundle, bundle.sim.master_seed, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_rel: f64 = 0.0;
    for q in [7u32, 16, 31] {
        let inputs = engine.inputs_for_crew(q);
        let mut reference_total: Option<Vec<f64>> = None;
        for _ in 0..25 {
            let contract = ContractTerms {
                technicians: q,
                threshold_us: 0.30 + rng.random::<f64>() * 0.69,
                threshold_ld: 0.30 + rng.random::<f64>() * 0.69,
                cap_fraction: rng.random::<f64>() * 1.5,
                fixed_fee: 1.0e7,
                annual_salary: 44_000.0,
            };
            let totals: Vec<f64> = inputs
                .iter()
                .map(|i| {
                    let l = settle_terms(i, &contract, bundle.sim.horizon_days);
                    l.owner_profit + l.contractor_profit
                })
                .collect();
            match &reference_total {
                None => reference_total = Some(totals),
                Some(expected) => {
                    for (got, want) in totals.iter().zip(expected) {
                        let rel = (got - want).abs() / want.abs().max(1.0);
                        worst_rel = worst_rel.max(rel);
                        assert!(
                            rel < 1e-6,
                            "total moved under transfer-term change: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
    println!("PASS transfer symmetry: worst relative drift {worst_rel:.2e} across 75 contracts");
}

struct CrewSweep {
    cells: Vec<SweepCell>,
    elapsed_secs: f64,
}

/// Shared 2000-sample crew sweep for the two criteria below.
fn crew_sweep() -> &'static CrewSweep {
    static SWEEP: OnceLock<CrewSweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let bundle = reference_bundle();
        let axes = [SweepAxis {
            name: AxisName::Q,
            values: (7..=46).map(f64::from).collect(),
        }];
        let start = Instant::now();
        let result = sweep(&bundle, &axes, 2000, bundle.sim.master_seed);
        CrewSweep {
            cells: result.cells,
            elapsed_secs: start.elapsed().as_secs_f64(),
        }
    })
}

/// Criterion 6: across crew sizes 7..46 the owner's mean profit is
/// nondecreasing within confidence noise with diminishing increments, and
/// the contractor's mean profit peaks strictly inside the range, near the
/// reference staffing of 16.
#[test]
fn crew_sweep_has_expected_profit_shapes() {
    let sweep = crew_sweep();
    let cells = &sweep.cells;
    assert_eq!(cells.len(), 40);

    for pair in cells.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let slack = a.stats.owner_profit.ci95_half + b.stats.owner_profit.ci95_half;
        assert!(
            b.stats.owner_profit.mean >= a.stats.owner_profit.mean - slack,
            "owner profit drops beyond CI between Q={} and Q={}",
            a.q,
            b.q
        );
    }

    let increments: Vec<f64> = cells
        .windows(2)
        .map(|p| p[1].stats.owner_profit.mean - p[0].stats.owner_profit.mean)
        .collect();
    let half = increments.len() / 2;
    let first = increments[..half].iter().sum::<f64>() / half as f64;
    let second = increments[half..].iter().sum::<f64>() / (increments.len() - half) as f64;
    assert!(
        first > second,
        "owner increments do not diminish: first half {first:.0}, second half {second:.0}"
    );
    assert!(
        second > -20_000.0,
        "late owner increments strongly negative: {second:.0}"
    );

    let best = cells
        .iter()
        .enumerate()
        .max_by(|a, b| {
            a.1.stats
                .contractor_profit
                .mean
                .total_cmp(&b.1.stats.contractor_profit.mean)
        })
        .expect("nonempty sweep");
    let argmax_q = best.1.q;
    assert!(
        best.0 > 0 && best.0 < cells.len() - 1,
        "contractor argmax sits on the boundary at Q={argmax_q}"
    );
    assert!(
        (argmax_q as f64 - 16.0).abs() <= 6.0,
        "contractor argmax Q={argmax_q} outside 16 +/- 6"
    );
    assert!(
        sweep.elapsed_secs < 1800.0,
        "sweep took {:.0}s, budget 1800s",
        sweep.elapsed_secs
    );
    println!(
        "PASS crew sweep shapes: owner monotone (increments {:.0} -> {:.0}), contractor peak at Q={argmax_q}, {:.1}s",
        first, second, sweep.elapsed_secs
    );
}

/// Criterion 7: at 2000 samples the 95% margins of error for contractor
/// profit and generation stay at or below 5% of their means for every crew
/// size.
#[test]
fn crew_sweep_margins_of_error_are_small() {
    let sweep = crew_sweep();
    let mut worst_con: f64 = 0.0;
    let mut worst_gen: f64 = 0.0;
    for cell in &sweep.cells {
        let con = &cell.stats.contractor_profit;
        let gen = &cell.stats.generation_mwh;
        let con_ratio = con.ci95_half / con.mean.abs();
        let gen_ratio = gen.ci95_half / gen.mean.abs();
        assert!(
            con_ratio <= 0.05,
            "contractor margin {:.2}% at Q={}",
            con_ratio * 100.0,
            cell.q
        );
        assert!(
            gen_ratio <= 0.05,
            "generation margin {:.2}% at Q={}",
            gen_ratio * 100.0,
            cell.q
        );
        worst_con = worst_con.max(con_ratio);
        worst_gen = worst_gen.max(gen_ratio);
    }
    println!(
        "PASS margins of error: worst contractor {:.2}%, worst generation {:.2}%",
        worst_con * 100.0,
        worst_gen * 100.0
    );
}

/// Criterion 8: front extraction agrees exactly with a quadratic brute-force
/// dominance pass on 200 random objective clouds.
#[test]
fn front_extraction_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for cloud in 0..200 {
        let n = rng.random_range(1..=200usize);
        let mut points: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        // Exercise ties: sometimes clone an existing point.
        for i in 0..n {
            if rng.random::<f64>() < 0.1 {
                points[i] = points[rng.random_range(0..n)];
            }
        }

        let dominates = |a: [f64; 2], b: [f64; 2]| {
            a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
        };
        let mut expected: Vec<Vec<usize>> = Vec::new();
        let mut remaining: Vec<usize> = (0..n).collect();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|i| {
                    !remaining
                        .iter()
                        .any(|j| j != i && dominates(points[*j], points[*i]))
                })
                .collect();
            remaining.retain(|i| !front.contains(i));
            expected.push(front);
        }

        let mut got = non_dominated_fronts(&points);
        for front in &mut got {
            front.sort_unstable();
        }
        assert_eq!(got, expected, "front mismatch on cloud {cloud} with {n} points");
    }
    println!("PASS front extraction: 200 random clouds equal the brute-force ranking");
}

/// Criterion 9: on the analytic front obj2 = 1 - sqrt(obj1) the search
/// recovers at least 99% of the attainable hypervolume.
#[test]
fn ga_recovers_analytic_front() {
    let start = Instant::now();
    let params = GaParams {
        population: 200,
        crossover_fraction: 0.8,
        seed: 7,
        ..GaParams::default()
    };
    let specs = [GeneSpec::real("x", 0.0, 1.0)];
    let result = run_moga(|g| [g[0], 1.0 - g[0].sqrt()], &specs, &params);

    let objectives: Vec<[f64; 2]> = result.front.iter().map(|ind| ind.objectives).collect();
    let hv = hypervolume(&objectives, [1.1, 1.1]);
    let analytic = 0.1 + 2.0 / 3.0 + 0.11;
    let ratio = hv / analytic;
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        ratio > 0.99 && ratio < 1.0 + 1e-9,
        "hypervolume {hv:.6} is {:.2}% of analytic {analytic:.6}",
        ratio * 100.0
    );
    assert!(elapsed < 120.0, "took {elapsed:.1}s, budget 120s");
    println!(
        "PASS analytic front: hypervolume {:.2}% of optimum in {} generations, {elapsed:.1}s",
        ratio * 100.0,
        result.generations
    );
}

/// Criterion 10: the optimize command emits a mutually non-dominated front
/// inside the configured bounds, and the compromise rule picks the published
/// fourth solution on the reference front fixture.
#[test]
fn optimize_returns_bounded_front_and_compromise() {
    // Published reference front: (threshold pair, cap, crew, conflict, total).
    let fixture = [
        [6.0419e-06, 15_255_383.2],
        [0.001_040_61, 18_577_643.5],
        [1.9468e-05, 16_300_551.5],
        [0.036_274_16, 19_492_480.5],
        [0.428_392_38, 20_039_864.3],
        [0.000_627_19, 17_133_316.8],
        [0.743_254_35, 20_238_903.9],
        [0.232_653_78, 19_955_746.3],
        [0.093_290_32, 19_540_837.5],
        [0.014_395_29, 19_104_818.9],
        [0.004_064_44, 18_794_338.3],
    ];
    let minimized: Vec<[f64; 2]> = fixture.iter().map(|p| [p[0], -p[1]]).collect();
    assert_eq!(
        compromise_index(&minimized),
        Some(3),
        "compromise rule must select the fourth published solution"
    );

    let out = tempfile::tempdir().expect("tempdir");
    let status = Command::new(env!("CARGO_BIN_EXE_owf-sim"))
        .args([
            "optimize",
            "--config",
            reference_config_path().to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
            "--samples",
            "100",
            "--search-samples",
            "50",
            "--ga-population",
            "24",
            "--ga-generations",
            "8",
            "--ga-stall",
            "8",
        ])
        .stdout(std::process::Stdio::null())
        .status()
        .expect("spawn optimize");
    assert!(status.success(), "optimize exited with {status}");

    let csv = std::fs::read_to_string(out.path().join("pareto.csv")).expect("pareto.csv");
    let mut rows: Vec<[f64; 6]> = Vec::new();
    for line in csv.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 6, "unexpected pareto.csv row: {line}");
        rows.push([
            fields[0], fields[1], fields[2], fields[3], fields[4], fields[5],
        ]);
    }
    assert!(!rows.is_empty(), "empty front");
    for row in &rows {
        assert!((0.50..=0.85).contains(&row[0]), "threshold_us {} out of bounds", row[0]);
        assert!((0.60..=0.95).contains(&row[1]), "threshold_ld {} out of bounds", row[1]);
        assert!((0.25..=1.15).contains(&row[2]), "cap fraction {} out of bounds", row[2]);
        assert!((7.0..=46.0).contains(&row[3]), "crew {} out of bounds", row[3]);
    }
    let dominates =
        |a: &[f64; 6], b: &[f64; 6]| a[4] <= b[4] && -a[5] <= -b[5] && (a[4] < b[4] || a[5] > b[5]);
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            assert!(
                i == j || !dominates(a, b),
                "returned front is not mutually non-dominated: row {i} dominates row {j}"
            );
        }
    }
    println!(
        "PASS optimize: {} bounded non-dominated solutions, compromise fixture selects index 3",
        rows.len()
    );
}

fn collect_files(dir: &Path, into: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).expect("read_dir") {
        let path = entry.expect("entry").path();
        if path.is_dir() {
            collect_files(&path, into);
        } else {
            into.push(path);
        }
    }
}

/// Compare two run directories: every data file byte-identical, manifests
/// identical except the wall-clock timestamp.
fn assert_runs_identical(a: &Path, b: &Path) {
    let mut files_a = Vec::new();
    collect_files(a, &mut files_a);
    files_a.sort();
    assert!(!files_a.is_empty());
    for file_a in &files_a {
        let rel = file_a.strip_prefix(a).unwrap();
        let file_b = b.join(rel);
        let bytes_a = std::fs::read(file_a).expect("read first run");
        let bytes_b = std::fs::read(&file_b)
            .unwrap_or_else(|_| panic!("second run missing {}", rel.display()));
        if rel == Path::new("manifest.json") {
            let mut ja: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
            let mut jb: serde_json::Value = serde_json::from_slice(&bytes_b).unwrap();
            ja.as_object_mut().unwrap().remove("timestamp");
            jb.as_object_mut().unwrap().remove("timestamp");
            assert_eq!(ja, jb, "manifests differ beyond timestamp");
        } else {
            assert_eq!(
                bytes_a,
                bytes_b,
                "{} differs between reruns",
                rel.display()
            );
        }
    }
}

/// Criterion 11: rerunning any command with the same inputs reproduces every
/// data file byte for byte, independent of the thread count.
#[test]
fn reruns_produce_byte_identical_outputs() {
    let config = reference_config_path();
    let config = config.to_str().unwrap();
    let bin = env!("CARGO_BIN_EXE_owf-sim");
    let run = |args: &[&str]| {
        let dir = tempfile::tempdir().expect("tempdir");
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawn");
        assert!(status.success(), "{args:?} exited with {status}");
        dir
    };

    let sim = ["simulate", "--config", config, "--samples", "200"];
    let a = run(&sim);
    let b = run(&sim);
    assert_runs_identical(a.path(), b.path());

    let sweep_one = [
        "sweep", "--config", config, "--samples", "100", "--axis", "q=12:16:2", "--threads", "1",
    ];
    let sweep_four = [
        "sweep", "--config", config, "--samples", "100", "--axis", "q=12:16:2", "--threads", "4",
    ];
    let c = run(&sweep_one);
    let d = run(&sweep_four);
    assert_runs_identical(c.path(), d.path());

    let opt = [
        "optimize",
        "--config",
        config,
        "--samples",
        "60",
        "--search-samples",
        "30",
        "--ga-population",
        "12",
        "--ga-generations",
        "4",
        "--ga-stall",
        "4",
    ];
    let e = run(&opt);
    let mut opt_threaded: Vec<&str> = opt.to_vec();
    opt_threaded.extend_from_slice(&["--threads", "3"]);
    let f = run(&opt_threaded);
    assert_runs_identical(e.path(), f.path());

    println!("PASS determinism: simulate, sweep and optimize reruns byte-identical across thread counts");
}
