//! Monte Carlo engine: single samples, scenario statistics, and contract
//! sweeps.
//!
//! Sampling uses common random numbers: every random stream is keyed by
//! `(master_seed, sample_index)` and never by contract terms, so two
//! contracts evaluated on the same seed face exactly the same weather,
//! prices and failures. The environment and the dispatch plan depend on the
//! crew size only; thresholds and caps enter in the closed-form settlement.
//! [`ScenarioEngine`] exploits that split: it samples the physical
//! realizations once and re-settles them per contract, which makes dense
//! term sweeps and the optimizer cheap.
//!
//! All aggregation runs in a fixed order regardless of the thread count, so
//! results are bit-identical under any parallelism.

use crate::availability::build_availability;
use crate::economics::{settle_terms, CashflowLedger, SettlementInputs};
use crate::model::{ContractTerms, ValidatedBundle};
use crate::scheduler::{build_drv, DispatchPlan};
use crate::stochastic::{
    sample_environment, sample_failures_for, substream, DailyEnvironment, FailureEvent,
    StreamPurpose,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Everything one sample produced; returned by [`run_sample`] for export and
/// inspection.
#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub environment: DailyEnvironment,
    pub failures: Vec<FailureEvent>,
    pub plan: DispatchPlan,
    pub matrix: crate::availability::AvailabilityMatrix,
    pub ledger: CashflowLedger,
}

/// Run the full pipeline for one `(master_seed, sample_index)` pair:
/// environment, failures, dispatch, availability, settlement.
pub fn run_sample(
    bundle: &ValidatedBundle,
    contract: &ContractTerms,
    master_seed: u64,
    sample_index: u64,
) -> SampleOutcome {
    let environment = sample_environment(bundle, master_seed, sample_index);
    let failures = sample_failures_for(bundle, master_seed, sample_index);
    let mut scheduler_rng = substream(master_seed, sample_index, StreamPurpose::Scheduler);
    let plan = build_drv(
        &failures,
        &environment.wind_ms,
        &environment.wave_m,
        contract,
        &bundle.failures,
        &bundle.transports,
        &bundle.sim,
        &mut scheduler_rng,
    );
    let matrix = build_availability(&plan.tasks, bundle.farm.len(), bundle.sim.horizon_days);
    let inputs = crate::economics::settlement_inputs(bundle, &environment, &plan.tasks, &matrix);
    let ledger = settle_terms(&inputs, contract, bundle.sim.horizon_days);
    SampleOutcome {
        environment,
        failures,
        plan,
        matrix,
        ledger,
    }
}

/// Mean, sample standard deviation, and 95% confidence half-width
/// (`1.96 * std / sqrt(n)`) of one metric across samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std_dev: f64,
    pub ci95_half: f64,
}

impl MetricStats {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        MetricStats {
            mean,
            std_dev,
            ci95_half: 1.96 * std_dev / n.sqrt(),
        }
    }
}

/// Monte Carlo summary of one contract under one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub samples: u32,
    pub owner_profit: MetricStats,
    pub contractor_profit: MetricStats,
    pub total_profit: MetricStats,
    pub farm_availability: MetricStats,
    pub energy_availability: MetricStats,
    pub generation_mwh: MetricStats,
    /// Min-max scaled profits; filled when a sweep provides the scaling
    /// context, absent for standalone runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub owner_profit_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contractor_profit_scaled: Option<f64>,
}

fn stats_from_ledgers(ledgers: &[CashflowLedger]) -> ScenarioStats {
    let mut owner = Vec::with_capacity(ledgers.len());
    let mut contractor = Vec::with_capacity(ledgers.len());
    let mut total = Vec::with_capacity(ledgers.len());
    let mut a_wf = Vec::with_capacity(ledgers.len());
    let mut a_g = Vec::with_capacity(ledgers.len());
    let mut generation = Vec::with_capacity(ledgers.len());
    for ledger in ledgers {
        owner.push(ledger.owner_profit);
        contractor.push(ledger.contractor_profit);
        total.push(ledger.owner_profit + ledger.contractor_profit);
        a_wf.push(ledger.a_wf);
        a_g.push(ledger.a_g);
        generation.push(ledger.generation_mwh);
    }
    ScenarioStats {
        samples: ledgers.len() as u32,
        owner_profit: MetricStats::from_values(&owner),
        contractor_profit: MetricStats::from_values(&contractor),
        total_profit: MetricStats::from_values(&total),
        farm_availability: MetricStats::from_values(&a_wf),
        energy_availability: MetricStats::from_values(&a_g),
        generation_mwh: MetricStats::from_values(&generation),
        owner_profit_scaled: None,
        contractor_profit_scaled: None,
    }
}

fn stats_from_inputs(
    inputs: &[SettlementInputs],
    contract: &ContractTerms,
    horizon_days: u32,
) -> ScenarioStats {
    let ledgers: Vec<CashflowLedger> = inputs
        .iter()
        .map(|input| settle_terms(input, contract, horizon_days))
        .collect();
    stats_from_ledgers(&ledgers)
}

/// Precomputed physical realizations for a `(bundle, master_seed, samples)`
/// triple. Environments and failures are shared by every contract; dispatch
/// outcomes are recomputed per crew size.
pub struct ScenarioEngine<'a> {
    bundle: &'a ValidatedBundle,
    master_seed: u64,
    environments: Vec<DailyEnvironment>,
    failures: Vec<Vec<FailureEvent>>,
}

impl<'a> ScenarioEngine<'a> {
    pub fn new(bundle: &'a ValidatedBundle, master_seed: u64, samples: u32) -> Self {
        let environments: Vec<DailyEnvironment> = (0..samples as u64)
            .into_par_iter()
            .map(|s| sample_environment(bundle, master_seed, s))
            .collect();
        let failures: Vec<Vec<FailureEvent>> = (0..samples as u64)
            .into_par_iter()
            .map(|s| sample_failures_for(bundle, master_seed, s))
            .collect();
        ScenarioEngine {
            bundle,
            master_seed,
            environments,
            failures,
        }
    }

    pub fn samples(&self) -> u32 {
        self.environments.len() as u32
    }

    pub fn bundle(&self) -> &ValidatedBundle {
        self.bundle
    }

    /// Settlement inputs per sample for a crew of `technicians`.
    pub fn inputs_for_crew(&self, technicians: u32) -> Vec<SettlementInputs> {
        let mut contract = self.bundle.contract.clone();
        contract.technicians = technicians;
        (0..self.environments.len())
            .into_par_iter()
            .map(|s| {
                let env = &self.environments[s];
                let mut scheduler_rng =
                    substream(self.master_seed, s as u64, StreamPurpose::Scheduler);
                let plan = build_drv(
                    &self.failures[s],
                    &env.wind_ms,
                    &env.wave_m,
                    &contract,
                    &self.bundle.failures,
                    &self.bundle.transports,
                    &self.bundle.sim,
                    &mut scheduler_rng,
                );
                let matrix = build_availability(
                    &plan.tasks,
                    self.bundle.farm.len(),
                    self.bundle.sim.horizon_days,
                );
                crate::economics::settlement_inputs(self.bundle, env, &plan.tasks, &matrix)
            })
            .collect()
    }

    /// Scenario statistics for one contract.
    pub fn stats_for(&self, contract: &ContractTerms) -> ScenarioStats {
        let inputs = self.inputs_for_crew(contract.technicians);
        stats_from_inputs(&inputs, contract, self.bundle.sim.horizon_days)
    }
}

/// Monte Carlo statistics for one contract: `samples` runs under
/// `master_seed`.
pub fn run_scenario(
    bundle: &ValidatedBundle,
    contract: &ContractTerms,
    samples: u32,
    master_seed: u64,
) -> ScenarioStats {
    ScenarioEngine::new(bundle, master_seed, samples).stats_for(contract)
}

/// Like [`run_scenario`] but also returns every sample's settled ledger, in
/// sample order.
pub fn run_scenario_with_ledgers(
    bundle: &ValidatedBundle,
    contract: &ContractTerms,
    samples: u32,
    master_seed: u64,
) -> (ScenarioStats, Vec<CashflowLedger>) {
    let engine = ScenarioEngine::new(bundle, master_seed, samples);
    let inputs = engine.inputs_for_crew(contract.technicians);
    let ledgers: Vec<CashflowLedger> = inputs
        .iter()
        .map(|input| settle_terms(input, contract, bundle.sim.horizon_days))
        .collect();
    (stats_from_ledgers(&ledgers), ledgers)
}

/// Min-max scaling context for owner and contractor profits, built from a
/// grid of evaluated contracts. Scaled profits make the two parties
/// comparable when their absolute profit ranges differ by orders of
/// magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingContext {
    pub owner_min: f64,
    pub owner_max: f64,
    pub contractor_min: f64,
    pub contractor_max: f64,
}

impl ScalingContext {
    /// Context from (owner mean, contractor mean) pairs.
    pub fn from_grid(points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut ctx = ScalingContext {
            owner_min: f64::INFINITY,
            owner_max: f64::NEG_INFINITY,
            contractor_min: f64::INFINITY,
            contractor_max: f64::NEG_INFINITY,
        };
        for (own, con) in points {
            ctx.owner_min = ctx.owner_min.min(own);
            ctx.owner_max = ctx.owner_max.max(own);
            ctx.contractor_min = ctx.contractor_min.min(con);
            ctx.contractor_max = ctx.contractor_max.max(con);
        }
        ctx
    }

    /// A party's axis is degenerate when its grid had no spread; scaled
    /// values on that axis are all zero.
    pub fn is_degenerate(&self) -> bool {
        self.owner_max <= self.owner_min || self.contractor_max <= self.contractor_min
    }

    /// Scale an owner profit to [0, 1] over the grid range.
    pub fn scale_owner(&self, profit: f64) -> f64 {
        scale(profit, self.owner_min, self.owner_max)
    }

    /// Scale a contractor profit to [0, 1] over the grid range.
    pub fn scale_contractor(&self, profit: f64) -> f64 {
        scale(profit, self.contractor_min, self.contractor_max)
    }
}

fn scale(value: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        0.0
    } else {
        ((value - min) / (max - min)).clamp(0.0, 1.0)
    }
}

/// Fill scaled profits across a set of (owner mean, contractor mean) pairs.
/// Returns the per-pair scaled values and the context; a degenerate axis
/// scales to all zeros (callers should surface the accompanying warning).
pub fn scale_profits(points: &[(f64, f64)]) -> (Vec<(f64, f64)>, ScalingContext) {
    let ctx = ScalingContext::from_grid(points.iter().copied());
    let scaled = points
        .iter()
        .map(|(own, con)| (ctx.scale_owner(*own), ctx.scale_contractor(*con)))
        .collect();
    (scaled, ctx)
}

/// A sweep axis: which contract knob varies and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Q,
    RUs,
    RLd,
    Lambda,
}

impl AxisName {
    pub fn parse(name: &str) -> Option<AxisName> {
        match name {
            "q" => Some(AxisName::Q),
            "r_us" => Some(AxisName::RUs),
            "r_ld" => Some(AxisName::RLd),
            "lambda" => Some(AxisName::Lambda),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AxisName::Q => "q",
            AxisName::RUs => "r_us",
            AxisName::RLd => "r_ld",
            AxisName::Lambda => "lambda",
        }
    }
}

/// One evaluated grid cell: the full contract point plus its statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub q: u32,
    pub r_us: f64,
    pub r_ld: f64,
    pub lambda: f64,
    pub stats: ScenarioStats,
}

/// Best crew size per combination of the non-crew axes, for each party and
/// for the sum; the argmax traces drawn over profit surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxRow {
    pub r_us: f64,
    pub r_ld: f64,
    pub lambda: f64,
    pub q_best_owner: u32,
    pub q_best_contractor: u32,
    pub q_best_total: u32,
}

/// A full Cartesian sweep outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    /// Row-major over the axes, in the order given.
    pub cells: Vec<SweepCell>,
    pub scaling: ScalingContext,
    pub scaling_degenerate: bool,
    /// Present when a crew axis was swept.
    pub argmax: Vec<ArgmaxRow>,
}

/// Evaluate the Cartesian product of `axes` around the bundle's base
/// contract, under common random numbers, and scale profits over the grid.
pub fn sweep(
    bundle: &ValidatedBundle,
    axes: &[SweepAxis],
    samples: u32,
    master_seed: u64,
) -> SweepResult {
    let engine = ScenarioEngine::new(bundle, master_seed, samples);
    // Contract points for every cell, row-major over the axes.
    let mut points: Vec<ContractTerms> = vec![bundle.contract.clone()];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for point in &points {
            for value in &axis.values {
                let mut c = point.clone();
                match axis.name {
                    AxisName::Q => c.technicians = value.round() as u32,
                    AxisName::RUs => c.threshold_us = *value,
                    AxisName::RLd => c.threshold_ld = *value,
                    AxisName::Lambda => c.cap_fraction = *value,
                }
                next.push(c);
            }
        }
        points = next;
    }

    // Physical inputs per distinct crew size, computed once each.
    let mut crews: Vec<u32> = points.iter().map(|c| c.technicians).collect();
    crews.sort_unstable();
    crews.dedup();
    let mut cells: Vec<Option<SweepCell>> = vec![None; points.len()];
    for crew in crews {
        let inputs = engine.inputs_for_crew(crew);
        for (i, contract) in points.iter().enumerate() {
            if contract.technicians == crew {
                let stats = stats_from_inputs(&inputs, contract, bundle.sim.horizon_days);
                cells[i] = Some(SweepCell {
                    q: contract.technicians,
                    r_us: contract.threshold_us,
                    r_ld: contract.threshold_ld,
                    lambda: contract.cap_fraction,
                    stats,
                });
            }
        }
    }
    let mut cells: Vec<SweepCell> = cells.into_iter().map(|c| c.expect("cell filled")).collect();

    let (scaled, scaling) = scale_profits(
        &cells
            .iter()
            .map(|c| (c.stats.owner_profit.mean, c.stats.contractor_profit.mean))
            .collect::<Vec<_>>(),
    );
    for (cell, (own, con)) in cells.iter_mut().zip(scaled) {
        cell.stats.owner_profit_scaled = Some(own);
        cell.stats.contractor_profit_scaled = Some(con);
    }

    let argmax = argmax_rows(&cells);

    SweepResult {
        axes: axes.to_vec(),
        cells,
        scaling_degenerate: scaling.is_degenerate(),
        scaling,
        argmax,
    }
}

fn argmax_rows(cells: &[SweepCell]) -> Vec<ArgmaxRow> {
    let mut groups: Vec<((u64, u64, u64), Vec<&SweepCell>)> = Vec::new();
    for cell in cells {
        let key = (
            cell.r_us.to_bits(),
            cell.r_ld.to_bits(),
            cell.lambda.to_bits(),
        );
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(cell),
            None => groups.push((key, vec![cell])),
        }
    }
    let mut rows = Vec::new();
    for (_, members) in groups {
        if members.len() < 2 {
            continue;
        }
        rows.push(ArgmaxRow {
            r_us: members[0].r_us,
            r_ld: members[0].r_ld,
            lambda: members[0].lambda,
            q_best_owner: pick_best(&members, |c| c.stats.owner_profit.mean),
            q_best_contractor: pick_best(&members, |c| c.stats.contractor_profit.mean),
            q_best_total: pick_best(&members, |c| c.stats.total_profit.mean),
        });
    }
    rows
}

fn pick_best(members: &[&SweepCell], metric: impl Fn(&SweepCell) -> f64) -> u32 {
    let mut best = members[0];
    for m in &members[1..] {
        if metric(m) > metric(best) {
            best = m;
        }
    }
    best.q
}

/// Write one scenario's statistics as pretty JSON.
pub fn write_stats_json<W: Write>(stats: &ScenarioStats, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, stats)?;
    writeln!(out)
}

/// Write a sweep as CSV: one row per cell with the contract point, profit
/// means and confidence half-widths, availabilities and scaled profits.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(
        out,
        "q,r_us,r_ld,lambda,owner_profit_mean,owner_profit_ci95,contractor_profit_mean,\
         contractor_profit_ci95,total_profit_mean,total_profit_ci95,farm_availability_mean,\
         energy_availability_mean,generation_mwh_mean,generation_mwh_ci95,\
         owner_profit_scaled,contractor_profit_scaled"
    )?;
    for c in &result.cells {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            c.q,
            c.r_us,
            c.r_ld,
            c.lambda,
            c.stats.owner_profit.mean,
            c.stats.owner_profit.ci95_half,
            c.stats.contractor_profit.mean,
            c.stats.contractor_profit.ci95_half,
            c.stats.total_profit.mean,
            c.stats.total_profit.ci95_half,
            c.stats.farm_availability.mean,
            c.stats.energy_availability.mean,
            c.stats.generation_mwh.mean,
            c.stats.generation_mwh.ci95_half,
            c.stats.owner_profit_scaled.unwrap_or(0.0),
            c.stats.contractor_profit_scaled.unwrap_or(0.0),
        )?;
    }
    out.flush()
}

/// Write the argmax traces as CSV.
pub fn write_argmax_csv<W: Write>(rows: &[ArgmaxRow], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(
        out,
        "r_us,r_ld,lambda,q_best_owner,q_best_contractor,q_best_total"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{},{},{}",
            r.r_us, r.r_ld, r.lambda, r.q_best_owner, r.q_best_contractor, r.q_best_total
        )?;
    }
    out.flush()
}

/// Write per-metric plot data: the axis coordinates of every cell plus one
/// value column. `metric` picks the column.
pub fn write_plot_csv<W: Write>(
    result: &SweepResult,
    metric: &str,
    out: W,
) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    let value = |c: &SweepCell| -> f64 {
        match metric {
            "owner_profit" => c.stats.owner_profit.mean,
            "contractor_profit" => c.stats.contractor_profit.mean,
            "total_profit" => c.stats.total_profit.mean,
            "owner_profit_scaled" => c.stats.owner_profit_scaled.unwrap_or(0.0),
            "contractor_profit_scaled" => c.stats.contractor_profit_scaled.unwrap_or(0.0),
            "farm_availability" => c.stats.farm_availability.mean,
            "energy_availability" => c.stats.energy_availability.mean,
            _ => f64::NAN,
        }
    };
    let labels: Vec<&str> = result.axes.iter().map(|a| a.name.label()).collect();
    writeln!(out, "{},{}", labels.join(","), metric)?;
    for c in &result.cells {
        let mut coords = Vec::with_capacity(labels.len());
        for axis in &result.axes {
            let v = match axis.name {
                AxisName::Q => c.q as f64,
                AxisName::RUs => c.r_us,
                AxisName::RLd => c.r_ld,
                AxisName::Lambda => c.lambda,
            };
            coords.push(format!("{v:.6}"));
        }
        writeln!(out, "{},{:.6}", coords.join(","), value(c))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_config;

    fn test_config(samples: u32, horizon: u32) -> String {
        format!(
            r#"{{
              "farm": {{"distances_km": [10.0, 20.0, 15.0]}},
              "turbine": {{"rated_power_kw": 8000.0}},
              "failures": [
                {{"id": 1, "name": "minor repair", "daily_rate": 0.004,
                  "repair_hours": 11.0, "material_cost": 1900.0,
                  "required_technicians": 2.0}},
                {{"id": 2, "name": "major repair", "daily_rate": 0.001,
                  "repair_hours": 30.0, "material_cost": 20000.0,
                  "required_technicians": 3.0}}
              ],
              "transports": [
                {{"name": "ctv", "speed_ms": 10.2, "hourly_cost": 81.03,
                  "per_km_cost": 2.21, "use_rate": 1.0,
                  "max_wind_access_ms": 10.0, "max_wave_access_m": 1.5}}
              ],
              "contract": {{"technicians": 5, "threshold_us": 0.85,
                "threshold_ld": 0.75, "cap_fraction": 0.35,
                "fixed_fee": 10000.0, "annual_salary": 44000.0}},
              "weather": {{"weibull_shape": 2.0, "weibull_scale_ms": 9.5,
                "wave_mean_m": 1.0, "wave_std_m": 0.6}},
              "sim": {{"horizon_days": {horizon}, "startup_energy_mwh": 0.06,
                "samples": {samples}, "master_seed": 42,
                "price_curve": {{"lognormal": {{"mean_eur_mwh": 55.0, "sigma": 0.2}}}}}}
            }}"#
        )
    }

    fn test_bundle(samples: u32, horizon: u32) -> crate::model::ValidatedBundle {
        validate_config(&test_config(samples, horizon)).expect("test config valid")
    }

    #[test]
    fn run_scenario_is_deterministic() {
        let bundle = test_bundle(16, 30);
        let a = run_scenario(&bundle, &bundle.contract, 16, 42);
        let b = run_scenario(&bundle, &bundle.contract, 16, 42);
        assert_eq!(a, b);
        let c = run_scenario(&bundle, &bundle.contract, 16, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn contracts_share_the_same_random_environment() {
        let bundle = test_bundle(4, 30);
        let mut other = bundle.contract.clone();
        other.technicians = 12;
        other.cap_fraction = 1.0;
        let a = run_sample(&bundle, &bundle.contract, 7, 3);
        let b = run_sample(&bundle, &other, 7, 3);
        assert_eq!(a.environment.wind_ms, b.environment.wind_ms);
        assert_eq!(a.environment.wave_m, b.environment.wave_m);
        assert_eq!(a.environment.price_eur_mwh, b.environment.price_eur_mwh);
        assert_eq!(a.failures, b.failures);
    }

    #[test]
    fn scenario_stats_match_per_sample_runs() {
        let bundle = test_bundle(8, 30);
        let stats = run_scenario(&bundle, &bundle.contract, 8, 42);
        let mut owner = Vec::new();
        for s in 0..8 {
            owner.push(run_sample(&bundle, &bundle.contract, 42, s).ledger.owner_profit);
        }
        let mean = owner.iter().sum::<f64>() / owner.len() as f64;
        assert!((stats.owner_profit.mean - mean).abs() < 1e-9 * mean.abs().max(1.0));
        assert_eq!(stats.samples, 8);
    }

    #[test]
    fn confidence_interval_shrinks_with_sample_count() {
        let bundle = test_bundle(64, 30);
        let small = run_scenario(&bundle, &bundle.contract, 64, 42);
        let large = run_scenario(&bundle, &bundle.contract, 256, 42);
        let ratio = large.total_profit.ci95_half / small.total_profit.ci95_half;
        // Expected 1/2 from quadrupling n; allow estimator noise.
        assert!(ratio > 0.3 && ratio < 0.75, "ratio {ratio}");
    }

    #[test]
    fn totals_are_the_sum_of_party_profits() {
        let bundle = test_bundle(16, 30);
        let outcome = run_sample(&bundle, &bundle.contract, 42, 5);
        let sum = outcome.ledger.owner_profit + outcome.ledger.contractor_profit;
        let stats = run_scenario(&bundle, &bundle.contract, 16, 42);
        assert!(
            (stats.total_profit.mean
                - (stats.owner_profit.mean + stats.contractor_profit.mean))
                .abs()
                < 1e-6
        );
        assert!(sum.is_finite());
    }

    #[test]
    fn scaling_maps_grid_extremes_to_unit_interval() {
        let (scaled, ctx) = scale_profits(&[(10.0, 5.0), (20.0, 5.0), (30.0, 5.0)]);
        assert_eq!(scaled[0].0, 0.0);
        assert_eq!(scaled[1].0, 0.5);
        assert_eq!(scaled[2].0, 1.0);
        // Contractor axis had no spread: degenerate, all zeros.
        assert!(ctx.is_degenerate());
        assert!(scaled.iter().all(|(_, con)| *con == 0.0));
    }

    #[test]
    fn scaling_clamps_out_of_grid_values() {
        let ctx = ScalingContext::from_grid([(0.0, 0.0), (10.0, 10.0)]);
        assert_eq!(ctx.scale_owner(-5.0), 0.0);
        assert_eq!(ctx.scale_owner(15.0), 1.0);
        assert_eq!(ctx.scale_contractor(2.5), 0.25);
    }

    #[test]
    fn sweep_covers_the_grid_row_major() {
        let bundle = test_bundle(4, 20);
        let axes = vec![
            SweepAxis {
                name: AxisName::Q,
                values: vec![2.0, 4.0],
            },
            SweepAxis {
                name: AxisName::Lambda,
                values: vec![0.3, 0.5],
            },
        ];
        let result = sweep(&bundle, &axes, 4, 42);
        assert_eq!(result.cells.len(), 4);
        let coords: Vec<(u32, f64)> = result.cells.iter().map(|c| (c.q, c.lambda)).collect();
        assert_eq!(coords, vec![(2, 0.3), (2, 0.5), (4, 0.3), (4, 0.5)]);
        // Non-swept knobs come from the base contract.
        assert!(result.cells.iter().all(|c| c.r_us == 0.85 && c.r_ld == 0.75));
        for cell in &result.cells {
            let own = cell.stats.owner_profit_scaled.unwrap();
            let con = cell.stats.contractor_profit_scaled.unwrap();
            assert!((0.0..=1.0).contains(&own));
            assert!((0.0..=1.0).contains(&con));
        }
        // Two lambda groups, each with a crew axis to maximize over.
        assert_eq!(result.argmax.len(), 2);
        for row in &result.argmax {
            assert!(row.q_best_owner == 2 || row.q_best_owner == 4);
        }
    }

    #[test]
    fn sweep_matches_standalone_scenarios() {
        let bundle = test_bundle(6, 20);
        let axes = vec![SweepAxis {
            name: AxisName::Q,
            values: vec![3.0, 5.0],
        }];
        let result = sweep(&bundle, &axes, 6, 42);
        let mut contract = bundle.contract.clone();
        contract.technicians = 3;
        let standalone = run_scenario(&bundle, &contract, 6, 42);
        assert_eq!(result.cells[0].stats.owner_profit, standalone.owner_profit);
        assert_eq!(
            result.cells[0].stats.contractor_profit,
            standalone.contractor_profit
        );
    }

    #[test]
    fn sweep_csv_has_one_row_per_cell() {
        let bundle = test_bundle(4, 20);
        let axes = vec![SweepAxis {
            name: AxisName::Lambda,
            values: vec![0.3, 0.5, 0.7],
        }];
        let result = sweep(&bundle, &axes, 4, 42);
        let mut buf = Vec::new();
        write_sweep_csv(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("q,r_us,r_ld,lambda,owner_profit_mean"));

        let mut plot = Vec::new();
        write_plot_csv(&result, "owner_profit", &mut plot).unwrap();
        let plot = String::from_utf8(plot).unwrap();
        assert_eq!(plot.lines().next().unwrap(), "lambda,owner_profit");
        assert_eq!(plot.lines().count(), 4);
    }

    #[test]
    fn axis_names_round_trip() {
        for (text, name) in [
            ("q", AxisName::Q),
            ("r_us", AxisName::RUs),
            ("r_ld", AxisName::RLd),
            ("lambda", AxisName::Lambda),
        ] {
            assert_eq!(AxisName::parse(text), Some(name));
            assert_eq!(name.label(), text);
        }
        assert_eq!(AxisName::parse("bogus"), None);
    }
}
