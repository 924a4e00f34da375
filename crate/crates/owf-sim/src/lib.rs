//! Seeded Monte Carlo simulation of corrective maintenance for offshore
//! wind farms under performance-based service contracts, plus multi-objective
//! search over the contract terms themselves.
//!
//! The pipeline, bottom to top:
//!
//! * [`model`] parses and validates the JSON configuration into a
//!   [`model::ValidatedBundle`], the only input every other layer accepts.
//! * [`stochastic`] draws the per-sample environment (wind, waves, prices)
//!   and failure arrivals from independent, reproducible random substreams.
//! * [`scheduler`] turns failures into a dispatch plan: a greedy
//!   first-in-first-out schedule constrained by weather access windows and
//!   the technician ledger.
//! * [`availability`] converts the plan into a per-turbine up/down matrix
//!   and the availability indicators measured against it.
//! * [`economics`] settles one realization into both parties' cashflow
//!   ledgers: energy sales, penalties, the upside-sharing bonus, and costs.
//! * [`simulator`] runs seeded Monte Carlo scenarios and contract sweeps
//!   under common random numbers.
//! * [`optimizer`] searches the contract space with an elitist genetic
//!   algorithm and reports the Pareto front plus a compromise solution.
//! * [`cli`] wires everything into the `owf-sim` binary.
//!
//! Determinism is a contract: every public entry point that consumes
//! randomness takes an explicit seed, and equal seeds give bit-identical
//! results regardless of thread count.

pub mod availability;
pub mod cli;
pub mod economics;
pub mod model;
pub mod optimizer;
pub mod scheduler;
pub mod simulator;
pub mod stochastic;

/// Compiles and runs every code example in the guide (and the README) as
/// doctests, so the prose can never drift from the library.
#[cfg(doctest)]
mod book {
    macro_rules! doc_check {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }

    doc_check!(Readme, "../../../README.md");
    doc_check!(Introduction, "../../../book/src/introduction.md");
    doc_check!(Configuration, "../../../book/src/configuration.md");
    doc_check!(Environment, "../../../book/src/environment.md");
    doc_check!(Scheduling, "../../../book/src/scheduling.md");
    doc_check!(Availability, "../../../book/src/availability.md");
    doc_check!(Economics, "../../../book/src/economics.md");
    doc_check!(MonteCarlo, "../../../book/src/monte-carlo.md");
    doc_check!(Optimization, "../../../book/src/optimization.md");
    doc_check!(Cli, "../../../book/src/cli.md");
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::model::ValidatedBundle;

    /// A small three-turbine bundle for cross-module tests.
    pub fn test_bundle(samples: u32, horizon: u32) -> ValidatedBundle {
        let config = format!(
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
        );
        crate::model::validate_config(&config).expect("test config valid")
    }
}
