//! Configuration model: wind farm, failure catalog, contract terms, transports,
//! weather and simulation settings, plus JSON loading and validation.
//!
//! A config file is a single JSON object with the top-level keys `farm`,
//! `turbine`, `failures`, `transports`, `contract`, `weather` and `sim`.
//! [`validate_config`] parses and cross-checks it into a [`ValidatedBundle`];
//! all downstream code consumes only validated bundles.

use serde::{Deserialize, Serialize};
use std::path::Path;

/// Errors produced while loading or validating a configuration.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    /// A field violated an invariant; `field` is a dotted path into the JSON.
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Power curve parameters shared by every turbine in the farm.
///
/// Speeds are in m/s, rated power in kW. Daily energy is produced by
/// [`crate::availability::energy_per_day`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub rated_power_kw: f64,
    /// Cut-in speed; no production below this.
    #[serde(default = "default_cut_in")]
    pub cut_in_speed: f64,
    /// Rated speed; full rated power from here up to cut-out.
    #[serde(default = "default_rated")]
    pub rated_speed: f64,
    /// Cut-out speed; production stops at and above this.
    #[serde(default = "default_cut_out")]
    pub cut_out_speed: f64,
}

fn default_cut_in() -> f64 {
    4.0
}

fn default_rated() -> f64 {
    13.0
}

fn default_cut_out() -> f64 {
    25.0
}

/// One turbine position, reduced to what the model needs: its distance to the
/// maintenance base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turbine {
    /// 1-based turbine id; ids are contiguous and ordered.
    pub id: u32,
    /// Travel distance from the maintenance base, km.
    pub base_distance_km: f64,
}

/// The farm as an ordered list of turbines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFarm {
    pub turbines: Vec<Turbine>,
}

impl WindFarm {
    pub fn len(&self) -> usize {
        self.turbines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turbines.is_empty()
    }
}

/// One corrective failure mode from the failure catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureMode {
    /// 1-based catalog id; referenced by sampled failure events.
    pub id: u32,
    pub name: String,
    /// Probability that this mode fails on a given turbine on a given day.
    pub daily_rate: f64,
    /// Total hands-on repair time, hours.
    pub repair_hours: f64,
    /// Material cost per repair, EUR; paid by the owner.
    pub material_cost: f64,
    /// Technicians required for the whole repair; fractional config values
    /// are rounded up at load time.
    pub required_technicians: u32,
}

/// Performance-based contract terms between owner and contractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractTerms {
    /// Technician crew size the contractor staffs for the whole horizon.
    pub technicians: u32,
    /// Energy-availability threshold above which upside sharing is paid.
    pub threshold_us: f64,
    /// Availability threshold used by all three liquidated-damage penalties.
    pub threshold_ld: f64,
    /// Both transfer caps are `cap_fraction * fixed_fee`.
    pub cap_fraction: f64,
    /// Fixed service fee for the evaluation period, EUR. No default: it must
    /// be configured explicitly.
    pub fixed_fee: f64,
    /// Annual salary per technician, EUR.
    pub annual_salary: f64,
}

/// A maintenance transport option (crew transfer vessel, field support
/// vessel, helicopter, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    pub name: String,
    /// Cruise speed, m/s. Kept for reporting; costs are driven by the two
    /// unit costs below.
    pub speed_ms: f64,
    /// Cost per hour the transport idles at the turbine, EUR/h.
    pub hourly_cost: f64,
    /// Cost per km travelled, EUR/km.
    pub per_km_cost: f64,
    /// Long-run share of repairs served by this transport; shares sum to 1.
    pub use_rate: f64,
    /// Maximum wind speed that still allows turbine access, m/s (inclusive).
    pub max_wind_access_ms: f64,
    /// Maximum significant wave height that still allows access, m (inclusive).
    pub max_wave_access_m: f64,
}

/// Marginal weather distributions; days are sampled i.i.d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherModel {
    pub weibull_shape: f64,
    /// Weibull scale for daily mean wind speed, m/s.
    pub weibull_scale_ms: f64,
    /// Mean of the Gaussian wave-height model, m.
    pub wave_mean_m: f64,
    /// Std dev of the wave-height model, m; draws are clamped at zero.
    pub wave_std_m: f64,
}

/// Electricity price model. `Explicit` must supply one price per horizon day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceCurve {
    Explicit(Vec<f64>),
    Lognormal {
        /// Arithmetic mean of the daily price, EUR/MWh.
        mean_eur_mwh: f64,
        /// Std dev of the underlying normal (log-space).
        sigma: f64,
    },
}

/// Order in which same-horizon repair tasks are offered to the scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// First-in-first-out by (occurrence day, turbine id). Default.
    Fifo,
    /// Seeded random permutation of the FIFO order.
    RandomOrder,
}

/// How a transport is assigned to each repair task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportPolicy {
    /// Every task uses the primary transport (highest use rate). Default.
    CtvOnly,
    /// Draw per task from the categorical use-rate distribution.
    SampleUseRate,
}

/// Horizon, units, seeding and policy knobs for a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Evaluation period length T, days.
    pub horizon_days: u32,
    /// Technician shift length used to convert repair hours to days.
    #[serde(default = "default_workday")]
    pub hours_per_workday: f64,
    /// Energy drawn from the grid to restart one turbine, MWh.
    pub startup_energy_mwh: f64,
    /// Default Monte Carlo sample count.
    pub samples: u32,
    /// Master seed; all random streams derive from it.
    pub master_seed: u64,
    pub price_curve: PriceCurve,
    /// Days between failure occurrence and earliest repair start.
    #[serde(default)]
    pub mobilization_lag_days: u32,
    #[serde(default = "default_order_policy")]
    pub order_policy: OrderPolicy,
    #[serde(default = "default_transport_policy")]
    pub transport_policy: TransportPolicy,
}

fn default_workday() -> f64 {
    8.0
}

fn default_order_policy() -> OrderPolicy {
    OrderPolicy::Fifo
}

fn default_transport_policy() -> TransportPolicy {
    TransportPolicy::CtvOnly
}

/// A fully validated configuration; the only input the simulation layers
/// accept. Serializing it yields canonical JSON that re-validates to an
/// identical bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedBundle {
    pub farm: WindFarm,
    pub turbine: TurbineSpec,
    pub failures: Vec<FailureMode>,
    pub transports: Vec<TransportSpec>,
    pub contract: ContractTerms,
    pub weather: WeatherModel,
    pub sim: SimConfig,
}

impl ValidatedBundle {
    /// Canonical JSON form; parsing it back yields an equal bundle.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialization cannot fail")
    }

    /// Index of the primary transport (highest use rate, first on ties).
    pub fn primary_transport(&self) -> usize {
        let mut best = 0;
        for (i, t) in self.transports.iter().enumerate() {
            if t.use_rate > self.transports[best].use_rate {
                best = i;
            }
        }
        best
    }
}

// Raw (pre-validation) schema. `farm` accepts a generated layout, a bare
// distance list, or explicit turbine records (the canonical form).
// `required_technicians` is fractional here and rounded up during validation.

#[derive(Deserialize)]
struct RawConfig {
    farm: RawFarm,
    turbine: TurbineSpec,
    failures: Vec<RawFailureMode>,
    transports: Vec<TransportSpec>,
    contract: ContractTerms,
    weather: WeatherModel,
    sim: SimConfig,
}

#[derive(Deserialize)]
struct RawFarm {
    #[serde(default)]
    layout: Option<LayoutSpec>,
    #[serde(default)]
    distances_km: Option<Vec<f64>>,
    #[serde(default)]
    turbines: Option<Vec<Turbine>>,
}

/// Parameters for [`default_layout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSpec {
    /// Number of turbines.
    pub n: u32,
    /// Distance from the maintenance base to the farm centre, km.
    pub distance_to_center_km: f64,
    /// Farm footprint, km^2.
    pub area_km2: f64,
}

#[derive(Deserialize)]
struct RawFailureMode {
    id: u32,
    name: String,
    daily_rate: f64,
    repair_hours: f64,
    material_cost: f64,
    required_technicians: f64,
}

/// Deterministic rectangular-grid distances for an `n`-turbine farm whose
/// centre sits `distance_to_center_km` from the maintenance base and whose
/// footprint covers `area_km2`.
///
/// Turbines sit at the cell centres of a near-square grid filling a rectangle
/// of the given area, in row-major order; the returned value for each is its
/// straight-line distance to the base. Pure: no randomness, no config access.
pub fn default_layout(n: u32, distance_to_center_km: f64, area_km2: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as u32;
    let rows = n.div_ceil(cols);
    // Rectangle side ratio cols:rows keeps grid cells square.
    let width = (area_km2 * cols as f64 / rows as f64).sqrt();
    let height = if width > 0.0 { area_km2 / width } else { 0.0 };
    let mut distances = Vec::with_capacity(n as usize);
    'outer: for r in 0..rows {
        for c in 0..cols {
            if distances.len() == n as usize {
                break 'outer;
            }
            let x = distance_to_center_km - width / 2.0
                + (c as f64 + 0.5) * width / cols as f64;
            let y = -height / 2.0 + (r as f64 + 0.5) * height / rows as f64;
            distances.push(x.hypot(y));
        }
    }
    distances
}

/// Parse and validate a JSON configuration string.
pub fn validate_config(json: &str) -> Result<ValidatedBundle, ConfigError> {
    let raw: RawConfig = serde_json::from_str(json)?;
    build_bundle(raw)
}

/// Read, parse and validate a configuration file.
pub fn load_config(path: &Path) -> Result<ValidatedBundle, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    validate_config(&text)
}

fn build_bundle(raw: RawConfig) -> Result<ValidatedBundle, ConfigError> {
    let farm = build_farm(raw.farm)?;
    validate_turbine(&raw.turbine)?;
    let failures = build_failures(raw.failures)?;
    validate_transports(&raw.transports)?;
    validate_contract(&raw.contract)?;
    validate_weather(&raw.weather)?;
    validate_sim(&raw.sim)?;
    Ok(ValidatedBundle {
        farm,
        turbine: raw.turbine,
        failures,
        transports: raw.transports,
        contract: raw.contract,
        weather: raw.weather,
        sim: raw.sim,
    })
}

fn build_farm(raw: RawFarm) -> Result<WindFarm, ConfigError> {
    let given = raw.layout.is_some() as u8
        + raw.distances_km.is_some() as u8
        + raw.turbines.is_some() as u8;
    if given != 1 {
        return Err(invalid(
            "farm",
            "exactly one of layout, distances_km or turbines must be given",
        ));
    }
    let turbines: Vec<Turbine> = if let Some(layout) = raw.layout {
        if layout.n == 0 {
            return Err(invalid("farm.layout.n", "at least one turbine required"));
        }
        if layout.distance_to_center_km < 0.0 {
            return Err(invalid("farm.layout.distance_to_center_km", "must be >= 0"));
        }
        if layout.area_km2 < 0.0 {
            return Err(invalid("farm.layout.area_km2", "must be >= 0"));
        }
        default_layout(layout.n, layout.distance_to_center_km, layout.area_km2)
            .into_iter()
            .enumerate()
            .map(|(i, d)| Turbine {
                id: i as u32 + 1,
                base_distance_km: d,
            })
            .collect()
    } else if let Some(distances) = raw.distances_km {
        distances
            .into_iter()
            .enumerate()
            .map(|(i, d)| Turbine {
                id: i as u32 + 1,
                base_distance_km: d,
            })
            .collect()
    } else {
        raw.turbines.unwrap()
    };
    if turbines.is_empty() {
        return Err(invalid("farm", "at least one turbine required"));
    }
    for (i, t) in turbines.iter().enumerate() {
        if t.id != i as u32 + 1 {
            return Err(invalid(
                &format!("farm.turbines[{i}].id"),
                format!("ids must be contiguous from 1; expected {}", i + 1),
            ));
        }
        if !(t.base_distance_km >= 0.0) || !t.base_distance_km.is_finite() {
            return Err(invalid(
                &format!("farm.turbines[{i}].base_distance_km"),
                "must be a finite value >= 0",
            ));
        }
    }
    Ok(WindFarm { turbines })
}

fn validate_turbine(t: &TurbineSpec) -> Result<(), ConfigError> {
    if !(t.rated_power_kw > 0.0) {
        return Err(invalid("turbine.rated_power_kw", "must be > 0"));
    }
    if !(t.cut_in_speed >= 0.0) {
        return Err(invalid("turbine.cut_in_speed", "must be >= 0"));
    }
    if !(t.cut_in_speed < t.rated_speed && t.rated_speed < t.cut_out_speed) {
        return Err(invalid(
            "turbine",
            "speeds must satisfy cut_in < rated < cut_out",
        ));
    }
    Ok(())
}

fn build_failures(raw: Vec<RawFailureMode>) -> Result<Vec<FailureMode>, ConfigError> {
    if raw.is_empty() {
        return Err(invalid("failures", "at least one failure mode required"));
    }
    let mut failures = Vec::with_capacity(raw.len());
    for (i, f) in raw.into_iter().enumerate() {
        let path = |field: &str| format!("failures[{i}].{field}");
        if f.id != i as u32 + 1 {
            return Err(invalid(
                &path("id"),
                format!("ids must be contiguous from 1; expected {}", i + 1),
            ));
        }
        if !(0.0..=1.0).contains(&f.daily_rate) {
            return Err(invalid(
                &path("daily_rate"),
                "must be a probability in [0, 1]",
            ));
        }
        if !(f.repair_hours > 0.0) {
            return Err(invalid(&path("repair_hours"), "must be > 0"));
        }
        if !(f.material_cost >= 0.0) {
            return Err(invalid(&path("material_cost"), "must be >= 0"));
        }
        if !(f.required_technicians > 0.0) {
            return Err(invalid(&path("required_technicians"), "must be > 0"));
        }
        failures.push(FailureMode {
            id: f.id,
            name: f.name,
            daily_rate: f.daily_rate,
            repair_hours: f.repair_hours,
            material_cost: f.material_cost,
            required_technicians: f.required_technicians.ceil() as u32,
        });
    }
    Ok(failures)
}

fn validate_transports(transports: &[TransportSpec]) -> Result<(), ConfigError> {
    if transports.is_empty() {
        return Err(invalid("transports", "at least one transport required"));
    }
    let mut total_use = 0.0;
    for (i, t) in transports.iter().enumerate() {
        let path = |field: &str| format!("transports[{i}].{field}");
        if !(t.speed_ms > 0.0) {
            return Err(invalid(&path("speed_ms"), "must be > 0"));
        }
        if !(t.hourly_cost >= 0.0) {
            return Err(invalid(&path("hourly_cost"), "must be >= 0"));
        }
        if !(t.per_km_cost >= 0.0) {
            return Err(invalid(&path("per_km_cost"), "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&t.use_rate) {
            return Err(invalid(&path("use_rate"), "must be in [0, 1]"));
        }
        if !(t.max_wind_access_ms >= 0.0) {
            return Err(invalid(&path("max_wind_access_ms"), "must be >= 0"));
        }
        if !(t.max_wave_access_m >= 0.0) {
            return Err(invalid(&path("max_wave_access_m"), "must be >= 0"));
        }
        total_use += t.use_rate;
    }
    if (total_use - 1.0).abs() > 1e-9 {
        return Err(invalid(
            "transports",
            format!("use rates must sum to 1, got {total_use}"),
        ));
    }
    Ok(())
}

fn validate_contract(c: &ContractTerms) -> Result<(), ConfigError> {
    if c.technicians < 1 {
        return Err(invalid("contract.technicians", "must be >= 1"));
    }
    if !(c.threshold_us > 0.0 && c.threshold_us <= 1.0) {
        return Err(invalid("contract.threshold_us", "must be in (0, 1]"));
    }
    if !(c.threshold_ld > 0.0 && c.threshold_ld <= 1.0) {
        return Err(invalid("contract.threshold_ld", "must be in (0, 1]"));
    }
    if !(c.cap_fraction >= 0.0) {
        return Err(invalid("contract.cap_fraction", "must be >= 0"));
    }
    if !(c.fixed_fee >= 0.0) {
        return Err(invalid("contract.fixed_fee", "must be >= 0"));
    }
    if !(c.annual_salary >= 0.0) {
        return Err(invalid("contract.annual_salary", "must be >= 0"));
    }
    Ok(())
}

fn validate_weather(w: &WeatherModel) -> Result<(), ConfigError> {
    if !(w.weibull_shape > 0.0) {
        return Err(invalid("weather.weibull_shape", "must be > 0"));
    }
    if !(w.weibull_scale_ms > 0.0) {
        return Err(invalid("weather.weibull_scale_ms", "must be > 0"));
    }
    if !(w.wave_mean_m >= 0.0) {
        return Err(invalid("weather.wave_mean_m", "must be >= 0"));
    }
    if !(w.wave_std_m >= 0.0) {
        return Err(invalid("weather.wave_std_m", "must be >= 0"));
    }
    Ok(())
}

fn validate_sim(s: &SimConfig) -> Result<(), ConfigError> {
    if s.horizon_days < 1 {
        return Err(invalid("sim.horizon_days", "must be >= 1"));
    }
    if !(s.hours_per_workday > 0.0 && s.hours_per_workday <= 24.0) {
        return Err(invalid("sim.hours_per_workday", "must be in (0, 24]"));
    }
    if !(s.startup_energy_mwh >= 0.0) {
        return Err(invalid("sim.startup_energy_mwh", "must be >= 0"));
    }
    if s.samples < 1 {
        return Err(invalid("sim.samples", "must be >= 1"));
    }
    match &s.price_curve {
        PriceCurve::Explicit(prices) => {
            if prices.len() != s.horizon_days as usize {
                return Err(invalid(
                    "sim.price_curve.explicit",
                    format!(
                        "needs one price per day: got {}, horizon is {}",
                        prices.len(),
                        s.horizon_days
                    ),
                ));
            }
            if let Some(i) = prices.iter().position(|p| !(*p >= 0.0)) {
                return Err(invalid(
                    &format!("sim.price_curve.explicit[{i}]"),
                    "must be >= 0",
                ));
            }
        }
        PriceCurve::Lognormal { mean_eur_mwh, sigma } => {
            if !(*mean_eur_mwh > 0.0) {
                return Err(invalid("sim.price_curve.lognormal.mean_eur_mwh", "must be > 0"));
            }
            if !(*sigma >= 0.0) {
                return Err(invalid("sim.price_curve.lognormal.sigma", "must be >= 0"));
            }
        }
    }
    Ok(())
}
