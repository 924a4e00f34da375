//! Seeded sampling of the simulation environment: wind, waves, electricity
//! prices, failure arrivals, and the demand envelope.
//!
//! Every random quantity comes from its own substream, keyed by
//! `(master_seed, sample_index, purpose)`. Substreams make common random
//! numbers work: two contract candidates evaluated on the same master seed
//! and sample index see byte-identical weather, prices and failures, so
//! profit differences between candidates are never sampling artifacts.
//! Streams also never interact: drawing failures cannot shift the wind
//! series, because each purpose owns an independent generator.

use crate::availability::energy_per_day;
use crate::model::{FailureMode, PriceCurve, TurbineSpec, ValidatedBundle, WeatherModel};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Weibull};
use sha2::{Digest, Sha256};
use std::io::{self, Write};

/// The independent random streams a sample draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Wind = 1,
    Wave = 2,
    Price = 3,
    Failures = 4,
    Scheduler = 5,
}

/// Deterministic generator for one `(master_seed, sample_index, purpose)`
/// triple. Distinct triples give independent streams; the same triple always
/// reproduces the same stream, on every platform.
pub fn substream(master_seed: u64, sample_index: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&sample_index.to_le_bytes());
    seed[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    seed[24..32].copy_from_slice(b"owfsim01");
    ChaCha8Rng::from_seed(seed)
}

/// Derive a fresh master seed from an existing one and a purpose tag, for
/// runs that must not share streams with the original (for example the final
/// re-evaluation of an optimized front).
pub fn derive_seed(master_seed: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[0..8].try_into().expect("digest is 32 bytes"))
}

/// One sampled day-by-day environment realization. All vectors have horizon
/// length and are indexed `day - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyEnvironment {
    /// Daily mean wind speed, m/s.
    pub wind_ms: Vec<f64>,
    /// Daily significant wave height, m.
    pub wave_m: Vec<f64>,
    /// Daily electricity price, EUR/MWh.
    pub price_eur_mwh: Vec<f64>,
    /// Contracted demand: what the farm would produce at full availability, MWh.
    pub demand_mwh: Vec<f64>,
}

/// One sampled failure: a turbine, a catalog mode, and the day it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureEvent {
    /// 1-based turbine id.
    pub turbine_id: u32,
    /// 1-based failure catalog id.
    pub failure_mode_id: u32,
    /// 1-based day in the horizon.
    pub occurrence_day: u32,
}

/// Sample daily wind speeds (Weibull) and wave heights (Gaussian, clamped at
/// zero) for `horizon_days` days.
pub fn sample_weather(
    weather: &WeatherModel,
    horizon_days: u32,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<f64>) {
    let weibull = Weibull::new(weather.weibull_scale_ms, weather.weibull_shape)
        .expect("validated weather parameters");
    let wind: Vec<f64> = (0..horizon_days).map(|_| weibull.sample(rng)).collect();
    let wave: Vec<f64> = if weather.wave_std_m == 0.0 {
        vec![weather.wave_mean_m; horizon_days as usize]
    } else {
        let normal = Normal::new(weather.wave_mean_m, weather.wave_std_m)
            .expect("validated weather parameters");
        (0..horizon_days)
            .map(|_| normal.sample(rng).max(0.0))
            .collect()
    };
    (wind, wave)
}

/// Sample daily prices: an explicit curve is returned verbatim, a lognormal
/// model draws i.i.d. prices whose arithmetic mean matches the configured
/// mean.
pub fn sample_prices(curve: &PriceCurve, horizon_days: u32, rng: &mut impl Rng) -> Vec<f64> {
    match curve {
        PriceCurve::Explicit(prices) => prices.clone(),
        PriceCurve::Lognormal { mean_eur_mwh, sigma } => {
            if *sigma == 0.0 {
                return vec![*mean_eur_mwh; horizon_days as usize];
            }
            // exp(mu + sigma^2/2) = mean, so mu = ln(mean) - sigma^2/2.
            let mu = mean_eur_mwh.ln() - sigma * sigma / 2.0;
            let lognormal = LogNormal::new(mu, *sigma).expect("validated price parameters");
            (0..horizon_days).map(|_| lognormal.sample(rng)).collect()
        }
    }
}

/// Sample failure arrivals: one Bernoulli draw per (day, turbine, mode), in
/// that nesting order, so events come out sorted by day then turbine id.
pub fn sample_failures(
    catalog: &[FailureMode],
    n_turbines: u32,
    horizon_days: u32,
    rng: &mut impl Rng,
) -> Vec<FailureEvent> {
    for mode in catalog {
        debug_assert!(
            (0.0..=1.0).contains(&mode.daily_rate),
            "daily_rate must be validated before sampling"
        );
    }
    let mut events = Vec::new();
    for day in 1..=horizon_days {
        for turbine in 1..=n_turbines {
            for mode in catalog {
                if rng.random::<f64>() < mode.daily_rate {
                    events.push(FailureEvent {
                        turbine_id: turbine,
                        failure_mode_id: mode.id,
                        occurrence_day: day,
                    });
                }
            }
        }
    }
    events
}

/// Demand envelope: what all turbines together would produce each day at
/// full availability. Availability contracts settle shortage against this.
pub fn derive_demand(wind_ms: &[f64], spec: &TurbineSpec, n_turbines: usize) -> Vec<f64> {
    wind_ms
        .iter()
        .map(|w| n_turbines as f64 * energy_per_day(*w, spec))
        .collect()
}

/// Sample the full environment for one `(master_seed, sample_index)` pair.
pub fn sample_environment(
    bundle: &ValidatedBundle,
    master_seed: u64,
    sample_index: u64,
) -> DailyEnvironment {
    let horizon = bundle.sim.horizon_days;
    let mut wind_rng = substream(master_seed, sample_index, StreamPurpose::Wind);
    let mut wave_rng = substream(master_seed, sample_index, StreamPurpose::Wave);
    let mut price_rng = substream(master_seed, sample_index, StreamPurpose::Price);
    // Wind and wave use distinct generators; interleaving within
    // sample_weather is avoided by drawing wind fully first.
    let weibull = Weibull::new(bundle.weather.weibull_scale_ms, bundle.weather.weibull_shape)
        .expect("validated weather parameters");
    let wind_ms: Vec<f64> = (0..horizon).map(|_| weibull.sample(&mut wind_rng)).collect();
    let wave_m: Vec<f64> = if bundle.weather.wave_std_m == 0.0 {
        vec![bundle.weather.wave_mean_m; horizon as usize]
    } else {
        let normal = Normal::new(bundle.weather.wave_mean_m, bundle.weather.wave_std_m)
            .expect("validated weather parameters");
        (0..horizon)
            .map(|_| normal.sample(&mut wave_rng).max(0.0))
            .collect()
    };
    let price_eur_mwh = sample_prices(&bundle.sim.price_curve, horizon, &mut price_rng);
    let demand_mwh = derive_demand(&wind_ms, &bundle.turbine, bundle.farm.len());
    DailyEnvironment {
        wind_ms,
        wave_m,
        price_eur_mwh,
        demand_mwh,
    }
}

/// Sample the failure events for one `(master_seed, sample_index)` pair.
pub fn sample_failures_for(
    bundle: &ValidatedBundle,
    master_seed: u64,
    sample_index: u64,
) -> Vec<FailureEvent> {
    let mut rng = substream(master_seed, sample_index, StreamPurpose::Failures);
    sample_failures(
        &bundle.failures,
        bundle.farm.len() as u32,
        bundle.sim.horizon_days,
        &mut rng,
    )
}

/// Write the environment as CSV with header
/// `day,wind_ms,wave_m,price_eur_mwh,demand_mwh`.
pub fn write_environment_csv<W: Write>(env: &DailyEnvironment, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "day,wind_ms,wave_m,price_eur_mwh,demand_mwh")?;
    for t in 0..env.wind_ms.len() {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.2},{:.6}",
            t + 1,
            env.wind_ms[t],
            env.wave_m[t],
            env.price_eur_mwh[t],
            env.demand_mwh[t]
        )?;
    }
    out.flush()
}

/// Write failure events as CSV with header `turbine,mode,day`.
pub fn write_failures_csv<W: Write>(events: &[FailureEvent], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "turbine,mode,day")?;
    for e in events {
        writeln!(out, "{},{},{}", e.turbine_id, e.failure_mode_id, e.occurrence_day)?;
    }
    out.flush()
}
