//! Turbine energy production and availability accounting.
//!
//! Downtime is tracked at day resolution: a turbine is either up or down for
//! a whole day. Three availability metrics summarize a realization: the farm
//! time-based mean, per-turbine time-based means, and an energy-weighted
//! (generation) availability.

use crate::model::TurbineSpec;
use crate::scheduler::MaintenanceTask;
use std::io::{self, Write};

/// Binary up/down state per turbine and day. `true` means available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityMatrix {
    n_turbines: usize,
    horizon_days: usize,
    // Row-major: index (w-1) * horizon + (t-1).
    cells: Vec<bool>,
}

impl AvailabilityMatrix {
    /// All-available matrix for `n_turbines` over `horizon_days`.
    pub fn new_all_up(n_turbines: usize, horizon_days: usize) -> Self {
        Self {
            n_turbines,
            horizon_days,
            cells: vec![true; n_turbines * horizon_days],
        }
    }

    pub fn n_turbines(&self) -> usize {
        self.n_turbines
    }

    pub fn horizon_days(&self) -> usize {
        self.horizon_days
    }

    /// State of turbine `turbine` (1-based) on day `day` (1-based).
    pub fn is_up(&self, turbine: u32, day: u32) -> bool {
        self.cells[self.index(turbine, day)]
    }

    /// Mark turbine `turbine` down on days `from..=to` (1-based, clamped to
    /// the horizon).
    pub fn mark_down(&mut self, turbine: u32, from: u32, to: u32) {
        let to = to.min(self.horizon_days as u32);
        for day in from..=to {
            let i = self.index(turbine, day);
            self.cells[i] = false;
        }
    }

    fn index(&self, turbine: u32, day: u32) -> usize {
        debug_assert!(turbine >= 1 && turbine as usize <= self.n_turbines);
        debug_assert!(day >= 1 && day as usize <= self.horizon_days);
        (turbine as usize - 1) * self.horizon_days + (day as usize - 1)
    }
}

/// Energy one turbine produces over a full day at daily mean wind speed
/// `wind_ms`, in MWh.
///
/// Cubic interpolation between cut-in and rated speed, rated power between
/// rated and cut-out, zero below cut-in and at or above cut-out. Production
/// runs around the clock (24 h), unlike maintenance shifts.
pub fn energy_per_day(wind_ms: f64, spec: &TurbineSpec) -> f64 {
    let power_kw = if wind_ms < spec.cut_in_speed || wind_ms >= spec.cut_out_speed {
        0.0
    } else if wind_ms < spec.rated_speed {
        let num = wind_ms.powi(3) - spec.cut_in_speed.powi(3);
        let den = spec.rated_speed.powi(3) - spec.cut_in_speed.powi(3);
        spec.rated_power_kw * num / den
    } else {
        spec.rated_power_kw
    };
    power_kw * 24.0 / 1000.0
}

/// Build the availability matrix implied by a scheduled task list.
///
/// Every failure takes its turbine down from the occurrence day through the
/// completion day of its repair; a task that never got scheduled leaves the
/// turbine down through the end of the horizon.
pub fn build_availability(
    tasks: &[MaintenanceTask],
    n_turbines: usize,
    horizon_days: u32,
) -> AvailabilityMatrix {
    let mut matrix = AvailabilityMatrix::new_all_up(n_turbines, horizon_days as usize);
    for task in tasks {
        let from = task.event.occurrence_day;
        let to = task.completion_day.unwrap_or(horizon_days);
        matrix.mark_down(task.event.turbine_id, from, to);
    }
    matrix
}

/// Farm time-based availability: mean of all turbine-day states.
pub fn farm_availability(matrix: &AvailabilityMatrix) -> f64 {
    let up = matrix.cells.iter().filter(|c| **c).count();
    up as f64 / matrix.cells.len() as f64
}

/// Time-based availability per turbine, indexed `turbine_id - 1`.
pub fn turbine_availability(matrix: &AvailabilityMatrix) -> Vec<f64> {
    (1..=matrix.n_turbines as u32)
        .map(|w| {
            let up = (1..=matrix.horizon_days as u32)
                .filter(|t| matrix.is_up(w, *t))
                .count();
            up as f64 / matrix.horizon_days as f64
        })
        .collect()
}

/// Energy-weighted availability: produced energy over producible energy.
///
/// `daily_energy_mwh[t-1]` is the per-turbine production potential on day
/// `t`; identical for every turbine since they share one wind series. A
/// horizon with zero producible energy counts as fully available.
pub fn energy_availability(matrix: &AvailabilityMatrix, daily_energy_mwh: &[f64]) -> f64 {
    let mut produced = 0.0;
    let mut producible = 0.0;
    for w in 1..=matrix.n_turbines as u32 {
        for t in 1..=matrix.horizon_days as u32 {
            let g = daily_energy_mwh[t as usize - 1];
            producible += g;
            if matrix.is_up(w, t) {
                produced += g;
            }
        }
    }
    if producible == 0.0 {
        1.0
    } else {
        produced / producible
    }
}

/// Write the matrix as CSV: one row per turbine, one 0/1 column per day.
pub fn write_availability_csv<W: Write>(matrix: &AvailabilityMatrix, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    write!(out, "turbine")?;
    for t in 1..=matrix.horizon_days {
        write!(out, ",day_{t}")?;
    }
    writeln!(out)?;
    for w in 1..=matrix.n_turbines as u32 {
        write!(out, "{w}")?;
        for t in 1..=matrix.horizon_days as u32 {
            write!(out, ",{}", matrix.is_up(w, t) as u8)?;
        }
        writeln!(out)?;
    }
    out.flush()
}
