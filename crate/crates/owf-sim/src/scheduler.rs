//! Corrective maintenance scheduling: turns sampled failures into a dispatch
//! plan (one row per repair) under technician capacity and weather access
//! constraints.
//!
//! The dispatcher is greedy and first-in-first-out: failures are processed in
//! (occurrence day, turbine id) order and each takes the earliest start day
//! whose whole repair window has enough idle technicians and accessible
//! weather for the task's transport. Repairs are contiguous: once started
//! they hold their technicians through completion. A failure with no feasible
//! window inside the horizon stays unscheduled and its turbine stays down to
//! the end of the horizon.

use crate::model::{
    ContractTerms, FailureMode, OrderPolicy, SimConfig, TransportPolicy, TransportSpec,
};
use crate::stochastic::FailureEvent;
use rand::seq::SliceRandom;
use rand::{Rng, RngExt};
use std::io::{self, Write};

/// One failure with its scheduling outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MaintenanceTask {
    pub event: FailureEvent,
    pub required_technicians: u32,
    /// Hands-on repair time from the failure catalog, hours.
    pub repair_hours: f64,
    /// Whole workdays the repair occupies, `ceil(repair_hours / workday)`,
    /// at least 1.
    pub repair_days: u32,
    /// Index into the transport list.
    pub transport_index: usize,
    /// First repair day, if a feasible window was found.
    pub start_day: Option<u32>,
    /// Last repair day: `start_day + repair_days - 1`.
    pub completion_day: Option<u32>,
    /// Idle technicians on the start day, measured before this task claimed
    /// its crew. Reported in the dispatch CSV.
    pub available_on_start: Option<u32>,
}

impl MaintenanceTask {
    pub fn is_scheduled(&self) -> bool {
        self.start_day.is_some()
    }
}

/// Idle technician count per day (index `day - 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TechnicianLedger {
    pub available: Vec<u32>,
}

impl TechnicianLedger {
    pub fn new(technicians: u32, horizon_days: u32) -> Self {
        Self {
            available: vec![technicians; horizon_days as usize],
        }
    }

    pub fn available_on(&self, day: u32) -> u32 {
        self.available[day as usize - 1]
    }

    fn can_host(&self, start: u32, days: u32, needed: u32) -> bool {
        (start..start + days).all(|d| self.available[d as usize - 1] >= needed)
    }

    fn claim(&mut self, start: u32, days: u32, needed: u32) {
        for d in start..start + days {
            self.available[d as usize - 1] -= needed;
        }
    }
}

/// A failure mode that can never be scheduled because it needs more
/// technicians than the contract staffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerWarning {
    pub failure_mode_id: u32,
    pub required_technicians: u32,
    pub crew_size: u32,
}

/// The dispatch plan for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchPlan {
    /// One task per failure, in processing order.
    pub tasks: Vec<MaintenanceTask>,
    pub ledger: TechnicianLedger,
    pub warnings: Vec<SchedulerWarning>,
}

/// Workdays needed for `repair_hours` of hands-on work at
/// `hours_per_workday` per day; a repair always occupies at least one day.
pub fn repair_days(repair_hours: f64, hours_per_workday: f64) -> u32 {
    ((repair_hours / hours_per_workday).ceil() as u32).max(1)
}

/// True when every day in `start_day..=end_day` (1-based, inclusive) is
/// accessible for `transport`: wind and wave at or below its limits. An
/// empty range is vacuously accessible.
pub fn weather_window_ok(
    start_day: u32,
    end_day: u32,
    wind_ms: &[f64],
    wave_m: &[f64],
    transport: &TransportSpec,
) -> bool {
    (start_day..=end_day).all(|d| {
        wind_ms[d as usize - 1] <= transport.max_wind_access_ms
            && wave_m[d as usize - 1] <= transport.max_wave_access_m
    })
}

/// Pick a transport for one task: the primary one under `CtvOnly`, or a
/// seeded draw from the use-rate distribution under `SampleUseRate`.
pub fn assign_transport(
    policy: TransportPolicy,
    transports: &[TransportSpec],
    primary_index: usize,
    rng: &mut impl Rng,
) -> usize {
    match policy {
        TransportPolicy::CtvOnly => primary_index,
        TransportPolicy::SampleUseRate => {
            let u: f64 = rng.random();
            let mut cumulative = 0.0;
            for (i, t) in transports.iter().enumerate() {
                cumulative += t.use_rate;
                if u < cumulative {
                    return i;
                }
            }
            transports.len() - 1
        }
    }
}

/// Build the dispatch plan for one failure realization.
///
/// `scheduler_rng` is consumed only by the optional policies (random order,
/// sampled transports), so default-policy plans do not depend on it.
pub fn build_drv(
    failures: &[FailureEvent],
    wind_ms: &[f64],
    wave_m: &[f64],
    contract: &ContractTerms,
    catalog: &[FailureMode],
    transports: &[TransportSpec],
    sim: &SimConfig,
    scheduler_rng: &mut impl Rng,
) -> DispatchPlan {
    let horizon = sim.horizon_days;
    let mut order: Vec<usize> = (0..failures.len()).collect();
    // FIFO key; sampled failures already arrive in this order, but the plan
    // must not depend on caller ordering.
    order.sort_by_key(|i| (failures[*i].occurrence_day, failures[*i].turbine_id));
    if sim.order_policy == OrderPolicy::RandomOrder {
        order.shuffle(scheduler_rng);
    }

    let primary = {
        let mut best = 0;
        for (i, t) in transports.iter().enumerate() {
            if t.use_rate > transports[best].use_rate {
                best = i;
            }
        }
        best
    };

    // Length of the contiguous accessible run starting each day, per
    // transport: lets the scan below test a whole repair window in O(1).
    let need_all = sim.transport_policy == TransportPolicy::SampleUseRate;
    let access_runs: Vec<Option<Vec<u32>>> = transports
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if !need_all && i != primary {
                return None;
            }
            let mut runs = vec![0u32; horizon as usize];
            let mut run = 0u32;
            for d in (0..horizon as usize).rev() {
                if wind_ms[d] <= t.max_wind_access_ms && wave_m[d] <= t.max_wave_access_m {
                    run += 1;
                } else {
                    run = 0;
                }
                runs[d] = run;
            }
            Some(runs)
        })
        .collect();

    let mut ledger = TechnicianLedger::new(contract.technicians, horizon);
    let mut warnings: Vec<SchedulerWarning> = Vec::new();
    let mut tasks: Vec<MaintenanceTask> = Vec::with_capacity(failures.len());

    for &i in &order {
        let event = failures[i];
        let mode = &catalog[event.failure_mode_id as usize - 1];
        let days = repair_days(mode.repair_hours, sim.hours_per_workday);
        let needed = mode.required_technicians;
        let transport_index = assign_transport(
            sim.transport_policy,
            transports,
            primary,
            scheduler_rng,
        );

        let mut task = MaintenanceTask {
            event,
            required_technicians: needed,
            repair_hours: mode.repair_hours,
            repair_days: days,
            transport_index,
            start_day: None,
            completion_day: None,
            available_on_start: None,
        };

        if needed > contract.technicians {
            if !warnings.iter().any(|w| w.failure_mode_id == mode.id) {
                warnings.push(SchedulerWarning {
                    failure_mode_id: mode.id,
                    required_technicians: needed,
                    crew_size: contract.technicians,
                });
            }
            tasks.push(task);
            continue;
        }

        let earliest = event.occurrence_day.saturating_add(sim.mobilization_lag_days);
        if earliest <= horizon && days <= horizon - earliest + 1 {
            let runs = access_runs[transport_index]
                .as_ref()
                .expect("runs precomputed for any assignable transport");
            for start in earliest..=(horizon - days + 1) {
                if runs[start as usize - 1] >= days && ledger.can_host(start, days, needed) {
                    task.available_on_start = Some(ledger.available_on(start));
                    ledger.claim(start, days, needed);
                    task.start_day = Some(start);
                    task.completion_day = Some(start + days - 1);
                    break;
                }
            }
        }
        tasks.push(task);
    }

    DispatchPlan {
        tasks,
        ledger,
        warnings,
    }
}

/// Write the dispatch plan as CSV with header
/// `turbine,mode,occurrence_day,required_technicians,repair_days,available_technicians,day_of_repair`.
/// Unscheduled tasks leave the last two columns empty.
pub fn write_drv_csv<W: Write>(tasks: &[MaintenanceTask], out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(
        out,
        "turbine,mode,occurrence_day,required_technicians,repair_days,available_technicians,day_of_repair"
    )?;
    for task in tasks {
        let available = task
            .available_on_start
            .map(|a| a.to_string())
            .unwrap_or_default();
        let day = task.start_day.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            task.event.turbine_id,
            task.event.failure_mode_id,
            task.event.occurrence_day,
            task.required_technicians,
            task.repair_days,
            available,
            day
        )?;
    }
    out.flush()
}

#[cfg(test)]
pub(crate) fn task_for_test(
    event: FailureEvent,
    start_day: Option<u32>,
    completion_day: Option<u32>,
) -> MaintenanceTask {
    let days = completion_day
        .zip(start_day)
        .map(|(c, s)| c - s + 1)
        .unwrap_or(1);
    MaintenanceTask {
        event,
        required_technicians: 2,
        repair_hours: days as f64 * 8.0,
        repair_days: days,
        transport_index: 0,
        start_day,
        completion_day,
        available_on_start: start_day.map(|_| 2),
    }
}
