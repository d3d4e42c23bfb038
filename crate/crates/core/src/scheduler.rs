//! Hourly on/off decisions for a rig facing known prices.
//!
//! Profit in each hour is known in advance (day-ahead prices, expected
//! revenue), so without switching limits every hour is decided on its own.
//! Larger mines need minimum on/off dwell times; those are solved exactly
//! by dynamic programming over (hour, state, run length).

use serde::{Deserialize, Serialize};

use crate::error::{hour_label, Error, Result};
use crate::model::{cost_per_hour, revenue_per_hour, MinerRig, NetworkSeries, NetworkSnapshot};
use crate::segments::SegmentKind;
use crate::tariff::{price_at, Tariff, SECONDS_PER_HOUR};

/// A contiguous run of whole hours starting at `start` (epoch seconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizon {
    pub start: i64,
    pub hours: usize,
}

impl Horizon {
    pub fn new(start: i64, hours: usize) -> Result<Self> {
        if hours == 0 {
            return Err(Error::domain("horizon must contain at least one hour"));
        }
        Ok(Horizon { start, hours })
    }

    pub fn hour_timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * SECONDS_PER_HOUR
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.hours).map(|i| self.hour_timestamp(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    start_timestamp: i64,
    hours: Vec<bool>,
}

impl Schedule {
    pub fn new(start_timestamp: i64, hours: Vec<bool>) -> Result<Self> {
        if hours.is_empty() {
            return Err(Error::domain("schedule must contain at least one hour"));
        }
        Ok(Schedule {
            start_timestamp,
            hours,
        })
    }

    pub fn start_timestamp(&self) -> i64 {
        self.start_timestamp
    }

    pub fn hours(&self) -> &[bool] {
        &self.hours
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }

    pub fn hour_timestamp(&self, i: usize) -> i64 {
        self.start_timestamp + i as i64 * SECONDS_PER_HOUR
    }

    pub fn on_hours(&self) -> usize {
        self.hours.iter().filter(|&&on| on).count()
    }

    pub fn duty_cycle(&self) -> f64 {
        self.on_hours() as f64 / self.hours.len() as f64
    }
}

pub fn duty_cycle(schedule: &Schedule) -> f64 {
    schedule.duty_cycle()
}

/// State the rig is in when the horizon opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialState {
    pub on: bool,
    /// Hours already spent in that state; at least 1.
    pub elapsed_hours: u32,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            on: false,
            elapsed_hours: u32::MAX,
        }
    }
}

/// Minimum run lengths. Runs cut by either end of the horizon are exempt,
/// except that the run in progress at the start counts `elapsed_hours`
/// toward its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DwellConstraint {
    pub min_on_hours: u32,
    pub min_off_hours: u32,
    #[serde(default)]
    pub initial: InitialState,
}

impl DwellConstraint {
    pub fn new(min_on_hours: u32, min_off_hours: u32, initial: InitialState) -> Result<Self> {
        let d = DwellConstraint {
            min_on_hours,
            min_off_hours,
            initial,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unconstrained() -> Self {
        DwellConstraint {
            min_on_hours: 1,
            min_off_hours: 1,
            initial: InitialState::default(),
        }
    }

    /// Per-segment defaults; calibration knobs rather than measured values.
    pub fn default_for(kind: SegmentKind) -> Self {
        let (on, off) = match kind {
            SegmentKind::Hobbyist => (1, 1),
            SegmentKind::SemiProfessional => (3, 2),
            SegmentKind::Professional => (6, 4),
        };
        DwellConstraint {
            min_on_hours: on,
            min_off_hours: off,
            initial: InitialState::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_on_hours == 0 || self.min_off_hours == 0 {
            return Err(Error::domain("minimum dwell must be at least one hour"));
        }
        if self.initial.elapsed_hours == 0 {
            return Err(Error::domain(
                "initial state must have elapsed at least one hour",
            ));
        }
        Ok(())
    }

    pub fn is_unconstrained(&self) -> bool {
        self.min_on_hours == 1 && self.min_off_hours == 1
    }

    fn min_run(&self, on: bool) -> u32 {
        if on {
            self.min_on_hours
        } else {
            self.min_off_hours
        }
    }
}

/// Whether `flags` respects `dwell`, given the initial state.
pub fn is_dwell_feasible(flags: &[bool], dwell: &DwellConstraint) -> bool {
    let mut state = dwell.initial.on;
    let mut run = dwell.initial.elapsed_hours;
    for &f in flags {
        if f == state {
            run = run.saturating_add(1);
        } else {
            if run < dwell.min_run(state) {
                return false;
            }
            state = f;
            run = 1;
        }
    }
    true
}

/// Revenue, cost and profit of one hour of running.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourEconomics {
    pub timestamp: i64,
    pub usd_per_kwh: f64,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
}

pub fn hourly_profit(
    rig: &MinerRig,
    snap: &NetworkSnapshot,
    tariff: &Tariff,
    timestamp: i64,
) -> Result<f64> {
    let price = price_at(tariff, timestamp)?;
    Ok(revenue_per_hour(rig, snap) - cost_per_hour(rig.total_power_kw(), price)?)
}

/// Economics of every hour in the horizon if the rig were running.
pub fn hourly_economics(
    rig: &MinerRig,
    series: &NetworkSeries,
    tariff: &Tariff,
    horizon: &Horizon,
) -> Result<Vec<HourEconomics>> {
    let uncovered: Vec<i64> = horizon
        .timestamps()
        .filter(|&ts| series.snapshot_at(ts).is_none())
        .collect();
    if let Some(&first) = uncovered.first() {
        return Err(Error::Coverage {
            epoch: first,
            hour: hour_label(first),
            missing: uncovered.len(),
        });
    }
    horizon
        .timestamps()
        .map(|ts| {
            let snap = series.snapshot_at(ts).expect("coverage checked above");
            let usd_per_kwh = price_at(tariff, ts)?;
            let revenue = revenue_per_hour(rig, snap);
            let cost = cost_per_hour(rig.total_power_kw(), usd_per_kwh)?;
            Ok(HourEconomics {
                timestamp: ts,
                usd_per_kwh,
                revenue,
                cost,
                profit: revenue - cost,
            })
        })
        .collect()
}

/// Sum of `profits` over on-hours, in hour order.
pub fn schedule_profit(profits: &[f64], flags: &[bool]) -> f64 {
    profits
        .iter()
        .zip(flags)
        .filter(|(_, &on)| on)
        .map(|(p, _)| *p)
        .sum()
}

/// On exactly when the hour is strictly profitable.
pub fn greedy_flags(profits: &[f64]) -> Vec<bool> {
    profits.iter().map(|&p| p > 0.0).collect()
}

/// Profit-maximizing dwell-feasible flags. Among equally profitable
/// choices the earliest hours prefer off.
pub fn constrained_flags(profits: &[f64], dwell: &DwellConstraint) -> Vec<bool> {
    if dwell.is_unconstrained() {
        // every switch is always allowed, so hours are independent
        return greedy_flags(profits);
    }
    let cap_on = dwell.min_on_hours as usize;
    let cap_off = dwell.min_off_hours as usize;
    let n_states = cap_on + cap_off;
    // off states 0..cap_off hold run lengths 1..=cap_off, on states follow
    let index = |on: bool, run: usize| if on { cap_off + run - 1 } else { run - 1 };
    let cap = |on: bool| if on { cap_on } else { cap_off };
    let next = |on: bool, run: usize, flag: bool| -> Option<usize> {
        if flag == on {
            Some(index(on, (run + 1).min(cap(on))))
        } else if run >= cap(on) {
            Some(index(flag, 1))
        } else {
            None
        }
    };
    let decode = |s: usize| -> (bool, usize) {
        if s < cap_off {
            (false, s + 1)
        } else {
            (true, s - cap_off + 1)
        }
    };

    let hours = profits.len();
    let mut value = vec![0.0f64; n_states];
    let mut choice = vec![false; hours * n_states];
    for t in (0..hours).rev() {
        let mut updated = vec![0.0f64; n_states];
        for (s, slot) in updated.iter_mut().enumerate() {
            let (on, run) = decode(s);
            let off_value = next(on, run, false).map(|ns| value[ns]);
            let on_value = next(on, run, true).map(|ns| profits[t] + value[ns]);
            let take_on = match (off_value, on_value) {
                (Some(off), Some(on)) => on > off,
                (None, Some(_)) => true,
                _ => false,
            };
            choice[t * n_states + s] = take_on;
            *slot = if take_on {
                on_value.unwrap_or(f64::NEG_INFINITY)
            } else {
                off_value.unwrap_or(f64::NEG_INFINITY)
            };
        }
        value = updated;
    }

    let init_on = dwell.initial.on;
    let init_run = (dwell.initial.elapsed_hours as usize).min(cap(init_on));
    let mut state = index(init_on, init_run);
    let mut flags = Vec::with_capacity(hours);
    for t in 0..hours {
        let flag = choice[t * n_states + state];
        let (on, run) = decode(state);
        flags.push(flag);
        state = next(on, run, flag).expect("chosen transition is feasible");
    }
    flags
}

/// Run the `fraction` most profitable hours (ties to the earlier hour)
/// regardless of dwell. Models a holder who mines through losses.
pub fn duty_override_flags(profits: &[f64], fraction: f64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::domain(format!(
            "duty override must be in [0, 1], got {fraction}"
        )));
    }
    let target = (fraction * profits.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..profits.len()).collect();
    order.sort_by(|&a, &b| profits[b].total_cmp(&profits[a]).then(a.cmp(&b)));
    let mut flags = vec![false; profits.len()];
    for &i in order.iter().take(target) {
        flags[i] = true;
    }
    Ok(flags)
}

pub fn greedy_schedule(
    rig: &MinerRig,
    series: &NetworkSeries,
    tariff: &Tariff,
    horizon: &Horizon,
) -> Result<Schedule> {
    let profits: Vec<f64> = hourly_economics(rig, series, tariff, horizon)?
        .iter()
        .map(|h| h.profit)
        .collect();
    Schedule::new(horizon.start, greedy_flags(&profits))
}

pub fn constrained_schedule(
    rig: &MinerRig,
    series: &NetworkSeries,
    tariff: &Tariff,
    horizon: &Horizon,
    dwell: &DwellConstraint,
) -> Result<Schedule> {
    dwell.validate()?;
    let profits: Vec<f64> = hourly_economics(rig, series, tariff, horizon)?
        .iter()
        .map(|h| h.profit)
        .collect();
    Schedule::new(horizon.start, constrained_flags(&profits, dwell))
}
