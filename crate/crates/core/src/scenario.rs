//! Backtests of a rig against a network history and a tariff, and the
//! fleet arithmetic for reaching a share of network hashrate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MinerRig, NetworkSeries};
use crate::scheduler::{
    constrained_flags, duty_override_flags, hourly_economics, schedule_profit, DwellConstraint,
    Horizon, Schedule,
};
use crate::segments::{capex, non_asic_fraction, CapexBreakdown, CostAssumptions, SegmentKind};
use crate::tariff::{average_effective_price, Tariff};

/// Per-unit hardware model. Defaults to an Antminer S7 at 4.73 TH/s with
/// the largest per-unit draw that still fits seven units under 10 kW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitModel {
    pub hashrate_ghs: f64,
    pub power_kw: f64,
}

impl Default for UnitModel {
    fn default() -> Self {
        UnitModel {
            hashrate_ghs: 4730.0,
            power_kw: 1.43,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: NetworkSeries,
    pub tariff: Tariff,
    pub rig: MinerRig,
    pub segment: SegmentKind,
    pub assumptions: CostAssumptions,
    pub dwell: DwellConstraint,
    /// Forces this on-fraction, admitting the most profitable hours first.
    pub duty_override: Option<f64>,
    /// Professional capex sizing; defaults to the rig's draw.
    pub mw_capacity: Option<f64>,
    pub new_facility: bool,
    /// Extra operating cost per running hour (labor and the like), USD.
    pub opex_usd_per_hour: f64,
}

impl Scenario {
    /// A scenario with segment-default dwell and cost assumptions.
    pub fn new(
        name: impl Into<String>,
        network: NetworkSeries,
        tariff: Tariff,
        rig: MinerRig,
        segment: SegmentKind,
    ) -> Self {
        Scenario {
            name: name.into(),
            network,
            tariff,
            rig,
            segment,
            assumptions: CostAssumptions::default(),
            dwell: DwellConstraint::default_for(segment),
            duty_override: None,
            mw_capacity: None,
            new_facility: false,
            opex_usd_per_hour: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.assumptions.validate()?;
        self.assumptions
            .check_units(self.segment, self.rig.unit_count())?;
        self.dwell.validate()?;
        if let Some(f) = self.duty_override {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::domain(format!(
                    "duty override must be in [0, 1], got {f}"
                )));
            }
        }
        if !(self.opex_usd_per_hour.is_finite() && self.opex_usd_per_hour >= 0.0) {
            return Err(Error::domain("opex per hour must be >= 0"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> Horizon {
        Horizon {
            start: self.network.start(),
            hours: self.network.hours(),
        }
    }

    /// Same scenario with every block subsidy replaced, e.g. a halving.
    pub fn with_block_reward(&self, block_reward_btc: f64) -> Result<Self> {
        let network = self.network.map(|s| crate::model::NetworkSnapshot {
            block_reward_btc,
            ..*s
        })?;
        Ok(Scenario {
            network,
            ..self.clone()
        })
    }

    /// Same scenario with electricity prices multiplied by `factor`.
    pub fn with_price_scale(&self, factor: f64) -> Result<Self> {
        Ok(Scenario {
            tariff: self.tariff.scaled(factor)?,
            ..self.clone()
        })
    }

    fn mw_capacity(&self) -> f64 {
        self.mw_capacity
            .unwrap_or(self.rig.total_power_kw() / 1000.0)
    }
}

/// One hour of a backtest, as written to plot files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourRecord {
    pub timestamp: i64,
    pub on: bool,
    pub usd_per_kwh: f64,
    /// Revenue and cost if running; the profit column is what the rig
    /// actually made (zero when off).
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub segment: SegmentKind,
    pub hours: usize,
    pub profit_always_on: f64,
    pub profit_smart: f64,
    /// `profit_smart / profit_always_on`, only when always-on is profitable.
    pub multiplier: Option<f64>,
    pub duty_cycle: f64,
    /// USD/kWh paid under the smart schedule.
    pub avg_effective_price: f64,
    pub avg_effective_price_always_on: f64,
    pub capex: CapexBreakdown,
    pub non_asic_fraction: f64,
    /// Days of mean smart profit needed to recover capex; `None` if never.
    pub roi_days: Option<f64>,
    /// Relative always-on profit gain from halving electricity prices.
    pub margin_increase_halved_electricity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub report: Report,
    pub schedule: Schedule,
    pub hours: Vec<HourRecord>,
}

struct Core {
    profit_always_on: f64,
    profit_smart: f64,
    schedule: Schedule,
    hours: Vec<HourRecord>,
}

fn run(scenario: &Scenario) -> Result<Core> {
    let horizon = scenario.horizon();
    let economics = hourly_economics(&scenario.rig, &scenario.network, &scenario.tariff, &horizon)?;
    let profits: Vec<f64> = economics
        .iter()
        .map(|h| h.profit - scenario.opex_usd_per_hour)
        .collect();
    let flags = match scenario.duty_override {
        Some(f) => duty_override_flags(&profits, f)?,
        None => constrained_flags(&profits, &scenario.dwell),
    };
    let hours = economics
        .iter()
        .zip(&flags)
        .zip(&profits)
        .map(|((h, &on), &p)| HourRecord {
            timestamp: h.timestamp,
            on,
            usd_per_kwh: h.usd_per_kwh,
            revenue: h.revenue,
            cost: h.cost + scenario.opex_usd_per_hour,
            profit: if on { p } else { 0.0 },
        })
        .collect();
    Ok(Core {
        profit_always_on: schedule_profit(&profits, &vec![true; profits.len()]),
        profit_smart: schedule_profit(&profits, &flags),
        schedule: Schedule::new(horizon.start, flags)?,
        hours,
    })
}

/// Always-on versus scheduled operation over the scenario's horizon.
pub fn backtest(scenario: &Scenario) -> Result<Report> {
    backtest_detailed(scenario).map(|b| b.report)
}

pub fn backtest_detailed(scenario: &Scenario) -> Result<Backtest> {
    let name = scenario.name.as_str();
    scenario.validate().map_err(|e| e.in_scenario(name))?;
    let base = run(scenario).map_err(|e| e.in_scenario(name))?;
    let halved = scenario
        .with_price_scale(0.5)
        .and_then(|s| run(&s))
        .map_err(|e| e.in_scenario(name))?;

    let capex = capex(
        scenario.segment,
        scenario.rig.unit_count(),
        &scenario.assumptions,
        scenario.mw_capacity(),
        scenario.new_facility,
    )
    .map_err(|e| e.in_scenario(name))?;
    let power = scenario.rig.total_power_kw();
    let always = Schedule::new(
        base.schedule.start_timestamp(),
        vec![true; base.schedule.len()],
    )?;
    let avg_smart = average_effective_price(&scenario.tariff, &base.schedule, power)
        .map_err(|e| e.in_scenario(name))?;
    let avg_always = average_effective_price(&scenario.tariff, &always, power)
        .map_err(|e| e.in_scenario(name))?;

    let days = base.schedule.len() as f64 / 24.0;
    let multiplier =
        (base.profit_always_on > 0.0).then(|| base.profit_smart / base.profit_always_on);
    let margin = compare_costs(base.profit_always_on, halved.profit_always_on).ok();

    let report = Report {
        name: scenario.name.clone(),
        segment: scenario.segment,
        hours: base.schedule.len(),
        profit_always_on: base.profit_always_on,
        profit_smart: base.profit_smart,
        multiplier,
        duty_cycle: base.schedule.duty_cycle(),
        avg_effective_price: avg_smart,
        avg_effective_price_always_on: avg_always,
        capex,
        non_asic_fraction: non_asic_fraction(&capex).map_err(|e| e.in_scenario(name))?,
        roi_days: roi_days(capex.total, base.profit_smart / days)?.days(),
        margin_increase_halved_electricity: margin,
    };
    Ok(Backtest {
        report,
        schedule: base.schedule,
        hours: base.hours,
    })
}

/// Relative profit gain of the halved-electricity run over the base run.
pub fn compare_costs(profit_base: f64, profit_halved: f64) -> Result<f64> {
    if profit_base == 0.0 {
        return Err(Error::UndefinedComparison(
            "base profit is zero".to_string(),
        ));
    }
    Ok((profit_halved - profit_base) / profit_base.abs())
}

/// [`compare_costs`] on the always-on profits of two reports.
pub fn compare_reports(base: &Report, halved: &Report) -> Result<f64> {
    compare_costs(base.profit_always_on, halved.profit_always_on)
}

/// Fraction of the network a fleet would hold, against the current
/// network hashrate.
pub fn network_share(fleet_hashrate_ghs: f64, h0_ghs: f64) -> Result<f64> {
    if !(h0_ghs > 0.0) {
        return Err(Error::domain(format!(
            "network hashrate must be > 0, got {h0_ghs}"
        )));
    }
    Ok(fleet_hashrate_ghs / h0_ghs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetPlan {
    pub segment: SegmentKind,
    pub miner_count: u64,
    pub units_per_miner: u32,
    pub total_units: u64,
    pub per_miner_capex: CapexBreakdown,
    pub total_capex: f64,
}

/// Miners of one segment needed to reach `target_share` of `h0_ghs`.
pub fn fleet_plan(
    target_share: f64,
    h0_ghs: f64,
    per_miner_hashrate_ghs: f64,
    segment: SegmentKind,
    unit: UnitModel,
    assumptions: &CostAssumptions,
) -> Result<FleetPlan> {
    for (name, v) in [
        ("target share", target_share),
        ("network hashrate", h0_ghs),
        ("per-miner hashrate", per_miner_hashrate_ghs),
        ("unit hashrate", unit.hashrate_ghs),
        ("unit power", unit.power_kw),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let miner_count = (target_share * h0_ghs / per_miner_hashrate_ghs).ceil() as u64;
    let units_per_miner = (per_miner_hashrate_ghs / unit.hashrate_ghs).ceil() as u32;
    let mw = f64::from(units_per_miner) * unit.power_kw / 1000.0;
    let per_miner_capex = capex(segment, units_per_miner, assumptions, mw, false)?;
    Ok(FleetPlan {
        segment,
        miner_count,
        units_per_miner,
        total_units: miner_count * u64::from(units_per_miner),
        total_capex: miner_count as f64 * per_miner_capex.total,
        per_miner_capex,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Roi {
    Days(f64),
    /// Mean profit is not positive; capex is never recovered.
    Unbounded,
}

impl Roi {
    pub fn days(self) -> Option<f64> {
        match self {
            Roi::Days(d) => Some(d),
            Roi::Unbounded => None,
        }
    }
}

pub fn roi_days(capex_total: f64, mean_daily_profit: f64) -> Result<Roi> {
    if !(capex_total >= 0.0) {
        return Err(Error::domain(format!(
            "capex must be >= 0, got {capex_total}"
        )));
    }
    Ok(if capex_total == 0.0 {
        Roi::Days(0.0)
    } else if mean_daily_profit > 0.0 {
        Roi::Days(capex_total / mean_daily_profit)
    } else {
        Roi::Unbounded
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{revenue_per_hour, NetworkSnapshot};

    fn snap() -> NetworkSnapshot {
        NetworkSnapshot::new(0, 3.5e8, 4.889e10, 250.0, 25.0, 0.3).unwrap()
    }

    fn scenario(tariff: Tariff) -> Scenario {
        Scenario::new(
            "t",
            NetworkSeries::flat(snap(), 48).unwrap(),
            tariff,
            MinerRig::new(1, 4730.0, 1.43).unwrap(),
            SegmentKind::Hobbyist,
        )
    }

    fn breakeven() -> f64 {
        revenue_per_hour(&MinerRig::new(1, 4730.0, 1.43).unwrap(), &snap()) / 1.43
    }

    #[test]
    fn never_profitable() {
        let r = backtest(&scenario(Tariff::fixed(breakeven() * 2.0).unwrap())).unwrap();
        assert!(r.profit_always_on < 0.0);
        assert_eq!(r.profit_smart, 0.0);
        assert_eq!(r.duty_cycle, 0.0);
        assert_eq!(r.multiplier, None);
        assert_eq!(r.roi_days, None);
    }

    #[test]
    fn always_profitable() {
        let r = backtest(&scenario(Tariff::fixed(breakeven() * 0.5).unwrap())).unwrap();
        assert_eq!(r.profit_smart, r.profit_always_on);
        assert_eq!(r.duty_cycle, 1.0);
        assert_eq!(r.multiplier, Some(1.0));
        let daily = r.profit_smart / 2.0;
        assert!((r.roi_days.unwrap() - 3000.0 / daily).abs() < 1e-9);
        // halving a cost that is half the revenue: (0.75 − 0.5) / 0.5
        assert!((r.margin_increase_halved_electricity.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn duty_override_forces_fraction() {
        let mut s = scenario(Tariff::fixed(breakeven() * 2.0).unwrap());
        s.duty_override = Some(1.0);
        let r = backtest(&s).unwrap();
        assert_eq!(r.duty_cycle, 1.0);
        assert_eq!(r.profit_smart, r.profit_always_on);
    }

    #[test]
    fn errors_carry_scenario_name() {
        let mut s = scenario(Tariff::fixed(0.1).unwrap());
        s.name = "period-9".into();
        s.rig = MinerRig::new(20, 4730.0, 1.43).unwrap();
        let err = backtest(&s).unwrap_err();
        assert!(err.to_string().contains("period-9"), "{err}");
    }

    #[test]
    fn halving_transform() {
        let s = scenario(Tariff::fixed(0.05).unwrap());
        let halved = s.with_block_reward(12.5).unwrap();
        assert_eq!(halved.network.snapshots()[0].block_reward_btc, 12.5);
        let a = backtest(&s).unwrap();
        let b = backtest(&halved).unwrap();
        assert!(b.profit_always_on < a.profit_always_on);
    }

    #[test]
    fn compare_costs_examples() {
        assert_eq!(compare_costs(100.0, 100.0).unwrap(), 0.0);
        let v = compare_costs(74.0, 87.0).unwrap();
        assert!((v - 13.0 / 74.0).abs() < 1e-12);
        assert!((v - 0.176).abs() < 1e-3);
        assert!(matches!(
            compare_costs(0.0, 5.0),
            Err(Error::UndefinedComparison(_))
        ));
    }

    #[test]
    fn share_examples() {
        assert!((network_share(50e6, 1e9).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(network_share(0.0, 1e9).unwrap(), 0.0);
        assert_eq!(network_share(1e9, 1e9).unwrap(), 1.0);
        assert!(network_share(1.0, 0.0).is_err());
    }

    #[test]
    fn fleet_examples() {
        let a = CostAssumptions::default();
        let u = UnitModel::default();
        let hob = fleet_plan(0.05, 1e9, 3e4, SegmentKind::Hobbyist, u, &a).unwrap();
        assert_eq!(hob.miner_count, 1667);
        assert_eq!(hob.units_per_miner, 7);
        assert_eq!(hob.per_miner_capex.total, 9000.0);
        assert_eq!(hob.total_capex, 1667.0 * 9000.0);
        let semi = fleet_plan(0.05, 1e9, 7e5, SegmentKind::SemiProfessional, u, &a).unwrap();
        assert_eq!(semi.miner_count, 72);
        assert!(fleet_plan(0.0, 1e9, 3e4, SegmentKind::Hobbyist, u, &a).is_err());
    }

    #[test]
    fn roi_examples() {
        assert_eq!(roi_days(9000.0, 10.0).unwrap(), Roi::Days(900.0));
        assert_eq!(roi_days(0.0, 10.0).unwrap(), Roi::Days(0.0));
        assert_eq!(roi_days(9000.0, -1.0).unwrap(), Roi::Unbounded);
        assert_eq!(roi_days(9000.0, 0.0).unwrap(), Roi::Unbounded);
        assert!(roi_days(-1.0, 1.0).is_err());
    }
}
