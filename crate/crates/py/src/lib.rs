//! Python bindings for `minegrid_core`.

use minegrid_core::io::{load_scenario, report_json};
use minegrid_core::scheduler::{self, DwellConstraint, InitialState};
use minegrid_core::segments::{self, CostAssumptions, SegmentKind};
use minegrid_core::{model, scenario, tariff, Error};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn segment(name: &str) -> PyResult<SegmentKind> {
    name.parse().map_err(to_py)
}

/// Any serializable value as plain Python objects, at full precision.
fn to_pyobj<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, module = "minegrid")]
struct NetworkSnapshot {
    inner: model::NetworkSnapshot,
}

#[pymethods]
impl NetworkSnapshot {
    #[new]
    #[pyo3(signature = (timestamp, hashrate_ghs, difficulty, price_usd, block_reward_btc, fees_btc=0.0))]
    fn new(
        timestamp: i64,
        hashrate_ghs: f64,
        difficulty: f64,
        price_usd: f64,
        block_reward_btc: f64,
        fees_btc: f64,
    ) -> PyResult<Self> {
        model::NetworkSnapshot::new(
            timestamp,
            hashrate_ghs,
            difficulty,
            price_usd,
            block_reward_btc,
            fees_btc,
        )
        .map(|inner| NetworkSnapshot { inner })
        .map_err(to_py)
    }

    #[getter]
    fn timestamp(&self) -> i64 {
        self.inner.timestamp
    }
    #[getter]
    fn hashrate_ghs(&self) -> f64 {
        self.inner.hashrate_ghs
    }
    #[getter]
    fn difficulty(&self) -> f64 {
        self.inner.difficulty
    }
    #[getter]
    fn price_usd(&self) -> f64 {
        self.inner.price_usd
    }
    #[getter]
    fn block_reward_btc(&self) -> f64 {
        self.inner.block_reward_btc
    }
    #[getter]
    fn fees_btc(&self) -> f64 {
        self.inner.fees_btc
    }

    /// USD value of one block, subsidy plus fees.
    fn block_value_usd(&self) -> f64 {
        self.inner.block_value_usd()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen, module = "minegrid")]
struct MinerRig {
    inner: model::MinerRig,
}

#[pymethods]
impl MinerRig {
    #[new]
    #[pyo3(signature = (unit_count, unit_hashrate_ghs=4730.0, unit_power_kw=1.43))]
    fn new(unit_count: u32, unit_hashrate_ghs: f64, unit_power_kw: f64) -> PyResult<Self> {
        model::MinerRig::new(unit_count, unit_hashrate_ghs, unit_power_kw)
            .map(|inner| MinerRig { inner })
            .map_err(to_py)
    }

    #[getter]
    fn unit_count(&self) -> u32 {
        self.inner.unit_count()
    }
    #[getter]
    fn hashrate_ghs(&self) -> f64 {
        self.inner.hashrate_ghs()
    }
    #[getter]
    fn total_power_kw(&self) -> f64 {
        self.inner.total_power_kw()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen, module = "minegrid")]
struct Tariff {
    inner: tariff::Tariff,
}

#[pymethods]
impl Tariff {
    #[staticmethod]
    fn fixed(usd_per_kwh: f64) -> PyResult<Self> {
        tariff::Tariff::fixed(usd_per_kwh)
            .map(|inner| Tariff { inner })
            .map_err(to_py)
    }

    /// Bands are `(start_hour, end_hour, usd_per_kwh)` in local time; a
    /// band may wrap past midnight.
    #[staticmethod]
    #[pyo3(signature = (bands, tz_offset_minutes=0))]
    fn time_of_use(bands: Vec<(u8, u8, f64)>, tz_offset_minutes: i32) -> PyResult<Self> {
        let bands = bands
            .into_iter()
            .map(|(start, end, usd_per_kwh)| tariff::Band {
                start,
                end,
                usd_per_kwh,
            })
            .collect();
        tariff::Tariff::time_of_use(bands, tz_offset_minutes)
            .map(|inner| Tariff { inner })
            .map_err(to_py)
    }

    /// Prices keyed by the epoch second of each hour.
    #[staticmethod]
    fn hourly_series(prices: Vec<(i64, f64)>) -> PyResult<Self> {
        tariff::Tariff::hourly_series(prices)
            .map(|inner| Tariff { inner })
            .map_err(to_py)
    }

    fn price_at(&self, timestamp: i64) -> PyResult<f64> {
        tariff::price_at(&self.inner, timestamp).map_err(to_py)
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        self.inner
            .scaled(factor)
            .map(|inner| Tariff { inner })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyfunction]
fn expected_blocks_per_day(hashrate_ghs: f64, difficulty: f64) -> PyResult<f64> {
    model::expected_blocks_per_day(hashrate_ghs, difficulty).map_err(to_py)
}

#[pyfunction]
fn revenue_per_day(rig: &MinerRig, snapshot: &NetworkSnapshot) -> f64 {
    model::revenue_per_day(&rig.inner, &snapshot.inner)
}

#[pyfunction]
fn revenue_per_hour(rig: &MinerRig, snapshot: &NetworkSnapshot) -> f64 {
    model::revenue_per_hour(&rig.inner, &snapshot.inner)
}

#[pyfunction]
fn cost_per_hour(power_kw: f64, usd_per_kwh: f64) -> PyResult<f64> {
    model::cost_per_hour(power_kw, usd_per_kwh).map_err(to_py)
}

#[pyfunction]
fn hourly_profit(
    rig: &MinerRig,
    snapshot: &NetworkSnapshot,
    tariff: &Tariff,
    timestamp: i64,
) -> PyResult<f64> {
    scheduler::hourly_profit(&rig.inner, &snapshot.inner, &tariff.inner, timestamp).map_err(to_py)
}

/// Bids are `(bidder_id, quantity_mw, price_usd_per_mwh)`.
#[pyfunction]
fn clear_day_ahead<'py>(
    py: Python<'py>,
    bids: Vec<(String, f64, f64)>,
    demand_mw: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let bids = bids
        .into_iter()
        .map(|(id, q, p)| tariff::SupplyBid::new(id, q, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let result = tariff::clear_day_ahead(&bids, demand_mw).map_err(to_py)?;
    to_pyobj(py, &result)
}

#[pyfunction]
fn classify(total_power_kw: f64) -> PyResult<&'static str> {
    segments::classify(total_power_kw)
        .map(SegmentKind::as_str)
        .map_err(to_py)
}

#[pyfunction]
fn unit_price(order_size: u32) -> f64 {
    segments::unit_price(order_size, &CostAssumptions::default())
}

/// Capex breakdown as a dict, with `non_asic_fraction` included.
#[pyfunction]
#[pyo3(signature = (segment, units, mw_capacity=None, new_facility=false))]
fn capex<'py>(
    py: Python<'py>,
    segment: &str,
    units: u32,
    mw_capacity: Option<f64>,
    new_facility: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = self::segment(segment)?;
    let mw =
        mw_capacity.unwrap_or(f64::from(units) * scenario::UnitModel::default().power_kw / 1000.0);
    let b = segments::capex(kind, units, &CostAssumptions::default(), mw, new_facility)
        .map_err(to_py)?;
    let dict = to_pyobj(py, &b)?;
    dict.set_item(
        "non_asic_fraction",
        segments::non_asic_fraction(&b).map_err(to_py)?,
    )?;
    Ok(dict)
}

#[pyfunction]
fn greedy_schedule(profits: Vec<f64>) -> Vec<bool> {
    scheduler::greedy_flags(&profits)
}

/// Best schedule under minimum on/off run lengths. The state before the
/// first hour is `initial_on`, held for `elapsed_hours` (default: long
/// enough to switch freely).
#[pyfunction]
#[pyo3(signature = (profits, min_on_hours, min_off_hours, initial_on=false, elapsed_hours=None))]
fn constrained_schedule(
    profits: Vec<f64>,
    min_on_hours: u32,
    min_off_hours: u32,
    initial_on: bool,
    elapsed_hours: Option<u32>,
) -> PyResult<Vec<bool>> {
    let initial = InitialState {
        on: initial_on,
        elapsed_hours: elapsed_hours.unwrap_or(u32::MAX),
    };
    let dwell = DwellConstraint::new(min_on_hours, min_off_hours, initial).map_err(to_py)?;
    Ok(scheduler::constrained_flags(&profits, &dwell))
}

#[pyfunction]
fn schedule_profit(profits: Vec<f64>, flags: Vec<bool>) -> PyResult<f64> {
    if profits.len() != flags.len() {
        return Err(PyValueError::new_err("profits and flags differ in length"));
    }
    Ok(scheduler::schedule_profit(&profits, &flags))
}

#[pyfunction]
fn duty_cycle(flags: Vec<bool>) -> PyResult<f64> {
    scheduler::Schedule::new(0, flags)
        .map(|s| s.duty_cycle())
        .map_err(to_py)
}

#[pyfunction]
fn network_share(fleet_hashrate_ghs: f64, h0_ghs: f64) -> PyResult<f64> {
    scenario::network_share(fleet_hashrate_ghs, h0_ghs).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (share, h0_ghs, per_miner_ghs, segment, unit_hashrate_ghs=4730.0, unit_power_kw=1.43))]
fn fleet_plan<'py>(
    py: Python<'py>,
    share: f64,
    h0_ghs: f64,
    per_miner_ghs: f64,
    segment: &str,
    unit_hashrate_ghs: f64,
    unit_power_kw: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let unit = scenario::UnitModel {
        hashrate_ghs: unit_hashrate_ghs,
        power_kw: unit_power_kw,
    };
    let plan = scenario::fleet_plan(
        share,
        h0_ghs,
        per_miner_ghs,
        self::segment(segment)?,
        unit,
        &CostAssumptions::default(),
    )
    .map_err(to_py)?;
    to_pyobj(py, &plan)
}

/// Days to recover capex; `None` when mean profit is not positive.
#[pyfunction]
fn roi_days(capex_total: f64, mean_daily_profit: f64) -> PyResult<Option<f64>> {
    scenario::roi_days(capex_total, mean_daily_profit)
        .map(|r| r.days())
        .map_err(to_py)
}

/// Run the backtest described by a scenario config file and return the
/// report as a dict.
#[pyfunction]
fn backtest<'py>(py: Python<'py>, config_path: std::path::PathBuf) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?
        .call_method1("loads", (backtest_json(config_path)?,))
}

/// Same as `backtest`, as the canonical JSON text the CLI writes.
#[pyfunction]
fn backtest_json(config_path: std::path::PathBuf) -> PyResult<String> {
    let s = load_scenario(&config_path).map_err(to_py)?;
    let report = scenario::backtest(&s).map_err(to_py)?;
    Ok(report_json(&report))
}

#[pymodule]
fn minegrid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<NetworkSnapshot>()?;
    m.add_class::<MinerRig>()?;
    m.add_class::<Tariff>()?;
    m.add_function(wrap_pyfunction!(expected_blocks_per_day, m)?)?;
    m.add_function(wrap_pyfunction!(revenue_per_day, m)?)?;
    m.add_function(wrap_pyfunction!(revenue_per_hour, m)?)?;
    m.add_function(wrap_pyfunction!(cost_per_hour, m)?)?;
    m.add_function(wrap_pyfunction!(hourly_profit, m)?)?;
    m.add_function(wrap_pyfunction!(clear_day_ahead, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(unit_price, m)?)?;
    m.add_function(wrap_pyfunction!(capex, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(constrained_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_profit, m)?)?;
    m.add_function(wrap_pyfunction!(duty_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(network_share, m)?)?;
    m.add_function(wrap_pyfunction!(fleet_plan, m)?)?;
    m.add_function(wrap_pyfunction!(roi_days, m)?)?;
    m.add_function(wrap_pyfunction!(backtest, m)?)?;
    m.add_function(wrap_pyfunction!(backtest_json, m)?)?;
    Ok(())
}
