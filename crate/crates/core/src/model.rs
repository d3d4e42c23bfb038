//! Revenue and cost of a mining rig, plus the older hashrate-share profit
//! function kept as a comparison baseline.
//!
//! Hashrates are in GH/s, power in kW, money in USD. Revenue is an
//! expectation: no block-discovery variance is modeled.

use crate::error::{Error, Result};

/// Hashes per unit of difficulty (2^32).
pub const HASHES_PER_DIFFICULTY: f64 = 4_294_967_296.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
const HASHES_PER_GH: f64 = 1e9;

/// Network state for one hour (or one day, when broadcast to hours).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSnapshot {
    /// Epoch seconds, UTC.
    pub timestamp: i64,
    /// Network hashrate, GH/s.
    pub hashrate_ghs: f64,
    pub difficulty: f64,
    /// USD per BTC.
    pub price_usd: f64,
    /// Block subsidy, BTC per block.
    pub block_reward_btc: f64,
    /// Fees, BTC per block.
    pub fees_btc: f64,
}

impl NetworkSnapshot {
    pub fn new(
        timestamp: i64,
        hashrate_ghs: f64,
        difficulty: f64,
        price_usd: f64,
        block_reward_btc: f64,
        fees_btc: f64,
    ) -> Result<Self> {
        let snap = NetworkSnapshot {
            timestamp,
            hashrate_ghs,
            difficulty,
            price_usd,
            block_reward_btc,
            fees_btc,
        };
        snap.validate()?;
        Ok(snap)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !positive(self.hashrate_ghs) {
            return Err(Error::domain(format!(
                "network hashrate must be > 0, got {}",
                self.hashrate_ghs
            )));
        }
        if !positive(self.difficulty) {
            return Err(Error::domain(format!(
                "difficulty must be > 0, got {}",
                self.difficulty
            )));
        }
        for (name, v) in [
            ("price", self.price_usd),
            ("block reward", self.block_reward_btc),
            ("fees", self.fees_btc),
        ] {
            if !non_negative(v) {
                return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// USD value of one block: B·(S+F).
    pub fn block_value_usd(&self) -> f64 {
        self.price_usd * (self.block_reward_btc + self.fees_btc)
    }
}

/// Time-sorted snapshots at a uniform cadence. Each snapshot holds for
/// `[timestamp, timestamp + cadence)`, so daily data broadcasts to hours.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSeries {
    snapshots: Vec<NetworkSnapshot>,
    cadence_secs: i64,
}

impl NetworkSeries {
    pub fn new(snapshots: Vec<NetworkSnapshot>, cadence_secs: i64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::domain("network series is empty"));
        }
        if cadence_secs <= 0 || cadence_secs % 3600 != 0 {
            return Err(Error::domain(format!(
                "cadence must be a positive whole number of hours, got {cadence_secs} s"
            )));
        }
        for s in &snapshots {
            s.validate()?;
        }
        for (i, pair) in snapshots.windows(2).enumerate() {
            let gap = pair[1].timestamp - pair[0].timestamp;
            if gap != cadence_secs {
                return Err(Error::domain(format!(
                    "snapshot {} is {gap} s after its predecessor, expected {cadence_secs} s",
                    i + 1
                )));
            }
        }
        Ok(NetworkSeries {
            snapshots,
            cadence_secs,
        })
    }

    /// A single snapshot held constant for `hours` hours.
    pub fn flat(snapshot: NetworkSnapshot, hours: usize) -> Result<Self> {
        let hours = i64::try_from(hours.max(1)).map_err(|_| Error::domain("horizon too long"))?;
        NetworkSeries::new(vec![snapshot], hours * 3600)
    }

    pub fn snapshots(&self) -> &[NetworkSnapshot] {
        &self.snapshots
    }

    pub fn cadence_secs(&self) -> i64 {
        self.cadence_secs
    }

    pub fn start(&self) -> i64 {
        self.snapshots[0].timestamp
    }

    /// First second after the span this series covers.
    pub fn end(&self) -> i64 {
        self.snapshots[self.snapshots.len() - 1].timestamp + self.cadence_secs
    }

    /// Number of whole hours covered.
    pub fn hours(&self) -> usize {
        ((self.end() - self.start()) / 3600) as usize
    }

    pub fn snapshot_at(&self, ts: i64) -> Option<&NetworkSnapshot> {
        if ts < self.start() || ts >= self.end() {
            return None;
        }
        let idx = ((ts - self.start()) / self.cadence_secs) as usize;
        self.snapshots.get(idx)
    }

    /// Apply `f` to every snapshot, revalidating the result.
    pub fn map(&self, f: impl Fn(&NetworkSnapshot) -> NetworkSnapshot) -> Result<Self> {
        NetworkSeries::new(self.snapshots.iter().map(f).collect(), self.cadence_secs)
    }
}

/// A deployment of identical mining units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerRig {
    unit_count: u32,
    unit_hashrate_ghs: f64,
    unit_power_kw: f64,
}

impl MinerRig {
    pub fn new(unit_count: u32, unit_hashrate_ghs: f64, unit_power_kw: f64) -> Result<Self> {
        if unit_count == 0 {
            return Err(Error::domain("rig needs at least one unit"));
        }
        if !(unit_hashrate_ghs.is_finite() && unit_hashrate_ghs > 0.0) {
            return Err(Error::domain(format!(
                "unit hashrate must be > 0, got {unit_hashrate_ghs}"
            )));
        }
        if !(unit_power_kw.is_finite() && unit_power_kw > 0.0) {
            return Err(Error::domain(format!(
                "unit power must be > 0, got {unit_power_kw}"
            )));
        }
        Ok(MinerRig {
            unit_count,
            unit_hashrate_ghs,
            unit_power_kw,
        })
    }

    pub fn unit_count(&self) -> u32 {
        self.unit_count
    }

    pub fn unit_hashrate_ghs(&self) -> f64 {
        self.unit_hashrate_ghs
    }

    pub fn unit_power_kw(&self) -> f64 {
        self.unit_power_kw
    }

    /// Total hashrate X in GH/s.
    pub fn hashrate_ghs(&self) -> f64 {
        f64::from(self.unit_count) * self.unit_hashrate_ghs
    }

    /// Total draw in kW while running.
    pub fn total_power_kw(&self) -> f64 {
        f64::from(self.unit_count) * self.unit_power_kw
    }
}

/// Parameters of the legacy hashrate-share profit function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegacyProfitParams {
    /// Operating cost, USD per GH/s per period.
    pub opex_per_ghs: f64,
    /// Number of periods the hardware is amortized over.
    pub amortization_periods: f64,
    /// Hashrate bought per USD of hardware, GH/s per USD.
    pub ghs_per_usd: f64,
    /// Non-recurring engineering cost, USD.
    pub nre_usd: f64,
}

impl LegacyProfitParams {
    pub fn new(
        opex_per_ghs: f64,
        amortization_periods: f64,
        ghs_per_usd: f64,
        nre_usd: f64,
    ) -> Result<Self> {
        if !(amortization_periods > 0.0) || !(ghs_per_usd > 0.0) {
            return Err(Error::domain(
                "amortization periods and GH/s per USD must be > 0",
            ));
        }
        if !(nre_usd >= 0.0) || !(opex_per_ghs >= 0.0) {
            return Err(Error::domain("NRE and operating cost must be >= 0"));
        }
        Ok(LegacyProfitParams {
            opex_per_ghs,
            amortization_periods,
            ghs_per_usd,
            nre_usd,
        })
    }
}

/// Expected blocks found per day by `hashrate_ghs` against `difficulty`.
pub fn expected_blocks_per_day(hashrate_ghs: f64, difficulty: f64) -> Result<f64> {
    if !(difficulty > 0.0) || !difficulty.is_finite() {
        return Err(Error::domain(format!(
            "difficulty must be > 0, got {difficulty}"
        )));
    }
    if !(hashrate_ghs >= 0.0) {
        return Err(Error::domain(format!(
            "hashrate must be >= 0, got {hashrate_ghs}"
        )));
    }
    Ok(hashrate_ghs * HASHES_PER_GH * SECONDS_PER_DAY / (difficulty * HASHES_PER_DIFFICULTY))
}

/// Expected USD earned per day.
///
/// The rig's share of the combined hashrate times the blocks the combined
/// hashrate finds per day; the (h0 + X) factors cancel, so this is linear
/// in X.
pub fn revenue_per_day(rig: &MinerRig, snap: &NetworkSnapshot) -> f64 {
    let x = rig.hashrate_ghs();
    let combined = snap.hashrate_ghs + x;
    let share = x / combined;
    let network_blocks =
        combined * HASHES_PER_GH * SECONDS_PER_DAY / (snap.difficulty * HASHES_PER_DIFFICULTY);
    share * snap.block_value_usd() * network_blocks
}

pub fn revenue_per_hour(rig: &MinerRig, snap: &NetworkSnapshot) -> f64 {
    revenue_per_day(rig, snap) / 24.0
}

/// Cost of running `power_kw` for one hour at `usd_per_kwh`.
pub fn cost_per_hour(power_kw: f64, usd_per_kwh: f64) -> Result<f64> {
    if !(usd_per_kwh >= 0.0) {
        return Err(Error::domain(format!(
            "electricity price must be >= 0, got {usd_per_kwh}"
        )));
    }
    if !(power_kw >= 0.0) {
        return Err(Error::domain(format!("power must be >= 0, got {power_kw}")));
    }
    Ok(power_kw * 1.0 * usd_per_kwh)
}

/// Legacy profit: X/(h0+X)·B(S+F) − X·C − (X/Z + NRE)/T.
///
/// The first term saturates at one block's value as X grows, which is the
/// structural difference from the linear revenue above.
pub fn legacy_profit(
    hashrate_ghs: f64,
    params: &LegacyProfitParams,
    snap: &NetworkSnapshot,
) -> f64 {
    let x = hashrate_ghs;
    let share = x / (snap.hashrate_ghs + x);
    share * snap.block_value_usd()
        - x * params.opex_per_ghs
        - (x / params.ghs_per_usd + params.nre_usd) / params.amortization_periods
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(d: f64, b: f64, s: f64, f: f64) -> NetworkSnapshot {
        NetworkSnapshot::new(0, 4.0e8, d, b, s, f).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_hashrate_finds_nothing() {
        assert_eq!(expected_blocks_per_day(0.0, 1e11).unwrap(), 0.0);
    }

    #[test]
    fn blocks_per_day_round_trip() {
        // D chosen so 1e9 GH/s finds exactly 144 blocks/day.
        let d = 1e9 * 1e9 * 86_400.0 / (144.0 * HASHES_PER_DIFFICULTY);
        let blocks = expected_blocks_per_day(1e9, d).unwrap();
        assert!(rel(blocks, 144.0) < 1e-12, "{blocks}");
        assert!(rel(d, 1.3971e11) < 1e-4);
    }

    #[test]
    fn single_s7_blocks_per_day() {
        // 4730e9 * 86400 / (1.3971e11 * 2^32), evaluated by hand.
        let blocks = expected_blocks_per_day(4730.0, 1.3971e11).unwrap();
        assert!(rel(blocks, 6.811e-4) < 1e-3, "{blocks}");
    }

    #[test]
    fn bad_difficulty_is_domain_error() {
        assert!(matches!(
            expected_blocks_per_day(1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(expected_blocks_per_day(1.0, -5.0).is_err());
    }

    #[test]
    fn revenue_matches_blocks_times_block_value() {
        let rig = MinerRig::new(1, 4730.0, 1.43).unwrap();
        let s = snap(1.3971e11, 400.0, 25.0, 0.5);
        let oracle = expected_blocks_per_day(4730.0, 1.3971e11).unwrap() * 400.0 * 25.5;
        let r = revenue_per_day(&rig, &s);
        assert!(rel(r, oracle) < 1e-12);
        assert!((r - 6.95).abs() < 0.01, "{r}");
        assert!((revenue_per_hour(&rig, &s) - 0.2895).abs() < 5e-4);
    }

    #[test]
    fn worthless_reward_earns_nothing() {
        let rig = MinerRig::new(3, 4730.0, 1.43).unwrap();
        assert_eq!(revenue_per_day(&rig, &snap(1e11, 0.0, 25.0, 0.5)), 0.0);
    }

    #[test]
    fn hourly_is_daily_over_24() {
        let rig = MinerRig::new(2, 4730.0, 1.43).unwrap();
        let s = snap(5e10, 250.0, 25.0, 0.3);
        let h = revenue_per_hour(&rig, &s);
        assert!(rel(24.0 * h, revenue_per_day(&rig, &s)) < 1e-15);
        let rig2 = MinerRig::new(4, 4730.0, 1.43).unwrap();
        assert!(rel(revenue_per_hour(&rig2, &s), 2.0 * h) < 1e-12);
    }

    #[test]
    fn cost_examples() {
        assert!((cost_per_hour(1.43, 0.10).unwrap() - 0.143).abs() < 1e-12);
        assert_eq!(cost_per_hour(0.0, 0.37).unwrap(), 0.0);
        assert!((cost_per_hour(10.0, 0.0324).unwrap() - 0.324).abs() < 1e-12);
        assert!(matches!(cost_per_hour(1.0, -0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn legacy_profit_examples() {
        let params = LegacyProfitParams::new(1e-4, 100.0, 1e3, 1e5).unwrap();
        let s = NetworkSnapshot::new(0, 1e6, 1e11, 400.0, 25.0, 0.5).unwrap();
        assert!((legacy_profit(0.0, &params, &s) - (-1e5 / 100.0)).abs() < 1e-9);
        // 0.5·10200 − 100 − (1000 + 100000)/100
        assert!((legacy_profit(1e6, &params, &s) - 3990.0).abs() < 1e-6);

        let free = LegacyProfitParams::new(0.0, 1.0, 1e300, 0.0).unwrap();
        let big = legacy_profit(1e12, &free, &s);
        assert!(rel(big, 400.0 * 25.5) < 1e-4);
    }

    #[test]
    fn legacy_revenue_term_is_concave() {
        let free = LegacyProfitParams::new(0.0, 1.0, f64::INFINITY, 0.0).unwrap();
        let s = NetworkSnapshot::new(0, 1e6, 1e11, 400.0, 25.0, 0.5).unwrap();
        let f = |x: f64| legacy_profit(x, &free, &s);
        let step = 2e5;
        for i in 1..40 {
            let x = i as f64 * step;
            let second = f(x + step) - 2.0 * f(x) + f(x - step);
            assert!(second < 0.0, "x={x} second difference {second}");
            assert!(f(x + step) > f(x));
        }
    }

    #[test]
    fn daily_series_broadcasts_to_hours() {
        let day = 86_400;
        let snaps = (0..3)
            .map(|i| NetworkSnapshot::new(i * day, 1e8, 5e10, 250.0 + i as f64, 25.0, 0.3).unwrap())
            .collect();
        let series = NetworkSeries::new(snaps, day).unwrap();
        assert_eq!(series.hours(), 72);
        assert_eq!(series.snapshot_at(day + 3600 * 5).unwrap().price_usd, 251.0);
        assert!(series.snapshot_at(3 * day).is_none());
        assert!(series.snapshot_at(-1).is_none());
    }

    #[test]
    fn series_rejects_uneven_gaps() {
        let a = NetworkSnapshot::new(0, 1e8, 5e10, 250.0, 25.0, 0.3).unwrap();
        let b = NetworkSnapshot {
            timestamp: 3600,
            ..a
        };
        let c = NetworkSnapshot {
            timestamp: 10_800,
            ..a
        };
        assert!(NetworkSeries::new(vec![a, b, c], 3600).is_err());
        assert!(NetworkSeries::new(vec![], 3600).is_err());
        assert!(NetworkSeries::new(vec![a], 1800).is_err());
    }

    #[test]
    fn invalid_rigs_and_snapshots() {
        assert!(MinerRig::new(0, 1.0, 1.0).is_err());
        assert!(MinerRig::new(1, 0.0, 1.0).is_err());
        assert!(MinerRig::new(1, 1.0, -1.0).is_err());
        assert!(NetworkSnapshot::new(0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(NetworkSnapshot::new(0, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(NetworkSnapshot::new(0, 1.0, 1.0, 1.0, 1.0, f64::NAN).is_err());
    }
}
