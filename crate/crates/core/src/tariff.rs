//! Electricity price schedules and the day-ahead uniform clearing auction.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{hour_label, Error, Result};
use crate::scheduler::Schedule;

pub const SECONDS_PER_HOUR: i64 = 3600;

/// A time-of-use band. `end` is exclusive and may wrap past midnight,
/// e.g. `start = 22, end = 6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub start: u8,
    pub end: u8,
    pub usd_per_kwh: f64,
}

impl Band {
    pub fn contains(&self, hour: u8) -> bool {
        if self.start < self.end {
            (self.start..self.end).contains(&hour)
        } else {
            hour >= self.start || hour < self.end
        }
    }

    pub fn hours(&self) -> u32 {
        let (s, e) = (u32::from(self.start), u32::from(self.end));
        if s < e {
            e - s
        } else {
            24 - s + e
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tariff {
    Fixed {
        usd_per_kwh: f64,
    },
    TimeOfUse {
        bands: Vec<Band>,
        /// Offset of tariff-local civil time from UTC; DST is ignored.
        tz_offset_minutes: i32,
    },
    /// Hour-start epoch seconds to USD/kWh.
    HourlySeries {
        prices: BTreeMap<i64, f64>,
    },
}

fn check_price(p: f64) -> Result<()> {
    if p.is_finite() && p >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "electricity price must be >= 0, got {p}"
        )))
    }
}

impl Tariff {
    pub fn fixed(usd_per_kwh: f64) -> Result<Self> {
        check_price(usd_per_kwh)?;
        Ok(Tariff::Fixed { usd_per_kwh })
    }

    /// Bands must cover each hour of the day exactly once.
    pub fn time_of_use(bands: Vec<Band>, tz_offset_minutes: i32) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::domain("time-of-use tariff needs at least one band"));
        }
        let mut owner: [Option<usize>; 24] = [None; 24];
        for (i, band) in bands.iter().enumerate() {
            if band.start > 23 || band.end > 24 || band.start == band.end {
                return Err(Error::domain(format!(
                    "band {i} has invalid hours {}..{}",
                    band.start, band.end
                )));
            }
            check_price(band.usd_per_kwh)?;
            for hour in 0..24u8 {
                if band.contains(hour) {
                    if let Some(j) = owner[usize::from(hour)] {
                        return Err(Error::domain(format!(
                            "bands {j} and {i} overlap at hour {hour}"
                        )));
                    }
                    owner[usize::from(hour)] = Some(i);
                }
            }
        }
        if let Some(gap) = owner.iter().position(Option::is_none) {
            return Err(Error::domain(format!("no band covers hour {gap}")));
        }
        if tz_offset_minutes.abs() >= 24 * 60 {
            return Err(Error::domain("tz offset must be within a day"));
        }
        Ok(Tariff::TimeOfUse {
            bands,
            tz_offset_minutes,
        })
    }

    /// Keys are truncated to the start of their UTC hour.
    pub fn hourly_series(prices: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ts, p) in prices {
            check_price(p)?;
            if map.insert(hour_start(ts), p).is_some() {
                return Err(Error::domain(format!(
                    "duplicate price for hour {}",
                    hour_label(hour_start(ts))
                )));
            }
        }
        Ok(Tariff::HourlySeries { prices: map })
    }

    /// Same schedule with every price multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_price(factor)?;
        Ok(match self {
            Tariff::Fixed { usd_per_kwh } => Tariff::Fixed {
                usd_per_kwh: usd_per_kwh * factor,
            },
            Tariff::TimeOfUse {
                bands,
                tz_offset_minutes,
            } => Tariff::TimeOfUse {
                bands: bands
                    .iter()
                    .map(|b| Band {
                        usd_per_kwh: b.usd_per_kwh * factor,
                        ..*b
                    })
                    .collect(),
                tz_offset_minutes: *tz_offset_minutes,
            },
            Tariff::HourlySeries { prices } => Tariff::HourlySeries {
                prices: prices.iter().map(|(&t, &p)| (t, p * factor)).collect(),
            },
        })
    }

    /// Offset used to map UTC onto local civil hours.
    pub fn tz_offset_minutes(&self) -> i32 {
        match self {
            Tariff::TimeOfUse {
                tz_offset_minutes, ..
            } => *tz_offset_minutes,
            _ => 0,
        }
    }
}

pub fn hour_start(ts: i64) -> i64 {
    ts.div_euclid(SECONDS_PER_HOUR) * SECONDS_PER_HOUR
}

/// Local civil hour (0..24) of `ts` under a fixed offset.
pub fn local_hour(ts: i64, tz_offset_minutes: i32) -> u8 {
    let local = ts + i64::from(tz_offset_minutes) * 60;
    (local.div_euclid(SECONDS_PER_HOUR).rem_euclid(24)) as u8
}

/// Price in effect at `timestamp`, USD/kWh.
pub fn price_at(tariff: &Tariff, timestamp: i64) -> Result<f64> {
    match tariff {
        Tariff::Fixed { usd_per_kwh } => Ok(*usd_per_kwh),
        Tariff::TimeOfUse {
            bands,
            tz_offset_minutes,
        } => {
            let hour = local_hour(timestamp, *tz_offset_minutes);
            bands
                .iter()
                .find(|b| b.contains(hour))
                .map(|b| b.usd_per_kwh)
                .ok_or_else(|| Error::domain(format!("no band covers local hour {hour}")))
        }
        Tariff::HourlySeries { prices } => {
            let key = hour_start(timestamp);
            prices.get(&key).copied().ok_or_else(|| Error::MissingHour {
                epoch: key,
                hour: hour_label(key),
            })
        }
    }
}

/// Energy-weighted average price paid over the schedule's on-hours.
///
/// With no on-hours nothing is billed; the plain mean price over the whole
/// horizon is reported instead.
pub fn average_effective_price(tariff: &Tariff, schedule: &Schedule, power_kw: f64) -> Result<f64> {
    let mut cost = 0.0;
    let mut energy = 0.0;
    let mut on_price_sum = 0.0;
    let mut on_hours = 0usize;
    let mut all_sum = 0.0;
    for (i, &on) in schedule.hours().iter().enumerate() {
        let price = price_at(tariff, schedule.hour_timestamp(i))?;
        all_sum += price;
        if on {
            cost += power_kw * price;
            energy += power_kw;
            on_price_sum += price;
            on_hours += 1;
        }
    }
    if on_hours == 0 {
        return Ok(all_sum / schedule.len() as f64);
    }
    if energy > 0.0 {
        Ok(cost / energy)
    } else {
        // zero draw: the weight cancels, fall back to the per-hour mean
        Ok(on_price_sum / on_hours as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplyBid {
    pub bidder_id: String,
    /// MW offered.
    pub quantity: f64,
    /// USD/MWh asked.
    pub price: f64,
}

impl SupplyBid {
    pub fn new(bidder_id: impl Into<String>, quantity: f64, price: f64) -> Result<Self> {
        let bid = SupplyBid {
            bidder_id: bidder_id.into(),
            quantity,
            price,
        };
        bid.validate()?;
        Ok(bid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quantity.is_finite() && self.quantity > 0.0) {
            return Err(Error::domain(format!(
                "bid '{}' quantity must be > 0, got {}",
                self.bidder_id, self.quantity
            )));
        }
        if !(self.price.is_finite() && self.price >= 0.0) {
            return Err(Error::domain(format!(
                "bid '{}' price must be >= 0, got {}",
                self.bidder_id, self.price
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClearingResult {
    /// USD/MWh paid to every accepted bid.
    pub clearing_price: f64,
    /// (bidder_id, MW accepted), in the order the bids were submitted.
    pub dispatched: Vec<(String, f64)>,
    pub total_dispatched: f64,
}

/// Merit-order dispatch with a uniform price set by the marginal bid.
///
/// Equal prices are ordered by bidder id, then submission order. The
/// marginal bid is partially accepted so dispatch meets demand exactly.
pub fn clear_day_ahead(bids: &[SupplyBid], demand_mw: f64) -> Result<ClearingResult> {
    if !(demand_mw.is_finite() && demand_mw > 0.0) {
        return Err(Error::domain(format!(
            "demand must be > 0, got {demand_mw}"
        )));
    }
    if bids.is_empty() {
        return Err(Error::domain("no supply bids"));
    }
    for bid in bids {
        bid.validate()?;
    }
    let offered: f64 = bids.iter().map(|b| b.quantity).sum();
    if demand_mw > offered {
        return Err(Error::Shortage {
            deficit: demand_mw - offered,
        });
    }

    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| {
        bids[a]
            .price
            .partial_cmp(&bids[b].price)
            .unwrap_or(Ordering::Equal)
            .then_with(|| bids[a].bidder_id.cmp(&bids[b].bidder_id))
            .then(a.cmp(&b))
    });

    let mut accepted = vec![0.0; bids.len()];
    let mut remaining = demand_mw;
    let mut clearing_price = bids[order[0]].price;
    for &i in &order {
        if remaining <= 0.0 {
            break;
        }
        let take = bids[i].quantity.min(remaining);
        accepted[i] = take;
        remaining -= take;
        clearing_price = bids[i].price;
    }

    Ok(ClearingResult {
        clearing_price,
        dispatched: bids
            .iter()
            .zip(accepted)
            .map(|(b, mw)| (b.bidder_id.clone(), mw))
            .collect(),
        total_dispatched: demand_mw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clearing_ignores_rounding_residue() {
        let bids = vec![
            SupplyBid::new("d", 47.2258632848255, 35.0).unwrap(),
            SupplyBid::new("d", 6.25851321987959, 20.0).unwrap(),
            SupplyBid::new("e", 48.768051657791275, 59.0).unwrap(),
        ];
        let r = clear_day_ahead(&bids, 14.31533994274949).unwrap();
        assert_eq!(r.clearing_price, 35.0);
        assert_eq!(r.dispatched[2].1, 0.0);
    }

    fn tou() -> Tariff {
        Tariff::time_of_use(
            vec![
                Band {
                    start: 0,
                    end: 8,
                    usd_per_kwh: 0.05,
                },
                Band {
                    start: 8,
                    end: 22,
                    usd_per_kwh: 0.25,
                },
                Band {
                    start: 22,
                    end: 24,
                    usd_per_kwh: 0.05,
                },
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn fixed_is_constant() {
        let t = Tariff::fixed(0.12).unwrap();
        for ts in [0, 12_345, 1_438_387_200] {
            assert_eq!(price_at(&t, ts).unwrap(), 0.12);
        }
    }

    #[test]
    fn tou_band_lookup() {
        let t = tou();
        assert_eq!(price_at(&t, 9 * 3600).unwrap(), 0.25);
        assert_eq!(price_at(&t, 23 * 3600).unwrap(), 0.05);
        assert_eq!(price_at(&t, 24 * 3600 + 7 * 3600 + 1800).unwrap(), 0.05);
    }

    #[test]
    fn tou_uses_local_hour() {
        let t = Tariff::time_of_use(
            vec![
                Band {
                    start: 22,
                    end: 6,
                    usd_per_kwh: 0.01,
                },
                Band {
                    start: 6,
                    end: 22,
                    usd_per_kwh: 0.30,
                },
            ],
            -300,
        )
        .unwrap();
        // 03:00 UTC is 22:00 at UTC-5
        assert_eq!(price_at(&t, 3 * 3600).unwrap(), 0.01);
        // 10:00 UTC is 05:00 local
        assert_eq!(price_at(&t, 10 * 3600).unwrap(), 0.01);
        assert_eq!(price_at(&t, 11 * 3600).unwrap(), 0.30);
        // before the epoch
        assert_eq!(local_hour(-3600, 0), 23);
    }

    #[test]
    fn tou_partition_is_checked() {
        let gap = Tariff::time_of_use(
            vec![Band {
                start: 0,
                end: 23,
                usd_per_kwh: 0.1,
            }],
            0,
        );
        assert!(gap.is_err());
        let overlap = Tariff::time_of_use(
            vec![
                Band {
                    start: 0,
                    end: 24,
                    usd_per_kwh: 0.1,
                },
                Band {
                    start: 5,
                    end: 6,
                    usd_per_kwh: 0.1,
                },
            ],
            0,
        );
        assert!(overlap.is_err());
        let negative = Tariff::time_of_use(
            vec![Band {
                start: 0,
                end: 24,
                usd_per_kwh: -0.1,
            }],
            0,
        );
        assert!(negative.is_err());
        assert!(Tariff::fixed(-1.0).is_err());
    }

    #[test]
    fn band_hours_sum_to_day() {
        if let Tariff::TimeOfUse { bands, .. } = tou() {
            assert_eq!(bands.iter().map(Band::hours).sum::<u32>(), 24);
        }
        let wrap = Band {
            start: 22,
            end: 6,
            usd_per_kwh: 0.0,
        };
        assert_eq!(wrap.hours(), 8);
    }

    #[test]
    fn hourly_series_missing_hour_names_it() {
        let t = Tariff::hourly_series([(0, 0.1), (3600, 0.2)]).unwrap();
        assert_eq!(price_at(&t, 3600 + 59).unwrap(), 0.2);
        match price_at(&t, 7200) {
            Err(Error::MissingHour { epoch, hour }) => {
                assert_eq!(epoch, 7200);
                assert!(hour.starts_with("1970-01-01T02:00:00"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn average_price_examples() {
        let fixed = Tariff::fixed(0.10).unwrap();
        let mut flags = vec![false; 24];
        flags[3] = true;
        let s = Schedule::new(0, flags).unwrap();
        assert!((average_effective_price(&fixed, &s, 1.43).unwrap() - 0.10).abs() < 1e-15);

        let split = Tariff::time_of_use(
            vec![
                Band {
                    start: 0,
                    end: 12,
                    usd_per_kwh: 0.05,
                },
                Band {
                    start: 12,
                    end: 24,
                    usd_per_kwh: 0.15,
                },
            ],
            0,
        )
        .unwrap();
        let morning = Schedule::new(0, (0..24).map(|h| h < 12).collect()).unwrap();
        assert!((average_effective_price(&split, &morning, 1.43).unwrap() - 0.05).abs() < 1e-15);
        let always = Schedule::new(0, vec![true; 24]).unwrap();
        let avg = average_effective_price(&split, &always, 1.43).unwrap();
        assert!((avg - (12.0 * 0.05 + 12.0 * 0.15) / 24.0).abs() < 1e-12);

        let never = Schedule::new(0, vec![false; 24]).unwrap();
        assert!((average_effective_price(&split, &never, 1.43).unwrap() - 0.10).abs() < 1e-12);
    }

    fn bids() -> Vec<SupplyBid> {
        vec![
            SupplyBid::new("a", 100.0, 20.0).unwrap(),
            SupplyBid::new("b", 50.0, 30.0).unwrap(),
            SupplyBid::new("c", 80.0, 40.0).unwrap(),
        ]
    }

    #[test]
    fn clearing_example() {
        let r = clear_day_ahead(&bids(), 130.0).unwrap();
        assert_eq!(r.clearing_price, 30.0);
        let mw: Vec<f64> = r.dispatched.iter().map(|d| d.1).collect();
        assert_eq!(mw, vec![100.0, 30.0, 0.0]);
        assert_eq!(r.total_dispatched, 130.0);
    }

    #[test]
    fn clearing_exact_single_bid() {
        let r = clear_day_ahead(&[SupplyBid::new("x", 100.0, 20.0).unwrap()], 100.0).unwrap();
        assert_eq!(r.clearing_price, 20.0);
        assert_eq!(r.dispatched[0].1, 100.0);
    }

    #[test]
    fn clearing_shortage_reports_deficit() {
        let b = vec![
            SupplyBid::new("x", 60.0, 20.0).unwrap(),
            SupplyBid::new("y", 40.0, 25.0).unwrap(),
        ];
        match clear_day_ahead(&b, 150.0) {
            Err(Error::Shortage { deficit }) => assert!((deficit - 50.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(clear_day_ahead(&b, 0.0), Err(Error::Domain(_))));
        assert!(matches!(clear_day_ahead(&[], 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn clearing_ties_break_on_bidder_id() {
        let b = vec![
            SupplyBid::new("zeta", 50.0, 10.0).unwrap(),
            SupplyBid::new("alpha", 50.0, 10.0).unwrap(),
        ];
        let r = clear_day_ahead(&b, 60.0).unwrap();
        assert_eq!(r.dispatched[1], ("alpha".to_string(), 50.0));
        assert_eq!(r.dispatched[0], ("zeta".to_string(), 10.0));
    }

    #[test]
    fn invalid_bids_rejected() {
        assert!(SupplyBid::new("a", 0.0, 1.0).is_err());
        assert!(SupplyBid::new("a", 1.0, -1.0).is_err());
    }
}
