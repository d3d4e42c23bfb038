//! Miner scale segments: power envelopes, order discounts and capex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Hobbyist,
    SemiProfessional,
    Professional,
}

impl SegmentKind {
    pub fn spec(self) -> SegmentSpec {
        match self {
            SegmentKind::Hobbyist => SegmentSpec {
                kind: self,
                min_power_kw: 0.0,
                max_power_kw: Some(10.0),
            },
            SegmentKind::SemiProfessional => SegmentSpec {
                kind: self,
                min_power_kw: 50.0,
                max_power_kw: Some(250.0),
            },
            SegmentKind::Professional => SegmentSpec {
                kind: self,
                min_power_kw: 1000.0,
                max_power_kw: None,
            },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Hobbyist => "hobbyist",
            SegmentKind::SemiProfessional => "semi_professional",
            SegmentKind::Professional => "professional",
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SegmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hobbyist" => Ok(SegmentKind::Hobbyist),
            "semi_professional" | "semipro" | "semi" => Ok(SegmentKind::SemiProfessional),
            "professional" | "pro" => Ok(SegmentKind::Professional),
            _ => Err(Error::domain(format!("unknown segment '{s}'"))),
        }
    }
}

/// Descriptive power envelope of a segment. `max_power_kw = None` is
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSpec {
    pub kind: SegmentKind,
    pub min_power_kw: f64,
    pub max_power_kw: Option<f64>,
}

/// Power thresholds that partition every positive draw into a segment.
pub const HOBBYIST_MAX_KW: f64 = 10.0;
pub const SEMI_PROFESSIONAL_MAX_KW: f64 = 250.0;

pub fn classify(total_power_kw: f64) -> Result<SegmentKind> {
    if !(total_power_kw.is_finite() && total_power_kw > 0.0) {
        return Err(Error::domain(format!(
            "total power must be > 0, got {total_power_kw}"
        )));
    }
    Ok(if total_power_kw <= HOBBYIST_MAX_KW {
        SegmentKind::Hobbyist
    } else if total_power_kw <= SEMI_PROFESSIONAL_MAX_KW {
        SegmentKind::SemiProfessional
    } else {
        SegmentKind::Professional
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostAssumptions {
    /// USD per ASIC unit (ASIC plus power supply) before discounts.
    pub base_unit_price: f64,
    pub semi_pro_discount: f64,
    /// Orders of at least this many units get the semi-pro discount.
    pub semi_pro_discount_threshold: u32,
    pub pro_discount: f64,
    pub pro_discount_threshold: u32,
    pub smart_meter_price: f64,
    /// Fixed part of semi-pro racks and networking, USD.
    pub racks_networking_base: f64,
    /// Per-unit part of semi-pro racks and networking, USD.
    pub racks_networking_per_unit: f64,
    /// Professional infrastructure (power distribution, cooling, layout)
    /// per MW, USD. Must lie in `infra_per_mw_range`.
    pub infra_per_mw: f64,
    pub infra_per_mw_range: (f64, f64),
    pub step_down_per_mw: f64,
    pub hobbyist_units: (u32, u32),
    pub semi_pro_units: (u32, u32),
    pub pro_min_units: u32,
}

impl Default for CostAssumptions {
    fn default() -> Self {
        CostAssumptions {
            base_unit_price: 1000.0,
            semi_pro_discount: 0.005,
            semi_pro_discount_threshold: 30,
            pro_discount: 0.015,
            pro_discount_threshold: 300,
            smart_meter_price: 2000.0,
            racks_networking_base: 2000.0,
            racks_networking_per_unit: 300.0,
            infra_per_mw: 150_000.0,
            infra_per_mw_range: (50_000.0, 250_000.0),
            step_down_per_mw: 200_000.0,
            hobbyist_units: (1, 7),
            semi_pro_units: (30, 150),
            pro_min_units: 500,
        }
    }
}

impl CostAssumptions {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("semi_pro_discount", self.semi_pro_discount),
            ("pro_discount", self.pro_discount),
        ] {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::domain(format!("{name} must be in [0, 1), got {d}")));
            }
        }
        for (name, p) in [
            ("base_unit_price", self.base_unit_price),
            ("smart_meter_price", self.smart_meter_price),
            ("racks_networking_base", self.racks_networking_base),
            ("racks_networking_per_unit", self.racks_networking_per_unit),
            ("infra_per_mw", self.infra_per_mw),
            ("step_down_per_mw", self.step_down_per_mw),
        ] {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::domain(format!("{name} must be >= 0, got {p}")));
            }
        }
        let (lo, hi) = self.infra_per_mw_range;
        if !(lo <= self.infra_per_mw && self.infra_per_mw <= hi) {
            return Err(Error::domain(format!(
                "infra_per_mw {} outside configured range [{lo}, {hi}]",
                self.infra_per_mw
            )));
        }
        if self.semi_pro_discount_threshold > self.pro_discount_threshold {
            return Err(Error::domain("discount thresholds out of order"));
        }
        if self.pro_discount < self.semi_pro_discount {
            return Err(Error::domain(
                "professional discount below semi-pro discount",
            ));
        }
        Ok(())
    }

    /// Unit-count range a segment may deploy; `None` upper bound is open.
    pub fn unit_envelope(&self, kind: SegmentKind) -> (u32, Option<u32>) {
        match kind {
            SegmentKind::Hobbyist => (self.hobbyist_units.0, Some(self.hobbyist_units.1)),
            SegmentKind::SemiProfessional => (self.semi_pro_units.0, Some(self.semi_pro_units.1)),
            SegmentKind::Professional => (self.pro_min_units, None),
        }
    }

    pub fn check_units(&self, kind: SegmentKind, unit_count: u32) -> Result<()> {
        let (lo, hi) = self.unit_envelope(kind);
        if unit_count < lo || hi.is_some_and(|hi| unit_count > hi) {
            let range = match hi {
                Some(hi) => format!("{lo}..={hi}"),
                None => format!("{lo} or more"),
            };
            return Err(Error::Constraint(format!(
                "{kind} deployment of {unit_count} units outside envelope ({range} units)"
            )));
        }
        Ok(())
    }
}

/// Per-unit ASIC price for an order of `order_size` units. Flat tiers.
pub fn unit_price(order_size: u32, assumptions: &CostAssumptions) -> f64 {
    let discount = if order_size >= assumptions.pro_discount_threshold {
        assumptions.pro_discount
    } else if order_size >= assumptions.semi_pro_discount_threshold {
        assumptions.semi_pro_discount
    } else {
        0.0
    };
    assumptions.base_unit_price * (1.0 - discount)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CapexBreakdown {
    pub asic_units: f64,
    pub smart_meter: f64,
    pub racks_networking: f64,
    pub infrastructure: f64,
    pub step_down: f64,
    pub total: f64,
}

impl CapexBreakdown {
    fn from_parts(
        asic_units: f64,
        smart_meter: f64,
        racks_networking: f64,
        infrastructure: f64,
        step_down: f64,
    ) -> Self {
        CapexBreakdown {
            asic_units,
            smart_meter,
            racks_networking,
            infrastructure,
            step_down,
            total: asic_units + smart_meter + racks_networking + infrastructure + step_down,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        CapexBreakdown::from_parts(
            self.asic_units * k,
            self.smart_meter * k,
            self.racks_networking * k,
            self.infrastructure * k,
            self.step_down * k,
        )
    }
}

/// Up-front cost of a deployment, facility purchase excluded.
///
/// `mw_capacity` and `new_facility` only matter for professionals; step-down
/// transformers are bought only for a new facility.
pub fn capex(
    kind: SegmentKind,
    unit_count: u32,
    assumptions: &CostAssumptions,
    mw_capacity: f64,
    new_facility: bool,
) -> Result<CapexBreakdown> {
    assumptions.validate()?;
    assumptions.check_units(kind, unit_count)?;
    let asic = f64::from(unit_count) * unit_price(unit_count, assumptions);
    Ok(match kind {
        SegmentKind::Hobbyist => {
            CapexBreakdown::from_parts(asic, assumptions.smart_meter_price, 0.0, 0.0, 0.0)
        }
        SegmentKind::SemiProfessional => {
            let racks = assumptions.racks_networking_base
                + f64::from(unit_count) * assumptions.racks_networking_per_unit;
            CapexBreakdown::from_parts(asic, 0.0, racks, 0.0, 0.0)
        }
        SegmentKind::Professional => {
            if !(mw_capacity.is_finite() && mw_capacity > 0.0) {
                return Err(Error::Constraint(format!(
                    "professional capex needs a positive MW capacity, got {mw_capacity}"
                )));
            }
            let infra = assumptions.infra_per_mw * mw_capacity;
            let step_down = if new_facility {
                assumptions.step_down_per_mw * mw_capacity
            } else {
                0.0
            };
            CapexBreakdown::from_parts(asic, 0.0, 0.0, infra, step_down)
        }
    })
}

/// Share of capex not spent on ASIC units.
pub fn non_asic_fraction(breakdown: &CapexBreakdown) -> Result<f64> {
    if !(breakdown.total > 0.0) {
        return Err(Error::domain("capex total must be > 0"));
    }
    Ok((breakdown.total - breakdown.asic_units) / breakdown.total)
}
