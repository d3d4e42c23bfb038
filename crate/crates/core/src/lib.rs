//! Proof-of-Work mining economics under real electricity tariffs.
//!
//! Expected revenue comes from the rig's hashrate against network
//! difficulty; cost from its power draw and the hour's electricity price.
//! With day-ahead or time-of-use prices known, the rig can be switched on
//! only in profitable hours. [`scenario::backtest`] compares that against
//! always-on mining over a history.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod scenario;
pub mod scheduler;
pub mod segments;
pub mod tariff;

pub use error::{Error, Result};
pub use model::{MinerRig, NetworkSeries, NetworkSnapshot};
pub use scenario::{backtest, Report, Scenario};
pub use scheduler::{DwellConstraint, Horizon, InitialState, Schedule};
pub use segments::{CapexBreakdown, CostAssumptions, SegmentKind};
pub use tariff::{Band, SupplyBid, Tariff};
