//! Scenario config files (JSON). Relative paths resolve against the
//! directory holding the config.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::csv_files::{ingest_network_csv, read_price_csv};
use crate::model::MinerRig;
use crate::scenario::{Scenario, UnitModel};
use crate::scheduler::DwellConstraint;
use crate::segments::{CostAssumptions, SegmentKind};
use crate::tariff::{Band, Tariff};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub network_csv: PathBuf,
    pub tariff: TariffSource,
    pub rig: RigConfig,
    pub segment: SegmentKind,
    #[serde(default)]
    pub dwell: Option<DwellConstraint>,
    #[serde(default)]
    pub assumptions: Option<CostAssumptions>,
    #[serde(default)]
    pub duty_override: Option<f64>,
    #[serde(default)]
    pub mw_capacity: Option<f64>,
    #[serde(default)]
    pub new_facility: bool,
    #[serde(default)]
    pub opex_usd_per_hour: f64,
    #[serde(default)]
    pub transforms: Transforms,
}

/// Inline tariff, or a path to a tariff JSON file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TariffSource {
    Path(PathBuf),
    Inline(TariffConfig),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TariffConfig {
    Fixed {
        usd_per_kwh: f64,
    },
    Tou {
        #[serde(default)]
        tz_offset_minutes: i32,
        bands: Vec<Band>,
    },
    /// Hourly `timestamp,usd_per_kwh` CSV.
    Hourly {
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigConfig {
    pub unit_count: u32,
    #[serde(default = "default_unit_hashrate")]
    pub unit_hashrate_ghs: f64,
    #[serde(default = "default_unit_power")]
    pub unit_power_kw: f64,
}

fn default_unit_hashrate() -> f64 {
    UnitModel::default().hashrate_ghs
}

fn default_unit_power() -> f64 {
    UnitModel::default().power_kw
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transforms {
    /// Multiplies every electricity price.
    #[serde(default)]
    pub price_scale: Option<f64>,
    /// Replaces the block subsidy in every snapshot.
    #[serde(default)]
    pub block_reward_btc: Option<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

impl TariffConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<TariffConfig> {
        read_json(path.as_ref())
    }

    /// Build the tariff; `base` resolves a relative CSV path.
    pub fn build(&self, base: &Path) -> Result<Tariff> {
        match self {
            TariffConfig::Fixed { usd_per_kwh } => Tariff::fixed(*usd_per_kwh),
            TariffConfig::Tou {
                tz_offset_minutes,
                bands,
            } => Tariff::time_of_use(bands.clone(), *tz_offset_minutes),
            TariffConfig::Hourly { csv } => read_price_csv(base.join(csv)),
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let config: ScenarioConfig = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let config_err = |e: Error| match e {
        Error::Domain(m) | Error::Constraint(m) => Error::Config {
            path: path.to_path_buf(),
            message: m,
        },
        other => other,
    };

    let network = ingest_network_csv(base.join(&config.network_csv))?;
    let tariff = match &config.tariff {
        TariffSource::Inline(t) => t.build(base).map_err(config_err)?,
        TariffSource::Path(p) => {
            let p = base.join(p);
            let t = TariffConfig::load(&p)?;
            let dir = p.parent().unwrap_or(Path::new(".")).to_path_buf();
            t.build(&dir).map_err(|e| match e {
                Error::Domain(message) => Error::Config {
                    path: p.clone(),
                    message,
                },
                other => other,
            })?
        }
    };
    let rig = MinerRig::new(
        config.rig.unit_count,
        config.rig.unit_hashrate_ghs,
        config.rig.unit_power_kw,
    )
    .map_err(config_err)?;

    let mut scenario = Scenario::new(config.name.clone(), network, tariff, rig, config.segment);
    if let Some(d) = config.dwell {
        scenario.dwell = d;
    }
    if let Some(a) = config.assumptions {
        scenario.assumptions = a;
    }
    scenario.duty_override = config.duty_override;
    scenario.mw_capacity = config.mw_capacity;
    scenario.new_facility = config.new_facility;
    scenario.opex_usd_per_hour = config.opex_usd_per_hour;
    if let Some(k) = config.transforms.price_scale {
        scenario = scenario.with_price_scale(k).map_err(config_err)?;
    }
    if let Some(s) = config.transforms.block_reward_btc {
        scenario = scenario.with_block_reward(s).map_err(config_err)?;
    }
    scenario.validate().map_err(config_err)?;
    log::info!(
        "loaded scenario '{}' ({} hours)",
        scenario.name,
        scenario.network.hours()
    );
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tou_schema_parses() {
        let t: TariffConfig = serde_json::from_str(
            r#"{"kind":"tou","tz_offset_minutes":-300,"bands":[
                {"start":0,"end":8,"usd_per_kwh":0.05},
                {"start":8,"end":24,"usd_per_kwh":0.2}]}"#,
        )
        .unwrap();
        let tariff = t.build(Path::new(".")).unwrap();
        assert_eq!(tariff.tz_offset_minutes(), -300);
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<TariffConfig, _> =
            serde_json::from_str(r#"{"kind":"fixed","usd_per_kwh":0.1,"extra":1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn partial_assumptions_keep_defaults() {
        let a: CostAssumptions = serde_json::from_str(r#"{"smart_meter_price": 1500}"#).unwrap();
        assert_eq!(a.smart_meter_price, 1500.0);
        assert_eq!(a.base_unit_price, 1000.0);
    }
}
