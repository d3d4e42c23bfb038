//! The `minegrid` command line.
//!
//! Exit status: 0 success, 1 validation or usage error, 2 I/O error.

use std::io::Write;
use std::path::PathBuf;

use chrono::{NaiveDate, NaiveTime};
use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{
    atomic_write, format_sig9, format_timestamp, load_scenario, plot_csv, read_bids_csv,
    report_json, schedule_csv, to_canonical_json,
};
use crate::scenario::{backtest_detailed, fleet_plan, Scenario, UnitModel};
use crate::segments::{capex, non_asic_fraction, CostAssumptions, SegmentKind};
use crate::tariff::clear_day_ahead;

#[derive(Debug, Parser)]
#[command(
    name = "minegrid",
    version,
    about = "Mining profitability under electricity tariffs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Backtest always-on against scheduled mining for a scenario.
    Backtest {
        config: PathBuf,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-hour plot data (CSV).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Print the 24-hour schedule for one local day of a scenario.
    Schedule {
        config: PathBuf,
        /// Local date, YYYY-MM-DD.
        #[arg(long)]
        day: NaiveDate,
        /// Also write `timestamp,on,profit_usd` CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Capex breakdown for a deployment.
    Capex {
        #[arg(long)]
        segment: SegmentKind,
        #[arg(long)]
        units: u32,
        /// Facility capacity in MW (professional only).
        #[arg(long)]
        mw: Option<f64>,
        #[arg(long)]
        new_facility: bool,
        #[arg(long, default_value_t = UnitModel::default().power_kw)]
        unit_power: f64,
    },
    /// Miners needed to reach a share of network hashrate.
    FleetPlan {
        #[arg(long)]
        share: f64,
        /// Network hashrate, GH/s.
        #[arg(long)]
        h0: f64,
        /// Hashrate of each miner, GH/s.
        #[arg(long)]
        per_miner: f64,
        #[arg(long)]
        segment: SegmentKind,
        #[arg(long, default_value_t = UnitModel::default().hashrate_ghs)]
        unit_hashrate: f64,
        #[arg(long, default_value_t = UnitModel::default().power_kw)]
        unit_power: f64,
    },
    /// Clear a day-ahead uniform price auction.
    ClearAuction {
        /// CSV with header `bidder_id,quantity_mw,price_usd_per_mwh`.
        #[arg(long)]
        bids: PathBuf,
        #[arg(long)]
        demand: f64,
    },
}

/// Configure logging from `MINEGRID_LOG` (quiet, info or debug).
pub fn init_logging() {
    let level = match std::env::var("MINEGRID_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parse `argv` (program name first), run, and return the exit status.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Backtest {
            config,
            out: report_path,
            plot,
        } => {
            let scenario = load_scenario(&config)?;
            let result = backtest_detailed(&scenario)?;
            let json = report_json(&result.report);
            match report_path {
                Some(p) => {
                    atomic_write(&p, &json)?;
                    emit(out, &summary(&result.report))?;
                }
                None => emit(out, &json)?,
            }
            if let Some(p) = plot {
                atomic_write(&p, &plot_csv(&result.hours))?;
            }
            Ok(())
        }
        Command::Schedule {
            config,
            day,
            out: csv_path,
        } => {
            let scenario = load_scenario(&config)?;
            let day_scenario = one_day(&scenario, day)?;
            let result = backtest_detailed(&day_scenario)?;
            let mut table = format!(
                "{:<26} {:>3} {:>12} {:>12} {:>12} {:>12}\n",
                "hour (UTC)", "on", "usd/kWh", "revenue", "cost", "profit"
            );
            for h in &result.hours {
                table.push_str(&format!(
                    "{:<26} {:>3} {:>12.5} {:>12.5} {:>12.5} {:>12.5}\n",
                    format_timestamp(h.timestamp),
                    if h.on { "on" } else { "off" },
                    h.usd_per_kwh,
                    h.revenue,
                    h.cost,
                    h.profit
                ));
            }
            table.push_str(&format!(
                "duty cycle {}  profit {} USD\n",
                format_sig9(result.report.duty_cycle),
                format_sig9(result.report.profit_smart)
            ));
            emit(out, &table)?;
            if let Some(p) = csv_path {
                atomic_write(&p, &schedule_csv(&result.hours))?;
            }
            Ok(())
        }
        Command::Capex {
            segment,
            units,
            mw,
            new_facility,
            unit_power,
        } => {
            let mw = mw.unwrap_or(f64::from(units) * unit_power / 1000.0);
            let breakdown = capex(
                segment,
                units,
                &CostAssumptions::default(),
                mw,
                new_facility,
            )?;
            let mut value = serde_json::to_value(breakdown).expect("serializable");
            value["non_asic_fraction"] = serde_json::json!(non_asic_fraction(&breakdown)?);
            value["segment"] = serde_json::json!(segment);
            value["units"] = serde_json::json!(units);
            emit(out, &to_canonical_json(&value))
        }
        Command::FleetPlan {
            share,
            h0,
            per_miner,
            segment,
            unit_hashrate,
            unit_power,
        } => {
            let unit = UnitModel {
                hashrate_ghs: unit_hashrate,
                power_kw: unit_power,
            };
            let plan = fleet_plan(
                share,
                h0,
                per_miner,
                segment,
                unit,
                &CostAssumptions::default(),
            )?;
            emit(out, &to_canonical_json(&plan))
        }
        Command::ClearAuction { bids, demand } => {
            let bids = read_bids_csv(&bids)?;
            let result = clear_day_ahead(&bids, demand)?;
            emit(out, &to_canonical_json(&result))
        }
    }
}

/// Scenario restricted to one local calendar day.
fn one_day(scenario: &Scenario, day: NaiveDate) -> Result<Scenario> {
    let offset = i64::from(scenario.tariff.tz_offset_minutes()) * 60;
    let start = day.and_time(NaiveTime::MIN).and_utc().timestamp() - offset;
    let snaps: Vec<_> = (0..24)
        .map(|h| {
            let ts = start + h * 3600;
            scenario
                .network
                .snapshot_at(ts)
                .map(|s| crate::model::NetworkSnapshot {
                    timestamp: ts,
                    ..*s
                })
                .ok_or_else(|| Error::Coverage {
                    epoch: ts,
                    hour: format_timestamp(ts),
                    missing: 1,
                })
        })
        .collect::<Result<_>>()?;
    Ok(Scenario {
        network: crate::model::NetworkSeries::new(snaps, 3600)?,
        ..scenario.clone()
    })
}

fn summary(report: &crate::scenario::Report) -> String {
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), format_sig9);
    format!(
        "{}: always-on {} USD, smart {} USD, multiplier {}, duty cycle {}, avg {} USD/kWh, roi {} days\n",
        report.name,
        format_sig9(report.profit_always_on),
        format_sig9(report.profit_smart),
        opt(report.multiplier),
        format_sig9(report.duty_cycle),
        format_sig9(report.avg_effective_price),
        opt(report.roi_days)
    )
}
