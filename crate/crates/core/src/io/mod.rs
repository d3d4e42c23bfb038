//! File formats: CSV inputs, scenario configs and report outputs.

mod config;
mod csv_files;
mod report;

pub use config::{load_scenario, ScenarioConfig, TariffConfig};
pub use csv_files::{
    format_timestamp, ingest_network_csv, parse_timestamp, read_bids_csv, read_price_csv,
    write_network_csv, NETWORK_HEADER, PRICE_HEADER,
};
pub use report::{
    atomic_write, format_sig9, plot_csv, report_json, schedule_csv, to_canonical_json,
};
