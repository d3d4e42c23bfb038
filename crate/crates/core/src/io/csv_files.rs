use std::fs::File;
use std::path::Path;

use chrono::{DateTime, SecondsFormat};

use crate::error::{Error, Result};
use crate::model::{NetworkSeries, NetworkSnapshot};
use crate::tariff::{SupplyBid, Tariff, SECONDS_PER_HOUR};

pub const NETWORK_HEADER: [&str; 6] = [
    "timestamp",
    "hashrate_ghs",
    "difficulty",
    "price_usd",
    "block_reward_btc",
    "fees_btc_per_block",
];
pub const PRICE_HEADER: [&str; 2] = ["timestamp", "usd_per_kwh"];
pub const BID_HEADER: [&str; 3] = ["bidder_id", "quantity_mw", "price_usd_per_mwh"];

/// ISO-8601 / RFC 3339 with an explicit offset, to epoch seconds.
pub fn parse_timestamp(s: &str) -> std::result::Result<i64, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|e| format!("bad timestamp '{s}': {e} (need ISO-8601 with offset)"))
}

pub fn format_timestamp(epoch: i64) -> String {
    DateTime::from_timestamp(epoch, 0)
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, false))
        .unwrap_or_else(|| epoch.to_string())
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn check_header(path: &Path, reader: &mut csv::Reader<File>, expected: &[&str]) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let got: Vec<&str> = header.iter().collect();
    if got.iter().any(|h| h.contains("per_day")) {
        return Err(parse_err(
            path,
            1,
            "per-day fee column is not accepted; fees must be BTC per block",
        ));
    }
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

/// Rows as (line number, record).
fn records(path: &Path, reader: &mut csv::Reader<File>) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    Ok(rows)
}

fn field_f64(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            parse_err(
                path,
                line,
                format!("{name}: '{raw}' is not a finite number"),
            )
        })
}

fn field_ts(path: &Path, line: u64, rec: &csv::StringRecord) -> Result<i64> {
    parse_timestamp(rec.get(0).unwrap_or("")).map_err(|m| parse_err(path, line, m))
}

/// Uniform, increasing cadence; the error names the offending line.
fn detect_cadence(path: &Path, stamps: &[(u64, i64)]) -> Result<i64> {
    let cadence_err = |line: u64, message: String| Error::Cadence {
        path: path.to_path_buf(),
        line,
        message,
    };
    let Some(first_gap) = stamps.get(1).map(|b| b.1 - stamps[0].1) else {
        return Ok(SECONDS_PER_HOUR);
    };
    for pair in stamps.windows(2) {
        let (line, ts) = pair[1];
        let gap = ts - pair[0].1;
        if gap <= 0 {
            return Err(cadence_err(
                line,
                format!(
                    "timestamp does not increase (previous row is {} s later)",
                    -gap
                ),
            ));
        }
        if gap != first_gap {
            return Err(cadence_err(
                line,
                format!("gap of {gap} s differs from the series cadence of {first_gap} s"),
            ));
        }
    }
    if first_gap % SECONDS_PER_HOUR != 0 {
        return Err(cadence_err(
            stamps[1].0,
            format!("cadence of {first_gap} s is not a whole number of hours"),
        ));
    }
    Ok(first_gap)
}

/// Read a network history (hourly or daily rows).
pub fn ingest_network_csv(path: impl AsRef<Path>) -> Result<NetworkSeries> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    check_header(path, &mut reader, &NETWORK_HEADER)?;
    let mut snaps = Vec::new();
    let mut stamps = Vec::new();
    for (line, rec) in records(path, &mut reader)? {
        if rec.len() != NETWORK_HEADER.len() {
            return Err(parse_err(
                path,
                line,
                format!(
                    "expected {} fields, got {}",
                    NETWORK_HEADER.len(),
                    rec.len()
                ),
            ));
        }
        let ts = field_ts(path, line, &rec)?;
        let mut values = [0.0; 5];
        for (i, v) in values.iter_mut().enumerate() {
            *v = field_f64(path, line, &rec, i + 1, NETWORK_HEADER[i + 1])?;
        }
        let snap = NetworkSnapshot::new(ts, values[0], values[1], values[2], values[3], values[4])
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        stamps.push((line, ts));
        snaps.push(snap);
    }
    let cadence = detect_cadence(path, &stamps)?;
    log::debug!(
        "{}: {} snapshots, cadence {} s",
        path.display(),
        snaps.len(),
        cadence
    );
    NetworkSeries::new(snaps, cadence).map_err(|e| parse_err(path, 0, e.to_string()))
}

/// Write a series in the format [`ingest_network_csv`] reads.
pub fn write_network_csv(series: &NetworkSeries) -> String {
    let mut out = NETWORK_HEADER.join(",");
    out.push('\n');
    for s in series.snapshots() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_timestamp(s.timestamp),
            s.hashrate_ghs,
            s.difficulty,
            s.price_usd,
            s.block_reward_btc,
            s.fees_btc
        ));
    }
    out
}

/// Read an hourly price file into an hourly-series tariff. Gaps between
/// hours are rejected.
pub fn read_price_csv(path: impl AsRef<Path>) -> Result<Tariff> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    check_header(path, &mut reader, &PRICE_HEADER)?;
    let mut prices = Vec::new();
    let mut stamps = Vec::new();
    for (line, rec) in records(path, &mut reader)? {
        let ts = field_ts(path, line, &rec)?;
        let price = field_f64(path, line, &rec, 1, "usd_per_kwh")?;
        if price < 0.0 {
            return Err(parse_err(path, line, format!("negative price {price}")));
        }
        stamps.push((line, ts));
        prices.push((ts, price));
    }
    let cadence = detect_cadence(path, &stamps)?;
    if cadence != SECONDS_PER_HOUR {
        return Err(Error::Cadence {
            path: path.to_path_buf(),
            line: stamps[1].0,
            message: format!("price rows must be hourly, found a {cadence} s cadence"),
        });
    }
    Tariff::hourly_series(prices).map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn read_bids_csv(path: impl AsRef<Path>) -> Result<Vec<SupplyBid>> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    check_header(path, &mut reader, &BID_HEADER)?;
    records(path, &mut reader)?
        .into_iter()
        .map(|(line, rec)| {
            let id = rec.get(0).unwrap_or("").to_string();
            let q = field_f64(path, line, &rec, 1, "quantity_mw")?;
            let p = field_f64(path, line, &rec, 2, "price_usd_per_mwh")?;
            SupplyBid::new(id, q, p).map_err(|e| parse_err(path, line, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn hourly_rows(n: usize) -> String {
        let mut s = NETWORK_HEADER.join(",") + "\n";
        for h in 0..n {
            s += &format!("2015-08-01T{h:02}:00:00-05:00,350000000,48890000000,250,25,0.3\n");
        }
        s
    }

    #[test]
    fn hourly_file() {
        let f = temp_csv(&hourly_rows(24));
        let series = ingest_network_csv(f.path()).unwrap();
        assert_eq!(series.snapshots().len(), 24);
        assert_eq!(series.cadence_secs(), 3600);
        assert_eq!(series.start(), 1_438_405_200);
    }

    #[test]
    fn decreasing_timestamp_names_line() {
        let mut body = NETWORK_HEADER.join(",") + "\n";
        for h in [0, 1, 2, 3, 4, 3, 6] {
            body += &format!("2015-08-01T{h:02}:00:00Z,1e8,5e10,250,25,0.3\n");
        }
        let f = temp_csv(&body);
        match ingest_network_csv(f.path()).unwrap_err() {
            Error::Cadence { line, path, .. } => {
                assert_eq!(line, 7);
                assert_eq!(path, f.path());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gap_rejected() {
        let mut body = NETWORK_HEADER.join(",") + "\n";
        for h in [0, 1, 3] {
            body += &format!("2015-08-01T{h:02}:00:00Z,1e8,5e10,250,25,0.3\n");
        }
        let f = temp_csv(&body);
        assert!(matches!(
            ingest_network_csv(f.path()),
            Err(Error::Cadence { line: 4, .. })
        ));
    }

    #[test]
    fn malformed_row_names_line() {
        let body = hourly_rows(3).replace(
            "2015-08-01T01:00:00-05:00,350000000",
            "2015-08-01T01:00:00-05:00,abc",
        );
        let f = temp_csv(&body);
        let err = ingest_network_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let msg = err.to_string();
        assert!(msg.contains(&f.path().display().to_string()));
    }

    #[test]
    fn invariant_violation_is_a_parse_error() {
        let body = hourly_rows(2).replace(",250,", ",-250,");
        let f = temp_csv(&body);
        assert!(matches!(
            ingest_network_csv(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn per_day_fee_column_rejected() {
        let body = hourly_rows(2).replace("fees_btc_per_block", "fees_btc_per_day");
        let f = temp_csv(&body);
        let err = ingest_network_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("per block"), "{err}");
    }

    #[test]
    fn missing_file_is_io() {
        let err = ingest_network_csv("/nonexistent/net.csv").unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/nonexistent/net.csv"));
    }

    #[test]
    fn naive_timestamp_rejected() {
        let body = NETWORK_HEADER.join(",") + "\n2015-08-01T00:00:00,1e8,5e10,250,25,0.3\n";
        let f = temp_csv(&body);
        assert!(matches!(
            ingest_network_csv(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn price_file() {
        let body = "timestamp,usd_per_kwh\n2015-08-01T00:00:00Z,0.05\n2015-08-01T01:00:00Z,0.07\n";
        let f = temp_csv(body);
        let t = read_price_csv(f.path()).unwrap();
        assert_eq!(
            crate::tariff::price_at(&t, 1_438_390_800 + 10).unwrap(),
            0.07
        );

        let gappy = "timestamp,usd_per_kwh\n2015-08-01T00:00:00Z,0.05\n2015-08-01T02:00:00Z,0.07\n";
        let f = temp_csv(gappy);
        assert!(matches!(
            read_price_csv(f.path()),
            Err(Error::Cadence { .. })
        ));

        let neg = "timestamp,usd_per_kwh\n2015-08-01T00:00:00Z,-0.05\n";
        let f = temp_csv(neg);
        assert!(matches!(
            read_price_csv(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bid_file() {
        let body = "bidder_id,quantity_mw,price_usd_per_mwh\na,100,20\nb,50,30\n";
        let f = temp_csv(body);
        let bids = read_bids_csv(f.path()).unwrap();
        assert_eq!(bids.len(), 2);
        assert_eq!(bids[1].price, 30.0);
        let bad = "bidder_id,quantity_mw,price_usd_per_mwh\na,0,20\n";
        let f = temp_csv(bad);
        assert!(matches!(
            read_bids_csv(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
