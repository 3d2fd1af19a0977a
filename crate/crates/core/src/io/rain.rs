//! Rain-gauge accumulation records, read from a local CSV extract with header
//! `station_id,lat,lon,window_start,window_end,rainfall_mm`.

use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{format_utc, parse_utc};

pub const RAIN_HEADER: [&str; 6] = ["station_id", "lat", "lon", "window_start", "window_end", "rainfall_mm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainRecord {
    pub station_id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(with = "crate::time::serde_utc")]
    pub window_start: DateTime<Utc>,
    #[serde(with = "crate::time::serde_utc")]
    pub window_end: DateTime<Utc>,
    pub rainfall_mm: f64,
}

impl RainRecord {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.window_start < self.window_end) {
            return Err("window_start must precede window_end".into());
        }
        if !(self.rainfall_mm >= 0.0) || !self.rainfall_mm.is_finite() {
            return Err(format!("rainfall_mm {} must be a non-negative number", self.rainfall_mm));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) || !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err("station coordinates out of range".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad header: expected {expected}, found {found}")]
    Header { expected: String, found: String },
    #[error("{} invalid row(s): {}", .0.len(), .0.iter().map(|(r, m)| format!("row {r}: {m}")).collect::<Vec<_>>().join("; "))]
    Rows(Vec<(u64, String)>),
}

fn parse_row(row: &csv::StringRecord) -> Result<RainRecord, String> {
    if row.len() != 6 {
        return Err(format!("expected 6 fields, found {}", row.len()));
    }
    let num = |i: usize| -> Result<f64, String> {
        row[i]
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("{} {:?} is not a number", RAIN_HEADER[i], &row[i]))
    };
    let rec = RainRecord {
        station_id: row[0].trim().to_string(),
        latitude_deg: num(1)?,
        longitude_deg: num(2)?,
        window_start: parse_utc(row[3].trim())?,
        window_end: parse_utc(row[4].trim())?,
        rainfall_mm: num(5)?,
    };
    rec.validate()?;
    Ok(rec)
}

/// Parses rain records from CSV text. Every failing row is reported.
pub fn parse_rain_records<R: std::io::Read>(reader: R) -> Result<Vec<RainRecord>, RecordError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(RAIN_HEADER) {
        return Err(RecordError::Header {
            expected: RAIN_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row) {
            Ok(r) => out.push(r),
            Err(m) => bad.push((line, m)),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(RecordError::Rows(bad))
    }
}

pub fn read_rain_records(path: impl AsRef<Path>) -> Result<Vec<RainRecord>, RecordError> {
    parse_rain_records(std::fs::File::open(path)?)
}

pub fn write_rain_records(records: &[RainRecord], path: impl AsRef<Path>) -> Result<(), RecordError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RAIN_HEADER)?;
    for r in records {
        w.write_record([
            r.station_id.clone(),
            r.latitude_deg.to_string(),
            r.longitude_deg.to_string(),
            format_utc(&r.window_start),
            format_utc(&r.window_end),
            r.rainfall_mm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "station_id,lat,lon,window_start,window_end,rainfall_mm\n";

    #[test]
    fn zero_rain_row() {
        let text = format!("{HEADER}Lucknow,26.85,80.95,2020-07-12T00:00Z,2020-07-12T12:00Z,0.0\n");
        let recs = parse_rain_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].station_id, "Lucknow");
        assert_eq!(recs[0].rainfall_mm, 0.0);
        assert_eq!(recs[0].window_start, parse_utc("2020-07-12T00:00:00Z").unwrap());
    }

    #[test]
    fn six_station_extract() {
        let stations = [
            ("Auraiya", 26.47, 79.51),
            ("Kanpur", 26.45, 80.33),
            ("Lucknow", 26.85, 80.95),
            ("Fursatganj", 26.25, 81.38),
            ("Sultanpur", 26.26, 82.07),
            ("Unnao AMFU", 26.55, 80.49),
        ];
        let mut text = HEADER.to_string();
        for (name, lat, lon) in stations {
            text += &format!("{name},{lat},{lon},2020-07-12T00:00Z,2020-07-12T12:00Z,0\n");
        }
        let recs = parse_rain_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs.iter().all(|r| r.rainfall_mm == 0.0));
        assert_eq!(recs[5].station_id, "Unnao AMFU");
    }

    #[test]
    fn invalid_rows_reported_with_line_numbers() {
        let text = format!(
            "{HEADER}A,26,80,2020-07-12T00:00Z,2020-07-12T12:00Z,-1\n\
             B,26,80,2020-07-12T00:00Z,2020-07-12T12:00Z,1.5\n\
             C,26,80,2020-07-12T12:00Z,2020-07-12T00:00Z,0\n\
             D,26,80,2020-07-12T00:00,2020-07-12T12:00Z,0\n"
        );
        match parse_rain_records(text.as_bytes()) {
            Err(RecordError::Rows(rows)) => {
                let lines: Vec<u64> = rows.iter().map(|r| r.0).collect();
                assert_eq!(lines, vec![2, 4, 5]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header() {
        let text = "id,lat,lon,a,b,c\n";
        assert!(matches!(parse_rain_records(text.as_bytes()), Err(RecordError::Header { .. })));
    }

    #[test]
    fn round_trip() {
        let recs = vec![RainRecord {
            station_id: "Kanpur, IMD".into(),
            latitude_deg: 26.4499,
            longitude_deg: 80.3319,
            window_start: parse_utc("2020-07-12T00:00:00Z").unwrap(),
            window_end: parse_utc("2020-07-12T12:00:00.5Z").unwrap(),
            rainfall_mm: 3.2,
        }];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rain.csv");
        write_rain_records(&recs, &p).unwrap();
        assert_eq!(read_rain_records(&p).unwrap(), recs);
    }
}
