//! Gridded wind extracts (u/v components on a regular lat/lon grid).
//!
//! CSV layout: `#`-prefixed `key=value` preamble lines, then `lat,lon,u,v`
//! rows, one per grid cell. Required preamble keys are `level_hpa` and
//! `valid_time`; `cell_deg` is optional and inferred from the coordinates
//! when absent. Components are the direction-of-travel vector: `u` toward
//! east, `v` toward north, m/s.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::normalize_deg;
use crate::time::{format_utc, parse_utc};

#[derive(Debug, Error)]
pub enum WindError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("wind parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("irregular wind grid: {0}")]
    IrregularGrid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindField {
    pub grid_lat0_deg: f64,
    pub grid_lon0_deg: f64,
    pub cell_deg: f64,
    pub nx: usize,
    pub ny: usize,
    /// Eastward component, `ny` rows (south to north) of `nx` values (west to east).
    pub u_ms: Vec<f64>,
    /// Northward component, same layout as `u_ms`.
    pub v_ms: Vec<f64>,
    pub level_hpa: f64,
    #[serde(with = "crate::time::serde_utc")]
    pub valid_time: DateTime<Utc>,
}

/// Compass bearing (degrees, clockwise from north) the wind blows toward.
pub fn direction_of_travel_deg(u: f64, v: f64) -> f64 {
    normalize_deg(u.atan2(v).to_degrees())
}

/// Meteorological convention: the bearing the wind blows from.
pub fn direction_from_deg(u: f64, v: f64) -> f64 {
    normalize_deg(direction_of_travel_deg(u, v) + 180.0)
}

impl WindField {
    /// Uniform field over an `nx × ny` grid.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(lat0: f64, lon0: f64, cell_deg: f64, nx: usize, ny: usize, u: f64, v: f64, level_hpa: f64, valid_time: DateTime<Utc>) -> Self {
        WindField {
            grid_lat0_deg: lat0,
            grid_lon0_deg: lon0,
            cell_deg,
            nx,
            ny,
            u_ms: vec![u; nx * ny],
            v_ms: vec![v; nx * ny],
            level_hpa,
            valid_time,
        }
    }

    pub fn at(&self, ix: usize, iy: usize) -> (f64, f64) {
        let k = iy * self.nx + ix;
        (self.u_ms[k], self.v_ms[k])
    }

    pub fn latitude(&self, iy: usize) -> f64 {
        self.grid_lat0_deg + iy as f64 * self.cell_deg
    }

    pub fn longitude(&self, ix: usize) -> f64 {
        self.grid_lon0_deg + ix as f64 * self.cell_deg
    }

    /// True when (lat, lon) lies inside the grid's bounding box (edges included).
    pub fn covers(&self, lat: f64, lon: f64) -> bool {
        let fy = (lat - self.grid_lat0_deg) / self.cell_deg;
        let fx = (lon - self.grid_lon0_deg) / self.cell_deg;
        let eps = 1e-9;
        fy >= -eps && fx >= -eps && fy <= (self.ny - 1) as f64 + eps && fx <= (self.nx - 1) as f64 + eps
    }

    /// Bilinear interpolation of (u, v); `None` outside the grid.
    pub fn sample(&self, lat: f64, lon: f64) -> Option<(f64, f64)> {
        if self.nx == 0 || self.ny == 0 || !self.covers(lat, lon) {
            return None;
        }
        let fy = ((lat - self.grid_lat0_deg) / self.cell_deg).clamp(0.0, (self.ny - 1) as f64);
        let fx = ((lon - self.grid_lon0_deg) / self.cell_deg).clamp(0.0, (self.nx - 1) as f64);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.nx - 1), (y0 + 1).min(self.ny - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let (u00, v00) = self.at(x0, y0);
        let (u10, v10) = self.at(x1, y0);
        let (u01, v01) = self.at(x0, y1);
        let (u11, v11) = self.at(x1, y1);
        let u = lerp(lerp(u00, u10, tx), lerp(u01, u11, tx), ty);
        let v = lerp(lerp(v00, v10, tx), lerp(v01, v11, tx), ty);
        Some((u, v))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.cell_deg > 0.0) {
            return Err(format!("cell_deg {} must be positive", self.cell_deg));
        }
        if self.u_ms.len() != self.nx * self.ny || self.v_ms.len() != self.nx * self.ny {
            return Err("u/v grids do not match nx*ny".into());
        }
        Ok(())
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> WindError {
    WindError::Parse { line, reason: reason.into() }
}

/// Parses a wind extract from CSV text.
pub fn parse_wind_field(text: &str) -> Result<WindField, WindError> {
    let mut meta: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut rows: Vec<(usize, [f64; 4])> = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(m) = line.strip_prefix('#') {
            let (k, v) = m
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("preamble line {line:?} is not key=value")))?;
            meta.insert(k.trim().to_string(), (line_no, v.trim().to_string()));
            continue;
        }
        if !saw_header {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["lat", "lon", "u", "v"] {
                return Err(parse_err(line_no, format!("expected header lat,lon,u,v, found {line:?}")));
            }
            saw_header = true;
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| parse_err(line_no, format!("non-numeric row {line:?}")))?;
        if vals.len() != 4 || vals.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(line_no, format!("expected 4 finite values, found {line:?}")));
        }
        rows.push((line_no, [vals[0], vals[1], vals[2], vals[3]]));
    }
    if !saw_header {
        return Err(parse_err(0, "missing lat,lon,u,v header"));
    }
    let level_hpa = match meta.get("level_hpa") {
        Some((l, v)) => v.parse::<f64>().map_err(|_| parse_err(*l, format!("bad level_hpa {v:?}")))?,
        None => return Err(parse_err(0, "missing level_hpa preamble")),
    };
    let valid_time = match meta.get("valid_time") {
        Some((l, v)) => parse_utc(v).map_err(|e| parse_err(*l, e))?,
        None => return Err(parse_err(0, "missing valid_time preamble")),
    };
    if rows.is_empty() {
        return Err(WindError::IrregularGrid("no grid rows".into()));
    }

    let lat0 = rows.iter().map(|r| r.1[0]).fold(f64::INFINITY, f64::min);
    let lon0 = rows.iter().map(|r| r.1[1]).fold(f64::INFINITY, f64::min);
    let cell_deg = match meta.get("cell_deg") {
        Some((l, v)) => v
            .parse::<f64>()
            .ok()
            .filter(|c| *c > 0.0)
            .ok_or_else(|| parse_err(*l, format!("bad cell_deg {v:?}")))?,
        None => infer_cell(&rows)?,
    };
    let index = |x: f64, x0: f64| -> Option<usize> {
        let f = (x - x0) / cell_deg;
        let k = f.round();
        ((f - k).abs() < 1e-6).then_some(k as usize)
    };
    let mut cells: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (line, [lat, lon, u, v]) in &rows {
        let (iy, ix) = match (index(*lat, lat0), index(*lon, lon0)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(WindError::IrregularGrid(format!(
                    "line {line}: ({lat}, {lon}) is off the {cell_deg} deg lattice"
                )))
            }
        };
        if cells.insert((iy, ix), (*u, *v)).is_some() {
            return Err(WindError::IrregularGrid(format!("line {line}: duplicate cell ({lat}, {lon})")));
        }
    }
    let ny = cells.keys().map(|k| k.0).max().unwrap() + 1;
    let nx = cells.keys().map(|k| k.1).max().unwrap() + 1;
    if cells.len() != nx * ny {
        return Err(WindError::IrregularGrid(format!(
            "{} of {} cells present ({}x{} grid)",
            cells.len(),
            nx * ny,
            nx,
            ny
        )));
    }
    let (u_ms, v_ms) = cells.values().copied().unzip();
    Ok(WindField {
        grid_lat0_deg: lat0,
        grid_lon0_deg: lon0,
        cell_deg,
        nx,
        ny,
        u_ms,
        v_ms,
        level_hpa,
        valid_time,
    })
}

fn infer_cell(rows: &[(usize, [f64; 4])]) -> Result<f64, WindError> {
    let smallest_step = |col: usize| -> Option<f64> {
        let mut xs: Vec<f64> = rows.iter().map(|r| r.1[col]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    };
    match (smallest_step(0), smallest_step(1)) {
        (Some(a), Some(b)) if (a - b).abs() > 1e-9 * a.max(b) => Err(WindError::IrregularGrid(format!(
            "latitude step {a} differs from longitude step {b}"
        ))),
        (Some(a), _) | (None, Some(a)) => Ok(a),
        (None, None) => Err(WindError::IrregularGrid(
            "single-cell grid needs an explicit cell_deg preamble".into(),
        )),
    }
}

pub fn read_wind_field(path: impl AsRef<Path>) -> Result<WindField, WindError> {
    parse_wind_field(&std::fs::read_to_string(path)?)
}

pub fn format_wind_field(w: &WindField) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# level_hpa={}", w.level_hpa);
    let _ = writeln!(s, "# valid_time={}", format_utc(&w.valid_time));
    let _ = writeln!(s, "# cell_deg={}", w.cell_deg);
    s.push_str("lat,lon,u,v\n");
    for iy in 0..w.ny {
        for ix in 0..w.nx {
            let (u, v) = w.at(ix, iy);
            let lat = if iy == 0 { w.grid_lat0_deg } else { w.latitude(iy) };
            let lon = if ix == 0 { w.grid_lon0_deg } else { w.longitude(ix) };
            let _ = writeln!(s, "{lat},{lon},{u},{v}");
        }
    }
    s
}

pub fn write_wind_field(w: &WindField, path: impl AsRef<Path>) -> Result<(), WindError> {
    std::fs::write(path, format_wind_field(w))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t0() -> DateTime<Utc> {
        parse_utc("2020-07-12T06:00:00Z").unwrap()
    }

    #[test]
    fn uniform_westerly() {
        let text = "# level_hpa=850\n# valid_time=2020-07-12T06:00Z\nlat,lon,u,v\n\
                    26,80,5,0\n26,80.25,5,0\n26.25,80,5,0\n26.25,80.25,5,0\n";
        let w = parse_wind_field(text).unwrap();
        assert_eq!((w.nx, w.ny, w.cell_deg), (2, 2, 0.25));
        let (u, v) = w.sample(26.1, 80.2).unwrap();
        assert_eq!((u, v), (5.0, 0.0));
        assert_eq!((u * u + v * v).sqrt(), 5.0);
        assert_eq!(direction_of_travel_deg(u, v), 90.0);
        assert_eq!(direction_from_deg(u, v), 270.0);
    }

    #[test]
    fn missing_cell_is_irregular() {
        let text = "# level_hpa=850\n# valid_time=2020-07-12T06:00Z\nlat,lon,u,v\n\
                    26,80,5,0\n26,80.25,5,0\n26.25,80,5,0\n";
        assert!(matches!(parse_wind_field(text), Err(WindError::IrregularGrid(_))));
    }

    #[test]
    fn missing_preamble_is_parse_error() {
        let text = "lat,lon,u,v\n26,80,5,0\n";
        assert!(matches!(parse_wind_field(text), Err(WindError::Parse { .. })));
    }

    #[test]
    fn extract_around_site_is_about_twelve_cells() {
        // 150 km is ~1.35 deg of latitude; snap the box outward to the 0.25 grid
        let (lat, lon) = (26.76, 80.88);
        let half = 150.0 / crate::geodesy::km_per_degree();
        let lo = |x: f64| ((x - half) / 0.25).floor() * 0.25;
        let hi = |x: f64| ((x + half) / 0.25).ceil() * 0.25;
        let mut text = String::from("# level_hpa=850\n# valid_time=2020-07-12T06:00Z\nlat,lon,u,v\n");
        let mut la = lo(lat);
        while la <= hi(lat) + 1e-9 {
            let mut lo_ = lo(lon);
            while lo_ <= hi(lon) + 1e-9 {
                text += &format!("{la},{lo_},1,1\n");
                lo_ += 0.25;
            }
            la += 0.25;
        }
        let w = parse_wind_field(&text).unwrap();
        assert!((11..=13).contains(&w.nx) && (11..=13).contains(&w.ny), "{}x{}", w.nx, w.ny);
        assert!(w.covers(lat, lon));
    }

    #[test]
    fn bilinear_between_cells() {
        let mut w = WindField::uniform(0.0, 0.0, 1.0, 2, 2, 0.0, 0.0, 850.0, t0());
        w.u_ms = vec![0.0, 4.0, 8.0, 12.0];
        let (u, _) = w.sample(0.5, 0.5).unwrap();
        assert!((u - 6.0).abs() < 1e-12);
        assert_eq!(w.sample(1.0, 1.0).unwrap().0, 12.0);
        assert!(w.sample(1.01, 0.5).is_none());
    }

    #[test]
    fn round_trip_with_awkward_spacing() {
        let mut w = WindField::uniform(26.1, 79.7, 0.1, 3, 4, 0.0, 0.0, 925.0, t0());
        w.u_ms = (0..12).map(|i| i as f64 * 0.37 - 2.0).collect();
        w.v_ms = (0..12).map(|i| 1.0 / (i as f64 + 3.0)).collect();
        let back = parse_wind_field(&format_wind_field(&w)).unwrap();
        assert_eq!(back, w);
    }
}
