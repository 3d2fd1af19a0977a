//! SVOL: a portable, byte-exact polar volume format.
//!
//! Layout: an ASCII header of `key value` lines in fixed order, terminated by
//! an empty line, then a binary payload.
//!
//! ```text
//! SVOL1
//! site_id LKO
//! latitude_deg 26.76
//! longitude_deg 80.88
//! antenna_height_m 128
//! band S
//! start_time_utc 2020-07-12T02:32:10Z
//! n_sweeps 10
//! first_gate_range_m 125
//! gate_spacing_m 250
//! rays_per_sweep 360
//! gates_per_ray 600
//! elevation_angles_deg 0.2 1 2 3 4.5 6 9 12 16 21
//! cadence_s 600
//! sweep_elevations_deg 0.2 1 2 3 4.5 6 9 12 16 21
//!
//! ```
//!
//! Per sweep the payload holds `rays_per_sweep` little-endian `u16` ray
//! azimuths in centidegrees, then the Z, V and W blocks, each
//! `rays_per_sweep × gates_per_ray` little-endian `i16` values (scale 0.01,
//! `-32768` = NO_DATA), ray-major. Numbers use `.` as decimal separator and
//! the shortest representation that parses back to the same value.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geometry::{Band, RadarSite, VcpDefinition};
use crate::time::{format_utc, parse_utc};
use crate::volume::{
    azimuth_from_centideg, azimuth_to_centideg, MomentGrid, Sweep, ValidationError, VolumeScan,
};

pub const MAGIC: &str = "SVOL1";

const HEADER_KEYS: [&str; 14] = [
    "site_id",
    "latitude_deg",
    "longitude_deg",
    "antenna_height_m",
    "band",
    "start_time_utc",
    "n_sweeps",
    "first_gate_range_m",
    "gate_spacing_m",
    "rays_per_sweep",
    "gates_per_ray",
    "elevation_angles_deg",
    "cadence_s",
    "sweep_elevations_deg",
];

#[derive(Debug, Error)]
pub enum SvolError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: ParseReason },
    #[error("invalid volume: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseReason {
    #[error("bad magic (expected {MAGIC})")]
    BadMagic,
    #[error("header not terminated by a blank line")]
    UnterminatedHeader,
    #[error("header is not valid UTF-8")]
    NonUtf8Header,
    #[error("expected header key {expected:?}, found {found:?}")]
    UnexpectedKey { expected: &'static str, found: String },
    #[error("bad value {value:?} for {key}")]
    BadValue { key: &'static str, value: String },
    #[error("non-UTC timestamp: {0}")]
    NonUtcTimestamp(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("truncated payload in {block}: need {needed} bytes, {available} available")]
    TruncatedPayload { block: String, needed: usize, available: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
}

fn perr(offset: usize, reason: ParseReason) -> SvolError {
    SvolError::Parse { offset, reason }
}

/// Serializes a validated volume to canonical SVOL bytes.
pub fn encode_svol(v: &VolumeScan) -> Result<Vec<u8>, SvolError> {
    v.validate()?;
    let join = |xs: &mut dyn Iterator<Item = f64>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut h = String::new();
    let _ = writeln!(h, "{MAGIC}");
    let _ = writeln!(h, "site_id {}", v.site.site_id);
    let _ = writeln!(h, "latitude_deg {}", v.site.latitude_deg);
    let _ = writeln!(h, "longitude_deg {}", v.site.longitude_deg);
    let _ = writeln!(h, "antenna_height_m {}", v.site.antenna_height_m);
    let _ = writeln!(h, "band {}", v.site.band.as_str());
    let _ = writeln!(h, "start_time_utc {}", format_utc(&v.start_time));
    let _ = writeln!(h, "n_sweeps {}", v.sweeps.len());
    let _ = writeln!(h, "first_gate_range_m {}", v.vcp.first_gate_range_m);
    let _ = writeln!(h, "gate_spacing_m {}", v.vcp.gate_spacing_m);
    let _ = writeln!(h, "rays_per_sweep {}", v.vcp.rays_per_sweep);
    let _ = writeln!(h, "gates_per_ray {}", v.vcp.gates_per_ray);
    let _ = writeln!(h, "elevation_angles_deg {}", join(&mut v.vcp.elevation_angles_deg.iter().copied()));
    let _ = writeln!(h, "cadence_s {}", v.vcp.cadence_s);
    let _ = writeln!(h, "sweep_elevations_deg {}", join(&mut v.sweeps.iter().map(|s| s.elevation_deg)));
    h.push('\n');

    let cells = v.vcp.rays_per_sweep * v.vcp.gates_per_ray;
    let mut out = Vec::with_capacity(h.len() + v.sweeps.len() * (v.vcp.rays_per_sweep * 2 + cells * 6));
    out.extend_from_slice(h.as_bytes());
    for sw in &v.sweeps {
        for &az in &sw.ray_azimuths_deg {
            out.extend_from_slice(&azimuth_to_centideg(az).to_le_bytes());
        }
        for grid in [&sw.z, &sw.v, &sw.w] {
            for &x in grid.as_raw() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct HeaderCursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn next_line(&mut self) -> (usize, &'a str) {
        let start = self.pos;
        let rest = &self.text[start..];
        let end = rest.find('\n').unwrap_or(rest.len());
        self.pos = start + end + 1;
        (start, &rest[..end])
    }

    fn field(&mut self, key: &'static str) -> Result<(usize, &'a str), SvolError> {
        let (off, line) = self.next_line();
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((off + k.len() + 1, v)),
            _ => Err(perr(
                off,
                ParseReason::UnexpectedKey {
                    expected: key,
                    found: line.split(' ').next().unwrap_or("").to_string(),
                },
            )),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &'static str) -> Result<T, SvolError> {
        let (off, v) = self.field(key)?;
        v.parse()
            .map_err(|_| perr(off, ParseReason::BadValue { key, value: v.to_string() }))
    }

    fn float(&mut self, key: &'static str) -> Result<f64, SvolError> {
        let (off, v) = self.field(key)?;
        parse_finite(v).ok_or_else(|| perr(off, ParseReason::BadValue { key, value: v.to_string() }))
    }

    fn float_list(&mut self, key: &'static str) -> Result<(usize, Vec<f64>), SvolError> {
        let (off, v) = self.field(key)?;
        let xs = v
            .split(' ')
            .map(parse_finite)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| perr(off, ParseReason::BadValue { key, value: v.to_string() }))?;
        Ok((off, xs))
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses and validates SVOL bytes.
pub fn decode_svol(bytes: &[u8]) -> Result<VolumeScan, SvolError> {
    let header_end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| {
            if bytes.starts_with(MAGIC.as_bytes()) {
                perr(bytes.len(), ParseReason::UnterminatedHeader)
            } else {
                perr(0, ParseReason::BadMagic)
            }
        })?;
    let text = std::str::from_utf8(&bytes[..header_end + 1]).map_err(|e| perr(e.valid_up_to(), ParseReason::NonUtf8Header))?;
    let mut cur = HeaderCursor { text, pos: 0 };
    let (_, magic) = cur.next_line();
    if magic != MAGIC {
        return Err(perr(0, ParseReason::BadMagic));
    }
    let (_, site_id) = cur.field(HEADER_KEYS[0])?;
    let latitude_deg = cur.float(HEADER_KEYS[1])?;
    let longitude_deg = cur.float(HEADER_KEYS[2])?;
    let antenna_height_m = cur.float(HEADER_KEYS[3])?;
    let band: Band = cur.parsed(HEADER_KEYS[4])?;
    let (toff, tstr) = cur.field(HEADER_KEYS[5])?;
    let start_time = parse_utc(tstr).map_err(|e| {
        if tstr.ends_with('Z') {
            perr(toff, ParseReason::BadValue { key: HEADER_KEYS[5], value: e })
        } else {
            perr(toff, ParseReason::NonUtcTimestamp(tstr.to_string()))
        }
    })?;
    let n_sweeps: usize = cur.parsed(HEADER_KEYS[6])?;
    let first_gate_range_m = cur.float(HEADER_KEYS[7])?;
    let gate_spacing_m = cur.float(HEADER_KEYS[8])?;
    let rays: usize = cur.parsed(HEADER_KEYS[9])?;
    let gates: usize = cur.parsed(HEADER_KEYS[10])?;
    let (_, elevation_angles_deg) = cur.float_list(HEADER_KEYS[11])?;
    let cadence_s = cur.float(HEADER_KEYS[12])?;
    let (eoff, sweep_elevations) = if n_sweeps == 0 {
        let (off, v) = cur.field(HEADER_KEYS[13])?;
        if !v.is_empty() {
            return Err(perr(off, ParseReason::DimensionMismatch("n_sweeps is 0 but sweep elevations given".into())));
        }
        (off, Vec::new())
    } else {
        cur.float_list(HEADER_KEYS[13])?
    };
    if sweep_elevations.len() != n_sweeps {
        return Err(perr(
            eoff,
            ParseReason::DimensionMismatch(format!(
                "n_sweeps {} but {} sweep elevations",
                n_sweeps,
                sweep_elevations.len()
            )),
        ));
    }
    if cur.pos != header_end + 1 {
        let (off, line) = cur.next_line();
        return Err(perr(off, ParseReason::UnexpectedKey { expected: "<end of header>", found: line.to_string() }));
    }

    let site = RadarSite { site_id: site_id.to_string(), latitude_deg, longitude_deg, antenna_height_m, band };
    let vcp = VcpDefinition {
        elevation_angles_deg,
        cadence_s,
        first_gate_range_m,
        gate_spacing_m,
        gates_per_ray: gates,
        rays_per_sweep: rays,
    };

    let mut pos = header_end + 2;
    let cells = rays
        .checked_mul(gates)
        .ok_or_else(|| perr(pos, ParseReason::DimensionMismatch("grid size overflows".into())))?;
    let mut take = |block: String, n: usize| -> Result<&[u8], SvolError> {
        let available = bytes.len() - pos;
        if available < n {
            return Err(perr(pos, ParseReason::TruncatedPayload { block, needed: n, available }));
        }
        let s = &bytes[pos..pos + n];
        pos += n;
        Ok(s)
    };
    let mut sweeps = Vec::with_capacity(n_sweeps);
    for (i, &el) in sweep_elevations.iter().enumerate() {
        let az = take(format!("sweep {i} azimuths"), rays * 2)?
            .chunks_exact(2)
            .map(|c| azimuth_from_centideg(u16::from_le_bytes([c[0], c[1]])))
            .collect();
        let mut grid = |name: &str| -> Result<MomentGrid, SvolError> {
            let raw = take(format!("sweep {i} {name}"), cells * 2)?
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]))
                .collect();
            Ok(MomentGrid::from_raw(rays, gates, raw).expect("length checked"))
        };
        let z = grid("Z")?;
        let v = grid("V")?;
        let w = grid("W")?;
        sweeps.push(Sweep { elevation_deg: el, ray_azimuths_deg: az, z, v, w });
    }
    if pos != bytes.len() {
        return Err(perr(pos, ParseReason::TrailingBytes(bytes.len() - pos)));
    }
    let vol = VolumeScan { site, vcp, start_time, sweeps };
    vol.validate()?;
    Ok(vol)
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<VolumeScan, SvolError> {
    decode_svol(&std::fs::read(path)?)
}

pub fn write_volume(v: &VolumeScan, path: impl AsRef<Path>) -> Result<(), SvolError> {
    let bytes = encode_svol(v)?;
    std::fs::write(path, bytes)?;
    Ok(())
}
