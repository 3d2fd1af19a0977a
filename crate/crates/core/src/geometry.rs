//! Radar beam geometry under the 4/3 effective-earth-radius model.
//!
//! Units: file formats carry meters, beam heights are evaluated in km. The
//! conversion happens at the function boundary (`antenna_height_m` is meters,
//! everything else here is km unless the name says otherwise).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{destination_point, EARTH_RADIUS_KM};

/// Effective earth radius for standard refraction, km.
pub const EFFECTIVE_EARTH_RADIUS_KM: f64 = 4.0 / 3.0 * EARTH_RADIUS_KM;

/// Bisection tolerance for [`max_analysis_range_km`], km.
pub const MAX_RANGE_TOLERANCE_KM: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("ceiling {ceiling_km} km is not above the antenna ({antenna_km} km)")]
    CeilingBelowAntenna { ceiling_km: f64, antenna_km: f64 },
    #[error("invalid radar site: {0}")]
    InvalidSite(String),
    #[error("invalid VCP: {0}")]
    InvalidVcp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    S,
    C,
    X,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::S => "S",
            Band::C => "C",
            Band::X => "X",
        }
    }
}

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" => Ok(Band::S),
            "C" => Ok(Band::C),
            "X" => Ok(Band::X),
            other => Err(format!("unknown band {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSite {
    pub site_id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Antenna height above mean sea level, meters.
    pub antenna_height_m: f64,
    pub band: Band,
}

impl RadarSite {
    /// Approximate position of the Lucknow S-band radar.
    pub fn lucknow() -> Self {
        RadarSite {
            site_id: "LKO".into(),
            latitude_deg: 26.76,
            longitude_deg: 80.88,
            antenna_height_m: 128.0,
            band: Band::S,
        }
    }

    pub fn antenna_height_km(&self) -> f64 {
        self.antenna_height_m / 1000.0
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidSite(m));
        if self.site_id.is_empty() || self.site_id.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return bad(format!("site_id {:?} must be non-empty without whitespace", self.site_id));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return bad(format!("latitude {} outside [-90, 90]", self.latitude_deg));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return bad(format!("longitude {} outside [-180, 180]", self.longitude_deg));
        }
        if !(-500.0..=9000.0).contains(&self.antenna_height_m) {
            return bad(format!("antenna height {} m outside [-500, 9000]", self.antenna_height_m));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VcpDefinition {
    pub elevation_angles_deg: Vec<f64>,
    pub cadence_s: f64,
    pub first_gate_range_m: f64,
    pub gate_spacing_m: f64,
    pub gates_per_ray: usize,
    pub rays_per_sweep: usize,
}

impl VcpDefinition {
    /// Ten-elevation S-band pattern, 360 rays of 600 gates at 250 m (150 km).
    pub fn imd_s_band() -> Self {
        VcpDefinition {
            elevation_angles_deg: vec![0.2, 1.0, 2.0, 3.0, 4.5, 6.0, 9.0, 12.0, 16.0, 21.0],
            cadence_s: 600.0,
            first_gate_range_m: 125.0,
            gate_spacing_m: 250.0,
            gates_per_ray: 600,
            rays_per_sweep: 360,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidVcp(m));
        if self.elevation_angles_deg.is_empty() {
            return bad("no elevation angles".into());
        }
        for w in self.elevation_angles_deg.windows(2) {
            if !(w[1] > w[0]) {
                return bad(format!("elevations not strictly increasing at {} -> {}", w[0], w[1]));
            }
        }
        if let Some(e) = self
            .elevation_angles_deg
            .iter()
            .find(|e| !(**e > 0.0 && **e < 90.0))
        {
            return bad(format!("elevation {e} outside (0, 90)"));
        }
        if !(self.gate_spacing_m > 0.0) {
            return bad(format!("gate spacing {} must be positive", self.gate_spacing_m));
        }
        if !(self.first_gate_range_m >= 0.0) {
            return bad(format!("first gate range {} must be >= 0", self.first_gate_range_m));
        }
        if !(self.cadence_s > 0.0) {
            return bad(format!("cadence {} must be positive", self.cadence_s));
        }
        if self.gates_per_ray == 0 || self.rays_per_sweep == 0 {
            return bad("gates_per_ray and rays_per_sweep must be >= 1".into());
        }
        Ok(())
    }

    /// Slant range of gate `n`, meters.
    pub fn gate_range_m(&self, n: usize) -> f64 {
        gate_range(self.first_gate_range_m, self.gate_spacing_m, n)
    }

    /// Default uniform azimuth layout: ray `i` at `i * 360 / rays` degrees.
    pub fn uniform_azimuths(&self) -> Vec<f64> {
        let step = 360.0 / self.rays_per_sweep as f64;
        (0..self.rays_per_sweep).map(|i| i as f64 * step).collect()
    }

    pub fn lowest_elevation_deg(&self) -> f64 {
        self.elevation_angles_deg[0]
    }
}

/// Slant range of range gate `n`: first-gate offset plus `n` spacings.
pub fn gate_range(first_gate_m: f64, spacing_m: f64, n: usize) -> f64 {
    first_gate_m + spacing_m * n as f64
}

/// Height above mean sea level (km) of the beam centre at the given slant
/// range, using the 4/3 effective earth radius. The antenna height is added
/// after the curvature term.
pub fn beam_height_km(slant_range_km: f64, elevation_deg: f64, antenna_height_m: f64) -> f64 {
    let re = EFFECTIVE_EARTH_RADIUS_KM;
    let s = slant_range_km;
    let theta = elevation_deg.to_radians();
    // Written as a difference of squares so short ranges keep full precision.
    let curvature = (s * s + 2.0 * s * re * theta.sin()) / ((s * s + re * re + 2.0 * s * re * theta.sin()).sqrt() + re);
    curvature + antenna_height_m / 1000.0
}

/// Largest slant range (km) whose beam height at `elevation_deg` stays at or
/// below `ceiling_km`, found by bisection (always within [`MAX_RANGE_TOLERANCE_KM`]).
pub fn max_analysis_range_km(
    elevation_deg: f64,
    antenna_height_m: f64,
    ceiling_km: f64,
) -> Result<f64, GeometryError> {
    let antenna_km = antenna_height_m / 1000.0;
    if !(ceiling_km > antenna_km) {
        return Err(GeometryError::CeilingBelowAntenna { ceiling_km, antenna_km });
    }
    let h = |s: f64| beam_height_km(s, elevation_deg, antenna_height_m);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h(hi) <= ceiling_km {
        lo = hi;
        hi *= 2.0;
    }
    // Bisect to floating-point convergence so per-gate range and height
    // tests agree; `lo` always satisfies the ceiling.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= ceiling_km {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateGeo {
    pub slant_range_km: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub height_km_msl: f64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

/// Geolocates a gate. Ground distance is the flat projection
/// `slant_range * cos(elevation)`, carried along the azimuth on a sphere.
pub fn gate_geolocate(site: &RadarSite, azimuth_deg: f64, elevation_deg: f64, slant_range_m: f64) -> GateGeo {
    let s_km = slant_range_m / 1000.0;
    let ground_km = s_km * elevation_deg.to_radians().cos();
    let (lat, lon) = destination_point(site.latitude_deg, site.longitude_deg, azimuth_deg, ground_km);
    GateGeo {
        slant_range_km: s_km,
        azimuth_deg,
        elevation_deg,
        height_km_msl: beam_height_km(s_km, elevation_deg, site.antenna_height_m),
        latitude_deg: lat,
        longitude_deg: lon,
    }
}

/// One point of a VCP coverage curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VcpCurvePoint {
    pub elevation_deg: f64,
    pub range_km: f64,
    pub height_km: f64,
}

/// Beam height against slant range for every elevation and gate of the VCP.
pub fn vcp_curves(site: &RadarSite, vcp: &VcpDefinition) -> Vec<VcpCurvePoint> {
    vcp.elevation_angles_deg
        .iter()
        .flat_map(|&el| {
            (0..vcp.gates_per_ray).map(move |n| {
                let range_km = vcp.gate_range_m(n) / 1000.0;
                VcpCurvePoint {
                    elevation_deg: el,
                    range_km,
                    height_km: beam_height_km(range_km, el, site.antenna_height_m),
                }
            })
        })
        .collect()
}
