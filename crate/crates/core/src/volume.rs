//! In-memory polar volume model.
//!
//! Moments are held exactly as they are stored on disk: signed 16-bit
//! fixed point with a 0.01 scale and [`NO_DATA`] as the missing-value
//! sentinel. Writing a value quantizes it once; reading never changes it.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::geometry::{GeometryError, RadarSite, VcpDefinition};

/// Raw sentinel for a missing moment (-327.68 in physical units).
pub const NO_DATA: i16 = i16::MIN;

/// Fixed-point scale of stored moments.
pub const MOMENT_SCALE: f64 = 0.01;

/// Allowed sweep-vs-VCP elevation mismatch, degrees.
pub const ELEVATION_MATCH_TOLERANCE_DEG: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("sweep {sweep}: {reason}")]
    Sweep { sweep: usize, reason: String },
    #[error("{0}")]
    Volume(String),
}

/// The three recorded Doppler moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    Reflectivity,
    Velocity,
    SpectrumWidth,
}

impl Moment {
    /// Valid physical range of present values.
    pub fn valid_range(self) -> (f64, f64) {
        match self {
            Moment::Reflectivity => (-35.0, 80.0),
            Moment::Velocity => (-60.0, 60.0),
            Moment::SpectrumWidth => (0.0, 20.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Moment::Reflectivity => "Z",
            Moment::Velocity => "V",
            Moment::SpectrumWidth => "W",
        }
    }
}

/// Quantizes a physical value to raw fixed point, saturating short of the sentinel.
pub fn quantize(value: f64) -> i16 {
    let raw = (value * 100.0).round();
    raw.clamp(i16::MIN as f64 + 1.0, i16::MAX as f64) as i16
}

pub fn dequantize(raw: i16) -> Option<f64> {
    // Division is correctly rounded, so 2711 maps to the double nearest 27.11.
    (raw != NO_DATA).then(|| raw as f64 / 100.0)
}

/// Dense `[ray × gate]` grid of one moment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MomentGrid {
    rays: usize,
    gates: usize,
    data: Vec<i16>,
}

impl MomentGrid {
    pub fn no_data(rays: usize, gates: usize) -> Self {
        MomentGrid { rays, gates, data: vec![NO_DATA; rays * gates] }
    }

    /// Wraps raw values laid out ray-major. Returns `None` on a length mismatch.
    pub fn from_raw(rays: usize, gates: usize, data: Vec<i16>) -> Option<Self> {
        (data.len() == rays * gates).then_some(MomentGrid { rays, gates, data })
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    pub fn gates(&self) -> usize {
        self.gates
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rays, self.gates)
    }

    #[inline]
    pub fn index(&self, ray: usize, gate: usize) -> usize {
        ray * self.gates + gate
    }

    #[inline]
    pub fn raw(&self, ray: usize, gate: usize) -> i16 {
        self.data[self.index(ray, gate)]
    }

    #[inline]
    pub fn get(&self, ray: usize, gate: usize) -> Option<f64> {
        dequantize(self.raw(ray, gate))
    }

    pub fn set(&mut self, ray: usize, gate: usize, value: Option<f64>) {
        let i = self.index(ray, gate);
        self.data[i] = value.map_or(NO_DATA, quantize);
    }

    pub fn set_raw(&mut self, ray: usize, gate: usize, raw: i16) {
        let i = self.index(ray, gate);
        self.data[i] = raw;
    }

    pub fn as_raw(&self) -> &[i16] {
        &self.data
    }

    pub fn as_raw_mut(&mut self) -> &mut [i16] {
        &mut self.data
    }

    pub fn ray_raw(&self, ray: usize) -> &[i16] {
        &self.data[ray * self.gates..(ray + 1) * self.gates]
    }

    pub fn count_present(&self) -> usize {
        self.data.iter().filter(|&&v| v != NO_DATA).count()
    }

    fn check_range(&self, moment: Moment) -> Result<(), String> {
        let (lo, hi) = moment.valid_range();
        let (lo, hi) = (quantize(lo), quantize(hi));
        match self.data.iter().position(|&v| v != NO_DATA && !(lo..=hi).contains(&v)) {
            None => Ok(()),
            Some(i) => Err(format!(
                "{} value {} at (ray {}, gate {}) outside valid range",
                moment.name(),
                self.data[i] as f64 / 100.0,
                i / self.gates.max(1),
                i % self.gates.max(1)
            )),
        }
    }
}

/// One full-azimuth rotation at a fixed elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub elevation_deg: f64,
    /// Ray azimuths, strictly increasing in [0, 360), multiples of 0.01°.
    pub ray_azimuths_deg: Vec<f64>,
    pub z: MomentGrid,
    pub v: MomentGrid,
    pub w: MomentGrid,
}

impl Sweep {
    /// All-NO_DATA sweep with the given ray azimuths.
    pub fn empty(elevation_deg: f64, ray_azimuths_deg: Vec<f64>, gates: usize) -> Self {
        let rays = ray_azimuths_deg.len();
        Sweep {
            elevation_deg,
            ray_azimuths_deg: ray_azimuths_deg.iter().map(|&a| quantize_azimuth(a)).collect(),
            z: MomentGrid::no_data(rays, gates),
            v: MomentGrid::no_data(rays, gates),
            w: MomentGrid::no_data(rays, gates),
        }
    }

    pub fn rays(&self) -> usize {
        self.ray_azimuths_deg.len()
    }

    pub fn gates_per_ray(&self) -> usize {
        self.z.gates()
    }

    pub fn moment(&self, m: Moment) -> &MomentGrid {
        match m {
            Moment::Reflectivity => &self.z,
            Moment::Velocity => &self.v,
            Moment::SpectrumWidth => &self.w,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let dims = (self.rays(), self.z.gates());
        for m in [Moment::Reflectivity, Moment::Velocity, Moment::SpectrumWidth] {
            if self.moment(m).dims() != dims {
                return Err(format!(
                    "{} grid is {:?}, expected {:?}",
                    m.name(),
                    self.moment(m).dims(),
                    dims
                ));
            }
            self.moment(m).check_range(m)?;
        }
        for (i, &a) in self.ray_azimuths_deg.iter().enumerate() {
            if !(0.0..360.0).contains(&a) {
                return Err(format!("ray {i} azimuth {a} outside [0, 360)"));
            }
            if quantize_azimuth(a) != a {
                return Err(format!("ray {i} azimuth {a} is not a multiple of 0.01 deg"));
            }
        }
        if let Some(i) = self.ray_azimuths_deg.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(format!("ray azimuths not strictly increasing at ray {}", i + 1));
        }
        Ok(())
    }
}

/// Rounds an azimuth to the 0.01° storage resolution.
pub fn quantize_azimuth(az: f64) -> f64 {
    azimuth_from_centideg(azimuth_to_centideg(az))
}

pub(crate) fn azimuth_to_centideg(az: f64) -> u16 {
    ((az * 100.0).round() as i64).rem_euclid(36_000) as u16
}

pub(crate) fn azimuth_from_centideg(c: u16) -> f64 {
    c as f64 / 100.0
}

/// A timestamped set of sweeps ordered by elevation.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeScan {
    pub site: RadarSite,
    pub vcp: VcpDefinition,
    pub start_time: DateTime<Utc>,
    pub sweeps: Vec<Sweep>,
}

impl VolumeScan {
    /// A volume with one all-NO_DATA sweep per VCP elevation, uniform azimuths.
    pub fn empty(site: RadarSite, vcp: VcpDefinition, start_time: DateTime<Utc>) -> Self {
        let az = vcp.uniform_azimuths();
        let sweeps = vcp
            .elevation_angles_deg
            .iter()
            .map(|&el| Sweep::empty(el, az.clone(), vcp.gates_per_ray))
            .collect();
        VolumeScan { site, vcp, start_time, sweeps }
    }

    /// The detection surface: the lowest-elevation sweep.
    pub fn lowest_sweep(&self) -> Option<&Sweep> {
        self.sweeps.first()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.site.validate()?;
        self.vcp.validate()?;
        let mut prev: Option<f64> = None;
        for (i, sw) in self.sweeps.iter().enumerate() {
            let err = |reason: String| ValidationError::Sweep { sweep: i, reason };
            if let Some(p) = prev {
                if !(sw.elevation_deg > p) {
                    return Err(err("sweeps not ordered by increasing elevation".into()));
                }
            }
            prev = Some(sw.elevation_deg);
            if !self
                .vcp
                .elevation_angles_deg
                .iter()
                .any(|e| (e - sw.elevation_deg).abs() <= ELEVATION_MATCH_TOLERANCE_DEG)
            {
                return Err(err(format!(
                    "elevation {} matches no VCP elevation within {}",
                    sw.elevation_deg, ELEVATION_MATCH_TOLERANCE_DEG
                )));
            }
            if sw.rays() != self.vcp.rays_per_sweep || sw.gates_per_ray() != self.vcp.gates_per_ray {
                return Err(err(format!(
                    "dimensions {}x{} differ from VCP {}x{}",
                    sw.rays(),
                    sw.gates_per_ray(),
                    self.vcp.rays_per_sweep,
                    self.vcp.gates_per_ray
                )));
            }
            sw.validate().map_err(err)?;
        }
        Ok(())
    }
}
