//! Echo filtering: per-gate thresholds, connectivity grouping, small-group
//! rejection and per-cluster statistics.
//!
//! A gate is retained when all of the following hold:
//! - Z is present and at least `z_min_dbz`;
//! - V is present and within the velocity bound (|V| by default);
//! - the beam height at the gate is at most `height_ceiling_km`;
//! - the slant range is within the maximum analysis range of the lowest
//!   elevation for that ceiling;
//! - when enabled, W is present and at most `w_max_ms`.
//!
//! Detection runs on the lowest sweep only. Higher sweeps feed the
//! composite and vertical-slice products.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{for_each_chunk_mut, map_slice, Parallelism};
use crate::geometry::{beam_height_km, gate_geolocate, max_analysis_range_km, GeometryError, RadarSite, VcpDefinition};
use crate::labeling::{label_clusters, Connectivity};
use crate::volume::{dequantize, Sweep, VolumeScan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("mask/sweep dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("volume has no sweeps")]
    EmptyVolume,
    #[error("invalid filter config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How the velocity bound is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityTest {
    /// |V| <= bound.
    #[default]
    Absolute,
    /// V <= bound (outbound motion only is limited).
    Signed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub z_min_dbz: f64,
    pub v_max_abs_ms: f64,
    pub height_ceiling_km: f64,
    pub min_cluster_gates: usize,
    pub use_spectrum_width: bool,
    pub w_max_ms: Option<f64>,
    pub connectivity: Connectivity,
    pub velocity_test: VelocityTest,
    /// Gates with missing V are dropped even if Z passes.
    pub reject_missing_velocity: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            z_min_dbz: 15.0,
            v_max_abs_ms: 6.0,
            height_ceiling_km: 2.0,
            min_cluster_gates: 5,
            use_spectrum_width: false,
            w_max_ms: None,
            connectivity: Connectivity::Four,
            velocity_test: VelocityTest::Absolute,
            reject_missing_velocity: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |m: String| Err(FilterError::InvalidConfig(m));
        if !(-35.0..=80.0).contains(&self.z_min_dbz) {
            return bad(format!("z_min_dbz {} outside [-35, 80]", self.z_min_dbz));
        }
        if !(self.v_max_abs_ms > 0.0) {
            return bad(format!("v_max_abs_ms {} must be positive", self.v_max_abs_ms));
        }
        if !(self.height_ceiling_km > 0.0) {
            return bad(format!("height_ceiling_km {} must be positive", self.height_ceiling_km));
        }
        if self.min_cluster_gates < 1 {
            return bad("min_cluster_gates must be >= 1".into());
        }
        if self.use_spectrum_width && self.w_max_ms.is_none() {
            return bad("use_spectrum_width requires w_max_ms".into());
        }
        Ok(())
    }

    fn velocity_ok(&self, v: Option<f64>) -> bool {
        match v {
            None => !self.reject_missing_velocity,
            Some(v) => match self.velocity_test {
                VelocityTest::Absolute => v.abs() <= self.v_max_abs_ms,
                VelocityTest::Signed => v <= self.v_max_abs_ms,
            },
        }
    }
}

/// Per-gate geometry of one sweep: beam heights and the range limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGeometry {
    pub elevation_deg: f64,
    pub slant_range_km: Vec<f64>,
    pub height_km: Vec<f64>,
    pub max_range_km: f64,
}

impl SweepGeometry {
    /// Range limit is derived from the VCP's lowest elevation so that every
    /// sweep is cut at the same horizontal extent.
    pub fn new(site: &RadarSite, vcp: &VcpDefinition, elevation_deg: f64, ceiling_km: f64) -> Result<Self, FilterError> {
        let max_range_km = max_analysis_range_km(vcp.lowest_elevation_deg(), site.antenna_height_m, ceiling_km)?;
        let slant_range_km: Vec<f64> = (0..vcp.gates_per_ray).map(|n| vcp.gate_range_m(n) / 1000.0).collect();
        let height_km = slant_range_km
            .iter()
            .map(|&s| beam_height_km(s, elevation_deg, site.antenna_height_m))
            .collect();
        Ok(SweepGeometry { elevation_deg, slant_range_km, height_km, max_range_km })
    }

    pub fn for_sweep(volume: &VolumeScan, sweep: &Sweep, cfg: &FilterConfig) -> Result<Self, FilterError> {
        SweepGeometry::new(&volume.site, &volume.vcp, sweep.elevation_deg, cfg.height_ceiling_km)
    }

    /// Whether the geometric part of the filter admits gate `n`.
    pub fn gate_in_bounds(&self, n: usize, ceiling_km: f64) -> bool {
        self.slant_range_km[n] <= self.max_range_km && self.height_km[n] <= ceiling_km
    }
}

/// Sweep-aligned retention mask; `true` = retained.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateMask {
    rays: usize,
    gates: usize,
    bits: Vec<bool>,
}

impl GateMask {
    pub fn empty(rays: usize, gates: usize) -> Self {
        GateMask { rays, gates, bits: vec![false; rays * gates] }
    }

    pub fn from_bits(rays: usize, gates: usize, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == rays * gates).then_some(GateMask { rays, gates, bits })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rays, self.gates)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, ray: usize, gate: usize) -> bool {
        self.bits[ray * self.gates + gate]
    }

    pub fn set(&mut self, ray: usize, gate: usize, keep: bool) {
        self.bits[ray * self.gates + gate] = keep;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn retained(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / self.gates, i % self.gates))
    }
}

/// Applies the threshold filters to every gate of `sweep`.
pub fn apply_gate_filters(sweep: &Sweep, geo: &SweepGeometry, cfg: &FilterConfig) -> Result<GateMask, FilterError> {
    apply_gate_filters_with(sweep, geo, cfg, Parallelism::default())
}

pub fn apply_gate_filters_with(
    sweep: &Sweep,
    geo: &SweepGeometry,
    cfg: &FilterConfig,
    par: Parallelism,
) -> Result<GateMask, FilterError> {
    let (rays, gates) = (sweep.rays(), sweep.gates_per_ray());
    for grid in [&sweep.z, &sweep.v, &sweep.w] {
        if grid.dims() != (rays, gates) {
            return Err(FilterError::DimensionMismatch(format!(
                "moment grid {:?} vs sweep {:?}",
                grid.dims(),
                (rays, gates)
            )));
        }
    }
    if geo.height_km.len() != gates {
        return Err(FilterError::DimensionMismatch(format!(
            "geometry has {} gates, sweep has {}",
            geo.height_km.len(),
            gates
        )));
    }
    let in_bounds: Vec<bool> = (0..gates).map(|n| geo.gate_in_bounds(n, cfg.height_ceiling_km)).collect();
    let mut mask = GateMask::empty(rays, gates);
    if gates == 0 {
        return Ok(mask);
    }
    for_each_chunk_mut(&mut mask.bits, gates, par, |ray, out| {
        let (z, v, w) = (sweep.z.ray_raw(ray), sweep.v.ray_raw(ray), sweep.w.ray_raw(ray));
        for n in 0..gates {
            out[n] = in_bounds[n]
                && dequantize(z[n]).is_some_and(|z| z >= cfg.z_min_dbz)
                && cfg.velocity_ok(dequantize(v[n]))
                && (!cfg.use_spectrum_width
                    || dequantize(w[n]).is_some_and(|w| cfg.w_max_ms.is_some_and(|max| w <= max)));
        }
    });
    Ok(mask)
}

/// Masks for every sweep of a volume.
pub fn filter_volume(volume: &VolumeScan, cfg: &FilterConfig, par: Parallelism) -> Result<Vec<GateMask>, FilterError> {
    cfg.validate()?;
    volume
        .sweeps
        .iter()
        .map(|sw| {
            let geo = SweepGeometry::for_sweep(volume, sw, cfg)?;
            apply_gate_filters_with(sw, &geo, cfg, par)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoCluster {
    pub cluster_id: usize,
    #[serde(with = "crate::time::serde_utc")]
    pub time: DateTime<Utc>,
    pub elevation_deg: f64,
    /// Member gates as (ray index, gate index), sorted.
    pub gates: Vec<(usize, usize)>,
    pub gate_count: usize,
    /// Arithmetic mean of member Z in dBZ.
    pub mean_reflectivity_dbz: f64,
    /// Mean taken in linear Z units, converted back to dBZ.
    pub linear_mean_reflectivity_dbz: f64,
    pub mean_radial_velocity_ms: f64,
    pub centroid_lat_deg: f64,
    pub centroid_lon_deg: f64,
    pub centroid_height_km: f64,
}

fn cluster_stats(volume: &VolumeScan, sweep: &Sweep, gates: Vec<(usize, usize)>) -> EchoCluster {
    let n = gates.len() as f64;
    let (mut z_sum, mut lin_sum, mut v_sum, mut v_n) = (0.0, 0.0, 0.0, 0usize);
    let (mut lat, mut lon, mut h) = (0.0, 0.0, 0.0);
    for &(r, g) in &gates {
        let z = sweep.z.get(r, g).expect("retained gates have Z");
        z_sum += z;
        lin_sum += 10f64.powf(z / 10.0);
        if let Some(v) = sweep.v.get(r, g) {
            v_sum += v;
            v_n += 1;
        }
        let geo = gate_geolocate(&volume.site, sweep.ray_azimuths_deg[r], sweep.elevation_deg, volume.vcp.gate_range_m(g));
        lat += geo.latitude_deg;
        lon += geo.longitude_deg;
        h += geo.height_km_msl;
    }
    EchoCluster {
        cluster_id: 0,
        time: volume.start_time,
        elevation_deg: sweep.elevation_deg,
        gate_count: gates.len(),
        gates,
        mean_reflectivity_dbz: z_sum / n,
        linear_mean_reflectivity_dbz: 10.0 * (lin_sum / n).log10(),
        mean_radial_velocity_ms: if v_n > 0 { v_sum / v_n as f64 } else { 0.0 },
        centroid_lat_deg: lat / n,
        centroid_lon_deg: lon / n,
        centroid_height_km: h / n,
    }
}

/// Clusters from an already computed mask of `sweep`, size-filtered and
/// sorted by descending size (ties by first gate).
pub fn clusters_from_mask(volume: &VolumeScan, sweep: &Sweep, mask: &GateMask, cfg: &FilterConfig) -> Vec<EchoCluster> {
    let mut comps: Vec<Vec<(usize, usize)>> = label_clusters(mask, cfg.connectivity)
        .into_iter()
        .filter(|c| c.len() >= cfg.min_cluster_gates)
        .collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    comps
        .into_iter()
        .enumerate()
        .map(|(id, gates)| EchoCluster { cluster_id: id, ..cluster_stats(volume, sweep, gates) })
        .collect()
}

/// Filters and clusters the lowest sweep of `volume`.
pub fn extract_clusters(volume: &VolumeScan, cfg: &FilterConfig) -> Result<Vec<EchoCluster>, FilterError> {
    extract_clusters_with(volume, cfg, Parallelism::default())
}

pub fn extract_clusters_with(volume: &VolumeScan, cfg: &FilterConfig, par: Parallelism) -> Result<Vec<EchoCluster>, FilterError> {
    cfg.validate()?;
    let sweep = volume.lowest_sweep().ok_or(FilterError::EmptyVolume)?;
    let geo = SweepGeometry::for_sweep(volume, sweep, cfg)?;
    let mask = apply_gate_filters_with(sweep, &geo, cfg, par)?;
    Ok(clusters_from_mask(volume, sweep, &mask, cfg))
}

/// Runs [`extract_clusters`] over many volumes, one volume per task.
pub fn detect_batch(
    volumes: &[VolumeScan],
    cfg: &FilterConfig,
    par: Parallelism,
) -> Vec<Result<Vec<EchoCluster>, FilterError>> {
    map_slice(volumes, par, |v| extract_clusters_with(v, cfg, Parallelism::Sequential))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FilterSummary {
    pub count: usize,
    pub total_gates: usize,
    pub mean_cluster_dbz: f64,
    pub largest_cluster_id: Option<usize>,
}

pub fn filter_summary(clusters: &[EchoCluster]) -> FilterSummary {
    if clusters.is_empty() {
        return FilterSummary::default();
    }
    let largest = clusters
        .iter()
        .max_by(|a, b| a.gate_count.cmp(&b.gate_count).then_with(|| b.cluster_id.cmp(&a.cluster_id)))
        .map(|c| c.cluster_id);
    FilterSummary {
        count: clusters.len(),
        total_gates: clusters.iter().map(|c| c.gate_count).sum(),
        mean_cluster_dbz: clusters.iter().map(|c| c.mean_reflectivity_dbz).sum::<f64>() / clusters.len() as f64,
        largest_cluster_id: largest,
    }
}
