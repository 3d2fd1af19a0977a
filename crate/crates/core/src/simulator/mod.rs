//! Synthetic volume sequences with exact ground truth.
//!
//! Objects are cylinders: a horizontal disk around a moving centroid times a
//! vertical span. A gate belongs to an object when its geolocated position is
//! inside the disk and its beam height inside the span. Storms are painted
//! after swarms and take over any shared gates; speckle noise only lands on
//! gates no object owns.
//!
//! Every volume draws from its own ChaCha8 stream (stream = volume index), so
//! volumes can be generated in any order or in parallel with identical bytes.

pub mod presets;
mod scoring;

use std::ops::Range;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_range, Parallelism};
use crate::geodesy::{angular_difference_deg, destination_point, haversine_km, initial_bearing_deg};
use crate::geometry::{beam_height_km, gate_geolocate, RadarSite, VcpDefinition};
use crate::volume::{quantize, VolumeScan};

pub use scoring::{score_detection, DetectionScore, ScoreError};

/// Default layer depth range when a swarm leaves it unset, meters.
pub const LAYER_DEPTH_RANGE_M: (f64, f64) = (50.0, 150.0);
/// Default ground speed range when a swarm leaves it unset, m/s.
pub const SWARM_SPEED_RANGE_MS: (f64, f64) = (4.4, 5.3);
pub const SWARM_CEILING_KM: f64 = 2.0;
pub const STORM_TOP_MAX_KM: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid scene spec: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Invalid(msg.into()))
}

fn default_swarm_dbz() -> f64 {
    27.11
}

fn default_spread() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmSpec {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub layer_base_km: f64,
    #[serde(default)]
    pub layer_depth_m: Option<f64>,
    pub radius_km: f64,
    #[serde(default = "default_swarm_dbz")]
    pub mean_dbz: f64,
    #[serde(default = "default_spread")]
    pub dbz_spread: f64,
    #[serde(default)]
    pub ground_speed_ms: Option<f64>,
    pub heading_deg: f64,
    /// When set, the radius is re-sized every volume so the lowest sweep
    /// holds this many gates.
    #[serde(default)]
    pub target_gate_count: Option<usize>,
}

impl SwarmSpec {
    pub fn new(latitude_deg: f64, longitude_deg: f64, heading_deg: f64) -> Self {
        SwarmSpec {
            latitude_deg,
            longitude_deg,
            layer_base_km: 0.5,
            layer_depth_m: None,
            radius_km: 10.0,
            mean_dbz: default_swarm_dbz(),
            dbz_spread: default_spread(),
            ground_speed_ms: None,
            heading_deg,
            target_gate_count: None,
        }
    }

    pub fn layer_top_km(&self) -> f64 {
        self.layer_base_km + self.layer_depth_m.unwrap_or(LAYER_DEPTH_RANGE_M.1) / 1000.0
    }

    fn validate(&self, i: usize) -> Result<(), SpecError> {
        let p = format!("swarm {i}");
        if !(self.layer_base_km >= 0.0) {
            return invalid(format!("{p}: layer_base_km must be >= 0"));
        }
        if let Some(d) = self.layer_depth_m {
            if !(d > 0.0) {
                return invalid(format!("{p}: layer_depth_m must be positive"));
            }
        }
        if self.layer_top_km() > SWARM_CEILING_KM {
            return invalid(format!("{p}: layer top {} km exceeds {SWARM_CEILING_KM} km", self.layer_top_km()));
        }
        if !(self.radius_km > 0.0) {
            return invalid(format!("{p}: radius_km must be positive"));
        }
        if !(self.dbz_spread >= 0.0) || self.mean_dbz - self.dbz_spread < -35.0 || self.mean_dbz + self.dbz_spread > 80.0 {
            return invalid(format!("{p}: dBZ range outside [-35, 80]"));
        }
        if let Some(s) = self.ground_speed_ms {
            if !(s >= 0.0) {
                return invalid(format!("{p}: ground_speed_ms must be >= 0"));
            }
        }
        if self.target_gate_count == Some(0) {
            return invalid(format!("{p}: target_gate_count must be positive"));
        }
        Ok(())
    }
}

fn default_storm_top() -> f64 {
    4.5
}

fn default_storm_core() -> f64 {
    45.0
}

fn default_storm_speed() -> f64 {
    3.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StormSpec {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default = "default_storm_top")]
    pub top_km: f64,
    #[serde(default = "default_storm_core")]
    pub core_dbz: f64,
    #[serde(default = "default_spread")]
    pub dbz_spread: f64,
    pub radius_km: f64,
    #[serde(default = "default_storm_speed")]
    pub speed_ms: f64,
    pub heading_deg: f64,
}

impl StormSpec {
    pub fn new(latitude_deg: f64, longitude_deg: f64, radius_km: f64, heading_deg: f64) -> Self {
        StormSpec {
            latitude_deg,
            longitude_deg,
            top_km: default_storm_top(),
            core_dbz: default_storm_core(),
            dbz_spread: default_spread(),
            radius_km,
            speed_ms: default_storm_speed(),
            heading_deg,
        }
    }

    fn validate(&self, i: usize) -> Result<(), SpecError> {
        let p = format!("storm {i}");
        if !(self.top_km > SWARM_CEILING_KM && self.top_km <= STORM_TOP_MAX_KM) {
            return invalid(format!("{p}: top_km must be in ({SWARM_CEILING_KM}, {STORM_TOP_MAX_KM}]"));
        }
        if !(self.core_dbz >= 35.0) || !(self.dbz_spread >= 0.0) || self.core_dbz + self.dbz_spread > 80.0 {
            return invalid(format!("{p}: core_dbz must be >= 35 and the dBZ range within 80"));
        }
        if !(3.0..=4.0).contains(&self.speed_ms) {
            return invalid(format!("{p}: speed_ms must be in [3, 4]"));
        }
        if !(self.radius_km > 0.0) {
            return invalid(format!("{p}: radius_km must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Per-gate probability of an isolated speckle echo, every sweep.
    pub speckle_probability: f64,
    pub dbz_min: f64,
    pub dbz_max: f64,
    pub v_max_abs_ms: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { speckle_probability: 0.0, dbz_min: 5.0, dbz_max: 25.0, v_max_abs_ms: 15.0 }
    }
}

fn default_cadence() -> Option<f64> {
    Some(600.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub site: RadarSite,
    pub vcp: VcpDefinition,
    #[serde(with = "crate::time::serde_utc")]
    pub start_time: DateTime<Utc>,
    pub n_volumes: usize,
    /// Ignored when `end_time` is set.
    #[serde(default = "default_cadence")]
    pub cadence_s: Option<f64>,
    /// When set, volumes are spread evenly from `start_time` to `end_time`
    /// (millisecond resolution) and the cadence follows from it.
    #[serde(default, with = "crate::time::serde_utc_opt")]
    pub end_time: Option<DateTime<Utc>>,
    #[serde(default)]
    pub swarms: Vec<SwarmSpec>,
    #[serde(default)]
    pub storms: Vec<StormSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub rng_seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        self.site.validate().map_err(|e| SpecError::Invalid(e.to_string()))?;
        self.vcp.validate().map_err(|e| SpecError::Invalid(e.to_string()))?;
        if self.n_volumes == 0 {
            return invalid("n_volumes must be >= 1");
        }
        match self.end_time {
            Some(end) if self.n_volumes > 1 && end <= self.start_time => return invalid("end_time must follow start_time"),
            Some(_) => {}
            None => {
                if !(self.cadence_s.unwrap_or(600.0) > 0.0) {
                    return invalid("cadence_s must be positive");
                }
            }
        }
        for (i, s) in self.swarms.iter().enumerate() {
            s.validate(i)?;
        }
        for (i, s) in self.storms.iter().enumerate() {
            s.validate(i)?;
        }
        let n = &self.noise;
        if !(0.0..=1.0).contains(&n.speckle_probability) || !(n.dbz_min <= n.dbz_max) || n.dbz_min < -35.0 || n.dbz_max > 80.0 {
            return invalid("noise: need probability in [0, 1] and -35 <= dbz_min <= dbz_max <= 80");
        }
        if !(0.0..=60.0).contains(&n.v_max_abs_ms) {
            return invalid("noise: v_max_abs_ms must be in [0, 60]");
        }
        if self.swarms.len() + self.storms.len() >= u16::MAX as usize {
            return invalid("too many objects");
        }
        Ok(())
    }

    /// Volume start times.
    pub fn volume_times(&self) -> Vec<DateTime<Utc>> {
        let n = self.n_volumes as i64;
        match self.end_time {
            Some(end) if n > 1 => {
                let total_ms = (end - self.start_time).num_milliseconds();
                // integer rounding keeps the last volume exactly on end_time
                (0..n)
                    .map(|k| self.start_time + Duration::milliseconds((k * total_ms * 2 + (n - 1)) / (2 * (n - 1))))
                    .collect()
            }
            _ => {
                let cad_ms = (self.cadence_s.unwrap_or(600.0) * 1000.0).round() as i64;
                (0..n).map(|k| self.start_time + Duration::milliseconds(k * cad_ms)).collect()
            }
        }
    }

    /// Copy with every randomized default drawn, so the echo reproduces the scene.
    fn resolved(&self) -> SceneSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(u64::MAX);
        let mut out = self.clone();
        for s in &mut out.swarms {
            if s.layer_depth_m.is_none() {
                s.layer_depth_m = Some(rng.random_range(LAYER_DEPTH_RANGE_M.0..=LAYER_DEPTH_RANGE_M.1));
            }
            if s.ground_speed_ms.is_none() {
                s.ground_speed_ms = Some(rng.random_range(SWARM_SPEED_RANGE_MS.0..=SWARM_SPEED_RANGE_MS.1));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Swarm,
    Storm,
}

/// Exact gate membership of one object in one volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub kind: ObjectKind,
    /// Index within its kind in the scene spec.
    pub index: usize,
    pub centroid_lat_deg: f64,
    pub centroid_lon_deg: f64,
    pub radius_km: f64,
    pub ground_speed_ms: f64,
    pub heading_deg: f64,
    /// Per sweep, sorted (ray, gate) pairs.
    pub gates: Vec<Vec<(usize, usize)>>,
}

impl ObjectTruth {
    pub fn lowest_sweep_gates(&self) -> &[(usize, usize)] {
        self.gates.first().map_or(&[], Vec::as_slice)
    }

    pub fn gate_count(&self) -> usize {
        self.gates.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeTruth {
    pub volume_index: usize,
    #[serde(with = "crate::time::serde_utc")]
    pub time: DateTime<Utc>,
    pub objects: Vec<ObjectTruth>,
    /// Per sweep, sorted speckle gates.
    pub noise_gates: Vec<Vec<(usize, usize)>>,
}

impl VolumeTruth {
    pub fn objects_of(&self, kind: ObjectKind) -> impl Iterator<Item = &ObjectTruth> {
        self.objects.iter().filter(move |o| o.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scene: String,
    pub rng_seed: u64,
    pub volumes: Vec<VolumeTruth>,
}

/// A validated scene; generates any volume on demand.
#[derive(Debug, Clone)]
pub struct Scene {
    spec: SceneSpec,
    times: Vec<DateTime<Utc>>,
}

struct Footprint {
    lat: f64,
    lon: f64,
    radius_km: f64,
    bottom_km: f64,
    top_km: f64,
}

impl Scene {
    pub fn new(spec: &SceneSpec) -> Result<Scene, SpecError> {
        spec.validate()?;
        let spec = spec.resolved();
        let times = spec.volume_times();
        Ok(Scene { spec, times })
    }

    /// The spec with randomized defaults filled in.
    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[DateTime<Utc>] {
        &self.times
    }

    fn elapsed_s(&self, k: usize) -> f64 {
        crate::time::seconds_between(&self.spec.start_time, &self.times[k])
    }

    /// Centroid of swarm `i` at volume `k`.
    pub fn swarm_position(&self, i: usize, k: usize) -> (f64, f64) {
        let s = &self.spec.swarms[i];
        let d = s.ground_speed_ms.unwrap_or(0.0) * self.elapsed_s(k) / 1000.0;
        destination_point(s.latitude_deg, s.longitude_deg, s.heading_deg, d)
    }

    pub fn storm_position(&self, i: usize, k: usize) -> (f64, f64) {
        let s = &self.spec.storms[i];
        destination_point(s.latitude_deg, s.longitude_deg, s.heading_deg, s.speed_ms * self.elapsed_s(k) / 1000.0)
    }

    /// Gates of sweep `el` that may fall inside the footprint, with their
    /// distance to its centre; exact membership is `dist <= radius`.
    fn candidates(&self, az: &[f64], el: f64, fp: &Footprint, reach_km: f64) -> Vec<(usize, usize, f64)> {
        let site = &self.spec.site;
        let vcp = &self.spec.vcp;
        let d0 = haversine_km(site.latitude_deg, site.longitude_deg, fp.lat, fp.lon);
        let b0 = initial_bearing_deg(site.latitude_deg, site.longitude_deg, fp.lat, fp.lon);
        let cos_el = el.to_radians().cos();
        let half_width_deg = if reach_km < 0.9 * d0 { (reach_km / d0).asin().to_degrees() + 1.0 } else { 180.0 };
        let ground = |n: usize| vcp.gate_range_m(n) / 1000.0 * cos_el;
        let (lo_km, hi_km) = (d0 - reach_km - 1.0, d0 + reach_km + 1.0);
        let gates: Vec<usize> = (0..vcp.gates_per_ray)
            .filter(|&n| {
                let g = ground(n);
                g >= lo_km && g <= hi_km && {
                    let h = beam_height_km(vcp.gate_range_m(n) / 1000.0, el, site.antenna_height_m);
                    h >= fp.bottom_km && h <= fp.top_km
                }
            })
            .collect();
        let mut out = Vec::new();
        for (r, &a) in az.iter().enumerate() {
            if angular_difference_deg(a, b0) > half_width_deg {
                continue;
            }
            for &n in &gates {
                let geo = gate_geolocate(site, a, el, vcp.gate_range_m(n));
                let d = haversine_km(geo.latitude_deg, geo.longitude_deg, fp.lat, fp.lon);
                if d <= reach_km {
                    out.push((r, n, d));
                }
            }
        }
        out
    }

    /// Radius that puts exactly `target` gates on the lowest sweep, or the
    /// search bound when fewer gates are reachable.
    fn sized_radius(&self, az: &[f64], fp: &Footprint, target: usize) -> f64 {
        let site = &self.spec.site;
        let vcp = &self.spec.vcp;
        let d0 = haversine_km(site.latitude_deg, site.longitude_deg, fp.lat, fp.lon).max(1.0);
        let gate_area = vcp.gate_spacing_m / 1000.0 * d0 * (360.0 / az.len() as f64).to_radians();
        let estimate = (target as f64 * gate_area / std::f64::consts::PI).sqrt();
        let bound = 3.0 * estimate + 5.0;
        let mut d: Vec<f64> = self
            .candidates(az, vcp.lowest_elevation_deg(), fp, bound)
            .into_iter()
            .map(|c| c.2)
            .collect();
        if d.len() < target {
            return bound;
        }
        d.sort_by(f64::total_cmp);
        match d.get(target) {
            Some(&next) => 0.5 * (d[target - 1] + next),
            None => d[target - 1],
        }
    }

    /// Generates volume `k` and its truth.
    pub fn volume(&self, k: usize) -> (VolumeScan, VolumeTruth) {
        let spec = &self.spec;
        let site = &spec.site;
        let vcp = &spec.vcp;
        let mut vol = VolumeScan::empty(site.clone(), vcp.clone(), self.times[k]);
        let az = vol.sweeps[0].ray_azimuths_deg.clone();
        let (rays, gates) = (vcp.rays_per_sweep, vcp.gates_per_ray);
        let n_sweeps = vol.sweeps.len();

        let mut objects = Vec::new();
        let mut footprints = Vec::new();
        for (i, s) in spec.swarms.iter().enumerate() {
            let (lat, lon) = self.swarm_position(i, k);
            let mut fp = Footprint { lat, lon, radius_km: s.radius_km, bottom_km: s.layer_base_km, top_km: s.layer_top_km() };
            if let Some(t) = s.target_gate_count {
                fp.radius_km = self.sized_radius(&az, &fp, t);
            }
            objects.push(ObjectTruth {
                kind: ObjectKind::Swarm,
                index: i,
                centroid_lat_deg: lat,
                centroid_lon_deg: lon,
                radius_km: fp.radius_km,
                ground_speed_ms: s.ground_speed_ms.unwrap_or(0.0),
                heading_deg: s.heading_deg,
                gates: Vec::new(),
            });
            footprints.push(fp);
        }
        for (i, s) in spec.storms.iter().enumerate() {
            let (lat, lon) = self.storm_position(i, k);
            objects.push(ObjectTruth {
                kind: ObjectKind::Storm,
                index: i,
                centroid_lat_deg: lat,
                centroid_lon_deg: lon,
                radius_km: s.radius_km,
                ground_speed_ms: s.speed_ms,
                heading_deg: s.heading_deg,
                gates: Vec::new(),
            });
            footprints.push(Footprint { lat, lon, radius_km: s.radius_km, bottom_km: 0.0, top_km: s.top_km });
        }

        // owner[s][r * gates + g]: 0 = free, j + 1 = object j; later objects win
        let mut owner = vec![vec![0u16; rays * gates]; n_sweeps];
        let mut members: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(footprints.len());
        for (j, fp) in footprints.iter().enumerate() {
            let mut per_sweep = Vec::with_capacity(n_sweeps);
            for (s, sw) in vol.sweeps.iter().enumerate() {
                let mut cells: Vec<(usize, usize)> =
                    self.candidates(&az, sw.elevation_deg, fp, fp.radius_km).into_iter().map(|c| (c.0, c.1)).collect();
                cells.sort_unstable();
                for &(r, g) in &cells {
                    owner[s][r * gates + g] = j as u16 + 1;
                }
                per_sweep.push(cells);
            }
            members.push(per_sweep);
        }
        for (j, per_sweep) in members.into_iter().enumerate() {
            objects[j].gates = per_sweep
                .into_iter()
                .enumerate()
                .map(|(s, cells)| cells.into_iter().filter(|&(r, g)| owner[s][r * gates + g] == j as u16 + 1).collect())
                .collect();
        }

        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        rng.set_stream(k as u64);
        let n_swarms = spec.swarms.len();
        for (j, obj) in objects.iter().enumerate() {
            let (mean, spread, w_range) = if j < n_swarms {
                (spec.swarms[j].mean_dbz, spec.swarms[j].dbz_spread, (0.5, 1.5))
            } else {
                let s = &spec.storms[j - n_swarms];
                (s.core_dbz, s.dbz_spread, (1.0, 3.0))
            };
            for (s, cells) in obj.gates.iter().enumerate() {
                let sw = &mut vol.sweeps[s];
                let cos_el = sw.elevation_deg.to_radians().cos();
                for &(r, g) in cells {
                    let z = if spread > 0.0 { rng.random_range(mean - spread..=mean + spread) } else { mean };
                    let w = rng.random_range(w_range.0..=w_range.1);
                    // signed radial component, positive away from the radar
                    let v = obj.ground_speed_ms * (obj.heading_deg - sw.ray_azimuths_deg[r]).to_radians().cos() * cos_el;
                    sw.z.set_raw(r, g, quantize(z));
                    sw.v.set_raw(r, g, quantize(v));
                    sw.w.set_raw(r, g, quantize(w));
                }
            }
        }

        let mut noise_gates = vec![Vec::new(); n_sweeps];
        let n = &spec.noise;
        if n.speckle_probability > 0.0 {
            for (s, (sw, own)) in vol.sweeps.iter_mut().zip(&owner).enumerate() {
                for (i, &o) in own.iter().enumerate() {
                    if o != 0 || !rng.random_bool(n.speckle_probability) {
                        continue;
                    }
                    let (r, g) = (i / gates, i % gates);
                    let z = rng.random_range(n.dbz_min..=n.dbz_max);
                    let v = rng.random_range(-n.v_max_abs_ms..=n.v_max_abs_ms);
                    let w = rng.random_range(0.0..=4.0);
                    sw.z.set_raw(r, g, quantize(z));
                    sw.v.set_raw(r, g, quantize(v));
                    sw.w.set_raw(r, g, quantize(w));
                    noise_gates[s].push((r, g));
                }
            }
        }

        let truth = VolumeTruth { volume_index: k, time: self.times[k], objects, noise_gates };
        (vol, truth)
    }

    /// Generates a contiguous range of volumes.
    pub fn volumes_with(&self, range: Range<usize>, par: Parallelism) -> Vec<(VolumeScan, VolumeTruth)> {
        let start = range.start;
        map_range(range.len(), par, |i| self.volume(start + i))
    }
}

/// Generates every volume of the scene. Holds the whole sequence in memory;
/// for long full-size scenes iterate [`Scene::volume`] instead.
pub fn simulate_scene(spec: &SceneSpec) -> Result<(Vec<VolumeScan>, GroundTruth), SpecError> {
    simulate_scene_with(spec, Parallelism::default())
}

pub fn simulate_scene_with(spec: &SceneSpec, par: Parallelism) -> Result<(Vec<VolumeScan>, GroundTruth), SpecError> {
    let scene = Scene::new(spec)?;
    let (vols, truths): (Vec<_>, Vec<_>) = scene.volumes_with(0..scene.len(), par).into_iter().unzip();
    Ok((vols, GroundTruth { scene: spec.name.clone(), rng_seed: spec.rng_seed, volumes: truths }))
}
