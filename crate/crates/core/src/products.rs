//! Display products: composite reflectivity and latitude-fixed vertical
//! cross-sections.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_range, Parallelism};
use crate::geodesy::{destination_point, km_per_degree};
use crate::geometry::gate_geolocate;
use crate::volume::{dequantize, MomentGrid, VolumeScan, NO_DATA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("latitude {latitude_deg} is outside the volume coverage ({min_deg}..{max_deg})")]
    LatitudeOutOfCoverage { latitude_deg: f64, min_deg: f64, max_deg: f64 },
    #[error("invalid slice bins: {0}")]
    InvalidBins(String),
}

/// Per-(ray, gate) maximum Z over all sweeps, shaped like the lowest sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeGrid {
    pub ray_azimuths_deg: Vec<f64>,
    pub z: MomentGrid,
}

pub fn composite_reflectivity(volume: &VolumeScan) -> CompositeGrid {
    composite_reflectivity_with(volume, Parallelism::default())
}

pub fn composite_reflectivity_with(volume: &VolumeScan, par: Parallelism) -> CompositeGrid {
    let Some(first) = volume.lowest_sweep() else {
        return CompositeGrid {
            ray_azimuths_deg: volume.vcp.uniform_azimuths(),
            z: MomentGrid::no_data(volume.vcp.rays_per_sweep, volume.vcp.gates_per_ray),
        };
    };
    let (rays, gates) = first.z.dims();
    // NO_DATA is i16::MIN, so a raw max leaves it only where every sweep has it.
    let rows: Vec<Vec<i16>> = map_range(rays, par, |r| {
        let mut row = first.z.ray_raw(r).to_vec();
        for sw in &volume.sweeps[1..] {
            for (o, &x) in row.iter_mut().zip(sw.z.ray_raw(r)) {
                *o = (*o).max(x);
            }
        }
        row
    });
    let z = MomentGrid::from_raw(rays, gates, rows.concat()).expect("rows have sweep shape");
    CompositeGrid { ray_azimuths_deg: first.ray_azimuths_deg.clone(), z }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceBins {
    /// Horizontal bin width; also the latitude band half-width is half of it.
    pub horizontal_km: f64,
    pub height_bin_km: f64,
    pub max_height_km: f64,
    /// Extent east and west of the site.
    pub half_width_km: f64,
}

impl Default for SliceBins {
    fn default() -> Self {
        SliceBins { horizontal_km: 2.0, height_bin_km: 0.1, max_height_km: 6.0, half_width_km: 150.0 }
    }
}

impl SliceBins {
    fn validate(&self) -> Result<(), ProductError> {
        let ok = self.horizontal_km > 0.0
            && self.height_bin_km > 0.0
            && self.max_height_km > 0.0
            && self.half_width_km >= self.horizontal_km;
        if ok {
            Ok(())
        } else {
            Err(ProductError::InvalidBins(format!("{self:?}")))
        }
    }

    pub fn columns(&self) -> usize {
        (2.0 * self.half_width_km / self.horizontal_km).ceil() as usize
    }

    pub fn rows(&self) -> usize {
        (self.max_height_km / self.height_bin_km).ceil() as usize
    }
}

/// Maximum Z per (east-west distance, height) cell along a fixed latitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerticalSlice {
    pub latitude_deg: f64,
    pub bins: SliceBins,
    /// Centre longitude of each column, west to east.
    pub longitudes_deg: Vec<f64>,
    /// Lower edge of each height row, km.
    pub heights_km: Vec<f64>,
    /// Row-major (height, column) raw Z; `NO_DATA` where empty.
    pub cells: Vec<i16>,
}

impl VerticalSlice {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        dequantize(self.cells[row * self.longitudes_deg.len() + col])
    }

    /// (row, column, dBZ) of every populated cell.
    pub fn populated(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.longitudes_deg.len();
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, &c)| dequantize(c).map(|z| (i / cols, i % cols, z)))
    }
}

/// Ground radius of the volume's lowest sweep.
fn coverage_km(volume: &VolumeScan) -> f64 {
    let n = volume.vcp.gates_per_ray;
    if n == 0 {
        return 0.0;
    }
    let el = volume.sweeps.first().map_or(volume.vcp.lowest_elevation_deg(), |s| s.elevation_deg);
    volume.vcp.gate_range_m(n - 1) / 1000.0 * el.to_radians().cos()
}

pub fn vertical_slice(volume: &VolumeScan, latitude_deg: f64, bins: &SliceBins) -> Result<VerticalSlice, ProductError> {
    vertical_slice_with(volume, latitude_deg, bins, Parallelism::default())
}

pub fn vertical_slice_with(
    volume: &VolumeScan,
    latitude_deg: f64,
    bins: &SliceBins,
    par: Parallelism,
) -> Result<VerticalSlice, ProductError> {
    bins.validate()?;
    let site = &volume.site;
    let reach_deg = coverage_km(volume) / km_per_degree();
    let (min_deg, max_deg) = (site.latitude_deg - reach_deg, site.latitude_deg + reach_deg);
    if !(min_deg..=max_deg).contains(&latitude_deg) {
        return Err(ProductError::LatitudeOutOfCoverage { latitude_deg, min_deg, max_deg });
    }
    let band_deg = 0.5 * bins.horizontal_km / km_per_degree();
    let (cols, rows) = (bins.columns(), bins.rows());
    // Columns are measured along the slice latitude from the site meridian.
    let km_per_lon = km_per_degree() * latitude_deg.to_radians().cos();
    let x_of = |lon: f64| (lon - site.longitude_deg) * km_per_lon + bins.half_width_km;
    let longitudes_deg = (0..cols)
        .map(|c| site.longitude_deg + ((c as f64 + 0.5) * bins.horizontal_km - bins.half_width_km) / km_per_lon)
        .collect();
    let heights_km = (0..rows).map(|r| r as f64 * bins.height_bin_km).collect();

    let mut cells = vec![NO_DATA; rows * cols];
    let jobs: Vec<(usize, usize)> = volume
        .sweeps
        .iter()
        .enumerate()
        .flat_map(|(s, sw)| (0..sw.rays()).map(move |r| (s, r)))
        .collect();
    let hits: Vec<Vec<(usize, i16)>> = map_range(jobs.len(), par, |j| {
        let (s, r) = jobs[j];
        let sw = &volume.sweeps[s];
        let az = sw.ray_azimuths_deg[r];
        let mut out = Vec::new();
        for (g, &raw) in sw.z.ray_raw(r).iter().enumerate() {
            if raw == NO_DATA {
                continue;
            }
            let geo = gate_geolocate(site, az, sw.elevation_deg, volume.vcp.gate_range_m(g));
            if (geo.latitude_deg - latitude_deg).abs() > band_deg || geo.height_km_msl < 0.0 {
                continue;
            }
            let x = x_of(geo.longitude_deg);
            let row = (geo.height_km_msl / bins.height_bin_km).floor() as usize;
            if x < 0.0 || row >= rows {
                continue;
            }
            let col = (x / bins.horizontal_km).floor() as usize;
            if col < cols {
                out.push((row * cols + col, raw));
            }
        }
        out
    });
    for (i, raw) in hits.into_iter().flatten() {
        cells[i] = cells[i].max(raw);
    }
    Ok(VerticalSlice { latitude_deg, bins: bins.clone(), longitudes_deg, heights_km, cells })
}

/// Latitude of a point `distance_km` due north (negative: south) of the site.
pub fn latitude_offset(volume: &VolumeScan, distance_km: f64) -> f64 {
    let s = &volume.site;
    let (lat, _) = destination_point(s.latitude_deg, s.longitude_deg, if distance_km >= 0.0 { 0.0 } else { 180.0 }, distance_km.abs());
    lat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RadarSite, VcpDefinition};
    use crate::time::parse_utc;
    use rand::{Rng, SeedableRng};

    fn volume(rays: usize, gates: usize) -> VolumeScan {
        let mut vcp = VcpDefinition::imd_s_band();
        vcp.rays_per_sweep = rays;
        vcp.gates_per_ray = gates;
        VolumeScan::empty(RadarSite::lucknow(), vcp, parse_utc("2020-07-12T03:52:10Z").unwrap())
    }

    #[test]
    fn single_sweep_composite_is_identity() {
        let mut v = volume(8, 12);
        v.sweeps.truncate(1);
        v.sweeps[0].z.set(3, 4, Some(22.5));
        let c = composite_reflectivity(&v);
        assert_eq!(c.z, v.sweeps[0].z);
    }

    #[test]
    fn composite_takes_max() {
        let mut v = volume(4, 4);
        v.sweeps[0].z.set(1, 1, Some(10.0));
        v.sweeps[3].z.set(1, 1, Some(20.0));
        v.sweeps[5].z.set(2, 2, Some(-5.0));
        let c = composite_reflectivity(&v);
        assert_eq!(c.z.get(1, 1), Some(20.0));
        assert_eq!(c.z.get(2, 2), Some(-5.0));
        assert_eq!(c.z.count_present(), 2);
    }

    #[test]
    fn composite_dominates_random_sweeps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut v = volume(16, 20);
            for sw in &mut v.sweeps {
                for r in 0..16 {
                    for g in 0..20 {
                        if rng.random_bool(0.4) {
                            sw.z.set(r, g, Some(rng.random_range(-30.0..70.0)));
                        }
                    }
                }
            }
            let seq = composite_reflectivity_with(&v, Parallelism::Sequential);
            assert_eq!(seq, composite_reflectivity_with(&v, Parallelism::Parallel));
            for r in 0..16 {
                for g in 0..20 {
                    let want = v.sweeps.iter().map(|s| s.z.raw(r, g)).max().unwrap();
                    assert_eq!(seq.z.raw(r, g), want);
                    assert!(v.sweeps.iter().all(|s| seq.z.raw(r, g) >= s.z.raw(r, g)));
                }
            }
        }
    }

    #[test]
    fn empty_volume_slice_is_empty() {
        let v = volume(36, 100);
        let s = vertical_slice(&v, v.site.latitude_deg, &SliceBins::default()).unwrap();
        assert_eq!(s.populated().count(), 0);
        assert_eq!(s.cells.len(), 60 * 150);
    }

    #[test]
    fn slice_latitude_outside_coverage() {
        let v = volume(36, 100);
        // coverage is about 25 km
        let lat = latitude_offset(&v, 40.0);
        assert!(matches!(
            vertical_slice(&v, lat, &SliceBins::default()),
            Err(ProductError::LatitudeOutOfCoverage { .. })
        ));
    }

    #[test]
    fn slice_places_gate_by_longitude_and_height() {
        let mut v = volume(360, 600);
        // ray 90 points due east; gate 200 is ~50 km out
        let s_idx = 1;
        v.sweeps[s_idx].z.set(90, 200, Some(31.0));
        let geo = gate_geolocate(&v.site, 90.0, v.sweeps[s_idx].elevation_deg, v.vcp.gate_range_m(200));
        let sl = vertical_slice(&v, v.site.latitude_deg, &SliceBins::default()).unwrap();
        let cells: Vec<_> = sl.populated().collect();
        assert_eq!(cells.len(), 1);
        let (row, col, z) = cells[0];
        assert_eq!(z, 31.0);
        assert!(sl.heights_km[row] <= geo.height_km_msl && geo.height_km_msl < sl.heights_km[row] + 0.1);
        assert!((sl.longitudes_deg[col] - geo.longitude_deg).abs() * km_per_degree() * 26.76f64.to_radians().cos() <= 1.0 + 1e-9);
        let seq = vertical_slice_with(&v, v.site.latitude_deg, &SliceBins::default(), Parallelism::Sequential).unwrap();
        assert_eq!(seq, sl);
    }
}
