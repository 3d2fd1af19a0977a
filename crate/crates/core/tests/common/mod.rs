//! Helpers shared by the integration tests: random volume generators and
//! independent oracles.
#![allow(dead_code)]

use chrono::{DateTime, Duration, Utc};
use locust_radar::geometry::{Band, RadarSite, VcpDefinition};
use locust_radar::volume::{MomentGrid, Sweep, VolumeScan, NO_DATA};
use locust_radar::{FilterConfig, GateMask};
use rand::Rng;

pub fn epoch() -> DateTime<Utc> {
    locust_radar::time::parse_utc("2020-07-12T00:00:00Z").unwrap()
}

fn random_grid<R: Rng>(rng: &mut R, rays: usize, gates: usize, lo: f64, hi: f64, p_missing: f64) -> MomentGrid {
    let data = (0..rays * gates)
        .map(|_| {
            if rng.random_bool(p_missing) {
                NO_DATA
            } else {
                rng.random_range((lo * 100.0) as i16..=(hi * 100.0) as i16)
            }
        })
        .collect();
    MomentGrid::from_raw(rays, gates, data).unwrap()
}

/// Strictly increasing azimuths on the 0.01° lattice.
pub fn random_azimuths<R: Rng>(rng: &mut R, rays: usize) -> Vec<f64> {
    let mut picks: Vec<u16> = rand::seq::index::sample(rng, 36_000, rays).into_iter().map(|i| i as u16).collect();
    picks.sort_unstable();
    picks.into_iter().map(|c| c as f64 / 100.0).collect()
}

pub fn random_sweep<R: Rng>(rng: &mut R, elevation: f64, rays: usize, gates: usize) -> Sweep {
    let p = rng.random_range(0.0..0.6);
    Sweep {
        elevation_deg: elevation,
        ray_azimuths_deg: random_azimuths(rng, rays),
        z: random_grid(rng, rays, gates, -35.0, 80.0, p),
        v: random_grid(rng, rays, gates, -60.0, 60.0, p),
        w: random_grid(rng, rays, gates, 0.0, 20.0, p),
    }
}

/// A valid volume of random shape, site and content.
pub fn random_volume<R: Rng>(rng: &mut R) -> VolumeScan {
    let n_el = rng.random_range(0..=4);
    let mut els: Vec<f64> = (0..n_el.max(1)).map(|_| (rng.random_range(1..2500) as f64) / 100.0).collect();
    els.sort_by(f64::total_cmp);
    els.dedup();
    let rays = rng.random_range(1..=40);
    let gates = rng.random_range(1..=60);
    let vcp = VcpDefinition {
        elevation_angles_deg: els.clone(),
        cadence_s: rng.random_range(60.0..900.0),
        first_gate_range_m: rng.random_range(0.0..2000.0),
        gate_spacing_m: rng.random_range(50.0..1000.0),
        gates_per_ray: gates,
        rays_per_sweep: rays,
    };
    let site = RadarSite {
        site_id: format!("S{}", rng.random_range(0..1000)),
        latitude_deg: rng.random_range(-89.0..89.0),
        longitude_deg: rng.random_range(-179.0..179.0),
        antenna_height_m: rng.random_range(0.0..3000.0),
        band: [Band::S, Band::C, Band::X][rng.random_range(0..3)],
    };
    let start_time = epoch() + Duration::milliseconds(rng.random_range(0..10_000_000_000));
    let sweeps = els.iter().take(n_el).map(|&el| random_sweep(rng, el, rays, gates)).collect();
    let v = VolumeScan { site, vcp, start_time, sweeps };
    v.validate().unwrap();
    v
}

/// Beam height by the plain law-of-cosines form.
pub fn oracle_height_km(s_km: f64, el_deg: f64, antenna_m: f64) -> f64 {
    let re = 4.0 / 3.0 * 6371.0;
    (s_km * s_km + re * re + 2.0 * s_km * re * el_deg.to_radians().sin()).sqrt() - re + antenna_m / 1000.0
}

/// Per-gate retention predicate written from the filter definition.
pub fn oracle_mask(sweep: &Sweep, vcp: &VcpDefinition, site: &RadarSite, cfg: &FilterConfig) -> Vec<bool> {
    let (rays, gates) = sweep.z.dims();
    let lowest = vcp.elevation_angles_deg[0];
    let mut out = Vec::with_capacity(rays * gates);
    for r in 0..rays {
        for g in 0..gates {
            let s_km = (vcp.first_gate_range_m + g as f64 * vcp.gate_spacing_m) / 1000.0;
            let raw = |m: &MomentGrid| m.raw(r, g);
            let val = |x: i16| (x != NO_DATA).then(|| x as f64 / 100.0);
            let z_ok = val(raw(&sweep.z)).is_some_and(|z| z >= cfg.z_min_dbz);
            let v_ok = val(raw(&sweep.v)).is_some_and(|v| v.abs() <= cfg.v_max_abs_ms);
            let h_ok = oracle_height_km(s_km, sweep.elevation_deg, site.antenna_height_m) <= cfg.height_ceiling_km;
            let range_ok = oracle_height_km(s_km, lowest, site.antenna_height_m) <= cfg.height_ceiling_km;
            out.push(z_ok && v_ok && h_ok && range_ok);
        }
    }
    out
}

/// Breadth-first flood fill over an explicit neighbour list; ray axis wraps.
pub fn oracle_components(bits: &[Vec<bool>], eight: bool) -> Vec<Vec<(usize, usize)>> {
    let rays = bits.len();
    let gates = bits[0].len();
    let mut seen = vec![vec![false; gates]; rays];
    let mut comps = Vec::new();
    for r0 in 0..rays {
        for g0 in 0..gates {
            if !bits[r0][g0] || seen[r0][g0] {
                continue;
            }
            let mut comp = vec![];
            let mut queue = std::collections::VecDeque::from([(r0, g0)]);
            seen[r0][g0] = true;
            while let Some((r, g)) = queue.pop_front() {
                comp.push((r, g));
                let mut nb = vec![((r + 1) % rays, g), ((r + rays - 1) % rays, g)];
                if g > 0 {
                    nb.push((r, g - 1));
                }
                if g + 1 < gates {
                    nb.push((r, g + 1));
                }
                if eight {
                    for rr in [(r + 1) % rays, (r + rays - 1) % rays] {
                        if g > 0 {
                            nb.push((rr, g - 1));
                        }
                        if g + 1 < gates {
                            nb.push((rr, g + 1));
                        }
                    }
                }
                for (a, b) in nb {
                    if bits[a][b] && !seen[a][b] {
                        seen[a][b] = true;
                        queue.push_back((a, b));
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
    }
    comps.sort();
    comps
}

pub fn mask_from_rows(bits: &[Vec<bool>]) -> GateMask {
    GateMask::from_bits(bits.len(), bits[0].len(), bits.concat()).unwrap()
}
