//! Bundled scenes.

use super::{NoiseSpec, SceneSpec, StormSpec, SwarmSpec};
use crate::geodesy::destination_point;
use crate::geometry::{RadarSite, VcpDefinition};
use crate::time::parse_utc;

pub const NAMES: [&str; 6] = ["lucknow_20200712", "lucknow_133", "empty", "swarm_storm", "two_swarms", "exit_coverage"];

pub fn by_name(name: &str) -> Option<SceneSpec> {
    Some(match name {
        "lucknow_20200712" => lucknow_20200712(),
        "lucknow_133" => lucknow_133(),
        "empty" => empty(),
        "swarm_storm" => swarm_storm(),
        "two_swarms" => two_swarms(),
        "exit_coverage" => exit_coverage(),
        _ => return None,
    })
}

fn base(name: &str, n_volumes: usize, seed: u64) -> SceneSpec {
    SceneSpec {
        name: name.into(),
        site: RadarSite::lucknow(),
        vcp: VcpDefinition::imd_s_band(),
        start_time: parse_utc("2020-07-12T02:32:10Z").expect("literal"),
        n_volumes,
        cadence_s: Some(600.0),
        end_time: None,
        swarms: vec![],
        storms: vec![],
        noise: NoiseSpec::default(),
        rng_seed: seed,
    }
}

/// A point `range_km` from the Lucknow site along `bearing_deg`.
fn from_site(bearing_deg: f64, range_km: f64) -> (f64, f64) {
    let s = RadarSite::lucknow();
    destination_point(s.latitude_deg, s.longitude_deg, bearing_deg, range_km)
}

/// The layer spans 0.15 to 1.95 km so the lowest beam stays inside it from
/// about 20 km out to the far edge of the analysis range.
fn lucknow_swarm() -> SwarmSpec {
    let (lat, lon) = from_site(300.0, 125.0);
    SwarmSpec {
        layer_base_km: 0.15,
        layer_depth_m: Some(1800.0),
        radius_km: 20.0,
        mean_dbz: 27.11,
        dbz_spread: 3.0,
        ground_speed_ms: Some(3.47),
        target_gate_count: Some(2880),
        // crosses toward the radar, passing about 30 km to its north-east side
        ..SwarmSpec::new(lat, lon, 134.0)
    }
}

/// One swarm sized to 2880 lowest-sweep gates, 27.11 dBZ, 3.47 m/s, 54
/// volumes from 02:32:10 to 11:32:09 UTC.
pub fn lucknow_20200712() -> SceneSpec {
    SceneSpec {
        end_time: Some(parse_utc("2020-07-12T11:32:09Z").expect("literal")),
        swarms: vec![lucknow_swarm()],
        ..base("lucknow_20200712", 54, 20_200_712)
    }
}

/// Same swarm over 133 volumes at the nominal 600 s cadence.
pub fn lucknow_133() -> SceneSpec {
    SceneSpec { swarms: vec![lucknow_swarm()], ..base("lucknow_133", 133, 20_200_712) }
}

pub fn empty() -> SceneSpec {
    base("empty", 3, 0)
}

/// A swarm and a 4.5 km storm moving at 3.5 m/s, well apart, with speckle.
pub fn swarm_storm() -> SceneSpec {
    let (slat, slon) = from_site(300.0, 80.0);
    let swarm = SwarmSpec {
        layer_base_km: 0.15,
        layer_depth_m: Some(1500.0),
        radius_km: 12.0,
        ground_speed_ms: Some(4.8),
        ..SwarmSpec::new(slat, slon, 120.0)
    };
    let (tlat, tlon) = from_site(160.0, 60.0);
    let storm = StormSpec { top_km: 4.5, core_dbz: 45.0, speed_ms: 3.5, ..StormSpec::new(tlat, tlon, 10.0, 60.0) };
    SceneSpec {
        swarms: vec![swarm],
        storms: vec![storm],
        noise: NoiseSpec { speckle_probability: 2e-4, ..NoiseSpec::default() },
        ..base("swarm_storm", 6, 4_500)
    }
}

pub fn two_swarms() -> SceneSpec {
    let mk = |bearing: f64, heading: f64| {
        let (lat, lon) = from_site(bearing, 70.0);
        SwarmSpec {
            layer_base_km: 0.15,
            layer_depth_m: Some(1200.0),
            radius_km: 10.0,
            ground_speed_ms: Some(4.8),
            ..SwarmSpec::new(lat, lon, heading)
        }
    };
    SceneSpec { swarms: vec![mk(0.0, 90.0), mk(180.0, 270.0)], ..base("two_swarms", 12, 2) }
}

/// A swarm flying outward that leaves the analysis range mid-run.
pub fn exit_coverage() -> SceneSpec {
    let (lat, lon) = from_site(45.0, 125.0);
    let swarm = SwarmSpec {
        layer_base_km: 0.15,
        layer_depth_m: Some(1800.0),
        radius_km: 8.0,
        ground_speed_ms: Some(5.3),
        ..SwarmSpec::new(lat, lon, 45.0)
    };
    SceneSpec { swarms: vec![swarm], ..base("exit_coverage", 18, 3) }
}
