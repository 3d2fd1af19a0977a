//! CSV and GeoJSON writers for clusters, tracks and products.
//!
//! CSV files start with `# key=value` provenance lines (tool, version and the
//! effective config as compact JSON), then an RFC 4180 table. Read them back
//! with `#` as the comment character. JSON and GeoJSON outputs carry the same
//! record as a top-level `provenance` member.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::filter::EchoCluster;
use crate::geometry::VcpCurvePoint;
use crate::products::{CompositeGrid, VerticalSlice};
use crate::time::format_utc;
use crate::tracker::{Observation, SwarmTrack, TrackStatus};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad GeoJSON: {0}")]
    GeoJson(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: Value,
}

impl Provenance {
    pub fn new(config: Value) -> Self {
        Provenance { tool: "locust-radar".into(), version: crate::VERSION.into(), config }
    }

    fn preamble(&self) -> String {
        format!("# tool={}\n# version={}\n# config={}\n", self.tool, self.version, self.config)
    }
}

fn csv_with_preamble<F>(prov: &Provenance, header: &[&str], fill: F) -> Result<String, ExportError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let body = w.into_inner().map_err(|e| e.into_error())?;
    Ok(prov.preamble() + &String::from_utf8(body).expect("csv output is utf-8"))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub const CLUSTER_HEADER: [&str; 11] = [
    "time",
    "cluster_id",
    "elevation_deg",
    "gate_count",
    "mean_reflectivity_dbz",
    "linear_mean_reflectivity_dbz",
    "mean_radial_velocity_ms",
    "centroid_lat_deg",
    "centroid_lon_deg",
    "centroid_height_km",
    "source",
];

/// One row per cluster; `source` names the volume each came from.
pub fn clusters_csv(rows: &[(String, EchoCluster)], prov: &Provenance) -> Result<String, ExportError> {
    csv_with_preamble(prov, &CLUSTER_HEADER, |w| {
        for (src, c) in rows {
            w.write_record([
                format_utc(&c.time),
                c.cluster_id.to_string(),
                c.elevation_deg.to_string(),
                c.gate_count.to_string(),
                c.mean_reflectivity_dbz.to_string(),
                c.linear_mean_reflectivity_dbz.to_string(),
                c.mean_radial_velocity_ms.to_string(),
                c.centroid_lat_deg.to_string(),
                c.centroid_lon_deg.to_string(),
                c.centroid_height_km.to_string(),
                src.clone(),
            ])?;
        }
        Ok(())
    })
}

pub const TRACK_HEADER: [&str; 12] = [
    "track_id",
    "status",
    "confirmed",
    "n_observations",
    "first_time",
    "last_time",
    "duration_s",
    "path_length_km",
    "net_displacement_km",
    "mean_speed_ms",
    "net_speed_ms",
    "mean_heading_deg",
];

pub fn tracks_csv(tracks: &[SwarmTrack], min_observations: usize, prov: &Provenance) -> Result<String, ExportError> {
    csv_with_preamble(prov, &TRACK_HEADER, |w| {
        for t in tracks {
            w.write_record([
                t.track_id.to_string(),
                status_str(t.status).to_string(),
                (t.observations.len() >= min_observations).to_string(),
                t.observations.len().to_string(),
                format_utc(&t.first().time),
                format_utc(&t.last().time),
                t.duration_s.to_string(),
                t.path_length_km.to_string(),
                t.net_displacement_km.to_string(),
                t.mean_speed_ms.to_string(),
                t.net_speed_ms.to_string(),
                opt(t.mean_heading_deg),
            ])?;
        }
        Ok(())
    })
}

fn status_str(s: TrackStatus) -> &'static str {
    match s {
        TrackStatus::Active => "ACTIVE",
        TrackStatus::Ended => "ENDED",
    }
}

/// Height rows by longitude columns; empty cells are blank.
pub fn slice_csv(slice: &VerticalSlice, prov: &Provenance) -> Result<String, ExportError> {
    let mut header = vec!["height_km".to_string()];
    header.extend(slice.longitudes_deg.iter().map(|l| l.to_string()));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_with_preamble(prov, &header_refs, |w| {
        for (row, h) in slice.heights_km.iter().enumerate() {
            let mut rec = vec![h.to_string()];
            rec.extend((0..slice.longitudes_deg.len()).map(|c| opt(slice.get(row, c))));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

/// Populated composite cells only, in (ray, gate) order.
pub fn composite_csv(grid: &CompositeGrid, gate_range_km: impl Fn(usize) -> f64, prov: &Provenance) -> Result<String, ExportError> {
    csv_with_preamble(prov, &["ray", "azimuth_deg", "gate", "range_km", "reflectivity_dbz"], |w| {
        let (rays, gates) = grid.z.dims();
        for r in 0..rays {
            for g in 0..gates {
                if let Some(z) = grid.z.get(r, g) {
                    w.write_record([
                        r.to_string(),
                        grid.ray_azimuths_deg[r].to_string(),
                        g.to_string(),
                        gate_range_km(g).to_string(),
                        z.to_string(),
                    ])?;
                }
            }
        }
        Ok(())
    })
}

pub fn vcp_curves_csv(points: &[VcpCurvePoint], prov: &Provenance) -> Result<String, ExportError> {
    csv_with_preamble(prov, &["elevation_deg", "range_km", "height_km"], |w| {
        for p in points {
            w.write_record([p.elevation_deg.to_string(), p.range_km.to_string(), p.height_km.to_string()])?;
        }
        Ok(())
    })
}

fn observation_json(o: &Observation) -> Value {
    json!({
        "time": format_utc(&o.time),
        "cluster_id": o.cluster_id,
        "gate_count": o.gate_count,
        "mean_reflectivity_dbz": o.mean_reflectivity_dbz,
        "lat": o.latitude_deg,
        "lon": o.longitude_deg,
        "height_km": o.height_km,
    })
}

/// Tracks as a FeatureCollection. Multi-observation tracks are LineStrings,
/// single observations Points. Each feature keeps its observations so the
/// tracks can be rebuilt with [`tracks_from_geojson`].
pub fn tracks_geojson(tracks: &[SwarmTrack], prov: &Provenance, extra: &[(&str, Value)]) -> Value {
    let features: Vec<Value> = tracks
        .iter()
        .map(|t| {
            let coords: Vec<Value> = t.observations.iter().map(|o| json!([o.longitude_deg, o.latitude_deg])).collect();
            let geometry = if coords.len() >= 2 {
                json!({"type": "LineString", "coordinates": coords})
            } else {
                json!({"type": "Point", "coordinates": coords[0]})
            };
            json!({
                "type": "Feature",
                "geometry": geometry,
                "properties": {
                    "track_id": t.track_id,
                    "status": status_str(t.status),
                    "mean_speed_ms": t.mean_speed_ms,
                    "net_speed_ms": t.net_speed_ms,
                    "heading_deg": t.mean_heading_deg,
                    "duration_s": t.duration_s,
                    "path_length_km": t.path_length_km,
                    "net_displacement_km": t.net_displacement_km,
                    "observations": t.observations.iter().map(observation_json).collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    let mut fc = json!({"type": "FeatureCollection", "features": features, "provenance": prov});
    for (k, v) in extra {
        fc[*k] = v.clone();
    }
    fc
}

pub fn tracks_from_geojson(fc: &Value) -> Result<Vec<SwarmTrack>, ExportError> {
    let bad = |m: &str| ExportError::GeoJson(m.to_string());
    if fc["type"] != "FeatureCollection" {
        return Err(bad("not a FeatureCollection"));
    }
    let features = fc["features"].as_array().ok_or_else(|| bad("missing features"))?;
    features
        .iter()
        .map(|f| {
            let p = &f["properties"];
            let id = p["track_id"].as_u64().ok_or_else(|| bad("missing track_id"))?;
            let status = match p["status"].as_str() {
                Some("ACTIVE") => TrackStatus::Active,
                Some("ENDED") => TrackStatus::Ended,
                _ => return Err(bad("bad status")),
            };
            let obs = p["observations"].as_array().ok_or_else(|| bad("missing observations"))?;
            if obs.is_empty() {
                return Err(bad("track without observations"));
            }
            let observations = obs
                .iter()
                .map(|o| {
                    let num = |k: &str| o[k].as_f64().ok_or_else(|| bad(&format!("observation missing {k}")));
                    Ok(Observation {
                        time: crate::time::parse_utc(o["time"].as_str().ok_or_else(|| bad("observation missing time"))?)
                            .map_err(|e| bad(&e))?,
                        cluster_id: o["cluster_id"].as_u64().unwrap_or(0) as usize,
                        gate_count: o["gate_count"].as_u64().unwrap_or(0) as usize,
                        mean_reflectivity_dbz: num("mean_reflectivity_dbz")?,
                        latitude_deg: num("lat")?,
                        longitude_deg: num("lon")?,
                        height_km: num("height_km")?,
                    })
                })
                .collect::<Result<Vec<_>, ExportError>>()?;
            if observations.windows(2).any(|w| w[1].time <= w[0].time) {
                return Err(bad("observations out of time order"));
            }
            Ok(SwarmTrack::from_observations(id, observations, status))
        })
        .collect()
}

/// Cluster centroids as Point features.
pub fn clusters_geojson(clusters: &[EchoCluster], prov: &Provenance) -> Value {
    let features: Vec<Value> = clusters
        .iter()
        .map(|c| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [c.centroid_lon_deg, c.centroid_lat_deg]},
                "properties": {
                    "time": format_utc(&c.time),
                    "cluster_id": c.cluster_id,
                    "gate_count": c.gate_count,
                    "mean_reflectivity_dbz": c.mean_reflectivity_dbz,
                    "mean_radial_velocity_ms": c.mean_radial_velocity_ms,
                    "centroid_height_km": c.centroid_height_km,
                },
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features, "provenance": prov})
}
