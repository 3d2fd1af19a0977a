//! Subcommand bodies.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use locust_radar::crosscheck::crosscheck_track;
use locust_radar::export::{self, Provenance};
use locust_radar::filter::{detect_batch, FilterError};
use locust_radar::geometry::vcp_curves;
use locust_radar::io::{read_rain_records, read_volume, read_wind_field, write_volume};
use locust_radar::simulator::{presets, GroundTruth, Scene, SceneSpec};
use locust_radar::time::format_utc;
use locust_radar::tracker::{lead_time_estimate, LeadTime, TrackStatus};
use locust_radar::{EchoCluster, Parallelism, RadarSite, Tracker, VcpDefinition, VolumeScan};
use serde_json::{json, Value};

use crate::config::{RunConfig, PathsConfig};
use crate::{Failure, ResultExt};

type CmdResult<T = ()> = Result<T, Failure>;

/// Volumes read and detected per batch; bounds memory on long scenes.
const BATCH: usize = 8;

fn out_dir(paths: &PathsConfig) -> CmdResult<PathBuf> {
    let dir = paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).internal()?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).with_context(|| format!("writing {}", path.display())).internal()
}

fn write_json(path: &Path, value: &Value) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    write_text(path, &text)
}

fn read_json(path: &Path) -> CmdResult<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).input()
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Files as given, directories expanded to their `*.svol` entries by name.
fn expand_inputs(inputs: &[PathBuf]) -> CmdResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))
                .input()?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "svol"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Failure::Input(anyhow!("no SVOL files to read")));
    }
    Ok(out)
}

struct Detected {
    source: String,
    volume_time: chrono::DateTime<chrono::Utc>,
    site: RadarSite,
    vcp: VcpDefinition,
    clusters: Vec<EchoCluster>,
}

/// Reads and detects volumes batch by batch, handing each result to `sink`
/// in input order.
fn detect_files(files: &[PathBuf], cfg: &RunConfig, mut sink: impl FnMut(Detected) -> CmdResult) -> CmdResult {
    for chunk in files.chunks(BATCH) {
        let volumes: Vec<VolumeScan> = chunk
            .iter()
            .map(|p| read_volume(p).with_context(|| format!("reading {}", p.display())).input())
            .collect::<CmdResult<_>>()?;
        let results = detect_batch(&volumes, &cfg.filter, Parallelism::default());
        for ((path, vol), res) in chunk.iter().zip(volumes).zip(results) {
            let clusters = match res {
                Ok(c) => c,
                Err(FilterError::EmptyVolume) => Vec::new(),
                Err(e) => return Err(Failure::Input(anyhow!("{}: {e}", path.display()))),
            };
            sink(Detected { source: stem(path), volume_time: vol.start_time, site: vol.site, vcp: vol.vcp, clusters })?;
        }
    }
    Ok(())
}

fn write_run_config(dir: &Path, prov: &Provenance) -> CmdResult {
    write_json(&dir.join("run_config.json"), &json!({"provenance": prov, "config": prov.config}))
}

pub fn simulate(scene: Option<&Path>, preset: Option<&str>, seed: Option<u64>, paths: &PathsConfig) -> CmdResult {
    let mut spec: SceneSpec = match (scene, preset) {
        (Some(p), _) => serde_json::from_value(read_json(p)?).with_context(|| format!("scene {}", p.display())).input()?,
        (None, Some(name)) => presets::by_name(name)
            .ok_or_else(|| anyhow!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
            .input()?,
        (None, None) => return Err(Failure::Input(anyhow!("need a scene file or --preset"))),
    };
    if let Some(s) = seed {
        spec.rng_seed = s;
    }
    let scene = Scene::new(&spec).context("invalid scene").input()?;
    let dir = out_dir(paths)?;
    let width = scene.len().saturating_sub(1).to_string().len().max(3);
    let mut truths = Vec::with_capacity(scene.len());
    let mut k = 0;
    while k < scene.len() {
        let end = (k + BATCH).min(scene.len());
        for (vol, truth) in scene.volumes_with(k..end, Parallelism::default()) {
            let path = dir.join(format!("vol_{:0width$}.svol", truth.volume_index));
            write_volume(&vol, &path).with_context(|| format!("writing {}", path.display())).internal()?;
            truths.push(truth);
        }
        k = end;
    }
    let resolved = scene.spec().clone();
    let prov = Provenance::new(json!({"scene": resolved.name, "rng_seed": resolved.rng_seed}));
    let truth = GroundTruth { scene: resolved.name.clone(), rng_seed: resolved.rng_seed, volumes: truths };
    write_json(&dir.join("scene.json"), &serde_json::to_value(&resolved).expect("spec serializes"))?;
    write_json(&dir.join("truth.json"), &json!({"provenance": prov, "truth": truth}))?;
    eprintln!("wrote {} volumes to {}", scene.len(), dir.display());
    Ok(())
}

pub fn detect(inputs: &[PathBuf], cfg: &RunConfig) -> CmdResult {
    let files = expand_inputs(inputs)?;
    let dir = out_dir(&cfg.paths)?;
    let prov = Provenance::new(cfg.echo());
    let mut total = 0;
    detect_files(&files, cfg, |d| {
        total += d.clusters.len();
        let rows: Vec<(String, EchoCluster)> = d.clusters.iter().map(|c| (d.source.clone(), c.clone())).collect();
        write_text(&dir.join(format!("{}.clusters.csv", d.source)), &export::clusters_csv(&rows, &prov).internal()?)?;
        write_json(&dir.join(format!("{}.clusters.geojson", d.source)), &export::clusters_geojson(&d.clusters, &prov))
    })?;
    write_run_config(&dir, &prov)?;
    eprintln!("{} volume(s), {total} cluster(s)", files.len());
    Ok(())
}

pub fn track(inputs: &[PathBuf], cfg: &RunConfig) -> CmdResult {
    let files = expand_inputs(inputs)?;
    let dir = out_dir(&cfg.paths)?;
    let prov = Provenance::new(cfg.echo());
    let mut scans: Vec<Detected> = Vec::with_capacity(files.len());
    detect_files(&files, cfg, |d| {
        if let Some(first) = scans.first() {
            if first.site.site_id != d.site.site_id {
                return Err(Failure::Input(anyhow!(
                    "{}: site {} differs from {}",
                    d.source,
                    d.site.site_id,
                    first.site.site_id
                )));
            }
        }
        scans.push(d);
        Ok(())
    })?;
    // embedded start time decides the order, never the file name
    scans.sort_by_key(|d| d.volume_time);
    let mut tracker = Tracker::new(cfg.tracker.clone()).input()?;
    for d in &scans {
        tracker.update(d.volume_time, &d.clusters).with_context(|| format!("volume {}", d.source)).input()?;
    }
    let mut tracks = tracker.into_tracks();
    tracks.sort_by_key(|t| t.track_id);
    let site = scans[0].site.clone();
    let vcp = scans[0].vcp.clone();

    let rows: Vec<(String, EchoCluster)> =
        scans.iter().flat_map(|d| d.clusters.iter().map(|c| (d.source.clone(), c.clone()))).collect();
    write_text(&dir.join("clusters.csv"), &export::clusters_csv(&rows, &prov).internal()?)?;
    let extra = [("site", json!(site)), ("vcp", json!(vcp))];
    write_json(&dir.join("tracks.geojson"), &export::tracks_geojson(&tracks, &prov, &extra))?;
    write_text(
        &dir.join("tracks.csv"),
        &export::tracks_csv(&tracks, cfg.tracker.min_track_observations, &prov).internal()?,
    )?;

    let mut alerts = Vec::new();
    for t in tracks.iter().filter(|t| t.status == TrackStatus::Active && t.is_confirmed(&cfg.tracker)) {
        if let Ok(LeadTime::Hours(h)) = lead_time_estimate(t, &site, cfg.alert.range_limit_km) {
            if h < cfg.alert.lead_time_threshold_h {
                let last = t.last();
                alerts.push(json!({
                    "track_id": t.track_id,
                    "lead_time_h": h,
                    "last_time": format_utc(&last.time),
                    "last_lat": last.latitude_deg,
                    "last_lon": last.longitude_deg,
                    "mean_speed_ms": t.mean_speed_ms,
                    "heading_deg": t.mean_heading_deg,
                }));
            }
        }
    }
    let n_alerts = alerts.len();
    write_json(
        &dir.join("alerts.json"),
        &json!({"provenance": prov, "site_id": site.site_id, "threshold_h": cfg.alert.lead_time_threshold_h, "alerts": alerts}),
    )?;
    write_run_config(&dir, &prov)?;
    eprintln!("{} volume(s), {} track(s), {n_alerts} alert(s)", scans.len(), tracks.len());
    Ok(())
}

pub fn crosscheck(tracks_path: &Path, rain: &[PathBuf], wind: &[PathBuf], site_path: Option<&Path>, cfg: &RunConfig) -> CmdResult {
    let fc = read_json(tracks_path)?;
    let tracks = export::tracks_from_geojson(&fc).with_context(|| format!("reading {}", tracks_path.display())).input()?;
    let site: RadarSite = match site_path {
        Some(p) => serde_json::from_value(read_json(p)?).with_context(|| format!("site {}", p.display())).input()?,
        None => serde_json::from_value(fc["site"].clone())
            .map_err(|_| anyhow!("{} carries no site; pass --site", tracks_path.display()))
            .input()?,
    };
    let mut records = Vec::new();
    for p in rain {
        records.extend(read_rain_records(p).with_context(|| format!("reading {}", p.display())).input()?);
    }
    let fields = wind
        .iter()
        .map(|p| read_wind_field(p).with_context(|| format!("reading {}", p.display())).input())
        .collect::<CmdResult<Vec<_>>>()?;
    let reports = tracks
        .iter()
        .map(|t| crosscheck_track(t, &records, &fields, &site, &cfg.crosscheck).input())
        .collect::<CmdResult<Vec<_>>>()?;
    let dir = match &cfg.paths.out_dir {
        Some(_) => out_dir(&cfg.paths)?,
        None => tracks_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")),
    };
    let prov = Provenance::new(cfg.echo());
    write_json(&dir.join("crosscheck.json"), &json!({"provenance": prov, "reports": reports}))?;
    eprintln!("{} track(s) cross-checked", reports.len());
    Ok(())
}

/// Parses a provenance-prefixed CSV into JSON objects, numbers as numbers.
fn csv_rows(path: &Path) -> CmdResult<Vec<Value>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))
        .input()?;
    let header = rdr.headers().with_context(|| format!("reading {}", path.display())).input()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display())).input()?;
        let obj: serde_json::Map<String, Value> = header
            .iter()
            .zip(rec.iter())
            .map(|(k, v)| {
                let val = if v.is_empty() {
                    Value::Null
                } else if let Ok(i) = v.parse::<i64>() {
                    json!(i)
                } else if let Ok(f) = v.parse::<f64>() {
                    json!(f)
                } else {
                    json!(v)
                };
                (k.to_string(), val)
            })
            .collect();
        rows.push(Value::Object(obj));
    }
    Ok(rows)
}

pub const REPORT_SCHEMA: &str = "locust-radar-report/1";

pub fn report(run_dir: &Path, out: Option<&Path>) -> CmdResult {
    if !run_dir.is_dir() {
        return Err(Failure::Input(anyhow!("{} is not a directory", run_dir.display())));
    }
    let has = |name: &str| run_dir.join(name).is_file();
    let mut per_volume: Vec<PathBuf> = fs::read_dir(run_dir)
        .with_context(|| format!("listing {}", run_dir.display()))
        .input()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".clusters.csv")))
        .collect();
    per_volume.sort();
    let known = ["run_config.json", "clusters.csv", "tracks.geojson", "crosscheck.json", "alerts.json"];
    let mut consumed: Vec<String> = known.iter().filter(|n| has(n)).map(|n| n.to_string()).collect();
    if consumed.is_empty() && per_volume.is_empty() {
        return Err(Failure::Input(anyhow!("no artifacts found in {}", run_dir.display())));
    }

    let config = if has("run_config.json") { read_json(&run_dir.join("run_config.json"))?["config"].clone() } else { Value::Null };
    let clusters = if has("clusters.csv") {
        csv_rows(&run_dir.join("clusters.csv"))?
    } else {
        let mut all = Vec::new();
        for p in &per_volume {
            all.extend(csv_rows(p)?);
            consumed.push(p.file_name().expect("listed file").to_string_lossy().into_owned());
        }
        all
    };
    let (tracks, site, vcp) = if has("tracks.geojson") {
        let fc = read_json(&run_dir.join("tracks.geojson"))?;
        let tracks: Vec<Value> = fc["features"]
            .as_array()
            .ok_or_else(|| anyhow!("tracks.geojson has no features"))
            .input()?
            .iter()
            .map(|f| f["properties"].clone())
            .collect();
        (tracks, fc["site"].clone(), fc["vcp"].clone())
    } else {
        (Vec::new(), Value::Null, Value::Null)
    };
    let crosschecks = if has("crosscheck.json") { read_json(&run_dir.join("crosscheck.json"))?["reports"].clone() } else { json!([]) };
    let alerts = if has("alerts.json") { read_json(&run_dir.join("alerts.json"))?["alerts"].clone() } else { json!([]) };

    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| run_dir.to_path_buf());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).internal()?;
    let prov = Provenance::new(config.clone());
    let curves = match (serde_json::from_value::<RadarSite>(site.clone()), serde_json::from_value::<VcpDefinition>(vcp.clone())) {
        (Ok(s), Ok(v)) => {
            write_text(&dir.join("vcp_curves.csv"), &export::vcp_curves_csv(&vcp_curves(&s, &v), &prov).internal()?)?;
            json!("vcp_curves.csv")
        }
        _ => Value::Null,
    };
    let mut counts = BTreeMap::new();
    counts.insert("clusters", clusters.len());
    counts.insert("tracks", tracks.len());
    counts.insert("crosschecks", crosschecks.as_array().map_or(0, Vec::len));
    counts.insert("alerts", alerts.as_array().map_or(0, Vec::len));
    let bundle = json!({
        "schema": REPORT_SCHEMA,
        "provenance": prov,
        "config": config,
        "site": site,
        "vcp": vcp,
        "artifacts": consumed,
        "counts": counts,
        "clusters": clusters,
        "tracks": tracks,
        "crosschecks": crosschecks,
        "alerts": alerts,
        "vcp_curves_csv": curves,
    });
    write_json(&dir.join("report.json"), &bundle)?;
    eprintln!("report written to {}", dir.join("report.json").display());
    Ok(())
}
