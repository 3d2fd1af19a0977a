//! Multi-volume association of echo clusters into swarm tracks, track
//! kinematics and constant-velocity lead-time estimates.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::EchoCluster;
use crate::geodesy::{haversine_km, initial_bearing_deg};
use crate::geometry::RadarSite;
use crate::time::seconds_between;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("volume time {got} predates or equals tracker clock {clock}")]
    NonMonotonicTime { clock: DateTime<Utc>, got: DateTime<Utc> },
    #[error("track {track_id} has {have} observation(s), need at least {need}")]
    InsufficientObservations { track_id: u64, have: usize, need: usize },
    #[error("association interval must be positive, got {0} s")]
    NonPositiveInterval(f64),
    #[error("invalid tracker config: {0}")]
    InvalidConfig(String),
    #[error("track centroid is {distance_km:.1} km from the site, beyond the {range_limit_km} km limit")]
    BeyondRangeLimit { distance_km: f64, range_limit_km: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub max_association_speed_ms: f64,
    pub max_missed_scans: u32,
    pub min_track_observations: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig { max_association_speed_ms: 10.0, max_missed_scans: 2, min_track_observations: 3 }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if !(self.max_association_speed_ms > 0.0) {
            return Err(TrackError::InvalidConfig("max_association_speed_ms must be positive".into()));
        }
        if self.max_missed_scans == 0 {
            return Err(TrackError::InvalidConfig("max_missed_scans must be positive".into()));
        }
        if self.min_track_observations == 0 {
            return Err(TrackError::InvalidConfig("min_track_observations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrackStatus {
    Active,
    Ended,
}

/// One cluster as seen by a track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(with = "crate::time::serde_utc")]
    pub time: DateTime<Utc>,
    pub cluster_id: usize,
    pub gate_count: usize,
    pub mean_reflectivity_dbz: f64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub height_km: f64,
}

impl From<&EchoCluster> for Observation {
    fn from(c: &EchoCluster) -> Self {
        Observation {
            time: c.time,
            cluster_id: c.cluster_id,
            gate_count: c.gate_count,
            mean_reflectivity_dbz: c.mean_reflectivity_dbz,
            latitude_deg: c.centroid_lat_deg,
            longitude_deg: c.centroid_lon_deg,
            height_km: c.centroid_height_km,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub path_length_km: f64,
    pub net_displacement_km: f64,
    pub duration_s: f64,
    pub mean_speed_ms: f64,
    pub net_speed_ms: f64,
    pub mean_heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmTrack {
    pub track_id: u64,
    pub observations: Vec<Observation>,
    pub path_length_km: f64,
    pub net_displacement_km: f64,
    pub duration_s: f64,
    pub mean_speed_ms: f64,
    pub net_speed_ms: f64,
    /// None until the track has two observations.
    pub mean_heading_deg: Option<f64>,
    pub status: TrackStatus,
    pub missed_scans: u32,
}

impl SwarmTrack {
    pub fn new(track_id: u64, first: Observation) -> Self {
        SwarmTrack {
            track_id,
            observations: vec![first],
            path_length_km: 0.0,
            net_displacement_km: 0.0,
            duration_s: 0.0,
            mean_speed_ms: 0.0,
            net_speed_ms: 0.0,
            mean_heading_deg: None,
            status: TrackStatus::Active,
            missed_scans: 0,
        }
    }

    /// Builds a track from stored observations and recomputes kinematics.
    pub fn from_observations(track_id: u64, observations: Vec<Observation>, status: TrackStatus) -> Self {
        let mut t = SwarmTrack::new(track_id, observations[0].clone());
        t.observations = observations;
        t.status = status;
        t.refresh();
        t
    }

    pub fn first(&self) -> &Observation {
        &self.observations[0]
    }

    pub fn last(&self) -> &Observation {
        self.observations.last().expect("tracks are never empty")
    }

    pub fn push(&mut self, obs: Observation) {
        debug_assert!(obs.time > self.last().time);
        self.observations.push(obs);
        self.missed_scans = 0;
        self.refresh();
    }

    /// Shorter tracks are candidates, not confirmed swarms.
    pub fn is_confirmed(&self, cfg: &TrackerConfig) -> bool {
        self.observations.len() >= cfg.min_track_observations
    }

    fn refresh(&mut self) {
        if let Ok(k) = track_kinematics(self) {
            self.path_length_km = k.path_length_km;
            self.net_displacement_km = k.net_displacement_km;
            self.duration_s = k.duration_s;
            self.mean_speed_ms = k.mean_speed_ms;
            self.net_speed_ms = k.net_speed_ms;
            self.mean_heading_deg = Some(k.mean_heading_deg);
        }
    }
}

fn obs_distance_km(a: &Observation, b: &Observation) -> f64 {
    haversine_km(a.latitude_deg, a.longitude_deg, b.latitude_deg, b.longitude_deg)
}

/// Path length, displacement, duration, speeds and first-to-last heading.
pub fn track_kinematics(track: &SwarmTrack) -> Result<Kinematics, TrackError> {
    let obs = &track.observations;
    if obs.len() < 2 {
        return Err(TrackError::InsufficientObservations { track_id: track.track_id, have: obs.len(), need: 2 });
    }
    let path_length_km: f64 = obs.windows(2).map(|w| obs_distance_km(&w[0], &w[1])).sum();
    let (first, last) = (&obs[0], &obs[obs.len() - 1]);
    let net_displacement_km = obs_distance_km(first, last);
    let duration_s = seconds_between(&first.time, &last.time);
    Ok(Kinematics {
        path_length_km,
        net_displacement_km,
        duration_s,
        mean_speed_ms: 1000.0 * path_length_km / duration_s,
        net_speed_ms: 1000.0 * net_displacement_km / duration_s,
        mean_heading_deg: initial_bearing_deg(first.latitude_deg, first.longitude_deg, last.latitude_deg, last.longitude_deg),
    })
}

/// Greedy nearest-neighbour matching of clusters to tracks.
///
/// Returns `(track index, cluster index)` pairs. A pair is eligible when the
/// centroid distance is within `max_association_speed_ms * dt_s`, widened by
/// one interval per scan the track has already missed.
pub fn match_clusters(
    tracks: &[SwarmTrack],
    clusters: &[EchoCluster],
    dt_s: f64,
    cfg: &TrackerConfig,
) -> Result<Vec<(usize, usize)>, TrackError> {
    if !(dt_s > 0.0) {
        return Err(TrackError::NonPositiveInterval(dt_s));
    }
    let mut cand = Vec::new();
    for (ti, t) in tracks.iter().enumerate() {
        let gate_km = cfg.max_association_speed_ms * dt_s * f64::from(t.missed_scans + 1) / 1000.0;
        let last = t.last();
        for (ci, c) in clusters.iter().enumerate() {
            let d = haversine_km(last.latitude_deg, last.longitude_deg, c.centroid_lat_deg, c.centroid_lon_deg);
            if d <= gate_km {
                cand.push((d, ti, ci));
            }
        }
    }
    cand.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(tracks[a.1].track_id.cmp(&tracks[b.1].track_id))
            .then(clusters[b.2].gate_count.cmp(&clusters[a.2].gate_count))
            .then(a.2.cmp(&b.2))
    });
    let mut track_used = vec![false; tracks.len()];
    let mut cluster_used = vec![false; clusters.len()];
    let mut pairs = Vec::new();
    for (_, ti, ci) in cand {
        if !track_used[ti] && !cluster_used[ci] {
            track_used[ti] = true;
            cluster_used[ci] = true;
            pairs.push((ti, ci));
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Association {
    /// Still-active tracks, matched or coasting.
    pub updated: Vec<SwarmTrack>,
    pub new: Vec<SwarmTrack>,
    pub ended: Vec<SwarmTrack>,
}

/// One association step: matches, extends and ends tracks, seeding new tracks
/// from unmatched clusters with ids starting at `*next_id`.
pub fn associate(
    tracks_active: Vec<SwarmTrack>,
    clusters: &[EchoCluster],
    dt_s: f64,
    cfg: &TrackerConfig,
    next_id: &mut u64,
) -> Result<Association, TrackError> {
    let pairs = match_clusters(&tracks_active, clusters, dt_s, cfg)?;
    let mut track_match = vec![None; tracks_active.len()];
    let mut cluster_used = vec![false; clusters.len()];
    for &(ti, ci) in &pairs {
        track_match[ti] = Some(ci);
        cluster_used[ci] = true;
    }
    let mut out = Association::default();
    for (t, m) in tracks_active.into_iter().zip(track_match) {
        let mut t = t;
        match m {
            Some(ci) => {
                t.push(Observation::from(&clusters[ci]));
                out.updated.push(t);
            }
            None => {
                t.missed_scans += 1;
                if t.missed_scans > cfg.max_missed_scans {
                    t.status = TrackStatus::Ended;
                    out.ended.push(t);
                } else {
                    out.updated.push(t);
                }
            }
        }
    }
    for (ci, c) in clusters.iter().enumerate() {
        if !cluster_used[ci] {
            out.new.push(SwarmTrack::new(*next_id, Observation::from(c)));
            *next_id += 1;
        }
    }
    Ok(out)
}

/// Single-writer tracking state machine; feed volumes in time order.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    clock: Option<DateTime<Utc>>,
    active: Vec<SwarmTrack>,
    ended: Vec<SwarmTrack>,
    next_id: u64,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, TrackError> {
        cfg.validate()?;
        Ok(Tracker { cfg, clock: None, active: Vec::new(), ended: Vec::new(), next_id: 1 })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn clock(&self) -> Option<DateTime<Utc>> {
        self.clock
    }

    pub fn active(&self) -> &[SwarmTrack] {
        &self.active
    }

    pub fn ended(&self) -> &[SwarmTrack] {
        &self.ended
    }

    /// Ingests the clusters of the volume observed at `time`.
    pub fn update(&mut self, time: DateTime<Utc>, clusters: &[EchoCluster]) -> Result<(), TrackError> {
        let dt_s = match self.clock {
            Some(clock) if time <= clock => return Err(TrackError::NonMonotonicTime { clock, got: time }),
            Some(clock) => seconds_between(&clock, &time),
            None => 1.0,
        };
        let active = std::mem::take(&mut self.active);
        let step = associate(active, clusters, dt_s, &self.cfg, &mut self.next_id)?;
        self.active = step.updated;
        self.active.extend(step.new);
        self.ended.extend(step.ended);
        self.clock = Some(time);
        for t in &self.active {
            debug_assert!(t.net_displacement_km <= t.path_length_km + 1e-9);
        }
        Ok(())
    }

    /// All tracks, ended and active, ordered by id.
    pub fn tracks(&self) -> Vec<SwarmTrack> {
        let mut all: Vec<SwarmTrack> = self.ended.iter().chain(&self.active).cloned().collect();
        all.sort_by_key(|t| t.track_id);
        all
    }

    pub fn into_tracks(self) -> Vec<SwarmTrack> {
        let mut all = self.ended;
        all.extend(self.active);
        all.sort_by_key(|t| t.track_id);
        all
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "hours", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LeadTime {
    Hours(f64),
    NotApproaching,
}

/// Time until the track reaches the site at its observed closing speed.
///
/// Closing speed is the drop in centroid-to-site distance from the first to
/// the last observation over the track duration. A track whose distance did
/// not decrease overall, or over its final step, is not approaching.
pub fn lead_time_estimate(track: &SwarmTrack, site: &RadarSite, range_limit_km: f64) -> Result<LeadTime, TrackError> {
    let obs = &track.observations;
    if obs.len() < 2 {
        return Err(TrackError::InsufficientObservations { track_id: track.track_id, have: obs.len(), need: 2 });
    }
    let dist = |o: &Observation| haversine_km(site.latitude_deg, site.longitude_deg, o.latitude_deg, o.longitude_deg);
    let (d_first, d_prev, d_last) = (dist(&obs[0]), dist(&obs[obs.len() - 2]), dist(&obs[obs.len() - 1]));
    if d_last > range_limit_km {
        return Err(TrackError::BeyondRangeLimit { distance_km: d_last, range_limit_km });
    }
    if d_last >= d_first || d_last >= d_prev {
        return Ok(LeadTime::NotApproaching);
    }
    let hours = seconds_between(&obs[0].time, &obs[obs.len() - 1].time) / 3600.0;
    let closing_kmh = (d_first - d_last) / hours;
    Ok(LeadTime::Hours(d_last / closing_kmh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::destination_point;
    use crate::time::parse_utc;
    use chrono::Duration;

    fn t0() -> DateTime<Utc> {
        parse_utc("2020-07-12T02:32:10Z").unwrap()
    }

    fn cluster(lat: f64, lon: f64, gates: usize, time: DateTime<Utc>) -> EchoCluster {
        EchoCluster {
            cluster_id: 0,
            time,
            elevation_deg: 0.2,
            gates: vec![],
            gate_count: gates,
            mean_reflectivity_dbz: 27.0,
            linear_mean_reflectivity_dbz: 27.0,
            mean_radial_velocity_ms: 0.0,
            centroid_lat_deg: lat,
            centroid_lon_deg: lon,
            centroid_height_km: 1.0,
        }
    }

    fn obs(lat: f64, lon: f64, time: DateTime<Utc>) -> Observation {
        Observation::from(&cluster(lat, lon, 10, time))
    }

    #[test]
    fn within_and_outside_gate() {
        let cfg = TrackerConfig::default();
        let (lat, lon) = (26.0, 80.0);
        let t = SwarmTrack::new(1, obs(lat, lon, t0()));
        let (a, b) = destination_point(lat, lon, 45.0, 2.0);
        let near = cluster(a, b, 10, t0() + Duration::seconds(600));
        assert_eq!(match_clusters(std::slice::from_ref(&t), &[near], 600.0, &cfg).unwrap(), vec![(0, 0)]);

        let (a, b) = destination_point(lat, lon, 45.0, 7.0);
        let far = cluster(a, b, 10, t0() + Duration::seconds(600));
        let mut next = 2;
        let step = associate(vec![t], &[far], 600.0, &cfg, &mut next).unwrap();
        assert_eq!(step.new.len(), 1);
        assert_eq!(step.new[0].track_id, 2);
        assert_eq!(step.updated[0].missed_scans, 1);
    }

    #[test]
    fn ties_prefer_older_track_then_larger_cluster() {
        let cfg = TrackerConfig::default();
        let (lat, lon) = (26.0, 80.0);
        let a = SwarmTrack::new(7, obs(lat, lon, t0()));
        let b = SwarmTrack::new(3, obs(lat, lon, t0()));
        let t1 = t0() + Duration::seconds(600);
        let (p, q) = destination_point(lat, lon, 0.0, 1.0);
        let small = cluster(p, q, 5, t1);
        let large = cluster(p, q, 50, t1);
        let pairs = match_clusters(&[a, b], &[small, large], 600.0, &cfg).unwrap();
        // track 3 (index 1) is older and takes the larger cluster
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    /// Minimum total distance over all one-to-one assignments of the eligible
    /// pairs, maximizing the number of matches first.
    fn exhaustive(d: &[Vec<Option<f64>>]) -> (usize, f64) {
        fn go(d: &[Vec<Option<f64>>], i: usize, used: &mut Vec<bool>) -> (usize, f64) {
            if i == d.len() {
                return (0, 0.0);
            }
            let mut best = go(d, i + 1, used);
            for j in 0..used.len() {
                if let (false, Some(x)) = (used[j], d[i][j]) {
                    used[j] = true;
                    let (n, s) = go(d, i + 1, used);
                    used[j] = false;
                    let cand = (n + 1, s + x);
                    if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                        best = cand;
                    }
                }
            }
            best
        }
        let cols = d.first().map_or(0, |r| r.len());
        go(d, 0, &mut vec![false; cols])
    }

    #[test]
    fn greedy_against_exhaustive_assignment() {
        use rand::{Rng, SeedableRng};
        let cfg = TrackerConfig::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (mut cases, mut diverged) = (0, 0);
        for _ in 0..400 {
            let nt = rng.random_range(1..=4);
            let nc = rng.random_range(1..=4);
            let tracks: Vec<SwarmTrack> = (0..nt)
                .map(|i| {
                    let (a, b) = destination_point(26.0, 80.0, rng.random_range(0.0..360.0), rng.random_range(0.0..8.0));
                    SwarmTrack::new(i as u64 + 1, obs(a, b, t0()))
                })
                .collect();
            let clusters: Vec<EchoCluster> = (0..nc)
                .map(|_| {
                    let (a, b) = destination_point(26.0, 80.0, rng.random_range(0.0..360.0), rng.random_range(0.0..8.0));
                    cluster(a, b, rng.random_range(5..100), t0() + Duration::seconds(600))
                })
                .collect();
            let dist: Vec<Vec<Option<f64>>> = tracks
                .iter()
                .map(|t| {
                    clusters
                        .iter()
                        .map(|c| {
                            let d = haversine_km(t.last().latitude_deg, t.last().longitude_deg, c.centroid_lat_deg, c.centroid_lon_deg);
                            (d <= 6.0).then_some(d)
                        })
                        .collect()
                })
                .collect();
            let pairs = match_clusters(&tracks, &clusters, 600.0, &cfg).unwrap();
            let greedy: f64 = pairs.iter().map(|&(i, j)| dist[i][j].unwrap()).sum();
            let (n_opt, s_opt) = exhaustive(&dist);
            cases += 1;
            // greedy never beats the optimum
            assert!(pairs.len() < n_opt || greedy >= s_opt - 1e-9);
            if pairs.len() != n_opt || (greedy - s_opt).abs() > 1e-9 {
                diverged += 1;
            }
        }
        // Greedy is not optimal in general; with at most four objects in an
        // 8 km disk it still agrees on most random cases.
        assert!(diverged * 4 < cases, "{diverged}/{cases} divergent");
    }

    #[test]
    fn crossing_pair_matches_optimal() {
        let cfg = TrackerConfig::default();
        let t1 = t0() + Duration::seconds(600);
        let a = SwarmTrack::new(1, obs(26.0, 80.00, t0()));
        let b = SwarmTrack::new(2, obs(26.0, 80.03, t0()));
        // each cluster is nearer its own track than the other
        let c0 = cluster(26.005, 80.032, 10, t1);
        let c1 = cluster(26.005, 80.002, 10, t1);
        assert_eq!(match_clusters(&[a, b], &[c0, c1], 600.0, &cfg).unwrap(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn tracker_ends_after_missed_scans() {
        let mut tr = Tracker::new(TrackerConfig::default()).unwrap();
        let c = cluster(26.0, 80.0, 10, t0());
        tr.update(t0(), &[c]).unwrap();
        for k in 1..=3 {
            tr.update(t0() + Duration::seconds(600 * k), &[]).unwrap();
        }
        assert_eq!(tr.active().len(), 0);
        assert_eq!(tr.ended().len(), 1);
        assert_eq!(tr.ended()[0].status, TrackStatus::Ended);
        let err = tr.update(t0(), &[]).unwrap_err();
        assert!(matches!(err, TrackError::NonMonotonicTime { .. }));
    }

    #[test]
    fn coasting_track_reacquires_with_wider_gate() {
        let mut tr = Tracker::new(TrackerConfig::default()).unwrap();
        tr.update(t0(), &[cluster(26.0, 80.0, 10, t0())]).unwrap();
        tr.update(t0() + Duration::seconds(600), &[]).unwrap();
        // 9 km after two intervals is within 10 m/s * 1200 s
        let (a, b) = destination_point(26.0, 80.0, 90.0, 9.0);
        let t2 = t0() + Duration::seconds(1200);
        tr.update(t2, &[cluster(a, b, 10, t2)]).unwrap();
        let tracks = tr.tracks();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].observations.len(), 2);
        assert_eq!(tracks[0].missed_scans, 0);
    }

    #[test]
    fn straight_east_kinematics() {
        // 3.47 m/s due east, 600 s steps, final step to 11:32:09
        let start = t0();
        let end = parse_utc("2020-07-12T11:32:09Z").unwrap();
        let total = seconds_between(&start, &end);
        assert_eq!(total, 32_399.0);
        let mut times: Vec<f64> = (0..54).map(|k| 600.0 * k as f64).filter(|&s| s < total).collect();
        times.push(total);
        let mut observations = Vec::new();
        for s in &times {
            // along a great circle from a point on the equator heading east
            let (lat, lon) = destination_point(0.0, 80.0, 90.0, 3.47 * s / 1000.0);
            observations.push(obs(lat, lon, start + Duration::milliseconds((s * 1000.0) as i64)));
        }
        let track = SwarmTrack::from_observations(1, observations, TrackStatus::Active);
        let k = track_kinematics(&track).unwrap();
        let oracle = 3.47 * 32_399.0 / 1000.0;
        assert!((k.net_displacement_km - oracle).abs() < 1e-6, "{}", k.net_displacement_km);
        assert!((k.path_length_km - oracle).abs() < 1e-6);
        assert!((k.mean_speed_ms - 3.47).abs() < 1e-9);
        assert_eq!(k.mean_speed_ms, 1000.0 * k.path_length_km / k.duration_s);
        assert!((k.mean_heading_deg - 90.0).abs() < 1e-9);
    }

    #[test]
    fn stationary_and_collinear() {
        let t1 = t0() + Duration::seconds(600);
        let still = SwarmTrack::from_observations(1, vec![obs(26.0, 80.0, t0()), obs(26.0, 80.0, t1)], TrackStatus::Active);
        let k = track_kinematics(&still).unwrap();
        assert_eq!((k.net_displacement_km, k.mean_speed_ms), (0.0, 0.0));

        let pts: Vec<Observation> = (0..3)
            .map(|i| {
                let (a, b) = destination_point(26.0, 80.0, 0.0, 2.0 * i as f64);
                obs(a, b, t0() + Duration::seconds(600 * i))
            })
            .collect();
        let k = track_kinematics(&SwarmTrack::from_observations(1, pts, TrackStatus::Active)).unwrap();
        assert!((k.path_length_km - k.net_displacement_km).abs() < 1e-9);

        let single = SwarmTrack::new(4, obs(26.0, 80.0, t0()));
        assert!(matches!(track_kinematics(&single), Err(TrackError::InsufficientObservations { .. })));
    }

    fn approaching(site: &RadarSite, start_km: f64, speed_ms: f64, steps: i64) -> SwarmTrack {
        let pts = (0..=steps)
            .map(|i| {
                let d = start_km - speed_ms * 600.0 * i as f64 / 1000.0;
                let (a, b) = destination_point(site.latitude_deg, site.longitude_deg, 300.0, d);
                obs(a, b, t0() + Duration::seconds(600 * i))
            })
            .collect();
        SwarmTrack::from_observations(1, pts, TrackStatus::Active)
    }

    #[test]
    fn lead_times() {
        let site = RadarSite::lucknow();
        let speed = 14.3 / 3.6;
        let steps = 6;
        let track = approaching(&site, 100.0 + speed * 3.6, speed, steps);
        match lead_time_estimate(&track, &site, 250.0).unwrap() {
            LeadTime::Hours(h) => assert!((h - 100.0 / 14.3).abs() < 1e-6, "{h}"),
            other => panic!("{other:?}"),
        }
        let track = approaching(&site, 50.0 + 5.0 * 3.6, 5.0, steps);
        match lead_time_estimate(&track, &site, 250.0).unwrap() {
            LeadTime::Hours(h) => assert!((h - 50.0 / 18.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        let receding = approaching(&site, 20.0, -3.0, 4);
        assert_eq!(lead_time_estimate(&receding, &site, 250.0).unwrap(), LeadTime::NotApproaching);
        assert!(matches!(lead_time_estimate(&track, &site, 10.0), Err(TrackError::BeyondRangeLimit { .. })));
    }
}
