//! Corroboration of tracks against rain-gauge records and gridded winds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{angular_difference_deg, haversine_km};
use crate::geometry::RadarSite;
use crate::io::wind::direction_of_travel_deg;
use crate::io::{RainRecord, WindField};
use crate::time::seconds_between;
use crate::tracker::{Observation, SwarmTrack};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossCheckError {
    #[error("track {track_id} has {have} observation(s), need at least {need}")]
    InsufficientObservations { track_id: u64, have: usize, need: usize },
    #[error("invalid crosscheck config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossCheckConfig {
    pub rain_radius_km: f64,
    /// Alignment at or below this is downwind.
    pub downwind_max_deg: f64,
    /// Alignment at or above this is upwind.
    pub upwind_min_deg: f64,
}

impl Default for CrossCheckConfig {
    fn default() -> Self {
        CrossCheckConfig { rain_radius_km: 150.0, downwind_max_deg: 45.0, upwind_min_deg: 135.0 }
    }
}

impl CrossCheckConfig {
    pub fn validate(&self) -> Result<(), CrossCheckError> {
        if !(self.rain_radius_km > 0.0) {
            return Err(CrossCheckError::InvalidConfig("rain_radius_km must be positive".into()));
        }
        if !(0.0 <= self.downwind_max_deg && self.downwind_max_deg < self.upwind_min_deg && self.upwind_min_deg <= 180.0) {
            return Err(CrossCheckError::InvalidConfig(
                "need 0 <= downwind_max_deg < upwind_min_deg <= 180".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RainVerdict {
    NoRainConfirmed,
    RainPresentAmbiguous,
    NoStations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindVerdict {
    Downwind,
    Crosswind,
    Upwind,
    NoWindData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationCheck {
    pub station_id: String,
    pub distance_km: f64,
    pub rainfall_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RainCheck {
    pub verdict: RainVerdict,
    pub stations_checked: Vec<StationCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindCheck {
    pub verdict: WindVerdict,
    pub wind_alignment_deg: Option<f64>,
    pub wind_bearing_deg: Option<f64>,
    pub track_heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub track_id: u64,
    pub rain_verdict: RainVerdict,
    pub stations_checked: Vec<StationCheck>,
    pub wind_alignment_deg: Option<f64>,
    pub wind_bearing_deg: Option<f64>,
    pub track_heading_deg: Option<f64>,
    pub wind_verdict: WindVerdict,
}

/// Selects records from stations within `radius_km` of the site whose window
/// overlaps the track's first-to-last observation window.
pub fn rain_crosscheck(track: &SwarmTrack, records: &[RainRecord], site: &RadarSite, radius_km: f64) -> RainCheck {
    let (first, last) = (track.first().time, track.last().time);
    let stations_checked: Vec<StationCheck> = records
        .iter()
        .filter(|r| r.window_start <= last && r.window_end >= first)
        .filter_map(|r| {
            let d = haversine_km(site.latitude_deg, site.longitude_deg, r.latitude_deg, r.longitude_deg);
            (d <= radius_km).then(|| StationCheck { station_id: r.station_id.clone(), distance_km: d, rainfall_mm: r.rainfall_mm })
        })
        .collect();
    let verdict = if stations_checked.is_empty() {
        RainVerdict::NoStations
    } else if stations_checked.iter().any(|s| s.rainfall_mm > 0.0) {
        RainVerdict::RainPresentAmbiguous
    } else {
        RainVerdict::NoRainConfirmed
    };
    RainCheck { verdict, stations_checked }
}

/// Smallest absolute angle between two bearings, in [0, 180].
pub fn alignment_deg(a: f64, b: f64) -> f64 {
    angular_difference_deg(a, b)
}

pub fn classify_alignment(alignment: f64, cfg: &CrossCheckConfig) -> WindVerdict {
    // Absorbs rounding in the bearing arithmetic so exact boundaries stay inclusive.
    const EPS: f64 = 1e-9;
    if alignment <= cfg.downwind_max_deg + EPS {
        WindVerdict::Downwind
    } else if alignment >= cfg.upwind_min_deg - EPS {
        WindVerdict::Upwind
    } else {
        WindVerdict::Crosswind
    }
}

fn nearest_field<'a>(fields: &'a [WindField], obs: &Observation) -> Option<&'a WindField> {
    fields
        .iter()
        .min_by(|a, b| {
            seconds_between(&a.valid_time, &obs.time)
                .abs()
                .total_cmp(&seconds_between(&b.valid_time, &obs.time).abs())
        })
}

/// Compares the track heading with the mean wind direction-of-travel sampled
/// along the track at each observation's time-nearest field.
pub fn wind_alignment(track: &SwarmTrack, fields: &[WindField], cfg: &CrossCheckConfig) -> Result<WindCheck, CrossCheckError> {
    let heading = track.mean_heading_deg.ok_or(CrossCheckError::InsufficientObservations {
        track_id: track.track_id,
        have: track.observations.len(),
        need: 2,
    })?;
    let no_data = WindCheck { verdict: WindVerdict::NoWindData, wind_alignment_deg: None, wind_bearing_deg: None, track_heading_deg: heading };
    let (mut su, mut sv) = (0.0, 0.0);
    for o in &track.observations {
        let Some((u, v)) = nearest_field(fields, o).and_then(|f| f.sample(o.latitude_deg, o.longitude_deg)) else {
            return Ok(no_data);
        };
        su += u;
        sv += v;
    }
    if su == 0.0 && sv == 0.0 {
        return Ok(no_data);
    }
    let bearing = direction_of_travel_deg(su, sv);
    let alignment = alignment_deg(heading, bearing);
    Ok(WindCheck {
        verdict: classify_alignment(alignment, cfg),
        wind_alignment_deg: Some(alignment),
        wind_bearing_deg: Some(bearing),
        track_heading_deg: heading,
    })
}

/// Rain and wind checks for one track. Wind is skipped for single-observation
/// tracks, which have no heading.
pub fn crosscheck_track(
    track: &SwarmTrack,
    records: &[RainRecord],
    fields: &[WindField],
    site: &RadarSite,
    cfg: &CrossCheckConfig,
) -> Result<CrossCheckReport, CrossCheckError> {
    cfg.validate()?;
    let rain = rain_crosscheck(track, records, site, cfg.rain_radius_km);
    let wind = match track.mean_heading_deg {
        Some(_) => Some(wind_alignment(track, fields, cfg)?),
        None => None,
    };
    Ok(CrossCheckReport {
        track_id: track.track_id,
        rain_verdict: rain.verdict,
        stations_checked: rain.stations_checked,
        wind_alignment_deg: wind.as_ref().and_then(|w| w.wind_alignment_deg),
        wind_bearing_deg: wind.as_ref().and_then(|w| w.wind_bearing_deg),
        track_heading_deg: track.mean_heading_deg,
        wind_verdict: wind.map_or(WindVerdict::NoWindData, |w| w.verdict),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::destination_point;
    use crate::time::parse_utc;
    use crate::tracker::TrackStatus;
    use chrono::{DateTime, Duration, Utc};
    use proptest::prelude::*;

    fn t(s: &str) -> DateTime<Utc> {
        parse_utc(s).unwrap()
    }

    fn track_heading(heading: f64) -> SwarmTrack {
        let site = RadarSite::lucknow();
        let obs = (0..4)
            .map(|i| {
                let (lat, lon) = destination_point(site.latitude_deg, site.longitude_deg, heading, 2.0 * i as f64);
                Observation {
                    time: t("2020-07-12T02:32:10Z") + Duration::seconds(600 * i),
                    cluster_id: 0,
                    gate_count: 100,
                    mean_reflectivity_dbz: 27.0,
                    latitude_deg: lat,
                    longitude_deg: lon,
                    height_km: 1.0,
                }
            })
            .collect();
        SwarmTrack::from_observations(1, obs, TrackStatus::Active)
    }

    fn station(id: &str, lat: f64, lon: f64, mm: f64) -> RainRecord {
        RainRecord {
            station_id: id.into(),
            latitude_deg: lat,
            longitude_deg: lon,
            window_start: t("2020-07-12T00:00Z"),
            window_end: t("2020-07-12T12:00Z"),
            rainfall_mm: mm,
        }
    }

    fn six_dry() -> Vec<RainRecord> {
        vec![
            station("Auraiya", 26.47, 79.51, 0.0),
            station("Kanpur", 26.45, 80.33, 0.0),
            station("Lucknow", 26.85, 80.95, 0.0),
            station("Fursatganj", 26.25, 81.38, 0.0),
            station("Sultanpur", 26.26, 82.07, 0.0),
            station("Unnao AMFU", 26.55, 80.49, 0.0),
        ]
    }

    fn wind(u: f64, v: f64) -> WindField {
        WindField::uniform(25.0, 79.0, 0.25, 17, 17, u, v, 850.0, t("2020-07-12T06:00Z"))
    }

    #[test]
    fn rain_verdicts() {
        let site = RadarSite::lucknow();
        let tr = track_heading(90.0);
        let dry = rain_crosscheck(&tr, &six_dry(), &site, 150.0);
        assert_eq!(dry.verdict, RainVerdict::NoRainConfirmed);
        assert_eq!(dry.stations_checked.len(), 6);
        assert!(dry.stations_checked.iter().all(|s| s.distance_km <= 150.0));

        let mut wet = six_dry();
        wet.push(station("Rae Bareli", 26.23, 81.23, 3.2));
        assert_eq!(rain_crosscheck(&tr, &wet, &site, 150.0).verdict, RainVerdict::RainPresentAmbiguous);

        let (a, b) = destination_point(site.latitude_deg, site.longitude_deg, 10.0, 200.0);
        let far = vec![station("far", a, b, 0.0)];
        assert_eq!(rain_crosscheck(&tr, &far, &site, 150.0).verdict, RainVerdict::NoStations);
    }

    #[test]
    fn rain_window_must_overlap() {
        let site = RadarSite::lucknow();
        let tr = track_heading(90.0);
        let mut r = station("Lucknow", 26.85, 80.95, 5.0);
        r.window_start = t("2020-07-11T00:00Z");
        r.window_end = t("2020-07-12T02:00Z");
        assert_eq!(rain_crosscheck(&tr, &[r], &site, 150.0).verdict, RainVerdict::NoStations);
    }

    #[test]
    fn wind_examples() {
        let cfg = CrossCheckConfig::default();
        let w = wind_alignment(&track_heading(90.0), &[wind(5.0, 0.0)], &cfg).unwrap();
        assert!(w.wind_alignment_deg.unwrap() < 1e-6);
        assert_eq!(w.verdict, WindVerdict::Downwind);
        let w = wind_alignment(&track_heading(270.0), &[wind(5.0, 0.0)], &cfg).unwrap();
        assert!((w.wind_alignment_deg.unwrap() - 180.0).abs() < 1e-6);
        assert_eq!(w.verdict, WindVerdict::Upwind);
        // toward 045
        assert_eq!(alignment_deg(90.0, direction_of_travel_deg(1.0, 1.0)), 45.0);
        assert_eq!(classify_alignment(45.0, &cfg), WindVerdict::Downwind);
        assert_eq!(classify_alignment(90.0, &cfg), WindVerdict::Crosswind);
        assert_eq!(classify_alignment(135.0, &cfg), WindVerdict::Upwind);
    }

    #[test]
    fn wind_outside_grid_or_calm() {
        let cfg = CrossCheckConfig::default();
        let small = WindField::uniform(20.0, 70.0, 0.25, 3, 3, 5.0, 0.0, 850.0, t("2020-07-12T06:00Z"));
        let w = wind_alignment(&track_heading(90.0), &[small], &cfg).unwrap();
        assert_eq!(w.verdict, WindVerdict::NoWindData);
        assert_eq!(wind_alignment(&track_heading(90.0), &[], &cfg).unwrap().verdict, WindVerdict::NoWindData);
        assert_eq!(wind_alignment(&track_heading(90.0), &[wind(0.0, 0.0)], &cfg).unwrap().verdict, WindVerdict::NoWindData);
    }

    #[test]
    fn time_nearest_field_is_used() {
        let cfg = CrossCheckConfig::default();
        let mut early = wind(5.0, 0.0);
        early.valid_time = t("2020-07-12T03:00Z");
        let mut late = wind(-5.0, 0.0);
        late.valid_time = t("2020-07-12T23:00Z");
        let w = wind_alignment(&track_heading(90.0), &[late, early], &cfg).unwrap();
        assert_eq!(w.verdict, WindVerdict::Downwind);
    }

    #[test]
    fn report_for_single_observation_track() {
        let site = RadarSite::lucknow();
        let mut tr = track_heading(90.0);
        tr = SwarmTrack::from_observations(tr.track_id, vec![tr.observations[0].clone()], TrackStatus::Ended);
        let r = crosscheck_track(&tr, &six_dry(), &[wind(5.0, 0.0)], &site, &CrossCheckConfig::default()).unwrap();
        assert_eq!(r.wind_verdict, WindVerdict::NoWindData);
        assert_eq!(r.rain_verdict, RainVerdict::NoRainConfirmed);
    }

    proptest! {
        #[test]
        fn rain_monotone(extra in 0.0f64..50.0, mm in prop::sample::select(vec![0.0, 0.1, 12.0])) {
            let site = RadarSite::lucknow();
            let tr = track_heading(45.0);
            let mut recs = six_dry();
            recs.push(station("extra", 26.76 + extra / 200.0, 80.88, mm));
            let v = rain_crosscheck(&tr, &recs, &site, 150.0).verdict;
            if mm == 0.0 {
                prop_assert_eq!(v, RainVerdict::NoRainConfirmed);
            } else {
                prop_assert_eq!(v, RainVerdict::RainPresentAmbiguous);
            }
        }

        #[test]
        fn alignment_symmetric_and_bounded(a in -720.0f64..720.0, b in -720.0f64..720.0) {
            let x = alignment_deg(a, b);
            prop_assert!((0.0..=180.0).contains(&x));
            prop_assert_eq!(x, alignment_deg(b, a));
        }

        #[test]
        fn scale_invariant(u in -20.0f64..20.0, v in -20.0f64..20.0, k in 0.01f64..100.0, h in 0.0f64..360.0) {
            prop_assume!(u.abs() + v.abs() > 1e-3);
            let cfg = CrossCheckConfig::default();
            let tr = track_heading(h);
            let a = wind_alignment(&tr, &[wind(u, v)], &cfg).unwrap();
            let b = wind_alignment(&tr, &[wind(k * u, k * v)], &cfg).unwrap();
            prop_assert!((a.wind_alignment_deg.unwrap() - b.wind_alignment_deg.unwrap()).abs() <= 1e-9);
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }
}
