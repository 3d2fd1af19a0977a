//! Gate-level detection scoring against simulator truth.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ObjectKind, VolumeTruth};
use crate::filter::EchoCluster;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("cluster time {cluster} does not match truth time {truth}")]
    TimeMismatch { truth: DateTime<Utc>, cluster: DateTime<Utc> },
}

/// Lowest-sweep scores. Precision is 1.0 when nothing was detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub detected_gates: usize,
    pub swarm_truth_gates: usize,
    pub true_positives: usize,
    /// Detected gates owned by storms.
    pub storm_gates_detected: usize,
    /// Detected speckle gates.
    pub noise_gates_detected: usize,
    pub swarm_precision: f64,
    pub swarm_recall: f64,
    /// Fraction of storm truth gates retained; 0 when there are none.
    pub storm_retention: f64,
}

pub fn score_detection(truth: &VolumeTruth, clusters: &[EchoCluster]) -> Result<DetectionScore, ScoreError> {
    if let Some(c) = clusters.iter().find(|c| c.time != truth.time) {
        return Err(ScoreError::TimeMismatch { truth: truth.time, cluster: c.time });
    }
    let detected: BTreeSet<(usize, usize)> = clusters.iter().flat_map(|c| c.gates.iter().copied()).collect();
    let gather = |kind| -> BTreeSet<(usize, usize)> {
        truth.objects_of(kind).flat_map(|o| o.lowest_sweep_gates().iter().copied()).collect()
    };
    let swarm = gather(ObjectKind::Swarm);
    let storm = gather(ObjectKind::Storm);
    let noise: BTreeSet<(usize, usize)> = truth.noise_gates.first().into_iter().flatten().copied().collect();
    let tp = detected.intersection(&swarm).count();
    let storm_hit = detected.intersection(&storm).count();
    let ratio = |a: usize, b: usize, empty: f64| if b == 0 { empty } else { a as f64 / b as f64 };
    Ok(DetectionScore {
        detected_gates: detected.len(),
        swarm_truth_gates: swarm.len(),
        true_positives: tp,
        storm_gates_detected: storm_hit,
        noise_gates_detected: detected.intersection(&noise).count(),
        swarm_precision: ratio(tp, detected.len(), 1.0),
        swarm_recall: ratio(tp, swarm.len(), 1.0),
        storm_retention: ratio(storm_hit, storm.len(), 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::ObjectTruth;
    use crate::time::parse_utc;
    use rand::{Rng, SeedableRng};

    fn truth(swarm: Vec<(usize, usize)>, storm: Vec<(usize, usize)>, noise: Vec<(usize, usize)>) -> VolumeTruth {
        let obj = |kind, gates| ObjectTruth {
            kind,
            index: 0,
            centroid_lat_deg: 0.0,
            centroid_lon_deg: 0.0,
            radius_km: 1.0,
            ground_speed_ms: 0.0,
            heading_deg: 0.0,
            gates: vec![gates],
        };
        VolumeTruth {
            volume_index: 0,
            time: parse_utc("2020-07-12T02:32:10Z").unwrap(),
            objects: vec![obj(ObjectKind::Swarm, swarm), obj(ObjectKind::Storm, storm)],
            noise_gates: vec![noise],
        }
    }

    fn cluster(t: &VolumeTruth, gates: Vec<(usize, usize)>) -> EchoCluster {
        EchoCluster {
            cluster_id: 0,
            time: t.time,
            elevation_deg: 0.2,
            gate_count: gates.len(),
            gates,
            mean_reflectivity_dbz: 0.0,
            linear_mean_reflectivity_dbz: 0.0,
            mean_radial_velocity_ms: 0.0,
            centroid_lat_deg: 0.0,
            centroid_lon_deg: 0.0,
            centroid_height_km: 0.0,
        }
    }

    #[test]
    fn perfect_and_empty() {
        let t = truth(vec![(0, 1), (0, 2)], vec![], vec![]);
        let s = score_detection(&t, &[cluster(&t, vec![(0, 1), (0, 2)])]).unwrap();
        assert_eq!((s.swarm_precision, s.swarm_recall), (1.0, 1.0));
        let s = score_detection(&t, &[]).unwrap();
        assert_eq!((s.swarm_precision, s.swarm_recall), (1.0, 0.0));
    }

    #[test]
    fn time_mismatch() {
        let t = truth(vec![], vec![], vec![]);
        let mut c = cluster(&t, vec![]);
        c.time = parse_utc("2020-07-12T03:00:00Z").unwrap();
        assert!(score_detection(&t, &[c]).is_err());
    }

    #[test]
    fn matches_set_arithmetic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let mut pick = |p: f64| -> Vec<(usize, usize)> {
                (0..10).flat_map(|r| (0..10).map(move |g| (r, g))).filter(|_| rng.random_bool(p)).collect()
            };
            let (sw, st, no, det) = (pick(0.3), pick(0.2), pick(0.05), pick(0.4));
            let t = truth(sw.clone(), st.clone(), no.clone());
            let half = det.len() / 2;
            let s = score_detection(&t, &[cluster(&t, det[..half].to_vec()), cluster(&t, det[half..].to_vec())]).unwrap();
            let tp = det.iter().filter(|c| sw.contains(c)).count();
            assert_eq!(s.true_positives, tp);
            assert_eq!(s.storm_gates_detected, det.iter().filter(|c| st.contains(c)).count());
            assert_eq!(s.noise_gates_detected, det.iter().filter(|c| no.contains(c)).count());
            if !det.is_empty() {
                assert_eq!(s.swarm_precision, tp as f64 / det.len() as f64);
            }
            if !sw.is_empty() {
                assert_eq!(s.swarm_recall, tp as f64 / sw.len() as f64);
            }
        }
    }
}
