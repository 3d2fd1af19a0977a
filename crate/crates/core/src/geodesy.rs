//! Spherical-earth distance, bearing and destination helpers.
//!
//! All functions use a 6371 km sphere; at the scales handled here (a few
//! hundred km) the error against an ellipsoid is far below one gate.

use std::f64::consts::PI;

/// Mean earth radius used throughout, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine great-circle distance in km.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dlat = (lat2 - lat1).to_radians();
    let dlon = (lon2 - lon1).to_radians();
    let a = (dlat / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Initial great-circle bearing from point 1 to point 2, degrees clockwise
/// from north in [0, 360).
pub fn initial_bearing_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dlon = (lon2 - lon1).to_radians();
    let y = dlon.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dlon.cos();
    normalize_deg(y.atan2(x).to_degrees())
}

/// Point reached by travelling `distance_km` from (lat, lon) along the
/// initial bearing. Returns (lat, lon) in degrees, lon normalized to [-180, 180).
pub fn destination_point(lat: f64, lon: f64, bearing_deg: f64, distance_km: f64) -> (f64, f64) {
    if distance_km == 0.0 {
        return (lat, lon);
    }
    let delta = distance_km / EARTH_RADIUS_KM;
    let theta = bearing_deg.to_radians();
    let p1 = lat.to_radians();
    let l1 = lon.to_radians();
    let sin_p2 = p1.sin() * delta.cos() + p1.cos() * delta.sin() * theta.cos();
    let p2 = sin_p2.clamp(-1.0, 1.0).asin();
    let l2 = l1 + (theta.sin() * delta.sin() * p1.cos()).atan2(delta.cos() - p1.sin() * sin_p2);
    (p2.to_degrees(), normalize_lon(l2.to_degrees()))
}

/// Wraps an angle into [0, 360).
pub fn normalize_deg(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalize_lon(lon: f64) -> f64 {
    let l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l >= 180.0 {
        l - 360.0
    } else {
        l
    }
}

/// Smallest absolute difference between two compass directions, in [0, 180].
pub fn angular_difference_deg(a: f64, b: f64) -> f64 {
    let d = (normalize_deg(a) - normalize_deg(b)).abs();
    d.min(360.0 - d)
}

/// Length of one degree of arc along a great circle, km.
pub fn km_per_degree() -> f64 {
    2.0 * PI * EARTH_RADIUS_KM / 360.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_along_equator() {
        let d = haversine_km(0.0, 0.0, 0.0, 1.0);
        assert!((d - km_per_degree()).abs() < 1e-9);
        assert!((km_per_degree() - 111.195).abs() < 1e-3);
    }

    #[test]
    fn bearings_cardinal() {
        assert!((initial_bearing_deg(0.0, 0.0, 1.0, 0.0) - 0.0).abs() < 1e-9);
        assert!((initial_bearing_deg(0.0, 0.0, 0.0, 1.0) - 90.0).abs() < 1e-9);
        assert!((initial_bearing_deg(0.0, 0.0, -1.0, 0.0) - 180.0).abs() < 1e-9);
        assert!((initial_bearing_deg(0.0, 0.0, 0.0, -1.0) - 270.0).abs() < 1e-9);
    }

    #[test]
    fn destination_round_trips_distance_and_bearing() {
        let (lat, lon) = destination_point(26.76, 80.88, 123.0, 87.5);
        assert!((haversine_km(26.76, 80.88, lat, lon) - 87.5).abs() < 1e-6);
        assert!((initial_bearing_deg(26.76, 80.88, lat, lon) - 123.0).abs() < 1e-6);
    }

    #[test]
    fn angular_difference_wraps() {
        assert_eq!(angular_difference_deg(350.0, 10.0), 20.0);
        assert_eq!(angular_difference_deg(90.0, 270.0), 180.0);
        assert_eq!(angular_difference_deg(-90.0, 270.0), 0.0);
        assert_eq!(normalize_lon(190.0), -170.0);
    }
}
