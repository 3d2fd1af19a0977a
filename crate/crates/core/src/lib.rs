//! Detection and tracking of desert-locust swarm echoes in single-polarization
//! Doppler weather radar volume scans.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`geometry`]: 4/3-earth beam heights, gate ranges, gate geolocation.
//! 2. [`volume`] and [`io`]: the in-memory polar volume model and the SVOL,
//!    rain-gauge and wind-grid file formats.
//! 3. [`filter`]: threshold masking, connected-component labeling with
//!    azimuth wraparound, cluster statistics.
//! 4. [`tracker`] and [`products`]: multi-volume association, kinematics,
//!    lead-time estimates, composite reflectivity and vertical slices.
//! 5. [`crosscheck`]: rain-gauge and wind-alignment corroboration.
//!
//! [`simulator`] generates synthetic volume sequences with exact ground truth.
//!
//! Data-parallel loops go through [`Parallelism`]; with the `parallel`
//! feature disabled every path runs sequentially.

// `!(x > 0.0)` checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crosscheck;
pub mod exec;
pub mod export;
pub mod filter;
pub mod geodesy;
pub mod geometry;
pub mod io;
pub mod labeling;
pub mod products;
pub mod simulator;
pub mod time;
pub mod tracker;
pub mod volume;

pub use exec::Parallelism;
pub use filter::{EchoCluster, FilterConfig, GateMask};
pub use geometry::{Band, RadarSite, VcpDefinition};
pub use tracker::{SwarmTrack, Tracker, TrackerConfig};
pub use volume::{MomentGrid, Sweep, VolumeScan};

/// Crate version, embedded in every exported artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
