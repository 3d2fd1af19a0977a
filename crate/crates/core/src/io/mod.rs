//! File formats: SVOL radar volumes, rain-gauge CSV extracts and gridded
//! wind CSV extracts.

pub mod rain;
pub mod svol;
pub mod wind;

pub use rain::{read_rain_records, write_rain_records, RainRecord, RecordError};
pub use svol::{decode_svol, encode_svol, read_volume, write_volume, SvolError};
pub use wind::{read_wind_field, write_wind_field, WindError, WindField};
