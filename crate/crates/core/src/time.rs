//! UTC timestamp parsing and formatting. Every instant in the file formats
//! carries an explicit `Z` suffix.

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};

/// Parses `YYYY-MM-DDTHH:MM[:SS[.fff]]Z`.
pub fn parse_utc(s: &str) -> Result<DateTime<Utc>, String> {
    let body = s
        .strip_suffix('Z')
        .ok_or_else(|| format!("timestamp {s:?} is not UTC (missing Z suffix)"))?;
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(body, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(format!("unparseable timestamp {s:?}"))
}

/// Formats with only as many fractional digits as needed, always with `Z`.
pub fn format_utc(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Seconds from `a` to `b` (negative when `b` precedes `a`).
pub fn seconds_between(a: &DateTime<Utc>, b: &DateTime<Utc>) -> f64 {
    let d = *b - *a;
    d.num_seconds() as f64 + d.subsec_nanos() as f64 / 1e9
}

/// Serde adapter for `DateTime<Utc>` fields using [`format_utc`]/[`parse_utc`].
pub mod serde_utc {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_utc(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_utc(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<DateTime<Utc>>`; `None` is serialized as null.
pub mod serde_utc_opt {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.serialize_some(&super::format_utc(t)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DateTime<Utc>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| super::parse_utc(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_minute_and_second_precision() {
        let a = parse_utc("2020-07-12T00:00Z").unwrap();
        let b = parse_utc("2020-07-12T00:00:00Z").unwrap();
        assert_eq!(a, b);
        let c = parse_utc("2020-07-12T02:32:10.250Z").unwrap();
        assert_eq!(format_utc(&c), "2020-07-12T02:32:10.250Z");
        assert_eq!(format_utc(&b), "2020-07-12T00:00:00Z");
    }

    #[test]
    fn rejects_non_utc() {
        assert!(parse_utc("2020-07-12T00:00:00").is_err());
        assert!(parse_utc("2020-07-12T00:00:00+05:30").is_err());
        assert!(parse_utc("yesterday Z").is_err());
    }

    #[test]
    fn seconds_between_signed() {
        let a = parse_utc("2020-07-12T02:32:10Z").unwrap();
        let b = parse_utc("2020-07-12T11:32:09Z").unwrap();
        assert_eq!(seconds_between(&a, &b), 32_399.0);
        assert_eq!(seconds_between(&b, &a), -32_399.0);
    }
}
