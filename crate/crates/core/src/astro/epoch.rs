use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::constants::{JD_J2000, SECONDS_PER_DAY};
use crate::error::{Error, Result};

/// An instant on a single uniform time scale, counted from J2000
/// (2000-01-01T12:00:00).
///
/// Whole seconds and the fractional part are stored separately so that
/// differences stay exact to well below a microsecond for any epoch in
/// the supported range.
#[derive(Clone, Copy)]
pub struct Epoch {
    secs: i64,
    /// Always in `[0, 1)`.
    frac: f64,
}

fn j2000_datetime() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(12, 0, 0))
        .expect("valid reference date")
}

impl Epoch {
    pub const J2000: Epoch = Epoch { secs: 0, frac: 0.0 };

    fn normalized(secs: i64, frac: f64) -> Self {
        let carry = frac.floor();
        let mut frac = frac - carry;
        let mut secs = secs + carry as i64;
        if frac >= 1.0 {
            frac -= 1.0;
            secs += 1;
        }
        Epoch { secs, frac }
    }

    pub fn from_j2000_seconds(seconds: f64) -> Self {
        let whole = seconds.floor();
        Self::normalized(whole as i64, seconds - whole)
    }

    pub fn j2000_seconds(&self) -> f64 {
        self.secs as f64 + self.frac
    }

    pub fn julian_date(&self) -> f64 {
        JD_J2000 + (self.secs as f64 / SECONDS_PER_DAY) + self.frac / SECONDS_PER_DAY
    }

    /// Julian centuries since J2000.
    pub fn julian_centuries(&self) -> f64 {
        self.j2000_seconds() / (SECONDS_PER_DAY * 36_525.0)
    }

    pub fn from_calendar(
        year: i32,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        second: f64,
    ) -> Result<Self> {
        let whole = second.floor();
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, minute, whole as u32))
            .ok_or_else(|| Error::EpochParse {
                text: format!("{year}-{month}-{day} {hour}:{minute}:{second}"),
                reason: "calendar fields out of range".into(),
            })?;
        Ok(Self::from_naive(date, second - whole))
    }

    fn from_naive(dt: NaiveDateTime, extra_frac: f64) -> Self {
        let delta = dt - j2000_datetime();
        let secs = delta.num_seconds();
        let nanos = (delta - Duration::seconds(secs))
            .num_nanoseconds()
            .unwrap_or(0);
        Self::normalized(secs, nanos as f64 * 1e-9 + extra_frac)
    }

    /// Parses `YYYY-MM-DDTHH:MM:SS[.fff...][Z]`.
    pub fn from_iso8601(text: &str) -> Result<Self> {
        let trimmed = text.trim().trim_end_matches('Z');
        let dt = NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%dT%H:%M:%S%.f").map_err(|e| {
            Error::EpochParse {
                text: text.to_string(),
                reason: e.to_string(),
            }
        })?;
        Ok(Self::from_naive(dt, 0.0))
    }

    /// ISO-8601 with microsecond resolution and no zone designator.
    pub fn to_iso8601(&self) -> String {
        let mut secs = self.secs;
        let mut micros = (self.frac * 1e6).round() as i64;
        if micros >= 1_000_000 {
            micros -= 1_000_000;
            secs += 1;
        }
        let dt = j2000_datetime() + Duration::seconds(secs) + Duration::microseconds(micros);
        dt.format("%Y-%m-%dT%H:%M:%S%.6f").to_string()
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso8601())
    }
}

impl fmt::Debug for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Epoch({})", self.to_iso8601())
    }
}

impl PartialEq for Epoch {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Epoch {}

impl PartialOrd for Epoch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Epoch {
    fn cmp(&self, other: &Self) -> Ordering {
        self.secs
            .cmp(&other.secs)
            .then_with(|| self.frac.total_cmp(&other.frac))
    }
}

impl Add<f64> for Epoch {
    type Output = Epoch;

    fn add(self, dt: f64) -> Epoch {
        let whole = dt.floor();
        Epoch::normalized(self.secs + whole as i64, self.frac + (dt - whole))
    }
}

impl AddAssign<f64> for Epoch {
    fn add_assign(&mut self, dt: f64) {
        *self = *self + dt;
    }
}

impl Sub<f64> for Epoch {
    type Output = Epoch;

    fn sub(self, dt: f64) -> Epoch {
        self + (-dt)
    }
}

/// Elapsed seconds between two epochs.
impl Sub<Epoch> for Epoch {
    type Output = f64;

    fn sub(self, rhs: Epoch) -> f64 {
        (self.secs - rhs.secs) as f64 + (self.frac - rhs.frac)
    }
}

impl Serialize for Epoch {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_iso8601())
    }
}

impl<'de> Deserialize<'de> for Epoch {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Epoch::from_iso8601(&text).map_err(serde::de::Error::custom)
    }
}
