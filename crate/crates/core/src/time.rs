//! Simulated time. Nothing in this crate reads the wall clock; every
//! operation that depends on "now" takes an [`Instant`] argument.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::Error;

/// Seconds since a fixed (arbitrary) epoch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instant(pub u64);

impl Instant {
    pub const fn from_secs(seconds: u64) -> Self {
        Instant(seconds)
    }

    pub const fn secs(self) -> u64 {
        self.0
    }

    /// Saturating difference `self - earlier`, in seconds.
    pub fn since(self, earlier: Instant) -> u64 {
        self.0.saturating_sub(earlier.0)
    }
}

impl Add<u64> for Instant {
    type Output = Instant;

    fn add(self, secs: u64) -> Instant {
        Instant(self.0.saturating_add(secs))
    }
}

impl Sub<u64> for Instant {
    type Output = Instant;

    fn sub(self, secs: u64) -> Instant {
        Instant(self.0.saturating_sub(secs))
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const HOUR: u64 = 3600;
pub const DAY: u64 = 24 * HOUR;
pub const WEEK: u64 = 7 * DAY;

/// Half-open validity window `[not_before, not_after)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawValidity")]
pub struct ValidityPeriod {
    not_before: Instant,
    not_after: Instant,
}

#[derive(Deserialize)]
struct RawValidity {
    not_before: Instant,
    not_after: Instant,
}

impl TryFrom<RawValidity> for ValidityPeriod {
    type Error = Error;

    fn try_from(raw: RawValidity) -> Result<Self, Error> {
        ValidityPeriod::new(raw.not_before, raw.not_after)
    }
}

impl ValidityPeriod {
    pub fn new(not_before: Instant, not_after: Instant) -> Result<Self, Error> {
        if not_before >= not_after {
            return Err(Error::EmptyValidity { not_before, not_after });
        }
        Ok(ValidityPeriod { not_before, not_after })
    }

    /// `[start, start + length)`.
    pub fn starting_at(start: Instant, length: u64) -> Result<Self, Error> {
        ValidityPeriod::new(start, start + length)
    }

    pub fn not_before(&self) -> Instant {
        self.not_before
    }

    pub fn not_after(&self) -> Instant {
        self.not_after
    }

    pub fn length(&self) -> u64 {
        self.not_after.since(self.not_before)
    }

    pub fn contains(&self, t: Instant) -> bool {
        self.not_before <= t && t < self.not_after
    }
}
