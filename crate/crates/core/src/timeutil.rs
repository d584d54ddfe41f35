//! Local-time binning of event timestamps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::{DateTime, Datelike, Timelike};

/// The discrete time dimensions used by dynamic features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDimension {
    Hour,
    Day,
    Weekday,
    TimeOfDay,
}

impl TimeDimension {
    pub const ALL: [TimeDimension; 4] = [
        TimeDimension::Hour,
        TimeDimension::Day,
        TimeDimension::Weekday,
        TimeDimension::TimeOfDay,
    ];

    /// Singular name used in extended-stat feature names.
    pub fn singular(self) -> &'static str {
        match self {
            TimeDimension::Hour => "hour",
            TimeDimension::Day => "day",
            TimeDimension::Weekday => "weekday",
            TimeDimension::TimeOfDay => "timeofday",
        }
    }

    /// Plural name used for series features.
    pub fn plural(self) -> &'static str {
        match self {
            TimeDimension::Hour => "hours",
            TimeDimension::Day => "days",
            TimeDimension::Weekday => "weekdays",
            TimeDimension::TimeOfDay => "timeofdays",
        }
    }

    pub fn parse(s: &str) -> Result<TimeDimension, TimeError> {
        match s {
            "hour" => Ok(TimeDimension::Hour),
            "day" => Ok(TimeDimension::Day),
            "weekday" => Ok(TimeDimension::Weekday),
            "timeofday" => Ok(TimeDimension::TimeOfDay),
            _ => Err(TimeError::UnknownDimension),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeError {
    UnknownDimension,
    DescendingTimestamps,
    InvalidTimestamp(i64),
}

impl fmt::Display for TimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeError::UnknownDimension => f.write_str("unknown time dimension"),
            TimeError::DescendingTimestamps => f.write_str("timestamps must be ascending"),
            TimeError::InvalidTimestamp(t) => write!(f, "timestamp {t} out of calendar range"),
        }
    }
}

const WEEKDAY_NAMES: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

/// Local hour of day (0..=23) for a UTC millisecond timestamp.
pub fn local_hour(ts_ms: i64, offset_ms: i64) -> Result<u32, TimeError> {
    Ok(local_datetime(ts_ms, offset_ms)?.hour())
}

fn local_datetime(ts_ms: i64, offset_ms: i64) -> Result<DateTime<chrono::Utc>, TimeError> {
    DateTime::from_timestamp_millis(ts_ms + offset_ms).ok_or(TimeError::InvalidTimestamp(ts_ms))
}

/// Four coarse daily buckets: morning [04,12), afternoon [12,17),
/// evening [17,20), night [20,04).
pub fn time_of_day(hour: u32) -> &'static str {
    match hour {
        4..=11 => "morning",
        12..=16 => "afternoon",
        17..=19 => "evening",
        _ => "night",
    }
}

/// Bin key of a timestamp along one time dimension, in corpus local time.
pub fn time_dimension(ts_ms: i64, dimension: TimeDimension, offset_ms: i64) -> Result<String, TimeError> {
    let dt = local_datetime(ts_ms, offset_ms)?;
    Ok(match dimension {
        TimeDimension::Hour => format!("{:02}", dt.hour()),
        TimeDimension::Day => format!("{:02}", dt.day()),
        TimeDimension::Weekday => {
            String::from(WEEKDAY_NAMES[dt.weekday().num_days_from_monday() as usize])
        }
        TimeDimension::TimeOfDay => String::from(time_of_day(dt.hour())),
    })
}

/// Local weekday as an index, 0 = monday .. 6 = sunday.
pub fn weekday_index(ts_ms: i64, offset_ms: i64) -> Result<usize, TimeError> {
    let dt = local_datetime(ts_ms, offset_ms)?;
    Ok(dt.weekday().num_days_from_monday() as usize)
}

/// Local calendar date as `YYYY-MM-DD`, used by activity heatmaps.
pub fn local_date(ts_ms: i64, offset_ms: i64) -> Result<String, TimeError> {
    let dt = local_datetime(ts_ms, offset_ms)?;
    Ok(format!("{:04}-{:02}-{:02}", dt.year(), dt.month(), dt.day()))
}

/// Gaps in milliseconds between consecutive timestamps. `N` timestamps
/// produce `N - 1` gaps; fewer than two produce none.
pub fn timegaps(timestamps: &[i64]) -> Result<Vec<i64>, TimeError> {
    let mut gaps = Vec::with_capacity(timestamps.len().saturating_sub(1));
    for pair in timestamps.windows(2) {
        if pair[1] < pair[0] {
            return Err(TimeError::DescendingTimestamps);
        }
        gaps.push(pair[1] - pair[0]);
    }
    Ok(gaps)
}
