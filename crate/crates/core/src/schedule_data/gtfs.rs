use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::Deserialize;

use super::{Stop, Trip};
use crate::error::DataError;

/// Trips active on one service date, plus counters for rows that were skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GtfsTrips {
    /// Sorted by trip id.
    pub trips: Vec<Trip>,
    /// Trips with fewer than two stop times.
    pub skipped_short: usize,
    /// Trips whose first or last stop time carries no time.
    pub skipped_untimed: usize,
}

#[derive(Debug, Deserialize)]
struct TripRow {
    route_id: String,
    service_id: String,
    trip_id: String,
}

#[derive(Debug, Deserialize)]
struct StopRow {
    stop_id: String,
    #[serde(default)]
    stop_lat: Option<f64>,
    #[serde(default)]
    stop_lon: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct StopTimeRow {
    trip_id: String,
    #[serde(default)]
    arrival_time: Option<String>,
    #[serde(default)]
    departure_time: Option<String>,
    stop_id: String,
    stop_sequence: u32,
}

#[derive(Debug, Deserialize)]
struct CalendarRow {
    service_id: String,
    monday: u8,
    tuesday: u8,
    wednesday: u8,
    thursday: u8,
    friday: u8,
    saturday: u8,
    sunday: u8,
    start_date: String,
    end_date: String,
}

impl CalendarRow {
    fn runs_on(&self, date: NaiveDate) -> Result<bool, DataError> {
        let start = parse_gtfs_date("calendar.txt", &self.start_date)?;
        let end = parse_gtfs_date("calendar.txt", &self.end_date)?;
        if date < start || date > end {
            return Ok(false);
        }
        let flag = match date.weekday() {
            Weekday::Mon => self.monday,
            Weekday::Tue => self.tuesday,
            Weekday::Wed => self.wednesday,
            Weekday::Thu => self.thursday,
            Weekday::Fri => self.friday,
            Weekday::Sat => self.saturday,
            Weekday::Sun => self.sunday,
        };
        Ok(flag == 1)
    }
}

#[derive(Debug, Deserialize)]
struct CalendarDateRow {
    service_id: String,
    date: String,
    exception_type: u8,
}

fn parse_gtfs_date(file: &str, s: &str) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(s.trim(), "%Y%m%d")
        .map_err(|e| DataError::invalid(file, format!("bad date `{s}`: {e}")))
}

/// Parses `H:MM:SS` / `HH:MM:SS` into seconds. Hours may exceed 23 for
/// service running past midnight.
pub fn parse_gtfs_time(s: &str) -> Option<i64> {
    let mut parts = s.trim().split(':');
    let h: i64 = parts.next()?.parse().ok()?;
    let m: i64 = parts.next()?.parse().ok()?;
    let sec: i64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || !(0..60).contains(&m) || !(0..60).contains(&sec) || h < 0 {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}

fn read_rows<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<Vec<T>, DataError> {
    let path = dir.join(name);
    let file = File::open(&path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(name.to_string())
        } else {
            DataError::Io { path, source }
        }
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| DataError::Csv {
            file: name.to_string(),
            source,
        })
}

fn active_services(dir: &Path, date: NaiveDate) -> Result<HashSet<String>, DataError> {
    let has_calendar = dir.join("calendar.txt").exists();
    let has_dates = dir.join("calendar_dates.txt").exists();
    if !has_calendar && !has_dates {
        return Err(DataError::MissingFile(
            "calendar.txt or calendar_dates.txt".to_string(),
        ));
    }
    let mut active = HashSet::new();
    if has_calendar {
        for row in read_rows::<CalendarRow>(dir, "calendar.txt")? {
            if row.runs_on(date)? {
                active.insert(row.service_id);
            }
        }
    }
    if has_dates {
        for row in read_rows::<CalendarDateRow>(dir, "calendar_dates.txt")? {
            if parse_gtfs_date("calendar_dates.txt", &row.date)? != date {
                continue;
            }
            match row.exception_type {
                1 => {
                    active.insert(row.service_id);
                }
                2 => {
                    active.remove(&row.service_id);
                }
                other => {
                    return Err(DataError::invalid(
                        "calendar_dates.txt",
                        format!("unknown exception_type {other}"),
                    ))
                }
            }
        }
    }
    Ok(active)
}

/// Reads a GTFS static feed and returns one [`Trip`] per trip running on
/// `service_date`.
///
/// Start and end times come from the first and last stop time by sequence.
/// Times past midnight are kept as-is (above 86 400 s).
pub fn parse_gtfs(feed_dir: &Path, service_date: NaiveDate) -> Result<GtfsTrips, DataError> {
    for required in ["trips.txt", "stop_times.txt", "stops.txt"] {
        if !feed_dir.join(required).exists() {
            return Err(DataError::MissingFile(required.to_string()));
        }
    }
    let services = active_services(feed_dir, service_date)?;

    let trips: Vec<TripRow> = read_rows(feed_dir, "trips.txt")?
        .into_iter()
        .filter(|t: &TripRow| services.contains(&t.service_id))
        .collect();
    if trips.is_empty() {
        return Ok(GtfsTrips::default());
    }
    let wanted: HashSet<&str> = trips.iter().map(|t| t.trip_id.as_str()).collect();

    let stops: HashMap<String, StopRow> = read_rows::<StopRow>(feed_dir, "stops.txt")?
        .into_iter()
        .map(|s| (s.stop_id.clone(), s))
        .collect();

    let mut times: HashMap<String, Vec<StopTimeRow>> = HashMap::new();
    for row in read_rows::<StopTimeRow>(feed_dir, "stop_times.txt")? {
        if wanted.contains(row.trip_id.as_str()) {
            times.entry(row.trip_id.clone()).or_default().push(row);
        }
    }

    let lookup_stop = |id: &str| -> Result<Stop, DataError> {
        let row = stops
            .get(id)
            .ok_or_else(|| DataError::invalid("stops.txt", format!("unknown stop `{id}`")))?;
        match (row.stop_lat, row.stop_lon) {
            (Some(lat), Some(lon)) => Stop::new(id, lat, lon),
            _ => Err(DataError::invalid(
                "stops.txt",
                format!("stop `{id}` has no coordinates"),
            )),
        }
    };

    let mut out = GtfsTrips::default();
    for trip in &trips {
        let Some(rows) = times.get_mut(&trip.trip_id) else {
            out.skipped_short += 1;
            continue;
        };
        if rows.len() < 2 {
            out.skipped_short += 1;
            continue;
        }
        rows.sort_by_key(|r| r.stop_sequence);
        let first = &rows[0];
        let last = &rows[rows.len() - 1];
        let pick = |a: &Option<String>, b: &Option<String>| {
            a.as_deref()
                .filter(|s| !s.is_empty())
                .or(b.as_deref().filter(|s| !s.is_empty()))
                .map(str::to_string)
        };
        let (Some(dep), Some(arr)) = (
            pick(&first.departure_time, &first.arrival_time),
            pick(&last.arrival_time, &last.departure_time),
        ) else {
            out.skipped_untimed += 1;
            continue;
        };
        let bad_time = |s: &str| DataError::invalid("stop_times.txt", format!("bad time `{s}`"));
        let start = parse_gtfs_time(&dep).ok_or_else(|| bad_time(&dep))?;
        let end = parse_gtfs_time(&arr).ok_or_else(|| bad_time(&arr))?;
        if end <= start {
            out.skipped_untimed += 1;
            continue;
        }
        out.trips.push(Trip::new(
            trip.trip_id.clone(),
            lookup_stop(&first.stop_id)?,
            lookup_stop(&last.stop_id)?,
            start,
            end,
            trip.route_id.clone(),
        )?);
    }
    if out.skipped_short + out.skipped_untimed > 0 {
        log::warn!(
            "skipped {} trips with fewer than two stop times and {} without usable times",
            out.skipped_short,
            out.skipped_untimed
        );
    }
    out.trips.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}
