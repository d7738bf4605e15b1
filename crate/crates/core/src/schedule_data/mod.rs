//! Trip ingestion, depot assignment and deadhead estimation.
//!
//! Everything here works in whole seconds measured from the start of the
//! planning horizon. Deadhead times come from a Manhattan distance under a
//! local equirectangular projection and a constant average speed.

mod gtfs;
mod io;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::DataError;

pub use gtfs::{parse_gtfs, parse_gtfs_time, GtfsTrips};
pub use io::{read_depots_csv, read_trips_csv, write_depots_csv, write_trips_csv};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Meters per statute mile.
pub const METERS_PER_MILE: f64 = 1609.344;

/// 30 mph expressed in meters per second.
pub const DEFAULT_SPEED_MPS: f64 = 30.0 * METERS_PER_MILE / 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl Stop {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Result<Self, DataError> {
        let id = id.into();
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(DataError::InvalidCoordinate { id, lat, lon });
        }
        Ok(Stop { id, lat, lon })
    }
}

/// A timetabled revenue trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub id: String,
    pub origin: Stop,
    pub destination: Stop,
    /// Departure from the first stop, seconds from horizon start.
    pub start_time: i64,
    /// Arrival at the last stop.
    pub end_time: i64,
    pub route_id: String,
}

impl Trip {
    pub fn new(
        id: impl Into<String>,
        origin: Stop,
        destination: Stop,
        start_time: i64,
        end_time: i64,
        route_id: impl Into<String>,
    ) -> Result<Self, DataError> {
        let id = id.into();
        if end_time <= start_time {
            return Err(DataError::InvalidTripTimes {
                id,
                start: start_time,
                end: end_time,
            });
        }
        Ok(Trip {
            id,
            origin,
            destination,
            start_time,
            end_time,
            route_id: route_id.into(),
        })
    }

    pub fn duration(&self) -> i64 {
        self.end_time - self.start_time
    }

    /// Coordinate midpoint of the trip's first and last stop.
    pub fn midpoint(&self) -> (f64, f64) {
        (
            0.5 * (self.origin.lat + self.destination.lat),
            0.5 * (self.origin.lon + self.destination.lon),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Depot {
    pub id: String,
    pub location: Stop,
}

impl Depot {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Result<Self, DataError> {
        let id = id.into();
        let location = Stop::new(id.clone(), lat, lon)?;
        Ok(Depot { id, location })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceMetric {
    #[default]
    ManhattanProjected,
}

/// Converts distances into deadhead travel times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelModel {
    /// Meters per second, strictly positive.
    pub avg_speed: f64,
    pub metric: DistanceMetric,
}

impl Default for TravelModel {
    fn default() -> Self {
        TravelModel {
            avg_speed: DEFAULT_SPEED_MPS,
            metric: DistanceMetric::ManhattanProjected,
        }
    }
}

impl TravelModel {
    pub fn with_speed(avg_speed: f64) -> Self {
        assert!(avg_speed > 0.0, "average speed must be positive");
        TravelModel {
            avg_speed,
            metric: DistanceMetric::ManhattanProjected,
        }
    }
}

/// East and north offsets in meters from `a` to `b`, projected around their
/// midpoint latitude.
pub fn projected_offsets(a_lat: f64, a_lon: f64, b_lat: f64, b_lon: f64) -> (f64, f64) {
    let mean_lat = (0.5 * (a_lat + b_lat)).to_radians();
    let mut dlon = b_lon - a_lon;
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    let dx = dlon.to_radians() * EARTH_RADIUS_M * mean_lat.cos();
    let dy = (b_lat - a_lat).to_radians() * EARTH_RADIUS_M;
    (dx, dy)
}

fn manhattan_m(a_lat: f64, a_lon: f64, b_lat: f64, b_lon: f64) -> f64 {
    let (dx, dy) = projected_offsets(a_lat, a_lon, b_lat, b_lon);
    dx.abs() + dy.abs()
}

/// Manhattan distance in meters between two stops.
pub fn manhattan_distance(a: &Stop, b: &Stop) -> f64 {
    manhattan_m(a.lat, a.lon, b.lat, b.lon)
}

/// Deadhead travel time in whole seconds (rounded to nearest).
pub fn deadhead_time(a: &Stop, b: &Stop, model: &TravelModel) -> i64 {
    match model.metric {
        DistanceMetric::ManhattanProjected => {
            (manhattan_distance(a, b) / model.avg_speed).round() as i64
        }
    }
}

/// Distributes trips over depots.
///
/// Routes present in `mapping` go to their mapped depot. All other trips go to
/// the depot closest to the trip midpoint; ties resolve to the smallest depot
/// id. The returned map has one entry per depot, possibly empty.
pub fn assign_trips_to_depot(
    trips: &[Trip],
    depots: &[Depot],
    mapping: Option<&HashMap<String, String>>,
) -> Result<BTreeMap<String, Vec<Trip>>, DataError> {
    if depots.is_empty() {
        return Err(DataError::NoDepots);
    }
    let mut sorted: Vec<&Depot> = depots.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    if let Some(mapping) = mapping {
        for (route, depot) in mapping {
            if !sorted.iter().any(|d| &d.id == depot) {
                return Err(DataError::UnknownDepot {
                    route: route.clone(),
                    depot: depot.clone(),
                });
            }
        }
    }

    let mut out: BTreeMap<String, Vec<Trip>> =
        sorted.iter().map(|d| (d.id.clone(), Vec::new())).collect();

    for trip in trips {
        let mapped = mapping.and_then(|m| m.get(&trip.route_id));
        let depot_id = match mapped {
            Some(id) => id.clone(),
            None => nearest_depot(trip, &sorted).id.clone(),
        };
        out.get_mut(&depot_id)
            .expect("depot ids validated above")
            .push(trip.clone());
    }
    Ok(out)
}

fn nearest_depot<'a>(trip: &Trip, sorted: &[&'a Depot]) -> &'a Depot {
    const TIE_M: f64 = 1e-6;
    let (lat, lon) = trip.midpoint();
    let mut best = sorted[0];
    let mut best_d = manhattan_m(lat, lon, best.location.lat, best.location.lon);
    for depot in &sorted[1..] {
        let d = manhattan_m(lat, lon, depot.location.lat, depot.location.lon);
        if d < best_d - TIE_M {
            best = depot;
            best_d = d;
        }
    }
    best
}

/// Drops trips that start at or after the horizon end. Returns the kept trips
/// and the number dropped.
pub fn clip_to_horizon(trips: Vec<Trip>, horizon: i64) -> (Vec<Trip>, usize) {
    let before = trips.len();
    let kept: Vec<Trip> = trips.into_iter().filter(|t| t.start_time < horizon).collect();
    let dropped = before - kept.len();
    if dropped > 0 {
        log::warn!("{dropped} trips start at or after the horizon end ({horizon} s) and were dropped");
    }
    (kept, dropped)
}
