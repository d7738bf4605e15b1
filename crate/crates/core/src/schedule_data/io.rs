//! Plain CSV trip and depot files.
//!
//! Trips: `trip_id,start_time_s,end_time_s,origin_lat,origin_lon,dest_lat,dest_lon,route_id`
//! Depots: `depot_id,lat,lon`

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Depot, Stop, Trip};
use crate::error::DataError;

#[derive(Debug, Serialize, Deserialize)]
struct TripRecord {
    trip_id: String,
    start_time_s: i64,
    end_time_s: i64,
    origin_lat: f64,
    origin_lon: f64,
    dest_lat: f64,
    dest_lon: f64,
    route_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct DepotRecord {
    depot_id: String,
    lat: f64,
    lon: f64,
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(file_name(path))
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn create(path: &Path) -> Result<File, DataError> {
    File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_trips_csv(path: &Path) -> Result<Vec<Trip>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut trips = Vec::new();
    for rec in rdr.deserialize::<TripRecord>() {
        let rec = rec.map_err(|source| DataError::Csv {
            file: file_name(path),
            source,
        })?;
        if rec.start_time_s < 0 {
            return Err(DataError::invalid(
                file_name(path),
                format!("trip `{}` has a negative start time", rec.trip_id),
            ));
        }
        let origin = Stop::new(format!("{}:o", rec.trip_id), rec.origin_lat, rec.origin_lon)?;
        let destination = Stop::new(format!("{}:d", rec.trip_id), rec.dest_lat, rec.dest_lon)?;
        trips.push(Trip::new(
            rec.trip_id,
            origin,
            destination,
            rec.start_time_s,
            rec.end_time_s,
            rec.route_id,
        )?);
    }
    Ok(trips)
}

pub fn write_trips_csv(path: &Path, trips: &[Trip]) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    for t in trips {
        wtr.serialize(TripRecord {
            trip_id: t.id.clone(),
            start_time_s: t.start_time,
            end_time_s: t.end_time,
            origin_lat: t.origin.lat,
            origin_lon: t.origin.lon,
            dest_lat: t.destination.lat,
            dest_lon: t.destination.lon,
            route_id: t.route_id.clone(),
        })
        .map_err(|source| DataError::Csv {
            file: file_name(path),
            source,
        })?;
    }
    wtr.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_depots_csv(path: &Path) -> Result<Vec<Depot>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut depots = Vec::new();
    for rec in rdr.deserialize::<DepotRecord>() {
        let rec = rec.map_err(|source| DataError::Csv {
            file: file_name(path),
            source,
        })?;
        depots.push(Depot::new(rec.depot_id, rec.lat, rec.lon)?);
    }
    Ok(depots)
}

pub fn write_depots_csv(path: &Path, depots: &[Depot]) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    for d in depots {
        wtr.serialize(DepotRecord {
            depot_id: d.id.clone(),
            lat: d.location.lat,
            lon: d.location.lon,
        })
        .map_err(|source| DataError::Csv {
            file: file_name(path),
            source,
        })?;
    }
    wtr.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}
