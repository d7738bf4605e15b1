use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use serde::Deserialize;

use evsched::schedule_data::{
    assign_trips_to_depot, clip_to_horizon, parse_gtfs, read_depots_csv, read_trips_csv,
    write_trips_csv,
};
use evsched::DataError;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// GTFS feed directory.
    #[arg(long, conflicts_with = "trips", requires = "date")]
    pub gtfs: Option<PathBuf>,
    /// Service date for the GTFS feed, YYYY-MM-DD.
    #[arg(long)]
    pub date: Option<NaiveDate>,
    /// Trip CSV instead of a feed.
    #[arg(long)]
    pub trips: Option<PathBuf>,
    #[arg(long)]
    pub depots: PathBuf,
    /// CSV `route_id,depot_id` overriding nearest-depot assignment.
    #[arg(long)]
    pub route_map: Option<PathBuf>,
    /// Trips starting at or after this are dropped.
    #[arg(long, default_value_t = 86_400)]
    pub horizon_s: i64,
    /// Output directory for `trips_<depot>.csv` files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct RouteRow {
    route_id: String,
    depot_id: String,
}

fn read_route_map(path: &PathBuf) -> Result<HashMap<String, String>, DataError> {
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| DataError::Csv {
            file: file.clone(),
            source,
        })?;
    rdr.deserialize::<RouteRow>()
        .map(|r| {
            r.map(|r| (r.route_id, r.depot_id)).map_err(|source| DataError::Csv {
                file: file.clone(),
                source,
            })
        })
        .collect()
}

pub fn run(a: IngestArgs) -> Result<()> {
    let trips = match (&a.gtfs, &a.trips) {
        (Some(dir), None) => {
            let date = a.date.expect("clap enforces --date");
            let parsed = parse_gtfs(dir, date)?;
            if parsed.skipped_short + parsed.skipped_untimed > 0 {
                log::warn!(
                    "skipped {} trips with fewer than two stop times and {} without times",
                    parsed.skipped_short,
                    parsed.skipped_untimed
                );
            }
            parsed.trips
        }
        (None, Some(path)) => read_trips_csv(path)?,
        _ => bail!("give either --gtfs with --date, or --trips"),
    };
    let (trips, _) = clip_to_horizon(trips, a.horizon_s);
    let depots = read_depots_csv(&a.depots)?;
    let mapping = a.route_map.as_ref().map(read_route_map).transpose()?;
    let per_depot = assign_trips_to_depot(&trips, &depots, mapping.as_ref())?;

    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))?;
    for (depot, trips) in &per_depot {
        let path = a.out.join(format!("trips_{depot}.csv"));
        write_trips_csv(&path, trips)?;
        println!("{depot}\t{}\t{}", trips.len(), path.display());
    }
    Ok(())
}
