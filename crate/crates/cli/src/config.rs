//! Run configuration: defaults, a flat `key = value` file, then flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use evsched::bcp::EnergyParams;
use evsched::greedy::OvernightWindow;
use evsched::metrics::range_seconds;
use evsched::sdvsp::SdvspParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Greedy,
    Dac,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Greedy => "greedy",
            Method::Dac => "dac",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Method as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub method: Method,
    pub battery_min: f64,
    pub range_miles: f64,
    /// Unset rates come from the charger powers and consumption rate.
    pub rate_day: Option<f64>,
    pub rate_night: Option<f64>,
    pub power_day: f64,
    pub power_night: f64,
    pub consumption_rate: f64,
    pub horizon_s: i64,
    pub vehicle_cost_s: f64,
    pub layover_weight: f64,
    pub layover_min_s: i64,
    pub layover_max_s: Option<i64>,
    /// SDVSP block cost.
    pub k: f64,
    /// SDVSP layover weight.
    pub w: f64,
    pub seed: u64,
    pub time_limit_s: f64,
    pub subproblem_cap: usize,
    pub full_initial: bool,
    pub overnight_window: OvernightWindow,
    /// Largest instance the exact method accepts; 0 lifts the limit.
    pub exact_block_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Greedy,
            battery_min: 120.0,
            range_miles: 60.0,
            rate_day: None,
            rate_night: None,
            power_day: 450.0,
            power_night: 125.0,
            consumption_rate: 220.0,
            horizon_s: 86_400,
            vehicle_cost_s: 50_000.0,
            layover_weight: 1.0,
            layover_min_s: 0,
            layover_max_s: None,
            k: 50_000.0,
            w: 1.0,
            seed: 0,
            time_limit_s: 1200.0,
            subproblem_cap: 20,
            full_initial: false,
            overnight_window: OvernightWindow::Consistent,
            exact_block_limit: 20,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("config key `{key}`: cannot parse `{value}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("config key `{key}`: expected a boolean, got `{value}`"),
    }
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    match value {
        "" | "none" | "inf" => Ok(None),
        _ => parse(key, value).map(Some),
    }
}

impl RunConfig {
    /// Sets one key. Keys are the field names, the flag names with
    /// underscores, or the model parameter names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "method" => self.method = parse(&key, v)?,
            "battery_min" => self.battery_min = parse(&key, v)?,
            "battery_cap" | "battery_cap_s" => self.battery_min = parse::<f64>(&key, v)? / 60.0,
            "range_miles" => self.range_miles = parse(&key, v)?,
            "rate_day" => self.rate_day = parse_opt(&key, v)?,
            "rate_night" => self.rate_night = parse_opt(&key, v)?,
            "power_day" => self.power_day = parse(&key, v)?,
            "power_night" => self.power_night = parse(&key, v)?,
            "consumption_rate" => self.consumption_rate = parse(&key, v)?,
            "horizon_s" | "horizon" => self.horizon_s = parse(&key, v)?,
            "vehicle_cost_s" | "vehicle_cost" => self.vehicle_cost_s = parse(&key, v)?,
            "layover_weight" => self.layover_weight = parse(&key, v)?,
            "layover_min_s" | "layover_min" => self.layover_min_s = parse(&key, v)?,
            "layover_max_s" | "layover_max" => self.layover_max_s = parse_opt(&key, v)?,
            "k" | "K" | "block_cost" => self.k = parse(&key, v)?,
            "w" | "W" | "sdvsp_layover_weight" => self.w = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "time_limit_s" | "time_limit" => self.time_limit_s = parse(&key, v)?,
            "subproblem_cap" => self.subproblem_cap = parse(&key, v)?,
            "full_initial" | "assume_full_initial" => self.full_initial = parse_bool(&key, v)?,
            "overnight_window" => self.overnight_window = parse(&key, v)?,
            "exact_block_limit" => self.exact_block_limit = parse(&key, v)?,
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    /// Applies a config file. Blank lines and lines starting with `#` are
    /// skipped.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), n + 1))?;
            self.set(k, v)
                .with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn battery_cap(&self) -> f64 {
        self.battery_min * 60.0
    }

    /// Blocks consuming more than this go to the diesel pool. The battery
    /// caps it, since longer blocks cannot be chained electrically at all.
    pub fn range_limit_s(&self) -> f64 {
        range_seconds(self.range_miles).min(self.battery_cap())
    }

    pub fn energy_params(&self) -> EnergyParams {
        let mut p = EnergyParams::from_powers(
            self.battery_cap(),
            self.power_day,
            self.power_night,
            self.consumption_rate,
        );
        if let Some(r) = self.rate_day {
            p.rate_day = r;
        }
        if let Some(r) = self.rate_night {
            p.rate_night = r;
        }
        p.horizon = self.horizon_s;
        p.vehicle_cost = self.vehicle_cost_s;
        p.layover_weight = self.layover_weight;
        p.layover_min = self.layover_min_s;
        p.layover_max = self.layover_max_s;
        p
    }

    pub fn sdvsp_params(&self) -> SdvspParams {
        SdvspParams {
            block_cost: self.k,
            layover_weight: self.w,
        }
    }

    pub fn apply(&mut self, f: &ConfigFlags) -> Result<()> {
        if let Some(path) = &f.config {
            self.load_file(path)?;
        }
        macro_rules! take {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = f.$field.clone() { self.$target = v; })*
            };
        }
        take!(
            method => method,
            battery_min => battery_min,
            range_miles => range_miles,
            horizon_s => horizon_s,
            vehicle_cost_s => vehicle_cost_s,
            layover_weight => layover_weight,
            layover_min_s => layover_min_s,
            k => k,
            w => w,
            seed => seed,
            time_limit_s => time_limit_s,
            subproblem_cap => subproblem_cap,
            overnight_window => overnight_window,
            exact_block_limit => exact_block_limit,
        );
        if f.rate_day.is_some() {
            self.rate_day = f.rate_day;
        }
        if f.rate_night.is_some() {
            self.rate_night = f.rate_night;
        }
        if f.layover_max_s.is_some() {
            self.layover_max_s = f.layover_max_s;
        }
        if f.full_initial {
            self.full_initial = true;
        }
        Ok(())
    }
}

/// Model and solver flags shared by `solve` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Battery capacity in minutes of driving.
    #[arg(long)]
    pub battery_min: Option<f64>,
    /// EV range in miles; blocks beyond it go to diesel buses.
    #[arg(long)]
    pub range_miles: Option<f64>,
    /// Daytime recharge, seconds of range per second plugged in.
    #[arg(long)]
    pub rate_day: Option<f64>,
    /// Overnight recharge rate.
    #[arg(long)]
    pub rate_night: Option<f64>,
    /// Planning horizon; trips starting later are dropped.
    #[arg(long)]
    pub horizon_s: Option<i64>,
    /// Cost of one vehicle in the chaining model, seconds.
    #[arg(long)]
    pub vehicle_cost_s: Option<f64>,
    /// Weight on depot layover in the chaining model.
    #[arg(long)]
    pub layover_weight: Option<f64>,
    /// Shortest allowed depot layover between chained blocks.
    #[arg(long)]
    pub layover_min_s: Option<i64>,
    /// Longest allowed depot layover; unbounded when absent.
    #[arg(long)]
    pub layover_max_s: Option<i64>,
    /// Block generation cost, seconds.
    #[arg(long = "K")]
    pub k: Option<f64>,
    /// Layover weight when building blocks.
    #[arg(long = "W")]
    pub w: Option<f64>,
    /// Seed for partitioning and benchmark sampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact search limit, also applied to each subproblem.
    #[arg(long)]
    pub time_limit_s: Option<f64>,
    /// Largest subproblem the divide-and-conquer method hands to exact search.
    #[arg(long)]
    pub subproblem_cap: Option<usize>,
    /// Start every run on a full battery.
    #[arg(long)]
    pub full_initial: bool,
    /// Overnight gap the greedy assumes when checking a new run.
    #[arg(long)]
    pub overnight_window: Option<OvernightWindow>,
    /// Largest instance the exact method accepts; 0 lifts the limit.
    #[arg(long)]
    pub exact_block_limit: Option<usize>,
}

/// Worker count from `EVSCHED_WORKERS`, if set to a positive integer.
pub fn env_workers() -> Option<usize> {
    std::env::var("EVSCHED_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_baseline() {
        let c = RunConfig::default();
        let p = c.energy_params();
        assert_eq!(p.battery_cap, 7200.0);
        assert!((p.rate_day - 2.0455).abs() < 1e-3);
        assert!((p.rate_night - 0.5682).abs() < 1e-3);
        assert_eq!(p.battery_kwh, 440.0);
        assert_eq!(c.range_limit_s(), 7200.0);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# baseline\nmethod = exact\nbattery_min = 150\nK = 40000\nfull_initial = yes\nlayover_max = none\n",
        )
        .unwrap();
        let mut c = RunConfig::default();
        let flags = ConfigFlags {
            config: Some(path),
            battery_min: Some(90.0),
            ..Default::default()
        };
        c.apply(&flags).unwrap();
        assert_eq!(c.method, Method::Exact);
        assert_eq!(c.battery_min, 90.0);
        assert_eq!(c.k, 40_000.0);
        assert!(c.full_initial);
    }

    #[test]
    fn rejects_unknown_keys() {
        let mut c = RunConfig::default();
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("seed", "x").is_err());
        c.set("overnight-window", "from-extended").unwrap();
        assert_eq!(c.overnight_window, OvernightWindow::FromExtended);
    }
}
