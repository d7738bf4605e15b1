//! Chaining solutions and their JSON form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::trace_run;
use super::{BcpInstance, NextDayPlan};
use crate::error::BcpError;

/// Endpoint of an arc: the dispatching depot `s`, a block, or the return
/// depot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Source,
    Block(u32),
    Sink,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Source => f.write_str("s"),
            Node::Block(id) => write!(f, "{id}"),
            Node::Sink => f.write_str("t"),
        }
    }
}

impl FromStr for Node {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s" => Ok(Node::Source),
            "t" => Ok(Node::Sink),
            _ => s
                .parse()
                .map(Node::Block)
                .map_err(|_| format!("bad node `{s}`")),
        }
    }
}

/// Arc key serialized as `"i-j"`, `"s-j"` or `"i-t"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ArcKey {
    pub from: Node,
    pub to: Node,
}

impl ArcKey {
    pub fn blocks(i: u32, j: u32) -> Self {
        ArcKey {
            from: Node::Block(i),
            to: Node::Block(j),
        }
    }

    pub fn pull_out(j: u32) -> Self {
        ArcKey {
            from: Node::Source,
            to: Node::Block(j),
        }
    }

    pub fn pull_in(i: u32) -> Self {
        ArcKey {
            from: Node::Block(i),
            to: Node::Sink,
        }
    }
}

impl fmt::Display for ArcKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

impl From<ArcKey> for String {
    fn from(k: ArcKey) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ArcKey {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        let (a, b) = s.split_once('-').ok_or_else(|| format!("bad arc key `{s}`"))?;
        Ok(ArcKey {
            from: a.parse()?,
            to: b.parse()?,
        })
    }
}

/// A run end paired with the run start it feeds on the next horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvernightLink {
    pub from: u32,
    pub to: u32,
    /// SOC at the start of `to` on the next horizon.
    pub soc: Option<f64>,
}

/// Block-id sets of a divide-and-conquer split and the number of graph edges
/// running between different sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub parts: Vec<Vec<u32>>,
    pub cut_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChainSolution {
    /// Block ids of every vehicle run in service order.
    pub runs: Vec<Vec<u32>>,
    /// Charge gained on used same-day arcs.
    pub day_charge: BTreeMap<ArcKey, f64>,
    /// SOC at the start of each block.
    pub soc: BTreeMap<u32, f64>,
    /// SOC carried along each used arc, depot arcs included.
    #[serde(default)]
    pub arc_soc: BTreeMap<ArcKey, f64>,
    /// Last block of a run mapped to the first block it feeds next day.
    #[serde(with = "id_map")]
    pub next_day: BTreeMap<u32, u32>,
    /// SOC at the start of the linked block on the next horizon.
    #[serde(default)]
    pub overnight_soc: BTreeMap<ArcKey, f64>,
    pub objective: f64,
    pub optimal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSummary>,
}

mod id_map {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u32, u32>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, u32>, D::Error> {
        let raw = BTreeMap::<String, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| Ok((k.parse().map_err(D::Error::custom)?, v.parse().map_err(D::Error::custom)?)))
            .collect()
    }
}

impl ChainSolution {
    pub fn vehicles(&self) -> usize {
        self.runs.len()
    }

    pub fn overnight_links(&self) -> Vec<OvernightLink> {
        self.next_day
            .iter()
            .map(|(&from, &to)| OvernightLink {
                from,
                to,
                soc: self.overnight_soc.get(&ArcKey::blocks(from, to)).copied(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), BcpError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| BcpError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self, BcpError> {
        let text = std::fs::read_to_string(path).map_err(|source| BcpError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| BcpError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        })
    }
}

/// Builds the full solution record for runs of block indices, charging
/// maximally along each run from the planned starting SOC.
pub(crate) fn assemble(
    inst: &BcpInstance,
    runs: &[Vec<usize>],
    plan: &NextDayPlan,
    optimal: bool,
) -> ChainSolution {
    let cap = inst.params.battery_cap;
    let id = |k: usize| inst.block(k).id;
    let mut sol = ChainSolution {
        objective: inst.runs_cost(runs),
        optimal,
        ..ChainSolution::default()
    };
    let mut end_soc = Vec::with_capacity(runs.len());
    for (r, run) in runs.iter().enumerate() {
        let trace = trace_run(inst, run, plan.start_soc[r]);
        sol.arc_soc.insert(ArcKey::pull_out(id(run[0])), trace.soc_at_start[0]);
        for (k, &b) in run.iter().enumerate() {
            sol.soc.insert(id(b), trace.soc_at_start[k]);
            if let Some(&next) = run.get(k + 1) {
                let key = ArcKey::blocks(id(b), id(next));
                sol.day_charge.insert(key, trace.charges[k]);
                sol.arc_soc.insert(key, trace.soc_at_start[k + 1]);
            }
        }
        sol.arc_soc.insert(ArcKey::pull_in(id(run[run.len() - 1])), trace.end_soc);
        end_soc.push(trace.end_soc);
    }
    for (r, run) in runs.iter().enumerate() {
        let q = plan.successor[r];
        let (last, first) = (run[run.len() - 1], runs[q][0]);
        sol.next_day.insert(id(last), id(first));
        let v = cap.min(end_soc[r] + inst.night_charge(last, first));
        sol.overnight_soc.insert(ArcKey::blocks(id(last), id(first)), v);
    }
    sol.runs = runs.iter().map(|run| run.iter().map(|&b| id(b)).collect()).collect();
    sol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_keys_round_trip() {
        for s in ["s-3", "3-t", "12-4"] {
            let k = ArcKey::try_from(s.to_string()).unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!(ArcKey::try_from("x-1".to_string()).is_err());
    }

    #[test]
    fn json_shape() {
        let mut sol = ChainSolution {
            runs: vec![vec![1, 2]],
            objective: 50_100.0,
            optimal: true,
            ..Default::default()
        };
        sol.day_charge.insert(ArcKey::blocks(1, 2), 204.5);
        sol.soc.insert(1, 7200.0);
        sol.next_day.insert(2, 1);
        let json = sol.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["runs"], serde_json::json!([[1, 2]]));
        assert_eq!(v["day_charge"]["1-2"], 204.5);
        assert_eq!(v["soc"]["1"], 7200.0);
        assert_eq!(v["next_day"]["2"], "1");
        assert!(v.get("partition").is_none());
        assert_eq!(ChainSolution::from_json(&json).unwrap(), sol);
    }
}
