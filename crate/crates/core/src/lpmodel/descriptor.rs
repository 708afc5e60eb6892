use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LpError;

/// Hours per period for coupled day clustering.
pub const HOURS_PER_DAY: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    Chronological,
    CouplingDays,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Chronological => "chronological",
            Method::CouplingDays => "coupling_days",
        }
    }

    /// Length in hours of one clustered period.
    pub fn period_length(self) -> usize {
        match self {
            Method::CouplingDays => HOURS_PER_DAY,
            _ => 1,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Method::None),
            "chronological" => Ok(Method::Chronological),
            "coupling_days" | "coupling" => Ok(Method::CouplingDays),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// How an aggregated snapshot set relates to the original horizon.
///
/// Representatives are original period indices in ascending order (hours for
/// chronological, days for coupling); `weights[i]` is the number of original
/// hours representative `i` stands for. The aggregated network lists the
/// representatives' snapshots in the same order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationDescriptor {
    pub method: Method,
    pub k: usize,
    pub representatives: Vec<usize>,
    pub weights: Vec<u32>,
    /// Coupling only: original day → representative day (original index).
    pub period_map: Vec<usize>,
    /// Chronological only: `[start, end)` hour range of each representative.
    pub segments: Vec<(usize, usize)>,
}

impl AggregationDescriptor {
    /// The unaggregated case over snapshots with the given weightings.
    pub fn identity(weightings: &[u32]) -> Self {
        AggregationDescriptor {
            method: Method::None,
            k: weightings.len(),
            representatives: (0..weightings.len()).collect(),
            weights: weightings.to_vec(),
            period_map: Vec::new(),
            segments: Vec::new(),
        }
    }

    /// Number of original hours covered.
    pub fn horizon_hours(&self) -> usize {
        match self.method {
            Method::None => self.weights.iter().map(|&w| w as usize).sum(),
            Method::Chronological => self.segments.last().map_or(0, |s| s.1),
            Method::CouplingDays => self.period_map.len() * HOURS_PER_DAY,
        }
    }

    /// Number of snapshots in the aggregated network.
    pub fn n_snapshots(&self) -> usize {
        self.representatives.len() * self.method.period_length()
    }

    /// Weight of each aggregated snapshot, in snapshot order.
    pub fn snapshot_weightings(&self) -> Vec<u32> {
        match self.method {
            Method::CouplingDays => self
                .weights
                .iter()
                .flat_map(|&w| std::iter::repeat_n(w / HOURS_PER_DAY as u32, HOURS_PER_DAY))
                .collect(),
            _ => self.weights.clone(),
        }
    }

    /// Position of an original period's representative in `representatives`.
    pub fn representative_slot(&self, period: usize) -> Option<usize> {
        let rep = *self.period_map.get(period)?;
        self.representatives.binary_search(&rep).ok()
    }

    /// Checks internal consistency: sizes, ordering, weight conservation,
    /// total period map (coupling), contiguous covering segments
    /// (chronological).
    pub fn check(&self) -> Result<(), LpError> {
        let bad = |m: String| Err(LpError::Descriptor(m));
        if self.k != self.representatives.len() || self.k != self.weights.len() {
            return bad(format!(
                "k = {} but {} representatives and {} weights",
                self.k,
                self.representatives.len(),
                self.weights.len()
            ));
        }
        if self.representatives.windows(2).any(|w| w[0] >= w[1]) {
            return bad("representatives must be strictly ascending".into());
        }
        if self.weights.contains(&0) {
            return bad("weights must be positive".into());
        }
        let total: usize = self.weights.iter().map(|&w| w as usize).sum();
        match self.method {
            Method::None => {
                if self.representatives.iter().enumerate().any(|(i, &r)| i != r) {
                    return bad("identity descriptor must list every snapshot".into());
                }
            }
            Method::Chronological => {
                if self.segments.len() != self.k {
                    return bad("one segment per representative required".into());
                }
                let mut next = 0;
                for (i, &(start, end)) in self.segments.iter().enumerate() {
                    if start != next || end <= start {
                        return bad(format!("segment {i} does not continue the partition"));
                    }
                    if !(start..end).contains(&self.representatives[i]) {
                        return bad(format!("representative {} outside its segment", self.representatives[i]));
                    }
                    if self.weights[i] as usize != end - start {
                        return bad(format!("weight of segment {i} differs from its length"));
                    }
                    next = end;
                }
                if total != next {
                    return bad("weights do not sum to the horizon".into());
                }
            }
            Method::CouplingDays => {
                let mut counts = vec![0usize; self.k];
                for (day, &rep) in self.period_map.iter().enumerate() {
                    match self.representatives.binary_search(&rep) {
                        Ok(slot) => counts[slot] += 1,
                        Err(_) => return bad(format!("day {day} maps to non-representative {rep}")),
                    }
                    if rep >= self.period_map.len() {
                        return bad(format!("representative {rep} beyond horizon"));
                    }
                }
                for (slot, &rep) in self.representatives.iter().enumerate() {
                    if self.period_map[rep] != rep {
                        return bad(format!("representative day {rep} does not map to itself"));
                    }
                    if self.weights[slot] as usize != counts[slot] * HOURS_PER_DAY {
                        return bad(format!("weight of representative {rep} differs from 24 x cluster size"));
                    }
                }
                if total != self.horizon_hours() {
                    return bad("weights do not sum to the horizon".into());
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
