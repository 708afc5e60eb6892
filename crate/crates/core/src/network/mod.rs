//! Power network data model.
//!
//! A [`Network`] holds every physical quantity the optimal power flow needs:
//! buses, lines with susceptance and thermal rating, generators with capacity
//! bounds and per-snapshot availability, storage units with energy-to-power
//! ratio and efficiencies, and loads. Components are kept sorted by id, which
//! is also the row order of the CSV directory format (see [`io`]).

mod io;
mod synth;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{load_network, save_network};
pub use synth::synthesize_network;
pub use validate::{validate, Diagnostic};

/// Generation technology. Wind and solar carry availability series that are
/// clustered by the aggregation methods; the others are dispatchable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Wind,
    Solar,
    Gas,
    Waste,
    Coal,
    Biomass,
}

impl Carrier {
    pub const ALL: [Carrier; 6] = [
        Carrier::Wind,
        Carrier::Solar,
        Carrier::Gas,
        Carrier::Waste,
        Carrier::Coal,
        Carrier::Biomass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Carrier::Wind => "wind",
            Carrier::Solar => "solar",
            Carrier::Gas => "gas",
            Carrier::Waste => "waste",
            Carrier::Coal => "coal",
            Carrier::Biomass => "biomass",
        }
    }

    pub fn is_variable_renewable(self) -> bool {
        matches!(self, Carrier::Wind | Carrier::Solar)
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Carrier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Carrier::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown carrier {s:?}"))
    }
}

/// Modeled time steps. Each snapshot stands for `weightings[t]` real hours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshots {
    pub weightings: Vec<u32>,
}

impl Snapshots {
    /// `count` hourly snapshots of weight one.
    pub fn hourly(count: usize) -> Self {
        Snapshots {
            weightings: vec![1; count],
        }
    }

    pub fn len(&self) -> usize {
        self.weightings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weightings.is_empty()
    }

    /// Total number of real hours represented.
    pub fn total_hours(&self) -> u64 {
        self.weightings.iter().map(|&w| u64::from(w)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Nominal voltage in kV; informational only.
    pub v_nom: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub bus0: String,
    pub bus1: String,
    /// Series susceptance in per unit.
    pub susceptance: f64,
    /// Thermal rating in MW, applied symmetrically to the flow.
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub carrier: Carrier,
    /// Minimum installable capacity in MW.
    pub p_nom_min: f64,
    /// Maximum installable capacity in MW.
    pub p_nom_max: f64,
    /// Fixed capacity: `p_nom_min == p_nom_max`.
    pub fixed: bool,
    /// Lower availability per unit of capacity, one value per snapshot.
    pub avail_min: Vec<f64>,
    /// Upper availability per unit of capacity, one value per snapshot.
    pub avail_max: Vec<f64>,
    /// Operating cost in EUR/MWh.
    pub op_cost: f64,
    /// Capital cost in EUR/MW.
    pub cap_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageUnit {
    pub id: String,
    pub bus: String,
    /// Minimum installable power capacity in MW.
    pub h_nom_min: f64,
    /// Maximum installable power capacity in MW.
    pub h_nom_max: f64,
    /// Energy-to-power ratio in hours; energy capacity is `max_hours * H`.
    pub max_hours: f64,
    pub eta_char: f64,
    pub eta_dis: f64,
    /// Standing loss per hour.
    pub eta_loss: f64,
    /// Operating cost in EUR/MWh, charged on discharge.
    pub op_cost: f64,
    /// Capital cost in EUR/MW.
    pub cap_cost: f64,
    /// Lower dispatch availability per unit of power capacity (charging side).
    pub dispatch_min: Vec<f64>,
    /// Upper dispatch availability per unit of power capacity (discharging side).
    pub dispatch_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: String,
    pub bus: String,
    /// Demand in MW, one value per snapshot.
    pub demand: Vec<f64>,
}

/// A complete power network over a fixed snapshot set.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub snapshots: Snapshots,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub storage_units: Vec<StorageUnit>,
    pub loads: Vec<Load>,
}

impl Network {
    pub fn n_snapshots(&self) -> usize {
        self.snapshots.len()
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Reference bus for the voltage angle: the lexicographically smallest id.
    pub fn reference_bus(&self) -> Option<&Bus> {
        self.buses.iter().min_by(|a, b| a.id.cmp(&b.id))
    }

    /// Sorts every component table by id.
    pub fn sort_components(&mut self) {
        self.buses.sort_by(|a, b| a.id.cmp(&b.id));
        self.lines.sort_by(|a, b| a.id.cmp(&b.id));
        self.generators.sort_by(|a, b| a.id.cmp(&b.id));
        self.storage_units.sort_by(|a, b| a.id.cmp(&b.id));
        self.loads.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn generators_of(&self, carrier: Carrier) -> impl Iterator<Item = &Generator> {
        self.generators.iter().filter(move |g| g.carrier == carrier)
    }

    /// Copy of the network restricted to the given snapshot rows, in the given
    /// order, with new weightings. Static data is carried over unchanged.
    pub fn select_snapshots(&self, rows: &[usize], weightings: Vec<u32>) -> Network {
        assert_eq!(rows.len(), weightings.len());
        let pick = |series: &[f64]| rows.iter().map(|&r| series[r]).collect::<Vec<_>>();
        Network {
            snapshots: Snapshots { weightings },
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| Generator {
                    avail_min: pick(&g.avail_min),
                    avail_max: pick(&g.avail_max),
                    ..g.clone()
                })
                .collect(),
            storage_units: self
                .storage_units
                .iter()
                .map(|s| StorageUnit {
                    dispatch_min: pick(&s.dispatch_min),
                    dispatch_max: pick(&s.dispatch_max),
                    ..s.clone()
                })
                .collect(),
            loads: self
                .loads
                .iter()
                .map(|l| Load {
                    demand: pick(&l.demand),
                    ..l.clone()
                })
                .collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("missing file {file}")]
    MissingFile { file: String },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}, row {row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{file}, row {row}: {component} references unknown bus {bus:?}")]
    UnknownBus {
        file: String,
        row: usize,
        component: String,
        bus: String,
    },
    #[error("{file}: series length {found} does not match {expected} snapshots")]
    SeriesLength {
        file: String,
        expected: usize,
        found: usize,
    },
    #[error("network is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("invalid synthesis request: {0}")]
    InvalidSize(String),
}
