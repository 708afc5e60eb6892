use std::collections::HashMap;

use serde::Serialize;

use crate::network::Network;

use super::build::{check_consistency, soc_timeline};
use super::{names, AggregationDescriptor, LpError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorResult {
    pub id: String,
    pub capacity: f64,
    pub dispatch: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageResult {
    pub id: String,
    /// Built power capacity H in MW.
    pub power_capacity: f64,
    /// Energy capacity q H in MWh.
    pub energy_capacity: f64,
    /// h+ per dispatch snapshot.
    pub discharge: Vec<f64>,
    /// h- per dispatch snapshot.
    pub charge: Vec<f64>,
    /// State of charge per state-of-charge step (all original hours for
    /// coupled days).
    pub soc: Vec<f64>,
}

impl StorageResult {
    /// Net dispatch `h = h+ - h-`.
    pub fn dispatch(&self) -> Vec<f64> {
        self.discharge.iter().zip(&self.charge).map(|(p, m)| p - m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesResult {
    pub id: String,
    pub values: Vec<f64>,
}

/// Optimal dispatch mapped back onto network components, in network order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchResult {
    /// Objective recomputed from the primal values.
    pub objective: f64,
    pub weightings: Vec<u32>,
    pub generators: Vec<GeneratorResult>,
    pub storage_units: Vec<StorageResult>,
    pub line_flows: Vec<SeriesResult>,
    pub voltage_angles: Vec<SeriesResult>,
    /// Row duals by constraint name, when the solver reports them.
    pub duals: Option<HashMap<String, f64>>,
}

impl DispatchResult {
    pub fn n_snapshots(&self) -> usize {
        self.weightings.len()
    }
}

/// Cost components of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub generator_operating: f64,
    pub storage_operating: f64,
    pub generator_capital: f64,
    pub storage_capital: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.generator_operating + self.storage_operating + self.generator_capital + self.storage_capital
    }
}

/// Maps a primal solution, keyed by LP variable name, back to the network.
pub fn extract_solution(
    network: &Network,
    descriptor: &AggregationDescriptor,
    raw: &HashMap<String, f64>,
) -> Result<DispatchResult, LpError> {
    check_consistency(network, descriptor)?;
    let n_t = network.n_snapshots();
    let n_soc = soc_timeline(network, descriptor).len();
    let get = |name: String| raw.get(&name).copied().ok_or(LpError::MissingValue(name));
    let series = |n: usize, f: &dyn Fn(usize) -> String| (0..n).map(|t| get(f(t))).collect::<Result<Vec<_>, _>>();

    let generators = network
        .generators
        .iter()
        .map(|g| {
            Ok(GeneratorResult {
                id: g.id.clone(),
                capacity: get(names::gen_capacity(&g.id))?,
                dispatch: series(n_t, &|t| names::gen_dispatch(&g.id, t))?,
            })
        })
        .collect::<Result<Vec<_>, LpError>>()?;
    let storage_units = network
        .storage_units
        .iter()
        .map(|s| {
            let power = get(names::storage_power(&s.id))?;
            Ok(StorageResult {
                id: s.id.clone(),
                power_capacity: power,
                energy_capacity: s.max_hours * power,
                discharge: series(n_t, &|t| names::storage_discharge(&s.id, t))?,
                charge: series(n_t, &|t| names::storage_charge(&s.id, t))?,
                soc: series(n_soc, &|t| names::soc(&s.id, t))?,
            })
        })
        .collect::<Result<Vec<_>, LpError>>()?;
    let line_flows = network
        .lines
        .iter()
        .map(|l| {
            Ok(SeriesResult {
                id: l.id.clone(),
                values: series(n_t, &|t| names::flow(&l.id, t))?,
            })
        })
        .collect::<Result<Vec<_>, LpError>>()?;
    let voltage_angles = network
        .buses
        .iter()
        .map(|b| {
            Ok(SeriesResult {
                id: b.id.clone(),
                values: series(n_t, &|t| names::angle(&b.id, t))?,
            })
        })
        .collect::<Result<Vec<_>, LpError>>()?;

    let mut result = DispatchResult {
        objective: 0.0,
        weightings: network.snapshots.weightings.clone(),
        generators,
        storage_units,
        line_flows,
        voltage_angles,
        duals: None,
    };
    result.objective = objective_breakdown(&result, network).total();
    Ok(result)
}

/// Splits the objective into operating and capital cost of generators and
/// storage. Storage operating cost applies to discharge only.
pub fn objective_breakdown(result: &DispatchResult, network: &Network) -> CostBreakdown {
    let weighted = |series: &[f64]| -> f64 {
        series
            .iter()
            .zip(&result.weightings)
            .map(|(v, &w)| f64::from(w) * v)
            .sum()
    };
    let mut out = CostBreakdown::default();
    for (g, r) in network.generators.iter().zip(&result.generators) {
        out.generator_operating += g.op_cost * weighted(&r.dispatch);
        out.generator_capital += g.cap_cost * r.capacity;
    }
    for (s, r) in network.storage_units.iter().zip(&result.storage_units) {
        out.storage_operating += s.op_cost * weighted(&r.discharge);
        out.storage_capital += s.cap_cost * r.power_capacity;
    }
    out
}
