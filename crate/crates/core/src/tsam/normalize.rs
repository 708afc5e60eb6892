use serde::{Deserialize, Serialize};

use crate::network::{Carrier, Network};

/// What a feature column describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Load,
    Wind,
    Solar,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Load => "load",
            ColumnKind::Wind => "wind",
            ColumnKind::Solar => "solar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnInfo {
    pub kind: ColumnKind,
    /// Id of the load or generator the column comes from.
    pub component: String,
    /// Divisor used for normalization; 0 for an all-zero column.
    pub scale: f64,
}

/// How wind and solar columns share scaling constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewableScaling {
    /// One constant for all wind columns and another for all solar columns.
    #[default]
    PerCarrier,
    /// A single constant shared by every wind and solar column.
    Shared,
}

/// Normalized clustering features, one column per load and per wind or solar
/// generator, with the metadata needed to undo the scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    pub n_rows: usize,
    pub columns: Vec<ColumnInfo>,
    /// Normalized values, column-major.
    pub values: Vec<Vec<f64>>,
    /// The physical series the normalized values were computed from.
    physical: Vec<Vec<f64>>,
}

impl TimeSeriesMatrix {
    /// Feature vector of one time step.
    pub fn row(&self, t: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |c| c[t])
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub(crate) fn physical(&self, column: usize, row: usize) -> f64 {
        self.physical[column][row]
    }
}

fn divide(series: &[f64], scale: f64) -> Vec<f64> {
    if scale == 0.0 {
        vec![0.0; series.len()]
    } else {
        series.iter().map(|v| v / scale).collect()
    }
}

fn series_max(series: &[f64]) -> f64 {
    series.iter().copied().fold(0.0, f64::max)
}

/// Builds the feature matrix: loads scaled by their own maximum, wind and
/// solar availability scaled by a global maximum per carrier.
pub fn normalize(network: &Network) -> TimeSeriesMatrix {
    normalize_with(network, RenewableScaling::PerCarrier)
}

pub fn normalize_with(network: &Network, scaling: RenewableScaling) -> TimeSeriesMatrix {
    let n_rows = network.n_snapshots();
    let mut columns = Vec::new();
    let mut values = Vec::new();
    let mut physical = Vec::new();
    for load in &network.loads {
        let scale = series_max(&load.demand);
        columns.push(ColumnInfo {
            kind: ColumnKind::Load,
            component: load.id.clone(),
            scale,
        });
        values.push(divide(&load.demand, scale));
        physical.push(load.demand.clone());
    }

    let carrier_max = |carriers: &[Carrier]| {
        network
            .generators
            .iter()
            .filter(|g| carriers.contains(&g.carrier))
            .map(|g| series_max(&g.avail_max))
            .fold(0.0, f64::max)
    };
    let (wind_scale, solar_scale) = match scaling {
        RenewableScaling::PerCarrier => (carrier_max(&[Carrier::Wind]), carrier_max(&[Carrier::Solar])),
        RenewableScaling::Shared => {
            let m = carrier_max(&[Carrier::Wind, Carrier::Solar]);
            (m, m)
        }
    };
    for (carrier, kind, scale) in [
        (Carrier::Wind, ColumnKind::Wind, wind_scale),
        (Carrier::Solar, ColumnKind::Solar, solar_scale),
    ] {
        for g in network.generators_of(carrier) {
            let scale = if series_max(&g.avail_max) == 0.0 { 0.0 } else { scale };
            columns.push(ColumnInfo {
                kind,
                component: g.id.clone(),
                scale,
            });
            values.push(divide(&g.avail_max, scale));
            physical.push(g.avail_max.clone());
        }
    }
    TimeSeriesMatrix {
        n_rows,
        columns,
        values,
        physical,
    }
}

/// Physical values of every column at the given rows: the inverse of the
/// normalization, evaluated on the rows the normalized values came from.
pub fn rescale(matrix: &TimeSeriesMatrix, rows: &[usize]) -> Vec<Vec<f64>> {
    (0..matrix.n_columns())
        .map(|c| {
            rows.iter()
                .map(|&r| {
                    let scale = matrix.columns[c].scale;
                    if scale == 0.0 {
                        0.0
                    } else {
                        debug_assert!((matrix.values[c][r] * scale - matrix.physical(c, r)).abs() <= 1e-9 * scale);
                        matrix.physical(c, r)
                    }
                })
                .collect()
        })
        .collect()
}
