//! Time series aggregation.
//!
//! Load, wind and solar series are normalized into one feature matrix,
//! periods (hours or days) are clustered with Ward's method, each cluster is
//! represented by its medoid, and the network is rebuilt over the
//! representatives with weights counting the hours they stand for.
//!
//! Two methods are provided: [`Method::Chronological`] clusters single hours
//! under a chain adjacency so that clusters are consecutive segments, and
//! [`Method::CouplingDays`] clusters whole days freely and keeps a map from
//! every original day to its representative.

mod normalize;
mod ward;

pub use normalize::{normalize, normalize_with, rescale, ColumnInfo, ColumnKind, RenewableScaling, TimeSeriesMatrix};
pub use ward::{
    period_vectors, select_medoids, select_medoids_vectors, ward_cluster, ward_cluster_vectors, Adjacency,
    ClusterAssignment, Merge,
};

use crate::lpmodel::{AggregationDescriptor, Method, HOURS_PER_DAY};
use crate::network::{Carrier, Network};

#[derive(Debug, thiserror::Error)]
pub enum TsamError {
    #[error("{rows} time steps do not divide into periods of {period_length}")]
    Indivisible { rows: usize, period_length: usize },
    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("k exceeds number of days ({k} > {days})")]
    TooManyDays { k: usize, days: usize },
    #[error("k exceeds number of hours ({k} > {hours})")]
    TooManyHours { k: usize, hours: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("the network is already aggregated (snapshot weightings are not all 1)")]
    NotHourly,
    #[error("period length {0} is not supported (use 1 or 24)")]
    PeriodLength(usize),
    #[error("cluster {0} is not a contiguous range of hours")]
    NotContiguous(usize),
    #[error("series length {got} does not match {expected}")]
    Length { expected: usize, got: usize },
}

/// Turns clusters and their medoids into a descriptor. A period length of 1
/// gives chronological segments (clusters must be contiguous), 24 gives
/// coupled days.
pub fn make_descriptor(
    assignment: &ClusterAssignment,
    medoids: &[usize],
    period_length: usize,
) -> Result<AggregationDescriptor, TsamError> {
    let k = assignment.k;
    let sizes = assignment.sizes();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&l| medoids[l]);
    let representatives: Vec<usize> = order.iter().map(|&l| medoids[l]).collect();
    let weights: Vec<u32> = order.iter().map(|&l| (sizes[l] * period_length) as u32).collect();
    match period_length {
        1 => {
            let mut segments = Vec::with_capacity(k);
            for &l in &order {
                let first = assignment.members(l).next().expect("clusters are nonempty");
                let end = first + sizes[l];
                if assignment.labels[first..end].iter().any(|&x| x != l) {
                    return Err(TsamError::NotContiguous(l));
                }
                segments.push((first, end));
            }
            // Medoid order equals time order for contiguous segments.
            Ok(AggregationDescriptor {
                method: Method::Chronological,
                k,
                representatives,
                weights,
                period_map: Vec::new(),
                segments,
            })
        }
        HOURS_PER_DAY => Ok(AggregationDescriptor {
            method: Method::CouplingDays,
            k,
            representatives,
            weights,
            period_map: assignment.labels.iter().map(|&l| medoids[l]).collect(),
            segments: Vec::new(),
        }),
        other => Err(TsamError::PeriodLength(other)),
    }
}

/// Original hours whose values the aggregated snapshots carry, in snapshot
/// order.
pub fn representative_hours(descriptor: &AggregationDescriptor) -> Vec<usize> {
    match descriptor.method {
        Method::CouplingDays => descriptor
            .representatives
            .iter()
            .flat_map(|&d| d * HOURS_PER_DAY..(d + 1) * HOURS_PER_DAY)
            .collect(),
        _ => descriptor.representatives.clone(),
    }
}

/// Rebuilds a full-length series from per-snapshot values of the
/// aggregated network.
pub fn expand(descriptor: &AggregationDescriptor, series: &[f64]) -> Result<Vec<f64>, TsamError> {
    let expected = descriptor.n_snapshots();
    if series.len() != expected {
        return Err(TsamError::Length {
            expected,
            got: series.len(),
        });
    }
    Ok(match descriptor.method {
        Method::None => series.to_vec(),
        Method::Chronological => descriptor
            .segments
            .iter()
            .zip(series)
            .flat_map(|(&(start, end), &v)| std::iter::repeat_n(v, end - start))
            .collect(),
        Method::CouplingDays => (0..descriptor.period_map.len())
            .flat_map(|day| {
                let slot = descriptor.representative_slot(day).expect("descriptor maps every day");
                series[slot * HOURS_PER_DAY..(slot + 1) * HOURS_PER_DAY].iter().copied()
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AggregateOptions {
    pub scaling: RenewableScaling,
}

/// Aggregates the time dimension of an hourly network.
pub fn aggregate(network: &Network, method: Method, k: usize) -> Result<(Network, AggregationDescriptor), TsamError> {
    aggregate_with(network, method, k, AggregateOptions::default())
}

pub fn aggregate_with(
    network: &Network,
    method: Method,
    k: usize,
    options: AggregateOptions,
) -> Result<(Network, AggregationDescriptor), TsamError> {
    if network.snapshots.weightings.iter().any(|&w| w != 1) {
        return Err(TsamError::NotHourly);
    }
    let hours = network.n_snapshots();
    if k == 0 {
        return Err(TsamError::ZeroK);
    }
    let (period_length, adjacency) = match method {
        Method::None => {
            let descriptor = AggregationDescriptor::identity(&network.snapshots.weightings);
            return Ok((network.clone(), descriptor));
        }
        Method::Chronological => {
            if k > hours {
                return Err(TsamError::TooManyHours { k, hours });
            }
            (1, Adjacency::Chain)
        }
        Method::CouplingDays => {
            if hours % HOURS_PER_DAY != 0 {
                return Err(TsamError::Indivisible {
                    rows: hours,
                    period_length: HOURS_PER_DAY,
                });
            }
            let days = hours / HOURS_PER_DAY;
            if k > days {
                return Err(TsamError::TooManyDays { k, days });
            }
            (HOURS_PER_DAY, Adjacency::None)
        }
    };

    let matrix = normalize_with(network, options.scaling);
    let vectors = period_vectors(&matrix, period_length)?;
    let assignment = ward_cluster_vectors(&vectors, k, adjacency)?;
    let medoids = select_medoids_vectors(&assignment, &vectors);
    let descriptor = make_descriptor(&assignment, &medoids, period_length)?;

    let rows = representative_hours(&descriptor);
    let mut aggregated = network.select_snapshots(&rows, descriptor.snapshot_weightings());
    let physical = rescale(&matrix, &rows);
    for (info, values) in matrix.columns.iter().zip(physical) {
        match info.kind {
            ColumnKind::Load => {
                if let Some(l) = aggregated.loads.iter_mut().find(|l| l.id == info.component) {
                    l.demand = values;
                }
            }
            ColumnKind::Wind | ColumnKind::Solar => {
                if let Some(g) = aggregated
                    .generators
                    .iter_mut()
                    .find(|g| g.id == info.component && matches!(g.carrier, Carrier::Wind | Carrier::Solar))
                {
                    g.avail_max = values;
                }
            }
        }
    }
    Ok((aggregated, descriptor))
}
