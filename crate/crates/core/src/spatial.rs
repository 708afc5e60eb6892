//! Spatial network reduction: k-means clustering of buses on their
//! coordinates, then collapsing each cluster into one bus.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::network::{Bus, Line, Network};

#[derive(Debug, thiserror::Error)]
pub enum SpatialError {
    #[error("k = {k} out of range 1..={buses}")]
    KOutOfRange { k: usize, buses: usize },
    #[error("assignment covers {got} buses, network has {expected}")]
    Mismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialAssignment {
    pub k: usize,
    /// Cluster label per bus, in network bus order. Labels are numbered by
    /// first occurrence.
    pub labels: Vec<usize>,
    pub centroids: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BusWeighting {
    #[default]
    Uniform,
    /// Weight each bus by its total load energy.
    LoadEnergy,
}

fn sq_dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn nearest(p: (f64, f64), centers: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (c, &center) in centers.iter().enumerate() {
        if sq_dist(p, center) < sq_dist(p, centers[best]) {
            best = c;
        }
    }
    best
}

fn bus_weights(network: &Network, weighting: BusWeighting) -> Vec<f64> {
    match weighting {
        BusWeighting::Uniform => vec![1.0; network.buses.len()],
        BusWeighting::LoadEnergy => network
            .buses
            .iter()
            .map(|b| {
                let energy: f64 = network
                    .loads
                    .iter()
                    .filter(|l| l.bus == b.id)
                    .map(|l| {
                        l.demand
                            .iter()
                            .zip(&network.snapshots.weightings)
                            .map(|(d, &w)| d * f64::from(w))
                            .sum::<f64>()
                    })
                    .sum();
                // Buses without load still pull a little so no cluster is weightless.
                energy.max(1e-9)
            })
            .collect(),
    }
}

/// Lloyd's algorithm on bus coordinates with k-means++ seeding.
pub fn kmeans_buses(network: &Network, k: usize, seed: u64, max_iter: usize) -> Result<SpatialAssignment, SpatialError> {
    kmeans_buses_weighted(network, k, seed, max_iter, BusWeighting::Uniform)
}

pub fn kmeans_buses_weighted(
    network: &Network,
    k: usize,
    seed: u64,
    max_iter: usize,
    weighting: BusWeighting,
) -> Result<SpatialAssignment, SpatialError> {
    let n = network.buses.len();
    if k == 0 || k > n {
        return Err(SpatialError::KOutOfRange { k, buses: n });
    }
    let points: Vec<(f64, f64)> = network.buses.iter().map(|b| (b.x, b.y)).collect();
    let weights = bus_weights(network, weighting);
    if k == n {
        return Ok(SpatialAssignment {
            k,
            labels: (0..n).collect(),
            centroids: points,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|&p| chosen.iter().map(|&c| sq_dist(p, points[c])).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            while chosen.contains(&pick) {
                pick = (pick + 1) % n;
            }
            pick
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k < n")
        };
        chosen.push(pick);
    }
    let mut centers: Vec<(f64, f64)> = chosen.iter().map(|&c| points[c]).collect();
    let mut labels: Vec<usize> = points.iter().map(|&p| nearest(p, &centers)).collect();

    for _ in 0..max_iter {
        let mut sums = vec![(0.0, 0.0, 0.0); k];
        for (i, &l) in labels.iter().enumerate() {
            sums[l].0 += weights[i] * points[i].0;
            sums[l].1 += weights[i] * points[i].1;
            sums[l].2 += weights[i];
        }
        for c in 0..k {
            if sums[c].2 > 0.0 {
                centers[c] = (sums[c].0 / sums[c].2, sums[c].1 / sums[c].2);
            } else {
                // Re-seed an empty cluster at the point farthest from its center.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(points[a], centers[labels[a]])
                            .total_cmp(&sq_dist(points[b], centers[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("nonempty");
                centers[c] = points[far];
                labels[far] = c;
            }
        }
        let next: Vec<usize> = points.iter().map(|&p| nearest(p, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    // Clusters can only be empty here if points coincide; hand them a point.
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    for c in 0..k {
        if counts[c] == 0 {
            let donor = (0..n).find(|&i| counts[labels[i]] > 1).expect("k <= n");
            counts[labels[donor]] -= 1;
            labels[donor] = c;
            counts[c] = 1;
        }
    }

    // Number labels by first occurrence and recompute centroids.
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    let mut sums = vec![(0.0, 0.0, 0.0); k];
    for (i, &l) in labels.iter().enumerate() {
        sums[l].0 += weights[i] * points[i].0;
        sums[l].1 += weights[i] * points[i].1;
        sums[l].2 += weights[i];
    }
    let centroids = sums.iter().map(|s| (s.0 / s.2, s.1 / s.2)).collect();
    Ok(SpatialAssignment { k, labels, centroids })
}

/// Collapses each cluster into a bus at its centroid. The new bus takes the
/// smallest member id. Lines between clusters are merged with ratings and
/// susceptances added; lines inside a cluster disappear. Components keep
/// their series and move to their cluster's bus.
pub fn reduce_network(network: &Network, assignment: &SpatialAssignment) -> Result<Network, SpatialError> {
    if assignment.labels.len() != network.buses.len() {
        return Err(SpatialError::Mismatch {
            expected: network.buses.len(),
            got: assignment.labels.len(),
        });
    }
    let mut cluster_id: Vec<Option<&str>> = vec![None; assignment.k];
    let mut v_nom = vec![0.0f64; assignment.k];
    for (b, &l) in network.buses.iter().zip(&assignment.labels) {
        if cluster_id[l].is_none_or(|id| b.id.as_str() < id) {
            cluster_id[l] = Some(&b.id);
        }
        v_nom[l] = v_nom[l].max(b.v_nom);
    }
    let new_id: Vec<String> = cluster_id.iter().map(|id| id.expect("clusters are nonempty").to_string()).collect();
    let bus_map: BTreeMap<&str, usize> = network
        .buses
        .iter()
        .zip(&assignment.labels)
        .map(|(b, &l)| (b.id.as_str(), l))
        .collect();
    let relabel = |bus: &str| new_id[bus_map[bus]].clone();

    let mut buses: Vec<Bus> = (0..assignment.k)
        .map(|c| Bus {
            id: new_id[c].clone(),
            x: assignment.centroids[c].0,
            y: assignment.centroids[c].1,
            v_nom: v_nom[c],
        })
        .collect();
    buses.sort_by(|a, b| a.id.cmp(&b.id));

    let mut merged: BTreeMap<(usize, usize), Line> = BTreeMap::new();
    let mut sorted_lines: Vec<&Line> = network.lines.iter().collect();
    sorted_lines.sort_by(|a, b| a.id.cmp(&b.id));
    for line in sorted_lines {
        let (c0, c1) = (bus_map[line.bus0.as_str()], bus_map[line.bus1.as_str()]);
        if c0 == c1 {
            continue;
        }
        merged
            .entry((c0.min(c1), c0.max(c1)))
            .and_modify(|l| {
                l.rating += line.rating;
                l.susceptance += line.susceptance;
            })
            .or_insert_with(|| Line {
                bus0: new_id[c0].clone(),
                bus1: new_id[c1].clone(),
                ..line.clone()
            });
    }
    let mut lines: Vec<Line> = merged.into_values().collect();
    lines.sort_by(|a, b| a.id.cmp(&b.id));

    let mut out = Network {
        snapshots: network.snapshots.clone(),
        buses,
        lines,
        generators: network.generators.clone(),
        storage_units: network.storage_units.clone(),
        loads: network.loads.clone(),
    };
    out.generators.iter_mut().for_each(|g| g.bus = relabel(&g.bus));
    out.storage_units.iter_mut().for_each(|s| s.bus = relabel(&s.bus));
    out.loads.iter_mut().for_each(|l| l.bus = relabel(&l.bus));
    Ok(out)
}
