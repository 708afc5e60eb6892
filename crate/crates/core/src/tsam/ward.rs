use serde::{Deserialize, Serialize};

use super::{TimeSeriesMatrix, TsamError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjacency {
    /// Any two clusters may merge.
    None,
    /// Only temporally consecutive clusters may merge.
    Chain,
}

/// One agglomeration step. Clusters are identified by their smallest member
/// period; the merged cluster keeps the smaller id of the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    /// Increase in total within-cluster sum of squares.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub n_periods: usize,
    pub k: usize,
    /// Cluster label per period; labels are numbered in order of each
    /// cluster's first period.
    pub labels: Vec<usize>,
    pub merges: Vec<Merge>,
}

impl ClusterAssignment {
    pub fn members(&self, label: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &l)| l == label).map(|(p, _)| p)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Flattens `period_length` consecutive rows into one vector per period.
pub fn period_vectors(matrix: &TimeSeriesMatrix, period_length: usize) -> Result<Vec<Vec<f64>>, TsamError> {
    if period_length == 0 || matrix.n_rows % period_length != 0 {
        return Err(TsamError::Indivisible {
            rows: matrix.n_rows,
            period_length,
        });
    }
    Ok((0..matrix.n_rows / period_length)
        .map(|d| {
            (d * period_length..(d + 1) * period_length)
                .flat_map(|t| matrix.row(t))
                .collect()
        })
        .collect())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ward merge cost of two clusters given their sizes and centroids.
fn ward_cost(na: f64, ca: &[f64], nb: f64, cb: &[f64]) -> f64 {
    na * nb / (na + nb) * sq_dist(ca, cb)
}

/// Agglomerative Ward clustering of the matrix' periods down to `k` clusters.
pub fn ward_cluster(
    matrix: &TimeSeriesMatrix,
    period_length: usize,
    k: usize,
    adjacency: Adjacency,
) -> Result<ClusterAssignment, TsamError> {
    let vectors = period_vectors(matrix, period_length)?;
    ward_cluster_vectors(&vectors, k, adjacency)
}

/// Ward clustering on explicit period vectors.
pub fn ward_cluster_vectors(
    vectors: &[Vec<f64>],
    k: usize,
    adjacency: Adjacency,
) -> Result<ClusterAssignment, TsamError> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(TsamError::KOutOfRange { k, max: n });
    }
    let (parent, merges) = match adjacency {
        Adjacency::None => ward_free(vectors, k),
        Adjacency::Chain => ward_chain(vectors, k),
    };
    Ok(assignment_from_parents(n, k, parent, merges))
}

fn assignment_from_parents(n: usize, k: usize, parent: Vec<usize>, merges: Vec<Merge>) -> ClusterAssignment {
    let root = |mut p: usize| {
        while parent[p] != p {
            p = parent[p];
        }
        p
    };
    let mut label_of_root = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for p in 0..n {
        let r = root(p);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels.push(label_of_root[r]);
    }
    debug_assert_eq!(next, k);
    ClusterAssignment {
        n_periods: n,
        k,
        labels,
        merges,
    }
}

/// Unconstrained Ward with the Lance-Williams update on merge costs.
fn ward_free(vectors: &[Vec<f64>], k: usize) -> (Vec<usize>, Vec<Merge>) {
    let n = vectors.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut size = vec![1.0f64; n];
    let mut active = vec![true; n];
    // cost[i][j] for i < j.
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            cost[i][j] = ward_cost(1.0, &vectors[i], 1.0, &vectors[j]);
        }
    }
    let mut merges = Vec::with_capacity(n - k);
    for _ in 0..n - k {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if cost[i][j] < best.2 {
                    best = (i, j, cost[i][j]);
                }
            }
        }
        let (a, b, d_ab) = best;
        let (na, nb) = (size[a], size[b]);
        for m in (0..n).filter(|&m| active[m] && m != a && m != b) {
            let nm = size[m];
            let d_am = cost[a.min(m)][a.max(m)];
            let d_bm = cost[b.min(m)][b.max(m)];
            cost[a.min(m)][a.max(m)] = ((nm + na) * d_am + (nm + nb) * d_bm - nm * d_ab) / (nm + na + nb);
        }
        active[b] = false;
        parent[b] = a;
        size[a] = na + nb;
        merges.push(Merge { a, b, cost: d_ab });
    }
    (parent, merges)
}

/// Ward restricted to neighbouring segments of the time axis. Costs are
/// recomputed from segment centroids, since a segment's neighbours change
/// with every merge.
fn ward_chain(vectors: &[Vec<f64>], k: usize) -> (Vec<usize>, Vec<Merge>) {
    let n = vectors.len();
    let dim = vectors.first().map_or(0, Vec::len);
    let mut parent: Vec<usize> = (0..n).collect();
    // Active segments in time order, by their first period.
    let mut start: Vec<usize> = (0..n).collect();
    let mut count: Vec<f64> = vec![1.0; n];
    let mut centroid: Vec<Vec<f64>> = vectors.to_vec();
    let mut pair_cost: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| ward_cost(1.0, &vectors[i], 1.0, &vectors[i + 1]))
        .collect();
    let mut merges = Vec::with_capacity(n - k);
    while start.len() > k {
        let mut best = 0;
        for (i, &c) in pair_cost.iter().enumerate() {
            if c < pair_cost[best] {
                best = i;
            }
        }
        let (a, b) = (start[best], start[best + 1]);
        merges.push(Merge {
            a,
            b,
            cost: pair_cost[best],
        });
        parent[b] = a;
        let (na, nb) = (count[best], count[best + 1]);
        let merged: Vec<f64> = (0..dim)
            .map(|d| (na * centroid[best][d] + nb * centroid[best + 1][d]) / (na + nb))
            .collect();
        centroid[best] = merged;
        count[best] = na + nb;
        start.remove(best + 1);
        count.remove(best + 1);
        centroid.remove(best + 1);
        pair_cost.remove(best);
        if best > 0 {
            pair_cost[best - 1] = ward_cost(count[best - 1], &centroid[best - 1], count[best], &centroid[best]);
        }
        if best + 1 < start.len() {
            pair_cost[best] = ward_cost(count[best], &centroid[best], count[best + 1], &centroid[best + 1]);
        }
    }
    (parent, merges)
}

/// For each cluster, in label order, the member period closest to the
/// cluster centroid (ties to the smallest period index).
pub fn select_medoids_vectors(assignment: &ClusterAssignment, vectors: &[Vec<f64>]) -> Vec<usize> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; assignment.k];
    let sizes = assignment.sizes();
    for (p, &l) in assignment.labels.iter().enumerate() {
        for (s, v) in sums[l].iter_mut().zip(&vectors[p]) {
            *s += v;
        }
    }
    let mut best: Vec<(usize, f64)> = vec![(usize::MAX, f64::INFINITY); assignment.k];
    for (p, &l) in assignment.labels.iter().enumerate() {
        let n = sizes[l] as f64;
        let d: f64 = vectors[p]
            .iter()
            .zip(&sums[l])
            .map(|(v, s)| (v - s / n) * (v - s / n))
            .sum();
        if d < best[l].1 {
            best[l] = (p, d);
        }
    }
    best.into_iter().map(|(p, _)| p).collect()
}

pub fn select_medoids(
    assignment: &ClusterAssignment,
    matrix: &TimeSeriesMatrix,
    period_length: usize,
) -> Result<Vec<usize>, TsamError> {
    let vectors = period_vectors(matrix, period_length)?;
    Ok(select_medoids_vectors(assignment, &vectors))
}
