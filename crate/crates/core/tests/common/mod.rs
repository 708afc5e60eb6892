#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use tsam_lopf::lpmodel::{
    build_lp, extract_solution, AggregationDescriptor, DispatchResult, LpProblem, Method,
};
use tsam_lopf::network::Network;
use tsam_lopf::solver::{solve, SolveOptions, SolveResult};

pub const RESIDUAL_TOL: f64 = 1e-6;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub struct Solved {
    pub lp: LpProblem,
    pub result: SolveResult,
    pub values: HashMap<String, f64>,
    pub dispatch: DispatchResult,
}

/// Builds, solves and extracts; panics unless the solve is optimal and the
/// returned point satisfies every LP row.
pub fn solve_network(network: &Network, descriptor: &AggregationDescriptor) -> Solved {
    let lp = build_lp(network, descriptor).expect("build_lp");
    let options = SolveOptions::default();
    let result = solve(&lp, &options);
    assert!(result.is_optimal(), "status {}", result.status);
    let x = result.primal.as_ref().unwrap();
    let violation = lp.max_violation(x);
    assert!(violation <= options.feasibility_tol * 10.0, "max violation {violation:e}");
    let values = result.primal_by_name(&lp).unwrap();
    let dispatch = extract_solution(network, descriptor, &values).expect("extract");
    Solved {
        lp,
        result,
        values,
        dispatch,
    }
}

pub fn solve_identity(network: &Network) -> Solved {
    solve_network(network, &AggregationDescriptor::identity(&network.snapshots.weightings))
}

/// Largest residual of the power-flow model evaluated directly on the
/// dispatch, independent of the emitted LP: bus balance, flow limits,
/// Kirchhoff, dispatch limits, reference angle, SOC bounds and the
/// loss-compounded cyclic SOC recursion.
pub fn replay_residual(network: &Network, descriptor: &AggregationDescriptor, d: &DispatchResult) -> f64 {
    let n_t = network.n_snapshots();
    let mut worst: f64 = 0.0;
    let mut note = |r: f64| worst = worst.max(r);
    let flow = |id: &str| &d.line_flows.iter().find(|s| s.id == id).unwrap().values;
    let angle = |id: &str| &d.voltage_angles.iter().find(|s| s.id == id).unwrap().values;

    for t in 0..n_t {
        for bus in &network.buses {
            let mut injection = 0.0;
            for (g, r) in network.generators.iter().zip(&d.generators) {
                if g.bus == bus.id {
                    injection += r.dispatch[t];
                }
            }
            for (s, r) in network.storage_units.iter().zip(&d.storage_units) {
                if s.bus == bus.id {
                    injection += r.discharge[t] - r.charge[t];
                }
            }
            for l in &network.lines {
                if l.bus0 == bus.id {
                    injection -= flow(&l.id)[t];
                }
                if l.bus1 == bus.id {
                    injection += flow(&l.id)[t];
                }
            }
            let load: f64 = network.loads.iter().filter(|l| l.bus == bus.id).map(|l| l.demand[t]).sum();
            note((injection - load).abs());
        }
        for l in &network.lines {
            let f = flow(&l.id)[t];
            note((f.abs() - l.rating).max(0.0));
            note((f - l.susceptance * (angle(&l.bus0)[t] - angle(&l.bus1)[t])).abs());
        }
        let reference = network.buses.iter().map(|b| &b.id).min().unwrap();
        note(angle(reference)[t].abs());
        for (g, r) in network.generators.iter().zip(&d.generators) {
            note((r.dispatch[t] - g.avail_max[t] * r.capacity).max(0.0));
            note((g.avail_min[t] * r.capacity - r.dispatch[t]).max(0.0));
        }
        for (s, r) in network.storage_units.iter().zip(&d.storage_units) {
            note((-r.discharge[t]).max(0.0));
            note((-r.charge[t]).max(0.0));
            note((r.discharge[t] - s.dispatch_max[t] * r.power_capacity).max(0.0));
            note((r.charge[t] + s.dispatch_min[t] * r.power_capacity).max(0.0));
        }
    }

    // SOC recursion: (snapshot driving step tau, hours it spans).
    let steps: Vec<(usize, u32)> = match descriptor.method {
        Method::CouplingDays => (0..descriptor.period_map.len() * 24)
            .map(|h| {
                let rep = descriptor.period_map[h / 24];
                let slot = descriptor.representatives.iter().position(|&r| r == rep).unwrap();
                (slot * 24 + h % 24, 1)
            })
            .collect(),
        _ => network.snapshots.weightings.iter().copied().enumerate().collect(),
    };
    for (s, r) in network.storage_units.iter().zip(&d.storage_units) {
        assert_eq!(r.soc.len(), steps.len());
        for (tau, &(t, w)) in steps.iter().enumerate() {
            let prev = r.soc[(tau + steps.len() - 1) % steps.len()];
            let w = f64::from(w);
            let expected = (1.0 - s.eta_loss).powf(w) * prev + w * s.eta_char * r.charge[t] - w / s.eta_dis * r.discharge[t];
            note((r.soc[tau] - expected).abs());
            note((-r.soc[tau]).max(0.0));
            note((r.soc[tau] - s.max_hours * r.power_capacity).max(0.0));
        }
    }
    worst
}

pub mod oracle {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tsam_lopf::lpmodel::{LpProblem, Relation};

    /// A random LP over a finite box, feasible by construction: every row is
    /// satisfied by an interior point `x0`. Roughly one row in eight is an
    /// equality through `x0`. With `degenerate`, inequality rows are tight at
    /// a box corner instead, so many vertices coincide.
    pub fn random_lp(seed: u64, degenerate: bool) -> LpProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=8);
        let mut lp = LpProblem::new(format!("rand{seed}"));
        let mut x0 = Vec::with_capacity(n);
        for j in 0..n {
            let lo = rng.random_range(-5.0..0.0f64).round();
            let hi = lo + rng.random_range(1.0..10.0f64).round();
            let cost = rng.random_range(-10.0..10.0f64);
            lp.add_variable(format!("x{j}"), lo, hi, cost).unwrap();
            x0.push(if degenerate { lo } else { rng.random_range(lo..hi) });
        }
        for i in 0..m {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.random_bool(0.7) {
                    coeffs.push((j, rng.random_range(-5.0..5.0f64)));
                }
            }
            let activity: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
            let (relation, rhs) = if rng.random_bool(0.125) {
                (Relation::Eq, activity)
            } else {
                let slack = if degenerate { 0.0 } else { rng.random_range(0.0..3.0) };
                if rng.random_bool(0.5) {
                    (Relation::Le, activity + slack)
                } else {
                    (Relation::Ge, activity - slack)
                }
            };
            lp.add_constraint(format!("r{i}"), coeffs, relation, rhs).unwrap();
        }
        lp
    }

    fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
            if a[p][c].abs() < 1e-10 {
                return None;
            }
            a.swap(c, p);
            b.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = combinations(n - 1, k);
        for mut c in combinations(n - 1, k - 1) {
            c.push(n - 1);
            out.push(c);
        }
        out
    }

    /// Minimum objective over all basic feasible solutions, or `None` if no
    /// vertex is feasible. Variable boxes must be finite.
    pub fn vertex_minimum(lp: &LpProblem) -> Option<f64> {
        let n = lp.n_variables();
        let m = lp.n_constraints();
        let vars = lp.variables();
        let rows = lp.constraints();
        let dense: Vec<Vec<f64>> = rows
            .iter()
            .map(|c| {
                let mut r = vec![0.0; n];
                for &(j, a) in &c.coeffs {
                    r[j] = a;
                }
                r
            })
            .collect();
        let mut best: Option<f64> = None;
        for s in 0..=m.min(n) {
            for active in combinations(m, s) {
                for free in combinations(n, s) {
                    let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).collect();
                    for mask in 0..(1u32 << fixed.len()) {
                        let mut x = vec![0.0; n];
                        for (b, &j) in fixed.iter().enumerate() {
                            x[j] = if mask >> b & 1 == 1 { vars[j].upper } else { vars[j].lower };
                        }
                        let a: Vec<Vec<f64>> = active.iter().map(|&i| free.iter().map(|&j| dense[i][j]).collect()).collect();
                        let b: Vec<f64> = active
                            .iter()
                            .map(|&i| rows[i].rhs - fixed.iter().map(|&j| dense[i][j] * x[j]).sum::<f64>())
                            .collect();
                        let Some(sol) = solve_square(a, b) else { continue };
                        for (&j, v) in free.iter().zip(sol) {
                            x[j] = v;
                        }
                        if lp.max_violation(&x) <= 1e-9 {
                            let z = lp.objective_value(&x);
                            best = Some(best.map_or(z, |b: f64| b.min(z)));
                        }
                    }
                }
            }
        }
        best
    }
}
