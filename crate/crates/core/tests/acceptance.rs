//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances are pinned below.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsam_lopf::harness::{run_experiment, ExperimentConfig};
use tsam_lopf::indicators::{aoe, pearson_by_kind, IndicatorReport};
use tsam_lopf::lpmodel::{build_lp, AggregationDescriptor, LpProblem, Method};
use tsam_lopf::network::{load_network, synthesize_network, Network};
use tsam_lopf::solver::{export_mps, import_mps, solve, SolveOptions};
use tsam_lopf::spatial::{kmeans_buses, reduce_network};
use tsam_lopf::tsam::{aggregate, ward_cluster_vectors, Adjacency, ColumnKind};

use common::oracle::{random_lp, vertex_minimum};
use common::{fixture, replay_residual, solve_identity, solve_network, RESIDUAL_TOL};

const IDENTITY_AOE_TOL: f64 = 1e-6;
const ORACLE_OBJ_TOL: f64 = 1e-6;
const MPS_OBJ_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn within(limit: Duration, start: Instant) -> Result<f64, String> {
    let s = start.elapsed().as_secs_f64();
    if s < limit.as_secs_f64() {
        Ok(s)
    } else {
        Err(format!("took {s:.1} s, limit {} s", limit.as_secs()))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn identity_exactness() -> Outcome {
    let start = Instant::now();
    let net = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    let z_ref = solve_identity(&net).result.objective;
    let mut detail = Vec::new();
    for (method, k) in [(Method::Chronological, 168), (Method::CouplingDays, 7)] {
        let (agg, desc) = aggregate(&net, method, k).map_err(|e| e.to_string())?;
        let z = solve_network(&agg, &desc).result.objective;
        let a = aoe(z, z_ref).map_err(|e| e.to_string())?;
        ensure(a.abs() <= IDENTITY_AOE_TOL * 100.0, || format!("{method} k={k}: AOE {a:e} %"))?;
        detail.push(format!("{method} k={k} AOE={a:e}%"));
    }
    let s = within(Duration::from_secs(30), start)?;
    Ok(format!("{}, {s:.1} s", detail.join(", ")))
}

fn lp_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let lp = random_lp(seed, false);
        let want = vertex_minimum(&lp).ok_or_else(|| format!("seed {seed}: oracle found no vertex"))?;
        let got = solve(&lp, &SolveOptions::default());
        ensure(got.is_optimal(), || format!("seed {seed}: status {}", got.status))?;
        let d = rel_diff(got.objective, want);
        ensure(d <= ORACLE_OBJ_TOL, || format!("seed {seed}: {} vs {want}", got.objective))?;
        worst = worst.max(d);
    }
    let s = within(Duration::from_secs(60), start)?;
    Ok(format!("200 LPs, worst rel diff {worst:.1e}, {s:.1} s"))
}

fn residual_replay() -> Outcome {
    let two_bus = load_network(fixture("two_bus")).map_err(|e| e.to_string())?;
    let synth = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    let mut cases: Vec<(String, Network, AggregationDescriptor)> = vec![
        ("two_bus".into(), two_bus.clone(), AggregationDescriptor::identity(&two_bus.snapshots.weightings)),
        ("synth(3,168,1)".into(), synth.clone(), AggregationDescriptor::identity(&synth.snapshots.weightings)),
    ];
    for (method, k) in [(Method::Chronological, 12), (Method::CouplingDays, 2), (Method::CouplingDays, 5)] {
        let (agg, desc) = aggregate(&synth, method, k).map_err(|e| e.to_string())?;
        cases.push((format!("{method} k={k}"), agg, desc));
    }
    let mut worst: f64 = 0.0;
    for (name, net, desc) in &cases {
        let solved = solve_network(net, desc);
        let r = replay_residual(net, desc, &solved.dispatch);
        ensure(r < RESIDUAL_TOL, || format!("{name}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("{} solved instances, worst residual {worst:.1e}", cases.len()))
}

fn sweep_ks(hours: usize) -> Vec<(Method, usize)> {
    let days = hours / 24;
    let mut ks: Vec<(Method, usize)> = (1..=hours).map(|k| (Method::Chronological, k)).collect();
    ks.extend((1..=days).map(|k| (Method::CouplingDays, k)));
    ks
}

fn weight_conservation(fig5: &[(Method, usize)]) -> Outcome {
    let mut checked = 0;
    let small = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    let large = synthesize_network(5, 720, 2).map_err(|e| e.to_string())?;
    let cases = sweep_ks(168).into_iter().map(|c| (&small, c)).chain(fig5.iter().map(|&c| (&large, c)));
    for (net, (method, k)) in cases {
        let (agg, desc) = aggregate(net, method, k).map_err(|e| e.to_string())?;
        let hours = net.n_snapshots() as u32;
        let total: u32 = desc.weights.iter().sum();
        let snapshots: u32 = agg.snapshots.weightings.iter().sum();
        ensure(total == hours && snapshots == hours, || {
            format!("{method} k={k}: weights {total}, snapshot weightings {snapshots}, horizon {hours}")
        })?;
        checked += 1;
    }
    Ok(format!("{checked} (method, k) pairs, exact"))
}

fn sse(values: &[f64], labels: &[usize], k: usize) -> f64 {
    (0..k)
        .map(|c| {
            let m: Vec<f64> = values.iter().zip(labels).filter(|(_, &l)| l == c).map(|(&v, _)| v).collect();
            let mean = m.iter().sum::<f64>() / m.len() as f64;
            m.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        })
        .sum()
}

fn brute_force_sse(values: &[f64], k: usize) -> f64 {
    fn walk(i: usize, labels: &mut Vec<usize>, used: usize, k: usize, values: &[f64], best: &mut f64) {
        if i == values.len() {
            if used == k {
                *best = best.min(sse(values, labels, k));
            }
            return;
        }
        for l in 0..=used.min(k - 1) {
            labels.push(l);
            walk(i + 1, labels, used.max(l + 1), k, values, best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(0, &mut Vec::new(), 0, k, values, &mut best);
    best
}

/// Scalars drawn as k tight groups on a coarse grid, shuffled.
fn grouped_scalars(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut values = Vec::new();
    for g in 0..k {
        for _ in 0..rng.random_range(1..=8 / k) {
            values.push(g as f64 * 100.0 + rng.random::<f64>());
        }
    }
    for i in (1..values.len()).rev() {
        values.swap(i, rng.random_range(0..=i));
    }
    values
}

fn clustering_oracle() -> Outcome {
    let scalars = |v: &[f64]| v.iter().map(|&x| vec![x]).collect::<Vec<_>>();
    let ward_sse = |values: &[f64], k: usize| -> Result<f64, String> {
        let a = ward_cluster_vectors(&scalars(values), k, Adjacency::None).map_err(|e| e.to_string())?;
        Ok(sse(values, &a.labels, k))
    };
    let (mut unstructured, mut unstructured_miss, mut worst_excess) = (0, 0, 0.0f64);
    let (mut grouped, mut grouped_miss) = (0, 0);
    let mut chain_broken = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in [2, 3] {
            let n = rng.random_range(k..=8);
            let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let (got, want) = (ward_sse(&values, k)?, brute_force_sse(&values, k));
            unstructured += 1;
            if got > want + 1e-12 * want.max(1.0) {
                unstructured_miss += 1;
                worst_excess = worst_excess.max(got / want - 1.0);
            }
            let values = grouped_scalars(&mut rng, k);
            let (got, want) = (ward_sse(&values, k)?, brute_force_sse(&values, k));
            grouped += 1;
            if got > want + 1e-12 * want.max(1.0) {
                grouped_miss += 1;
            }
        }
        let n = rng.random_range(2..40);
        let dim = rng.random_range(1..4);
        let values: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let k = rng.random_range(1..=n);
        let a = ward_cluster_vectors(&values, k, Adjacency::Chain).map_err(|e| e.to_string())?;
        let contiguous = (0..k).all(|l| {
            let members: Vec<usize> = a.members(l).collect();
            !members.is_empty() && members[members.len() - 1] - members[0] + 1 == members.len()
        });
        if !contiguous {
            chain_broken.push(seed);
        }
    }
    let detail = format!(
        "unstructured {}/{unstructured} match (worst SSE excess {:.1}%), grouped {}/{grouped} match, chain contiguous on {}/100 seeds",
        unstructured - unstructured_miss,
        worst_excess * 100.0,
        grouped - grouped_miss,
        100 - chain_broken.len()
    );
    if unstructured_miss == 0 && grouped_miss == 0 && chain_broken.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const FIG5_CHRONO: [usize; 5] = [12, 90, 180, 360, 720];
const FIG5_COUPLING: [usize; 3] = [2, 5, 10];

fn fig5_sweep() -> Result<(Vec<IndicatorReport>, f64), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let toml = format!(
        "output_dir = {:?}\nmethods = [\"chronological\", \"coupling_days\"]\nrepetitions = 1\n[network]\nsynth = {{ buses = 5, hours = 720, seed = 2 }}\n[k]\nchronological = {FIG5_CHRONO:?}\ncoupling_days = {FIG5_COUPLING:?}\n",
        dir.path().display().to_string()
    );
    let config = ExperimentConfig::from_toml(&toml).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let reports = run_experiment(&config).map_err(|e| e.to_string())?;
    Ok((reports, start.elapsed().as_secs_f64()))
}

fn fig5(reports: &[IndicatorReport], seconds: f64) -> Outcome {
    let abs_aoe = |k: usize| -> Result<f64, String> {
        let r = reports
            .iter()
            .find(|r| r.method == Method::Chronological && r.k == k)
            .ok_or_else(|| format!("no chronological k={k} row"))?;
        r.aoe.map(f64::abs).ok_or_else(|| format!("k={k} failed: {:?}", r.error))
    };
    ensure(abs_aoe(720)? == 0.0, || format!("|AOE| at k=720 is {}", abs_aoe(720).unwrap_or(f64::NAN)))?;
    let at_12 = abs_aoe(12)?;
    let mid = [90, 180, 360].iter().map(|&k| abs_aoe(k)).collect::<Result<Vec<_>, _>>()?;
    let max_mid = mid.iter().cloned().fold(0.0, f64::max);
    ensure(max_mid < at_12, || format!("max |AOE| over 90/180/360 = {max_mid:.3} not < {at_12:.3} at k=12"))?;
    ensure(seconds < 600.0, || format!("sweep took {seconds:.0} s"))?;
    let coupling: Vec<String> = reports
        .iter()
        .filter(|r| r.method == Method::CouplingDays)
        .map(|r| match r.aoe {
            Some(a) => format!("k={} {a:.3}%", r.k),
            None => format!("k={} failed", r.k),
        })
        .collect();
    Ok(format!(
        "|AOE| k=12 {at_12:.3}%, max(90,180,360) {max_mid:.3}%, coupling [{}], {seconds:.0} s",
        coupling.join(", ")
    ))
}

fn fig4(reports: &[IndicatorReport]) -> Outcome {
    let mut detail = Vec::new();
    for r in reports.iter().filter(|r| r.method == Method::CouplingDays && r.k <= 5) {
        let (load, wind) = (r.pearson_load, r.pearson_wind);
        let (Some(load), Some(wind)) = (load, wind) else {
            return Err(format!("coupling k={}: missing correlation ({:?})", r.k, r.error));
        };
        ensure(load > wind, || format!("coupling k={}: load {load:.4} <= wind {wind:.4}", r.k))?;
        detail.push(format!("k={} load {load:.3} > wind {wind:.3}", r.k));
    }
    ensure(!detail.is_empty(), || "no small-k coupling rows".into())?;
    let net = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    for (method, k) in [(Method::Chronological, 168), (Method::CouplingDays, 7)] {
        let (agg, desc) = aggregate(&net, method, k).map_err(|e| e.to_string())?;
        let p = pearson_by_kind(&net, &agg, &desc).map_err(|e| e.to_string())?;
        for kind in [ColumnKind::Load, ColumnKind::Wind, ColumnKind::Solar] {
            let r = p.get(&kind).copied().unwrap_or(f64::NAN);
            ensure((r - 1.0).abs() < 1e-12, || format!("identity {method} {kind:?}: {r}"))?;
        }
    }
    Ok(format!("{}; identity = 1 for load, wind, solar", detail.join(", ")))
}

fn coupling_structure() -> Outcome {
    let net = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    let count = |lp: &LpProblem, rows: bool, prefix: &str, id: &str| {
        let head = format!("{prefix}[{id}][");
        if rows {
            lp.constraints().iter().filter(|c| c.name.starts_with(&head)).count()
        } else {
            lp.variables().iter().filter(|v| v.name.starts_with(&head)).count()
        }
    };
    for k in 1..7 {
        let (agg, desc) = aggregate(&net, Method::CouplingDays, k).map_err(|e| e.to_string())?;
        let lp = build_lp(&agg, &desc).map_err(|e| e.to_string())?;
        for s in &agg.storage_units {
            let soc = count(&lp, true, "soc", &s.id);
            let hp = count(&lp, false, "hp", &s.id);
            let hm = count(&lp, false, "hm", &s.id);
            ensure(soc == 168 && hp == 24 * k && hm == 24 * k, || {
                format!("k={k} {}: soc {soc}, hp {hp}, hm {hm}", s.id)
            })?;
        }
    }
    Ok("synth(3,168,1) k=1..6: 168 SOC rows, 24k charge and discharge columns per storage".into())
}

fn spatial() -> Outcome {
    let totals = |n: &Network| {
        (
            n.loads.iter().flat_map(|l| &l.demand).sum::<f64>(),
            n.generators.iter().map(|g| g.p_nom_max).sum::<f64>(),
            n.generators.iter().map(|g| g.p_nom_min).sum::<f64>(),
            n.storage_units.iter().map(|s| s.h_nom_max * s.max_hours).sum::<f64>(),
        )
    };
    for seed in 0..10 {
        let net = synthesize_network(6, 48, seed).map_err(|e| e.to_string())?;
        for k in 1..=6 {
            let a = kmeans_buses(&net, k, seed, 300).map_err(|e| e.to_string())?;
            let reduced = reduce_network(&net, &a).map_err(|e| e.to_string())?;
            ensure(totals(&net) == totals(&reduced), || format!("seed {seed} k={k}: totals changed"))?;
        }
    }
    let net = synthesize_network(5, 168, 3).map_err(|e| e.to_string())?;
    let reduced = reduce_network(&net, &kmeans_buses(&net, 1, 0, 300).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let full = solve_identity(&net).result.objective;
    let single = solve_identity(&reduced).result.objective;
    let pct = (single - full) / full * 100.0;
    Ok(format!("conserved over 60 reductions; synth(5,168,3) k=1 objective differs by {pct:+.3}%"))
}

fn mps_round_trip() -> Outcome {
    let mut lps: Vec<(String, LpProblem)> = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(fixture(""))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let mut skipped = Vec::new();
    for path in entries {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match load_network(&path) {
            Ok(net) => lps.push((
                name,
                build_lp(&net, &AggregationDescriptor::identity(&net.snapshots.weightings)).map_err(|e| e.to_string())?,
            )),
            Err(_) => skipped.push(name),
        }
    }
    let synth = synthesize_network(3, 168, 1).map_err(|e| e.to_string())?;
    lps.push((
        "synth(3,168,1)".into(),
        build_lp(&synth, &AggregationDescriptor::identity(&synth.snapshots.weightings)).map_err(|e| e.to_string())?,
    ));
    let (agg, desc) = aggregate(&synth, Method::CouplingDays, 2).map_err(|e| e.to_string())?;
    lps.push(("synth(3,168,1) coupling k=2".into(), build_lp(&agg, &desc).map_err(|e| e.to_string())?));
    for (name, lp) in &lps {
        let imported = import_mps(&export_mps(lp).text).map_err(|e| format!("{name}: {e}"))?;
        let direct = solve(lp, &SolveOptions::default());
        let via = solve(&imported, &SolveOptions::default());
        ensure(direct.is_optimal() && via.is_optimal(), || format!("{name}: {} / {}", direct.status, via.status))?;
        let d = rel_diff(direct.objective, via.objective);
        ensure(d <= MPS_OBJ_TOL, || format!("{name}: {} vs {}", direct.objective, via.objective))?;
    }
    let names: Vec<&str> = lps.iter().map(|(n, _)| n.as_str()).collect();
    Ok(format!("{} (invalid fixtures not loadable: {})", names.join(", "), skipped.join(", ")))
}

fn report(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS {name}: {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {name}: {why}");
            false
        }
    }
}

fn main() {
    let fig5_cells: Vec<(Method, usize)> = FIG5_CHRONO
        .iter()
        .map(|&k| (Method::Chronological, k))
        .chain(FIG5_COUPLING.iter().map(|&k| (Method::CouplingDays, k)))
        .collect();
    let sweep = catch_unwind(fig5_sweep).unwrap_or_else(|_| Err("sweep panicked".into()));

    let results = [
        report("identity aggregation exactness", identity_exactness),
        report("LP oracle equivalence", lp_oracle),
        report("formulation residuals", residual_replay),
        report("weight conservation", || weight_conservation(&fig5_cells)),
        report("clustering oracle", clustering_oracle),
        report("error shrinks with more representatives", || {
            sweep.clone().and_then(|(r, s)| fig5(&r, s))
        }),
        report("load correlation exceeds wind correlation", || sweep.clone().and_then(|(r, _)| fig4(&r))),
        report("coupling LP structure", coupling_structure),
        report("spatial reduction", spatial),
        report("MPS round trip", mps_round_trip),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
