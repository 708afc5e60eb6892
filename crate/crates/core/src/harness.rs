//! Experiment driver: solves a reference network, then sweeps aggregation
//! methods and representative counts and reports indicators per run.
//!
//! Configuration is TOML:
//!
//! ```toml
//! output_dir = "out"            # relative paths resolve against the config file
//! methods = ["chronological", "coupling_days"]
//! repetitions = 3               # solves per run for timing, median reported
//! workers = 1                   # concurrent (method, k) runs
//! seed = 0                      # default seed for spatial clustering
//! renewable_scaling = "per_carrier"   # or "shared"
//!
//! [network]                     # exactly one of path / synth
//! synth = { buses = 5, hours = 720, seed = 2 }
//! # path = "fixtures/two_bus"
//!
//! [k]
//! chronological = [12, 90, 180, 360, 720]
//! coupling_days = [1, 5, 15, 30]
//!
//! [spatial]                     # optional bus reduction before the sweep
//! k = 1
//! seed = 3
//!
//! [solver]
//! kind = "builtin"              # or "external" with command = "... {mps} {sol}"
//! feasibility_tol = 1e-7
//! optimality_tol = 1e-7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::indicators::{self, IndicatorReport};
use crate::lpmodel::{build_lp, extract_solution, AggregationDescriptor, DispatchResult, LpProblem, Method};
use crate::network::{load_network, synthesize_network, Carrier, Network, NetworkError};
use crate::solver::{default_solver, ExternalSolver, LpSolver, SolveOptions, SolveResult};
use crate::spatial::{kmeans_buses, reduce_network};
use crate::tsam::{aggregate_with, AggregateOptions, ColumnKind, RenewableScaling};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("reference run failed: {0}")]
    Reference(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub buses: usize,
    pub hours: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSource {
    pub path: Option<PathBuf>,
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialConfig {
    pub k: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    300
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub kind: SolverKind,
    pub command: Option<String>,
    #[serde(default = "default_tol")]
    pub feasibility_tol: f64,
    #[serde(default = "default_tol")]
    pub optimality_tol: f64,
    pub max_iterations: Option<usize>,
    pub threads: Option<usize>,
}

fn default_tol() -> f64 {
    1e-7
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: SolverKind::Builtin,
            command: None,
            feasibility_tol: default_tol(),
            optimality_tol: default_tol(),
            max_iterations: None,
            threads: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        let defaults = SolveOptions::default();
        SolveOptions {
            feasibility_tol: self.feasibility_tol,
            optimality_tol: self.optimality_tol,
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            threads: self.threads,
        }
    }

    /// The configured solver; `TSAM_LOPF_SOLVER` takes precedence.
    pub fn solver(&self) -> Result<Box<dyn LpSolver>, HarnessError> {
        let options = self.options();
        match self.kind {
            SolverKind::Builtin => Ok(default_solver(&options)),
            SolverKind::External => {
                let from_env = default_solver(&options);
                if from_env.name() != "builtin" {
                    return Ok(from_env);
                }
                let template = self
                    .command
                    .clone()
                    .ok_or_else(|| HarnessError::Config("solver.kind = \"external\" needs solver.command".into()))?;
                Ok(Box::new(ExternalSolver { template, options }))
            }
        }
    }
}

fn default_repetitions() -> usize {
    3
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub k: BTreeMap<Method, Vec<usize>>,
    pub spatial: Option<SpatialConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub renewable_scaling: RenewableScaling,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.check_static()?;
        Ok(config)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &mut config.network.path {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        Ok(config)
    }

    fn check_static(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.network.path.is_some() == self.network.synth.is_some() {
            return bad("[network] needs exactly one of path or synth".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        for m in &self.methods {
            if *m != Method::None && self.k.get(m).is_none_or(Vec::is_empty) {
                return bad(format!("no k values for method {m}"));
            }
        }
        if self.solver.kind == SolverKind::External && self.solver.command.is_none() {
            return bad("solver.kind = \"external\" needs solver.command".into());
        }
        Ok(())
    }

    /// Checks k values against the horizon of the network.
    pub fn check_against(&self, network: &Network) -> Result<(), HarnessError> {
        let hours = network.n_snapshots();
        for m in &self.methods {
            let max = match m {
                Method::None => continue,
                Method::Chronological => hours,
                Method::CouplingDays => hours / crate::lpmodel::HOURS_PER_DAY,
            };
            if let Some(&k) = self.k[m].iter().find(|&&k| k == 0 || k > max) {
                return Err(HarnessError::Config(format!("k = {k} for {m} outside 1..={max}")));
            }
        }
        if let Some(s) = &self.spatial {
            if s.k == 0 || s.k > network.buses.len() {
                return Err(HarnessError::Config(format!(
                    "spatial k = {} outside 1..={}",
                    s.k,
                    network.buses.len()
                )));
            }
        }
        Ok(())
    }

    /// The network the sweep runs on, after optional spatial reduction.
    pub fn load_network(&self) -> Result<Network, HarnessError> {
        let network = match (&self.network.path, &self.network.synth) {
            (Some(p), _) => load_network(p)?,
            (None, Some(s)) => synthesize_network(s.buses, s.hours, s.seed)?,
            (None, None) => unreachable!("checked when parsing"),
        };
        self.check_against(&network)?;
        match &self.spatial {
            None => Ok(network),
            Some(s) => {
                let assignment = kmeans_buses(&network, s.k, s.seed.unwrap_or(self.seed), s.max_iter)
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                reduce_network(&network, &assignment).map_err(|e| HarnessError::Config(e.to_string()))
            }
        }
    }

    /// (method, k) runs in report order: method, then k ascending.
    pub fn cells(&self, hours: usize) -> Vec<(Method, usize)> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        let mut cells = Vec::new();
        for m in methods {
            let mut ks = if m == Method::None { vec![hours] } else { self.k[&m].clone() };
            ks.sort_unstable();
            ks.dedup();
            cells.extend(ks.into_iter().map(|k| (m, k)));
        }
        cells
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Outcome of one timed solve job.
pub struct TimedRun {
    pub network: Network,
    pub descriptor: AggregationDescriptor,
    pub lp: LpProblem,
    pub result: SolveResult,
    /// Median solve time over the repetitions.
    pub solve_time: f64,
    /// Aggregation plus LP build time.
    pub build_time: f64,
}

/// Aggregates, builds and solves `repetitions` times.
pub fn timed_run(
    network: &Network,
    method: Method,
    k: usize,
    options: AggregateOptions,
    solver: &dyn LpSolver,
    repetitions: usize,
) -> Result<TimedRun, String> {
    let start = Instant::now();
    let (aggregated, descriptor) = aggregate_with(network, method, k, options).map_err(|e| e.to_string())?;
    let lp = build_lp(&aggregated, &descriptor).map_err(|e| e.to_string())?;
    let build_time = start.elapsed().as_secs_f64();
    let mut times = Vec::with_capacity(repetitions);
    let mut first = None;
    for _ in 0..repetitions.max(1) {
        let r = solver.solve(&lp).map_err(|e| e.to_string())?;
        if !r.is_optimal() {
            return Err(format!("solver status {}", r.status));
        }
        times.push(r.wall_time);
        first.get_or_insert(r);
    }
    Ok(TimedRun {
        network: aggregated,
        descriptor,
        lp,
        result: first.expect("at least one repetition"),
        solve_time: median(times),
        build_time,
    })
}

fn lp_names(run: &TimedRun) -> Result<std::collections::HashMap<String, f64>, String> {
    run.result.primal_by_name(&run.lp).ok_or_else(|| "no primal values".into())
}

fn report_for(reference: &Network, reference_run: &TimedRun, run: &TimedRun, method: Method, k: usize) -> Result<IndicatorReport, String> {
    let z_ref = reference_run.result.objective;
    let t_ref = reference_run.solve_time;
    let z_agg = run.result.objective;
    let dispatch = extract_solution(&run.network, &run.descriptor, &lp_names(run)?).map_err(|e| e.to_string())?;
    let pearson =
        indicators::pearson_by_kind(reference, &run.network, &run.descriptor).map_err(|e| e.to_string())?;
    let curtailment = indicators::curtailment(&dispatch, &run.network).map_err(|e| e.to_string())?;
    let shares = indicators::carrier_shares(&dispatch, &run.network).map_err(|e| e.to_string())?;
    let p = |kind| pearson.get(&kind).copied();
    Ok(IndicatorReport {
        method,
        k,
        status: "ok".into(),
        error: None,
        aoe: Some(indicators::aoe(z_ref, z_agg).map_err(|e| e.to_string())?),
        atr: indicators::atr(t_ref, run.solve_time).ok(),
        pearson_load: p(ColumnKind::Load),
        pearson_wind: p(ColumnKind::Wind),
        pearson_solar: p(ColumnKind::Solar),
        one_minus_pearson_load: p(ColumnKind::Load).map(|r| 1.0 - r),
        one_minus_pearson_wind: p(ColumnKind::Wind).map(|r| 1.0 - r),
        one_minus_pearson_solar: p(ColumnKind::Solar).map(|r| 1.0 - r),
        curtailment_wind: curtailment.get(&Carrier::Wind).copied(),
        curtailment_solar: curtailment.get(&Carrier::Solar).copied(),
        t_ref_s: t_ref,
        t_agg_s: Some(run.solve_time),
        t_build_s: Some(run.build_time),
        z_ref,
        z_agg: Some(z_agg),
        shares: shares.into_iter().map(|(c, s)| (c.as_str().to_string(), s)).collect(),
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs the sweep described by `config`.
///
/// The reference network is solved first, alone, and is the only reference
/// run of the experiment. Each (method, k) run then aggregates, builds,
/// solves and is compared against it; a failing run yields a `failed` row
/// and the sweep continues. Each finished row is also written to
/// `output_dir/runs/<method>_<k>.json` as it completes, and the full table
/// to `output_dir/reports.csv` at the end.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<IndicatorReport>, HarnessError> {
    let network = config.load_network()?;
    let solver = config.solver.solver()?;
    let options = AggregateOptions {
        scaling: config.renewable_scaling,
    };
    let runs_dir = config.output_dir.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;

    let reference = timed_run(&network, Method::None, network.n_snapshots(), options, solver.as_ref(), config.repetitions)
        .map_err(HarnessError::Reference)?;

    let cells = config.cells(network.n_snapshots());
    let run_cell = |&(method, k): &(Method, usize)| -> IndicatorReport {
        let outcome = if method == Method::None {
            report_for(&network, &reference, &reference, method, k)
        } else {
            timed_run(&network, method, k, options, solver.as_ref(), config.repetitions)
                .and_then(|run| report_for(&network, &reference, &run, method, k))
        };
        let report = outcome.unwrap_or_else(|e| {
            IndicatorReport::failed(method, k, reference.solve_time, reference.result.objective, e)
        });
        let path = runs_dir.join(format!("{method}_{k}.json"));
        // A failed write only loses the incremental copy.
        let _ = std::fs::write(&path, report.to_json() + "\n");
        report
    };
    let reports: Vec<IndicatorReport> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run_cell).collect())
    } else {
        cells.iter().map(run_cell).collect()
    };

    let path = config.output_dir.join("reports.csv");
    std::fs::write(&path, indicators::write_csv(&reports)).map_err(io_err(&path))?;
    Ok(reports)
}

/// Whether `pearson_load` never decreases with k, per method (informational).
pub fn pearson_load_trend(reports: &[IndicatorReport]) -> BTreeMap<Method, bool> {
    let mut by_method: BTreeMap<Method, Vec<(usize, f64)>> = BTreeMap::new();
    for r in reports {
        if let Some(p) = r.pearson_load {
            by_method.entry(r.method).or_default().push((r.k, p));
        }
    }
    by_method
        .into_iter()
        .map(|(m, mut v)| {
            v.sort_by_key(|&(k, _)| k);
            (m, v.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12))
        })
        .collect()
}

fn tidy_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Writes one tidy CSV per figure type into `dir`, rows sorted by
/// (method, k). Returns the paths written.
pub fn emit_plot_data(reports: &[IndicatorReport], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut sorted: Vec<&IndicatorReport> = reports.iter().collect();
    sorted.sort_by_key(|r| (r.method, r.k));
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
    let key = |r: &IndicatorReport| vec![r.method.to_string(), r.k.to_string()];
    let with = |r: &IndicatorReport, rest: Vec<String>| {
        let mut row = key(r);
        row.extend(rest);
        row
    };

    let share_cols: Vec<String> = Carrier::ALL.iter().map(|c| format!("share_{c}")).collect();
    let mut share_header = vec!["method", "k"];
    share_header.extend(share_cols.iter().map(String::as_str));

    let files = [
        (
            "aoe_vs_k.csv",
            tidy_csv(
                &["method", "k", "aoe", "z_ref", "z_agg"],
                sorted.iter().map(|r| with(r, vec![opt(r.aoe), format!("{}", r.z_ref), opt(r.z_agg)])),
            ),
        ),
        (
            "atr_vs_k.csv",
            tidy_csv(
                &["method", "k", "atr", "t_ref_s", "t_agg_s", "t_build_s"],
                sorted.iter().map(|r| {
                    with(r, vec![opt(r.atr), format!("{}", r.t_ref_s), opt(r.t_agg_s), opt(r.t_build_s)])
                }),
            ),
        ),
        (
            "pearson_vs_k.csv",
            tidy_csv(
                &[
                    "method",
                    "k",
                    "pearson_load",
                    "pearson_wind",
                    "pearson_solar",
                    "one_minus_pearson_load",
                    "one_minus_pearson_wind",
                    "one_minus_pearson_solar",
                ],
                sorted.iter().map(|r| {
                    with(
                        r,
                        vec![
                            opt(r.pearson_load),
                            opt(r.pearson_wind),
                            opt(r.pearson_solar),
                            opt(r.one_minus_pearson_load),
                            opt(r.one_minus_pearson_wind),
                            opt(r.one_minus_pearson_solar),
                        ],
                    )
                }),
            ),
        ),
        (
            "shares_vs_k.csv",
            tidy_csv(
                &share_header,
                sorted.iter().map(|r| {
                    with(r, Carrier::ALL.iter().map(|c| opt(r.shares.get(c.as_str()).copied())).collect())
                }),
            ),
        ),
        (
            "curtailment_vs_k.csv",
            tidy_csv(
                &["method", "k", "curtailment_wind", "curtailment_solar"],
                sorted.iter().map(|r| with(r, vec![opt(r.curtailment_wind), opt(r.curtailment_solar)])),
            ),
        ),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes a solved dispatch as CSV tables into `dir`: per-snapshot
/// generator dispatch, storage net dispatch and state of charge, line
/// flows, and built capacities.
pub fn write_dispatch(dispatch: &DispatchResult, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let series_table = |ids: Vec<&str>, columns: Vec<&[f64]>, n: usize, with_weight: bool| {
        let mut header = vec!["t"];
        if with_weight {
            header.push("weighting");
        }
        header.extend(ids);
        tidy_csv(
            &header,
            (0..n).map(|t| {
                let mut row = vec![t.to_string()];
                if with_weight {
                    row.push(dispatch.weightings[t].to_string());
                }
                row.extend(columns.iter().map(|c| format!("{}", c[t])));
                row
            }),
        )
    };
    let n_t = dispatch.n_snapshots();
    let storage_net: Vec<Vec<f64>> = dispatch.storage_units.iter().map(|s| s.dispatch()).collect();
    let n_soc = dispatch.storage_units.first().map_or(0, |s| s.soc.len());
    let mut capacities = vec![];
    for g in &dispatch.generators {
        capacities.push(vec![g.id.clone(), "generator".into(), format!("{}", g.capacity), String::new()]);
    }
    for s in &dispatch.storage_units {
        capacities.push(vec![
            s.id.clone(),
            "storage_unit".into(),
            format!("{}", s.power_capacity),
            format!("{}", s.energy_capacity),
        ]);
    }
    let files = [
        (
            "generators_dispatch.csv",
            series_table(
                dispatch.generators.iter().map(|g| g.id.as_str()).collect(),
                dispatch.generators.iter().map(|g| g.dispatch.as_slice()).collect(),
                n_t,
                true,
            ),
        ),
        (
            "storage_dispatch.csv",
            series_table(
                dispatch.storage_units.iter().map(|s| s.id.as_str()).collect(),
                storage_net.iter().map(Vec::as_slice).collect(),
                n_t,
                true,
            ),
        ),
        (
            "storage_soc.csv",
            series_table(
                dispatch.storage_units.iter().map(|s| s.id.as_str()).collect(),
                dispatch.storage_units.iter().map(|s| s.soc.as_slice()).collect(),
                n_soc,
                false,
            ),
        ),
        (
            "line_flows.csv",
            series_table(
                dispatch.line_flows.iter().map(|l| l.id.as_str()).collect(),
                dispatch.line_flows.iter().map(|l| l.values.as_slice()).collect(),
                n_t,
                true,
            ),
        ),
        (
            "capacities.csv",
            tidy_csv(&["component", "type", "power_mw", "energy_mwh"], capacities.into_iter()),
        ),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
