use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tsam_lopf::harness::{emit_plot_data, run_experiment, write_dispatch, ExperimentConfig};
use tsam_lopf::indicators::write_csv;
use tsam_lopf::lpmodel::{build_lp, extract_solution, AggregationDescriptor, Method};
use tsam_lopf::network::{load_network, save_network, synthesize_network};
use tsam_lopf::solver::{default_solver, export_mps, SolveOptions};
use tsam_lopf::spatial::{kmeans_buses, reduce_network};
use tsam_lopf::tsam::aggregate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Chronological,
    #[value(name = "coupling_days", alias = "coupling")]
    CouplingDays,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Chronological => Method::Chronological,
            MethodArg::CouplingDays => Method::CouplingDays,
        }
    }
}

/// Multi-period DC optimal power flow with time series aggregation.
#[derive(Debug, Parser)]
#[command(name = "tsam-lopf", version)]
struct Cli {
    /// Output format for results printed to stdout.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a network over its full horizon and write dispatch tables.
    Solve {
        dir: PathBuf,
        /// Directory for dispatch CSVs [default: <dir>/results].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate the time dimension of a network.
    Aggregate {
        dir: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        k: usize,
        /// Write the aggregated network and descriptor.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster buses with k-means and collapse each cluster.
    Spatial {
        dir: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        /// Write the reduced network here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep described by a TOML config.
    Bench { config: PathBuf },
    /// Generate a synthetic network.
    Synth {
        #[arg(long)]
        buses: usize,
        #[arg(long)]
        hours: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the full-horizon LP as fixed-format MPS.
    ExportMps {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_table(format: Format, header: &[&str], rows: &[Vec<String>], json: serde_json::Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&json).expect("json value")),
        Format::Csv => {
            println!("{}", header.join(","));
            for r in rows {
                println!("{}", r.join(","));
            }
        }
    }
}

fn solve(dir: &Path, out: Option<PathBuf>, format: Format) -> Result<()> {
    let network = load_network(dir)?;
    let descriptor = AggregationDescriptor::identity(&network.snapshots.weightings);
    let lp = build_lp(&network, &descriptor)?;
    let solver = default_solver(&SolveOptions::default());
    let result = solver.solve(&lp)?;
    let row = vec![
        result.status.to_string(),
        format!("{}", result.objective),
        format!("{}", result.wall_time),
        result.iterations.to_string(),
    ];
    print_table(
        format,
        &["status", "objective", "wall_time_s", "iterations"],
        &[row],
        json!({
            "status": result.status.as_str(),
            "objective": result.objective,
            "wall_time_s": result.wall_time,
            "iterations": result.iterations,
            "variables": lp.n_variables(),
            "constraints": lp.n_constraints(),
        }),
    );
    let Some(values) = result.primal_by_name(&lp) else {
        bail!("no optimal solution: {}", result.status);
    };
    let dispatch = extract_solution(&network, &descriptor, &values)?;
    let out = out.unwrap_or_else(|| dir.join("results"));
    write_dispatch(&dispatch, &out)?;
    eprintln!("dispatch written to {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Solve { dir, out } => solve(&dir, out, format),
        Command::Aggregate { dir, method, k, out } => {
            let network = load_network(&dir)?;
            let (aggregated, descriptor) = aggregate(&network, method.into(), k)?;
            if let Some(out) = out {
                save_network(&aggregated, &out)?;
                std::fs::write(out.join("descriptor.json"), descriptor.to_json() + "\n")
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            let rows: Vec<Vec<String>> = descriptor
                .representatives
                .iter()
                .zip(&descriptor.weights)
                .map(|(r, w)| vec![r.to_string(), w.to_string()])
                .collect();
            print_table(
                format,
                &["representative", "weight"],
                &rows,
                serde_json::from_str(&descriptor.to_json())?,
            );
            Ok(())
        }
        Command::Spatial {
            dir,
            k,
            seed,
            max_iter,
            out,
        } => {
            let network = load_network(&dir)?;
            let assignment = kmeans_buses(&network, k, seed, max_iter)?;
            let reduced = reduce_network(&network, &assignment)?;
            if let Some(out) = out {
                save_network(&reduced, &out)?;
            }
            let rows: Vec<Vec<String>> = network
                .buses
                .iter()
                .zip(&assignment.labels)
                .map(|(b, &l)| vec![b.id.clone(), l.to_string()])
                .collect();
            print_table(format, &["bus", "cluster"], &rows, serde_json::to_value(&assignment)?);
            Ok(())
        }
        Command::Bench { config } => {
            let config = ExperimentConfig::from_file(&config)?;
            let reports = run_experiment(&config)?;
            emit_plot_data(&reports, &config.output_dir)?;
            match format {
                Format::Csv => print!("{}", write_csv(&reports)),
                Format::Json => {
                    for r in &reports {
                        println!("{}", r.to_json());
                    }
                }
            }
            Ok(())
        }
        Command::Synth {
            buses,
            hours,
            seed,
            out,
        } => {
            let network = synthesize_network(buses, hours, seed)?;
            save_network(&network, &out)?;
            eprintln!("network written to {}", out.display());
            Ok(())
        }
        Command::ExportMps { dir, out } => {
            let network = load_network(&dir)?;
            let lp = build_lp(&network, &AggregationDescriptor::identity(&network.snapshots.weightings))?;
            let export = export_mps(&lp);
            std::fs::write(&out, &export.text).with_context(|| format!("writing {}", out.display()))?;
            let mut names = String::from("kind,mangled,original\n");
            for (m, o) in &export.names.columns {
                names.push_str(&format!("column,{m},{o}\n"));
            }
            for (m, o) in &export.names.rows {
                names.push_str(&format!("row,{m},{o}\n"));
            }
            let names_path = PathBuf::from(format!("{}.names.csv", out.display()));
            std::fs::write(&names_path, names).with_context(|| format!("writing {}", names_path.display()))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Bench { config } = &cli.command {
        if !config.is_file() {
            eprintln!("error: config file {} not found", config.display());
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
