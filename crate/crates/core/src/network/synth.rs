//! Deterministic synthetic networks for desk-scale experiments.
//!
//! Costs and storage parameters are typical 2035 planning values. Capital
//! costs are annualized figures pro-rated to the synthesized horizon, so that
//! storage investment competes with fuel cost as it would over a full year.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Bus, Carrier, Generator, Line, Load, Network, NetworkError, Snapshots, StorageUnit};

const HOURS_PER_YEAR: f64 = 8760.0;
const BATTERY_CAPITAL: f64 = 65822.0;
const HYDROGEN_CAPITAL: f64 = 65402.0;
const STORAGE_OPERATING: f64 = 0.01;
const STORAGE_MAX_POWER: f64 = 1.0e6;
const GAS_COST: f64 = 41.9344;
const BIOMASS_COST: f64 = 31.4112;

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (v * f).round() / f
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Builds a ring network with `n_buses` buses over `hours` hourly snapshots.
///
/// Every bus carries one load with a daily profile, one wind generator with
/// autocorrelated availability and no daily pattern, one solar generator with
/// a daytime bell, one dispatchable generator sized above the local peak
/// (gas on even buses, biomass on odd ones), and two extendable storage
/// units: a battery (`q = 6`) and a hydrogen cavern (`q = 168`).
pub fn synthesize_network(n_buses: usize, hours: usize, seed: u64) -> Result<Network, NetworkError> {
    if n_buses < 2 {
        return Err(NetworkError::InvalidSize(format!("need at least 2 buses, got {n_buses}")));
    }
    if hours < 2 {
        return Err(NetworkError::InvalidSize(format!("need at least 2 hours, got {hours}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n_buses.to_string().len().max(2);
    let bus_id = |i: usize| format!("bus{i:0width$}");
    let capital_scale = hours as f64 / HOURS_PER_YEAR;

    // Regional wind driver shared by all buses.
    let rho: f64 = 0.97;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut regional = Vec::with_capacity(hours);
    let mut z = normal(&mut rng);
    for _ in 0..hours {
        regional.push(z);
        z = rho * z + innovation * normal(&mut rng);
    }
    // Daily cloudiness shared by all buses.
    let days = hours.div_ceil(24);
    let cloudiness: Vec<f64> = (0..days).map(|_| rng.random_range(0.3..1.0)).collect();

    let mut buses = Vec::new();
    let mut generators = Vec::new();
    let mut storage_units = Vec::new();
    let mut loads = Vec::new();
    let mut peaks = Vec::new();

    for i in 0..n_buses {
        let id = bus_id(i);
        let angle = 2.0 * PI * i as f64 / n_buses as f64;
        let radius = 100.0 + rng.random_range(-10.0..10.0);
        buses.push(Bus {
            id: id.clone(),
            x: round_to(radius * angle.cos(), 3),
            y: round_to(radius * angle.sin(), 3),
            v_nom: 380.0,
        });

        let peak = round_to(rng.random_range(100.0..300.0), 1);
        peaks.push(peak);
        let phase = rng.random_range(-1.0..1.0);
        let demand = (0..hours)
            .map(|t| {
                let h = (t % 24) as f64;
                let daily = 0.2 * (2.0 * PI * (h - 9.0 + phase) / 24.0).sin();
                let shape = (0.7 + daily + 0.03 * normal(&mut rng)).clamp(0.05, 1.0);
                round_to(peak * shape, 3)
            })
            .collect();
        loads.push(Load {
            id: format!("load_{id}"),
            bus: id.clone(),
            demand,
        });

        let mut local = normal(&mut rng);
        let wind: Vec<f64> = (0..hours)
            .map(|t| {
                let driver = 0.75 * regional[t] + 0.35 * local;
                local = rho * local + innovation * normal(&mut rng);
                round_to(1.0 / (1.0 + (-(-0.5 + 1.6 * driver)).exp()), 4).clamp(0.0, 1.0)
            })
            .collect();
        let solar: Vec<f64> = (0..hours)
            .map(|t| {
                let h = (t % 24) as f64;
                let bell = if (6.0..=18.0).contains(&h) {
                    (PI * (h - 6.0) / 12.0).sin()
                } else {
                    0.0
                };
                let noise = 1.0 + 0.05 * normal(&mut rng);
                round_to(bell * cloudiness[t / 24] * noise, 4).clamp(0.0, 1.0)
            })
            .collect();

        let wind_cap = round_to(peak * rng.random_range(2.0..3.0), 1);
        let solar_cap = round_to(peak * rng.random_range(0.5..1.0), 1);
        let firm_cap = round_to(peak * 1.1, 1);
        let renewable = |carrier: Carrier, cap: f64, series: Vec<f64>| Generator {
            id: format!("{carrier}_{id}"),
            bus: id.clone(),
            carrier,
            p_nom_min: cap,
            p_nom_max: cap,
            fixed: true,
            avail_min: vec![0.0; hours],
            avail_max: series,
            op_cost: 0.0,
            cap_cost: 0.0,
        };
        generators.push(renewable(Carrier::Wind, wind_cap, wind));
        generators.push(renewable(Carrier::Solar, solar_cap, solar));
        let (firm, firm_cost) = if i % 2 == 0 {
            (Carrier::Gas, GAS_COST)
        } else {
            (Carrier::Biomass, BIOMASS_COST)
        };
        generators.push(Generator {
            op_cost: firm_cost,
            ..renewable(firm, firm_cap, vec![1.0; hours])
        });

        let storage = |name: &str, q: f64, eta_char: f64, eta_dis: f64, eta_loss: f64, capital: f64| StorageUnit {
            id: format!("{name}_{id}"),
            bus: id.clone(),
            h_nom_min: 0.0,
            h_nom_max: STORAGE_MAX_POWER,
            max_hours: q,
            eta_char,
            eta_dis,
            eta_loss,
            op_cost: STORAGE_OPERATING,
            cap_cost: round_to(capital * capital_scale, 4),
            dispatch_min: vec![-1.0; hours],
            dispatch_max: vec![1.0; hours],
        };
        storage_units.push(storage("battery", 6.0, 0.9327, 0.9327, 0.00694, BATTERY_CAPITAL));
        storage_units.push(storage("hydrogen", 168.0, 0.725, 0.425, 0.000694, HYDROGEN_CAPITAL));
    }

    let mean_peak = peaks.iter().sum::<f64>() / n_buses as f64;
    let n_lines = if n_buses == 2 { 1 } else { n_buses };
    let lines = (0..n_lines)
        .map(|i| Line {
            id: format!("line{i:0width$}"),
            bus0: bus_id(i),
            bus1: bus_id((i + 1) % n_buses),
            susceptance: 1.0,
            rating: round_to(mean_peak * rng.random_range(0.3..0.8), 1),
        })
        .collect();

    let mut network = Network {
        snapshots: Snapshots::hourly(hours),
        buses,
        lines,
        generators,
        storage_units,
        loads,
    };
    network.sort_components();
    Ok(network)
}
