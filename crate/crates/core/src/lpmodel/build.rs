use crate::network::{validate, Network};

use super::{names, AggregationDescriptor, LpError, LpProblem, Method, Relation, HOURS_PER_DAY};

/// One step of the state-of-charge recursion: which dispatch snapshot drives
/// it and how many hours it spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SocStep {
    pub snapshot: usize,
    pub weight: u32,
}

/// The state-of-charge timeline implied by a descriptor. Entry `tau` links
/// `e[tau]` to `e[tau - 1]` (cyclically) through dispatch at
/// `steps[tau].snapshot`.
///
/// Without aggregation and for chronological segments this is one step per
/// snapshot, weighted by the snapshot weighting. For coupled days it covers
/// every original hour with weight one, and the dispatch comes from the
/// same hour of the day's representative.
pub fn soc_timeline(network: &Network, descriptor: &AggregationDescriptor) -> Vec<SocStep> {
    match descriptor.method {
        Method::None | Method::Chronological => network
            .snapshots
            .weightings
            .iter()
            .enumerate()
            .map(|(snapshot, &weight)| SocStep { snapshot, weight })
            .collect(),
        Method::CouplingDays => (0..descriptor.horizon_hours())
            .map(|hour| {
                let slot = descriptor
                    .representative_slot(hour / HOURS_PER_DAY)
                    .expect("checked descriptor maps every day");
                SocStep {
                    snapshot: slot * HOURS_PER_DAY + hour % HOURS_PER_DAY,
                    weight: 1,
                }
            })
            .collect(),
    }
}

pub(super) fn check_consistency(network: &Network, descriptor: &AggregationDescriptor) -> Result<(), LpError> {
    let diagnostics = validate(network);
    if !diagnostics.is_empty() {
        return Err(LpError::InvalidNetwork(diagnostics));
    }
    let n_t = network.n_snapshots();
    if descriptor.method == Method::CouplingDays && n_t % HOURS_PER_DAY != 0 {
        return Err(LpError::HorizonNotDaily(n_t));
    }
    descriptor.check()?;
    if descriptor.n_snapshots() != n_t {
        return Err(LpError::Mismatch(format!(
            "descriptor describes {} snapshots, network has {n_t}",
            descriptor.n_snapshots()
        )));
    }
    if descriptor.snapshot_weightings() != network.snapshots.weightings {
        return Err(LpError::Mismatch(
            "network snapshot weightings differ from the descriptor weights".into(),
        ));
    }
    Ok(())
}

/// Emits the Angles+Flow multi-period LP with storage expansion.
///
/// Variables: dispatch `g`, capacity `G`, storage discharge `hp` (h+) and
/// charge `hm` (h-), storage power `H`, state of charge `e`, bus angle
/// `theta`, line flow `f`. Rows, per dispatch snapshot:
/// bus balance with the injection substituted (`sum g + sum (hp - hm) -
/// sum K f = load`), Kirchhoff (`f - b (theta0 - theta1) = 0`), and the
/// capacity-coupled dispatch limits; per state-of-charge step: `e <= q H`
/// and the loss-compounded recursion
/// `e_t - (1-loss)^w e_{t-1} - w eta_char hm + (w/eta_dis) hp = 0`,
/// wrapping cyclically. Limits whose capacity is fixed become variable
/// bounds; flow limits are bounds on `f`; the reference bus angle is fixed
/// to zero.
pub fn build_lp(network: &Network, descriptor: &AggregationDescriptor) -> Result<LpProblem, LpError> {
    check_consistency(network, descriptor)?;
    let n_t = network.n_snapshots();
    let weights = &network.snapshots.weightings;
    let mut lp = LpProblem::new(format!("lopf_{}_{}", descriptor.method, descriptor.k));
    let inf = f64::INFINITY;

    // Capacities.
    let gen_cap: Vec<usize> = network
        .generators
        .iter()
        .map(|g| lp.add_variable(names::gen_capacity(&g.id), g.p_nom_min, g.p_nom_max, g.cap_cost))
        .collect::<Result<_, _>>()?;
    let su_cap: Vec<usize> = network
        .storage_units
        .iter()
        .map(|s| lp.add_variable(names::storage_power(&s.id), s.h_nom_min, s.h_nom_max, s.cap_cost))
        .collect::<Result<_, _>>()?;

    let reference = network.reference_bus().map(|b| b.id.clone());
    let mut gen_vars = vec![Vec::with_capacity(n_t); network.generators.len()];
    let mut dis_vars = vec![Vec::with_capacity(n_t); network.storage_units.len()];
    let mut ch_vars = vec![Vec::with_capacity(n_t); network.storage_units.len()];
    let mut angle_vars = vec![Vec::with_capacity(n_t); network.buses.len()];
    let mut flow_vars = vec![Vec::with_capacity(n_t); network.lines.len()];

    for t in 0..n_t {
        let w = f64::from(weights[t]);
        for (i, g) in network.generators.iter().enumerate() {
            let (lo, hi) = if g.fixed {
                (g.avail_min[t] * g.p_nom_max, g.avail_max[t] * g.p_nom_max)
            } else if g.avail_min[t] == 0.0 {
                (0.0, inf)
            } else {
                (-inf, inf)
            };
            gen_vars[i].push(lp.add_variable(names::gen_dispatch(&g.id, t), lo, hi, w * g.op_cost)?);
        }
        for (i, s) in network.storage_units.iter().enumerate() {
            let fixed = s.h_nom_min == s.h_nom_max;
            let dis_hi = if fixed { s.dispatch_max[t] * s.h_nom_max } else { inf };
            let ch_hi = if fixed { -s.dispatch_min[t] * s.h_nom_max } else { inf };
            dis_vars[i].push(lp.add_variable(names::storage_discharge(&s.id, t), 0.0, dis_hi, w * s.op_cost)?);
            ch_vars[i].push(lp.add_variable(names::storage_charge(&s.id, t), 0.0, ch_hi, 0.0)?);
        }
        for (i, b) in network.buses.iter().enumerate() {
            let (lo, hi) = if Some(&b.id) == reference.as_ref() { (0.0, 0.0) } else { (-inf, inf) };
            angle_vars[i].push(lp.add_variable(names::angle(&b.id, t), lo, hi, 0.0)?);
        }
        for (i, l) in network.lines.iter().enumerate() {
            flow_vars[i].push(lp.add_variable(names::flow(&l.id, t), -l.rating, l.rating, 0.0)?);
        }
    }

    let timeline = soc_timeline(network, descriptor);
    let soc_vars: Vec<Vec<usize>> = network
        .storage_units
        .iter()
        .map(|s| {
            let hi = if s.h_nom_min == s.h_nom_max { s.max_hours * s.h_nom_max } else { inf };
            (0..timeline.len())
                .map(|tau| lp.add_variable(names::soc(&s.id, tau), 0.0, hi, 0.0))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let bus_pos = |id: &str| network.bus_index(id).expect("validated bus reference");
    for t in 0..n_t {
        for (b, bus) in network.buses.iter().enumerate() {
            let mut row = Vec::new();
            for (i, g) in network.generators.iter().enumerate() {
                if g.bus == bus.id {
                    row.push((gen_vars[i][t], 1.0));
                }
            }
            for (i, s) in network.storage_units.iter().enumerate() {
                if s.bus == bus.id {
                    row.push((dis_vars[i][t], 1.0));
                    row.push((ch_vars[i][t], -1.0));
                }
            }
            for (i, l) in network.lines.iter().enumerate() {
                if bus_pos(&l.bus0) == b {
                    row.push((flow_vars[i][t], -1.0));
                } else if bus_pos(&l.bus1) == b {
                    row.push((flow_vars[i][t], 1.0));
                }
            }
            let demand: f64 = network.loads.iter().filter(|l| l.bus == bus.id).map(|l| l.demand[t]).sum();
            lp.add_constraint(names::balance(&bus.id, t), row, Relation::Eq, demand)?;
        }
        for (i, l) in network.lines.iter().enumerate() {
            let (a0, a1) = (angle_vars[bus_pos(&l.bus0)][t], angle_vars[bus_pos(&l.bus1)][t]);
            lp.add_constraint(
                names::kirchhoff(&l.id, t),
                [(flow_vars[i][t], 1.0), (a0, -l.susceptance), (a1, l.susceptance)],
                Relation::Eq,
                0.0,
            )?;
        }
        for (i, g) in network.generators.iter().enumerate() {
            if g.fixed {
                continue;
            }
            lp.add_constraint(
                names::gen_upper(&g.id, t),
                [(gen_vars[i][t], 1.0), (gen_cap[i], -g.avail_max[t])],
                Relation::Le,
                0.0,
            )?;
            if g.avail_min[t] != 0.0 {
                lp.add_constraint(
                    names::gen_lower(&g.id, t),
                    [(gen_vars[i][t], 1.0), (gen_cap[i], -g.avail_min[t])],
                    Relation::Ge,
                    0.0,
                )?;
            }
        }
        for (i, s) in network.storage_units.iter().enumerate() {
            if s.h_nom_min == s.h_nom_max {
                continue;
            }
            lp.add_constraint(
                names::discharge_limit(&s.id, t),
                [(dis_vars[i][t], 1.0), (su_cap[i], -s.dispatch_max[t])],
                Relation::Le,
                0.0,
            )?;
            lp.add_constraint(
                names::charge_limit(&s.id, t),
                [(ch_vars[i][t], 1.0), (su_cap[i], s.dispatch_min[t])],
                Relation::Le,
                0.0,
            )?;
        }
    }

    let n_steps = timeline.len();
    for (i, s) in network.storage_units.iter().enumerate() {
        for (tau, step) in timeline.iter().enumerate() {
            let e = soc_vars[i][tau];
            if s.h_nom_min != s.h_nom_max {
                lp.add_constraint(
                    names::soc_limit(&s.id, tau),
                    [(e, 1.0), (su_cap[i], -s.max_hours)],
                    Relation::Le,
                    0.0,
                )?;
            }
            let w = f64::from(step.weight);
            let prev = soc_vars[i][(tau + n_steps - 1) % n_steps];
            let retention = (1.0 - s.eta_loss).powi(step.weight as i32);
            lp.add_constraint(
                names::soc_balance(&s.id, tau),
                [
                    (e, 1.0),
                    (prev, -retention),
                    (ch_vars[i][step.snapshot], -w * s.eta_char),
                    (dis_vars[i][step.snapshot], w / s.eta_dis),
                ],
                Relation::Eq,
                0.0,
            )?;
        }
    }

    Ok(lp)
}
