mod common;

use proptest::prelude::*;
use tsam_lopf::indicators::{
    aoe, atr, carrier_shares, curtailment, pearson, pearson_by_kind, write_csv, IndicatorError, IndicatorReport,
};
use tsam_lopf::lpmodel::{DispatchResult, GeneratorResult, Method};
use tsam_lopf::network::{load_network, synthesize_network, Carrier, Network};
use tsam_lopf::tsam::{aggregate, ColumnKind};

use common::{fixture, solve_identity};

fn dispatch_of(network: &Network, per_generator: &[(f64, Vec<f64>)]) -> DispatchResult {
    DispatchResult {
        objective: 0.0,
        weightings: network.snapshots.weightings.clone(),
        generators: network
            .generators
            .iter()
            .zip(per_generator)
            .map(|(g, (capacity, dispatch))| GeneratorResult {
                id: g.id.clone(),
                capacity: *capacity,
                dispatch: dispatch.clone(),
            })
            .collect(),
        storage_units: vec![],
        line_flows: vec![],
        voltage_angles: vec![],
        duals: None,
    }
}

#[test]
fn pearson_examples() {
    let a = [1.0, 2.0, 3.0, 5.0];
    assert!((pearson(&a, &a).unwrap().unwrap() - 1.0).abs() < 1e-15);
    let neg: Vec<f64> = a.iter().map(|x| -x).collect();
    assert!((pearson(&a, &neg).unwrap().unwrap() + 1.0).abs() < 1e-15);
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap().unwrap();
    // Centered sums: sab = 3, saa = 2, sbb = 14/3, so r = 3 / sqrt(28/3).
    assert!((r - 3.0 / (28.0f64 / 3.0).sqrt()).abs() < 1e-12, "{r}");
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), None);
    assert_eq!(pearson(&[1.0], &[1.0, 2.0]), Err(IndicatorError::LengthMismatch(1, 2)));
}

#[test]
fn curtailment_extremes() {
    let net = load_network(fixture("two_bus")).unwrap();
    let wind = net.generators.iter().position(|g| g.carrier == Carrier::Wind).unwrap();
    let cap = 50.0;
    let mut per_gen: Vec<(f64, Vec<f64>)> = net.generators.iter().map(|_| (0.0, vec![0.0; 24])).collect();
    per_gen[wind] = (cap, net.generators[wind].avail_max.iter().map(|a| a * cap).collect());
    let full = curtailment(&dispatch_of(&net, &per_gen), &net).unwrap();
    assert!(full[&Carrier::Wind].abs() < 1e-12);
    per_gen[wind].1 = vec![0.0; 24];
    let none = curtailment(&dispatch_of(&net, &per_gen), &net).unwrap();
    assert_eq!(none[&Carrier::Wind], 100.0);
    // No solar in the fixture: absent rather than NaN.
    assert!(!none.contains_key(&Carrier::Solar));
}

#[test]
fn shares_reproduce_a_three_carrier_split() {
    let mut net = load_network(fixture("two_bus")).unwrap();
    let mut coal = net.generators[0].clone();
    coal.id = "coal_B2".into();
    coal.carrier = Carrier::Coal;
    net.generators.push(coal);
    net.sort_components();
    // Energies in TWh spread evenly over 24 hours.
    let energy = |c: Carrier| match c {
        Carrier::Wind => 9.49,
        Carrier::Gas => 1.38,
        _ => 13.25 - 9.49 - 1.38,
    };
    let per_gen: Vec<(f64, Vec<f64>)> = net
        .generators
        .iter()
        .map(|g| (1.0, vec![energy(g.carrier) / 24.0; 24]))
        .collect();
    let shares = carrier_shares(&dispatch_of(&net, &per_gen), &net).unwrap();
    assert!((shares[&Carrier::Wind] - 71.6).abs() < 0.05, "{shares:?}");
    assert!((shares[&Carrier::Gas] - 10.4).abs() < 0.05, "{shares:?}");
    assert!((shares.values().sum::<f64>() - 100.0).abs() < 1e-9);

    let only_gas: Vec<(f64, Vec<f64>)> = net
        .generators
        .iter()
        .map(|g| (1.0, vec![if g.carrier == Carrier::Gas { 1.0 } else { 0.0 }; 24]))
        .collect();
    assert_eq!(carrier_shares(&dispatch_of(&net, &only_gas), &net).unwrap()[&Carrier::Gas], 100.0);
    let nothing: Vec<(f64, Vec<f64>)> = net.generators.iter().map(|_| (1.0, vec![0.0; 24])).collect();
    assert_eq!(carrier_shares(&dispatch_of(&net, &nothing), &net), Err(IndicatorError::ZeroTotal));
}

#[test]
fn solved_fixture_curtailment_matches_recomputation() {
    for net in [load_network(fixture("two_bus")).unwrap(), synthesize_network(3, 72, 4).unwrap()] {
        let solved = solve_identity(&net);
        let d = &solved.dispatch;
        let c = curtailment(d, &net).unwrap();
        for carrier in [Carrier::Wind, Carrier::Solar] {
            let (mut available, mut used) = (0.0, 0.0);
            for g in net.generators.iter().filter(|g| g.carrier == carrier) {
                let cap = solved.values[&format!("G[{}]", g.id)];
                for t in 0..net.n_snapshots() {
                    let w = f64::from(net.snapshots.weightings[t]);
                    available += w * g.avail_max[t] * cap;
                    used += w * solved.values[&format!("g[{}][{t}]", g.id)];
                }
            }
            match c.get(&carrier) {
                Some(&pct) => {
                    let expected = (available - used) / available * 100.0;
                    assert!((pct - expected.clamp(0.0, 100.0)).abs() < 1e-9, "{carrier}: {pct} vs {expected}");
                    assert!((0.0..=100.0).contains(&pct));
                }
                None => assert!(available <= 0.0),
            }
        }
        let shares = carrier_shares(d, &net).unwrap();
        assert!((shares.values().sum::<f64>() - 100.0).abs() < 1e-6);
    }
}

#[test]
fn identity_aggregation_correlates_perfectly() {
    let net = synthesize_network(3, 96, 8).unwrap();
    for (method, k) in [(Method::Chronological, 96), (Method::CouplingDays, 4)] {
        let (agg, desc) = aggregate(&net, method, k).unwrap();
        let p = pearson_by_kind(&net, &agg, &desc).unwrap();
        for kind in [ColumnKind::Load, ColumnKind::Wind, ColumnKind::Solar] {
            assert!((p[&kind] - 1.0).abs() < 1e-12, "{method} {kind:?}: {}", p[&kind]);
        }
    }
}

#[test]
fn report_serialization_has_stable_columns() {
    let header = IndicatorReport::csv_header();
    let expected_head = [
        "method",
        "k",
        "aoe",
        "atr",
        "pearson_load",
        "pearson_wind",
        "pearson_solar",
        "curtailment_wind",
        "curtailment_solar",
        "t_ref_s",
        "t_agg_s",
        "z_ref",
        "z_agg",
    ];
    assert_eq!(&header[..13], &expected_head);
    let shares: Vec<&String> = header[13..].iter().take_while(|h| h.starts_with("share_")).collect();
    assert_eq!(shares.len(), Carrier::ALL.len());

    let report = IndicatorReport::failed(Method::CouplingDays, 3, 1.5, 42.0, "boom, \"quoted\"".into());
    let csv = report.to_csv();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(row.len(), header.len());
    assert_eq!(&row[0], "coupling_days");
    assert_eq!(&row[header.iter().position(|h| h == "error").unwrap()], "boom, \"quoted\"");

    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let obj = json.as_object().unwrap();
    assert_eq!(obj.len(), header.len());
    assert_eq!(obj["status"], "failed");
    assert_eq!(obj["k"], 3.0);
    assert!(obj["aoe"].is_null());
    assert_eq!(write_csv(&[report.clone(), report]).lines().count(), 3);
}

proptest! {
    #[test]
    fn identical_inputs_give_zero(z in 1e-3..1e9f64, t in 1e-6..1e4f64) {
        prop_assert_eq!(aoe(z, z).unwrap(), 0.0);
        prop_assert_eq!(atr(t, t).unwrap(), 0.0);
    }

    #[test]
    fn pearson_is_affine_invariant(
        pairs in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..50),
        scale in 0.1..10.0f64,
        shift in -50.0..50.0f64,
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let b2: Vec<f64> = b.iter().map(|x| scale * x + shift).collect();
        if let (Some(r1), Some(r2)) = (pearson(&a, &b).unwrap(), pearson(&a, &b2).unwrap()) {
            prop_assert!((r1 - r2).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r1));
        }
    }
}
