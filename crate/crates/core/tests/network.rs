mod common;

use proptest::prelude::*;
use tsam_lopf::network::{load_network, save_network, synthesize_network, validate, Carrier, NetworkError};

use common::fixture;

fn copy_dir(from: &std::path::Path, to: &std::path::Path) {
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

#[test]
fn two_bus_fixture_counts() {
    let net = load_network(fixture("two_bus")).unwrap();
    assert_eq!(net.buses.len(), 2);
    assert_eq!(net.lines.len(), 1);
    assert_eq!(net.generators.len(), 2);
    assert_eq!(net.storage_units.len(), 1);
    assert_eq!(net.n_snapshots(), 24);
    assert!(validate(&net).is_empty());
}

#[test]
fn missing_loads_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("two_bus"), dir.path());
    std::fs::remove_file(dir.path().join("loads.csv")).unwrap();
    let err = load_network(dir.path()).unwrap_err();
    assert!(matches!(err, NetworkError::MissingFile { .. }));
    assert_eq!(err.to_string(), "missing file loads.csv");
}

#[test]
fn unresolved_bus_names_file_and_bus() {
    let err = load_network(fixture("bad_ref")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("generators.csv"), "{msg}");
    assert!(msg.contains("B9"), "{msg}");
}

#[test]
fn short_series_is_a_length_error() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("two_bus"), dir.path());
    let path = dir.path().join("loads_series.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: Vec<&str> = text.lines().take(10).collect();
    std::fs::write(&path, truncated.join("\n") + "\n").unwrap();
    let err = load_network(dir.path()).unwrap_err();
    assert!(matches!(err, NetworkError::SeriesLength { .. }), "{err}");
    assert!(err.to_string().contains("loads_series.csv"));
}

#[test]
fn non_numeric_cell_reports_file_and_row() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("two_bus"), dir.path());
    let path = dir.path().join("lines.csv");
    let text = std::fs::read_to_string(&path).unwrap().replace(",60", ",sixty");
    std::fs::write(&path, text).unwrap();
    let err = load_network(dir.path()).unwrap_err();
    match err {
        NetworkError::Parse { file, row, .. } => {
            assert_eq!(file, "lines.csv");
            assert_eq!(row, 2);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn availability_above_one_is_one_diagnostic() {
    let mut net = load_network(fixture("two_bus")).unwrap();
    let wind = net.generators.iter_mut().find(|g| g.carrier == Carrier::Wind).unwrap();
    wind.avail_max[3] = 1.2;
    let d = validate(&net);
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].rule, "availability out of [0,1]");
    assert!(d[0].component.contains("wind_B1"));
}

#[test]
fn zero_energy_ratio_is_one_diagnostic() {
    let mut net = load_network(fixture("two_bus")).unwrap();
    net.storage_units[0].max_hours = 0.0;
    let d = validate(&net);
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].rule, "q must be positive");
}

#[test]
fn synth_is_deterministic_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    save_network(&synthesize_network(5, 168, 1).unwrap(), a.path()).unwrap();
    save_network(&synthesize_network(5, 168, 1).unwrap(), b.path()).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}

#[test]
fn synth_availability_in_unit_interval() {
    let net = synthesize_network(5, 168, 1).unwrap();
    for g in &net.generators {
        for (&lo, &hi) in g.avail_min.iter().zip(&g.avail_max) {
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi, "{}", g.id);
        }
    }
}

#[test]
fn small_synth_validates() {
    assert!(validate(&synthesize_network(2, 48, 7).unwrap()).is_empty());
}

#[test]
fn synth_rejects_bad_sizes() {
    assert!(synthesize_network(1, 48, 0).is_err());
    assert!(synthesize_network(3, 1, 0).is_err());
}

#[test]
fn fixture_round_trips_through_csv() {
    let net = load_network(fixture("two_bus")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_network(&net, dir.path()).unwrap();
    assert_eq!(load_network(dir.path()).unwrap(), net);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn synth_always_validates(seed in any::<u64>(), buses in 2usize..6) {
        let net = synthesize_network(buses, 48, seed).unwrap();
        prop_assert!(validate(&net).is_empty());
    }

    #[test]
    fn synth_round_trips(seed in any::<u64>()) {
        let net = synthesize_network(3, 24, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_network(&net, dir.path()).unwrap();
        prop_assert_eq!(load_network(dir.path()).unwrap(), net);
    }
}
