//! CSV directory format.
//!
//! | file | columns |
//! |---|---|
//! | `snapshots.csv` | `t, weighting` |
//! | `buses.csv` | `id, x, y, v_nom` |
//! | `lines.csv` | `id, bus0, bus1, b, f_max` |
//! | `generators.csv` | `id, bus, carrier, g_min, g_max, fixed, op_cost, cap_cost` |
//! | `generators_series.csv` | `t, <generator id>...` (upper availability) |
//! | `storage_units.csv` | `id, bus, h_min, h_max, q, eta_char, eta_dis, eta_loss, op_cost, cap_cost` |
//! | `loads.csv` | `id, bus` |
//! | `loads_series.csv` | `t, <load id>...` |
//!
//! A generator without a column in `generators_series.csv` has constant
//! availability 1. The optional `generators_min_series.csv` carries nonzero
//! lower availabilities in the same wide layout. Rows are ordered by id, series
//! rows by `t`, and numbers are written in shortest round-trip form, so that
//! save followed by load reproduces the network exactly.

use std::fs::File;
use std::path::Path;

use super::{validate, Bus, Carrier, Generator, Line, Load, Network, NetworkError, Snapshots, StorageUnit};

const SNAPSHOTS: &str = "snapshots.csv";
const BUSES: &str = "buses.csv";
const LINES: &str = "lines.csv";
const GENERATORS: &str = "generators.csv";
const GENERATORS_SERIES: &str = "generators_series.csv";
const GENERATORS_MIN_SERIES: &str = "generators_min_series.csv";
const STORAGE_UNITS: &str = "storage_units.csv";
const LOADS: &str = "loads.csv";
const LOADS_SERIES: &str = "loads_series.csv";

/// A parsed table: header names and raw string rows with their line numbers.
struct Table {
    file: String,
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(dir: &Path, file: &str) -> Result<Table, NetworkError> {
        let path = dir.join(file);
        if !path.is_file() {
            return Err(NetworkError::MissingFile { file: file.to_string() });
        }
        let handle = File::open(&path).map_err(|source| NetworkError::Io {
            file: file.to_string(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(handle);
        let parse_err = |row: usize, e: csv::Error| NetworkError::Parse {
            file: file.to_string(),
            row,
            message: e.to_string(),
        };
        let header = reader
            .headers()
            .map_err(|e| parse_err(1, e))?
            .iter()
            .map(str::to_string)
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| parse_err(line, e))?;
            rows.push((line, record.iter().map(str::to_string).collect()));
        }
        Ok(Table {
            file: file.to_string(),
            header,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize, NetworkError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| NetworkError::Parse {
                file: self.file.clone(),
                row: 1,
                message: format!("missing column {name:?}"),
            })
    }

    fn err(&self, row: usize, message: impl Into<String>) -> NetworkError {
        NetworkError::Parse {
            file: self.file.clone(),
            row,
            message: message.into(),
        }
    }

    fn cell<'a>(&self, row: usize, values: &'a [String], col: usize) -> Result<&'a str, NetworkError> {
        values
            .get(col)
            .map(String::as_str)
            .ok_or_else(|| self.err(row, format!("missing value for column {:?}", self.header[col])))
    }

    fn number(&self, row: usize, values: &[String], col: usize) -> Result<f64, NetworkError> {
        let raw = self.cell(row, values, col)?;
        raw.parse::<f64>().map_err(|_| {
            self.err(
                row,
                format!("non-numeric value {raw:?} in column {:?}", self.header[col]),
            )
        })
    }
}

/// Reads and validates a network from a CSV directory.
pub fn load_network(dir: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let dir = dir.as_ref();
    // Existence first so a missing file is reported before any parse error.
    for file in [SNAPSHOTS, BUSES, LINES, GENERATORS, GENERATORS_SERIES, STORAGE_UNITS, LOADS, LOADS_SERIES] {
        if !dir.join(file).is_file() {
            return Err(NetworkError::MissingFile { file: file.to_string() });
        }
    }

    let snapshots = read_snapshots(dir)?;
    let n_t = snapshots.len();

    let table = Table::read(dir, BUSES)?;
    let (c_id, c_x, c_y, c_v) = (
        table.column("id")?,
        table.column("x")?,
        table.column("y")?,
        table.column("v_nom")?,
    );
    let mut buses = Vec::with_capacity(table.rows.len());
    for (row, values) in &table.rows {
        buses.push(Bus {
            id: table.cell(*row, values, c_id)?.to_string(),
            x: table.number(*row, values, c_x)?,
            y: table.number(*row, values, c_y)?,
            v_nom: table.number(*row, values, c_v)?,
        });
    }
    let bus_exists = |id: &str| buses.iter().any(|b| b.id == id);
    let check_bus = |table: &Table, row: usize, component: &str, bus: &str| {
        if bus_exists(bus) {
            Ok(())
        } else {
            Err(NetworkError::UnknownBus {
                file: table.file.clone(),
                row,
                component: component.to_string(),
                bus: bus.to_string(),
            })
        }
    };

    let table = Table::read(dir, LINES)?;
    let (c_id, c_b0, c_b1, c_b, c_f) = (
        table.column("id")?,
        table.column("bus0")?,
        table.column("bus1")?,
        table.column("b")?,
        table.column("f_max")?,
    );
    let mut lines = Vec::with_capacity(table.rows.len());
    for (row, values) in &table.rows {
        let id = table.cell(*row, values, c_id)?.to_string();
        let bus0 = table.cell(*row, values, c_b0)?.to_string();
        let bus1 = table.cell(*row, values, c_b1)?.to_string();
        check_bus(&table, *row, &id, &bus0)?;
        check_bus(&table, *row, &id, &bus1)?;
        lines.push(Line {
            id,
            bus0,
            bus1,
            susceptance: table.number(*row, values, c_b)?,
            rating: table.number(*row, values, c_f)?,
        });
    }

    let table = Table::read(dir, GENERATORS)?;
    let cols = [
        "id", "bus", "carrier", "g_min", "g_max", "fixed", "op_cost", "cap_cost",
    ]
    .map(|c| table.column(c));
    let [c_id, c_bus, c_car, c_min, c_max, c_fix, c_op, c_cap] = unwrap_cols(cols)?;
    let mut generators = Vec::with_capacity(table.rows.len());
    for (row, values) in &table.rows {
        let id = table.cell(*row, values, c_id)?.to_string();
        let bus = table.cell(*row, values, c_bus)?.to_string();
        check_bus(&table, *row, &id, &bus)?;
        let carrier = table
            .cell(*row, values, c_car)?
            .parse::<Carrier>()
            .map_err(|m| table.err(*row, m))?;
        let fixed = match table.cell(*row, values, c_fix)? {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(table.err(*row, format!("invalid boolean {other:?} in column \"fixed\""))),
        };
        generators.push(Generator {
            id,
            bus,
            carrier,
            p_nom_min: table.number(*row, values, c_min)?,
            p_nom_max: table.number(*row, values, c_max)?,
            fixed,
            avail_min: vec![0.0; n_t],
            avail_max: vec![1.0; n_t],
            op_cost: table.number(*row, values, c_op)?,
            cap_cost: table.number(*row, values, c_cap)?,
        });
    }
    for (id, series) in read_series(dir, GENERATORS_SERIES, n_t, &ids(&generators, |g| &g.id), false)? {
        if let Some(g) = generators.iter_mut().find(|g| g.id == id) {
            g.avail_max = series;
        }
    }
    if dir.join(GENERATORS_MIN_SERIES).is_file() {
        for (id, series) in read_series(dir, GENERATORS_MIN_SERIES, n_t, &ids(&generators, |g| &g.id), false)? {
            if let Some(g) = generators.iter_mut().find(|g| g.id == id) {
                g.avail_min = series;
            }
        }
    }

    let table = Table::read(dir, STORAGE_UNITS)?;
    let cols = [
        "id", "bus", "h_min", "h_max", "q", "eta_char", "eta_dis", "eta_loss", "op_cost", "cap_cost",
    ]
    .map(|c| table.column(c));
    let [c_id, c_bus, c_min, c_max, c_q, c_ec, c_ed, c_el, c_op, c_cap] = unwrap_cols(cols)?;
    let mut storage_units = Vec::with_capacity(table.rows.len());
    for (row, values) in &table.rows {
        let id = table.cell(*row, values, c_id)?.to_string();
        let bus = table.cell(*row, values, c_bus)?.to_string();
        check_bus(&table, *row, &id, &bus)?;
        storage_units.push(StorageUnit {
            id,
            bus,
            h_nom_min: table.number(*row, values, c_min)?,
            h_nom_max: table.number(*row, values, c_max)?,
            max_hours: table.number(*row, values, c_q)?,
            eta_char: table.number(*row, values, c_ec)?,
            eta_dis: table.number(*row, values, c_ed)?,
            eta_loss: table.number(*row, values, c_el)?,
            op_cost: table.number(*row, values, c_op)?,
            cap_cost: table.number(*row, values, c_cap)?,
            dispatch_min: vec![-1.0; n_t],
            dispatch_max: vec![1.0; n_t],
        });
    }

    let table = Table::read(dir, LOADS)?;
    let (c_id, c_bus) = (table.column("id")?, table.column("bus")?);
    let mut loads = Vec::with_capacity(table.rows.len());
    for (row, values) in &table.rows {
        let id = table.cell(*row, values, c_id)?.to_string();
        let bus = table.cell(*row, values, c_bus)?.to_string();
        check_bus(&table, *row, &id, &bus)?;
        loads.push(Load {
            id,
            bus,
            demand: Vec::new(),
        });
    }
    for (id, series) in read_series(dir, LOADS_SERIES, n_t, &ids(&loads, |l| &l.id), true)? {
        if let Some(l) = loads.iter_mut().find(|l| l.id == id) {
            l.demand = series;
        }
    }

    let mut network = Network {
        snapshots,
        buses,
        lines,
        generators,
        storage_units,
        loads,
    };
    network.sort_components();
    let diagnostics = validate(&network);
    if diagnostics.is_empty() {
        Ok(network)
    } else {
        Err(NetworkError::Invalid(diagnostics))
    }
}

fn unwrap_cols<const N: usize>(cols: [Result<usize, NetworkError>; N]) -> Result<[usize; N], NetworkError> {
    let mut out = [0; N];
    for (slot, col) in out.iter_mut().zip(cols) {
        *slot = col?;
    }
    Ok(out)
}

fn ids<T>(items: &[T], id: impl Fn(&T) -> &String) -> Vec<String> {
    items.iter().map(|i| id(i).clone()).collect()
}

fn read_snapshots(dir: &Path) -> Result<Snapshots, NetworkError> {
    let table = Table::read(dir, SNAPSHOTS)?;
    let (c_t, c_w) = (table.column("t")?, table.column("weighting")?);
    let mut weightings = Vec::with_capacity(table.rows.len());
    for (i, (row, values)) in table.rows.iter().enumerate() {
        check_t(&table, *row, values, c_t, i)?;
        let raw = table.cell(*row, values, c_w)?;
        let w = raw
            .parse::<u32>()
            .map_err(|_| table.err(*row, format!("weighting {raw:?} is not a positive integer")))?;
        weightings.push(w);
    }
    Ok(Snapshots { weightings })
}

fn check_t(table: &Table, row: usize, values: &[String], col: usize, expected: usize) -> Result<(), NetworkError> {
    let raw = table.cell(row, values, col)?;
    match raw.parse::<usize>() {
        Ok(t) if t == expected => Ok(()),
        Ok(t) => Err(table.err(row, format!("expected t = {expected}, found {t}"))),
        Err(_) => Err(table.err(row, format!("non-numeric value {raw:?} in column \"t\""))),
    }
}

/// Reads a wide series file. Returns `(component id, series)` per column.
fn read_series(
    dir: &Path,
    file: &str,
    n_t: usize,
    known: &[String],
    require_all: bool,
) -> Result<Vec<(String, Vec<f64>)>, NetworkError> {
    let table = Table::read(dir, file)?;
    let c_t = table.column("t")?;
    let columns: Vec<(usize, String)> = table
        .header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != c_t)
        .map(|(i, h)| (i, h.clone()))
        .collect();
    for (_, id) in &columns {
        if !known.contains(id) {
            return Err(table.err(1, format!("column {id:?} matches no component")));
        }
    }
    if require_all {
        if let Some(missing) = known.iter().find(|id| !columns.iter().any(|(_, c)| c == *id)) {
            return Err(table.err(1, format!("missing column for {missing:?}")));
        }
    }
    if table.rows.len() != n_t {
        return Err(NetworkError::SeriesLength {
            file: file.to_string(),
            expected: n_t,
            found: table.rows.len(),
        });
    }
    let mut out: Vec<(String, Vec<f64>)> = columns
        .iter()
        .map(|(_, id)| (id.clone(), Vec::with_capacity(n_t)))
        .collect();
    for (i, (row, values)) in table.rows.iter().enumerate() {
        check_t(&table, *row, values, c_t, i)?;
        for ((col, _), (_, series)) in columns.iter().zip(out.iter_mut()) {
            series.push(table.number(*row, values, *col)?);
        }
    }
    Ok(out)
}

fn writer(dir: &Path, file: &str) -> Result<csv::Writer<File>, NetworkError> {
    let handle = File::create(dir.join(file)).map_err(|source| NetworkError::Io {
        file: file.to_string(),
        source,
    })?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(handle))
}

fn io_err(file: &str) -> impl Fn(csv::Error) -> NetworkError + '_ {
    move |e| NetworkError::Io {
        file: file.to_string(),
        source: std::io::Error::other(e),
    }
}

fn write_rows<I, R>(dir: &Path, file: &str, header: &[String], rows: I) -> Result<(), NetworkError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(dir, file)?;
    w.write_record(header).map_err(io_err(file))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(io_err(file))?;
    }
    w.flush().map_err(|source| NetworkError::Io {
        file: file.to_string(),
        source,
    })
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_series(dir: &Path, file: &str, n_t: usize, columns: &[(&str, &[f64])]) -> Result<(), NetworkError> {
    let mut head = vec!["t".to_string()];
    head.extend(columns.iter().map(|(id, _)| id.to_string()));
    write_rows(
        dir,
        file,
        &head,
        (0..n_t).map(|t| {
            std::iter::once(t.to_string()).chain(columns.iter().map(move |(_, s)| num(s[t])))
        }),
    )
}

/// Writes the network as a CSV directory, creating it if needed.
///
/// Storage dispatch availabilities other than the default `-1`/`+1` have no
/// column in the format and are rejected.
pub fn save_network(network: &Network, dir: impl AsRef<Path>) -> Result<(), NetworkError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| NetworkError::Io {
        file: dir.display().to_string(),
        source,
    })?;
    for s in &network.storage_units {
        if s.dispatch_min.iter().any(|&v| v != -1.0) || s.dispatch_max.iter().any(|&v| v != 1.0) {
            return Err(NetworkError::Parse {
                file: STORAGE_UNITS.to_string(),
                row: 0,
                message: format!("storage unit {} has non-default dispatch availability", s.id),
            });
        }
    }

    let mut sorted = network.clone();
    sorted.sort_components();
    let n = &sorted;
    let n_t = n.n_snapshots();

    write_rows(
        dir,
        SNAPSHOTS,
        &header(&["t", "weighting"]),
        n.snapshots
            .weightings
            .iter()
            .enumerate()
            .map(|(t, w)| [t.to_string(), w.to_string()]),
    )?;
    write_rows(
        dir,
        BUSES,
        &header(&["id", "x", "y", "v_nom"]),
        n.buses
            .iter()
            .map(|b| [b.id.clone(), num(b.x), num(b.y), num(b.v_nom)]),
    )?;
    write_rows(
        dir,
        LINES,
        &header(&["id", "bus0", "bus1", "b", "f_max"]),
        n.lines.iter().map(|l| {
            [
                l.id.clone(),
                l.bus0.clone(),
                l.bus1.clone(),
                num(l.susceptance),
                num(l.rating),
            ]
        }),
    )?;
    write_rows(
        dir,
        GENERATORS,
        &header(&["id", "bus", "carrier", "g_min", "g_max", "fixed", "op_cost", "cap_cost"]),
        n.generators.iter().map(|g| {
            [
                g.id.clone(),
                g.bus.clone(),
                g.carrier.to_string(),
                num(g.p_nom_min),
                num(g.p_nom_max),
                g.fixed.to_string(),
                num(g.op_cost),
                num(g.cap_cost),
            ]
        }),
    )?;
    let max_cols: Vec<(&str, &[f64])> = n
        .generators
        .iter()
        .filter(|g| g.avail_max.iter().any(|&v| v != 1.0))
        .map(|g| (g.id.as_str(), g.avail_max.as_slice()))
        .collect();
    write_series(dir, GENERATORS_SERIES, n_t, &max_cols)?;
    let min_cols: Vec<(&str, &[f64])> = n
        .generators
        .iter()
        .filter(|g| g.avail_min.iter().any(|&v| v != 0.0))
        .map(|g| (g.id.as_str(), g.avail_min.as_slice()))
        .collect();
    let min_path = dir.join(GENERATORS_MIN_SERIES);
    if !min_cols.is_empty() {
        write_series(dir, GENERATORS_MIN_SERIES, n_t, &min_cols)?;
    } else if min_path.exists() {
        std::fs::remove_file(&min_path).map_err(|source| NetworkError::Io {
            file: GENERATORS_MIN_SERIES.to_string(),
            source,
        })?;
    }
    write_rows(
        dir,
        STORAGE_UNITS,
        &header(&[
            "id", "bus", "h_min", "h_max", "q", "eta_char", "eta_dis", "eta_loss", "op_cost", "cap_cost",
        ]),
        n.storage_units.iter().map(|s| {
            [
                s.id.clone(),
                s.bus.clone(),
                num(s.h_nom_min),
                num(s.h_nom_max),
                num(s.max_hours),
                num(s.eta_char),
                num(s.eta_dis),
                num(s.eta_loss),
                num(s.op_cost),
                num(s.cap_cost),
            ]
        }),
    )?;
    write_rows(
        dir,
        LOADS,
        &header(&["id", "bus"]),
        n.loads.iter().map(|l| [l.id.clone(), l.bus.clone()]),
    )?;
    let load_cols: Vec<(&str, &[f64])> = n
        .loads
        .iter()
        .map(|l| (l.id.as_str(), l.demand.as_slice()))
        .collect();
    write_series(dir, LOADS_SERIES, n_t, &load_cols)?;
    Ok(())
}
