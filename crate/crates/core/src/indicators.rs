//! Accuracy and speed indicators for aggregated runs, plus dispatch
//! analytics (curtailment, energy shares by carrier).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lpmodel::{AggregationDescriptor, DispatchResult, Method};
use crate::network::{Carrier, Network};
use crate::tsam::{self, ColumnKind};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IndicatorError {
    #[error("aggregated objective is zero")]
    ZeroObjective,
    #[error("reference time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no energy dispatched")]
    ZeroTotal,
    #[error("dispatch does not match the network: {0}")]
    Mismatch(String),
}

/// Average objective error in percent, `(z_agg - z_ref) / z_agg * 100`.
/// Negative when aggregation underestimates cost.
pub fn aoe(z_ref: f64, z_agg: f64) -> Result<f64, IndicatorError> {
    if z_agg == 0.0 {
        return Err(IndicatorError::ZeroObjective);
    }
    Ok((z_agg - z_ref) / z_agg * 100.0)
}

/// Average time reduction in percent, `(t_ref - t_agg) / t_ref * 100`.
pub fn atr(t_ref: f64, t_agg: f64) -> Result<f64, IndicatorError> {
    if !(t_ref > 0.0) {
        return Err(IndicatorError::NonPositiveTime(t_ref));
    }
    Ok((t_ref - t_agg) / t_ref * 100.0)
}

/// Pearson correlation coefficient; `None` when either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>, IndicatorError> {
    if a.len() != b.len() {
        return Err(IndicatorError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as f64;
    if a.is_empty() {
        return Ok(None);
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(None);
    }
    Ok(Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)))
}

/// Mean Pearson coefficient per feature kind between the original series of
/// `reference` and the aggregated series expanded to full length. Kinds
/// whose components are all constant are absent.
pub fn pearson_by_kind(
    reference: &Network,
    aggregated: &Network,
    descriptor: &AggregationDescriptor,
) -> Result<BTreeMap<ColumnKind, f64>, IndicatorError> {
    let expand = |s: &[f64]| tsam::expand(descriptor, s).map_err(|e| IndicatorError::Mismatch(e.to_string()));
    let mut acc: BTreeMap<ColumnKind, (f64, usize)> = BTreeMap::new();
    let mut add = |kind: ColumnKind, r: Option<f64>| {
        if let Some(r) = r {
            let e = acc.entry(kind).or_insert((0.0, 0));
            e.0 += r;
            e.1 += 1;
        }
    };
    for (orig, agg) in reference.loads.iter().zip(&aggregated.loads) {
        add(ColumnKind::Load, pearson(&orig.demand, &expand(&agg.demand)?)?);
    }
    for (orig, agg) in reference.generators.iter().zip(&aggregated.generators) {
        let kind = match orig.carrier {
            Carrier::Wind => ColumnKind::Wind,
            Carrier::Solar => ColumnKind::Solar,
            _ => continue,
        };
        add(kind, pearson(&orig.avail_max, &expand(&agg.avail_max)?)?);
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

fn check_dispatch(dispatch: &DispatchResult, network: &Network) -> Result<(), IndicatorError> {
    if dispatch.generators.len() != network.generators.len() || dispatch.weightings != network.snapshots.weightings {
        return Err(IndicatorError::Mismatch(format!(
            "{} generator results over {} snapshots for {} generators over {}",
            dispatch.generators.len(),
            dispatch.weightings.len(),
            network.generators.len(),
            network.n_snapshots()
        )));
    }
    Ok(())
}

fn weighted_sum(values: impl Iterator<Item = f64>, weightings: &[u32]) -> f64 {
    values.zip(weightings).map(|(v, &w)| f64::from(w) * v).sum()
}

/// Curtailed share of available wind and solar energy in percent, where
/// availability is `sum_t w_t gbar_t G`. Carriers without available energy
/// are absent.
pub fn curtailment(dispatch: &DispatchResult, network: &Network) -> Result<BTreeMap<Carrier, f64>, IndicatorError> {
    check_dispatch(dispatch, network)?;
    let mut acc: BTreeMap<Carrier, (f64, f64)> = BTreeMap::new();
    for (g, r) in network.generators.iter().zip(&dispatch.generators) {
        if !g.carrier.is_variable_renewable() {
            continue;
        }
        let available = weighted_sum(g.avail_max.iter().map(|a| a * r.capacity), &dispatch.weightings);
        let used = weighted_sum(r.dispatch.iter().copied(), &dispatch.weightings);
        let e = acc.entry(g.carrier).or_insert((0.0, 0.0));
        e.0 += available;
        e.1 += used;
    }
    Ok(acc
        .into_iter()
        .filter(|(_, (available, _))| *available > 0.0)
        .map(|(c, (available, used))| (c, ((available - used) / available * 100.0).clamp(0.0, 100.0)))
        .collect())
}

/// Share of weighted generator energy per carrier, in percent. Every
/// carrier present in the network appears.
pub fn carrier_shares(dispatch: &DispatchResult, network: &Network) -> Result<BTreeMap<Carrier, f64>, IndicatorError> {
    check_dispatch(dispatch, network)?;
    let mut energy: BTreeMap<Carrier, f64> = BTreeMap::new();
    for (g, r) in network.generators.iter().zip(&dispatch.generators) {
        // Solver noise below zero does not count as production.
        let e = weighted_sum(r.dispatch.iter().map(|v| v.max(0.0)), &dispatch.weightings);
        *energy.entry(g.carrier).or_insert(0.0) += e;
    }
    let total: f64 = energy.values().sum();
    if !(total > 0.0) {
        return Err(IndicatorError::ZeroTotal);
    }
    Ok(energy.into_iter().map(|(c, e)| (c, e / total * 100.0)).collect())
}

/// One row of a sweep: a (method, k) run compared against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub method: Method,
    pub k: usize,
    /// `ok`, or `failed` with the reason in `error`.
    pub status: String,
    pub error: Option<String>,
    pub aoe: Option<f64>,
    pub atr: Option<f64>,
    pub pearson_load: Option<f64>,
    pub pearson_wind: Option<f64>,
    pub pearson_solar: Option<f64>,
    /// `1 - r`, the literal form of the correlation indicator.
    pub one_minus_pearson_load: Option<f64>,
    pub one_minus_pearson_wind: Option<f64>,
    pub one_minus_pearson_solar: Option<f64>,
    pub curtailment_wind: Option<f64>,
    pub curtailment_solar: Option<f64>,
    /// Median LP solve time of the reference run.
    pub t_ref_s: f64,
    /// Median LP solve time of this run.
    pub t_agg_s: Option<f64>,
    /// Aggregation plus LP build time of this run.
    pub t_build_s: Option<f64>,
    pub z_ref: f64,
    pub z_agg: Option<f64>,
    /// Energy share per carrier in percent, keyed by carrier name.
    pub shares: BTreeMap<String, f64>,
}

impl IndicatorReport {
    pub fn failed(method: Method, k: usize, t_ref_s: f64, z_ref: f64, error: String) -> Self {
        IndicatorReport {
            method,
            k,
            status: "failed".into(),
            error: Some(error),
            aoe: None,
            atr: None,
            pearson_load: None,
            pearson_wind: None,
            pearson_solar: None,
            one_minus_pearson_load: None,
            one_minus_pearson_wind: None,
            one_minus_pearson_solar: None,
            curtailment_wind: None,
            curtailment_solar: None,
            t_ref_s,
            t_agg_s: None,
            t_build_s: None,
            z_ref,
            z_agg: None,
            shares: BTreeMap::new(),
        }
    }

    /// Flat JSON object with the CSV column names as keys.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (key, value) in Self::csv_header().iter().zip(self.csv_values()) {
            let v = if value.is_empty() {
                serde_json::Value::Null
            } else if let Ok(x) = value.parse::<f64>() {
                serde_json::json!(x)
            } else {
                serde_json::Value::String(value)
            };
            map.insert(key.clone(), v);
        }
        serde_json::to_string(&map).expect("report serializes")
    }

    pub fn csv_header() -> Vec<String> {
        let mut cols: Vec<String> = [
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
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend(Carrier::ALL.iter().map(|c| format!("share_{c}")));
        cols.extend(
            [
                "one_minus_pearson_load",
                "one_minus_pearson_wind",
                "one_minus_pearson_solar",
                "t_build_s",
                "status",
                "error",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        cols
    }

    pub fn csv_values(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        let mut vals = vec![
            self.method.to_string(),
            self.k.to_string(),
            opt(self.aoe),
            opt(self.atr),
            opt(self.pearson_load),
            opt(self.pearson_wind),
            opt(self.pearson_solar),
            opt(self.curtailment_wind),
            opt(self.curtailment_solar),
            format!("{}", self.t_ref_s),
            opt(self.t_agg_s),
            format!("{}", self.z_ref),
            opt(self.z_agg),
        ];
        vals.extend(Carrier::ALL.iter().map(|c| opt(self.shares.get(c.as_str()).copied())));
        vals.extend([
            opt(self.one_minus_pearson_load),
            opt(self.one_minus_pearson_wind),
            opt(self.one_minus_pearson_solar),
            opt(self.t_build_s),
            self.status.clone(),
            self.error.clone().unwrap_or_default(),
        ]);
        vals
    }

    /// Header line plus one data row.
    pub fn to_csv(&self) -> String {
        write_csv(std::slice::from_ref(self))
    }
}

/// CSV with one row per report.
pub fn write_csv(reports: &[IndicatorReport]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(IndicatorReport::csv_header()).expect("in-memory write");
    for r in reports {
        w.write_record(r.csv_values()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}
