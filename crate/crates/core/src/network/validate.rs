use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::Network;

/// One violated rule on one component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Component kind and id, e.g. `generator wind_01`.
    pub component: String,
    pub rule: String,
}

impl Diagnostic {
    fn new(kind: &str, id: &str, rule: impl Into<String>) -> Self {
        Diagnostic {
            component: format!("{kind} {id}"),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component, self.rule)
    }
}

/// Checks every structural and physical invariant of the network.
///
/// Returns an empty list iff the network is usable by the LP builder. Each
/// rule is reported at most once per component.
pub fn validate(network: &Network) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n_t = network.n_snapshots();

    if n_t == 0 {
        out.push(Diagnostic::new("snapshots", "-", "at least one snapshot required"));
    }
    if network.snapshots.weightings.iter().any(|&w| w < 1) {
        out.push(Diagnostic::new("snapshots", "-", "weightings must be at least 1"));
    }

    let mut bus_ids = HashSet::new();
    for bus in &network.buses {
        if !bus_ids.insert(bus.id.as_str()) {
            out.push(Diagnostic::new("bus", &bus.id, "duplicate id"));
        }
        if !(bus.x.is_finite() && bus.y.is_finite() && bus.v_nom.is_finite()) {
            out.push(Diagnostic::new("bus", &bus.id, "non-finite coordinate or voltage"));
        }
    }
    if network.buses.is_empty() {
        out.push(Diagnostic::new("bus", "-", "at least one bus required"));
    }
    let has_bus = |id: &str| bus_ids.contains(id);

    let mut line_ids = HashSet::new();
    for line in &network.lines {
        if !line_ids.insert(line.id.as_str()) {
            out.push(Diagnostic::new("line", &line.id, "duplicate id"));
        }
        if !(line.rating > 0.0 && line.rating.is_finite()) {
            out.push(Diagnostic::new("line", &line.id, "rating must be positive"));
        }
        if !(line.susceptance > 0.0 && line.susceptance.is_finite()) {
            out.push(Diagnostic::new("line", &line.id, "susceptance must be positive"));
        }
        if line.bus0 == line.bus1 {
            out.push(Diagnostic::new("line", &line.id, "endpoints must differ"));
        }
        for end in [&line.bus0, &line.bus1] {
            if !has_bus(end) {
                out.push(Diagnostic::new("line", &line.id, format!("unknown bus {end:?}")));
            }
        }
    }

    let mut gen_ids = HashSet::new();
    for g in &network.generators {
        let d = |rule: &str| Diagnostic::new("generator", &g.id, rule);
        if !gen_ids.insert(g.id.as_str()) {
            out.push(d("duplicate id"));
        }
        if !has_bus(&g.bus) {
            out.push(d(&format!("unknown bus {:?}", g.bus)));
        }
        if g.avail_min.len() != n_t || g.avail_max.len() != n_t {
            out.push(d("availability series length mismatch"));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !g.avail_min.iter().all(in_unit) || !g.avail_max.iter().all(in_unit) {
            out.push(d("availability out of [0,1]"));
        }
        if g.avail_min.iter().zip(&g.avail_max).any(|(lo, hi)| lo > hi) {
            out.push(d("minimum availability exceeds maximum"));
        }
        if !(g.p_nom_min.is_finite() && g.p_nom_max.is_finite()) || g.p_nom_min > g.p_nom_max {
            out.push(d("capacity bounds must satisfy g_min <= g_max"));
        }
        if g.fixed && g.p_nom_min != g.p_nom_max {
            out.push(d("fixed capacity requires g_min == g_max"));
        }
        if !(g.op_cost.is_finite() && g.cap_cost.is_finite()) {
            out.push(d("non-finite cost"));
        }
    }

    let mut su_ids = HashSet::new();
    for s in &network.storage_units {
        let d = |rule: &str| Diagnostic::new("storage unit", &s.id, rule);
        if !su_ids.insert(s.id.as_str()) {
            out.push(d("duplicate id"));
        }
        if !has_bus(&s.bus) {
            out.push(d(&format!("unknown bus {:?}", s.bus)));
        }
        if !(s.max_hours > 0.0 && s.max_hours.is_finite()) {
            out.push(d("q must be positive"));
        }
        if !(s.h_nom_min.is_finite() && s.h_nom_max.is_finite()) || s.h_nom_min > s.h_nom_max {
            out.push(d("power bounds must satisfy h_min <= h_max"));
        }
        let eff = |e: f64| e > 0.0 && e <= 1.0;
        if !eff(s.eta_char) || !eff(s.eta_dis) {
            out.push(d("efficiencies must lie in (0,1]"));
        } else if s.eta_char * s.eta_dis > 1.0 {
            out.push(d("round-trip efficiency exceeds 1"));
        }
        if !(0.0..1.0).contains(&s.eta_loss) {
            out.push(d("standing loss must lie in [0,1)"));
        }
        if s.dispatch_min.len() != n_t || s.dispatch_max.len() != n_t {
            out.push(d("dispatch series length mismatch"));
        }
        let sign_ok = s.dispatch_min.iter().all(|&v| (-1.0..=0.0).contains(&v))
            && s.dispatch_max.iter().all(|&v| (0.0..=1.0).contains(&v));
        if !sign_ok {
            out.push(d("dispatch availability must satisfy -1 <= min <= 0 <= max <= 1"));
        }
        if !(s.op_cost.is_finite() && s.cap_cost.is_finite()) {
            out.push(d("non-finite cost"));
        }
    }

    let mut load_ids = HashSet::new();
    for l in &network.loads {
        let d = |rule: &str| Diagnostic::new("load", &l.id, rule);
        if !load_ids.insert(l.id.as_str()) {
            out.push(d("duplicate id"));
        }
        if !has_bus(&l.bus) {
            out.push(d(&format!("unknown bus {:?}", l.bus)));
        }
        if l.demand.len() != n_t {
            out.push(d("demand series length mismatch"));
        }
        if !l.demand.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            out.push(d("demand must be non-negative"));
        }
    }

    out
}
