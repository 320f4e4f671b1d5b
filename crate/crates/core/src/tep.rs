//! Expansion cases: a new load bus tied into the grid by new circuits,
//! its maximum deliverable load, and the investment/loss cost model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::compliance::{scenario_sweep, LimitProfile, SweepReport};
use crate::exec::Executor;
use crate::network::{
    q_for_power_factor, Bus, BusId, BusKind, CircuitGroup, Load, Network, NetworkError,
    ShuntDevice, ShuntKind,
};
use crate::powerflow::SolverOptions;

/// New circuits from an existing bus to the new bus.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Connection {
    pub from_bus: BusId,
    pub n_circuits: u32,
    pub length_km: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TepCaseSpec {
    pub label: String,
    pub new_bus: BusId,
    pub base_kv: f64,
    pub connections: Vec<Connection>,
    pub power_factor: f64,
    /// Keep the new load at full value in every scenario.
    pub fixed_new_load: bool,
    /// Replacement shunt sets, keyed by scenario.
    pub shunts: BTreeMap<String, Vec<ShuntDevice>>,
    /// Catalog keys for the new circuits; the first existing group's
    /// design when absent.
    pub conductor: Option<String>,
    pub tower: Option<String>,
}

impl TepCaseSpec {
    /// Bus 18 fed from buses 16 and 17 over the standard corridors.
    pub fn standard(label: &str, n16: u32, n17: u32) -> Self {
        TepCaseSpec {
            label: label.to_string(),
            new_bus: BusId(18),
            base_kv: 500.0,
            connections: vec![
                Connection {
                    from_bus: BusId(16),
                    n_circuits: n16,
                    length_km: 324.54,
                },
                Connection {
                    from_bus: BusId(17),
                    n_circuits: n17,
                    length_km: 341.84,
                },
            ],
            power_factor: 0.9,
            fixed_new_load: true,
            shunts: BTreeMap::new(),
            conductor: None,
            tower: None,
        }
    }

    pub fn added_circuits(&self) -> u32 {
        self.connections.iter().map(|c| c.n_circuits).sum()
    }

    pub fn added_circuit_km(&self) -> f64 {
        self.connections
            .iter()
            .map(|c| c.n_circuits as f64 * c.length_km)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TepError {
    DuplicateBus(BusId),
    NoConnections,
    Network(NetworkError),
    /// The case fails the limits even with no load at the new bus.
    InfeasibleAtZero(String),
    NoLoadEntry(BusId),
}

impl fmt::Display for TepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TepError::DuplicateBus(b) => write!(f, "bus {b} already exists in the base network"),
            TepError::NoConnections => f.write_str("expansion case has no new circuits"),
            TepError::Network(e) => write!(f, "{e}"),
            TepError::InfeasibleAtZero(why) => {
                write!(f, "case is infeasible with no load at the new bus: {why}")
            }
            TepError::NoLoadEntry(b) => write!(f, "no load entry at bus {b}"),
        }
    }
}

impl core::error::Error for TepError {}

impl From<NetworkError> for TepError {
    fn from(e: NetworkError) -> Self {
        TepError::Network(e)
    }
}

/// Adds the new bus, its circuits and a zero load, and swaps in the
/// case's shunt sets.
pub fn build_tep_case(base: &Network, spec: &TepCaseSpec) -> Result<Network, TepError> {
    if base.bus(spec.new_bus).is_some() {
        return Err(TepError::DuplicateBus(spec.new_bus));
    }
    if spec.added_circuits() == 0 {
        return Err(TepError::NoConnections);
    }
    let template = base.circuit_groups.first();
    let conductor = spec
        .conductor
        .clone()
        .or_else(|| template.map(|g| g.conductor.clone()))
        .unwrap_or_default();
    let tower = spec
        .tower
        .clone()
        .or_else(|| template.map(|g| g.tower.clone()))
        .unwrap_or_default();

    let mut net = base.clone();
    net.buses.push(Bus {
        id: spec.new_bus,
        name: format!("Bus {}", spec.new_bus),
        base_kv: spec.base_kv,
        kind: BusKind::Pq,
        v_setpoint: None,
        angle_setpoint_deg: None,
    });
    for c in spec.connections.iter().filter(|c| c.n_circuits > 0) {
        net.circuit_groups.push(CircuitGroup {
            from_bus: c.from_bus,
            to_bus: spec.new_bus,
            n_circuits: c.n_circuits,
            length_km: c.length_km,
            conductor: conductor.clone(),
            tower: tower.clone(),
        });
    }
    net.loads.push(Load {
        bus: spec.new_bus,
        p_peak_mw: 0.0,
        q_peak_mvar: 0.0,
        power_factor: spec.power_factor,
        fixed: spec.fixed_new_load,
    });
    for (key, set) in &spec.shunts {
        if let Some(sc) = net.scenario_mut(key) {
            sc.shunts = set.clone();
            sc.declared_totals = None;
        }
    }
    net.check_structure()?;
    Ok(net)
}

/// Sets the new-bus load (P and its power-factor Q) in place.
pub fn set_new_load(net: &mut Network, bus: BusId, load_mw: f64) -> Result<(), TepError> {
    let l = net
        .loads
        .iter_mut()
        .find(|l| l.bus == bus)
        .ok_or(TepError::NoLoadEntry(bus))?;
    l.p_peak_mw = load_mw;
    l.q_peak_mvar = q_for_power_factor(load_mw, l.power_factor);
    Ok(())
}

/// The scenarios every expansion case must satisfy.
pub const TEP_SCENARIOS: [&str; 3] = ["peak", "dominant", "light"];

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Feasibility {
    pub load_mw: f64,
    pub pass: bool,
    /// Normal-condition losses of the first scenario, MW.
    pub peak_loss_mw: Option<f64>,
    /// Per scenario, the lowest new-bus voltage over the normal case and
    /// the outages whose system minimum falls on the new bus.
    pub new_bus_min_v: Vec<(String, f64)>,
    pub sweep: SweepReport,
}

/// Full normal + N-1 sweep of `net` with `load_mw` at `bus`.
pub fn feasibility<E: Executor>(
    net: &Network,
    bus: BusId,
    load_mw: f64,
    keys: &[&str],
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> Result<Feasibility, TepError> {
    let mut net = net.clone();
    set_new_load(&mut net, bus, load_mw)?;
    let sweep = scenario_sweep(&net, keys, opts, profile, exec);
    let peak_loss_mw = sweep
        .scenarios
        .first()
        .and_then(|s| s.normal.as_ref())
        .map(|n| n.losses_mw);
    let new_bus_min_v = sweep
        .scenarios
        .iter()
        .filter_map(|s| {
            let n1 = s.n1.as_ref()?;
            let idx = s
                .solution
                .as_ref()?
                .buses
                .iter()
                .position(|b| b.id == bus)?;
            let base_v = s.solution.as_ref()?.buses[idx].vm_pu;
            let v = n1
                .rows
                .iter()
                .filter_map(|r| r.lowest_voltage.filter(|(b, _)| *b == bus).map(|(_, v)| v))
                .fold(base_v, f64::min);
            Some((s.key.clone(), v))
        })
        .collect();
    Ok(Feasibility {
        load_mw,
        pass: sweep.pass(),
        peak_loss_mw,
        new_bus_min_v,
        sweep,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Probe {
    pub load_mw: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TepResult {
    pub label: String,
    pub max_load_mw: f64,
    pub peak_loss_mw: f64,
    /// Light-load reactors beyond the base system's.
    pub additional_reactor_mvar: f64,
    pub probes: Vec<Probe>,
    /// Set when verification contradicted the monotone search and a linear
    /// scan was used instead.
    pub anomaly: Option<String>,
    pub at_max: Option<Feasibility>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchOptions {
    pub step_mw: f64,
    /// Search ceiling; a case still feasible here reports this value.
    pub max_mw: f64,
    pub reactor_scenario: String,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            step_mw: 5.0,
            max_mw: 5000.0,
            reactor_scenario: "light".into(),
        }
    }
}

fn reactor_total(net: &Network, key: &str) -> f64 {
    net.scenario(key)
        .map(|s| s.totals().reactor_mvar)
        .unwrap_or(0.0)
}

/// Largest multiple of `step_mw` at the new bus that passes
/// [`feasibility`] over all [`TEP_SCENARIOS`].
///
/// Feasibility is assumed monotone for the bisection, then checked: the
/// result and result + step are re-probed, along with half the result. If
/// any disagrees, a descending linear scan replaces the bisection answer.
pub fn max_deliverable_load<E: Executor>(
    base: &Network,
    spec: &TepCaseSpec,
    search: &SearchOptions,
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> Result<TepResult, TepError> {
    let net = build_tep_case(base, spec)?;
    let step = search.step_mw;
    let k_cap = (search.max_mw / step).floor() as u64;
    let mut probes = Vec::new();
    let mut probe = |k: u64| -> Result<Feasibility, TepError> {
        let f = feasibility(
            &net,
            spec.new_bus,
            k as f64 * step,
            &TEP_SCENARIOS,
            opts,
            profile,
            exec,
        )?;
        probes.push(Probe {
            load_mw: f.load_mw,
            pass: f.pass,
        });
        Ok(f)
    };

    let zero = probe(0)?;
    if !zero.pass {
        return Err(TepError::InfeasibleAtZero(first_failure(&zero.sweep)));
    }
    // Grow until infeasible, then bisect on step multiples.
    let (mut lo, mut hi) = (0u64, 1u64);
    let mut best = zero;
    loop {
        if hi > k_cap {
            hi = k_cap + 1;
            break;
        }
        let f = probe(hi)?;
        if !f.pass {
            break;
        }
        lo = hi;
        best = f;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let f = probe(mid)?;
        if f.pass {
            lo = mid;
            best = f;
        } else {
            hi = mid;
        }
    }

    let mut anomaly = None;
    let verify_lo = probe(lo)?.pass;
    let verify_hi = hi > k_cap || !probe(hi)?.pass;
    let verify_half = probe(lo / 2)?.pass;
    if !(verify_lo && verify_hi && verify_half) {
        anomaly = Some(format!(
            "non-monotone feasibility near {} MW (result {verify_lo}, next {verify_hi}, half {verify_half}); used linear scan",
            lo as f64 * step
        ));
        let top = hi.min(k_cap);
        let mut found = None;
        for k in (0..=top).rev() {
            let f = probe(k)?;
            if f.pass {
                found = Some((k, f));
                break;
            }
        }
        let (k, f) = found.expect("zero load passed");
        lo = k;
        best = f;
    }

    Ok(TepResult {
        label: spec.label.clone(),
        max_load_mw: lo as f64 * step,
        peak_loss_mw: best.peak_loss_mw.unwrap_or(0.0),
        additional_reactor_mvar: reactor_total(&net, &search.reactor_scenario)
            - reactor_total(base, &search.reactor_scenario),
        probes,
        anomaly,
        at_max: Some(best),
    })
}

/// Descending-scan reference for [`max_deliverable_load`]: every step from
/// `max_mw` down to zero, first pass wins.
pub fn max_load_linear_scan<E: Executor>(
    base: &Network,
    spec: &TepCaseSpec,
    search: &SearchOptions,
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> Result<Option<f64>, TepError> {
    let net = build_tep_case(base, spec)?;
    let k_cap = (search.max_mw / search.step_mw).floor() as u64;
    for k in (0..=k_cap).rev() {
        let mw = k as f64 * search.step_mw;
        if feasibility(&net, spec.new_bus, mw, &TEP_SCENARIOS, opts, profile, exec)?.pass {
            return Ok(Some(mw));
        }
    }
    Ok(None)
}

fn first_failure(sweep: &SweepReport) -> String {
    for s in &sweep.scenarios {
        if let Some(e) = &s.error {
            return format!("{}: {e}", s.key);
        }
        if let Some(v) = s.normal_violations.first() {
            return format!("{} normal: {v}", s.key);
        }
        if let Some(n1) = &s.n1 {
            if let Some(r) = n1.rows.iter().find(|r| !r.compliant()) {
                let why = r
                    .violations
                    .first()
                    .map(|v| v.to_string())
                    .or_else(|| r.error.clone())
                    .unwrap_or_default();
                return format!("{} outage {}: {why}", s.key, r.outage);
            }
        }
    }
    String::from("unknown")
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostParams {
    /// M$ per circuit-km.
    pub line_cost: f64,
    /// M$ per bay.
    pub bay_cost: f64,
    /// M$ per Mvar of reactor.
    pub reactor_cost: f64,
    /// M$ per MW of generating capacity.
    pub gen_capital: f64,
    pub om_per_mw_year: f64,
    pub fuel_per_mw_year: f64,
    pub horizon_years: f64,
    /// Clamp loss-driven components at zero when losses fall.
    pub floor_negative_loss: bool,
}

impl CostParams {
    /// Fuel cost of 1 MW run all year, M$: price·heat rate·8760 h.
    pub fn fuel_from(gas_usd_per_mmbtu: f64, heat_rate_mmbtu_per_mwh: f64) -> f64 {
        gas_usd_per_mmbtu * heat_rate_mmbtu_per_mwh * 8760.0 / 1e6
    }

    /// O&M of 1 MW for a year, M$: fixed $/MW-yr plus variable $/MWh·8760 h.
    pub fn om_from(fixed_usd_per_mw_year: f64, variable_usd_per_mwh: f64) -> f64 {
        (fixed_usd_per_mw_year + variable_usd_per_mwh * 8760.0) / 1e6
    }
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            line_cost: 2.672,
            bay_cost: 7.0,
            reactor_cost: 0.023625,
            gen_capital: 1.04,
            om_per_mw_year: 0.046819,
            fuel_per_mw_year: 0.147076,
            horizon_years: 30.0,
            floor_negative_loss: false,
        }
    }
}

/// Cost of one expansion case, M$.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostBreakdown {
    pub label: String,
    pub line: f64,
    pub bay: f64,
    pub reactor: f64,
    pub loss_capital: f64,
    pub loss_fuel: f64,
    pub loss_om: f64,
    pub total: f64,
    /// M$ per MW delivered; zero when nothing is delivered.
    pub avg_per_mw: f64,
    pub delta_loss_mw: f64,
    pub warnings: Vec<String>,
}

/// Line, bay, reactor and loss costs of a case.
///
/// Bays: two per added circuit plus one for the shunt bay at the new bus,
/// or none when nothing is added.
pub fn tep_cost(
    spec: &TepCaseSpec,
    result: &TepResult,
    params: &CostParams,
    base_peak_loss_mw: f64,
) -> CostBreakdown {
    let circuits = spec.added_circuits();
    let bays = if circuits == 0 { 0 } else { 2 * circuits + 1 };
    let mut warnings = Vec::new();
    let delta = result.peak_loss_mw - base_peak_loss_mw;
    let mut d = delta;
    if delta < 0.0 {
        warnings.push(format!("peak loss falls by {:.3} MW", -delta));
        if params.floor_negative_loss {
            d = 0.0;
        }
    }
    if result.max_load_mw <= 0.0 {
        warnings.push(String::from("no load delivered; average cost undefined"));
    }
    let line = spec.added_circuit_km() * params.line_cost;
    let bay = bays as f64 * params.bay_cost;
    let reactor = result.additional_reactor_mvar * params.reactor_cost;
    let loss_capital = d * params.gen_capital;
    let loss_fuel = d * params.fuel_per_mw_year * params.horizon_years;
    let loss_om = d * params.om_per_mw_year * params.horizon_years;
    let total = line + bay + reactor + loss_capital + loss_fuel + loss_om;
    CostBreakdown {
        label: spec.label.clone(),
        line,
        bay,
        reactor,
        loss_capital,
        loss_fuel,
        loss_om,
        total,
        avg_per_mw: if result.max_load_mw > 0.0 {
            total / result.max_load_mw
        } else {
            0.0
        },
        delta_loss_mw: delta,
        warnings,
    }
}

/// Indices of `costs`, cheapest per MW first; ties go to the lower total,
/// then the label.
pub fn compare_cases(costs: &[CostBreakdown]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..costs.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&costs[a], &costs[b]);
        x.avg_per_mw
            .total_cmp(&y.avg_per_mw)
            .then(x.total.total_cmp(&y.total))
            .then_with(|| x.label.cmp(&y.label))
    });
    idx
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TunerMove {
    pub scenario: String,
    pub bus: BusId,
    /// Signed Mvar change of the net shunt (capacitive positive).
    pub delta_mvar: f64,
}

/// Greedy shunt adjustment. Heuristic, not an optimiser.
///
/// Repeatedly finds the worst voltage violation of the scenario's normal
/// and N-1 sweep and moves the shunt at the nearest candidate bus by
/// `step_mvar` against it (more reactor for over-voltage, less reactor or
/// more capacitor for under-voltage). Stops when compliant, when no move
/// helps, or after `max_moves`.
#[allow(clippy::too_many_arguments)]
pub fn tune_shunts<E: Executor>(
    net: &mut Network,
    key: &str,
    candidates: &[BusId],
    step_mvar: f64,
    max_moves: usize,
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> Vec<TunerMove> {
    use crate::compliance::ViolationKind;
    let mut moves = Vec::new();
    for _ in 0..max_moves {
        let sweep = scenario_sweep(net, &[key], opts, profile, exec);
        let Some(rep) = sweep.scenarios.first() else {
            break;
        };
        let violations = rep.normal_violations.iter().chain(
            rep.n1
                .iter()
                .flat_map(|n| n.rows.iter().flat_map(|r| r.violations.iter())),
        );
        let mut worst: Option<(f64, BusId, f64)> = None;
        for v in violations {
            let excess = (v.value - v.bound).abs();
            let dir = match v.kind {
                ViolationKind::OverVoltage => -1.0,
                ViolationKind::UnderVoltage => 1.0,
                _ => continue,
            };
            let Ok(id) = v.subject.parse::<u32>() else {
                continue;
            };
            if worst.is_none_or(|w| excess > w.0) {
                worst = Some((excess, BusId(id), dir));
            }
        }
        let Some((_, bus, dir)) = worst else { break };
        let target = if candidates.contains(&bus) {
            bus
        } else {
            match nearest_candidate(net, bus, candidates) {
                Some(b) => b,
                None => break,
            }
        };
        let Some(sc) = net.scenario_mut(key) else {
            break;
        };
        adjust_shunt(&mut sc.shunts, target, dir * step_mvar);
        sc.declared_totals = None;
        moves.push(TunerMove {
            scenario: key.to_string(),
            bus: target,
            delta_mvar: dir * step_mvar,
        });
    }
    moves
}

fn adjust_shunt(shunts: &mut Vec<ShuntDevice>, bus: BusId, delta: f64) {
    let current: f64 = shunts
        .iter()
        .filter(|s| s.bus == bus)
        .map(ShuntDevice::signed_mvar)
        .sum();
    shunts.retain(|s| s.bus != bus);
    let next = current + delta;
    if next.abs() > 1e-9 {
        shunts.push(ShuntDevice {
            bus,
            kind: if next > 0.0 {
                ShuntKind::Capacitor
            } else {
                ShuntKind::Reactor
            },
            mvar_at_nominal: next.abs(),
        });
    }
}

/// Candidate bus with the fewest hops to `bus`.
fn nearest_candidate(net: &Network, bus: BusId, candidates: &[BusId]) -> Option<BusId> {
    let n = net.buses.len();
    let start = net.bus_index(bus)?;
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut queue = alloc::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for g in &net.circuit_groups {
            let (a, b) = (net.bus_index(g.from_bus)?, net.bus_index(g.to_bus)?);
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    candidates
        .iter()
        .filter_map(|c| net.bus_index(*c).map(|i| (dist[i], *c)))
        .filter(|(d, _)| *d != usize::MAX)
        .min()
        .map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::network::fixtures;

    fn result(max: f64, loss: f64, reactor: f64) -> TepResult {
        TepResult {
            label: String::new(),
            max_load_mw: max,
            peak_loss_mw: loss,
            additional_reactor_mvar: reactor,
            probes: vec![],
            anomaly: None,
            at_max: None,
        }
    }

    #[test]
    fn default_rates_reproduce_from_inputs() {
        let p = CostParams::default();
        assert!((CostParams::fuel_from(2.665, 6.30) - p.fuel_per_mw_year).abs() < 5e-7);
        assert!((CostParams::om_from(30_000.0, 1.92) - p.om_per_mw_year).abs() < 5e-7);
    }

    #[test]
    fn zero_case_costs_nothing() {
        let mut spec = TepCaseSpec::standard("0", 0, 0);
        spec.connections.clear();
        let c = tep_cost(
            &spec,
            &result(100.0, 321.2, 0.0),
            &CostParams::default(),
            321.2,
        );
        assert_eq!(
            (
                c.line,
                c.bay,
                c.reactor,
                c.loss_capital,
                c.loss_fuel,
                c.loss_om,
                c.total
            ),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn negative_loss_warns_and_optionally_floors() {
        let spec = TepCaseSpec::standard("x", 1, 1);
        let c = tep_cost(
            &spec,
            &result(100.0, 300.0, 0.0),
            &CostParams::default(),
            321.2,
        );
        assert_eq!(c.warnings.len(), 1);
        assert!(c.loss_capital < 0.0);
        let params = CostParams {
            floor_negative_loss: true,
            ..Default::default()
        };
        assert_eq!(
            tep_cost(&spec, &result(100.0, 300.0, 0.0), &params, 321.2).loss_capital,
            0.0
        );
    }

    #[test]
    fn tie_goes_to_lower_total() {
        let mk = |label: &str, total: f64| CostBreakdown {
            label: label.into(),
            line: total,
            bay: 0.0,
            reactor: 0.0,
            loss_capital: 0.0,
            loss_fuel: 0.0,
            loss_om: 0.0,
            total,
            avg_per_mw: 2.0,
            delta_loss_mw: 0.0,
            warnings: vec![],
        };
        assert_eq!(compare_cases(&[mk("A", 20.0), mk("B", 10.0)]), vec![1, 0]);
        assert_eq!(compare_cases(&[mk("A", 20.0)]), vec![0]);
    }

    #[test]
    fn build_rejects_bad_specs() {
        let net = fixtures::three_bus();
        let mut spec = TepCaseSpec::standard("x", 0, 0);
        spec.new_bus = BusId(4);
        spec.connections = vec![Connection {
            from_bus: BusId(3),
            n_circuits: 0,
            length_km: 100.0,
        }];
        assert_eq!(build_tep_case(&net, &spec), Err(TepError::NoConnections));
        spec.new_bus = BusId(3);
        spec.connections[0].n_circuits = 1;
        assert_eq!(
            build_tep_case(&net, &spec),
            Err(TepError::DuplicateBus(BusId(3)))
        );
    }

    /// A radial spur off the toy grid; small enough to scan exhaustively.
    fn spur() -> (Network, TepCaseSpec) {
        let mut net = fixtures::three_bus();
        net.scenarios[0].key = "peak".into();
        for (key, s) in [("dominant", 0.6), ("light", 0.4)] {
            let mut sc = net.scenarios[0].clone();
            sc.key = key.into();
            sc.load_scale = s;
            sc.dispatch_scale = s;
            net.scenarios.push(sc);
        }
        let mut spec = TepCaseSpec::standard("spur", 0, 0);
        spec.new_bus = BusId(4);
        spec.connections = vec![Connection {
            from_bus: BusId(3),
            n_circuits: 2,
            length_km: 120.0,
        }];
        (net, spec)
    }

    #[test]
    fn bisection_agrees_with_linear_scan() {
        let (net, spec) = spur();
        let opts = SolverOptions::default();
        let profile = LimitProfile {
            v_max: f64::INFINITY,
            ..Default::default()
        };
        let search = SearchOptions {
            step_mw: 25.0,
            max_mw: 1500.0,
            reactor_scenario: "light".into(),
        };
        let r = max_deliverable_load(&net, &spec, &search, &opts, &profile, &Sequential).unwrap();
        let scan =
            max_load_linear_scan(&net, &spec, &search, &opts, &profile, &Sequential).unwrap();
        assert_eq!(Some(r.max_load_mw), scan);
        assert!(r.anomaly.is_none());
        assert!(r.max_load_mw > 0.0 && r.max_load_mw < 1500.0);
    }
}
