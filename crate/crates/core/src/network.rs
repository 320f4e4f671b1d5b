//! Grid data model, scenario assembly and validation.
//!
//! A [`Network`] is the static description: buses, circuit groups, the
//! conductor/tower catalogs and named loading scenarios. [`apply_scenario`]
//! turns it into a [`CaseSpec`], a flat per-circuit case that the solver
//! consumes directly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graph;
use crate::line::{self, ConductorSpec, LineError, PiModel, TowerGeometry, UnitLineParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(transparent)
)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "lowercase")
)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bus {
    pub id: BusId,
    pub name: String,
    pub base_kv: f64,
    pub kind: BusKind,
    /// Slack and PV buses only.
    pub v_setpoint: Option<f64>,
    /// Slack only, degrees.
    pub angle_setpoint_deg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircuitGroup {
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub n_circuits: u32,
    pub length_km: f64,
    pub conductor: String,
    pub tower: String,
}

impl CircuitGroup {
    pub fn label(&self) -> String {
        format!("{}-{}", self.from_bus, self.to_bus)
    }

    pub fn circuit_km(&self) -> f64 {
        self.n_circuits as f64 * self.length_km
    }
}

/// Reactive capability as multiples of dispatched P.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReactiveRule {
    pub lag_factor: f64,
    pub lead_factor: f64,
}

impl Default for ReactiveRule {
    fn default() -> Self {
        ReactiveRule {
            lag_factor: 0.6,
            lead_factor: -0.3,
        }
    }
}

impl ReactiveRule {
    /// (q_min, q_max) for a dispatch in MW.
    pub fn limits(&self, p_mw: f64) -> (f64, f64) {
        (self.lead_factor * p_mw, self.lag_factor * p_mw)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Generator {
    pub bus: BusId,
    pub p_peak_mw: f64,
    pub q_rule: ReactiveRule,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Load {
    pub bus: BusId,
    pub p_peak_mw: f64,
    pub q_peak_mvar: f64,
    pub power_factor: f64,
    /// Held at its peak value in every scenario instead of following
    /// `load_scale`.
    pub fixed: bool,
}

impl Load {
    pub fn with_power_factor(bus: BusId, p_mw: f64, pf: f64) -> Self {
        Load {
            bus,
            p_peak_mw: p_mw,
            q_peak_mvar: q_for_power_factor(p_mw, pf),
            power_factor: pf,
            fixed: false,
        }
    }
}

/// `P·tan(arccos pf)`.
pub fn q_for_power_factor(p_mw: f64, pf: f64) -> f64 {
    p_mw * pf.acos().tan()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "lowercase")
)]
pub enum ShuntKind {
    Capacitor,
    Reactor,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShuntDevice {
    pub bus: BusId,
    pub kind: ShuntKind,
    /// Rating at 1.0 p.u.; the actual injection follows |V|².
    pub mvar_at_nominal: f64,
}

impl ShuntDevice {
    /// Signed Mvar at 1.0 p.u.: positive injects.
    pub fn signed_mvar(&self) -> f64 {
        match self.kind {
            ShuntKind::Capacitor => self.mvar_at_nominal,
            ShuntKind::Reactor => -self.mvar_at_nominal,
        }
    }
}

/// Shunt totals a scenario is expected to carry; checked by
/// [`validate_network`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShuntTotals {
    pub capacitor_mvar: f64,
    pub reactor_mvar: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub key: String,
    pub load_scale: f64,
    pub dispatch_scale: f64,
    pub pv_voltage_override: Option<f64>,
    pub slack_voltage: Option<f64>,
    pub shunts: Vec<ShuntDevice>,
    pub declared_totals: Option<ShuntTotals>,
}

impl Scenario {
    pub fn totals(&self) -> ShuntTotals {
        let mut t = ShuntTotals::default();
        for s in &self.shunts {
            match s.kind {
                ShuntKind::Capacitor => t.capacitor_mvar += s.mvar_at_nominal,
                ShuntKind::Reactor => t.reactor_mvar += s.mvar_at_nominal,
            }
        }
        t
    }
}

/// Per-km constants quoted by a design sheet, in R/L/C form.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TabulatedConstants {
    pub r_ohm_per_km: f64,
    pub l_mh_per_km: f64,
    pub c_nf_per_km: f64,
}

/// A tower catalog entry. When `tabulated` is present its constants are
/// used for the circuits instead of the geometry-derived ones.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TowerDesign {
    pub geometry: TowerGeometry,
    pub tabulated: Option<TabulatedConstants>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    pub frequency_hz: f64,
    /// Fraction of the thermal limit usable in operation.
    pub line_loading_cap: f64,
    pub buses: Vec<Bus>,
    pub circuit_groups: Vec<CircuitGroup>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub scenarios: Vec<Scenario>,
    pub conductors: BTreeMap<String, ConductorSpec>,
    pub towers: BTreeMap<String, TowerDesign>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkError {
    DuplicateBus(BusId),
    DanglingBus { context: String, bus: BusId },
    DanglingCatalog { context: String, key: String },
    SelfLoop { bus: BusId },
    InvalidGroup { label: String, reason: &'static str },
    SlackCount(usize),
    Disconnected { islanded: Vec<BusId> },
    DuplicateScenario(String),
    UnknownScenario(String),
    Line { label: String, source: LineError },
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::DuplicateBus(id) => write!(f, "duplicate bus id {id}"),
            NetworkError::DanglingBus { context, bus } => {
                write!(f, "{context} references unknown bus {bus}")
            }
            NetworkError::DanglingCatalog { context, key } => {
                write!(f, "{context} references unknown catalog entry {key:?}")
            }
            NetworkError::SelfLoop { bus } => write!(f, "self-loop circuit at bus {bus}"),
            NetworkError::InvalidGroup { label, reason } => {
                write!(f, "circuit group {label}: {reason}")
            }
            NetworkError::SlackCount(n) => write!(f, "expected exactly one slack bus, found {n}"),
            NetworkError::Disconnected { islanded } => {
                write!(f, "disconnected graph: buses ")?;
                write_ids(f, islanded)?;
                write!(f, " are not reachable from the slack bus")
            }
            NetworkError::DuplicateScenario(k) => write!(f, "duplicate scenario {k:?}"),
            NetworkError::UnknownScenario(k) => write!(f, "unknown scenario {k:?}"),
            NetworkError::Line { label, source } => write!(f, "circuit group {label}: {source}"),
        }
    }
}

impl core::error::Error for NetworkError {}

fn write_ids(f: &mut fmt::Formatter<'_>, ids: &[BusId]) -> fmt::Result {
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{id}")?;
    }
    Ok(())
}

impl Network {
    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn scenario(&self, key: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.key == key)
    }

    pub fn scenario_mut(&mut self, key: &str) -> Option<&mut Scenario> {
        self.scenarios.iter_mut().find(|s| s.key == key)
    }

    pub fn total_circuits(&self) -> u32 {
        self.circuit_groups.iter().map(|g| g.n_circuits).sum()
    }

    /// Hard structural checks: anything failing here makes the network
    /// unusable for a solve.
    pub fn check_structure(&self) -> Result<(), NetworkError> {
        for (i, b) in self.buses.iter().enumerate() {
            if self.buses[..i].iter().any(|o| o.id == b.id) {
                return Err(NetworkError::DuplicateBus(b.id));
            }
        }
        let slack = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .count();
        if slack != 1 {
            return Err(NetworkError::SlackCount(slack));
        }
        let need_bus = |context: String, bus: BusId| {
            if self.bus_index(bus).is_none() {
                Err(NetworkError::DanglingBus { context, bus })
            } else {
                Ok(())
            }
        };
        for g in &self.circuit_groups {
            let label = g.label();
            if g.from_bus == g.to_bus {
                return Err(NetworkError::SelfLoop { bus: g.from_bus });
            }
            need_bus(format!("circuit group {label}"), g.from_bus)?;
            need_bus(format!("circuit group {label}"), g.to_bus)?;
            if g.n_circuits == 0 {
                return Err(NetworkError::InvalidGroup {
                    label,
                    reason: "needs at least one circuit",
                });
            }
            if !(g.length_km > 0.0) || !g.length_km.is_finite() {
                return Err(NetworkError::InvalidGroup {
                    label,
                    reason: "length must be positive",
                });
            }
            if !self.conductors.contains_key(&g.conductor) {
                return Err(NetworkError::DanglingCatalog {
                    context: format!("circuit group {label}"),
                    key: g.conductor.clone(),
                });
            }
            if !self.towers.contains_key(&g.tower) {
                return Err(NetworkError::DanglingCatalog {
                    context: format!("circuit group {label}"),
                    key: g.tower.clone(),
                });
            }
        }
        for gen in &self.generators {
            need_bus(String::from("generator"), gen.bus)?;
        }
        for l in &self.loads {
            need_bus(String::from("load"), l.bus)?;
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if self.scenarios[..i].iter().any(|o| o.key == s.key) {
                return Err(NetworkError::DuplicateScenario(s.key.clone()));
            }
            for sh in &s.shunts {
                need_bus(format!("scenario {:?} shunt", s.key), sh.bus)?;
            }
        }
        let islanded = self.unreachable_buses(None);
        if !islanded.is_empty() {
            return Err(NetworkError::Disconnected { islanded });
        }
        Ok(())
    }

    /// One edge per circuit, as bus ordinals, in declaration order.
    pub(crate) fn circuit_edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (gi, g) in self.circuit_groups.iter().enumerate() {
            if let (Some(a), Some(b)) = (self.bus_index(g.from_bus), self.bus_index(g.to_bus)) {
                for _ in 0..g.n_circuits {
                    out.push((gi, a, b));
                }
            }
        }
        out
    }

    /// Buses cut off from the slack (or the first bus) when one circuit of
    /// group `without` is removed.
    pub fn unreachable_buses(&self, without: Option<usize>) -> Vec<BusId> {
        let n = self.buses.len();
        if n == 0 {
            return Vec::new();
        }
        let root = self
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .unwrap_or(0);
        let mut skipped = false;
        let edges = self.circuit_edges().into_iter().filter_map(|(g, a, b)| {
            if Some(g) == without && !skipped {
                skipped = true;
                None
            } else {
                Some((a, b))
            }
        });
        graph::cut_off_from(n, root, edges)
            .into_iter()
            .map(|i| self.buses[i].id)
            .collect()
    }

    pub fn unit_params(&self, group: &CircuitGroup) -> Result<UnitLineParams, NetworkError> {
        let label = group.label();
        let tower = self
            .towers
            .get(&group.tower)
            .ok_or_else(|| NetworkError::DanglingCatalog {
                context: format!("circuit group {label}"),
                key: group.tower.clone(),
            })?;
        if let Some(t) = tower.tabulated {
            return Ok(UnitLineParams::from_rlc(
                t.r_ohm_per_km,
                t.l_mh_per_km,
                t.c_nf_per_km,
                self.frequency_hz,
            ));
        }
        let cond = self.conductor(group)?;
        line::unit_parameters(&tower.geometry, cond, self.frequency_hz)
            .map_err(|source| NetworkError::Line { label, source })
    }

    fn conductor(&self, group: &CircuitGroup) -> Result<&ConductorSpec, NetworkError> {
        self.conductors
            .get(&group.conductor)
            .ok_or_else(|| NetworkError::DanglingCatalog {
                context: format!("circuit group {}", group.label()),
                key: group.conductor.clone(),
            })
    }

    /// Operational MVA rating of one circuit of `group`.
    pub fn circuit_rating(&self, group: &CircuitGroup) -> Result<f64, NetworkError> {
        let cond = self.conductor(group)?;
        let tower = &self.towers[&group.tower];
        let kv = self.bus(group.from_bus).map(|b| b.base_kv).unwrap_or(0.0);
        Ok(
            line::thermal_rating(kv, cond, tower.geometry.bundle_count, self.line_loading_cap)
                .rating_mva,
        )
    }

    /// Equivalent π of one circuit of `group`.
    pub fn circuit_pi(&self, group: &CircuitGroup) -> Result<PiModel, NetworkError> {
        let u = self.unit_params(group)?;
        Ok(line::equivalent_pi(
            &u,
            group.length_km,
            self.circuit_rating(group)?,
        ))
    }
}

/// One bus of a solvable case, with every scenario adjustment applied.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseBus {
    pub id: BusId,
    pub base_kv: f64,
    pub kind: BusKind,
    pub v_set: f64,
    pub angle_deg: f64,
    pub p_load_mw: f64,
    pub q_load_mvar: f64,
    pub p_gen_mw: f64,
    /// Reactive limits of the generation at this bus; `None` means
    /// unconstrained (slack, or no generator).
    pub q_limits_mvar: Option<(f64, f64)>,
    /// Net shunt Mvar at 1.0 p.u.: capacitors positive, reactors negative.
    pub shunt_mvar: f64,
}

/// One circuit of a solvable case.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Branch {
    pub group: usize,
    /// 1-based ordinal within the group.
    pub circuit: u32,
    pub label: String,
    pub from: usize,
    pub to: usize,
    pub pi: PiModel,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CaseSpec {
    pub scenario: String,
    pub base_mva: f64,
    pub buses: Vec<CaseBus>,
    pub branches: Vec<Branch>,
    /// Number of circuits per group, indexed like `Network::circuit_groups`.
    pub group_sizes: Vec<u32>,
}

impl CaseSpec {
    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// The case with one circuit of a group taken out of service.
    pub fn without_circuit(&self, group: usize, circuit: u32) -> CaseSpec {
        let mut c = self.clone();
        c.branches
            .retain(|b| !(b.group == group && b.circuit == circuit));
        c
    }

    /// Buses unreachable from the slack.
    pub fn islanded_buses(&self) -> Vec<BusId> {
        let root = self
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .unwrap_or(0);
        graph::cut_off_from(
            self.buses.len(),
            root,
            self.branches.iter().map(|b| (b.from, b.to)),
        )
        .into_iter()
        .map(|i| self.buses[i].id)
        .collect()
    }
}

/// Concrete case for one loading scenario.
pub fn apply_scenario(net: &Network, key: &str) -> Result<CaseSpec, NetworkError> {
    let sc = net
        .scenario(key)
        .ok_or_else(|| NetworkError::UnknownScenario(key.into()))?;
    net.check_structure()?;

    let mut buses: Vec<CaseBus> = net
        .buses
        .iter()
        .map(|b| {
            let v_set = match b.kind {
                BusKind::Slack => sc.slack_voltage.or(b.v_setpoint).unwrap_or(1.0),
                BusKind::Pv => sc.pv_voltage_override.or(b.v_setpoint).unwrap_or(1.0),
                BusKind::Pq => 1.0,
            };
            CaseBus {
                id: b.id,
                base_kv: b.base_kv,
                kind: b.kind,
                v_set,
                angle_deg: if b.kind == BusKind::Slack {
                    b.angle_setpoint_deg.unwrap_or(0.0)
                } else {
                    0.0
                },
                p_load_mw: 0.0,
                q_load_mvar: 0.0,
                p_gen_mw: 0.0,
                q_limits_mvar: None,
                shunt_mvar: 0.0,
            }
        })
        .collect();

    for l in &net.loads {
        let i = net.bus_index(l.bus).expect("checked");
        let s = if l.fixed { 1.0 } else { sc.load_scale };
        buses[i].p_load_mw += l.p_peak_mw * s;
        buses[i].q_load_mvar += l.q_peak_mvar * s;
    }
    for g in &net.generators {
        let i = net.bus_index(g.bus).expect("checked");
        let p = g.p_peak_mw * sc.dispatch_scale;
        let (qmin, qmax) = g.q_rule.limits(p);
        let b = &mut buses[i];
        if b.kind == BusKind::Slack {
            continue;
        }
        b.p_gen_mw += p;
        if b.kind == BusKind::Pv {
            b.q_limits_mvar = Some(match b.q_limits_mvar {
                Some((lo, hi)) => (lo + qmin, hi + qmax),
                None => (qmin, qmax),
            });
        }
    }
    for s in &sc.shunts {
        let i = net.bus_index(s.bus).expect("checked");
        buses[i].shunt_mvar += s.signed_mvar();
    }

    let mut branches = Vec::with_capacity(net.total_circuits() as usize);
    for (gi, g) in net.circuit_groups.iter().enumerate() {
        let pi = net.circuit_pi(g)?;
        let from = net.bus_index(g.from_bus).expect("checked");
        let to = net.bus_index(g.to_bus).expect("checked");
        for c in 1..=g.n_circuits {
            branches.push(Branch {
                group: gi,
                circuit: c,
                label: g.label(),
                from,
                to,
                pi,
            });
        }
    }

    Ok(CaseSpec {
        scenario: sc.key.clone(),
        base_mva: net.base_mva,
        buses,
        branches,
        group_sizes: net.circuit_groups.iter().map(|g| g.n_circuits).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum IssueKind {
    Setpoint,
    BaseVoltage,
    PowerFactor,
    ShuntRating,
    ShuntTotal,
    ScenarioScale,
    ReactiveRule,
    LineParameters,
    OutageIslands,
    Structure,
}

/// A broken invariant found by [`validate_network`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Largest tolerated gap between a load's Q and its power-factor value.
pub const PF_TOLERANCE_MVAR: f64 = 0.05;

/// All invariant violations; empty when the network is sound.
pub fn validate_network(net: &Network) -> Vec<Issue> {
    let mut out = Vec::new();
    let mut push = |kind, message: String| out.push(Issue { kind, message });

    if let Err(e) = net.check_structure() {
        push(IssueKind::Structure, format!("{e}"));
        return out;
    }

    for b in &net.buses {
        if !(b.base_kv > 0.0) {
            push(
                IssueKind::BaseVoltage,
                format!("bus {} base voltage {} kV is not positive", b.id, b.base_kv),
            );
        }
        match (b.kind, b.v_setpoint) {
            (BusKind::Pq, _) => {}
            (_, None) => push(
                IssueKind::Setpoint,
                format!("bus {} has no voltage setpoint", b.id),
            ),
            (_, Some(v)) if !(0.9..=1.1).contains(&v) => push(
                IssueKind::Setpoint,
                format!("bus {} setpoint {v} p.u. outside [0.9, 1.1]", b.id),
            ),
            _ => {}
        }
    }

    for l in &net.loads {
        if !(l.power_factor > 0.0 && l.power_factor <= 1.0) {
            push(
                IssueKind::PowerFactor,
                format!(
                    "bus {} load power factor {} outside (0, 1]",
                    l.bus, l.power_factor
                ),
            );
            continue;
        }
        let expected = q_for_power_factor(l.p_peak_mw, l.power_factor);
        if (l.q_peak_mvar - expected).abs() > PF_TOLERANCE_MVAR {
            push(
                IssueKind::PowerFactor,
                format!(
                    "bus {} load Q {:.2} Mvar does not match pf {} (expected {:.2})",
                    l.bus, l.q_peak_mvar, l.power_factor, expected
                ),
            );
        }
    }

    for g in &net.generators {
        let r = g.q_rule;
        if r.lag_factor < 0.0 || r.lead_factor > 0.0 {
            push(
                IssueKind::ReactiveRule,
                format!(
                    "generator at bus {}: reactive rule ({}, {}) does not bracket zero",
                    g.bus, r.lag_factor, r.lead_factor
                ),
            );
        }
    }

    for s in &net.scenarios {
        if !(s.load_scale > 0.0 && s.load_scale <= 1.0) {
            push(
                IssueKind::ScenarioScale,
                format!(
                    "scenario {} load scale {} outside (0, 1]",
                    s.key, s.load_scale
                ),
            );
        }
        if !(s.dispatch_scale >= 0.0) {
            push(
                IssueKind::ScenarioScale,
                format!(
                    "scenario {} dispatch scale {} is negative",
                    s.key, s.dispatch_scale
                ),
            );
        }
        for v in [s.pv_voltage_override, s.slack_voltage]
            .into_iter()
            .flatten()
        {
            if !(0.9..=1.1).contains(&v) {
                push(
                    IssueKind::Setpoint,
                    format!("scenario {} voltage {v} p.u. outside [0.9, 1.1]", s.key),
                );
            }
        }
        for sh in &s.shunts {
            if !(sh.mvar_at_nominal > 0.0) {
                push(
                    IssueKind::ShuntRating,
                    format!(
                        "scenario {} shunt at bus {} has rating {} Mvar",
                        s.key, sh.bus, sh.mvar_at_nominal
                    ),
                );
            }
        }
        if let Some(d) = s.declared_totals {
            let t = s.totals();
            if (t.capacitor_mvar - d.capacitor_mvar).abs() > 1e-6 {
                push(
                    IssueKind::ShuntTotal,
                    format!(
                        "{} capacitor total {} ≠ {}",
                        s.key, t.capacitor_mvar, d.capacitor_mvar
                    ),
                );
            }
            if (t.reactor_mvar - d.reactor_mvar).abs() > 1e-6 {
                push(
                    IssueKind::ShuntTotal,
                    format!(
                        "{} reactor total {} ≠ {}",
                        s.key, t.reactor_mvar, d.reactor_mvar
                    ),
                );
            }
        }
    }

    for g in &net.circuit_groups {
        match net.unit_params(g) {
            Ok(u) if u.r_ohm_per_km >= 0.0 && u.x_ohm_per_km > 0.0 && u.b_siemens_per_km > 0.0 => {}
            Ok(_) => push(
                IssueKind::LineParameters,
                format!("circuit group {}: non-physical per-km constants", g.label()),
            ),
            Err(e) => push(IssueKind::LineParameters, format!("{e}")),
        }
    }

    for (gi, g) in net.circuit_groups.iter().enumerate() {
        let cut = net.unreachable_buses(Some(gi));
        if !cut.is_empty() {
            let ids: Vec<String> = cut.iter().map(|b| format!("{b}")).collect();
            push(
                IssueKind::OutageIslands,
                format!(
                    "outage of one {} circuit islands bus {}",
                    g.label(),
                    ids.join(", ")
                ),
            );
        }
    }
    out
}
