//! JSON network and expansion-case documents.
//!
//! The on-disk layout is kept separate from the core types so that files
//! can name scenarios as object keys (declaration order is preserved),
//! omit defaults and carry free-text notes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use tepgrid_core::network::{ReactiveRule, ShuntTotals, TabulatedConstants, TowerDesign};
use tepgrid_core::tep::Connection;
use tepgrid_core::{
    Bus, BusId, BusKind, CircuitGroup, ConductorSpec, Generator, Load, Network, NetworkError,
    Scenario, ShuntDevice, ShuntKind, TepCaseSpec, TowerGeometry,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const BUNDLED_NETWORK: &str = include_str!("../../../data/ieee_style_17bus_500kv.json");
pub const BUNDLED_NETWORK_NAME: &str = "data/ieee_style_17bus_500kv.json";

/// Bundled expansion cases, in label order.
pub const BUNDLED_CASES: [(&str, &str); 6] = [
    ("I", include_str!("../../../data/tep_cases/case_i.json")),
    ("II", include_str!("../../../data/tep_cases/case_ii.json")),
    ("III", include_str!("../../../data/tep_cases/case_iii.json")),
    ("IV", include_str!("../../../data/tep_cases/case_iv.json")),
    ("V", include_str!("../../../data/tep_cases/case_v.json")),
    ("VI", include_str!("../../../data/tep_cases/case_vi.json")),
];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{origin}: cannot read: {source}")]
    Io {
        origin: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message} (at `{path}`)")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
    #[error("{origin}: unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    Schema { origin: String, found: u32 },
    #[error("{origin}: {source}")]
    Network {
        origin: String,
        #[source]
        source: NetworkError,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub system: SystemDto,
    pub conductors: BTreeMap<String, ConductorDto>,
    pub towers: BTreeMap<String, TowerDto>,
    pub buses: Vec<BusDto>,
    pub circuit_groups: Vec<CircuitGroupDto>,
    pub generators: Vec<GeneratorDto>,
    pub loads: Vec<LoadDto>,
    pub scenarios: IndexMap<String, ScenarioDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDto {
    pub base_mva: f64,
    pub frequency_hz: f64,
    #[serde(default = "default_loading_cap")]
    pub line_loading_cap: f64,
}

fn default_loading_cap() -> f64 {
    0.8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorDto {
    pub name: String,
    pub outer_diameter_m: f64,
    pub resistance_ohm_per_km: f64,
    pub ampacity_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmr_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerDto {
    pub phase_positions: [(f64, f64); 3],
    pub bundle_count: u32,
    pub bundle_spacing_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulated: Option<TabulatedConstants>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusDto {
    pub id: u32,
    #[serde(default)]
    pub name: String,
    pub base_kv: f64,
    pub kind: BusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_setpoint_deg: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitGroupDto {
    pub from_bus: u32,
    pub to_bus: u32,
    pub n_circuits: u32,
    pub length_km: f64,
    pub conductor: String,
    pub tower: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDto {
    pub bus: u32,
    pub p_peak_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_rule: Option<ReactiveRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadDto {
    pub bus: u32,
    pub p_mw: f64,
    /// Computed from the power factor when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_mvar: Option<f64>,
    pub power_factor: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub fixed: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShuntDto {
    pub bus: u32,
    pub kind: ShuntKind,
    pub mvar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDto {
    pub load_scale: f64,
    pub dispatch_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_voltage_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_voltage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_totals: Option<ShuntTotals>,
    #[serde(default)]
    pub shunts: Vec<ShuntDto>,
}

fn shunts_from(dtos: &[ShuntDto]) -> Vec<ShuntDevice> {
    dtos.iter()
        .map(|s| ShuntDevice {
            bus: BusId(s.bus),
            kind: s.kind,
            mvar_at_nominal: s.mvar,
        })
        .collect()
}

fn shunts_to(devs: &[ShuntDevice]) -> Vec<ShuntDto> {
    devs.iter()
        .map(|s| ShuntDto {
            bus: s.bus.0,
            kind: s.kind,
            mvar: s.mvar_at_nominal,
        })
        .collect()
}

impl NetworkFile {
    pub fn into_network(self) -> Network {
        Network {
            name: self.name,
            base_mva: self.system.base_mva,
            frequency_hz: self.system.frequency_hz,
            line_loading_cap: self.system.line_loading_cap,
            buses: self
                .buses
                .into_iter()
                .map(|b| Bus {
                    id: BusId(b.id),
                    name: b.name,
                    base_kv: b.base_kv,
                    kind: b.kind,
                    v_setpoint: b.v_setpoint,
                    angle_setpoint_deg: b.angle_setpoint_deg,
                })
                .collect(),
            circuit_groups: self
                .circuit_groups
                .into_iter()
                .map(|g| CircuitGroup {
                    from_bus: BusId(g.from_bus),
                    to_bus: BusId(g.to_bus),
                    n_circuits: g.n_circuits,
                    length_km: g.length_km,
                    conductor: g.conductor,
                    tower: g.tower,
                })
                .collect(),
            generators: self
                .generators
                .into_iter()
                .map(|g| Generator {
                    bus: BusId(g.bus),
                    p_peak_mw: g.p_peak_mw,
                    q_rule: g.q_rule.unwrap_or_default(),
                })
                .collect(),
            loads: self
                .loads
                .into_iter()
                .map(|l| {
                    let mut load = Load::with_power_factor(BusId(l.bus), l.p_mw, l.power_factor);
                    if let Some(q) = l.q_mvar {
                        load.q_peak_mvar = q;
                    }
                    load.fixed = l.fixed;
                    load
                })
                .collect(),
            scenarios: self
                .scenarios
                .into_iter()
                .map(|(key, s)| Scenario {
                    key,
                    load_scale: s.load_scale,
                    dispatch_scale: s.dispatch_scale,
                    pv_voltage_override: s.pv_voltage_override,
                    slack_voltage: s.slack_voltage,
                    shunts: shunts_from(&s.shunts),
                    declared_totals: s.declared_totals,
                })
                .collect(),
            conductors: self
                .conductors
                .into_iter()
                .map(|(k, c)| {
                    let spec = ConductorSpec {
                        name: c.name,
                        outer_diameter_m: c.outer_diameter_m,
                        resistance_ohm_per_km: c.resistance_ohm_per_km,
                        ampacity_a: c.ampacity_a,
                        gmr_m: c.gmr_m,
                    };
                    (k, spec)
                })
                .collect(),
            towers: self
                .towers
                .into_iter()
                .map(|(k, t)| {
                    let design = TowerDesign {
                        geometry: TowerGeometry {
                            phase_positions: t.phase_positions,
                            bundle_count: t.bundle_count,
                            bundle_spacing_m: t.bundle_spacing_m,
                        },
                        tabulated: t.tabulated,
                    };
                    (k, design)
                })
                .collect(),
        }
    }

    pub fn from_network(net: &Network) -> Self {
        NetworkFile {
            schema_version: SCHEMA_VERSION,
            name: net.name.clone(),
            notes: Vec::new(),
            system: SystemDto {
                base_mva: net.base_mva,
                frequency_hz: net.frequency_hz,
                line_loading_cap: net.line_loading_cap,
            },
            conductors: net
                .conductors
                .iter()
                .map(|(k, c)| {
                    let dto = ConductorDto {
                        name: c.name.clone(),
                        outer_diameter_m: c.outer_diameter_m,
                        resistance_ohm_per_km: c.resistance_ohm_per_km,
                        ampacity_a: c.ampacity_a,
                        gmr_m: c.gmr_m,
                    };
                    (k.clone(), dto)
                })
                .collect(),
            towers: net
                .towers
                .iter()
                .map(|(k, t)| {
                    let dto = TowerDto {
                        phase_positions: t.geometry.phase_positions,
                        bundle_count: t.geometry.bundle_count,
                        bundle_spacing_m: t.geometry.bundle_spacing_m,
                        tabulated: t.tabulated,
                    };
                    (k.clone(), dto)
                })
                .collect(),
            buses: net
                .buses
                .iter()
                .map(|b| BusDto {
                    id: b.id.0,
                    name: b.name.clone(),
                    base_kv: b.base_kv,
                    kind: b.kind,
                    v_setpoint: b.v_setpoint,
                    angle_setpoint_deg: b.angle_setpoint_deg,
                })
                .collect(),
            circuit_groups: net
                .circuit_groups
                .iter()
                .map(|g| CircuitGroupDto {
                    from_bus: g.from_bus.0,
                    to_bus: g.to_bus.0,
                    n_circuits: g.n_circuits,
                    length_km: g.length_km,
                    conductor: g.conductor.clone(),
                    tower: g.tower.clone(),
                })
                .collect(),
            generators: net
                .generators
                .iter()
                .map(|g| GeneratorDto {
                    bus: g.bus.0,
                    p_peak_mw: g.p_peak_mw,
                    q_rule: Some(g.q_rule),
                })
                .collect(),
            loads: net
                .loads
                .iter()
                .map(|l| LoadDto {
                    bus: l.bus.0,
                    p_mw: l.p_peak_mw,
                    q_mvar: Some(l.q_peak_mvar),
                    power_factor: l.power_factor,
                    fixed: l.fixed,
                })
                .collect(),
            scenarios: net
                .scenarios
                .iter()
                .map(|s| {
                    let dto = ScenarioDto {
                        load_scale: s.load_scale,
                        dispatch_scale: s.dispatch_scale,
                        pv_voltage_override: s.pv_voltage_override,
                        slack_voltage: s.slack_voltage,
                        declared_totals: s.declared_totals,
                        shunts: shunts_to(&s.shunts),
                    };
                    (s.key.clone(), dto)
                })
                .collect(),
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        FormatError::Parse {
            origin: origin.to_string(),
            line: inner.line(),
            column: inner.column(),
            path,
            message: strip_position(&inner.to_string()),
        }
    })
}

/// serde_json appends " at line L column C"; the locus is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Parses and structurally checks a network document.
pub fn parse_network(text: &str, origin: &str) -> Result<Network, FormatError> {
    let file: NetworkFile = parse_json(text, origin)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FormatError::Schema {
            origin: origin.to_string(),
            found: file.schema_version,
        });
    }
    let net = file.into_network();
    net.check_structure()
        .map_err(|source| FormatError::Network {
            origin: origin.to_string(),
            source,
        })?;
    Ok(net)
}

pub fn load_network(path: &Path) -> Result<Network, FormatError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        origin: origin.clone(),
        source,
    })?;
    parse_network(&text, &origin)
}

pub fn bundled_network() -> Network {
    parse_network(BUNDLED_NETWORK, BUNDLED_NETWORK_NAME).expect("bundled network is valid")
}

/// Figures a case file quotes for comparison; never used as inputs to the
/// search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedFigures {
    pub max_load_mw: f64,
    pub peak_loss_mw: f64,
    pub additional_reactor_mvar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shunt_totals: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TepCaseFile {
    pub schema_version: u32,
    pub label: String,
    pub new_bus: u32,
    #[serde(default = "default_kv")]
    pub base_kv: f64,
    #[serde(default = "default_pf")]
    pub power_factor: f64,
    #[serde(default = "default_true")]
    pub fixed_new_load: bool,
    pub connections: Vec<ConnectionDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub shunts: IndexMap<String, Vec<ShuntDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<ReportedFigures>,
}

fn default_kv() -> f64 {
    500.0
}

fn default_pf() -> f64 {
    0.9
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDto {
    pub from_bus: u32,
    pub n_circuits: u32,
    pub length_km: f64,
}

/// A parsed expansion case with whatever figures its file quotes.
#[derive(Debug, Clone)]
pub struct TepCaseDoc {
    pub spec: TepCaseSpec,
    pub reported: Option<ReportedFigures>,
    pub notes: Vec<String>,
}

impl fmt::Display for TepCaseDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.spec.label)
    }
}

pub fn parse_tep_case(text: &str, origin: &str) -> Result<TepCaseDoc, FormatError> {
    let file: TepCaseFile = parse_json(text, origin)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FormatError::Schema {
            origin: origin.to_string(),
            found: file.schema_version,
        });
    }
    let spec = TepCaseSpec {
        label: file.label,
        new_bus: BusId(file.new_bus),
        base_kv: file.base_kv,
        connections: file
            .connections
            .iter()
            .map(|c| Connection {
                from_bus: BusId(c.from_bus),
                n_circuits: c.n_circuits,
                length_km: c.length_km,
            })
            .collect(),
        power_factor: file.power_factor,
        fixed_new_load: file.fixed_new_load,
        shunts: file
            .shunts
            .iter()
            .map(|(k, v)| (k.clone(), shunts_from(v)))
            .collect(),
        conductor: file.conductor,
        tower: file.tower,
    };
    Ok(TepCaseDoc {
        spec,
        reported: file.reported,
        notes: file.notes,
    })
}

pub fn load_tep_case(path: &Path) -> Result<TepCaseDoc, FormatError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        origin: origin.clone(),
        source,
    })?;
    parse_tep_case(&text, &origin)
}

/// A bundled case by its roman-numeral label (case-insensitive).
pub fn bundled_case(label: &str) -> Option<TepCaseDoc> {
    BUNDLED_CASES
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(l, text)| {
            parse_tep_case(text, &format!("bundled case {l}")).expect("bundled case is valid")
        })
}
