//! Small networks built in code for the integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use tepgrid_core::network::TabulatedConstants;
use tepgrid_core::{
    Bus, BusId, BusKind, CircuitGroup, ConductorSpec, Generator, Load, Network, ReactiveRule,
    Scenario, ShuntDevice, ShuntKind, TowerDesign, TowerGeometry,
};

pub fn macaw() -> ConductorSpec {
    ConductorSpec {
        name: "Macaw".into(),
        outer_diameter_m: 0.026543,
        resistance_ohm_per_km: 0.0912,
        ampacity_a: 870.0,
        gmr_m: None,
    }
}

pub fn flat_tower() -> TowerGeometry {
    TowerGeometry {
        phase_positions: [(-12.3, 24.0), (0.0, 24.0), (12.3, 24.0)],
        bundle_count: 4,
        bundle_spacing_m: 0.45,
    }
}

/// Catalog with one conductor and one tower whose constants are fixed to
/// `(r, L mH/km, C nF/km)`.
pub fn catalog(
    rlc: (f64, f64, f64),
) -> (
    BTreeMap<String, ConductorSpec>,
    BTreeMap<String, TowerDesign>,
) {
    let design = TowerDesign {
        geometry: flat_tower(),
        tabulated: Some(TabulatedConstants {
            r_ohm_per_km: rlc.0,
            l_mh_per_km: rlc.1,
            c_nf_per_km: rlc.2,
        }),
    };
    (
        BTreeMap::from([("c".to_string(), macaw())]),
        BTreeMap::from([("t".to_string(), design)]),
    )
}

pub const TABLE_RLC: (f64, f64, f64) = (0.0228, 0.878, 12.975);

pub fn bus(id: u32, kind: BusKind, v: Option<f64>) -> Bus {
    Bus {
        id: BusId(id),
        name: format!("B{id}"),
        base_kv: 500.0,
        kind,
        v_setpoint: v,
        angle_setpoint_deg: if kind == BusKind::Slack {
            Some(0.0)
        } else {
            None
        },
    }
}

pub fn group(a: u32, b: u32, n: u32, km: f64) -> CircuitGroup {
    CircuitGroup {
        from_bus: BusId(a),
        to_bus: BusId(b),
        n_circuits: n,
        length_km: km,
        conductor: "c".into(),
        tower: "t".into(),
    }
}

pub fn scenario(key: &str, scale: f64, shunts: Vec<ShuntDevice>) -> Scenario {
    Scenario {
        key: key.into(),
        load_scale: scale,
        dispatch_scale: scale,
        pv_voltage_override: None,
        slack_voltage: None,
        shunts,
        declared_totals: None,
    }
}

pub fn cap(bus: u32, mvar: f64) -> ShuntDevice {
    ShuntDevice {
        bus: BusId(bus),
        kind: ShuntKind::Capacitor,
        mvar_at_nominal: mvar,
    }
}

pub fn reactor(bus: u32, mvar: f64) -> ShuntDevice {
    ShuntDevice {
        bus: BusId(bus),
        kind: ShuntKind::Reactor,
        mvar_at_nominal: mvar,
    }
}

pub fn gen(bus: u32, p: f64) -> Generator {
    Generator {
        bus: BusId(bus),
        p_peak_mw: p,
        q_rule: ReactiveRule::default(),
    }
}

pub fn network(
    buses: Vec<Bus>,
    groups: Vec<CircuitGroup>,
    generators: Vec<Generator>,
    loads: Vec<Load>,
    scenarios: Vec<Scenario>,
    rlc: (f64, f64, f64),
) -> Network {
    let (conductors, towers) = catalog(rlc);
    Network {
        name: "toy".into(),
        base_mva: 100.0,
        frequency_hz: 60.0,
        line_loading_cap: 0.8,
        buses,
        circuit_groups: groups,
        generators,
        loads,
        scenarios,
        conductors,
        towers,
    }
}

/// Slack 1, PV 2, PQ 3 in a triangle.
pub fn three_bus() -> Network {
    network(
        vec![
            bus(1, BusKind::Slack, Some(1.05)),
            bus(2, BusKind::Pv, Some(1.03)),
            bus(3, BusKind::Pq, None),
        ],
        vec![
            group(1, 2, 1, 250.0),
            group(2, 3, 2, 211.5),
            group(1, 3, 1, 300.0),
        ],
        vec![gen(2, 800.0)],
        vec![Load::with_power_factor(BusId(3), 1500.0, 0.9)],
        vec![scenario("peak", 1.0, vec![cap(3, 100.0)])],
        TABLE_RLC,
    )
}

/// A ring of `loads.len() + 1` buses (slack first) with chords every
/// third bus, so every single outage leaves it connected.
pub fn ring(loads: &[(f64, bool)], km: f64) -> Network {
    let n = loads.len() as u32 + 1;
    let mut buses = vec![bus(1, BusKind::Slack, Some(1.04))];
    let mut generators = Vec::new();
    let mut load_rows = Vec::new();
    for (i, &(p, pv)) in loads.iter().enumerate() {
        let id = i as u32 + 2;
        if pv {
            buses.push(bus(id, BusKind::Pv, Some(1.02)));
            generators.push(gen(id, p));
        } else {
            buses.push(bus(id, BusKind::Pq, None));
            load_rows.push(Load::with_power_factor(BusId(id), p, 0.95));
        }
    }
    let mut groups = Vec::new();
    for id in 1..=n {
        let next = if id == n { 1 } else { id + 1 };
        groups.push(group(id, next, 1, km));
    }
    for id in (1..n.saturating_sub(2)).step_by(3) {
        groups.push(group(id, id + 2, 1, km * 1.3));
    }
    network(
        buses,
        groups,
        generators,
        load_rows,
        vec![scenario("peak", 1.0, vec![])],
        TABLE_RLC,
    )
}
