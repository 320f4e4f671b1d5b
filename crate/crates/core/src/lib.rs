//! Steady-state analysis engine for long-line 500 kV transmission grids.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! * [`line`]: per-km constants from tower geometry, exact equivalent-π
//!   models of long lines, thermal ratings and a cascaded-section oracle.
//! * [`network`]: the grid data model, loading scenarios and validation.
//! * [`powerflow`]: bus admittance assembly and a polar Newton-Raphson
//!   solver with generator reactive-limit switching.
//! * [`compliance`]: operating-limit audits, single-circuit outage
//!   enumeration and N-1 sweeps across scenarios.
//! * [`tep`]: expansion case construction, maximum deliverable load search
//!   and the investment/loss cost model.
//!
//! File formats, report rendering and the command-line front end live in
//! the companion `tepgrid` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense numeric kernels read better with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod compliance;
pub mod exec;
pub mod graph;
pub mod linalg;
pub mod line;
pub mod network;
pub mod powerflow;
pub mod tep;

pub use num_complex::Complex64;

pub use compliance::{
    case_contingencies, check_limits, enumerate_contingencies, n1_sweep, n1_sweep_from,
    scenario_sweep, CheckMode, ContingencyRow, Digest, LimitProfile, N1Report, Outage,
    ScenarioReport, SweepReport, Violation, ViolationKind,
};
pub use exec::{Executor, Sequential};
pub use line::{
    cascaded_segment_oracle, equivalent_pi, lumped_distributed_gap, nominal_pi, thermal_rating,
    unit_parameters, ConductorSpec, LineError, ParameterGap, PiModel, ThermalRating, TowerGeometry,
    UnitLineParams, KM_PER_MILE,
};
pub use network::{
    apply_scenario, validate_network, Branch, Bus, BusId, BusKind, CaseBus, CaseSpec, CircuitGroup,
    Generator, Issue, IssueKind, Load, Network, NetworkError, ReactiveRule, Scenario, ShuntDevice,
    ShuntKind, ShuntTotals, TabulatedConstants, TowerDesign,
};
pub use powerflow::{
    build_ybus, solve, solve_from, system_summary, AdmittanceMatrix, BranchFlow, BusResult,
    Loading, PowerFlowSolution, SolveError, SolverOptions, SystemSummary,
};
pub use tep::{
    build_tep_case, compare_cases, feasibility, max_deliverable_load, max_load_linear_scan,
    tep_cost, tune_shunts, Connection, CostBreakdown, CostParams, Feasibility, SearchOptions,
    TepCaseSpec, TepError, TepResult, TEP_SCENARIOS,
};
