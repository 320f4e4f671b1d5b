//! Operating-limit audits and single-circuit outage sweeps.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::exec::Executor;
use crate::network::{apply_scenario, BusId, BusKind, CaseSpec, Network};
use crate::powerflow::{
    solve, solve_from, system_summary, PowerFlowSolution, SolverOptions, SystemSummary,
};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitProfile {
    pub v_min_normal: f64,
    pub v_max: f64,
    pub v_min_contingency: f64,
    /// Percent of the circuit rating.
    pub loading_max_pct: f64,
    /// Slack on generator reactive limits, Mvar.
    pub q_tolerance_mvar: f64,
}

impl Default for LimitProfile {
    fn default() -> Self {
        LimitProfile {
            v_min_normal: 0.95,
            v_max: 1.05,
            v_min_contingency: 0.90,
            loading_max_pct: 100.0,
            q_tolerance_mvar: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "lowercase")
)]
pub enum CheckMode {
    Normal,
    Contingency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum ViolationKind {
    UnderVoltage,
    OverVoltage,
    Overload,
    ReactiveAboveMax,
    ReactiveBelowMin,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub kind: ViolationKind,
    /// Bus id or circuit label.
    pub subject: String,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::UnderVoltage => {
                write!(f, "V{} {:.4} < {:.2}", self.subject, self.value, self.bound)
            }
            ViolationKind::OverVoltage => {
                write!(f, "V{} {:.4} > {:.2}", self.subject, self.value, self.bound)
            }
            ViolationKind::Overload => write!(
                f,
                "{} at {:.2}% > {:.0}%",
                self.subject, self.value, self.bound
            ),
            ViolationKind::ReactiveAboveMax => {
                write!(
                    f,
                    "Qg{} {:.1} > {:.1} Mvar",
                    self.subject, self.value, self.bound
                )
            }
            ViolationKind::ReactiveBelowMin => {
                write!(
                    f,
                    "Qg{} {:.1} < {:.1} Mvar",
                    self.subject, self.value, self.bound
                )
            }
        }
    }
}

/// Every breached constraint of a converged solution.
pub fn check_limits(
    sol: &PowerFlowSolution,
    profile: &LimitProfile,
    mode: CheckMode,
) -> Vec<Violation> {
    let v_min = match mode {
        CheckMode::Normal => profile.v_min_normal,
        CheckMode::Contingency => profile.v_min_contingency,
    };
    let mut out = Vec::new();
    for b in &sol.buses {
        let subject = b.id.to_string();
        if b.vm_pu < v_min {
            out.push(Violation {
                kind: ViolationKind::UnderVoltage,
                subject: subject.clone(),
                value: b.vm_pu,
                bound: v_min,
            });
        }
        if b.vm_pu > profile.v_max {
            out.push(Violation {
                kind: ViolationKind::OverVoltage,
                subject: subject.clone(),
                value: b.vm_pu,
                bound: profile.v_max,
            });
        }
        if b.kind == BusKind::Slack {
            continue;
        }
        if let Some((qmin, qmax)) = b.q_limits_mvar {
            if b.q_gen_mvar > qmax + profile.q_tolerance_mvar {
                out.push(Violation {
                    kind: ViolationKind::ReactiveAboveMax,
                    subject: subject.clone(),
                    value: b.q_gen_mvar,
                    bound: qmax,
                });
            }
            if b.q_gen_mvar < qmin - profile.q_tolerance_mvar {
                out.push(Violation {
                    kind: ViolationKind::ReactiveBelowMin,
                    subject,
                    value: b.q_gen_mvar,
                    bound: qmin,
                });
            }
        }
    }
    for br in &sol.branches {
        if br.loading_pct > profile.loading_max_pct {
            out.push(Violation {
                kind: ViolationKind::Overload,
                subject: br.label.clone(),
                value: br.loading_pct,
                bound: profile.loading_max_pct,
            });
        }
    }
    out
}

/// One circuit taken out of service. Parallel circuits of a group are
/// identical, so each group contributes a single representative.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Outage {
    pub group: usize,
    pub circuit: u32,
    pub label: String,
    pub islanded: Vec<BusId>,
}

impl Outage {
    pub fn islanding(&self) -> bool {
        !self.islanded.is_empty()
    }
}

fn outage_label(group_label: &str, n_circuits: u32) -> String {
    if n_circuits > 1 {
        format!("{group_label} (1 line)")
    } else {
        group_label.to_string()
    }
}

/// One outage per circuit group, in declaration order.
pub fn enumerate_contingencies(net: &Network) -> Vec<Outage> {
    net.circuit_groups
        .iter()
        .enumerate()
        .map(|(gi, g)| Outage {
            group: gi,
            circuit: 1,
            label: outage_label(&g.label(), g.n_circuits),
            islanded: net.unreachable_buses(Some(gi)),
        })
        .collect()
}

/// The same enumeration, read off a solvable case.
pub fn case_contingencies(case: &CaseSpec) -> Vec<Outage> {
    let mut out = Vec::new();
    for br in &case.branches {
        if br.circuit != 1 {
            continue;
        }
        let n = case.group_sizes.get(br.group).copied().unwrap_or(1);
        out.push(Outage {
            group: br.group,
            circuit: 1,
            label: outage_label(&br.label, n),
            islanded: case.without_circuit(br.group, 1).islanded_buses(),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContingencyRow {
    pub outage: String,
    pub converged: bool,
    pub islanding: bool,
    pub lowest_voltage: Option<(BusId, f64)>,
    pub highest_voltage: Option<(BusId, f64)>,
    /// Circuit label and loading percent.
    pub highest_loading: Option<(String, f64)>,
    pub violations: Vec<Violation>,
    /// Solver diagnostic for rows that did not converge.
    pub error: Option<String>,
}

impl ContingencyRow {
    pub fn compliant(&self) -> bool {
        self.converged && !self.islanding && self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Digest {
    /// (outage, bus, |V|) of the lowest voltage over all rows.
    pub worst_voltage: Option<(String, BusId, f64)>,
    pub highest_voltage: Option<(String, BusId, f64)>,
    /// (outage, circuit, loading %) of the heaviest loading.
    pub worst_loading: Option<(String, String, f64)>,
    pub violating_rows: usize,
    pub failed_rows: usize,
    pub islanding_rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct N1Report {
    pub scenario: String,
    pub rows: Vec<ContingencyRow>,
    pub digest: Digest,
}

impl N1Report {
    pub fn compliant(&self) -> bool {
        self.rows.iter().all(ContingencyRow::compliant)
    }
}

fn row_for(
    outage: &Outage,
    result: Option<Result<PowerFlowSolution, String>>,
    profile: &LimitProfile,
) -> ContingencyRow {
    let mut row = ContingencyRow {
        outage: outage.label.clone(),
        converged: false,
        islanding: outage.islanding(),
        lowest_voltage: None,
        highest_voltage: None,
        highest_loading: None,
        violations: Vec::new(),
        error: None,
    };
    match result {
        None => {
            let ids: Vec<String> = outage.islanded.iter().map(|b| b.to_string()).collect();
            row.error = Some(format!("islands bus {}; not solved", ids.join(", ")));
        }
        Some(Err(e)) => row.error = Some(e),
        Some(Ok(sol)) => {
            let s = system_summary(&sol);
            row.converged = true;
            row.lowest_voltage = Some(s.min_voltage);
            row.highest_voltage = Some(s.max_voltage);
            row.highest_loading = s.top_loadings.first().map(|l| (l.label.clone(), l.pct));
            row.violations = check_limits(&sol, profile, CheckMode::Contingency);
        }
    }
    row
}

fn digest(rows: &[ContingencyRow]) -> Digest {
    let mut d = Digest {
        worst_voltage: None,
        highest_voltage: None,
        worst_loading: None,
        violating_rows: rows.iter().filter(|r| !r.violations.is_empty()).count(),
        failed_rows: rows.iter().filter(|r| !r.converged && !r.islanding).count(),
        islanding_rows: rows.iter().filter(|r| r.islanding).count(),
    };
    for r in rows {
        if let Some((b, v)) = r.lowest_voltage {
            if d.worst_voltage.as_ref().is_none_or(|w| v < w.2) {
                d.worst_voltage = Some((r.outage.clone(), b, v));
            }
        }
        if let Some((b, v)) = r.highest_voltage {
            if d.highest_voltage.as_ref().is_none_or(|w| v > w.2) {
                d.highest_voltage = Some((r.outage.clone(), b, v));
            }
        }
        if let Some((c, p)) = &r.highest_loading {
            if d.worst_loading.as_ref().is_none_or(|w| *p > w.2) {
                d.worst_loading = Some((r.outage.clone(), c.clone(), *p));
            }
        }
    }
    d
}

/// N-1 sweep of `case` given its converged base solution. Outages that
/// island a bus are reported and skipped.
pub fn n1_sweep_from<E: Executor>(
    case: &CaseSpec,
    base: &PowerFlowSolution,
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> N1Report {
    let outages = case_contingencies(case);
    let start = base.start_point();
    let warm = SolverOptions {
        flat_start: false,
        ..opts.clone()
    };
    let rows = exec.map(&outages, |o| {
        let result = if o.islanding() {
            None
        } else {
            let c = case.without_circuit(o.group, o.circuit);
            Some(solve_from(&c, &warm, Some(&start)).map_err(|e| e.to_string()))
        };
        row_for(o, result, profile)
    });
    N1Report {
        scenario: case.scenario.clone(),
        digest: digest(&rows),
        rows,
    }
}

/// Solves the base case, then every single-circuit outage.
pub fn n1_sweep<E: Executor>(
    case: &CaseSpec,
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> Result<N1Report, crate::powerflow::SolveError> {
    let base = solve(case, opts)?;
    Ok(n1_sweep_from(case, &base, opts, profile, exec))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioReport {
    pub key: String,
    pub normal: Option<SystemSummary>,
    pub normal_violations: Vec<Violation>,
    pub n1: Option<N1Report>,
    pub error: Option<String>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub solution: Option<PowerFlowSolution>,
}

impl ScenarioReport {
    pub fn pass(&self) -> bool {
        self.error.is_none()
            && self.normal_violations.is_empty()
            && self.n1.as_ref().is_some_and(N1Report::compliant)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepReport {
    pub scenarios: Vec<ScenarioReport>,
}

impl SweepReport {
    /// Vacuously true for an empty sweep.
    pub fn pass(&self) -> bool {
        self.scenarios.iter().all(ScenarioReport::pass)
    }
}

/// Normal-condition audit plus N-1 sweep for each scenario key.
pub fn scenario_sweep<E: Executor>(
    net: &Network,
    keys: &[&str],
    opts: &SolverOptions,
    profile: &LimitProfile,
    exec: &E,
) -> SweepReport {
    let scenarios = keys
        .iter()
        .map(|&key| {
            let mut rep = ScenarioReport {
                key: key.to_string(),
                normal: None,
                normal_violations: Vec::new(),
                n1: None,
                error: None,
                solution: None,
            };
            let case = match apply_scenario(net, key) {
                Ok(c) => c,
                Err(e) => {
                    rep.error = Some(e.to_string());
                    return rep;
                }
            };
            match solve(&case, opts) {
                Ok(sol) => {
                    rep.normal = Some(system_summary(&sol));
                    rep.normal_violations = check_limits(&sol, profile, CheckMode::Normal);
                    rep.n1 = Some(n1_sweep_from(&case, &sol, opts, profile, exec));
                    rep.solution = Some(sol);
                }
                Err(e) => rep.error = Some(format!("normal case: {e}")),
            }
            rep
        })
        .collect();
    SweepReport { scenarios }
}
