//! Report documents and their table / JSON / CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use tepgrid_core::{
    CostBreakdown, Feasibility, Issue, N1Report, PowerFlowSolution, SweepReport, SystemSummary,
    TepResult, Violation,
};

use crate::format::ReportedFigures;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub tool_version: String,
    /// sha256 of the input files, hex.
    pub input_digest: String,
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub generated_at: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Payload {
    Validate(ValidatePayload),
    LineParams(LineParamsPayload),
    Solve(Vec<SolvedScenario>),
    N1(Vec<N1Outcome>),
    Sweep(SweepReport),
    Tep(TepPayload),
    Cost(CostPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatePayload {
    pub network: String,
    pub buses: usize,
    pub circuits: u32,
    pub scenarios: Vec<String>,
    pub issues: Vec<Issue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    pub b_us_per_km: f64,
    pub l_mh_per_km: f64,
    pub c_nf_per_km: f64,
    pub thermal_mva: f64,
    pub rating_mva: f64,
}

/// One circuit group; Z′ and Y′ are per circuit, in ohms and siemens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineParamRow {
    pub from: u32,
    pub to: u32,
    pub circuits: u32,
    pub length_km: f64,
    pub r_ohm_per_km: f64,
    pub x_ohm_per_km: f64,
    pub b_us_per_km: f64,
    pub z_re_ohm: f64,
    pub z_im_ohm: f64,
    pub y_im_us: f64,
    pub rating_mva: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineParamsPayload {
    /// Constants of the first circuit group's design.
    pub unit: UnitSummary,
    pub rows: Vec<LineParamRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedScenario {
    pub scenario: String,
    pub solution: Option<PowerFlowSolution>,
    pub summary: Option<SystemSummary>,
    pub violations: Vec<Violation>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N1Outcome {
    pub scenario: String,
    pub report: Option<N1Report>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TepPayload {
    pub label: String,
    pub search: Option<TepResult>,
    pub at: Option<Feasibility>,
    pub cost: Option<CostBreakdown>,
    pub reported: Option<ReportedFigures>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPayload {
    pub rows: Vec<CostBreakdown>,
    /// Labels, cheapest per MW first.
    pub ranking: Vec<String>,
}

pub fn digest_inputs(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for (i, part) in inputs.iter().enumerate() {
        if i > 0 {
            h.update([0u8]);
        }
        h.update(part);
    }
    hex::encode(h.finalize())
}

/// RFC 3339 UTC; `SOURCE_DATE_EPOCH` pins it for reproducible builds.
pub fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn render(doc: &ReportDocument, format: OutputFormat) -> anyhow::Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => render_csv(&doc.payload),
        OutputFormat::Table => Ok(render_table(&doc.payload)),
    }
}

pub fn parse_json(text: &str) -> serde_json::Result<ReportDocument> {
    serde_json::from_str(text)
}

// ---- table -------------------------------------------------------------

fn render_table(p: &Payload) -> String {
    let mut out = String::new();
    match p {
        Payload::Validate(v) => table_validate(&mut out, v),
        Payload::LineParams(l) => table_lineparams(&mut out, l),
        Payload::Solve(list) => {
            for (i, s) in list.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                table_solution(&mut out, s);
            }
        }
        Payload::N1(list) => {
            for (i, o) in list.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                match (&o.report, &o.error) {
                    (Some(r), _) => table_n1(&mut out, r),
                    (None, Some(e)) => {
                        let _ = writeln!(out, "Scenario {}: {e}", o.scenario);
                    }
                    (None, None) => {}
                }
            }
        }
        Payload::Sweep(s) => table_sweep(&mut out, s),
        Payload::Tep(t) => table_tep(&mut out, t),
        Payload::Cost(c) => table_cost(&mut out, c),
    }
    out
}

fn table_validate(out: &mut String, v: &ValidatePayload) {
    let _ = writeln!(
        out,
        "{}: {} buses, {} circuits, scenarios {}",
        v.network,
        v.buses,
        v.circuits,
        v.scenarios.join(", ")
    );
    if v.issues.is_empty() {
        out.push_str("no issues\n");
    }
    for i in &v.issues {
        let _ = writeln!(out, "{:<16} {}", format!("{:?}", i.kind), i.message);
    }
}

fn table_lineparams(out: &mut String, l: &LineParamsPayload) {
    let u = &l.unit;
    let _ = writeln!(
        out,
        "r = {:.4} ohm/km  x = {:.4} ohm/km  b = {:.4} uS/km  L = {:.4} mH/km  C = {:.3} nF/km",
        u.r_ohm_per_km, u.x_ohm_per_km, u.b_us_per_km, u.l_mh_per_km, u.c_nf_per_km
    );
    let _ = writeln!(
        out,
        "thermal {:.1} MVA, rating {:.1} MVA",
        u.thermal_mva, u.rating_mva
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<8} {:>3} {:>10} {:>10} {:>10} {:>12} {:>10}",
        "Line", "n", "km", "R' (ohm)", "X' (ohm)", "Y'/2 (uS)", "MVA"
    );
    for r in &l.rows {
        let _ = writeln!(
            out,
            "{:<8} {:>3} {:>10.2} {:>10.3} {:>10.3} {:>12.2} {:>10.1}",
            format!("{}-{}", r.from, r.to),
            r.circuits,
            r.length_km,
            r.z_re_ohm,
            r.z_im_ohm,
            r.y_im_us / 2.0,
            r.rating_mva
        );
    }
}

fn table_solution(out: &mut String, s: &SolvedScenario) {
    let Some(sol) = &s.solution else {
        let _ = writeln!(
            out,
            "Scenario {}: {}",
            s.scenario,
            s.error.as_deref().unwrap_or("no solution")
        );
        return;
    };
    let _ = writeln!(
        out,
        "Scenario {}: {} after {} iterations, {} switching rounds",
        s.scenario,
        if sol.converged {
            "converged"
        } else {
            "not converged"
        },
        sol.iterations,
        sol.q_rounds
    );
    let _ = writeln!(
        out,
        "{:>5} {:>8} {:>9} {:>10} {:>11}",
        "Bus", "V p.u.", "δ (deg.)", "P_g (MW)", "Q_g (Mvar)"
    );
    for b in &sol.buses {
        let _ = writeln!(
            out,
            "{:>5} {:>8.3} {:>9.2} {:>10.1} {:>11.1}",
            b.id.0, b.vm_pu, b.va_deg, b.p_gen_mw, b.q_gen_mvar
        );
    }
    if let Some(sum) = &s.summary {
        let _ = writeln!(out, "Losses {:.1} MW", sum.losses_mw);
        let tops: Vec<String> = sum
            .top_loadings
            .iter()
            .map(|l| format!("{} {:.2}%", l.label, l.pct))
            .collect();
        let _ = writeln!(out, "Highest loadings: {}", tops.join(", "));
    }
    if !sol.switched_to_pq.is_empty() {
        let ids: Vec<String> = sol.switched_to_pq.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "At reactive limit: {}", ids.join(", "));
    }
    if !sol.q_limits_settled {
        out.push_str("Warning: reactive-limit switching did not settle\n");
    }
    violations_line(out, &s.violations);
}

fn violations_line(out: &mut String, v: &[Violation]) {
    if v.is_empty() {
        out.push_str("Violations: none\n");
    } else {
        let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "Violations: {}", list.join("; "));
    }
}

fn n1_status(r: &tepgrid_core::ContingencyRow) -> String {
    if r.islanding {
        "islanding".into()
    } else if !r.converged {
        "no solution".into()
    } else if r.violations.is_empty() {
        "ok".into()
    } else {
        let v: Vec<String> = r.violations.iter().map(|x| x.to_string()).collect();
        v.join("; ")
    }
}

fn table_n1(out: &mut String, r: &N1Report) {
    let _ = writeln!(out, "Scenario {}: single-circuit outages", r.scenario);
    let _ = writeln!(
        out,
        "{:<16} {:>7} {:>5} {:>9} {:<8} Status",
        "Line outage", "V p.u.", "Bus#", "%loading", "Line"
    );
    for row in &r.rows {
        let (v, bus) = match row.lowest_voltage {
            Some((b, v)) => (format!("{v:.3}"), b.to_string()),
            None => ("-".into(), "-".into()),
        };
        let (pct, line) = match &row.highest_loading {
            Some((l, p)) => (format!("{p:.2}%"), l.clone()),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>5} {:>9} {:<8} {}",
            row.outage,
            v,
            bus,
            pct,
            line,
            n1_status(row)
        );
    }
    let d = &r.digest;
    if let Some((o, b, v)) = &d.worst_voltage {
        let _ = writeln!(out, "Lowest voltage {v:.3} p.u. at bus {b} ({o})");
    }
    if let Some((o, l, p)) = &d.worst_loading {
        let _ = writeln!(out, "Highest loading {p:.2}% on {l} ({o})");
    }
    let _ = writeln!(
        out,
        "{} rows, {} with violations, {} unsolved, {} islanding",
        r.rows.len(),
        d.violating_rows,
        d.failed_rows,
        d.islanding_rows
    );
}

fn table_sweep(out: &mut String, s: &SweepReport) {
    let _ = writeln!(
        out,
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>10} {:>6}",
        "Scenario", "Loss MW", "Vmin", "Vmax", "N-1 Vmin", "N-1 load%", "Result"
    );
    for sc in &s.scenarios {
        let (loss, vmin, vmax) = match &sc.normal {
            Some(n) => (
                format!("{:.1}", n.losses_mw),
                format!("{:.3}", n.min_voltage.1),
                format!("{:.3}", n.max_voltage.1),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let (nv, nl) = match &sc.n1 {
            Some(r) => (
                r.digest
                    .worst_voltage
                    .as_ref()
                    .map_or("-".into(), |w| format!("{:.3}", w.2)),
                r.digest
                    .worst_loading
                    .as_ref()
                    .map_or("-".into(), |w| format!("{:.2}", w.2)),
            ),
            None => ("-".into(), "-".into()),
        };
        let verdict = if sc.pass() { "pass" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>9} {:>9} {:>9} {:>10} {:>6}",
            sc.key, loss, vmin, vmax, nv, nl, verdict
        );
    }
    for sc in &s.scenarios {
        if let Some(e) = &sc.error {
            let _ = writeln!(out, "{}: {e}", sc.key);
        }
        if !sc.normal_violations.is_empty() {
            let v: Vec<String> = sc.normal_violations.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{} normal: {}", sc.key, v.join("; "));
        }
        if let Some(r) = &sc.n1 {
            for row in r.rows.iter().filter(|r| !r.compliant()) {
                let _ = writeln!(out, "{} outage {}: {}", sc.key, row.outage, n1_status(row));
            }
        }
    }
}

fn table_feasibility(out: &mut String, f: &Feasibility) {
    let _ = writeln!(
        out,
        "Load {:.1} MW: {}",
        f.load_mw,
        if f.pass { "feasible" } else { "infeasible" }
    );
    if let Some(l) = f.peak_loss_mw {
        let _ = writeln!(out, "Peak losses {l:.1} MW");
    }
    for (k, v) in &f.new_bus_min_v {
        let _ = writeln!(out, "New-bus lowest voltage, {k}: {v:.3} p.u.");
    }
    table_sweep(out, &f.sweep);
}

fn table_tep(out: &mut String, t: &TepPayload) {
    let _ = writeln!(out, "Case {}", t.label);
    if let Some(r) = &t.search {
        let _ = writeln!(out, "Max deliverable load {:.1} MW", r.max_load_mw);
        let _ = writeln!(out, "Peak losses {:.1} MW", r.peak_loss_mw);
        let _ = writeln!(
            out,
            "Additional reactor {:.1} Mvar",
            r.additional_reactor_mvar
        );
        let _ = writeln!(out, "{} probes", r.probes.len());
        if let Some(a) = &r.anomaly {
            let _ = writeln!(out, "Warning: {a}");
        }
    }
    if let Some(rep) = &t.reported {
        let _ = writeln!(
            out,
            "Quoted: {:.1} MW, {:.1} MW loss, {:.1} Mvar additional reactor",
            rep.max_load_mw, rep.peak_loss_mw, rep.additional_reactor_mvar
        );
    }
    if let Some(f) = &t.at {
        out.push('\n');
        table_feasibility(out, f);
    }
    if let Some(c) = &t.cost {
        out.push('\n');
        table_cost(
            out,
            &CostPayload {
                rows: vec![c.clone()],
                ranking: vec![c.label.clone()],
            },
        );
    }
}

fn table_cost(out: &mut String, c: &CostPayload) {
    let _ = writeln!(
        out,
        "{:<5} {:>9} {:>8} {:>8} {:>9} {:>9} {:>9} {:>10} {:>9}",
        "Case", "Line", "Bays", "Reactor", "Loss cap", "Fuel", "O&M", "Total", "M$/MW"
    );
    for r in &c.rows {
        let _ = writeln!(
            out,
            "{:<5} {:>9.3} {:>8.3} {:>8.3} {:>9.3} {:>9.3} {:>9.3} {:>10.3} {:>9.4}",
            r.label,
            r.line,
            r.bay,
            r.reactor,
            r.loss_capital,
            r.loss_fuel,
            r.loss_om,
            r.total,
            r.avg_per_mw
        );
    }
    if c.rows.len() > 1 {
        let _ = writeln!(out, "Ranking (M$/MW): {}", c.ranking.join(" < "));
    }
    for r in &c.rows {
        for w in &r.warnings {
            let _ = writeln!(out, "{}: {w}", r.label);
        }
    }
}

// ---- csv ---------------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn render_csv(p: &Payload) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match p {
        Payload::Validate(v) => {
            w.write_record(["kind", "message"])?;
            for i in &v.issues {
                w.write_record([format!("{:?}", i.kind), i.message.clone()])?;
            }
        }
        Payload::LineParams(l) => {
            w.write_record([
                "from",
                "to",
                "circuit",
                "length_km",
                "r",
                "x",
                "b",
                "Z'_re",
                "Z'_im",
                "Y'_im",
                "rating_mva",
            ])?;
            for r in &l.rows {
                for c in 1..=r.circuits {
                    w.write_record([
                        r.from.to_string(),
                        r.to.to_string(),
                        c.to_string(),
                        r.length_km.to_string(),
                        r.r_ohm_per_km.to_string(),
                        r.x_ohm_per_km.to_string(),
                        r.b_us_per_km.to_string(),
                        r.z_re_ohm.to_string(),
                        r.z_im_ohm.to_string(),
                        r.y_im_us.to_string(),
                        r.rating_mva.to_string(),
                    ])?;
                }
            }
        }
        Payload::Solve(list) => {
            w.write_record([
                "scenario",
                "bus",
                "kind",
                "vm_pu",
                "va_deg",
                "p_gen_mw",
                "q_gen_mvar",
                "p_load_mw",
                "q_load_mvar",
                "shunt_q_mvar",
            ])?;
            for s in list {
                let Some(sol) = &s.solution else { continue };
                for b in &sol.buses {
                    w.write_record([
                        s.scenario.clone(),
                        b.id.to_string(),
                        format!("{:?}", b.kind).to_lowercase(),
                        b.vm_pu.to_string(),
                        b.va_deg.to_string(),
                        b.p_gen_mw.to_string(),
                        b.q_gen_mvar.to_string(),
                        b.p_load_mw.to_string(),
                        b.q_load_mvar.to_string(),
                        b.shunt_q_mvar.to_string(),
                    ])?;
                }
            }
        }
        Payload::N1(list) => {
            n1_header(&mut w)?;
            for o in list {
                if let Some(r) = &o.report {
                    n1_rows(&mut w, r)?;
                }
            }
        }
        Payload::Sweep(s) => sweep_csv(&mut w, s)?,
        Payload::Tep(t) => {
            if let Some(r) = &t.search {
                w.write_record(["load_mw", "pass"])?;
                for pr in &r.probes {
                    w.write_record([pr.load_mw.to_string(), pr.pass.to_string()])?;
                }
            } else if let Some(f) = &t.at {
                sweep_csv(&mut w, &f.sweep)?;
            }
        }
        Payload::Cost(c) => {
            w.write_record([
                "case",
                "line",
                "bay",
                "reactor",
                "loss_capital",
                "loss_fuel",
                "loss_om",
                "total",
                "avg_per_mw",
                "delta_loss_mw",
            ])?;
            for r in &c.rows {
                w.write_record([
                    r.label.clone(),
                    r.line.to_string(),
                    r.bay.to_string(),
                    r.reactor.to_string(),
                    r.loss_capital.to_string(),
                    r.loss_fuel.to_string(),
                    r.loss_om.to_string(),
                    r.total.to_string(),
                    r.avg_per_mw.to_string(),
                    r.delta_loss_mw.to_string(),
                ])?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn n1_header(w: &mut csv::Writer<Vec<u8>>) -> csv::Result<()> {
    w.write_record([
        "scenario",
        "outage",
        "converged",
        "islanding",
        "lowest_v_pu",
        "lowest_v_bus",
        "highest_loading_pct",
        "highest_loading_line",
        "violations",
    ])
}

fn n1_rows(w: &mut csv::Writer<Vec<u8>>, r: &N1Report) -> csv::Result<()> {
    for row in &r.rows {
        let v: Vec<String> = row.violations.iter().map(|x| x.to_string()).collect();
        w.write_record([
            r.scenario.clone(),
            row.outage.clone(),
            row.converged.to_string(),
            row.islanding.to_string(),
            fmt_opt(row.lowest_voltage.map(|x| x.1)),
            row.lowest_voltage
                .map(|x| x.0.to_string())
                .unwrap_or_default(),
            fmt_opt(row.highest_loading.as_ref().map(|x| x.1)),
            row.highest_loading
                .as_ref()
                .map(|x| x.0.clone())
                .unwrap_or_default(),
            v.join("; "),
        ])?;
    }
    Ok(())
}

fn sweep_csv(w: &mut csv::Writer<Vec<u8>>, s: &SweepReport) -> csv::Result<()> {
    n1_header(w)?;
    for sc in &s.scenarios {
        if let Some(r) = &sc.n1 {
            n1_rows(w, r)?;
        }
    }
    Ok(())
}
