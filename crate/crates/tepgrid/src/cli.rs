//! Command-line dispatch.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tepgrid_core::{
    apply_scenario, build_tep_case, check_limits, compare_cases, feasibility, max_deliverable_load,
    n1_sweep, scenario_sweep, solve, system_summary, tep_cost, validate_network, CheckMode,
    CostParams, LimitProfile, Network, SearchOptions, SolverOptions, TepError, TepResult,
    TEP_SCENARIOS,
};

use crate::exec::Parallel;
use crate::format::{self, FormatError, ReportedFigures, TepCaseDoc};
use crate::report::{
    self, CostPayload, LineParamRow, LineParamsPayload, N1Outcome, OutputFormat, Payload,
    ReportDocument, SolvedScenario, TepPayload, UnitSummary, ValidatePayload,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tepgrid",
    version,
    about = "Long-line 500 kV network studies: load flow, N-1 screening and expansion planning"
)]
pub struct Cli {
    /// Network file; the bundled 17-bus system when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub network: Option<PathBuf>,
    /// Scenario key, or `all`.
    #[arg(long, global = true, value_name = "KEY")]
    pub scenario: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: OutputFormat,
    /// Worker threads for outage sweeps; 0 = one per core.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub jobs: usize,
    /// Newton mismatch tolerance, p.u.
    #[arg(long, global = true, default_value_t = 1e-8, value_name = "X")]
    pub tolerance: f64,
    /// Ignore generator reactive limits.
    #[arg(long, global = true)]
    pub no_q_limits: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the network file for structural and data consistency.
    Validate,
    /// Per-km constants, ratings and equivalent-π values of every circuit group.
    Lineparams,
    /// Normal-condition load flow.
    Solve,
    /// Single-circuit outage sweep.
    N1,
    /// Normal + N-1 audit over scenarios (default: all).
    Sweep,
    /// Expansion case: feasibility at a load or maximum-load search.
    Tep(TepArgs),
    /// Cost comparison of expansion cases from their quoted figures.
    Cost(CostArgs),
}

#[derive(Debug, Args)]
pub struct TepArgs {
    /// Bundled case label (I..VI).
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub case: Option<String>,
    /// Expansion case file.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Check feasibility at this new-bus load instead of searching.
    #[arg(long, value_name = "MW", conflicts_with = "search")]
    pub at: Option<f64>,
    /// Search for the maximum deliverable load (the default).
    #[arg(long)]
    pub search: bool,
    #[arg(long, default_value_t = 5.0, value_name = "MW")]
    pub step: f64,
    #[arg(long, default_value_t = 5000.0, value_name = "MW")]
    pub max_mw: f64,
    /// Scale the new load with each scenario like the existing loads.
    #[arg(long)]
    pub scale_new_load: bool,
    /// Also price the case (search mode only).
    #[arg(long)]
    pub cost: bool,
    /// Peak losses of the unexpanded system, MW; solved from the network
    /// when omitted.
    #[arg(long, value_name = "MW")]
    pub base_loss: Option<f64>,
    #[command(flatten)]
    pub prices: PriceArgs,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Restrict to these bundled cases (repeatable).
    #[arg(long = "case", value_name = "LABEL")]
    pub cases: Vec<String>,
    /// Extra case files carrying quoted figures.
    #[arg(long = "spec", value_name = "PATH")]
    pub specs: Vec<PathBuf>,
    #[arg(long, default_value_t = 321.2, value_name = "MW")]
    pub base_loss: f64,
    #[command(flatten)]
    pub prices: PriceArgs,
}

#[derive(Debug, Args, Clone)]
pub struct PriceArgs {
    /// M$ per circuit-km.
    #[arg(long)]
    pub line_cost: Option<f64>,
    /// M$ per bay.
    #[arg(long)]
    pub bay_cost: Option<f64>,
    /// M$ per Mvar of reactor.
    #[arg(long)]
    pub reactor_cost: Option<f64>,
    /// $/MMBtu; needs --heat-rate.
    #[arg(long, requires = "heat_rate")]
    pub gas_price: Option<f64>,
    /// MMBtu/MWh.
    #[arg(long, requires = "gas_price")]
    pub heat_rate: Option<f64>,
    #[arg(long)]
    pub horizon_years: Option<f64>,
    /// Treat falling losses as zero cost instead of a credit.
    #[arg(long)]
    pub floor_negative_loss: bool,
}

impl PriceArgs {
    fn params(&self) -> CostParams {
        let mut p = CostParams::default();
        if let Some(v) = self.line_cost {
            p.line_cost = v;
        }
        if let Some(v) = self.bay_cost {
            p.bay_cost = v;
        }
        if let Some(v) = self.reactor_cost {
            p.reactor_cost = v;
        }
        if let (Some(g), Some(h)) = (self.gas_price, self.heat_rate) {
            p.fuel_per_mw_year = CostParams::fuel_from(g, h);
        }
        if let Some(v) = self.horizon_years {
            p.horizon_years = v;
        }
        p.floor_negative_loss = self.floor_negative_loss;
        p
    }
}

/// A failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }
    fn solver(m: impl Into<String>) -> Self {
        Failure {
            code: EXIT_SOLVER,
            message: m.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::usage(e.to_string())
    }
}

struct Inputs {
    net: Network,
    origin: String,
    bytes: Vec<Vec<u8>>,
}

fn load_inputs(cli: &Cli) -> Result<Inputs, Failure> {
    match &cli.network {
        None => Ok(Inputs {
            net: format::bundled_network(),
            origin: format::BUNDLED_NETWORK_NAME.into(),
            bytes: vec![format::BUNDLED_NETWORK.as_bytes().to_vec()],
        }),
        Some(p) => {
            let origin = p.display().to_string();
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::usage(format!("{origin}: cannot read: {e}")))?;
            let net = format::parse_network(&text, &origin)?;
            Ok(Inputs {
                net,
                origin,
                bytes: vec![text.into_bytes()],
            })
        }
    }
}

fn scenario_keys(
    net: &Network,
    sel: Option<&str>,
    default_all: bool,
) -> Result<Vec<String>, Failure> {
    match sel {
        Some("all") => Ok(net.scenarios.iter().map(|s| s.key.clone()).collect()),
        None if default_all => Ok(net.scenarios.iter().map(|s| s.key.clone()).collect()),
        Some(k) => {
            if net.scenario(k).is_none() {
                let known: Vec<&str> = net.scenarios.iter().map(|s| s.key.as_str()).collect();
                return Err(Failure::usage(format!(
                    "unknown scenario `{k}` (have: {}, all)",
                    known.join(", ")
                )));
            }
            Ok(vec![k.to_string()])
        }
        None => net
            .scenarios
            .first()
            .map(|s| vec![s.key.clone()])
            .ok_or_else(|| Failure::usage("network declares no scenarios")),
    }
}

fn solver_options(cli: &Cli) -> Result<SolverOptions, Failure> {
    if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
        return Err(Failure::usage(format!(
            "--tolerance must be positive, got {}",
            cli.tolerance
        )));
    }
    Ok(SolverOptions {
        tolerance_pu: cli.tolerance,
        q_limit_enforcement: !cli.no_q_limits,
        ..SolverOptions::default()
    })
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stderr) {
        Ok((doc, code)) => {
            let text = match report::render(&doc, cli.format) {
                Ok(t) => t,
                Err(e) => {
                    let _ = writeln!(stderr, "error: rendering report: {e}");
                    return EXIT_USAGE;
                }
            };
            let written = match &cli.out {
                Some(p) => {
                    std::fs::write(p, text.as_bytes()).map_err(|e| format!("{}: {e}", p.display()))
                }
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: writing report: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn document(
    cli: &Cli,
    command: &str,
    inputs: &[&[u8]],
    mut parameters: BTreeMap<String, String>,
    payload: Payload,
) -> ReportDocument {
    parameters.insert("tolerance".into(), cli.tolerance.to_string());
    parameters.insert("q_limits".into(), (!cli.no_q_limits).to_string());
    ReportDocument {
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        input_digest: report::digest_inputs(inputs),
        command: command.into(),
        parameters,
        generated_at: report::timestamp(),
        payload,
    }
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<(ReportDocument, i32), Failure> {
    if let Command::Cost(args) = &cli.command {
        return cost_command(cli, args);
    }
    let inputs = load_inputs(cli)?;
    let refs: Vec<&[u8]> = inputs.bytes.iter().map(|b| b.as_slice()).collect();
    let net = &inputs.net;
    let opts = solver_options(cli)?;
    let profile = LimitProfile::default();
    let exec = Parallel::new(cli.jobs).map_err(|e| Failure::usage(format!("--jobs: {e}")))?;
    let mut params = BTreeMap::from([("network".to_string(), inputs.origin.clone())]);

    match &cli.command {
        Command::Validate => {
            let issues = validate_network(net);
            let code = if issues.is_empty() {
                EXIT_OK
            } else {
                EXIT_VIOLATIONS
            };
            let payload = Payload::Validate(ValidatePayload {
                network: inputs.origin.clone(),
                buses: net.buses.len(),
                circuits: net.total_circuits(),
                scenarios: net.scenarios.iter().map(|s| s.key.clone()).collect(),
                issues,
            });
            Ok((document(cli, "validate", &refs, params, payload), code))
        }
        Command::Lineparams => {
            let payload = lineparams(net).map_err(Failure::usage)?;
            Ok((document(cli, "lineparams", &refs, params, payload), EXIT_OK))
        }
        Command::Solve => {
            let keys = scenario_keys(net, cli.scenario.as_deref(), false)?;
            params.insert("scenario".into(), keys.join(","));
            let mut code = EXIT_OK;
            let mut list = Vec::new();
            for k in &keys {
                let case = apply_scenario(net, k).map_err(|e| Failure::usage(e.to_string()))?;
                match solve(&case, &opts) {
                    Ok(sol) => {
                        let violations = check_limits(&sol, &profile, CheckMode::Normal);
                        if !violations.is_empty() {
                            code = code.max(EXIT_VIOLATIONS);
                        }
                        if !sol.q_limits_settled {
                            let _ = writeln!(
                                stderr,
                                "warning: {k}: reactive-limit switching did not settle"
                            );
                        }
                        list.push(SolvedScenario {
                            scenario: k.clone(),
                            summary: Some(system_summary(&sol)),
                            solution: Some(sol),
                            violations,
                            error: None,
                        });
                    }
                    Err(e) => {
                        let _ = writeln!(stderr, "error: {k}: {e}");
                        code = EXIT_SOLVER;
                        list.push(SolvedScenario {
                            scenario: k.clone(),
                            solution: None,
                            summary: None,
                            violations: vec![],
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
            Ok((
                document(cli, "solve", &refs, params, Payload::Solve(list)),
                code,
            ))
        }
        Command::N1 => {
            let keys = scenario_keys(net, cli.scenario.as_deref(), false)?;
            params.insert("scenario".into(), keys.join(","));
            let mut code = EXIT_OK;
            let mut list = Vec::new();
            for k in &keys {
                let case = apply_scenario(net, k).map_err(|e| Failure::usage(e.to_string()))?;
                match n1_sweep(&case, &opts, &profile, &exec) {
                    Ok(r) => {
                        if !r.compliant() {
                            code = code.max(EXIT_VIOLATIONS);
                        }
                        list.push(N1Outcome {
                            scenario: k.clone(),
                            report: Some(r),
                            error: None,
                        });
                    }
                    Err(e) => {
                        let _ = writeln!(stderr, "error: {k}: base case: {e}");
                        code = EXIT_SOLVER;
                        list.push(N1Outcome {
                            scenario: k.clone(),
                            report: None,
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
            Ok((document(cli, "n1", &refs, params, Payload::N1(list)), code))
        }
        Command::Sweep => {
            let keys = scenario_keys(net, cli.scenario.as_deref(), true)?;
            params.insert("scenario".into(), keys.join(","));
            let key_refs: Vec<&str> = keys.iter().map(String::as_str).collect();
            let sweep = scenario_sweep(net, &key_refs, &opts, &profile, &exec);
            let code = if sweep.scenarios.iter().any(|s| s.normal.is_none()) {
                EXIT_SOLVER
            } else if sweep.pass() {
                EXIT_OK
            } else {
                EXIT_VIOLATIONS
            };
            Ok((
                document(cli, "sweep", &refs, params, Payload::Sweep(sweep)),
                code,
            ))
        }
        Command::Tep(args) => {
            let (doc_case, case_bytes) = tep_case(args)?;
            let mut all: Vec<&[u8]> = refs.clone();
            all.push(&case_bytes);
            let mut spec = doc_case.spec.clone();
            if args.scale_new_load {
                spec.fixed_new_load = false;
            }
            params.insert("case".into(), spec.label.clone());
            let tep_err = |e: TepError| match e {
                TepError::InfeasibleAtZero(_) => Failure {
                    code: EXIT_VIOLATIONS,
                    message: e.to_string(),
                },
                _ => Failure::usage(e.to_string()),
            };
            let mut payload = TepPayload {
                label: spec.label.clone(),
                search: None,
                at: None,
                cost: None,
                reported: doc_case.reported.clone(),
            };
            let code;
            if let Some(mw) = args.at {
                params.insert("at_mw".into(), mw.to_string());
                let expanded = build_tep_case(net, &spec).map_err(tep_err)?;
                let f = feasibility(
                    &expanded,
                    spec.new_bus,
                    mw,
                    &TEP_SCENARIOS,
                    &opts,
                    &profile,
                    &exec,
                )
                .map_err(tep_err)?;
                code = if f.pass { EXIT_OK } else { EXIT_VIOLATIONS };
                payload.at = Some(f);
            } else {
                if !(args.step > 0.0 && args.max_mw >= args.step) {
                    return Err(Failure::usage(
                        "--step must be positive and no larger than --max-mw",
                    ));
                }
                params.insert("step_mw".into(), args.step.to_string());
                params.insert("max_mw".into(), args.max_mw.to_string());
                let search = SearchOptions {
                    step_mw: args.step,
                    max_mw: args.max_mw,
                    ..SearchOptions::default()
                };
                let result = max_deliverable_load(net, &spec, &search, &opts, &profile, &exec)
                    .map_err(tep_err)?;
                if let Some(a) = &result.anomaly {
                    let _ = writeln!(stderr, "warning: {a}");
                }
                if args.cost {
                    let base_loss = match args.base_loss {
                        Some(l) => l,
                        None => base_peak_loss(net, &opts)?,
                    };
                    params.insert("base_loss_mw".into(), base_loss.to_string());
                    payload.cost = Some(tep_cost(&spec, &result, &args.prices.params(), base_loss));
                }
                code = EXIT_OK;
                payload.search = Some(result);
            }
            Ok((
                document(cli, "tep", &all, params, Payload::Tep(payload)),
                code,
            ))
        }
        Command::Cost(_) => unreachable!("handled above"),
    }
}

fn base_peak_loss(net: &Network, opts: &SolverOptions) -> Result<f64, Failure> {
    let key = TEP_SCENARIOS[0];
    let case = apply_scenario(net, key).map_err(|e| Failure::usage(e.to_string()))?;
    solve(&case, opts)
        .map(|s| s.losses_mw)
        .map_err(|e| Failure::solver(format!("{key} base case: {e}")))
}

fn tep_case(args: &TepArgs) -> Result<(TepCaseDoc, Vec<u8>), Failure> {
    if let Some(label) = &args.case {
        let (_, text) = format::BUNDLED_CASES
            .iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .ok_or_else(|| {
                Failure::usage(format!(
                    "unknown case `{label}` (bundled: I, II, III, IV, V, VI)"
                ))
            })?;
        let doc = format::parse_tep_case(text, &format!("bundled case {label}"))?;
        return Ok((doc, text.as_bytes().to_vec()));
    }
    let path = args.spec.as_ref().expect("clap requires --case or --spec");
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{origin}: cannot read: {e}")))?;
    let doc = format::parse_tep_case(&text, &origin)?;
    Ok((doc, text.into_bytes()))
}

/// Prices cases from the figures their files quote; no load flow.
fn cost_command(cli: &Cli, args: &CostArgs) -> Result<(ReportDocument, i32), Failure> {
    let mut docs: Vec<(TepCaseDoc, Vec<u8>)> = Vec::new();
    let wanted =
        |l: &str| args.cases.is_empty() || args.cases.iter().any(|c| c.eq_ignore_ascii_case(l));
    if args.specs.is_empty() || !args.cases.is_empty() {
        for (label, text) in format::BUNDLED_CASES {
            if wanted(label) {
                docs.push((
                    format::parse_tep_case(text, &format!("bundled case {label}"))?,
                    text.as_bytes().to_vec(),
                ));
            }
        }
        for c in &args.cases {
            if !format::BUNDLED_CASES
                .iter()
                .any(|(l, _)| l.eq_ignore_ascii_case(c))
            {
                return Err(Failure::usage(format!("unknown case `{c}`")));
            }
        }
    }
    for p in &args.specs {
        let text = std::fs::read(p)
            .map_err(|e| Failure::usage(format!("{}: cannot read: {e}", p.display())))?;
        let s = String::from_utf8(text.clone())
            .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
        docs.push((format::parse_tep_case(&s, &p.display().to_string())?, text));
    }
    let prices = args.prices.params();
    let mut rows = Vec::new();
    for (d, _) in &docs {
        let rep: &ReportedFigures = d
            .reported
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("{d}: no quoted figures to price")))?;
        let result = TepResult {
            label: d.spec.label.clone(),
            max_load_mw: rep.max_load_mw,
            peak_loss_mw: rep.peak_loss_mw,
            additional_reactor_mvar: rep.additional_reactor_mvar,
            probes: vec![],
            anomaly: None,
            at_max: None,
        };
        rows.push(tep_cost(&d.spec, &result, &prices, args.base_loss));
    }
    let ranking = compare_cases(&rows)
        .into_iter()
        .map(|i| rows[i].label.clone())
        .collect();
    let bytes: Vec<&[u8]> = docs.iter().map(|(_, b)| b.as_slice()).collect();
    let params = BTreeMap::from([("base_loss_mw".to_string(), args.base_loss.to_string())]);
    Ok((
        document(
            cli,
            "cost",
            &bytes,
            params,
            Payload::Cost(CostPayload { rows, ranking }),
        ),
        EXIT_OK,
    ))
}

fn lineparams(net: &Network) -> Result<Payload, String> {
    let mut rows = Vec::new();
    let mut unit = None;
    for g in &net.circuit_groups {
        let u = net.unit_params(g).map_err(|e| e.to_string())?;
        let pi = net.circuit_pi(g).map_err(|e| e.to_string())?;
        if unit.is_none() {
            unit = Some(UnitSummary {
                r_ohm_per_km: u.r_ohm_per_km,
                x_ohm_per_km: u.x_ohm_per_km,
                b_us_per_km: u.b_siemens_per_km * 1e6,
                l_mh_per_km: u.inductance_mh_per_km(net.frequency_hz),
                c_nf_per_km: u.capacitance_nf_per_km(net.frequency_hz),
                thermal_mva: pi.rating_mva / net.line_loading_cap,
                rating_mva: pi.rating_mva,
            });
        }
        rows.push(LineParamRow {
            from: g.from_bus.0,
            to: g.to_bus.0,
            circuits: g.n_circuits,
            length_km: g.length_km,
            r_ohm_per_km: u.r_ohm_per_km,
            x_ohm_per_km: u.x_ohm_per_km,
            b_us_per_km: u.b_siemens_per_km * 1e6,
            z_re_ohm: pi.z_series.re,
            z_im_ohm: pi.z_series.im,
            y_im_us: pi.y_shunt.im * 1e6,
            rating_mva: pi.rating_mva,
        });
    }
    let unit = unit.ok_or("network has no circuit groups")?;
    Ok(Payload::LineParams(LineParamsPayload { unit, rows }))
}
