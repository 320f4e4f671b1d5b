//! Bus admittance assembly and polar Newton-Raphson power flow.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::linalg::{DenseMatrix, Lu};
use crate::network::{BusId, BusKind, CaseSpec};

/// Dense complex Ybus in per-unit, ordered like `CaseSpec::buses`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmittanceMatrix {
    n: usize,
    data: Vec<Complex64>,
    pub bus_ids: Vec<BusId>,
}

impl AdmittanceMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] += v;
    }

    pub fn ordinal(&self, id: BusId) -> Option<usize> {
        self.bus_ids.iter().position(|b| *b == id)
    }

    /// Largest |Y_ij − Y_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).norm());
            }
        }
        worst
    }

    pub fn row_sum(&self, i: usize) -> Complex64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }
}

fn z_base(case: &CaseSpec, bus: usize) -> f64 {
    let kv = case.buses[bus].base_kv;
    kv * kv / case.base_mva
}

/// Assembles Ybus from the circuits and scenario shunts of `case`.
pub fn build_ybus(case: &CaseSpec) -> Result<AdmittanceMatrix, SolveError> {
    let n = case.buses.len();
    let mut y = AdmittanceMatrix {
        n,
        data: vec![Complex64::new(0.0, 0.0); n * n],
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
    };
    for br in &case.branches {
        let zb = z_base(case, br.from);
        let z = br.pi.z_series / zb;
        if z.norm() == 0.0 || !z.norm().is_finite() {
            return Err(SolveError::ZeroImpedance {
                label: br.label.clone(),
            });
        }
        let ys = z.inv();
        let half = br.pi.y_shunt * zb / 2.0;
        y.add(br.from, br.from, ys + half);
        y.add(br.to, br.to, ys + half);
        y.add(br.from, br.to, -ys);
        y.add(br.to, br.from, -ys);
    }
    for (i, b) in case.buses.iter().enumerate() {
        if b.shunt_mvar != 0.0 {
            y.add(i, i, Complex64::new(0.0, b.shunt_mvar / case.base_mva));
        }
    }
    Ok(y)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Largest tolerated |ΔP|, |ΔQ| in p.u.
    pub tolerance_pu: f64,
    pub max_iterations: usize,
    /// Ignore any supplied start point and begin from setpoints / 1.0∠0°.
    pub flat_start: bool,
    pub q_limit_enforcement: bool,
    /// Cap on outer PV/PQ switching rounds.
    pub max_q_rounds: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance_pu: 1e-8,
            max_iterations: 30,
            flat_start: true,
            q_limit_enforcement: true,
            max_q_rounds: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    NotConverged {
        iterations: usize,
        /// Max mismatch per iteration, p.u.
        trace: Vec<f64>,
        worst_bus: BusId,
        worst_mismatch: f64,
    },
    SingularJacobian {
        iteration: usize,
        bus: BusId,
    },
    ZeroImpedance {
        label: String,
    },
    NoSlack,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::NotConverged { iterations, worst_bus, worst_mismatch, .. } => write!(
                f,
                "no convergence after {iterations} iterations (worst mismatch {worst_mismatch:.3e} p.u. at bus {worst_bus})"
            ),
            SolveError::SingularJacobian { iteration, bus } => {
                write!(f, "singular Jacobian at iteration {iteration} (bus {bus})")
            }
            SolveError::ZeroImpedance { label } => write!(f, "zero-impedance branch {label}"),
            SolveError::NoSlack => f.write_str("case has no slack bus"),
        }
    }
}

impl core::error::Error for SolveError {}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BusResult {
    pub id: BusId,
    pub kind: BusKind,
    pub vm_pu: f64,
    pub va_deg: f64,
    pub p_gen_mw: f64,
    pub q_gen_mvar: f64,
    pub p_load_mw: f64,
    pub q_load_mvar: f64,
    /// Shunt injection at the solved voltage.
    pub shunt_q_mvar: f64,
    pub q_limits_mvar: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchFlow {
    pub label: String,
    pub group: usize,
    pub circuit: u32,
    pub from: BusId,
    pub to: BusId,
    pub p_from_mw: f64,
    pub q_from_mvar: f64,
    pub p_to_mw: f64,
    pub q_to_mvar: f64,
    pub rating_mva: f64,
    pub loading_pct: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerFlowSolution {
    pub scenario: String,
    pub buses: Vec<BusResult>,
    pub branches: Vec<BranchFlow>,
    pub losses_mw: f64,
    pub q_losses_mvar: f64,
    /// Newton iterations summed over all switching rounds.
    pub iterations: usize,
    pub converged: bool,
    /// Max mismatch per iteration of the final inner solve, p.u.
    pub mismatch_trace: Vec<f64>,
    pub q_rounds: usize,
    /// Generator buses held at a reactive limit in the final state.
    pub switched_to_pq: Vec<BusId>,
    /// False when the switching cap was hit with changes still pending.
    pub q_limits_settled: bool,
}

impl PowerFlowSolution {
    pub fn bus(&self, id: BusId) -> Option<&BusResult> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Polar start point (|V|, δ rad) for a warm start.
    pub fn start_point(&self) -> Vec<(f64, f64)> {
        self.buses
            .iter()
            .map(|b| (b.vm_pu, b.va_deg.to_radians()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Limit {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum State {
    Slack,
    Pv,
    Pq,
    /// Generator bus held at a reactive limit, Q in p.u.
    AtLimit(Limit, f64),
}

struct Inner {
    vm: Vec<f64>,
    va: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
}

/// Injected complex power S_i = V_i·conj(Σ Y_ij V_j), p.u.
fn injections(y: &AdmittanceMatrix, vm: &[f64], va: &[f64]) -> Vec<Complex64> {
    let n = vm.len();
    let v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(vm[i], va[i]))
        .collect();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += y.get(i, j) * v[j];
            }
            v[i] * acc.conj()
        })
        .collect()
}

fn newton(
    y: &AdmittanceMatrix,
    states: &[State],
    p_spec: &[f64],
    q_spec: &[f64],
    mut vm: Vec<f64>,
    mut va: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Inner, SolveError> {
    let n = states.len();
    // Angle unknowns for every non-slack bus, magnitude unknowns for PQ.
    let ang: Vec<usize> = (0..n).filter(|&i| states[i] != State::Slack).collect();
    let mag: Vec<usize> = (0..n)
        .filter(|&i| matches!(states[i], State::Pq | State::AtLimit(..)))
        .collect();
    let q_target = |i: usize| match states[i] {
        State::AtLimit(_, q) => q_spec[i] + q,
        _ => q_spec[i],
    };
    let na = ang.len();
    let dim = na + mag.len();
    let mut trace = Vec::new();
    let bus_of = |k: usize| if k < na { ang[k] } else { mag[k - na] };

    for it in 0..=opts.max_iterations {
        let s = injections(y, &vm, &va);
        let mut mis = Vec::with_capacity(dim);
        for &i in &ang {
            mis.push(p_spec[i] - s[i].re);
        }
        for &i in &mag {
            mis.push(q_target(i) - s[i].im);
        }
        let (worst_k, worst) = mis.iter().enumerate().fold((0, 0.0f64), |acc, (k, m)| {
            if m.abs() > acc.1 || m.is_nan() {
                (k, m.abs())
            } else {
                acc
            }
        });
        trace.push(worst);
        if worst < opts.tolerance_pu {
            return Ok(Inner {
                vm,
                va,
                iterations: it,
                trace,
            });
        }
        if it == opts.max_iterations || !worst.is_finite() {
            return Err(SolveError::NotConverged {
                iterations: it,
                worst_bus: y.bus_ids[if dim == 0 { 0 } else { bus_of(worst_k) }],
                worst_mismatch: worst,
                trace,
            });
        }

        let mut jac = DenseMatrix::zeros(dim);
        for (r, &i) in ang.iter().enumerate() {
            fill_row(y, &vm, &va, &s, i, &ang, &mag, &mut jac, r, true);
        }
        for (r, &i) in mag.iter().enumerate() {
            fill_row(y, &vm, &va, &s, i, &ang, &mag, &mut jac, na + r, false);
        }
        let lu = Lu::factor(jac).map_err(|e| SolveError::SingularJacobian {
            iteration: it + 1,
            bus: y.bus_ids[bus_of(e.column)],
        })?;
        let dx = lu.solve(&mis);
        for (k, &i) in ang.iter().enumerate() {
            va[i] += dx[k];
        }
        for (k, &i) in mag.iter().enumerate() {
            vm[i] += dx[na + k];
        }
    }
    unreachable!()
}

/// One Jacobian row: ∂P_i (or ∂Q_i) with respect to the angle unknowns
/// followed by the magnitude unknowns.
#[allow(clippy::too_many_arguments)]
fn fill_row(
    y: &AdmittanceMatrix,
    vm: &[f64],
    va: &[f64],
    s: &[Complex64],
    i: usize,
    ang: &[usize],
    mag: &[usize],
    jac: &mut DenseMatrix,
    row: usize,
    active: bool,
) {
    let na = ang.len();
    let yii = y.get(i, i);
    let (gii, bii) = (yii.re, yii.im);
    let (pi, qi) = (s[i].re, s[i].im);
    let vi = vm[i];
    let cell = |k: usize, wrt_angle: bool| -> f64 {
        if k == i {
            match (active, wrt_angle) {
                (true, true) => -qi - bii * vi * vi,
                (true, false) => pi / vi + gii * vi,
                (false, true) => pi - gii * vi * vi,
                (false, false) => qi / vi - bii * vi,
            }
        } else {
            let yik = y.get(i, k);
            if yik.re == 0.0 && yik.im == 0.0 {
                return 0.0;
            }
            let t = va[i] - va[k];
            let (sn, cs) = t.sin_cos();
            let a = yik.re * cs + yik.im * sn;
            let b = yik.re * sn - yik.im * cs;
            match (active, wrt_angle) {
                (true, true) => vi * vm[k] * b,
                (true, false) => vi * a,
                (false, true) => -vi * vm[k] * a,
                (false, false) => vi * b,
            }
        }
    };
    for (c, &k) in ang.iter().enumerate() {
        jac.set(row, c, cell(k, true));
    }
    for (c, &k) in mag.iter().enumerate() {
        jac.set(row, na + c, cell(k, false));
    }
}

/// Solves from setpoints and a flat 1.0∠0° elsewhere.
pub fn solve(case: &CaseSpec, opts: &SolverOptions) -> Result<PowerFlowSolution, SolveError> {
    solve_from(case, opts, None)
}

/// Solves with an optional warm start (|V| p.u., δ rad per bus). The start
/// is ignored when `opts.flat_start` is set or its length does not match.
pub fn solve_from(
    case: &CaseSpec,
    opts: &SolverOptions,
    start: Option<&[(f64, f64)]>,
) -> Result<PowerFlowSolution, SolveError> {
    let n = case.buses.len();
    if !case.buses.iter().any(|b| b.kind == BusKind::Slack) {
        return Err(SolveError::NoSlack);
    }
    let y = build_ybus(case)?;
    let base = case.base_mva;
    let p_spec: Vec<f64> = case
        .buses
        .iter()
        .map(|b| (b.p_gen_mw - b.p_load_mw) / base)
        .collect();
    let q_spec: Vec<f64> = case.buses.iter().map(|b| -b.q_load_mvar / base).collect();

    let mut states: Vec<State> = case
        .buses
        .iter()
        .map(|b| match b.kind {
            BusKind::Slack => State::Slack,
            BusKind::Pv => State::Pv,
            BusKind::Pq => State::Pq,
        })
        .collect();

    let warm = start.filter(|s| !opts.flat_start && s.len() == n);
    let mut vm: Vec<f64> = (0..n)
        .map(|i| match states[i] {
            State::Pq => warm.map_or(1.0, |s| s[i].0),
            _ => case.buses[i].v_set,
        })
        .collect();
    let mut va: Vec<f64> = (0..n)
        .map(|i| match states[i] {
            State::Slack => case.buses[i].angle_deg.to_radians(),
            _ => warm.map_or(0.0, |s| s[i].1),
        })
        .collect();

    let limits: Vec<Option<(f64, f64)>> = case
        .buses
        .iter()
        .map(|b| {
            if b.kind == BusKind::Pv {
                b.q_limits_mvar.map(|(lo, hi)| (lo / base, hi / base))
            } else {
                None
            }
        })
        .collect();
    // Per bus: times held at upper / lower limit, and state changes.
    let mut at_upper = vec![0usize; n];
    let mut at_lower = vec![0usize; n];
    let mut flips = vec![0usize; n];
    let mut pinned = vec![false; n];

    let mut total_iters = 0;
    let mut rounds = 0;
    let mut settled = true;
    let eps = 1e-9;
    let inner = loop {
        let inner = newton(&y, &states, &p_spec, &q_spec, vm.clone(), va.clone(), opts).map_err(
            |e| match e {
                SolveError::NotConverged {
                    iterations,
                    trace,
                    worst_bus,
                    worst_mismatch,
                } => SolveError::NotConverged {
                    iterations: total_iters + iterations,
                    trace,
                    worst_bus,
                    worst_mismatch,
                },
                other => other,
            },
        )?;
        total_iters += inner.iterations;
        if !opts.q_limit_enforcement {
            break inner;
        }
        let s = injections(&y, &inner.vm, &inner.va);
        let mut changed = false;
        for i in 0..n {
            let Some((qmin, qmax)) = limits[i] else {
                continue;
            };
            let v_set = case.buses[i].v_set;
            match states[i] {
                State::Pv => {
                    let qg = s[i].im - q_spec[i];
                    if qg > qmax + eps {
                        states[i] = State::AtLimit(Limit::Upper, qmax);
                    } else if qg < qmin - eps {
                        states[i] = State::AtLimit(Limit::Lower, qmin);
                    } else {
                        continue;
                    }
                    flips[i] += 1;
                    changed = true;
                }
                State::AtLimit(lim, _) if !pinned[i] => {
                    // Back to voltage control once the setpoint no longer
                    // needs more than the limit.
                    let recoverable = match lim {
                        Limit::Upper => inner.vm[i] > v_set + eps,
                        Limit::Lower => inner.vm[i] < v_set - eps,
                    };
                    if recoverable {
                        states[i] = State::Pv;
                        flips[i] += 1;
                        changed = true;
                    }
                }
                _ => {}
            }
            match states[i] {
                State::AtLimit(Limit::Upper, _) => at_upper[i] += 1,
                State::AtLimit(Limit::Lower, _) => at_lower[i] += 1,
                _ => {}
            }
            if flips[i] >= 4 && !pinned[i] {
                // Oscillating: hold at the limit seen most often.
                pinned[i] = true;
                let (qmin, qmax) = limits[i].expect("generator bus");
                states[i] = if at_lower[i] > at_upper[i] {
                    State::AtLimit(Limit::Lower, qmin)
                } else {
                    State::AtLimit(Limit::Upper, qmax)
                };
                changed = true;
            }
        }
        if !changed {
            break inner;
        }
        rounds += 1;
        if rounds > opts.max_q_rounds {
            settled = false;
            break inner;
        }
        vm = inner.vm.clone();
        va = inner.va.clone();
        for i in 0..n {
            if states[i] == State::Pv {
                vm[i] = case.buses[i].v_set;
            }
        }
    };

    Ok(assemble(
        case,
        &y,
        &states,
        inner,
        total_iters,
        rounds,
        settled,
    ))
}

fn assemble(
    case: &CaseSpec,
    y: &AdmittanceMatrix,
    states: &[State],
    inner: Inner,
    iterations: usize,
    q_rounds: usize,
    settled: bool,
) -> PowerFlowSolution {
    let base = case.base_mva;
    let s = injections(y, &inner.vm, &inner.va);
    let buses: Vec<BusResult> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let vm = inner.vm[i];
            let shunt_q = b.shunt_mvar * vm * vm;
            // Ybus carries the shunt, so S_i is what generation minus load
            // must supply.
            let (pg, qg) = match states[i] {
                State::Slack => (s[i].re * base + b.p_load_mw, s[i].im * base + b.q_load_mvar),
                State::Pv | State::AtLimit(..) => (b.p_gen_mw, s[i].im * base + b.q_load_mvar),
                State::Pq => (b.p_gen_mw, 0.0),
            };
            BusResult {
                id: b.id,
                kind: b.kind,
                vm_pu: vm,
                va_deg: inner.va[i].to_degrees(),
                p_gen_mw: pg,
                q_gen_mvar: qg,
                p_load_mw: b.p_load_mw,
                q_load_mvar: b.q_load_mvar,
                shunt_q_mvar: shunt_q,
                q_limits_mvar: b.q_limits_mvar,
            }
        })
        .collect();

    let v: Vec<Complex64> = (0..case.buses.len())
        .map(|i| Complex64::from_polar(inner.vm[i], inner.va[i]))
        .collect();
    let mut losses = Complex64::new(0.0, 0.0);
    let branches: Vec<BranchFlow> = case
        .branches
        .iter()
        .map(|br| {
            let zb = z_base(case, br.from);
            let ys = (br.pi.z_series / zb).inv();
            let half = br.pi.y_shunt * zb / 2.0;
            let (vf, vt) = (v[br.from], v[br.to]);
            let sf = vf * ((vf - vt) * ys + vf * half).conj() * base;
            let st = vt * ((vt - vf) * ys + vt * half).conj() * base;
            losses += sf + st;
            let loading = if br.pi.rating_mva > 0.0 {
                100.0 * sf.norm().max(st.norm()) / br.pi.rating_mva
            } else {
                0.0
            };
            BranchFlow {
                label: br.label.clone(),
                group: br.group,
                circuit: br.circuit,
                from: case.buses[br.from].id,
                to: case.buses[br.to].id,
                p_from_mw: sf.re,
                q_from_mvar: sf.im,
                p_to_mw: st.re,
                q_to_mvar: st.im,
                rating_mva: br.pi.rating_mva,
                loading_pct: loading,
            }
        })
        .collect();

    let switched = states
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, State::AtLimit(..)))
        .map(|(i, _)| case.buses[i].id)
        .collect();

    PowerFlowSolution {
        scenario: case.scenario.clone(),
        buses,
        branches,
        losses_mw: losses.re,
        q_losses_mvar: losses.im,
        iterations,
        converged: true,
        mismatch_trace: inner.trace,
        q_rounds,
        switched_to_pq: switched,
        q_limits_settled: settled,
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Loading {
    pub label: String,
    pub pct: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemSummary {
    pub total_gen_mw: f64,
    pub total_load_mw: f64,
    pub losses_mw: f64,
    /// Three most loaded circuit groups, highest first.
    pub top_loadings: Vec<Loading>,
    pub min_voltage: (BusId, f64),
    pub max_voltage: (BusId, f64),
}

pub fn system_summary(sol: &PowerFlowSolution) -> SystemSummary {
    let mut per_group: Vec<(usize, Loading)> = Vec::new();
    for b in &sol.branches {
        match per_group.iter_mut().find(|(g, _)| *g == b.group) {
            Some((_, l)) => l.pct = l.pct.max(b.loading_pct),
            None => per_group.push((
                b.group,
                Loading {
                    label: b.label.clone(),
                    pct: b.loading_pct,
                },
            )),
        }
    }
    // Stable sort keeps declaration order among equal loadings.
    per_group.sort_by(|a, b| {
        b.1.pct
            .partial_cmp(&a.1.pct)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let first = sol
        .buses
        .first()
        .map(|b| (b.id, b.vm_pu))
        .unwrap_or((BusId(0), 0.0));
    let (mut lo, mut hi) = (first, first);
    for b in &sol.buses {
        if b.vm_pu < lo.1 {
            lo = (b.id, b.vm_pu);
        }
        if b.vm_pu > hi.1 {
            hi = (b.id, b.vm_pu);
        }
    }
    SystemSummary {
        total_gen_mw: sol.buses.iter().map(|b| b.p_gen_mw).sum(),
        total_load_mw: sol.buses.iter().map(|b| b.p_load_mw).sum(),
        losses_mw: sol.losses_mw,
        top_loadings: per_group.into_iter().take(3).map(|(_, l)| l).collect(),
        min_voltage: lo,
        max_voltage: hi,
    }
}
