//! Synchronous-round simulation of event-triggered dual gradient tracking
//! and its periodic baseline, with full per-round metrics capture.
//!
//! A round is two-phase: every trigger check and broadcast for iteration k
//! completes before any agent updates. The periodic baseline runs the same
//! kernel with an always-trigger policy, so the two algorithms are
//! bit-identical whenever the threshold schedule is degenerate.

use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::error::Result;
use crate::network::NetworkModel;
use crate::objective::{self, CostModel};
use crate::oracle::OracleSolution;
use crate::scenario::Scenario;
use crate::trigger::{should_trigger, TriggerSchedule, TriggerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    EtDgt,
    Ddgt,
}

impl Algorithm {
    pub fn file_tag(&self) -> &'static str {
        match self {
            Algorithm::EtDgt => "etdgt",
            Algorithm::Ddgt => "ddgt",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "etdgt" => Ok(Algorithm::EtDgt),
            "ddgt" => Ok(Algorithm::Ddgt),
            other => Err(format!("unknown algorithm '{other}' (expected etdgt or ddgt)")),
        }
    }
}

/// Broadcast policy for one round: the event-triggered law with a
/// threshold schedule, or the periodic always-broadcast baseline.
#[derive(Debug, Clone, Copy)]
pub enum TriggerPolicy {
    Always,
    Schedule(TriggerSchedule),
}

/// One synchronous round's complete state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub k: usize,
    /// Stacked dual-price estimates, n x m.
    pub w_tilde: Array2<f64>,
    /// Stacked primal allocations, n x m.
    pub w: Array2<f64>,
    /// Stacked gradient trackers, n x m.
    pub s: Array2<f64>,
    pub trigger_w: TriggerState,
    pub trigger_s: TriggerState,
}

/// Stacked demand matrix of a cost collection, n x m.
pub fn demand_matrix(costs: &[CostModel]) -> Array2<f64> {
    let n = costs.len();
    let m = costs.first().map_or(1, CostModel::resource_dim);
    let mut d = Array2::zeros((n, m));
    for (i, c) in costs.iter().enumerate() {
        d.row_mut(i).assign(&c.demand);
    }
    d
}

/// Initial state: zero prices and allocations, trackers seeded with the
/// local demands, and the mandatory iteration-0 broadcast of both
/// variables recorded for every agent.
pub fn init_state(net: &NetworkModel, costs: &[CostModel]) -> Result<SimState> {
    let n = net.n();
    if costs.len() != n {
        return Err(crate::error::Error::InvalidScenario(format!(
            "{} cost models for {} agents",
            costs.len(),
            n
        )));
    }
    let m = costs[0].resource_dim();
    if costs.iter().any(|c| c.resource_dim() != m) {
        return Err(crate::error::Error::InvalidScenario(
            "agents disagree on the resource dimension".into(),
        ));
    }
    let w_tilde = Array2::zeros((n, m));
    let w = Array2::zeros((n, m));
    let s = demand_matrix(costs);
    let trigger_w = TriggerState::seed(&w_tilde, &net.graph_r.out_degrees());
    let trigger_s = TriggerState::seed(&s, &net.graph_c.out_degrees());
    Ok(SimState {
        k: 0,
        w_tilde,
        w,
        s,
        trigger_w,
        trigger_s,
    })
}

/// Phase 1 of a round: evaluate both triggering laws at the current
/// iteration and refresh the caches of every agent that fires. Iteration 0
/// is skipped — its broadcasts are mandatory and already seeded.
pub fn evaluate_triggers(
    state: &mut SimState,
    net: &NetworkModel,
    policy: TriggerPolicy,
) -> Result<()> {
    let k = state.k;
    if k == 0 {
        return Ok(());
    }
    let n = net.n();
    for i in 0..n {
        let fire = match policy {
            TriggerPolicy::Always => true,
            TriggerPolicy::Schedule(sch) => should_trigger(
                state.w_tilde.row(i),
                state.trigger_w.cache.row(i),
                sch.threshold_at(k),
            ),
        };
        if fire {
            let value = state.w_tilde.row(i).to_owned();
            state.trigger_w.record_broadcast(
                i,
                value.view(),
                k,
                net.graph_r.out_neighbors(i).len(),
            )?;
        }
    }
    for i in 0..n {
        let fire = match policy {
            TriggerPolicy::Always => true,
            TriggerPolicy::Schedule(sch) => should_trigger(
                state.s.row(i),
                state.trigger_s.cache.row(i),
                sch.threshold_at(k),
            ),
        };
        if fire {
            let value = state.s.row(i).to_owned();
            state.trigger_s.record_broadcast(
                i,
                value.view(),
                k,
                net.graph_c.out_neighbors(i).len(),
            )?;
        }
    }
    Ok(())
}

/// Phase 2 of a round: every agent updates simultaneously from the caches.
///
///   w~+ = w~ + (R W^ - W^) + alpha s
///   w+  = argmin_box { F(w) - w~+' w }
///   s+  = s + (C S^ - S^) - (w+ - w)
///
/// The mixing differences are computed in stacked form, which preserves
/// the column-sum identity of the trackers under any trigger pattern.
pub fn apply_updates(
    state: &mut SimState,
    net: &NetworkModel,
    costs: &[CostModel],
    alpha: f64,
) -> Result<()> {
    let w_hat = &state.trigger_w.cache;
    let s_hat = &state.trigger_s.cache;
    let w_tilde_next = &state.w_tilde + &(net.r.dot(w_hat) - w_hat) + &(alpha * &state.s);
    let mut w_next = Array2::zeros(state.w.raw_dim());
    for (i, cost) in costs.iter().enumerate() {
        let row = objective::local_argmin(cost, w_tilde_next.row(i))?;
        w_next.row_mut(i).assign(&row);
    }
    let s_next = &state.s + &(net.c.dot(s_hat) - s_hat) - &(&w_next - &state.w);
    state.w_tilde = w_tilde_next;
    state.w = w_next;
    state.s = s_next;
    state.k += 1;
    Ok(())
}

/// One event-triggered round.
pub fn step_etdgt(
    state: &mut SimState,
    net: &NetworkModel,
    costs: &[CostModel],
    schedule: TriggerSchedule,
    alpha: f64,
) -> Result<()> {
    evaluate_triggers(state, net, TriggerPolicy::Schedule(schedule))?;
    apply_updates(state, net, costs, alpha)
}

/// One periodic round: same kernel, every broadcast forced.
pub fn step_ddgt(
    state: &mut SimState,
    net: &NetworkModel,
    costs: &[CostModel],
    alpha: f64,
) -> Result<()> {
    evaluate_triggers(state, net, TriggerPolicy::Always)?;
    apply_updates(state, net, costs, alpha)
}

/// || 1'S_k - 1'(D - W_k) ||, the tracker conservation residual.
pub fn mass_residual(state: &SimState, demands: &Array2<f64>) -> f64 {
    let lhs = state.s.sum_axis(Axis(0));
    let rhs = demands.sum_axis(Axis(0)) - state.w.sum_axis(Axis(0));
    (&lhs - &rhs).iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Per-round metrics record.
#[derive(Debug, Clone, Serialize)]
pub struct RoundMetrics {
    pub k: usize,
    /// ||X_k - 1 xbar'|| with X = -W~ and xbar = X' pi_R (Frobenius).
    pub consensus_error: f64,
    /// ||S_k - pi_C yhat'|| with yhat = S' 1 (Frobenius).
    pub tracking_error: f64,
    /// || sum_i grad f_i(xbar) ||.
    pub grad_norm: f64,
    /// ||W_k - W*|| against the oracle; NaN when no oracle was supplied.
    pub primal_err: f64,
    /// sum_i ||grad F_i(w_i) - mean grad F||^2 + ||sum_i w_i - d||^2.
    pub primal_residual: f64,
    /// Signed total over-supply, sum(W) - sum(D).
    pub supply_gap: f64,
    /// Cumulative broadcast events for the dual estimates.
    pub comm_w: u64,
    /// Cumulative broadcast events for the gradient trackers.
    pub comm_s: u64,
    /// f(xbar) - f*; NaN when no oracle was supplied.
    pub dual_gap: f64,
    /// Cumulative per-link messages (both variables).
    pub comm_messages: u64,
}

/// Evaluate every metric of the current state.
pub fn compute_metrics(
    state: &SimState,
    net: &NetworkModel,
    costs: &[CostModel],
    oracle: Option<&OracleSolution>,
) -> Result<RoundMetrics> {
    let n = net.n();
    let m = state.w_tilde.ncols();

    // Consensus error, in the x = -w~ convention.
    let x = state.w_tilde.mapv(|v| -v);
    let x_bar = x.t().dot(&net.pi_r);
    let mut consensus_sq = 0.0;
    for i in 0..n {
        for c in 0..m {
            let d = x[[i, c]] - x_bar[c];
            consensus_sq += d * d;
        }
    }

    // Tracking error of the gradient trackers against their column sum.
    let y_hat = state.s.sum_axis(Axis(0));
    let mut tracking_sq = 0.0;
    for i in 0..n {
        for c in 0..m {
            let d = state.s[[i, c]] - net.pi_c[i] * y_hat[c];
            tracking_sq += d * d;
        }
    }

    // Global dual gradient at the weighted average price.
    let mut grad = Array1::<f64>::zeros(m);
    for cost in costs {
        grad += &objective::dual_gradient(cost, x_bar.view())?;
    }
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();

    // Primal residual of the allocation iterate.
    let grads: Vec<Array1<f64>> = costs
        .iter()
        .enumerate()
        .map(|(i, c)| objective::cost_gradient(c, state.w.row(i)))
        .collect();
    let mut mean_grad = Array1::<f64>::zeros(m);
    for g in &grads {
        mean_grad += g;
    }
    mean_grad.mapv_inplace(|v| v / n as f64);
    let mut stationarity = 0.0;
    for g in &grads {
        stationarity += g
            .iter()
            .zip(mean_grad.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    let demands = demand_matrix(costs);
    let balance = &state.w.sum_axis(Axis(0)) - &demands.sum_axis(Axis(0));
    let balance_sq = balance.iter().map(|x| x * x).sum::<f64>();
    let primal_residual = stationarity + balance_sq;
    let supply_gap = balance.sum();

    let (primal_err, dual_gap) = match oracle {
        Some(sol) => {
            let diff = &state.w - &sol.w_star;
            let err = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut f_xbar = 0.0;
            for cost in costs {
                f_xbar += objective::dual_value(cost, x_bar.view())?;
            }
            (err, f_xbar - sol.f_star)
        }
        None => (f64::NAN, f64::NAN),
    };

    Ok(RoundMetrics {
        k: state.k,
        consensus_error: consensus_sq.sqrt(),
        tracking_error: tracking_sq.sqrt(),
        grad_norm,
        primal_err,
        primal_residual,
        supply_gap,
        comm_w: state.trigger_w.events,
        comm_s: state.trigger_s.events,
        dual_gap,
        comm_messages: state.trigger_w.messages + state.trigger_s.messages,
    })
}

/// Full per-iteration trace of one run, with the scenario echoed for
/// self-describing exports.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsTrace {
    pub scenario: Scenario,
    pub algorithm: Algorithm,
    pub alpha: f64,
    /// Consensus/tracking errors are plain Euclidean norms, not the
    /// constructed mixing norms of the contraction analysis (those are
    /// non-constructive; norm equivalence preserves the rates).
    pub norm_convention: &'static str,
    pub rows: Vec<RoundMetrics>,
}

pub const CSV_HEADER: &str =
    "k,consensus_error,tracking_error,grad_norm,primal_err,primal_residual,supply_gap,comm_w,comm_s";

/// Shortest round-trip float form, capped at 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float reparses");
    format!("{rounded}")
}

impl MetricsTrace {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 96);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.k,
                format_sig(r.consensus_error),
                format_sig(r.tracking_error),
                format_sig(r.grad_norm),
                format_sig(r.primal_err),
                format_sig(r.primal_residual),
                format_sig(r.supply_gap),
                r.comm_w,
                r.comm_s,
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serialization cannot fail")
    }

    pub fn final_row(&self) -> &RoundMetrics {
        self.rows.last().expect("traces hold at least the initial row")
    }
}

/// Run `k_rounds` rounds of the requested algorithm on prebuilt inputs.
pub fn run_with(
    scenario: &Scenario,
    net: &NetworkModel,
    costs: &[CostModel],
    algorithm: Algorithm,
    k_rounds: usize,
    oracle: Option<&OracleSolution>,
) -> Result<MetricsTrace> {
    let schedule = scenario.schedule()?;
    let alpha = scenario.alpha;
    let mut state = init_state(net, costs)?;
    let mut rows = Vec::with_capacity(k_rounds + 1);
    rows.push(compute_metrics(&state, net, costs, oracle)?);
    for _ in 0..k_rounds {
        match algorithm {
            Algorithm::EtDgt => step_etdgt(&mut state, net, costs, schedule, alpha)?,
            Algorithm::Ddgt => step_ddgt(&mut state, net, costs, alpha)?,
        }
        rows.push(compute_metrics(&state, net, costs, oracle)?);
    }
    Ok(MetricsTrace {
        scenario: scenario.clone(),
        algorithm,
        alpha,
        norm_convention: "euclidean",
        rows,
    })
}

/// Build the network and costs from the scenario, then run.
pub fn run(
    scenario: &Scenario,
    algorithm: Algorithm,
    k_rounds: usize,
    oracle: Option<&OracleSolution>,
) -> Result<MetricsTrace> {
    let (net, costs, _) = scenario.build()?;
    run_with(scenario, &net, &costs, algorithm, k_rounds, oracle)
}
