//! Centralized ground-truth solver for the balance-constrained allocation
//! problem, used to validate the distributed iterates.
//!
//! The multiplier is found by bisection on the scalar price: the clipped
//! aggregate best response is non-increasing in the multiplier, so the
//! balance equation has a bracketable root per resource component.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{self, CostModel};

#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// Optimal allocation, n x m.
    pub w_star: Array2<f64>,
    /// Optimal multiplier, length m.
    pub x_star: Array1<f64>,
    /// Optimal dual value (the negative of the optimal cost).
    pub f_star: f64,
    /// Maximum stationarity violation of the returned point.
    pub kkt_residual: f64,
}

impl OracleSolution {
    /// JSON document {"W_star": [[..]..], "x_star": [..], "f_star", "kkt_residual"}.
    pub fn to_json_value(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self
            .w_star
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        serde_json::json!({
            "W_star": rows,
            "x_star": self.x_star.to_vec(),
            "f_star": self.f_star,
            "kkt_residual": self.kkt_residual,
        })
    }
}

/// KKT diagnostics of a candidate solution.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    /// Max over agents/components of the stationarity violation
    /// (sign-relaxed at active bounds).
    pub max_stationarity: f64,
    /// || sum_i w_i - sum_i d_i ||.
    pub balance_residual: f64,
    /// (agent, component) pairs pinned at the lower bound.
    pub at_lower: Vec<(usize, usize)>,
    /// (agent, component) pairs pinned at the upper bound.
    pub at_upper: Vec<(usize, usize)>,
}

impl KktReport {
    pub fn residual(&self) -> f64 {
        self.max_stationarity.max(self.balance_residual)
    }
}

/// Aggregate best response sum_i argmin_{w in box} { F_i(w) + x w } for
/// one component at multiplier `x`.
fn aggregate_response(costs: &[CostModel], x: f64) -> Result<f64> {
    let price = Array1::from_elem(1, -x);
    let mut total = 0.0;
    for c in costs {
        total += objective::local_argmin(c, price.view())?[0];
    }
    Ok(total)
}

/// Solve the coupled problem by bisection on the multiplier, componentwise.
pub fn solve_centralized(costs: &[CostModel]) -> Result<OracleSolution> {
    const GAP_TOL: f64 = 1e-10;
    const WIDTH_TOL: f64 = 1e-13;

    let n = costs.len();
    if n == 0 {
        return Err(Error::InvalidScenario("no agents".into()));
    }
    let m = costs[0].resource_dim();

    let total_lo: f64 = costs.iter().map(|c| c.box_lo).sum();
    let total_hi: f64 = costs.iter().map(|c| c.box_hi).sum();
    let mut x_star = Array1::zeros(m);
    let mut w_star = Array2::zeros((n, m));

    for comp in 0..m {
        let total_demand: f64 = costs.iter().map(|c| c.demand[comp]).sum();
        if total_hi < total_demand || total_lo > total_demand {
            return Err(Error::Infeasible(format!(
                "total demand {total_demand} outside the aggregate box [{total_lo}, {total_hi}]"
            )));
        }

        // Initial bracket covering every clip regime of quadratic costs;
        // expanded by doubling to absorb exponential terms.
        let mut x_lo = costs
            .iter()
            .map(|c| -(c.b + 2.0 * c.a * c.box_hi))
            .fold(f64::INFINITY, f64::min)
            - 1.0;
        let mut x_hi = costs.iter().map(|c| -c.b).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let mut g_lo = aggregate_response(costs, x_lo)? - total_demand;
        let mut g_hi = aggregate_response(costs, x_hi)? - total_demand;
        let mut expansions = 0;
        while g_lo < 0.0 || g_hi > 0.0 {
            let width = (x_hi - x_lo).max(1.0);
            if g_lo < 0.0 {
                x_lo -= width;
                g_lo = aggregate_response(costs, x_lo)? - total_demand;
            }
            if g_hi > 0.0 {
                x_hi += width;
                g_hi = aggregate_response(costs, x_hi)? - total_demand;
            }
            expansions += 1;
            if expansions > 200 {
                return Err(Error::Infeasible(
                    "could not bracket the balance multiplier".into(),
                ));
            }
        }

        let mut x_mid;
        loop {
            assert!(
                g_lo >= g_hi - 1e-9 * (1.0 + g_lo.abs().max(g_hi.abs())),
                "aggregate response must be non-increasing in the multiplier"
            );
            x_mid = 0.5 * (x_lo + x_hi);
            let g_mid = aggregate_response(costs, x_mid)? - total_demand;
            if g_mid.abs() < GAP_TOL || x_hi - x_lo < WIDTH_TOL {
                break;
            }
            if g_mid >= 0.0 {
                x_lo = x_mid;
                g_lo = g_mid;
            } else {
                x_hi = x_mid;
                g_hi = g_mid;
            }
        }
        x_star[comp] = x_mid;
        let price = Array1::from_elem(1, -x_mid);
        for (i, c) in costs.iter().enumerate() {
            w_star[[i, comp]] = objective::local_argmin(c, price.view())?[0];
        }
    }

    let f_star = -costs
        .iter()
        .enumerate()
        .map(|(i, c)| objective::eval_cost(c, w_star.row(i)))
        .sum::<f64>();

    let mut solution = OracleSolution {
        w_star,
        x_star,
        f_star,
        kkt_residual: 0.0,
    };
    solution.kkt_residual = kkt_check(costs, &solution).residual();
    Ok(solution)
}

/// Verify the KKT conditions at a candidate solution: stationarity
/// F_i'(w_i) + x = 0 for interior components, sign-relaxed at the bounds,
/// plus the balance residual.
pub fn kkt_check(costs: &[CostModel], solution: &OracleSolution) -> KktReport {
    let m = solution.x_star.len();
    let mut max_stationarity: f64 = 0.0;
    let mut at_lower = Vec::new();
    let mut at_upper = Vec::new();
    for (i, c) in costs.iter().enumerate() {
        let bound_tol = 1e-7 * (1.0 + (c.box_hi - c.box_lo).abs());
        // A collapsed box pins the variable outright; no stationarity
        // condition applies there.
        let pinned = c.box_hi - c.box_lo <= 2.0 * bound_tol;
        for comp in 0..m {
            let w = solution.w_star[[i, comp]];
            let slack = c.gradient_scalar(w) + solution.x_star[comp];
            let violation = if pinned {
                0.0
            } else if w <= c.box_lo + bound_tol {
                at_lower.push((i, comp));
                (-slack).max(0.0)
            } else if w >= c.box_hi - bound_tol {
                at_upper.push((i, comp));
                slack.max(0.0)
            } else {
                slack.abs()
            };
            max_stationarity = max_stationarity.max(violation);
        }
    }
    let mut balance_sq = 0.0;
    for comp in 0..m {
        let supply: f64 = (0..costs.len()).map(|i| solution.w_star[[i, comp]]).sum();
        let demand: f64 = costs.iter().map(|c| c.demand[comp]).sum();
        balance_sq += (supply - demand) * (supply - demand);
    }
    KktReport {
        max_stationarity,
        balance_residual: balance_sq.sqrt(),
        at_lower,
        at_upper,
    }
}
