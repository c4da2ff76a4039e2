//! Per-agent cost functions, the local argmin subproblem (conjugate
//! evaluation), and dual gradients.
//!
//! Costs are separable across the m resource components: the scalar
//! coefficients apply componentwise and the box bounds clip each component.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Quadratic,
    QuadraticExp,
}

/// One agent's cost a*w^2 + b*w (+ d*exp((w+e)/f)), box constraint, and
/// local demand. Load buses are modeled with the box [0, 0] so their
/// allocation is pinned at zero and only the demand enters the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub kind: CostKind,
    pub a: f64,
    pub b: f64,
    pub exp_d: f64,
    pub exp_e: f64,
    pub exp_f: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    pub demand: Array1<f64>,
}

impl CostModel {
    pub fn quadratic(a: f64, b: f64, box_lo: f64, box_hi: f64, demand: f64) -> Result<Self> {
        Self::new(CostKind::Quadratic, a, b, 0.0, 0.0, 1.0, box_lo, box_hi, demand)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn quadratic_exp(
        a: f64,
        b: f64,
        exp_d: f64,
        exp_e: f64,
        exp_f: f64,
        box_lo: f64,
        box_hi: f64,
        demand: f64,
    ) -> Result<Self> {
        Self::new(
            CostKind::QuadraticExp,
            a,
            b,
            exp_d,
            exp_e,
            exp_f,
            box_lo,
            box_hi,
            demand,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: CostKind,
        a: f64,
        b: f64,
        exp_d: f64,
        exp_e: f64,
        exp_f: f64,
        box_lo: f64,
        box_hi: f64,
        demand: f64,
    ) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "strong-convexity requirement: cost curvature a = {a} must be positive"
            )));
        }
        if box_lo > box_hi {
            return Err(Error::InvalidScenario(format!(
                "box bounds reversed: lo = {box_lo} > hi = {box_hi}"
            )));
        }
        if kind == CostKind::QuadraticExp && !(exp_f > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "exponential denominator f = {exp_f} must be positive"
            )));
        }
        Ok(CostModel {
            kind,
            a,
            b,
            exp_d,
            exp_e,
            exp_f,
            box_lo,
            box_hi,
            demand: Array1::from_elem(1, demand),
        })
    }

    pub fn resource_dim(&self) -> usize {
        self.demand.len()
    }

    fn exp_term(&self, w: f64) -> f64 {
        match self.kind {
            CostKind::Quadratic => 0.0,
            CostKind::QuadraticExp => self.exp_d * ((w + self.exp_e) / self.exp_f).exp(),
        }
    }

    fn cost_scalar(&self, w: f64) -> f64 {
        self.a * w * w + self.b * w + self.exp_term(w)
    }

    /// dF/dw at one component.
    pub fn gradient_scalar(&self, w: f64) -> f64 {
        2.0 * self.a * w + self.b + self.exp_term(w) / self.exp_f
    }

    /// Minimizer of F(w) - w_tilde*w over [lo, hi] for one component.
    fn argmin_scalar(&self, w_tilde: f64) -> Result<f64> {
        match self.kind {
            CostKind::Quadratic => {
                Ok(((w_tilde - self.b) / (2.0 * self.a)).clamp(self.box_lo, self.box_hi))
            }
            CostKind::QuadraticExp => {
                // F'(w) - w_tilde is strictly increasing; safeguarded
                // Newton inside the bracket [lo - 1, hi + 1], then clip.
                const TOL: f64 = 1e-12;
                let g = |w: f64| self.gradient_scalar(w) - w_tilde;
                let mut lo = self.box_lo - 1.0;
                let mut hi = self.box_hi + 1.0;
                let g_lo = g(lo);
                let g_hi = g(hi);
                if g_lo >= 0.0 {
                    return Ok(self.box_lo);
                }
                if g_hi <= 0.0 {
                    return Ok(self.box_hi);
                }
                if !(g_lo < 0.0 && g_hi > 0.0) {
                    return Err(Error::RootFindFailure(format!(
                        "derivative not bracketed on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}"
                    )));
                }
                let mut w = 0.5 * (lo + hi);
                for _ in 0..200 {
                    let gw = g(w);
                    if gw.abs() < TOL || hi - lo < TOL {
                        break;
                    }
                    if gw > 0.0 {
                        hi = w;
                    } else {
                        lo = w;
                    }
                    let curvature = 2.0 * self.a + self.exp_term(w) / (self.exp_f * self.exp_f);
                    let newton = w - gw / curvature;
                    w = if newton > lo && newton < hi {
                        newton
                    } else {
                        0.5 * (lo + hi)
                    };
                }
                Ok(w.clamp(self.box_lo, self.box_hi))
            }
        }
    }
}

/// F_i(w), evaluated componentwise and summed. Evaluation outside the box
/// is permitted.
pub fn eval_cost(model: &CostModel, w: ArrayView1<f64>) -> f64 {
    w.iter().map(|&wc| model.cost_scalar(wc)).sum()
}

/// Componentwise gradient of F_i at `w`.
pub fn cost_gradient(model: &CostModel, w: ArrayView1<f64>) -> Array1<f64> {
    w.mapv(|wc| model.gradient_scalar(wc))
}

/// argmin over the box of F_i(w) - w_tilde' w, the conjugate-gradient
/// subproblem of the primal recovery step.
pub fn local_argmin(model: &CostModel, w_tilde: ArrayView1<f64>) -> Result<Array1<f64>> {
    let mut out = Array1::zeros(w_tilde.len());
    for (o, &wt) in out.iter_mut().zip(w_tilde.iter()) {
        *o = model.argmin_scalar(wt)?;
    }
    Ok(out)
}

/// Dual gradient of agent i's objective:
/// -argmin_{w in box} { x' w + F_i(w) } + d_i.
pub fn dual_gradient(model: &CostModel, x: ArrayView1<f64>) -> Result<Array1<f64>> {
    let minimizer = local_argmin(model, (-&x.to_owned()).view())?;
    Ok(&model.demand - &minimizer)
}

/// Agent i's dual objective value f_i(x) = F_i^*(-x) + x' d_i.
pub fn dual_value(model: &CostModel, x: ArrayView1<f64>) -> Result<f64> {
    let minimizer = local_argmin(model, (-&x.to_owned()).view())?;
    let fw = eval_cost(model, minimizer.view());
    Ok(-fw - x.dot(&minimizer) + x.dot(&model.demand))
}

/// Dual and primal smoothness summaries of a cost collection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessParams {
    /// Dual gradient Lipschitz constant: max_i 1/(2 a_i), the inverse of
    /// the weakest strong-convexity modulus.
    pub l: f64,
    /// Primal gradient Lipschitz constant over the boxes.
    pub mu: f64,
}

impl SmoothnessParams {
    pub fn from_models(models: &[CostModel]) -> Self {
        let mut l: f64 = 0.0;
        let mut mu: f64 = 0.0;
        for m in models {
            l = l.max(1.0 / (2.0 * m.a));
            let curv_hi = 2.0 * m.a
                + match m.kind {
                    CostKind::Quadratic => 0.0,
                    CostKind::QuadraticExp => m.exp_term(m.box_hi) / (m.exp_f * m.exp_f),
                };
            mu = mu.max(curv_hi);
        }
        SmoothnessParams { l, mu }
    }
}
