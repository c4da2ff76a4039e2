//! Explicit step-size upper bounds for the event-triggered push-pull
//! recursion, and the spectral-radius certificate for the linear-rate
//! regime.
//!
//! These bounds are advisory: the engine accepts any positive step size,
//! and experiment step sizes are typically chosen empirically. The value
//! of this module is that every constant is computed and reported by name
//! so a run can be audited against the sufficient conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::NetworkModel;
use crate::objective::{self, CostModel, SmoothnessParams};
use crate::oracle;
use crate::scenario::Scenario;
use crate::trigger::TriggerSchedule;
use ndarray::Axis;

/// Scalar inputs of every bound, plus the contraction diagnostics of the
/// two-variable error system evaluated at a candidate step size.
#[derive(Debug, Clone, Serialize)]
pub struct BoundInputs {
    pub n: usize,
    /// Dual gradient Lipschitz constant.
    pub l: f64,
    pub sigma_r: f64,
    pub sigma_c: f64,
    pub delta_rc: f64,
    pub delta_cr: f64,
    pub delta_2r: f64,
    pub delta_2c: f64,
    /// pi_C' pi_R.
    pub pi_dot: f64,
    /// Gradient-domination constant of the dual objective (n / mu for
    /// mu-smooth primal costs).
    pub beta: f64,
    /// sqrt(sum_i ||grad f_i(X_0)||^2), the initial tracking magnitude.
    pub grad_f_x0_norm: f64,
    /// Lower bound |sigma_R - sigma_C| on the eigengap surrogate of the
    /// error system.
    pub psi_lower: f64,
    /// Whether sigma_C was nudged by +1e-6 to keep psi_lower positive.
    pub sigma_perturbed: bool,
    /// Step size at which `lambda` and `k0` are evaluated: the supremum
    /// admitted by the coarse two-variable bound, shaved by 1e-9.
    pub candidate_alpha: f64,
    /// Spectral radius of the 2x2 error-system matrix at `candidate_alpha`.
    pub lambda: f64,
    /// Warmup index (ln a - ln(1 - lambda)) / ln lambda, floored at 0.
    pub k0: f64,
    /// First threshold e_0 = E.
    pub e0: f64,
    /// Threshold series total E / (1 - s).
    pub s_e: f64,
    pub threshold_e: f64,
    pub threshold_s: f64,
}

impl BoundInputs {
    /// Assemble the inputs from raw scalars, perturbing sigma_C away from
    /// sigma_R if the two coincide, then evaluating the error-system
    /// contraction at the coarse-bound supremum.
    #[allow(clippy::too_many_arguments)]
    pub fn derive(
        n: usize,
        l: f64,
        sigma_r: f64,
        mut sigma_c: f64,
        delta_rc: f64,
        delta_cr: f64,
        delta_2r: f64,
        delta_2c: f64,
        pi_dot: f64,
        beta: f64,
        grad_f_x0_norm: f64,
        schedule: TriggerSchedule,
    ) -> Self {
        let mut sigma_perturbed = false;
        if (sigma_r - sigma_c).abs() < 1e-9 {
            sigma_c += 1e-6;
            sigma_perturbed = true;
        }
        let psi_lower = (sigma_r - sigma_c).abs();
        let mut inputs = BoundInputs {
            n,
            l,
            sigma_r,
            sigma_c,
            delta_rc,
            delta_cr,
            delta_2r,
            delta_2c,
            pi_dot,
            beta,
            grad_f_x0_norm,
            psi_lower,
            sigma_perturbed,
            candidate_alpha: 0.0,
            lambda: 1.0,
            k0: 0.0,
            e0: schedule.initial,
            s_e: schedule.total(),
            threshold_e: schedule.initial,
            threshold_s: schedule.decay,
        };
        let candidate = contraction_bound(&inputs) * (1.0 - 1e-9);
        inputs.candidate_alpha = candidate;
        inputs.lambda = lambda2(&inputs, candidate);
        inputs.k0 = warmup_index(candidate, inputs.lambda);
        inputs
    }

    /// Derive the inputs of a fully specified scenario.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let (net, costs, schedule) = scenario.build()?;
        Ok(Self::from_parts(&net, &costs, schedule))
    }

    pub fn from_parts(net: &NetworkModel, costs: &[CostModel], schedule: TriggerSchedule) -> Self {
        let smooth = SmoothnessParams::from_models(costs);
        let n = net.n();
        let beta = n as f64 / smooth.mu;
        // X_0 = 0: the initial dual gradients are the demands minus the
        // unpriced best responses.
        let m = costs[0].resource_dim();
        let zero = ndarray::Array1::zeros(m);
        let grad_sq: f64 = costs
            .iter()
            .map(|c| {
                objective::dual_gradient(c, zero.view())
                    .map(|g| g.iter().map(|x| x * x).sum::<f64>())
                    .unwrap_or(f64::NAN)
            })
            .sum();
        Self::derive(
            n,
            smooth.l,
            net.sigma_r,
            net.sigma_c,
            net.delta_rc,
            net.delta_cr,
            net.delta_2r,
            net.delta_2c,
            net.pi_dot(),
            beta,
            grad_sq.sqrt(),
            schedule,
        )
    }

    fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    /// c0..c5 from the geometric-series bound on the error system.
    pub fn c_constants(&self) -> [f64; 6] {
        let psi = self.psi_lower;
        let l = self.l;
        let c0 = self.grad_f_x0_norm / psi;
        let c1 = 1.0 + l / psi;
        let c2 = (1.0 + self.sigma_r + (2.0 * l + 1.0 + self.sigma_c) / psi) * self.sqrt_n();
        let c3 = self.grad_f_x0_norm;
        let c4 = l + (2.0 * l * self.delta_cr + l) / psi;
        let c5 = (1.0 + self.sigma_c + 2.0 * l
            + (1.0 - self.sigma_r) * (2.0 * l * self.delta_cr + l) / psi)
            * self.sqrt_n();
        [c0, c1, c2, c3, c4, c5]
    }

    /// b1..b4, the network/smoothness weights of the descent recursion.
    pub fn b_constants(&self) -> [f64; 4] {
        let l = self.l;
        let b1 = l * self.sqrt_n() * self.pi_dot * self.delta_2r;
        let b2 = self.delta_2c;
        let b3 = 3.0 * l * self.delta_2c * self.delta_2c;
        let b4 = 3.0 * l.powi(3) * self.n as f64 * self.pi_dot * self.pi_dot * self.delta_2r
            * self.delta_2r;
        [b1, b2, b3, b4]
    }

    /// d1..d13, the squared-error system weights of the linear-rate regime.
    pub fn d_constants(&self) -> [f64; 13] {
        let n = self.n as f64;
        let l = self.l;
        let sr2 = self.sigma_r * self.sigma_r;
        let sc2 = self.sigma_c * self.sigma_c;
        let rc = (1.0 + sc2) / (1.0 - sc2);
        let d1 = 4.0 * n * l * l;
        let d2 = 2.0 * (3.0 - sr2) / (1.0 - sr2) * self.delta_rc * self.delta_rc;
        let d3 = 8.0 * n * l;
        let d4 = 32.0 * rc * l * l * self.delta_cr * self.delta_cr;
        let d5 = 16.0 * rc * n * l.powi(4) * self.delta_cr * self.delta_cr;
        let d6 = 8.0 * rc * l * l;
        let d7 = 32.0 * rc * n * l.powi(3);
        let d8 = 0.5 * l * l * n * self.pi_dot * self.pi_dot * self.delta_2r * self.delta_2r;
        let d9 = 1.5 * l.powi(3) * n * self.pi_dot * self.pi_dot * self.delta_2r * self.delta_2r;
        let d10 = 0.5 * self.delta_2c * self.delta_2c;
        let d11 = 1.5 * l * self.delta_2c * self.delta_2c;
        let d12 = 2.0 * self.beta * self.pi_dot;
        let d13 = 2.0 * l + 3.0 * self.pi_dot * self.pi_dot * l * l;
        [d1, d2, d3, d4, d5, d6, d7, d8, d9, d10, d11, d12, d13]
    }

    /// h1..h7 of the determinant-positivity condition. h8 depends on the
    /// certificate eigenvector and is filled in by `linear_bound`.
    pub fn h_constants(&self) -> [f64; 7] {
        let d = self.d_constants();
        let (d2, d3, d4, d5, d7) = (d[1], d[2], d[3], d[4], d[6]);
        let (d8, d9, d10, d11, d12, d13) = (d[7], d[8], d[9], d[10], d[11], d[12]);
        let sr2 = self.sigma_r * self.sigma_r;
        let sc2 = self.sigma_c * self.sigma_c;
        let front = (1.0 - sr2).powi(2) * (1.0 - sc2) / (16.0 * (1.0 + sr2));
        let ring = (1.0 - sr2).powi(2) / (1.0 + sr2);
        let h1 = front * d12;
        let h2 = front * d13 + d3 * d4 * d10 + (1.0 - sc2) / 2.0 * d3 * d8 + ring * d7 * d10;
        let h3 = d2 * d4 * d12;
        let h4 = d2 * d7 * d8
            + d3 * d5 * d10
            + d3 * d4 * d11
            + (1.0 - sc2) / 2.0 * d3 * d9
            + ring * d7 * d11
            + d2 * d5 * d12;
        let h5 = d2 * d5 * d13;
        let h6 = d2 * d7 * d9 + d3 * d5 * d11;
        let h7 = ((3.0 + sr2) / (1.0 + sr2) * (1.0 + self.sigma_r).powi(2)
            + 2.0 * (1.0 + sc2) / (1.0 - sc2)
                * ((1.0 + self.sigma_c).powi(2)
                    + 4.0 * (1.0 + self.sigma_r).powi(2) * self.delta_cr * self.delta_cr
                        * self.l
                        * self.l))
            * self.n as f64;
        [h1, h2, h3, h4, h5, h6, h7]
    }
}

/// 2x2 error-system matrix at step size `alpha`.
pub fn p2_matrix(inputs: &BoundInputs, alpha: f64) -> [[f64; 2]; 2] {
    let root_n_l = inputs.sqrt_n() * inputs.l;
    [
        [inputs.sigma_r + alpha * root_n_l, alpha * inputs.delta_rc],
        [
            (2.0 + alpha * root_n_l) * inputs.l * inputs.delta_cr,
            inputs.sigma_c + alpha * inputs.l,
        ],
    ]
}

/// Spectral radius of the 2x2 error-system matrix (entries non-negative,
/// so the dominant eigenvalue is real).
pub fn lambda2(inputs: &BoundInputs, alpha: f64) -> f64 {
    let p = p2_matrix(inputs, alpha);
    let tr = p[0][0] + p[1][1];
    let disc = (p[0][0] - p[1][1]).powi(2) + 4.0 * p[0][1] * p[1][0];
    0.5 * (tr + disc.sqrt())
}

fn warmup_index(alpha: f64, lambda: f64) -> f64 {
    if !(lambda > 0.0 && lambda < 1.0) {
        return 0.0;
    }
    ((alpha.ln() - (1.0 - lambda).ln()) / lambda.ln()).max(0.0)
}

/// Coarse two-variable contraction bound:
/// min{ (1-sR)(1-sC) / ((sqrt(n) L + sqrt(n) + 3) L dRC dCR), 1/dRC }.
pub fn contraction_bound(inputs: &BoundInputs) -> f64 {
    let t1 = (1.0 - inputs.sigma_r) * (1.0 - inputs.sigma_c)
        / ((inputs.sqrt_n() * inputs.l + inputs.sqrt_n() + 3.0)
            * inputs.l
            * inputs.delta_rc
            * inputs.delta_cr);
    t1.min(1.0 / inputs.delta_rc)
}

#[derive(Debug, Clone, Serialize)]
pub struct SublinearBound {
    pub alpha_max: f64,
    /// Descent margin at `alpha_max`; positive by construction.
    pub gamma: f64,
    pub k0: f64,
    pub c: [f64; 6],
    pub b: [f64; 4],
    pub lambda: f64,
}

/// Sublinear-regime bound: alpha < pi_dot / B with B collecting the
/// geometric-series constants, intersected with the coarse bound.
pub fn sublinear_bound(inputs: &BoundInputs) -> Result<SublinearBound> {
    if inputs.lambda >= 1.0 {
        return Err(Error::LambdaNotContractive {
            lambda: inputs.lambda,
        });
    }
    let c = inputs.c_constants();
    let b = inputs.b_constants();
    let bracket = descent_bracket(inputs, &c, &b);
    let alpha_max = (inputs.pi_dot / bracket).min(contraction_bound(inputs)) * (1.0 - 1e-9);
    let gamma = alpha_max * inputs.pi_dot - alpha_max * alpha_max * bracket;
    Ok(SublinearBound {
        alpha_max,
        gamma,
        k0: warmup_index(alpha_max, inputs.lambda),
        c,
        b,
        lambda: inputs.lambda,
    })
}

fn descent_bracket(inputs: &BoundInputs, c: &[f64; 6], b: &[f64; 4]) -> f64 {
    let one_minus = 1.0 - inputs.lambda;
    3.0 * inputs.l * inputs.pi_dot * inputs.pi_dot / 2.0
        + (c[1] * b[0] + c[4] * b[1] + c[0] * b[0] + c[3] * b[1]) / one_minus
        + (c[1] * c[1] * b[2] + c[4] * c[4] * b[3]) / (one_minus * one_minus)
        + (c[2] * b[0] + c[5] * b[1]) / 2.0
}

/// 3x3 squared-error system matrix at step size `alpha`.
pub fn p3_matrix(inputs: &BoundInputs, alpha: f64) -> [[f64; 3]; 3] {
    let d = inputs.d_constants();
    let sr2 = inputs.sigma_r * inputs.sigma_r;
    let sc2 = inputs.sigma_c * inputs.sigma_c;
    let a2 = alpha * alpha;
    [
        [
            (3.0 * sr2 - sr2 * sr2) / (1.0 + sr2) + d[0] * a2,
            d[1] * a2,
            d[2] * a2,
        ],
        [d[3] + d[4] * a2, (1.0 + sc2) / 2.0 + d[5] * a2, d[6] * a2],
        [
            d[7] + d[8] * a2,
            d[9] + d[10] * a2,
            1.0 - d[11] * alpha + d[12] * a2,
        ],
    ]
}

/// Gap form of I - P at step size `alpha`: the diagonal gaps
/// q_i = 1 - p_ii evaluated without cancellation, plus the off-diagonal
/// entries of P. The bound's alpha can be so small that 1 - d12*alpha
/// rounds to 1 in f64; working in gaps keeps the certificate resolvable.
#[derive(Debug, Clone, Copy)]
struct GapSystem {
    /// q_i = 1 - p_ii, cancellation-free.
    q: [f64; 3],
    /// Off-diagonal entries of P, indexed [row][col].
    p12: f64,
    p13: f64,
    p21: f64,
    p23: f64,
    p31: f64,
    p32: f64,
}

impl GapSystem {
    fn at(inputs: &BoundInputs, alpha: f64) -> Self {
        let d = inputs.d_constants();
        let sr2 = inputs.sigma_r * inputs.sigma_r;
        let sc2 = inputs.sigma_c * inputs.sigma_c;
        let a2 = alpha * alpha;
        // 1 - (3 sr2 - sr2^2)/(1 + sr2) = (1 - sr2)^2 / (1 + sr2).
        GapSystem {
            q: [
                (1.0 - sr2).powi(2) / (1.0 + sr2) - d[0] * a2,
                (1.0 - sc2) / 2.0 - d[5] * a2,
                alpha * (d[11] - d[12] * alpha),
            ],
            p12: d[1] * a2,
            p13: d[2] * a2,
            p21: d[3] + d[4] * a2,
            p23: d[6] * a2,
            p31: d[7] + d[8] * a2,
            p32: d[9] + d[10] * a2,
        }
    }

    /// det(I - P) expanded in the stable gap terms.
    fn det_i_minus_p(&self) -> f64 {
        let [q1, q2, q3] = self.q;
        q1 * q2 * q3
            - self.p12 * self.p23 * self.p31
            - self.p13 * self.p21 * self.p32
            - self.p13 * q2 * self.p31
            - q1 * self.p23 * self.p32
            - self.p12 * self.p21 * q3
    }

    /// Sum of the 2x2 principal minors of I - P.
    fn minor_sum(&self) -> f64 {
        let [q1, q2, q3] = self.q;
        (q1 * q2 - self.p12 * self.p21)
            + (q1 * q3 - self.p13 * self.p31)
            + (q2 * q3 - self.p23 * self.p32)
    }

    /// Characteristic polynomial of I - P in the gap variable:
    /// f(mu) = det((I - P) - mu I). Its smallest positive root is
    /// 1 - rho(P) when rho(P) < 1.
    fn char_at(&self, mu: f64) -> f64 {
        -mu * mu * mu + (self.q[0] + self.q[1] + self.q[2]) * mu * mu - self.minor_sum() * mu
            + self.det_i_minus_p()
    }

    /// Spectral gap 1 - rho(P) by safeguarded Newton on the gap
    /// characteristic polynomial, bracketing from zero.
    fn spectral_gap(&self) -> Result<f64> {
        let det = self.det_i_minus_p();
        let m2 = self.minor_sum();
        if det <= 0.0 || m2 <= 0.0 {
            return Err(Error::CertificateFailure(format!(
                "gap polynomial not positive at zero: det(I - P) = {det}, minor sum = {m2}"
            )));
        }
        // First-order gap estimate, then double until the sign flips.
        let mut hi = det / m2;
        let mut doublings = 0;
        while self.char_at(hi) > 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 400 {
                return Err(Error::CertificateFailure(
                    "could not bracket the spectral gap".into(),
                ));
            }
        }
        let mut lo = 0.0;
        let mut mu = hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.char_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            mu = 0.5 * (lo + hi);
            if hi - lo <= f64::EPSILON * mu {
                break;
            }
        }
        Ok(mu)
    }

    /// Perron eigenvector at eigenvalue 1 - mu, by fixed-point iteration
    /// on the first two components with the third pinned at 1. The
    /// denominators rho - p11 = q1 - mu and rho - p22 = q2 - mu are
    /// positive because the spectral radius of a non-negative matrix
    /// dominates its diagonal.
    fn perron_vector(&self, mu: f64) -> Result<[f64; 3]> {
        let d1 = self.q[0] - mu;
        let d2 = self.q[1] - mu;
        if d1 <= 0.0 || d2 <= 0.0 {
            return Err(Error::CertificateFailure(format!(
                "eigenvector solve degenerate: diagonal gaps {d1}, {d2} at mu = {mu}"
            )));
        }
        let mut v1 = 0.0_f64;
        let mut v2 = 0.0_f64;
        for _ in 0..10_000 {
            let n1 = (self.p12 * v2 + self.p13) / d1;
            let n2 = (self.p21 * n1 + self.p23) / d2;
            let delta = (n1 - v1).abs().max((n2 - v2).abs());
            v1 = n1;
            v2 = n2;
            if delta <= 1e-15 * (1.0 + v1.abs().max(v2.abs())) {
                return Ok([v1, v2, 1.0]);
            }
        }
        Err(Error::CertificateFailure(
            "eigenvector fixed point did not converge".into(),
        ))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearBound {
    pub alpha_max: f64,
    /// The five candidate terms whose minimum gives `alpha_max`.
    pub terms: [f64; 5],
    pub d: [f64; 13],
    pub h: [f64; 8],
    /// Squared-error system matrix at `alpha_max`.
    pub p: [[f64; 3]; 3],
    /// Its spectral radius, 1 - `spectral_gap` (may print as 1.0 when the
    /// gap is below f64 resolution; the gap field is authoritative).
    pub lambda: f64,
    /// 1 - rho(P), resolved in gap arithmetic.
    pub spectral_gap: f64,
    /// det(I - P) in stable form; positive together with sub-unit
    /// diagonals certifies lambda < 1.
    pub det_i_minus_p: f64,
    pub diagonal_ok: bool,
    /// Perron eigenvector of P.
    pub nu: [f64; 3],
    /// Smallest admissible threshold decay, sqrt(lambda).
    pub s_lower: f64,
}

/// Linear-regime bound: the five-term minimum, certified afterwards by
/// the determinant sign test and an independent eigensolve (Newton on the
/// characteristic polynomial in gap form) of the squared-error system.
pub fn linear_bound(inputs: &BoundInputs) -> Result<LinearBound> {
    if !(inputs.beta > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "gradient-domination constant beta = {} must be positive",
            inputs.beta
        )));
    }
    let d = inputs.d_constants();
    let h7v = inputs.h_constants();
    let sr2 = inputs.sigma_r * inputs.sigma_r;
    let sc2 = inputs.sigma_c * inputs.sigma_c;
    let h_sum = h7v[2] + h7v[3] + h7v[4] + h7v[5];
    let terms = [
        1.0 / d[11],
        (1.0 - sr2) / (4.0 * inputs.sqrt_n() * inputs.l * (1.0 + sr2).sqrt()),
        (1.0 - sc2) / (4.0 * 2.0_f64.sqrt() * inputs.l * (1.0 + sc2).sqrt()),
        2.0 * inputs.beta * inputs.pi_dot
            / (2.0 * inputs.l + 3.0 * inputs.l * inputs.l * inputs.pi_dot * inputs.pi_dot),
        // Rationalized quadratic-root form; the textbook (-h2 + sqrt)/2H
        // cancels catastrophically when 4 h1 H << h2^2.
        2.0 * h7v[0] / (h7v[1] + (h7v[1] * h7v[1] + 4.0 * h7v[0] * h_sum).sqrt()),
    ];
    let alpha_max = terms.iter().cloned().fold(f64::INFINITY, f64::min) * (1.0 - 1e-9);

    let gaps = GapSystem::at(inputs, alpha_max);
    let diagonal_ok = gaps.q.iter().all(|&q| q > 0.0);
    let det = gaps.det_i_minus_p();
    if !diagonal_ok || det <= 0.0 {
        return Err(Error::CertificateFailure(format!(
            "determinant test failed at alpha = {alpha_max}: det(I - P) = {det}, diagonals ok: {diagonal_ok}"
        )));
    }
    let gap = gaps.spectral_gap()?;
    if gap <= 0.0 {
        return Err(Error::CertificateFailure(format!(
            "determinant test and eigensolve disagree: det(I - P) = {det} but spectral gap = {gap}"
        )));
    }
    let nu = gaps.perron_vector(gap)?;
    let nu_max = nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let nu_min = nu.iter().cloned().fold(f64::INFINITY, f64::min);
    if nu_min <= 0.0 {
        return Err(Error::CertificateFailure(format!(
            "Perron eigenvector not positive: {nu:?}"
        )));
    }
    let h8 = 3.0_f64.sqrt() * nu_max / nu_min;
    let lambda = 1.0 - gap;
    Ok(LinearBound {
        alpha_max,
        terms,
        d,
        h: [h7v[0], h7v[1], h7v[2], h7v[3], h7v[4], h7v[5], h7v[6], h8],
        p: p3_matrix(inputs, alpha_max),
        lambda,
        spectral_gap: gap,
        det_i_minus_p: det,
        diagonal_ok,
        nu,
        s_lower: lambda.sqrt(),
    })
}

/// Threshold admissibility for the linear regime: the decay must exceed
/// sqrt(lambda) (strictly, staying below 1) and the magnitude must cover
/// the initial error, E >= ||z0|| (s^2 - lambda) / h7.
pub fn trigger_admissible(
    schedule: TriggerSchedule,
    lambda: f64,
    h7: f64,
    z0_norm: f64,
) -> bool {
    let s = schedule.decay;
    s > lambda.sqrt() && s < 1.0 && schedule.initial >= z0_norm * (s * s - lambda) / h7
}

/// Every bound constant by name, for the CLI `bounds` report.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub scenario: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub mu: f64,
    pub beta: f64,
    #[serde(rename = "sigma_R")]
    pub sigma_r: f64,
    #[serde(rename = "sigma_C")]
    pub sigma_c: f64,
    pub sigma_perturbed: bool,
    #[serde(rename = "delta_RC")]
    pub delta_rc: f64,
    #[serde(rename = "delta_CR")]
    pub delta_cr: f64,
    #[serde(rename = "delta_2R")]
    pub delta_2r: f64,
    #[serde(rename = "delta_2C")]
    pub delta_2c: f64,
    #[serde(rename = "pi_CT_pi_R")]
    pub pi_dot: f64,
    #[serde(rename = "Psi_lower")]
    pub psi_lower: f64,
    #[serde(rename = "grad_f_X0_norm")]
    pub grad_f_x0_norm: f64,
    pub candidate_alpha: f64,
    #[serde(rename = "lambda_P2")]
    pub lambda_p2: f64,
    pub k0: f64,
    pub c: [f64; 6],
    pub b: [f64; 4],
    pub d: [f64; 13],
    pub h: [f64; 8],
    pub alpha_contraction: f64,
    pub alpha_sublinear: f64,
    pub gamma: f64,
    pub alpha_linear: f64,
    pub linear_bound_terms: [f64; 5],
    #[serde(rename = "lambda_P3")]
    pub lambda_p3: f64,
    /// 1 - lambda_P3 at full resolution.
    #[serde(rename = "spectral_gap_P3")]
    pub spectral_gap_p3: f64,
    #[serde(rename = "det_I_minus_P")]
    pub det_i_minus_p: f64,
    pub nu: [f64; 3],
    pub s_lower: f64,
    #[serde(rename = "E_lower")]
    pub e_lower: f64,
    pub z0_norm: f64,
    pub trigger_admissible: bool,
    #[serde(rename = "E")]
    pub threshold_e: f64,
    #[serde(rename = "s")]
    pub threshold_s: f64,
    pub scenario_alpha: f64,
    pub scenario_alpha_within_lemma5: bool,
}

impl BoundReport {
    pub fn compute(scenario: &Scenario) -> Result<Self> {
        let (net, costs, schedule) = scenario.build()?;
        let smooth = SmoothnessParams::from_models(&costs);
        let inputs = BoundInputs::from_parts(&net, &costs, schedule);
        let t1 = sublinear_bound(&inputs)?;
        let t2 = linear_bound(&inputs)?;

        // z0 = [consensus_0^2, tracking_0^2, f(xbar_0) - f*]; the initial
        // prices are zero, so the consensus component vanishes.
        let sol = oracle::solve_centralized(&costs)?;
        let demands = crate::engine::demand_matrix(&costs);
        let y_hat = demands.sum_axis(Axis(0));
        let mut tracking_sq = 0.0;
        for i in 0..net.n() {
            for c in 0..demands.ncols() {
                let dv = demands[[i, c]] - net.pi_c[i] * y_hat[c];
                tracking_sq += dv * dv;
            }
        }
        let zero = ndarray::Array1::zeros(demands.ncols());
        let mut f0 = 0.0;
        for c in &costs {
            f0 += objective::dual_value(c, zero.view())?;
        }
        let gap0 = f0 - sol.f_star;
        let z0_norm = (tracking_sq * tracking_sq + gap0 * gap0).sqrt();
        // s^2 - lambda, evaluated through the spectral gap to survive
        // lambda values within f64 rounding of 1.
        let s2_minus_lambda = t2.spectral_gap - (1.0 - schedule.decay * schedule.decay);
        let e_lower = z0_norm * s2_minus_lambda / t2.h[6];

        Ok(BoundReport {
            scenario: scenario.name.clone(),
            n: inputs.n,
            l: inputs.l,
            mu: smooth.mu,
            beta: inputs.beta,
            sigma_r: inputs.sigma_r,
            sigma_c: inputs.sigma_c,
            sigma_perturbed: inputs.sigma_perturbed,
            delta_rc: inputs.delta_rc,
            delta_cr: inputs.delta_cr,
            delta_2r: inputs.delta_2r,
            delta_2c: inputs.delta_2c,
            pi_dot: inputs.pi_dot,
            psi_lower: inputs.psi_lower,
            grad_f_x0_norm: inputs.grad_f_x0_norm,
            candidate_alpha: inputs.candidate_alpha,
            lambda_p2: inputs.lambda,
            k0: inputs.k0,
            c: t1.c,
            b: t1.b,
            d: t2.d,
            h: t2.h,
            alpha_contraction: contraction_bound(&inputs),
            alpha_sublinear: t1.alpha_max,
            gamma: t1.gamma,
            alpha_linear: t2.alpha_max,
            linear_bound_terms: t2.terms,
            lambda_p3: t2.lambda,
            spectral_gap_p3: t2.spectral_gap,
            det_i_minus_p: t2.det_i_minus_p,
            nu: t2.nu,
            s_lower: t2.s_lower,
            e_lower,
            z0_norm,
            trigger_admissible: trigger_admissible(schedule, t2.lambda, t2.h[6], z0_norm),
            threshold_e: schedule.initial,
            threshold_s: schedule.decay,
            scenario_alpha: scenario.alpha,
            scenario_alpha_within_lemma5: scenario.alpha < contraction_bound(&inputs),
        })
    }
}
