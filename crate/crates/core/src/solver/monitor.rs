//! Stationarity residuals and the sufficient-descent / complexity checks.

use serde::Serialize;

use super::params::{ParamMode, SolverParams};
use super::trace::IterationRecord;
use crate::error::{Error, Result};
use crate::model::{grad_f_x, grad_f_y, ModelProblem, PrimalDualPoint};
use crate::prox::{project_components, project_simplex, project_z, CLAMP_TOL};

/// Projection-residual surrogates of the five stationarity conditions:
///
/// ```text
/// r1 = ‖y − Π_Y(y − ∇_y f)‖
/// r2 = ‖x − Π_X(x − ∇_x f − Aᵀλ)‖
/// r3 = ‖p − Π_Z(p − ξ(p − z))‖
/// r4 = ‖ξ(z − p) − λ‖
/// r5 = ‖Ax − z‖
/// ```
pub fn stationarity_residuals(point: &PrimalDualPoint, problem: &ModelProblem) -> Result<[f64; 5]> {
    point.check_shape(problem)?;
    let mut out = cheap_residuals(point, problem)?;
    let (r2, r3) = projection_residuals(point, problem)?;
    out[1] = r2;
    out[2] = r3;
    Ok(out)
}

/// `r1`, `r4`, `r5` (no eigendecompositions); `r2` and `r3` are left at 0.
pub(crate) fn cheap_residuals(point: &PrimalDualPoint, problem: &ModelProblem) -> Result<[f64; 5]> {
    let rho = problem.rho().matrix();
    let op = problem.operator();
    let gy = grad_f_y(&point.x, &point.y, rho)?;
    let r1 = (&point.y - project_simplex(&(&point.y - gy))).norm();
    let r4 = point
        .z
        .combine(problem.xi(), &point.p, -problem.xi())
        .combine(1.0, &point.lambda, -1.0)
        .norm();
    let r5 = op.residual(&point.x, &point.z)?.norm();
    Ok([r1, 0.0, 0.0, r4, r5])
}

pub(crate) fn projection_residuals(point: &PrimalDualPoint, problem: &ModelProblem) -> Result<(f64, f64)> {
    let rho = problem.rho().matrix();
    let op = problem.operator();
    let mut v = point.x.clone();
    v.axpy(-1.0, &grad_f_x(&point.x, &point.y, rho)?);
    v.axpy(-1.0, &op.adjoint(&point.lambda)?);
    let r2 = project_components(v, CLAMP_TOL)?.dist_sq(&point.x).sqrt();
    let w = point.p.combine(1.0 - problem.xi(), &point.z, problem.xi());
    let r3 = project_z(w, CLAMP_TOL)?.dist_sq(&point.p).sqrt();
    Ok((r2, r3))
}

/// Outcome of [`descent_certificate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentReport {
    pub nu: f64,
    /// Consecutive record pairs checked for sufficient descent.
    pub checked_steps: usize,
    pub descent_violations: usize,
    pub first_descent_violation: Option<usize>,
    /// Logged iterations at which the `min Δ_k` bound was checked.
    pub checked_bounds: usize,
    pub bound_violations: usize,
    pub first_bound_violation: Option<usize>,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.descent_violations == 0 && self.bound_violations == 0
    }
}

/// Slack allowed in the per-step descent check.
pub fn descent_slack(l_prev: f64) -> f64 {
    1e-8 * (1.0 + l_prev.abs())
}

/// Check a trace against the sufficient-descent inequality
/// `L^{k+1} − L^k <= −ν Δ_{k+1}` (on consecutive records) and its summed
/// form `min_{2<=k<=N+1} Δ_k <= (L^1 − L^{N+1}) / (ν N)` at every logged
/// `N + 1`. Summing from `L^1` controls the steps after the first one, so
/// `Δ_1` is excluded. Since `L_η >= 0` along the iterates, this implies the
/// bound with `L^1 / (ν N)`.
///
/// Requires strict-mode parameters.
pub fn descent_certificate(trace: &[IterationRecord], params: &SolverParams) -> Result<DescentReport> {
    let nu = match params.validate() {
        ParamMode::Strict { nu } => nu,
        other => {
            return Err(Error::Domain(format!(
                "descent certificate needs strict parameters, got {}",
                other.name()
            )))
        }
    };
    let mut report = DescentReport {
        nu,
        checked_steps: 0,
        descent_violations: 0,
        first_descent_violation: None,
        checked_bounds: 0,
        bound_violations: 0,
        first_bound_violation: None,
    };
    for pair in trace.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.iter != a.iter + 1 {
            continue;
        }
        report.checked_steps += 1;
        if b.aug_lagrangian - a.aug_lagrangian > -nu * b.delta_w + descent_slack(a.aug_lagrangian) {
            report.descent_violations += 1;
            report.first_descent_violation.get_or_insert(b.iter);
        }
    }
    let Some(first) = trace.iter().find(|r| r.iter == 1) else {
        return Ok(report);
    };
    let l1 = first.aug_lagrangian;
    let mut min_delta = f64::INFINITY;
    for rec in trace.iter().filter(|r| r.iter >= 2) {
        min_delta = min_delta.min(rec.delta_w);
        report.checked_bounds += 1;
        let bound = (l1 - rec.aug_lagrangian) / (nu * (rec.iter - 1) as f64) + 1e-12;
        if min_delta > bound {
            report.bound_violations += 1;
            report.first_bound_violation.get_or_insert(rec.iter);
        }
    }
    Ok(report)
}
