//! Linearized proximal ADMM on the penalized splitting model.
//!
//! One iteration updates, in order:
//!
//! ```text
//! y ← argmin_Y  f(x, y) + μ₁/2 ‖y − y_k‖²                        (simplex QP)
//! x ← argmin_X  ⟨∇_x f(x_k, y), x⟩ + ⟨λ, Ax⟩ + η/2 ‖Ax − z‖² + μ₂/2 ‖x − x_k‖²
//! p ← argmin_Z  ξ/2 ‖p − z‖² + μ₃/2 ‖p − p_k‖²
//! z ← argmin    −⟨λ, z⟩ + η/2 ‖Ax − z‖² + ξ/2 ‖p − z‖²
//! λ ← λ + η (Ax − z)
//! ```
//!
//! The `z` optimality condition makes `λ = ξ(z − p)` after every step, which
//! is what keeps `L_η` bounded below by zero.

mod monitor;
mod params;
mod trace;

pub use monitor::{descent_certificate, descent_slack, stationarity_residuals, DescentReport};
pub use params::{ParamMode, SolverParams};
pub use trace::{read_trace_csv, write_trace_csv, IterationRecord, TraceMode, TRACE_HEADER};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{gram, lagrangian_terms, objective_f, ModelProblem, PrimalDualPoint};
use crate::operator::{AuxStack, ComponentStack};
use crate::prox::{
    clean_weights, project_components, project_z, solve_simplex_qp, x_update, z_update, p_update,
    SimplexQp, CLAMP_TOL,
};
use crate::state::Matrix;

/// Consecutive tiny steps after which a run is declared stagnant.
pub const STAGNATION_WINDOW: usize = 100;
/// Step size `Δ_k` regarded as no movement.
pub const STAGNATION_DELTA: f64 = 1e-30;
/// Tolerance of the dual identity `λ = ξ(z − p)`, relative to `1 + ‖λ‖`.
pub const DUAL_IDENTITY_TOL: f64 = 1e-9;

/// Random starting point: Wishart components `GGᵀ / tr(GGᵀ)`, uniform
/// weights, `p = z = Π_Z(Ax)` and `λ = 0`. Deterministic per seed.
pub fn init_point(problem: &ModelProblem, seed: u64) -> Result<PrimalDualPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = problem.components();
    let d = problem.side();
    let blocks = (0..m)
        .map(|_| {
            let g = Matrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
            let w = &g * g.transpose();
            let tr = w.trace();
            w / tr
        })
        .collect();
    let x = ComponentStack::new(blocks)?;
    let p = project_z(problem.operator().apply(&x)?, CLAMP_TOL)?;
    Ok(PrimalDualPoint {
        y: DVector::from_element(m, 1.0 / m as f64),
        x,
        z: p.clone(),
        p,
        lambda: AuxStack::zeros(m, d),
    })
}

/// Scalars computed for every iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepStats {
    pub f: f64,
    pub aug_lagrangian: f64,
    pub primal_residual: f64,
    pub violation_pz: f64,
    pub delta_w: f64,
    /// `η ‖z^{k+1} − z^k‖`.
    pub dual_residual: f64,
    /// `‖ξ(z − p) − λ‖`.
    pub dual_gap: f64,
}

fn advance(
    point: &PrimalDualPoint,
    params: &SolverParams,
    problem: &ModelProblem,
) -> Result<(PrimalDualPoint, StepStats)> {
    let rho = problem.rho().matrix();
    let op = problem.operator();
    let (eta, xi) = (params.eta, params.xi);

    let (n, q) = gram(&point.x, rho);
    let y = solve_simplex_qp(
        &SimplexQp {
            n,
            q,
            y_prev: point.y.clone(),
            mu1: params.mu1,
        },
        1e-13,
    )?;
    let x = x_update(
        op,
        rho,
        &point.x,
        &y,
        &point.lambda,
        &point.z,
        eta,
        params.mu2,
        CLAMP_TOL,
    )?;
    let p = p_update(&point.p, &point.z, xi, params.mu3, CLAMP_TOL)?;
    let ax = op.apply(&x)?;
    let z = z_update(&ax, &p, &point.lambda, eta, xi);
    let mut residual = ax;
    residual.axpy(-1.0, &z);
    let mut lambda = point.lambda.clone();
    lambda.axpy(eta, &residual);

    let dz = z.dist_sq(&point.z);
    let delta_w = (&y - &point.y).norm_squared() + x.dist_sq(&point.x) + p.dist_sq(&point.p) + dz;
    let next = PrimalDualPoint { y, x, p, z, lambda };
    let terms = lagrangian_terms(&next, problem, eta)?;
    let dual_gap = next
        .z
        .combine(xi, &next.p, -xi)
        .combine(1.0, &next.lambda, -1.0)
        .norm();
    let stats = StepStats {
        f: terms.f,
        aug_lagrangian: terms.value(),
        primal_residual: residual.norm(),
        violation_pz: next.p.dist_sq(&next.z),
        delta_w,
        dual_residual: eta * dz.sqrt(),
        dual_gap,
    };
    Ok((next, stats))
}

fn record(iter: usize, stats: &StepStats, residuals: [f64; 5]) -> IterationRecord {
    IterationRecord {
        iter,
        f: stats.f,
        aug_lagrangian: stats.aug_lagrangian,
        primal_residual: stats.primal_residual,
        violation_pz: stats.violation_pz,
        delta_w: stats.delta_w,
        r1: residuals[0],
        r2: residuals[1],
        r3: residuals[2],
        r4: residuals[3],
        r5: residuals[4],
    }
}

fn require_valid(params: &SolverParams, problem: &ModelProblem) -> Result<ParamMode> {
    let mode = params.validate();
    if let ParamMode::Invalid(reason) = &mode {
        return Err(Error::Domain(format!("invalid solver parameters: {reason}")));
    }
    if params.xi != problem.xi() {
        return Err(Error::Domain(format!(
            "solver xi = {} differs from model xi = {}",
            params.xi,
            problem.xi()
        )));
    }
    Ok(mode)
}

/// One full iteration. The record is labelled `iter = 1`; [`solve`] relabels.
pub fn step(
    point: &PrimalDualPoint,
    params: &SolverParams,
    problem: &ModelProblem,
) -> Result<(PrimalDualPoint, IterationRecord)> {
    require_valid(params, problem)?;
    point.check_shape(problem)?;
    let (next, stats) = advance(point, params, problem).map_err(|e| e.at_iteration(1))?;
    let residuals = stationarity_residuals(&next, problem)?;
    Ok((next, record(1, &stats, residuals)))
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `max{η‖z^{k+1} − z^k‖, ‖Ax − z‖} <= ε`.
    Tol,
    MaxIter,
    /// `Δ_k < 1e-30` for 100 consecutive iterations.
    Stagnation,
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Tol => "tol",
            Termination::MaxIter => "max_iter",
            Termination::Stagnation => "stagnation",
        }
    }
}

/// Per-iteration runtime checks, evaluated on every step (not just recorded
/// ones).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorSummary {
    /// Descent modulus, when the parameters are strict.
    pub nu: Option<f64>,
    pub descent_violations: usize,
    pub first_descent_violation: Option<usize>,
    /// Largest `L^{k+1} − L^k + ν Δ_{k+1}` seen, relative to the slack.
    pub worst_descent_excess: f64,
    pub bound_violations: usize,
    pub first_bound_violation: Option<usize>,
    /// Largest `‖ξ(z − p) − λ‖ / (1 + ‖λ‖)`.
    pub max_dual_gap: f64,
    pub min_aug_lagrangian: f64,
    /// Largest norm seen for each of `y, x, p, z, λ`.
    pub max_norms: [f64; 5],
    pub lagrangian_start: f64,
    pub lagrangian_first: f64,
}

impl MonitorSummary {
    fn new(nu: Option<f64>, l0: f64) -> Self {
        Self {
            nu,
            descent_violations: 0,
            first_descent_violation: None,
            worst_descent_excess: f64::NEG_INFINITY,
            bound_violations: 0,
            first_bound_violation: None,
            max_dual_gap: 0.0,
            min_aug_lagrangian: f64::INFINITY,
            max_norms: [0.0; 5],
            lagrangian_start: l0,
            lagrangian_first: f64::NAN,
        }
    }

    /// Dual identity held to `1e-9` relative, `L_η >= 0`, and (strict mode)
    /// no descent or complexity-bound violations.
    pub fn all_hold(&self) -> bool {
        self.descent_violations == 0
            && self.bound_violations == 0
            && self.max_dual_gap <= DUAL_IDENTITY_TOL
            && self.min_aug_lagrangian >= 0.0
    }
}

/// Result of one run.
#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Final iterate, after the feasibility polish.
    pub point: PrimalDualPoint,
    /// `f` at the last iterate.
    pub f: f64,
    /// `f` after projecting `x` onto PSD blocks and renormalizing `y`.
    pub feasible_f: f64,
    /// `‖p − z‖²` at the last iterate.
    pub violation: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<IterationRecord>,
    pub stationarity: [f64; 5],
    pub monitors: MonitorSummary,
    pub mode: ParamMode,
    pub seed: u64,
}

/// Options beyond the numerical parameters.
#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub trace: TraceMode,
}

/// Iterate from `init` until the residual test, the iteration cap or
/// stagnation stops the run.
pub fn solve(problem: &ModelProblem, params: &SolverParams, init: PrimalDualPoint) -> Result<SolveResult> {
    solve_with(problem, params, init, &SolveOptions::default())
}

pub fn solve_with(
    problem: &ModelProblem,
    params: &SolverParams,
    init: PrimalDualPoint,
    options: &SolveOptions,
) -> Result<SolveResult> {
    let mode = require_valid(params, problem)?;
    init.check_shape(problem)?;
    let nu = if mode.is_strict() { mode.nu() } else { None };
    let mut point = init;
    let l0 = lagrangian_terms(&point, problem, params.eta)?.value();
    let mut monitors = MonitorSummary::new(nu, l0);
    let mut trace = Vec::new();
    let mut prev_l = l0;
    let mut min_delta = f64::INFINITY;
    let mut still = 0usize;
    let mut last_stats = None;
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;

    for k in 1..=params.max_iter {
        let (next, stats) = advance(&point, params, problem).map_err(|e| e.at_iteration(k))?;
        point = next;
        iterations = k;

        // runtime monitors
        let l = stats.aug_lagrangian;
        if k == 1 {
            monitors.lagrangian_first = l;
        }
        if let Some(nu) = nu {
            let excess = l - prev_l + nu * stats.delta_w;
            let slack = descent_slack(prev_l);
            monitors.worst_descent_excess = monitors.worst_descent_excess.max(excess / slack);
            if excess > slack {
                monitors.descent_violations += 1;
                monitors.first_descent_violation.get_or_insert(k);
            }
            if k >= 2 {
                min_delta = min_delta.min(stats.delta_w);
                let bound = (monitors.lagrangian_first - l) / (nu * (k - 1) as f64) + 1e-12;
                if min_delta > bound {
                    monitors.bound_violations += 1;
                    monitors.first_bound_violation.get_or_insert(k);
                }
            }
        }
        let lambda_norm = point.lambda.norm();
        monitors.max_dual_gap = monitors.max_dual_gap.max(stats.dual_gap / (1.0 + lambda_norm));
        monitors.min_aug_lagrangian = monitors.min_aug_lagrangian.min(l);
        let norms = [point.y.norm(), point.x.norm(), point.p.norm(), point.z.norm(), lambda_norm];
        for (slot, v) in monitors.max_norms.iter_mut().zip(norms) {
            *slot = slot.max(v);
        }
        prev_l = l;

        let converged = stats.dual_residual.max(stats.primal_residual) <= params.tol;
        still = if stats.delta_w < STAGNATION_DELTA { still + 1 } else { 0 };
        let stop = if converged {
            Some(Termination::Tol)
        } else if still >= STAGNATION_WINDOW {
            Some(Termination::Stagnation)
        } else {
            None
        };
        if options.trace.keeps(k) || stop.is_some() || k == params.max_iter {
            let residuals = stationarity_residuals(&point, problem).map_err(|e| e.at_iteration(k))?;
            trace.push(record(k, &stats, residuals));
        }
        last_stats = Some(stats);
        if let Some(t) = stop {
            termination = t;
            break;
        }
    }

    let stats = last_stats.expect("at least one iteration runs");
    let stationarity = trace.last().map(|r| r.stationarity()).unwrap_or_default();
    let rho = problem.rho().matrix();
    let polished_x = project_components(point.x.clone(), CLAMP_TOL)?;
    let polished_y = clean_weights(point.y.clone());
    let feasible_f = objective_f(&polished_x, &polished_y, rho)?;
    point.x = polished_x;
    point.y = polished_y;
    Ok(SolveResult {
        point,
        f: stats.f,
        feasible_f,
        violation: stats.violation_pz,
        iterations,
        termination,
        trace,
        stationarity,
        monitors,
        mode,
        seed: params.seed,
    })
}

/// One row of the per-trial table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub f: f64,
    pub feasible_f: f64,
    pub violation: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Best-of-`n` outcome.
#[derive(Clone, Debug)]
pub struct TrialsOutcome {
    pub best: SolveResult,
    pub per_trial: Vec<TrialSummary>,
}

/// Run `n_trials` independent solves from seeds `base_seed, base_seed + 1, …`
/// and keep the one with the smallest final `f` (ties to the lower seed).
/// Trials may run concurrently; the outcome does not depend on scheduling.
pub fn run_trials(
    problem: &ModelProblem,
    params: &SolverParams,
    n_trials: usize,
    base_seed: u64,
    options: &SolveOptions,
) -> Result<TrialsOutcome> {
    if n_trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    require_valid(params, problem)?;
    let run = |seed: u64| -> Result<SolveResult> {
        let p = SolverParams {
            seed,
            ..params.clone()
        };
        solve_with(problem, &p, init_point(problem, seed)?, options)
    };
    let seeds: Vec<u64> = (0..n_trials as u64).map(|i| base_seed.wrapping_add(i)).collect();
    // Keep only the running best of each chunk so full traces of losing trials
    // are dropped early.
    let results: Vec<Result<SolveResult>> = seeds.par_iter().map(|&s| run(s)).collect();
    let mut per_trial = Vec::with_capacity(n_trials);
    let mut best: Option<SolveResult> = None;
    for res in results {
        let r = res?;
        per_trial.push(TrialSummary {
            seed: r.seed,
            f: r.f,
            feasible_f: r.feasible_f,
            violation: r.violation,
            iterations: r.iterations,
            termination: r.termination,
        });
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    Ok(TrialsOutcome {
        best: best.expect("n_trials >= 1"),
        per_trial,
    })
}
