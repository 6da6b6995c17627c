//! Drivers behind the command-line tool: state generation, single solves and
//! parameter sweeps with plot-ready outputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{load_density, save_density};
use crate::model::{aux_feasible, components_feasible, weights_feasible, FeasibilityTol, ModelProblem};
use crate::solver::{
    run_trials, write_trace_csv, MonitorSummary, ParamMode, SolveOptions, SolveResult, SolverParams,
    Termination, TraceMode, TrialSummary,
};
use crate::state::{make_state, DensityMatrix, Matrix, StateKind, SubsystemDims};

/// Minimum eigenvalue below which a partially transposed component counts as
/// not PPT in the sweep flags.
pub const PPT_FLAG_TOL: f64 = 1e-6;

/// Parse `"2,2,2"` (or `"2x2x2"`) into subsystem dims; at least two are needed.
pub fn parse_dims(s: &str) -> Result<SubsystemDims> {
    let dims = s
        .split([',', 'x'])
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad subsystem dimension {t:?} in {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.len() < 2 {
        return Err(Error::InvalidArity(dims.len()));
    }
    SubsystemDims::new(dims)
}

/// Parse a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))
        })
        .collect()
}

/// State family by name. `coeffs` is only used by `mghz5` (`m,n,s`, default
/// `1,1,1`) and `custom` (the amplitude vector).
pub fn parse_kind(name: &str, coeffs: Option<&[f64]>) -> Result<StateKind> {
    let kind = match name.to_ascii_lowercase().as_str() {
        "w3" => StateKind::W3,
        "ghz3" => StateKind::Ghz3,
        "ghz5" => StateKind::Ghz5,
        "ghz" => StateKind::Ghz,
        "mghz5" => match coeffs {
            None => StateKind::MultiGhz5 { m: 1.0, n: 1.0, s: 1.0 },
            Some(&[m, n, s]) => StateKind::MultiGhz5 { m, n, s },
            Some(c) => {
                return Err(Error::Domain(format!(
                    "mghz5 takes three coefficients m,n,s; got {}",
                    c.len()
                )))
            }
        },
        "custom" => match coeffs {
            Some(c) if !c.is_empty() => StateKind::Pure(c.to_vec()),
            _ => return Err(Error::Domain("custom states need --coeffs amplitudes".into())),
        },
        other => {
            return Err(Error::Domain(format!(
                "unknown state kind {other:?} (expected w3, ghz3, ghz5, mghz5, ghz or custom)"
            )))
        }
    };
    if coeffs.is_some() && !matches!(kind, StateKind::MultiGhz5 { .. } | StateKind::Pure(_)) {
        return Err(Error::Domain(format!("state kind {name} takes no coefficients")));
    }
    Ok(kind)
}

/// Where the target state comes from.
#[derive(Clone, Debug)]
pub enum StateSource {
    Generated {
        kind: StateKind,
        dims: SubsystemDims,
        noise: f64,
    },
    File(PathBuf),
}

impl StateSource {
    /// Build a generated source; `dims` defaults to the family's fixed dims.
    pub fn generated(kind: StateKind, dims: Option<SubsystemDims>, noise: f64) -> Result<Self> {
        let dims = match (dims, kind.required_dims()) {
            (Some(d), _) => d,
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::Domain(format!(
                    "state kind {} needs explicit --dims",
                    kind.name()
                )))
            }
        };
        Ok(StateSource::Generated { kind, dims, noise })
    }

    pub fn load(&self) -> Result<DensityMatrix> {
        match self {
            StateSource::Generated { kind, dims, noise } => make_state(kind, dims, *noise),
            StateSource::File(path) => load_density(path),
        }
    }

    /// Same source with a different noise level (generated sources only).
    pub fn with_noise(&self, noise: f64) -> Result<Self> {
        match self {
            StateSource::Generated { kind, dims, .. } => Ok(StateSource::Generated {
                kind: kind.clone(),
                dims: dims.clone(),
                noise,
            }),
            StateSource::File(p) => Err(Error::Domain(format!(
                "noise sweeps need a generated state, not the file {}",
                p.display()
            ))),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StateSource::Generated { kind, dims, noise } => {
                format!("{} on {dims}, l = {noise}", kind.name())
            }
            StateSource::File(p) => p.display().to_string(),
        }
    }
}

/// Which parameter regime to derive defaults for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeChoice {
    /// `μ₂ = 1.1`.
    #[default]
    Strict,
    /// `μ₂ = 0`.
    Tightened,
}

/// Everything a solve or sweep needs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: StateSource,
    pub xi: f64,
    /// Overrides; `None` means the derived default for the current `ξ`.
    pub eta: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub mu3: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: ModeChoice,
    pub trace: TraceMode,
}

impl RunConfig {
    pub fn new(source: StateSource, xi: f64) -> Self {
        Self {
            source,
            xi,
            eta: None,
            mu1: None,
            mu2: None,
            mu3: None,
            tol: None,
            max_iter: None,
            trials: 30,
            seed: 0,
            mode: ModeChoice::Strict,
            trace: TraceMode::Thinned,
        }
    }

    /// Solver parameters at penalty `xi`: defaults for the mode, then the
    /// explicit overrides.
    pub fn params_for(&self, xi: f64) -> SolverParams {
        let base = match self.mode {
            ModeChoice::Strict => SolverParams::defaults_for(xi),
            ModeChoice::Tightened => SolverParams::tightened_for(xi),
        };
        SolverParams {
            eta: self.eta.unwrap_or(base.eta),
            mu1: self.mu1.unwrap_or(base.mu1),
            mu2: self.mu2.unwrap_or(base.mu2),
            mu3: self.mu3.unwrap_or(base.mu3),
            tol: self.tol.unwrap_or(base.tol),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            seed: self.seed,
            ..base
        }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("--trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which constraint sets the final point satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintFlags {
    /// `y` on the simplex.
    pub simplex: bool,
    /// Every component PSD.
    pub psd: bool,
    /// `p ∈ Z`.
    pub aux: bool,
    /// Every component PPT across its bipartition (min eigenvalue of the
    /// partial transpose at least `-PPT_FLAG_TOL`).
    pub ppt: bool,
}

impl ConstraintFlags {
    pub fn of(result: &SolveResult, problem: &ModelProblem) -> Result<Self> {
        let point = &result.point;
        let tol = FeasibilityTol::default();
        let ax = problem.operator().apply(&point.x)?;
        let ppt = ax.transformed.iter().all(|b| min_eigenvalue(b) >= -PPT_FLAG_TOL);
        Ok(Self {
            simplex: weights_feasible(&point.y, tol),
            psd: components_feasible(&point.x, tol),
            aux: aux_feasible(&point.p, tol),
            ppt,
        })
    }

    /// `simplex=1;psd=1;aux=1;ppt=0`.
    pub fn encode(&self) -> String {
        let b = |v: bool| if v { 1 } else { 0 };
        format!(
            "simplex={};psd={};aux={};ppt={}",
            b(self.simplex),
            b(self.psd),
            b(self.aux),
            b(self.ppt)
        )
    }
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(crate::state::symmetrize(m))
        .eigenvalues
        .min()
}

/// JSON result of a solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub state: String,
    pub dims: Vec<usize>,
    pub f: f64,
    pub feasible_f: f64,
    pub violation_pz: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub weights: Vec<f64>,
    pub bipartitions: Vec<String>,
    pub per_trial: Vec<TrialSummary>,
    pub stationarity: [f64; 5],
    pub params_mode: &'static str,
    pub best_seed: u64,
    pub params: SolverParams,
    pub constraint_flags: ConstraintFlags,
    pub monitors: MonitorSummary,
}

/// Outcome of [`run_solve`]: the report plus the full best run.
#[derive(Debug)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub best: SolveResult,
    pub problem: ModelProblem,
}

fn solve_problem(problem: ModelProblem, params: &SolverParams, cfg: &RunConfig) -> Result<SolveOutcome> {
    if let ParamMode::Invalid(reason) = params.validate() {
        return Err(Error::Domain(format!("invalid solver parameters: {reason}")));
    }
    let out = run_trials(
        &problem,
        params,
        cfg.trials,
        cfg.seed,
        &SolveOptions { trace: cfg.trace },
    )?;
    let best = out.best;
    let rho = problem.rho();
    let report = SolveReport {
        state: cfg.source.describe(),
        dims: rho.dims().dims().to_vec(),
        f: best.f,
        feasible_f: best.feasible_f,
        violation_pz: best.violation,
        iterations: best.iterations,
        termination: best.termination,
        weights: best.point.y.iter().copied().collect(),
        bipartitions: problem.operator().bipartitions().iter().map(|b| b.label()).collect(),
        per_trial: out.per_trial,
        stationarity: best.stationarity,
        params_mode: best.mode.name(),
        best_seed: best.seed,
        params: params.clone(),
        constraint_flags: ConstraintFlags::of(&best, &problem)?,
        monitors: best.monitors.clone(),
    };
    Ok(SolveOutcome { report, best, problem })
}

/// Best-of-`trials` solve for the configured state and parameters.
pub fn run_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    cfg.check()?;
    let rho = cfg.source.load()?;
    let problem = ModelProblem::with_all_bipartitions(rho, cfg.xi)?;
    solve_problem(problem, &cfg.params_for(cfg.xi), cfg)
}

/// One row of a `ξ` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiRow {
    pub xi: f64,
    pub f: f64,
    pub violation: f64,
    pub constraint_flags: String,
    pub iterations: usize,
}

/// The grid `from, from + step, …` up to `to` (inclusive within a
/// half-step).
pub fn xi_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from > 0.0) || !(step > 0.0) || !(from <= to) || !to.is_finite() {
        return Err(Error::Domain(format!(
            "xi sweep needs 0 < from <= to and step > 0, got {from}..{to} by {step}"
        )));
    }
    let n = ((to - from) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

/// Solve at every `ξ` in the grid. `η` and `μ₃` are re-derived per point
/// unless overridden; every point reuses the base seed.
pub fn sweep_xi(cfg: &RunConfig, from: f64, to: f64, step: f64) -> Result<Vec<XiRow>> {
    cfg.check()?;
    let rho = cfg.source.load()?;
    let mut rows = Vec::new();
    for xi in xi_grid(from, to, step)? {
        let problem = ModelProblem::with_all_bipartitions(rho.clone(), xi)?;
        let out = solve_problem(problem, &cfg.params_for(xi), cfg)?;
        rows.push(XiRow {
            xi,
            f: out.report.f,
            violation: out.report.violation_pz,
            constraint_flags: out.report.constraint_flags.encode(),
            iterations: out.report.iterations,
        });
    }
    Ok(rows)
}

/// One row of a noise sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseRow {
    pub l: f64,
    pub f: f64,
    pub violation: f64,
    pub iterations: usize,
}

/// Solve at every noise level, at the configured `ξ`.
pub fn sweep_noise(cfg: &RunConfig, levels: &[f64]) -> Result<Vec<NoiseRow>> {
    cfg.check()?;
    if levels.is_empty() {
        return Err(Error::Domain("noise sweep needs at least one level".into()));
    }
    levels
        .iter()
        .map(|&l| {
            let rho = cfg.source.with_noise(l)?.load()?;
            let problem = ModelProblem::with_all_bipartitions(rho, cfg.xi)?;
            let out = solve_problem(problem, &cfg.params_for(cfg.xi), cfg)?;
            Ok(NoiseRow {
                l,
                f: out.report.f,
                violation: out.report.violation_pz,
                iterations: out.report.iterations,
            })
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_xi_csv<W: Write>(w: W, rows: &[XiRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["xi", "f", "violation", "constraint_flags"])
        .map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.xi.to_string(),
            format!("{:e}", r.f),
            format!("{:e}", r.violation),
            r.constraint_flags.clone(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_noise_csv<W: Write>(w: W, rows: &[NoiseRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["l", "f", "violation"]).map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.l.to_string(),
            format!("{:e}", r.f),
            format!("{:e}", r.violation),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Write `rho` in the matrix text format.
pub fn gen_state(source: &StateSource, out: &Path) -> Result<DensityMatrix> {
    let rho = source.load()?;
    save_density(out, &rho)?;
    Ok(rho)
}

/// Write the solve report as pretty JSON.
pub fn write_report<W: Write>(mut w: W, report: &SolveReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Write the best run's trace.
pub fn write_trace(path: &Path, result: &SolveResult) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trace_csv(std::io::BufWriter::new(file), &result.trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_lists() {
        assert_eq!(parse_dims("2,3,2").unwrap().dims(), &[2, 3, 2]);
        assert_eq!(parse_dims("3x3").unwrap().dims(), &[3, 3]);
        assert!(parse_dims("2").is_err());
        assert!(parse_dims("2,a").is_err());
        assert_eq!(parse_list("0.1, 1,2e-1").unwrap(), vec![0.1, 1.0, 0.2]);
    }

    #[test]
    fn kinds() {
        assert_eq!(parse_kind("GHZ3", None).unwrap(), StateKind::Ghz3);
        assert_eq!(
            parse_kind("mghz5", Some(&[1.0, 1.0, 5.0])).unwrap(),
            StateKind::MultiGhz5 { m: 1.0, n: 1.0, s: 5.0 }
        );
        assert!(parse_kind("mghz5", Some(&[1.0])).is_err());
        assert!(parse_kind("w3", Some(&[1.0])).is_err());
        assert!(parse_kind("bell", None).is_err());
        assert!(StateSource::generated(StateKind::Ghz, None, 0.0).is_err());
    }

    #[test]
    fn grid() {
        let g = xi_grid(100.0, 1000.0, 50.0).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[18], 1000.0);
        assert_eq!(xi_grid(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert!(xi_grid(10.0, 5.0, 1.0).is_err());
        assert!(xi_grid(1.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn overrides_and_modes() {
        let src = StateSource::generated(StateKind::Ghz3, None, 1.0).unwrap();
        let mut cfg = RunConfig::new(src, 100.0);
        assert_eq!(cfg.params_for(200.0).eta, 401.0);
        assert_eq!(cfg.params_for(200.0).mu3, 200.0);
        cfg.eta = Some(500.0);
        cfg.mode = ModeChoice::Tightened;
        let p = cfg.params_for(200.0);
        assert_eq!((p.eta, p.mu2, p.mu3), (500.0, 0.0, 200.0));
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_xi_csv(
            &mut buf,
            &[XiRow {
                xi: 100.0,
                f: 1e-3,
                violation: 1e-9,
                constraint_flags: "simplex=1;psd=1;aux=1;ppt=1".into(),
                iterations: 10,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("xi,f,violation,constraint_flags\n100,"));
        let mut buf = Vec::new();
        write_noise_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "l,f,violation\n");
    }
}
