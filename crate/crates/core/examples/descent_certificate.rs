//! Run one strict-mode solve with a full trace and check the
//! sufficient-descent inequality and the `min Δ_k` complexity bound on it.
//!
//! ```text
//! cargo run --release --example descent_certificate -- [max_iter]
//! ```

use bippt::solver::{descent_certificate, init_point, solve_with, SolveOptions, TraceMode};
use bippt::{make_state, ModelProblem, SolverParams, StateKind, SubsystemDims};

fn main() -> bippt::Result<()> {
    let max_iter = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let rho = make_state(&StateKind::W3, &SubsystemDims::qubits(3)?, 3.0)?;
    let problem = ModelProblem::with_all_bipartitions(rho, 100.0)?;
    let params = SolverParams {
        max_iter,
        ..SolverParams::defaults_for(100.0)
    };
    println!("parameter mode: {:?}", params.validate());
    let res = solve_with(
        &problem,
        &params,
        init_point(&problem, 0)?,
        &SolveOptions { trace: TraceMode::Full },
    )?;
    let report = descent_certificate(&res.trace, &params)?;
    println!("{report:#?}");
    println!("passed: {}", report.passed());
    let m = &res.monitors;
    println!("L_eta: start {:.4e}, first {:.4e}, min {:.4e}", m.lagrangian_start, m.lagrangian_first, m.min_aug_lagrangian);
    println!("max |xi (z - p) - lambda| / (1 + |lambda|) = {:.2e}", m.max_dual_gap);
    Ok(())
}
