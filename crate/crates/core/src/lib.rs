//! Approximate multipartite density matrices by convex combinations of
//! states that are PPT across single bipartitions, using a linearized
//! proximal ADMM on a penalized splitting model.
//!
//! The distance `min_{y, α} ½‖ρ − Σ yᵢ αᵢ‖²` is an upper bound on the
//! distance from `ρ` to the bi-PPT mixtures. A value near zero certifies
//! that `ρ` is (numerically) such a mixture; a value bounded away from zero
//! indicates genuine multipartite entanglement.
//!
//! ```
//! use bippt::{make_state, ModelProblem, SolverParams, StateKind, SubsystemDims};
//! use bippt::solver::{init_point, solve};
//!
//! let dims = SubsystemDims::qubits(3).unwrap();
//! let rho = make_state(&StateKind::Ghz3, &dims, 1.0).unwrap();
//! let problem = ModelProblem::with_all_bipartitions(rho, 10.0).unwrap();
//! let params = SolverParams { max_iter: 500, ..SolverParams::defaults_for(10.0) };
//! let res = solve(&problem, &params, init_point(&problem, 0).unwrap()).unwrap();
//! assert!(res.f < 1e-3);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod operator;
pub mod prox;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use model::{ModelProblem, PrimalDualPoint};
pub use operator::{AuxStack, ComponentStack, OperatorA};
pub use solver::{ParamMode, SolveResult, SolverParams, Termination};
pub use state::{
    enumerate_bipartitions, make_state, partial_transpose, Bipartition, DensityMatrix, Matrix,
    StateKind, SubsystemDims,
};
