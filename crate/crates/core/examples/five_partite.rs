//! Five-partite runs: the qutrit GHZ and multi-GHZ states of dimension 243,
//! or a qubit analog of dimension 32.
//!
//! ```text
//! cargo run --release --example five_partite -- qubit 1.1 [trials] [max_iter]
//! cargo run --release --example five_partite -- ghz5 2 [trials] [max_iter]
//! cargo run --release --example five_partite -- mghz5 5 [trials] [max_iter] [s]
//! ```
//!
//! The qutrit runs take hours at the default iteration budget.

use bippt::experiments::{run_solve, RunConfig, StateSource};
use bippt::{StateKind, SubsystemDims};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> bippt::Result<()> {
    let which: String = arg(1, "qubit".to_string());
    let noise: f64 = arg(2, 1.1);
    let source = match which.as_str() {
        "qubit" => StateSource::generated(StateKind::Ghz, Some(SubsystemDims::qubits(5)?), noise)?,
        "ghz5" => StateSource::generated(StateKind::Ghz5, None, noise)?,
        "mghz5" => {
            let s: f64 = arg(5, 5.0);
            StateSource::generated(StateKind::MultiGhz5 { m: 1.0, n: 1.0, s }, None, noise)?
        }
        other => return Err(bippt::Error::Domain(format!("unknown system {other}"))),
    };
    let mut cfg = RunConfig::new(source, 1000.0);
    cfg.trials = arg(3, 1);
    cfg.max_iter = Some(arg(4, 20_000));
    let t = std::time::Instant::now();
    let out = run_solve(&cfg)?;
    let r = &out.report;
    println!("{}: f = {:.4e}, ||p - z||^2 = {:.4e}, {} iterations ({:?}) in {:?}", r.state, r.f, r.violation_pz, r.iterations, r.termination, t.elapsed());
    let active: Vec<String> = r
        .bipartitions
        .iter()
        .zip(&r.weights)
        .filter(|(_, &w)| w > 1e-6)
        .map(|(b, w)| format!("{b}:{w:.3}"))
        .collect();
    println!("active components: {}", active.join(" "));
    Ok(())
}
