//! Decompose the noisy W state `W Wᵀ + 3 I` into a mixture of bi-PPT states.
//!
//! ```text
//! cargo run --release --example w_state -- [noise] [xi] [trials] [max_iter]
//! ```

use bippt::experiments::{run_solve, RunConfig, StateSource};
use bippt::StateKind;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> bippt::Result<()> {
    let noise: f64 = arg(1, 3.0);
    let xi: f64 = arg(2, 100.0);
    let mut cfg = RunConfig::new(StateSource::generated(StateKind::W3, None, noise)?, xi);
    cfg.trials = arg(3, 4);
    cfg.max_iter = Some(arg(4, 50_000));

    let out = run_solve(&cfg)?;
    let r = &out.report;
    println!("state        {}", r.state);
    println!("best seed    {}", r.best_seed);
    println!("f            {:.4e}", r.f);
    println!("||p - z||^2  {:.4e}", r.violation_pz);
    println!("iterations   {} ({:?})", r.iterations, r.termination);
    for (label, w) in r.bipartitions.iter().zip(&r.weights) {
        println!("  y[{label}] = {w:.6}");
    }
    println!("stationarity {:?}", r.stationarity.map(|v| format!("{v:.1e}")));
    println!("constraints  {}", r.constraint_flags.encode());
    Ok(())
}
