//! Penalty sweep `ξ ∈ [100, 1000]` for the noiseless W state, showing the
//! trade-off between the objective and `‖p − z‖²`.
//!
//! ```text
//! cargo run --release --example xi_sweep -- [noise] [trials] [max_iter]
//! ```

use bippt::experiments::{sweep_xi, write_xi_csv, RunConfig, StateSource};
use bippt::StateKind;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> bippt::Result<()> {
    let noise: f64 = arg(1, 0.0);
    let mut cfg = RunConfig::new(StateSource::generated(StateKind::W3, None, noise)?, 100.0);
    cfg.trials = arg(2, 2);
    cfg.max_iter = Some(arg(3, 20_000));
    let rows = sweep_xi(&cfg, 100.0, 1000.0, 100.0)?;
    write_xi_csv(std::io::stdout().lock(), &rows)
}
