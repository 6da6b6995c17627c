//! Noise sweep over `GHZ GHZᵀ + l I` at `ξ = 1000`, printing the best
//! objective per noise level.
//!
//! ```text
//! cargo run --release --example ghz_threshold -- [trials] [max_iter]
//! ```

use bippt::experiments::{sweep_noise, write_noise_csv, RunConfig, StateSource};
use bippt::StateKind;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> bippt::Result<()> {
    let mut cfg = RunConfig::new(StateSource::generated(StateKind::Ghz3, None, 0.0)?, 1000.0);
    cfg.trials = arg(1, 3);
    cfg.max_iter = Some(arg(2, 50_000));
    let levels: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let rows = sweep_noise(&cfg, &levels)?;
    write_noise_csv(std::io::stdout().lock(), &rows)
}
