//! Verify `AᵀA = 2I` for the stacked partial-transpose operator, explicitly on
//! small systems and with random probes on a five-qutrit system.
//!
//! ```text
//! cargo run --release --example operator_check
//! ```

use bippt::operator::verify_operator_identity;
use bippt::{enumerate_bipartitions, SubsystemDims};

fn main() -> bippt::Result<()> {
    for dims in [vec![2, 2], vec![2, 2, 2], vec![2, 3, 2], vec![3, 3, 3, 3, 3]] {
        let dims = SubsystemDims::new(dims)?;
        let parts = enumerate_bipartitions(dims.len())?;
        let t = std::time::Instant::now();
        let check = verify_operator_identity(&dims, &parts, 20, 7)?;
        println!(
            "{dims}: {} components, {}, max deviation {:e}, holds = {} ({:?})",
            parts.len(),
            if check.explicit { "materialized" } else { "20 random probes" },
            check.max_deviation,
            check.holds,
            t.elapsed()
        );
    }
    Ok(())
}
