//! Write a state to the matrix text format, read it back, and confirm the
//! round trip is exact.
//!
//! ```text
//! cargo run --release --example state_files -- [path]
//! ```

use bippt::io::{load_density, save_density};
use bippt::state::check_density;
use bippt::{make_state, StateKind, SubsystemDims};

fn main() -> bippt::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ghz3_l1.txt"));
    let rho = make_state(&StateKind::Ghz3, &SubsystemDims::qubits(3)?, 1.0)?;
    save_density(&path, &rho)?;
    let back = load_density(&path)?;
    println!("wrote {}", path.display());
    println!("bit-exact round trip: {}", back.matrix() == rho.matrix());
    println!("{:?}", check_density(back.matrix(), 1e-12));
    Ok(())
}
