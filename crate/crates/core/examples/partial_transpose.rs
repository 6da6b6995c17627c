//! Bipartitions, partial transposes and the PPT test on a few three-qubit
//! states.
//!
//! ```text
//! cargo run --release --example partial_transpose
//! ```

use bippt::{enumerate_bipartitions, make_state, partial_transpose, StateKind, SubsystemDims};
use nalgebra::SymmetricEigen;

fn min_eig(m: &bippt::Matrix) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

fn main() -> bippt::Result<()> {
    for n in 2..=6 {
        println!("{n} parties: {} bipartitions", enumerate_bipartitions(n)?.len());
    }

    let dims = SubsystemDims::qubits(3)?;
    let parts = enumerate_bipartitions(3)?;
    println!("\nminimum eigenvalue of the partial transpose, GHZ + l I:");
    println!("{:>6} {}", "l", parts.iter().map(|p| format!("{:>10}", p.label())).collect::<String>());
    for l in [0.0, 0.5, 0.9, 1.0, 2.0] {
        let rho = make_state(&StateKind::Ghz3, &dims, l)?;
        let row: String = parts
            .iter()
            .map(|p| Ok(format!("{:>10.4}", min_eig(partial_transpose(&rho, p)?.matrix()))))
            .collect::<bippt::Result<_>>()?;
        println!("{l:>6} {row}");
    }

    let w = make_state(&StateKind::W3, &dims, 0.0)?;
    let wt = partial_transpose(&w, &parts[0])?;
    println!("\nW state across {}: min eigenvalue {:.4}", parts[0].label(), min_eig(wt.matrix()));
    Ok(())
}
