//! Randomized invariants shared by the property suite and the acceptance run.
//! Each check takes its sampled inputs and reports through `prop_assert!`.

use bippt::model::{grad_f_x, gram};
use bippt::prox::{project_psd, project_trace_one, solve_simplex_qp, SimplexQp, CLAMP_TOL};
use bippt::solver::{init_point, solve, SolverParams};
use bippt::state::partial_transpose_matrix;
use bippt::{
    enumerate_bipartitions, Bipartition, DensityMatrix, Matrix, ModelProblem, OperatorA, SubsystemDims,
};
use nalgebra::DVector;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::*;

pub type Check = Result<(), TestCaseError>;

/// Partial transpose by explicit digit swapping over an arbitrary (not
/// necessarily canonical) set of 1-based subsystems.
pub fn oracle_pt(m: &Matrix, dims: &[usize], set: &[usize]) -> Matrix {
    let d: usize = dims.iter().product();
    let digits = |mut k: usize| {
        let mut out = vec![0; dims.len()];
        for s in (0..dims.len()).rev() {
            out[s] = k % dims[s];
            k /= dims[s];
        }
        out
    };
    let index = |dg: &[usize]| dg.iter().zip(dims).fold(0, |acc, (&v, &n)| acc * n + v);
    Matrix::from_fn(d, d, |i, j| {
        let (mut a, mut b) = (digits(i), digits(j));
        for &s in set {
            std::mem::swap(&mut a[s - 1], &mut b[s - 1]);
        }
        m[(index(&a), index(&b))]
    })
}

pub fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=4).prop_filter("keep sides small", |v| {
        v.iter().product::<usize>() <= 36
    })
}

/// Dims plus the index of one of their canonical bipartitions.
pub fn dims_and_part() -> impl Strategy<Value = (Vec<usize>, usize)> {
    dims_strategy().prop_flat_map(|dims| {
        let count = (1usize << (dims.len() - 1)) - 1;
        (Just(dims), 0..count)
    })
}

fn setup(dims: &[usize], part: usize) -> (SubsystemDims, Bipartition) {
    let sd = SubsystemDims::new(dims.to_vec()).unwrap();
    let bp = enumerate_bipartitions(dims.len()).unwrap()[part].clone();
    (sd, bp)
}

pub fn involution(dims: &[usize], part: usize, seed: u64) -> Check {
    let (sd, bp) = setup(dims, part);
    let m = gaussian(&mut rng(seed), sd.total(), sd.total());
    let once = partial_transpose_matrix(&m, &sd, &bp).unwrap();
    prop_assert_eq!(partial_transpose_matrix(&once, &sd, &bp).unwrap(), m);
    Ok(())
}

pub fn trace_preservation(dims: &[usize], part: usize, seed: u64) -> Check {
    let (sd, bp) = setup(dims, part);
    let m = gaussian(&mut rng(seed), sd.total(), sd.total());
    // Diagonal entries map to diagonal entries, so the sums match bit for bit.
    let pt = partial_transpose_matrix(&m, &sd, &bp).unwrap();
    let mut a: Vec<f64> = m.diagonal().iter().copied().collect();
    let mut b: Vec<f64> = pt.diagonal().iter().copied().collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    prop_assert_eq!(a, b);
    prop_assert!((pt.trace() - m.trace()).abs() <= 1e-12 * (1.0 + m.trace().abs()));
    Ok(())
}

pub fn linearity(dims: &[usize], part: usize, seed: u64, a: f64, b: f64) -> Check {
    let (sd, bp) = setup(dims, part);
    let mut r = rng(seed);
    let m = gaussian(&mut r, sd.total(), sd.total());
    let n = gaussian(&mut r, sd.total(), sd.total());
    let lhs = partial_transpose_matrix(&(&m * a + &n * b), &sd, &bp).unwrap();
    let rhs = partial_transpose_matrix(&m, &sd, &bp).unwrap() * a
        + partial_transpose_matrix(&n, &sd, &bp).unwrap() * b;
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

/// Agreement with the digit oracle, the complement identity `Γ_Sᶜ(M) = Γ_S(M)ᵀ`
/// for symmetric `M`, and symmetry preservation.
pub fn oracle_and_complement(dims: &[usize], part: usize, seed: u64) -> Check {
    let (sd, bp) = setup(dims, part);
    let m = random_sym(&mut rng(seed), sd.total());
    let pt = partial_transpose_matrix(&m, &sd, &bp).unwrap();
    prop_assert_eq!(&pt, &oracle_pt(&m, dims, bp.left()));
    let complement: Vec<usize> = (1..=dims.len()).filter(|k| !bp.contains(*k)).collect();
    let pc = oracle_pt(&m, dims, &complement);
    prop_assert!(max_abs(&(&pc - &pt)) <= 1e-14);
    prop_assert_eq!(&pt, &pt.transpose());
    Ok(())
}

pub fn operator_identities(dims: &[usize], seed: u64) -> Check {
    let sd = SubsystemDims::new(dims.to_vec()).unwrap();
    let op = OperatorA::all_bipartitions(sd.clone()).unwrap();
    let (m, d) = (op.components(), sd.total());
    let mut r = rng(seed);
    let x = random_stack(&mut r, m, d);
    let v = random_aux(&mut r, m, d);
    let ax = op.apply(&x).unwrap();
    // AᵀA x = 2x bit for bit: every entry is x + x.
    prop_assert_eq!(op.adjoint(&ax).unwrap(), x.scaled(2.0));
    let (lhs, rhs) = (ax.norm(), 2f64.sqrt() * x.norm());
    prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs);
    let (lhs, rhs) = (ax.dot(&v), x.dot(&op.adjoint(&v).unwrap()));
    prop_assert!((lhs - rhs).abs() <= 1e-12 * (ax.norm() * v.norm()).max(1.0));
    Ok(())
}

pub fn grad_x_one_lipschitz(m: usize, d: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let rho = random_state(&mut r, d);
    let y = random_simplex(&mut r, m);
    let x1 = random_stack(&mut r, m, d);
    let x2 = random_stack(&mut r, m, d);
    let mut diff = grad_f_x(&x1, &y, &rho).unwrap();
    diff.axpy(-1.0, &grad_f_x(&x2, &y, &rho).unwrap());
    prop_assert!(diff.norm() <= x1.dist_sq(&x2).sqrt() + 1e-10);
    Ok(())
}

/// `⟨A, B⟩ >= 0` for PSD `A, B`, and the Gram matrix of PSD blocks is PSD.
pub fn psd_inner_and_gram(m: usize, d: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let a = random_psd(&mut r, d, 1 + (seed as usize) % d);
    let b = random_psd(&mut r, d, d);
    prop_assert!(a.dot(&b) >= -1e-12);
    let blocks = (0..m).map(|k| random_psd(&mut r, d, 1 + k % d)).collect();
    let x = bippt::ComponentStack::new(blocks).unwrap();
    let (n, _) = gram(&x, &Matrix::zeros(d, d));
    prop_assert!(min_eig(&n) >= -1e-10 * n.norm().max(1.0));
    Ok(())
}

/// Idempotence, nonexpansiveness and feasibility of the PSD projection.
pub fn psd_projection(d: usize, seed: u64, scale: f64) -> Check {
    let mut r = rng(seed);
    let s1 = random_sym(&mut r, d) * scale;
    let s2 = random_sym(&mut r, d) * scale;
    let p1 = project_psd(&s1, CLAMP_TOL).unwrap();
    let p2 = project_psd(&s2, CLAMP_TOL).unwrap();
    let pp = project_psd(&p1, CLAMP_TOL).unwrap();
    prop_assert!(max_abs(&(&pp - &p1)) <= 1e-12 * p1.norm().max(1.0));
    prop_assert!((&p1 - &p2).norm() <= (&s1 - &s2).norm() + 1e-12 * scale.max(1.0));
    prop_assert!(min_eig(&p1) >= -1e-12 * p1.norm().max(1.0));
    Ok(())
}

pub fn trace_one_projection(d: usize, seed: u64) -> Check {
    let v = gaussian(&mut rng(seed), d, d);
    let p = project_trace_one(&v);
    prop_assert!((p.trace() - 1.0).abs() <= 1e-13);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                prop_assert_eq!(p[(i, j)].to_bits(), v[(i, j)].to_bits());
            }
        }
    }
    let pp = project_trace_one(&p);
    prop_assert!(max_abs(&(&pp - &p)) <= 1e-15);
    Ok(())
}

pub fn simplex_qp_beats_vertices(m: usize, d: usize, seed: u64, mu1: f64) -> Check {
    let mut r = rng(seed);
    let blocks = (0..m).map(|_| random_state(&mut r, d)).collect();
    let x = bippt::ComponentStack::new(blocks).unwrap();
    let rho = random_state(&mut r, d);
    let (n, q) = gram(&x, &rho);
    let qp = SimplexQp { n, q, y_prev: random_simplex(&mut r, m), mu1 };
    let y = solve_simplex_qp(&qp, 1e-13).unwrap();
    prop_assert!((y.sum() - 1.0).abs() <= 1e-12 && y.iter().all(|&v| v >= 0.0));
    let best = qp.objective(&y);
    for i in 0..m {
        let e = DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 });
        prop_assert!(best <= qp.objective(&e) + 1e-12);
    }
    Ok(())
}

/// Two solves from the same seed agree bit for bit.
pub fn solver_determinism(seed: u64) -> Check {
    let mut r = rng(seed);
    let dims = SubsystemDims::qubits(3).unwrap();
    let rho = DensityMatrix::new(random_state(&mut r, 8), dims).unwrap();
    let problem = ModelProblem::with_all_bipartitions(rho, 10.0).unwrap();
    let params = SolverParams {
        max_iter: 40,
        ..SolverParams::defaults_for(10.0)
    };
    let a = solve(&problem, &params, init_point(&problem, seed).unwrap()).unwrap();
    let b = solve(&problem, &params, init_point(&problem, seed).unwrap()).unwrap();
    prop_assert_eq!(&a.trace, &b.trace);
    prop_assert_eq!(flatten(&a.point), flatten(&b.point));
    Ok(())
}
