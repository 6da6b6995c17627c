//! Objective, gradients and augmented Lagrangian against independent oracles.

mod common;

use bippt::model::{
    augmented_lagrangian, grad_f_x, grad_f_y, gram, hessian_blocks, lagrangian_terms, objective_f,
    PrimalDualPoint, ViolatedSet,
};
use bippt::prox::project_z;
use bippt::solver::{init_point, step, SolverParams};
use bippt::{make_state, ComponentStack, Matrix, ModelProblem, StateKind, SubsystemDims};
use common::*;
use nalgebra::DVector;

/// `½‖ρ − Σ yᵢ xᵢ‖²` written out entry by entry.
fn f_oracle(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> f64 {
    let d = rho.nrows();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mix: f64 = x.blocks.iter().zip(y.iter()).map(|(b, w)| w * b[(i, j)]).sum();
            s += (rho[(i, j)] - mix).powi(2);
        }
    }
    0.5 * s
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[test]
fn objective_examples() {
    let rho = Matrix::identity(2, 2) * 0.5;
    let x = ComponentStack::new(vec![Matrix::zeros(2, 2)]).unwrap();
    assert_eq!(objective_f(&x, &DVector::from_element(1, 1.0), &rho).unwrap(), 0.25);

    let mut r = rng(1);
    let rho = random_state(&mut r, 8);
    let x = ComponentStack::new(vec![rho.clone(), random_state(&mut r, 8), random_state(&mut r, 8)]).unwrap();
    let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    assert_eq!(objective_f(&x, &y, &rho).unwrap(), 0.0);
    for seed in 0..10 {
        let mut r = rng(seed);
        let x = random_stack(&mut r, 3, 4);
        let y = random_simplex(&mut r, 3);
        let rho = random_state(&mut r, 4);
        assert!(rel_err(objective_f(&x, &y, &rho).unwrap(), f_oracle(&x, &y, &rho)) <= 1e-13);
    }
}

#[test]
fn gradient_examples() {
    let mut r = rng(2);
    let rho = random_state(&mut r, 4);
    let x = random_stack(&mut r, 3, 4);
    let g = grad_f_x(&x, &DVector::zeros(3), &rho).unwrap();
    assert_eq!(g.norm(), 0.0);
    let one = ComponentStack::new(vec![rho.clone()]).unwrap();
    assert_eq!(grad_f_x(&one, &DVector::from_element(1, 1.0), &rho).unwrap().norm(), 0.0);
}

#[test]
fn gradients_match_central_differences() {
    // Twenty random three-qubit instances, step 1e-6.
    let h = 1e-6;
    for seed in 0..20 {
        let mut r = rng(100 + seed);
        let d = 8;
        let rho = random_state(&mut r, d);
        let x = ComponentStack::new((0..3).map(|_| random_state(&mut r, d)).collect()).unwrap();
        let y = random_simplex(&mut r, 3);

        let gy = grad_f_y(&x, &y, &rho).unwrap();
        for i in 0..3 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[i] += h;
            ym[i] -= h;
            let fd = (f_oracle(&x, &yp, &rho) - f_oracle(&x, &ym, &rho)) / (2.0 * h);
            assert!(rel_err(gy[i], fd) <= 1e-6, "seed {seed} y[{i}]: {} vs {fd}", gy[i]);
        }

        // Full gradient against a directional difference plus a sample of
        // single entries.
        let gx = grad_f_x(&x, &y, &rho).unwrap();
        let dir = random_stack(&mut r, 3, d);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp.axpy(h, &dir);
        xm.axpy(-h, &dir);
        let fd = (f_oracle(&xp, &y, &rho) - f_oracle(&xm, &y, &rho)) / (2.0 * h);
        assert!(rel_err(gx.dot(&dir), fd) <= 1e-6, "seed {seed}: {} vs {fd}", gx.dot(&dir));
        for (b, i, j) in [(0, 0, 0), (1, 3, 5), (2, 7, 2), (0, 6, 6)] {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp.blocks[b][(i, j)] += h;
            xm.blocks[b][(i, j)] -= h;
            let fd = (f_oracle(&xp, &y, &rho) - f_oracle(&xm, &y, &rho)) / (2.0 * h);
            let g = gx.blocks[b][(i, j)];
            assert!((g - fd).abs() <= 1e-6 * g.abs().max(1e-3), "seed {seed}: {g} vs {fd}");
        }
    }
}

#[test]
fn gram_examples() {
    let e = |i: usize, j: usize| {
        let mut m = Matrix::zeros(3, 3);
        m[(i, j)] = 2.0;
        m
    };
    let x = ComponentStack::new(vec![e(0, 0), e(1, 2), e(2, 1)]).unwrap();
    let (n, q) = gram(&x, &Matrix::identity(3, 3));
    assert_eq!(n, nalgebra::DMatrix::from_diagonal(&DVector::from_element(3, 4.0)));
    assert_eq!(q.as_slice(), &[2.0, 0.0, 0.0]);

    let mut r = rng(3);
    let a = random_state(&mut r, 4);
    let x = ComponentStack::new(vec![a.clone(), a]).unwrap();
    let (n, _) = gram(&x, &Matrix::zeros(4, 4));
    assert_eq!(n[(0, 0)], n[(0, 1)]);
    assert!(n.determinant().abs() <= 1e-14);
}

#[test]
fn hessian_weight_bound() {
    let x = random_stack(&mut rng(4), 3, 2);
    let hb = hessian_blocks(&x, &DVector::from_vec(vec![1.0, 0.0, 0.0]));
    assert_eq!(hb.m_lambda_max, 1.0);
    let hb = hessian_blocks(&x, &DVector::from_element(3, 1.0 / 3.0));
    assert!((hb.m_lambda_max - 1.0 / 3.0).abs() <= 1e-15);
    for seed in 0..20 {
        let y = random_simplex(&mut rng(seed), 5);
        assert!(hessian_blocks(&random_stack(&mut rng(seed), 5, 2), &y).m_lambda_max <= 1.0);
    }
}

fn ghz_problem(l: f64, xi: f64) -> ModelProblem {
    let rho = make_state(&StateKind::Ghz3, &SubsystemDims::qubits(3).unwrap(), l).unwrap();
    ModelProblem::with_all_bipartitions(rho, xi).unwrap()
}

#[test]
fn lagrangian_reduces_to_f_on_consistent_points() {
    let problem = ghz_problem(1.0, 10.0);
    let mut r = rng(5);
    let x = ComponentStack::new((0..3).map(|_| random_state(&mut r, 8)).collect()).unwrap();
    let ax = problem.operator().apply(&x).unwrap();
    let point = PrimalDualPoint {
        y: random_simplex(&mut r, 3),
        x,
        p: ax.clone(),
        z: ax.clone(),
        lambda: bippt::AuxStack::zeros(3, 8),
    };
    let terms = lagrangian_terms(&point, &problem, 21.0).unwrap();
    let f = objective_f(&point.x, &point.y, problem.rho().matrix()).unwrap();
    assert_eq!(terms.f, f);
    assert_eq!(terms.penalty + terms.multiplier + terms.quadratic, 0.0);
}

#[test]
fn infeasible_points_are_flagged() {
    let problem = ghz_problem(1.0, 10.0);
    let mut point = init_point(&problem, 0).unwrap();
    assert!(augmented_lagrangian(&point, &problem, 21.0).unwrap().value().is_finite());
    point.y[0] += 0.5;
    let t = augmented_lagrangian(&point, &problem, 21.0).unwrap();
    assert_eq!(t.infeasible, Some(ViolatedSet::Simplex));
    assert_eq!(t.value(), f64::INFINITY);
    let mut point = init_point(&problem, 0).unwrap();
    point.x.blocks[1][(0, 0)] = -1.0;
    assert_eq!(augmented_lagrangian(&point, &problem, 21.0).unwrap().infeasible, Some(ViolatedSet::Components));
    let mut point = init_point(&problem, 0).unwrap();
    point.p.copies[2][(3, 3)] += 0.1;
    assert_eq!(augmented_lagrangian(&point, &problem, 21.0).unwrap().infeasible, Some(ViolatedSet::Auxiliary));
}

/// With `λ = ξ(z − p)`, `L_η = f + ξ/2 ‖Ax − p‖² + (η − ξ)/2 ‖Ax − z‖²`.
fn nonnegative_form(point: &PrimalDualPoint, problem: &ModelProblem, eta: f64) -> f64 {
    let xi = problem.xi();
    let ax = problem.operator().apply(&point.x).unwrap();
    let f = objective_f(&point.x, &point.y, problem.rho().matrix()).unwrap();
    f + 0.5 * xi * ax.dist_sq(&point.p) + 0.5 * (eta - xi) * ax.dist_sq(&point.z)
}

#[test]
fn lagrangian_identity_on_arbitrary_points() {
    for seed in 0..10 {
        let problem = ghz_problem(0.5, 7.0);
        let mut r = rng(seed);
        let x = ComponentStack::new((0..3).map(|_| random_state(&mut r, 8)).collect()).unwrap();
        let p = project_z(random_aux(&mut r, 3, 8), 1e-12).unwrap();
        let z = random_aux(&mut r, 3, 8);
        let lambda = z.combine(7.0, &p, -7.0);
        let point = PrimalDualPoint { y: random_simplex(&mut r, 3), x, p, z, lambda };
        let eta = 15.0;
        let direct = augmented_lagrangian(&point, &problem, eta).unwrap().value();
        let form = nonnegative_form(&point, &problem, eta);
        assert!((direct - form).abs() <= 1e-10 * direct.abs().max(1.0), "{direct} vs {form}");
        assert!(direct >= 0.0);
    }
}

#[test]
fn lagrangian_identity_along_iterates() {
    let problem = ghz_problem(1.0, 100.0);
    let params = SolverParams::defaults_for(100.0);
    let mut point = init_point(&problem, 11).unwrap();
    for k in 0..200 {
        let (next, rec) = step(&point, &params, &problem).unwrap();
        point = next;
        let form = nonnegative_form(&point, &problem, params.eta);
        assert!(
            (rec.aug_lagrangian - form).abs() <= 1e-10 * form.abs().max(1.0),
            "iteration {k}: {} vs {form}",
            rec.aug_lagrangian
        );
    }
}
