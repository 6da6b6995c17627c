//! Subproblem kernels of the splitting scheme: PSD and trace projections,
//! the simplex-constrained weight QP, and the closed-form `x`, `p`, `z`
//! updates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::grad_f_x;
use crate::operator::{AuxStack, ComponentStack, OperatorA};
use crate::state::{symmetrize, Matrix};

/// Default eigenvalue clamp used by the solver.
pub const CLAMP_TOL: f64 = 1e-12;

/// Blocks at least this large are projected in parallel.
const PARALLEL_SIDE: usize = 48;

/// Euclidean projection onto the PSD cone: `U max(Σ, 0) Uᵀ`.
///
/// The input is symmetrized first. Eigenvalues in `[-clamp_tol, 0)` are
/// dropped like any other negative eigenvalue; inputs whose spectrum is
/// entirely `>= -clamp_tol` are returned unchanged.
pub fn project_psd(s: &Matrix, clamp_tol: f64) -> Result<Matrix> {
    if !s.is_square() {
        return Err(Error::shape("PSD projection needs a square matrix"));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "PSD projection input of side {} has non-finite entries",
            s.nrows()
        )));
    }
    let sym = symmetrize(s);
    let d = sym.nrows();
    // Positive definite inputs are their own projection; Cholesky is far
    // cheaper than the eigendecomposition.
    if sym.clone().cholesky().is_some() {
        return Ok(sym);
    }
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!(
            "eigendecomposition did not converge (side {d}, ||S||_F = {:e})",
            sym.norm()
        ))
    })?;
    let vals = &eig.eigenvalues;
    if vals.iter().all(|&v| v >= -clamp_tol) {
        return Ok(sym);
    }
    let negatives: Vec<usize> = (0..d).filter(|&k| vals[k] < 0.0).collect();
    let positives: Vec<usize> = (0..d).filter(|&k| vals[k] > 0.0).collect();
    if positives.is_empty() {
        return Ok(Matrix::zeros(d, d));
    }
    // Reconstruct from whichever side of the spectrum is smaller.
    let factor = |idx: &[usize]| -> Matrix {
        Matrix::from_fn(d, idx.len(), |i, c| {
            eig.eigenvectors[(i, idx[c])] * vals[idx[c]].abs().sqrt()
        })
    };
    if positives.len() <= negatives.len() {
        let b = factor(&positives);
        Ok(&b * b.transpose())
    } else {
        let b = factor(&negatives);
        Ok(sym + &b * b.transpose())
    }
}

/// Nearest matrix with unit trace: `V + (1 − tr V)/d · I`.
/// Off-diagonal entries are untouched.
pub fn project_trace_one(v: &Matrix) -> Matrix {
    let d = v.nrows();
    let shift = (1.0 - v.trace()) / d as f64;
    let mut out = v.clone();
    for i in 0..d {
        out[(i, i)] += shift;
    }
    out
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len();
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    DVector::from_iterator(n, v.iter().map(|&u| (u - theta).max(0.0)))
}

/// `min ½yᵀNy − qᵀy + μ₁/2 ‖y − y_prev‖²` over the simplex.
#[derive(Clone, Debug)]
pub struct SimplexQp {
    pub n: DMatrix<f64>,
    pub q: DVector<f64>,
    pub y_prev: DVector<f64>,
    pub mu1: f64,
}

impl SimplexQp {
    pub fn objective(&self, y: &DVector<f64>) -> f64 {
        let diff = y - &self.y_prev;
        0.5 * y.dot(&(&self.n * y)) - self.q.dot(y) + 0.5 * self.mu1 * diff.norm_squared()
    }

    /// Gradient `(N + μ₁I) y − q − μ₁ y_prev`.
    pub fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.n * y + y * self.mu1 - &self.q - &self.y_prev * self.mu1
    }

    fn validate(&self) -> Result<()> {
        let m = self.q.len();
        if self.n.nrows() != m || self.n.ncols() != m || self.y_prev.len() != m {
            return Err(Error::shape("weight QP data have inconsistent sizes"));
        }
        if m == 0 {
            return Err(Error::shape("weight QP has no variables"));
        }
        if !(self.mu1 > 0.0) {
            return Err(Error::Domain(format!("mu1 must be positive, got {}", self.mu1)));
        }
        if self.n.iter().chain(self.q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("weight QP data are not finite".into()));
        }
        let min_eig = SymmetricEigen::new(symmetrize(&self.n))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 * self.n.norm().max(1.0) {
            return Err(Error::Model(format!(
                "Gram matrix is not PSD (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(())
    }
}

/// Primal active-set method over the faces of the simplex.
///
/// The working set holds indices pinned at zero. Each pass solves the
/// equality-constrained QP on the free indices; blocking constraints are
/// added by a ratio test and the most negative multiplier is released.
/// Ties go to the lowest index.
pub fn solve_simplex_qp(qp: &SimplexQp, tol: f64) -> Result<DVector<f64>> {
    qp.validate()?;
    let m = qp.q.len();
    if m == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let mut h = symmetrize(&qp.n);
    for i in 0..m {
        h[(i, i)] += qp.mu1;
    }
    let c = &qp.q + &qp.y_prev * qp.mu1;

    let mut y = project_simplex(&qp.y_prev);
    let mut pinned: Vec<bool> = y.iter().map(|&v| v <= 0.0).collect();
    if pinned.iter().all(|&p| p) {
        y = DVector::from_element(m, 1.0 / m as f64);
        pinned = vec![false; m];
    }

    let max_iter = 50 * m + 50;
    for _ in 0..max_iter {
        let free: Vec<usize> = (0..m).filter(|&i| !pinned[i]).collect();
        let k = free.len();
        let mut kkt = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                kkt[(a, b)] = h[(i, j)];
            }
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
            rhs[a] = c[i];
        }
        rhs[k] = 1.0;
        let sol = kkt
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular KKT system in weight QP".into()))?;
        let nu = sol[k];

        // Ratio test toward the face minimizer.
        let mut alpha = 1.0;
        let mut blocking = None;
        for (a, &i) in free.iter().enumerate() {
            let step = sol[a] - y[i];
            if sol[a] < 0.0 && step < 0.0 {
                let ratio = -y[i] / step;
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        for (a, &i) in free.iter().enumerate() {
            y[i] += alpha * (sol[a] - y[i]);
        }
        if let Some(i) = blocking {
            y[i] = 0.0;
            pinned[i] = true;
            continue;
        }

        // Face optimum reached: check multipliers of pinned indices.
        let grad = &h * &y - &c;
        let mut release: Option<(usize, f64)> = None;
        for i in (0..m).filter(|&i| pinned[i]) {
            let pi = grad[i] + nu;
            if pi < -tol && release.is_none_or(|(_, best)| pi < best) {
                release = Some((i, pi));
            }
        }
        match release {
            Some((i, _)) => pinned[i] = false,
            None => return Ok(clean_weights(y)),
        }
    }
    Err(Error::Numerical(format!(
        "weight QP active set did not settle within {max_iter} passes"
    )))
}

/// Clamp round-off negatives and renormalize onto the simplex.
pub fn clean_weights(mut y: DVector<f64>) -> DVector<f64> {
    for v in y.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s = y.sum();
    if s > 0.0 {
        y /= s;
    } else {
        y.fill(1.0 / y.len() as f64);
    }
    y
}

fn project_blocks(blocks: Vec<Matrix>, kernel: impl Fn(&Matrix) -> Result<Matrix> + Sync) -> Result<Vec<Matrix>> {
    if blocks.first().is_some_and(|b| b.nrows() >= PARALLEL_SIDE) {
        blocks.par_iter().map(&kernel).collect()
    } else {
        blocks.iter().map(kernel).collect()
    }
}

/// Projection onto `Z`: transformed blocks onto the PSD cone, copy blocks onto
/// the unit-trace plane.
pub fn project_z(v: AuxStack, clamp_tol: f64) -> Result<AuxStack> {
    let transformed = project_blocks(v.transformed, |b| project_psd(b, clamp_tol))?;
    let copies = v.copies.iter().map(project_trace_one).collect();
    Ok(AuxStack { transformed, copies })
}

/// Projection of every component block onto the PSD cone.
pub fn project_components(x: ComponentStack, clamp_tol: f64) -> Result<ComponentStack> {
    Ok(ComponentStack {
        blocks: project_blocks(x.blocks, |b| project_psd(b, clamp_tol))?,
    })
}

/// Linearized `x`-step. With `AᵀA = 2I` the subproblem is a projection of
///
/// ```text
/// g = (−Aᵀλ + μ₂ x_prev + η Aᵀz − ∇_x f(x_prev, y)) / (2η + μ₂)
/// ```
///
/// onto the PSD cone, block by block.
#[allow(clippy::too_many_arguments)]
pub fn x_update(
    op: &OperatorA,
    rho: &Matrix,
    x_prev: &ComponentStack,
    y_new: &DVector<f64>,
    lambda: &AuxStack,
    z: &AuxStack,
    eta: f64,
    mu2: f64,
    clamp_tol: f64,
) -> Result<ComponentStack> {
    let grad = grad_f_x(x_prev, y_new, rho)?;
    let mut g = op.adjoint(&z.combine(eta, lambda, -1.0))?;
    g.axpy(mu2, x_prev);
    g.axpy(-1.0, &grad);
    let g = g.scaled(1.0 / (2.0 * eta + mu2));
    project_components(g, clamp_tol)
}

/// `p`-step. `ξ/2‖p − z‖² + μ₃/2‖p − p_prev‖²` equals `(ξ+μ₃)/2 ‖p − v‖²`
/// plus a constant with `v = (ξ z + μ₃ p_prev)/(ξ + μ₃)`, so the step is the
/// projection of `v` onto `Z`.
pub fn p_update(p_prev: &AuxStack, z: &AuxStack, xi: f64, mu3: f64, clamp_tol: f64) -> Result<AuxStack> {
    let v = z.combine(xi / (xi + mu3), p_prev, mu3 / (xi + mu3));
    project_z(v, clamp_tol)
}

/// `z`-step from its first-order condition:
/// `z = (λ + η Ax + ξ p) / (η + ξ)`, where `ax = A x_new`.
pub fn z_update(ax: &AuxStack, p_new: &AuxStack, lambda: &AuxStack, eta: f64, xi: f64) -> AuxStack {
    let s = 1.0 / (eta + xi);
    let mut z = lambda.scaled(s);
    z.axpy(eta * s, ax);
    z.axpy(xi * s, p_new);
    z
}
