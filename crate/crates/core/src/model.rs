//! The penalized splitting model: smooth fit `f(x, y) = ½‖ρ − Σ y_i x_i‖²`,
//! its partial gradients, and the augmented Lagrangian
//!
//! ```text
//! L_η = f + δ_X(x) + δ_Y(y) + δ_Z(p) + ξ/2 ‖p − z‖² + ⟨λ, Ax − z⟩ + η/2 ‖Ax − z‖²
//! ```

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{AuxStack, ComponentStack, OperatorA};
use crate::state::{check_density, Bipartition, DensityMatrix, Matrix};

/// Tolerance used when validating the target state.
pub const STATE_TOL: f64 = 1e-10;

/// Target state, bipartitions and penalty weight `ξ`.
#[derive(Clone, Debug)]
pub struct ModelProblem {
    rho: DensityMatrix,
    op: OperatorA,
    xi: f64,
}

impl ModelProblem {
    pub fn new(rho: DensityMatrix, parts: Vec<Bipartition>, xi: f64) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::Domain(format!("penalty weight must be positive, got {xi}")));
        }
        let report = check_density(rho.matrix(), STATE_TOL);
        if !report.symmetric || (report.trace - 1.0).abs() > STATE_TOL || !report.psd {
            return Err(Error::Domain(format!(
                "target is not a valid state (trace {}, min eigenvalue {:e})",
                report.trace, report.min_eigenvalue
            )));
        }
        let op = OperatorA::new(rho.dims().clone(), parts)?;
        Ok(Self { rho, op, xi })
    }

    /// One component per canonical bipartition (`2^(N-1) - 1` in total).
    pub fn with_all_bipartitions(rho: DensityMatrix, xi: f64) -> Result<Self> {
        let parts = crate::state::enumerate_bipartitions(rho.dims().len())?;
        Self::new(rho, parts, xi)
    }

    /// Same target and bipartitions with another penalty weight.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        Self::new(self.rho.clone(), self.op.bipartitions().to_vec(), xi)
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn operator(&self) -> &OperatorA {
        &self.op
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Number of components `m`.
    pub fn components(&self) -> usize {
        self.op.components()
    }

    pub fn side(&self) -> usize {
        self.rho.side()
    }
}

/// Full iterate `(y, x, p, z, λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualPoint {
    pub y: DVector<f64>,
    pub x: ComponentStack,
    pub p: AuxStack,
    pub z: AuxStack,
    pub lambda: AuxStack,
}

impl PrimalDualPoint {
    pub fn check_shape(&self, problem: &ModelProblem) -> Result<()> {
        let m = problem.components();
        let d = problem.side();
        let ok = self.y.len() == m
            && self.x.len() == m
            && self.x.side() == d
            && [&self.p, &self.z, &self.lambda]
                .iter()
                .all(|s| s.len() == m && s.side() == d);
        if !ok {
            return Err(Error::shape(format!(
                "point does not match a problem with {m} components of side {d}"
            )));
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("weights contain non-finite values".into()));
        }
        Ok(())
    }
}

fn check_weights(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::shape(format!(
            "{} weights for {} components",
            y.len(),
            x.len()
        )));
    }
    if x.side() != rho.nrows() {
        return Err(Error::shape(format!(
            "components of side {} against a target of side {}",
            x.side(),
            rho.nrows()
        )));
    }
    Ok(())
}

/// `Σ y_i x_i`.
pub fn mixture(x: &ComponentStack, y: &DVector<f64>) -> Matrix {
    let d = x.side();
    let mut out = Matrix::zeros(d, d);
    for (b, &w) in x.blocks.iter().zip(y.iter()) {
        for (o, v) in out.as_mut_slice().iter_mut().zip(b.as_slice()) {
            *o += w * v;
        }
    }
    out
}

/// `Σ y_i x_i − ρ`, the fit residual.
fn fit_residual(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> Matrix {
    mixture(x, y) - rho
}

/// `f(x, y) = ½‖ρ − Σ y_i x_i‖²_F`.
pub fn objective_f(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> Result<f64> {
    check_weights(x, y, rho)?;
    Ok(0.5 * fit_residual(x, y, rho).norm_squared())
}

/// `∇_x f`: block `i` is `y_i (Σ_j y_j x_j − ρ)`.
pub fn grad_f_x(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> Result<ComponentStack> {
    check_weights(x, y, rho)?;
    let r = fit_residual(x, y, rho);
    Ok(ComponentStack {
        blocks: y.iter().map(|&w| &r * w).collect(),
    })
}

/// Gram data of the weight subproblem: `N_ij = ⟨x_i, x_j⟩`, `q_i = ⟨x_i, ρ⟩`.
pub fn gram(x: &ComponentStack, rho: &Matrix) -> (DMatrix<f64>, DVector<f64>) {
    let m = x.len();
    let mut n = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = x.blocks[i].dot(&x.blocks[j]);
            n[(i, j)] = v;
            n[(j, i)] = v;
        }
    }
    let q = DVector::from_iterator(m, x.blocks.iter().map(|b| b.dot(rho)));
    (n, q)
}

/// `∇_y f = N y − q`.
pub fn grad_f_y(x: &ComponentStack, y: &DVector<f64>, rho: &Matrix) -> Result<DVector<f64>> {
    check_weights(x, y, rho)?;
    let (n, q) = gram(x, rho);
    Ok(n * y - q)
}

/// Which indicator set a point violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolatedSet {
    /// Weights off the simplex.
    Simplex,
    /// A component block is not PSD.
    Components,
    /// A transformed auxiliary block is not PSD or a copy block lacks unit trace.
    Auxiliary,
}

/// The augmented Lagrangian split into its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LagrangianTerms {
    pub f: f64,
    /// `ξ/2 ‖p − z‖²`.
    pub penalty: f64,
    /// `⟨λ, Ax − z⟩`.
    pub multiplier: f64,
    /// `η/2 ‖Ax − z‖²`.
    pub quadratic: f64,
    /// Set to the first violated indicator; `value()` is then `+∞`.
    pub infeasible: Option<ViolatedSet>,
}

impl LagrangianTerms {
    pub fn value(&self) -> f64 {
        if self.infeasible.is_some() {
            f64::INFINITY
        } else {
            self.f + self.penalty + self.multiplier + self.quadratic
        }
    }
}

/// Feasibility tolerances used by [`augmented_lagrangian`].
#[derive(Clone, Copy, Debug)]
pub struct FeasibilityTol {
    pub simplex: f64,
    pub psd: f64,
    pub trace: f64,
}

impl Default for FeasibilityTol {
    fn default() -> Self {
        Self {
            simplex: 1e-10,
            psd: 1e-9,
            trace: 1e-10,
        }
    }
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    SymmetricEigen::new(crate::state::symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn psd_within(b: &Matrix, tol: f64) -> bool {
    min_eigenvalue(b) >= -tol * b.norm().max(1.0)
}

/// `y ∈ Y` up to `tol.simplex`.
pub fn weights_feasible(y: &DVector<f64>, tol: FeasibilityTol) -> bool {
    (y.sum() - 1.0).abs() <= tol.simplex && y.iter().all(|&v| v >= -tol.simplex)
}

/// `x ∈ X`: every block PSD up to `tol.psd` (relative to its norm).
pub fn components_feasible(x: &ComponentStack, tol: FeasibilityTol) -> bool {
    x.blocks.iter().all(|b| psd_within(b, tol.psd))
}

/// `p ∈ Z`: transformed blocks PSD, copies PSD with unit trace.
pub fn aux_feasible(p: &AuxStack, tol: FeasibilityTol) -> bool {
    p.transformed.iter().all(|b| psd_within(b, tol.psd))
        && p.copies.iter().all(|b| (b.trace() - 1.0).abs() <= tol.trace)
}

/// Indicator check of `y ∈ Y`, `x ∈ X`, `p ∈ Z`, reporting the first
/// violated set.
pub fn violated_set(point: &PrimalDualPoint, tol: FeasibilityTol) -> Option<ViolatedSet> {
    if !weights_feasible(&point.y, tol) {
        Some(ViolatedSet::Simplex)
    } else if !components_feasible(&point.x, tol) {
        Some(ViolatedSet::Components)
    } else if !aux_feasible(&point.p, tol) {
        Some(ViolatedSet::Auxiliary)
    } else {
        None
    }
}

/// The four finite terms of `L_η` without the indicator check.
pub fn lagrangian_terms(point: &PrimalDualPoint, problem: &ModelProblem, eta: f64) -> Result<LagrangianTerms> {
    let rho = problem.rho().matrix();
    let f = objective_f(&point.x, &point.y, rho)?;
    let r = problem.operator().residual(&point.x, &point.z)?;
    Ok(LagrangianTerms {
        f,
        penalty: 0.5 * problem.xi() * point.p.dist_sq(&point.z),
        multiplier: point.lambda.dot(&r),
        quadratic: 0.5 * eta * r.norm_sq(),
        infeasible: None,
    })
}

/// `L_η` at `point`; infeasible points are flagged rather than rejected.
pub fn augmented_lagrangian(
    point: &PrimalDualPoint,
    problem: &ModelProblem,
    eta: f64,
) -> Result<LagrangianTerms> {
    point.check_shape(problem)?;
    let mut terms = lagrangian_terms(point, problem, eta)?;
    terms.infeasible = violated_set(point, FeasibilityTol::default());
    Ok(terms)
}

/// Hessian data of `f`: the weight block `N` (Gram matrix) and the largest
/// eigenvalue of the component block `M = (y yᵀ) ⊗ I`, which is `Σ y_i²`.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianBlocks {
    pub n: DMatrix<f64>,
    pub m_lambda_max: f64,
}

pub fn hessian_blocks(x: &ComponentStack, y: &DVector<f64>) -> HessianBlocks {
    let d = x.side();
    let (n, _) = gram(x, &Matrix::zeros(d, d));
    HessianBlocks {
        n,
        m_lambda_max: y.norm_squared(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_state, StateKind, SubsystemDims};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_sym(rng: &mut impl rand::Rng, d: usize) -> Matrix {
        let g = Matrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
        (&g + g.transpose()) * 0.5
    }

    #[test]
    fn exact_representation_has_zero_fit() {
        let dims = SubsystemDims::qubits(3).unwrap();
        let rho = make_state(&StateKind::Ghz3, &dims, 1.0).unwrap();
        let x = ComponentStack::new(vec![rho.matrix().clone(), Matrix::zeros(8, 8), Matrix::zeros(8, 8)])
            .unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(objective_f(&x, &y, rho.matrix()).unwrap(), 0.0);
    }

    #[test]
    fn zero_component_gives_quarter() {
        let rho = Matrix::identity(2, 2) / 2.0;
        let x = ComponentStack::zeros(1, 2);
        let y = DVector::from_element(1, 1.0);
        assert_eq!(objective_f(&x, &y, &rho).unwrap(), 0.25);
    }

    #[test]
    fn gradient_zero_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = random_sym(&mut rng, 4);
        let x = ComponentStack::new(vec![random_sym(&mut rng, 4), random_sym(&mut rng, 4)]).unwrap();
        let g = grad_f_x(&x, &DVector::zeros(2), &rho).unwrap();
        assert_eq!(g.norm(), 0.0);
        let x1 = ComponentStack::new(vec![rho.clone()]).unwrap();
        let g = grad_f_x(&x1, &DVector::from_element(1, 1.0), &rho).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn gram_structure() {
        let mut a = Matrix::zeros(2, 2);
        a[(0, 0)] = 2.0;
        let mut b = Matrix::zeros(2, 2);
        b[(1, 1)] = 3.0;
        let (n, _) = gram(&ComponentStack::new(vec![a.clone(), b]).unwrap(), &Matrix::zeros(2, 2));
        assert_eq!(n, DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]));
        let (n, _) = gram(&ComponentStack::new(vec![a.clone(), a]).unwrap(), &Matrix::zeros(2, 2));
        assert_eq!(n[(0, 0)], n[(0, 1)]);
        assert!(n.determinant().abs() < 1e-14);
    }

    #[test]
    fn hessian_block_eigenvalue() {
        let x = ComponentStack::zeros(3, 2);
        let h = hessian_blocks(&x, &DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(h.m_lambda_max, 1.0);
        let h = hessian_blocks(&x, &DVector::from_element(3, 1.0 / 3.0));
        assert!((h.m_lambda_max - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lagrangian_flags_infeasible_weights() {
        let dims = SubsystemDims::qubits(3).unwrap();
        let rho = make_state(&StateKind::Ghz3, &dims, 1.0).unwrap();
        let problem = ModelProblem::with_all_bipartitions(rho.clone(), 10.0).unwrap();
        let x = ComponentStack::new(vec![rho.matrix().clone(); 3]).unwrap();
        let ax = problem.operator().apply(&x).unwrap();
        let mut point = PrimalDualPoint {
            y: DVector::from_element(3, 1.0 / 3.0),
            x,
            p: ax.clone(),
            z: ax,
            lambda: AuxStack::zeros(3, 8),
        };
        let terms = augmented_lagrangian(&point, &problem, 21.0).unwrap();
        assert_eq!(terms.infeasible, None);
        assert!(terms.value().abs() < 1e-30);
        point.y[0] = 0.5;
        let terms = augmented_lagrangian(&point, &problem, 21.0).unwrap();
        assert_eq!(terms.infeasible, Some(ViolatedSet::Simplex));
        assert_eq!(terms.value(), f64::INFINITY);
    }

    #[test]
    fn invalid_target_rejected() {
        let dims = SubsystemDims::qubits(2).unwrap();
        let bad = DensityMatrix::new(Matrix::identity(4, 4), dims).unwrap();
        assert!(ModelProblem::with_all_bipartitions(bad, 1.0).is_err());
    }
}
