#![allow(dead_code)]

use bippt::model::PrimalDualPoint;
use bippt::{AuxStack, ComponentStack, Matrix};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn random_sym(rng: &mut impl Rng, d: usize) -> Matrix {
    let g = gaussian(rng, d, d);
    (&g + g.transpose()) * 0.5
}

/// `G Gᵀ` with `G` of size `d × rank`.
pub fn random_psd(rng: &mut impl Rng, d: usize, rank: usize) -> Matrix {
    let g = gaussian(rng, d, rank);
    &g * g.transpose()
}

pub fn random_state(rng: &mut impl Rng, d: usize) -> Matrix {
    let w = random_psd(rng, d, d);
    let t = w.trace();
    w / t
}

pub fn random_simplex(rng: &mut impl Rng, m: usize) -> DVector<f64> {
    // Normalized exponentials are uniform on the simplex.
    let v = DVector::from_fn(m, |_, _| -rng.random::<f64>().max(1e-300).ln());
    let s = v.sum();
    v / s
}

pub fn random_stack(rng: &mut impl Rng, m: usize, d: usize) -> ComponentStack {
    ComponentStack::new((0..m).map(|_| gaussian(rng, d, d)).collect()).unwrap()
}

pub fn random_aux(rng: &mut impl Rng, m: usize, d: usize) -> AuxStack {
    AuxStack::new(
        (0..m).map(|_| gaussian(rng, d, d)).collect(),
        (0..m).map(|_| gaussian(rng, d, d)).collect(),
    )
    .unwrap()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn min_eig(m: &Matrix) -> f64 {
    nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Every iterate-level field of a point, flattened.
pub fn flatten(p: &PrimalDualPoint) -> Vec<f64> {
    let mut out: Vec<f64> = p.y.iter().copied().collect();
    out.extend(p.x.to_vector().iter());
    out.extend(p.p.to_vector().iter());
    out.extend(p.z.to_vector().iter());
    out.extend(p.lambda.to_vector().iter());
    out
}
pub mod invariants;
