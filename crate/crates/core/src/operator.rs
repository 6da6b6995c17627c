//! Stacked solver variables and the block operator `A`.
//!
//! `A` maps the component stack `x = (α_1, …, α_m)` to
//! `(α_1^{Γ_1}, …, α_m^{Γ_m}, α_1, …, α_m)`: one partial transpose per
//! bipartition stacked over an identity. Every block is a permutation, so
//! `AᵀA = 2I`. The operator is never materialized on the solver path; the
//! explicit matrix exists only for verification on small systems.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::state::{enumerate_bipartitions, Bipartition, Matrix, SubsystemDims, TransposeMap};

/// Column-stacking vectorization.
pub fn vec(m: &Matrix) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`] for a `d × d` matrix.
pub fn mat(v: &DVector<f64>, d: usize) -> Result<Matrix> {
    if v.len() != d * d {
        return Err(Error::shape(format!(
            "vector of length {} cannot be reshaped to {d}x{d}",
            v.len()
        )));
    }
    Ok(Matrix::from_column_slice(d, d, v.as_slice()))
}

fn frob_dot(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

fn blocks_dot(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| frob_dot(x, y)).sum()
}

fn blocks_norm_sq(a: &[Matrix]) -> f64 {
    a.iter()
        .map(|m| m.as_slice().iter().map(|v| v * v).sum::<f64>())
        .sum()
}

fn blocks_dist_sq(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
        })
        .sum()
}

/// The component matrices `α_1, …, α_m`, one per bipartition.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStack {
    pub blocks: Vec<Matrix>,
}

impl ComponentStack {
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        if let Some(first) = blocks.first() {
            let d = first.nrows();
            if blocks.iter().any(|b| b.nrows() != d || b.ncols() != d) {
                return Err(Error::shape("component blocks must share one square side"));
            }
        }
        Ok(Self { blocks })
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            blocks: vec![Matrix::zeros(d, d); m],
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn side(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        blocks_dot(&self.blocks, &other.blocks)
    }

    pub fn norm_sq(&self) -> f64 {
        blocks_norm_sq(&self.blocks)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Self) -> f64 {
        blocks_dist_sq(&self.blocks, &other.blocks)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (o, v) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *o += s * v;
            }
        }
    }

    /// Concatenated column-stacked blocks.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.blocks.len() * self.side().pow(2));
        for b in &self.blocks {
            out.extend_from_slice(b.as_slice());
        }
        DVector::from_vec(out)
    }

    pub fn from_vector(v: &DVector<f64>, m: usize, d: usize) -> Result<Self> {
        if v.len() != m * d * d {
            return Err(Error::shape(format!(
                "vector length {} is not {m} blocks of {d}x{d}",
                v.len()
            )));
        }
        let blocks = v
            .as_slice()
            .chunks(d * d)
            .map(|c| Matrix::from_column_slice(d, d, c))
            .collect();
        Ok(Self { blocks })
    }
}

/// Auxiliary stack: `m` transformed blocks (PSD-constrained) and `m` copy
/// blocks (trace-constrained). Holds `z`, `p` and the multiplier `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxStack {
    pub transformed: Vec<Matrix>,
    pub copies: Vec<Matrix>,
}

impl AuxStack {
    pub fn new(transformed: Vec<Matrix>, copies: Vec<Matrix>) -> Result<Self> {
        if transformed.len() != copies.len() {
            return Err(Error::shape("transformed and copy halves differ in length"));
        }
        if let Some(first) = transformed.first() {
            let d = first.nrows();
            if transformed.iter().chain(&copies).any(|b| b.nrows() != d || b.ncols() != d) {
                return Err(Error::shape("auxiliary blocks must share one square side"));
            }
        }
        Ok(Self { transformed, copies })
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            transformed: vec![Matrix::zeros(d, d); m],
            copies: vec![Matrix::zeros(d, d); m],
        }
    }

    /// Number of components `m` (the stack has `2m` blocks).
    pub fn len(&self) -> usize {
        self.transformed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transformed.is_empty()
    }

    pub fn side(&self) -> usize {
        self.transformed.first().map_or(0, |b| b.nrows())
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Matrix> {
        self.transformed.iter().chain(&self.copies)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        blocks_dot(&self.transformed, &other.transformed) + blocks_dot(&self.copies, &other.copies)
    }

    pub fn norm_sq(&self) -> f64 {
        blocks_norm_sq(&self.transformed) + blocks_norm_sq(&self.copies)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Self) -> f64 {
        blocks_dist_sq(&self.transformed, &other.transformed)
            + blocks_dist_sq(&self.copies, &other.copies)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            transformed: self.transformed.iter().map(|b| b * s).collect(),
            copies: self.copies.iter().map(|b| b * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self
            .transformed
            .iter_mut()
            .chain(self.copies.iter_mut())
            .zip(other.transformed.iter().chain(&other.copies))
        {
            for (o, v) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *o += s * v;
            }
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut out = self.scaled(a);
        out.axpy(b, other);
        out
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(2 * self.len() * self.side().pow(2));
        for b in self.blocks() {
            out.extend_from_slice(b.as_slice());
        }
        DVector::from_vec(out)
    }

    pub fn from_vector(v: &DVector<f64>, m: usize, d: usize) -> Result<Self> {
        if v.len() != 2 * m * d * d {
            return Err(Error::shape(format!(
                "vector length {} is not {} blocks of {d}x{d}",
                v.len(),
                2 * m
            )));
        }
        let mut blocks: Vec<Matrix> = v
            .as_slice()
            .chunks(d * d)
            .map(|c| Matrix::from_column_slice(d, d, c))
            .collect();
        let copies = blocks.split_off(m);
        Ok(Self {
            transformed: blocks,
            copies,
        })
    }
}

/// The block constraint operator, defined by the subsystem dims and the
/// ordered bipartitions.
#[derive(Clone, Debug)]
pub struct OperatorA {
    dims: SubsystemDims,
    parts: Vec<Bipartition>,
    maps: Vec<TransposeMap>,
}

impl OperatorA {
    pub fn new(dims: SubsystemDims, parts: Vec<Bipartition>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::shape("operator needs at least one bipartition"));
        }
        let maps = parts
            .iter()
            .map(|p| TransposeMap::new(&dims, p))
            .collect::<Result<_>>()?;
        Ok(Self { dims, parts, maps })
    }

    /// Operator over every canonical bipartition of `dims`.
    pub fn all_bipartitions(dims: SubsystemDims) -> Result<Self> {
        let parts = enumerate_bipartitions(dims.len())?;
        Self::new(dims, parts)
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn bipartitions(&self) -> &[Bipartition] {
        &self.parts
    }

    pub fn maps(&self) -> &[TransposeMap] {
        &self.maps
    }

    /// Component count `m`.
    pub fn components(&self) -> usize {
        self.parts.len()
    }

    pub fn side(&self) -> usize {
        self.dims.total()
    }

    fn check_components(&self, x: &ComponentStack) -> Result<()> {
        if x.len() != self.components() || x.blocks.iter().any(|b| b.nrows() != self.side() || b.ncols() != self.side()) {
            return Err(Error::shape(format!(
                "expected {} components of side {}",
                self.components(),
                self.side()
            )));
        }
        Ok(())
    }

    fn check_aux(&self, v: &AuxStack) -> Result<()> {
        if v.len() != self.components()
            || v.blocks().any(|b| b.nrows() != self.side() || b.ncols() != self.side())
        {
            return Err(Error::shape(format!(
                "expected {} auxiliary blocks of side {}",
                2 * self.components(),
                self.side()
            )));
        }
        Ok(())
    }

    /// `Ax`: transformed half `Γ_i(x_i)`, copy half `x_i`.
    pub fn apply(&self, x: &ComponentStack) -> Result<AuxStack> {
        self.check_components(x)?;
        Ok(AuxStack {
            transformed: self.maps.iter().zip(&x.blocks).map(|(g, b)| g.apply(b)).collect(),
            copies: x.blocks.clone(),
        })
    }

    /// `Aᵀv`: block `i` is `Γ_i(v.transformed_i) + v.copies_i`.
    pub fn adjoint(&self, v: &AuxStack) -> Result<ComponentStack> {
        self.check_aux(v)?;
        let blocks = self
            .maps
            .iter()
            .zip(v.transformed.iter().zip(&v.copies))
            .map(|(g, (t, c))| {
                let mut out = c.clone();
                g.apply_add(t, 1.0, &mut out);
                out
            })
            .collect();
        Ok(ComponentStack { blocks })
    }

    /// `Ax - z`.
    pub fn residual(&self, x: &ComponentStack, z: &AuxStack) -> Result<AuxStack> {
        let mut ax = self.apply(x)?;
        ax.axpy(-1.0, z);
        Ok(ax)
    }

    /// Explicit `(2 m d²) × (m d²)` matrix of `A` in column-stacked coordinates.
    pub fn materialize(&self) -> Matrix {
        let m = self.components();
        let d = self.side();
        let dd = d * d;
        let mut a = Matrix::zeros(2 * m * dd, m * dd);
        for (blk, map) in self.maps.iter().enumerate() {
            for j in 0..d {
                for i in 0..d {
                    // transformed row (i, j) reads source entry map.source(i, j)
                    let (r, c) = map.source(i, j);
                    a[(blk * dd + j * d + i, blk * dd + c * d + r)] = 1.0;
                    a[((m + blk) * dd + j * d + i, blk * dd + j * d + i)] = 1.0;
                }
            }
        }
        a
    }
}

/// Outcome of [`verify_operator_identity`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorCheck {
    pub holds: bool,
    pub max_deviation: f64,
    /// Whether the check materialized `A` (otherwise random probes were used).
    pub explicit: bool,
}

/// Largest side for which `A` is materialized.
pub const EXPLICIT_CHECK_MAX_SIDE: usize = 16;

/// Check `AᵀA = 2I`. Materializes `A` for `d <= 16`; larger systems are probed
/// with `probes` random stacks through the implicit operator.
pub fn verify_operator_identity(
    dims: &SubsystemDims,
    parts: &[Bipartition],
    probes: usize,
    seed: u64,
) -> Result<OperatorCheck> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let op = OperatorA::new(dims.clone(), parts.to_vec())?;
    let d = op.side();
    let m = op.components();
    let max_deviation = if d <= EXPLICIT_CHECK_MAX_SIDE {
        let a = op.materialize();
        let ata = a.transpose() * &a;
        let n = ata.nrows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (ata[(i, j)] - if i == j { 2.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes.max(1) {
            let x = ComponentStack {
                blocks: (0..m)
                    .map(|_| Matrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng)))
                    .collect(),
            };
            let back = op.adjoint(&op.apply(&x)?)?;
            for (b, xb) in back.blocks.iter().zip(&x.blocks) {
                for (u, v) in b.iter().zip(xb.iter()) {
                    worst = worst.max((u - 2.0 * v).abs());
                }
            }
        }
        worst
    };
    Ok(OperatorCheck {
        holds: max_deviation <= 1e-12,
        max_deviation,
        explicit: d <= EXPLICIT_CHECK_MAX_SIDE,
    })
}
