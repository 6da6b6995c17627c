//! Multipartite density matrices: subsystem-aware indexing, partial
//! transposes over subsystem subsets, bipartition enumeration and the
//! W/GHZ test-state families with white noise.
//!
//! Multi-indices follow Kronecker order: subsystem 1 is the slowest-varying
//! digit, so a product vector `v1 ⊗ v2 ⊗ … ⊗ vN` has flat index
//! `Σ i_k · stride_k` with `stride_k = n_{k+1} ⋯ n_N`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative tolerance used for the symmetry invariant of [`DensityMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Local dimensions `(n1, …, nN)` of a multipartite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemDims {
    dims: Vec<usize>,
    total: usize,
}

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Domain("subsystem list is empty".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::Domain(format!(
                "subsystem dimension {bad} rejected: every subsystem needs dimension >= 2"
            )));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Domain("total dimension overflows".into()))?;
        Ok(Self { dims, total })
    }

    /// `n` qubits, i.e. dims `(2, …, 2)`.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn uniform(local: usize, n: usize) -> Result<Self> {
        Self::new(vec![local; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of subsystems `N`.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Product of the local dimensions.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Stride of each subsystem digit in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat index of the product basis vector with the given digits.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.strides())
            .map(|(&d, s)| d * s)
            .sum()
    }

    pub fn check_side(&self, side: usize) -> Result<()> {
        if side != self.total {
            return Err(Error::shape(format!(
                "matrix side {side} does not match subsystem product {} of {:?}",
                self.total, self.dims
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for SubsystemDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Real symmetric matrix annotated with its subsystem structure.
///
/// Only symmetry is enforced on construction. Unit trace and positivity are
/// reported by [`check_density`], since solver iterates routinely violate them.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: Matrix,
    dims: SubsystemDims,
}

impl DensityMatrix {
    pub fn new(data: Matrix, dims: SubsystemDims) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::shape(format!(
                "density matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        dims.check_side(data.nrows())?;
        let asym = asymmetry(&data);
        if asym > SYMMETRY_TOL * data.norm().max(1.0) {
            return Err(Error::Domain(format!(
                "matrix is not symmetric (||M - M^T|| = {asym:e})"
            )));
        }
        Ok(Self { data, dims })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dims: SubsystemDims) -> Self {
        let d = dims.total();
        Self {
            data: Matrix::identity(d, d) / d as f64,
            dims,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }
}

/// A cut of the subsystems `{1, …, N}` into `left` and its complement.
///
/// The stored side is canonical: `|left| <= N/2`, and when `|left| = N/2`
/// the set contains subsystem 1. Transposing either side gives PSD-equivalent
/// results for symmetric input, so one representative per cut is enough.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bipartition {
    left: Vec<usize>,
    parties: usize,
}

impl Bipartition {
    /// Build the canonical bipartition for the given side (1-based indices).
    pub fn new(left: &[usize], parties: usize) -> Result<Self> {
        if parties < 2 {
            return Err(Error::InvalidArity(parties));
        }
        let mut set: Vec<usize> = left.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() || set.len() >= parties {
            return Err(Error::Domain(format!(
                "bipartition side {left:?} must be a nonempty proper subset of 1..={parties}"
            )));
        }
        if set[0] == 0 || *set.last().unwrap() > parties {
            return Err(Error::Domain(format!(
                "bipartition indices {left:?} out of range 1..={parties}"
            )));
        }
        let complement = |s: &[usize]| -> Vec<usize> {
            (1..=parties).filter(|k| !s.contains(k)).collect()
        };
        let canonical = if 2 * set.len() > parties || (2 * set.len() == parties && set[0] != 1) {
            complement(&set)
        } else {
            set
        };
        Ok(Self {
            left: canonical,
            parties,
        })
    }

    /// Sorted 1-based subsystem indices that are transposed.
    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    /// Whether 1-based subsystem `k` lies on the transposed side.
    pub fn contains(&self, k: usize) -> bool {
        self.left.binary_search(&k).is_ok()
    }

    /// Short label such as `A`, `BC` (letters for up to 26 parties).
    pub fn label(&self) -> String {
        if self.parties <= 26 {
            self.left
                .iter()
                .map(|&k| (b'A' + (k - 1) as u8) as char)
                .collect()
        } else {
            let parts: Vec<String> = self.left.iter().map(|k| k.to_string()).collect();
            format!("{{{}}}", parts.join(","))
        }
    }
}

impl std::fmt::Display for Bipartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.left.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All `2^(N-1) - 1` canonical bipartitions of `N` subsystems, ordered by
/// `(|left|, left)`.
pub fn enumerate_bipartitions(parties: usize) -> Result<Vec<Bipartition>> {
    if parties < 2 {
        return Err(Error::InvalidArity(parties));
    }
    if parties > 30 {
        return Err(Error::Domain(format!("{parties} subsystems is too many to enumerate")));
    }
    let mut out = Vec::with_capacity((1usize << (parties - 1)) - 1);
    for size in 1..=parties / 2 {
        let mut combo: Vec<usize> = (1..=size).collect();
        loop {
            if 2 * size < parties || combo[0] == 1 {
                out.push(Bipartition {
                    left: combo.clone(),
                    parties,
                });
            }
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && combo[i - 1] == parties - size + i {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Precomputed index map for one partial transpose.
///
/// Each flat index splits as `i = s[i] + r[i]`, where `s` collects the digits
/// of transposed subsystems and `r` the rest. The transpose then reads
/// `M^Γ[(i, j)] = M[(s[j] + r[i], s[i] + r[j])]`.
#[derive(Clone, Debug)]
pub struct TransposeMap {
    swapped: Vec<usize>,
    rest: Vec<usize>,
}

impl TransposeMap {
    pub fn new(dims: &SubsystemDims, part: &Bipartition) -> Result<Self> {
        if part.parties() != dims.len() {
            return Err(Error::shape(format!(
                "bipartition over {} parties applied to {} subsystems",
                part.parties(),
                dims.len()
            )));
        }
        let d = dims.total();
        let strides = dims.strides();
        let mut swapped = vec![0; d];
        let mut rest = vec![0; d];
        for flat in 0..d {
            let mut s = 0;
            for (k, (&n, &stride)) in dims.dims().iter().zip(&strides).enumerate() {
                if part.contains(k + 1) {
                    s += (flat / stride) % n * stride;
                }
            }
            swapped[flat] = s;
            rest[flat] = flat - s;
        }
        Ok(Self { swapped, rest })
    }

    pub fn side(&self) -> usize {
        self.swapped.len()
    }

    /// Source position `(row, col)` of output entry `(i, j)`.
    #[inline]
    pub fn source(&self, i: usize, j: usize) -> (usize, usize) {
        (
            self.swapped[j] + self.rest[i],
            self.swapped[i] + self.rest[j],
        )
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        let d = self.side();
        debug_assert_eq!(m.nrows(), d);
        Matrix::from_fn(d, d, |i, j| {
            let (r, c) = self.source(i, j);
            m[(r, c)]
        })
    }

    /// `out += scale * M^Γ`.
    pub fn apply_add(&self, m: &Matrix, scale: f64, out: &mut Matrix) {
        let d = self.side();
        for j in 0..d {
            for i in 0..d {
                let (r, c) = self.source(i, j);
                out[(i, j)] += scale * m[(r, c)];
            }
        }
    }
}

/// Partial transpose `M^{Γ_S}` over the subsystems on `part`'s left side.
pub fn partial_transpose(m: &DensityMatrix, part: &Bipartition) -> Result<DensityMatrix> {
    let map = TransposeMap::new(m.dims(), part)?;
    Ok(DensityMatrix {
        data: map.apply(m.matrix()),
        dims: m.dims().clone(),
    })
}

/// Partial transpose of a bare matrix.
pub fn partial_transpose_matrix(
    m: &Matrix,
    dims: &SubsystemDims,
    part: &Bipartition,
) -> Result<Matrix> {
    dims.check_side(m.nrows())?;
    if !m.is_square() {
        return Err(Error::shape("partial transpose needs a square matrix"));
    }
    Ok(TransposeMap::new(dims, part)?.apply(m))
}

/// Pure-state families used as test inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateKind {
    /// Three-qubit W state `|001> + |010> + |100>`.
    W3,
    /// Three-qubit GHZ state `|000> + |111>`.
    Ghz3,
    /// Five-qutrit GHZ state: first plus last level on every site.
    Ghz5,
    /// Five-qutrit weighted multi-GHZ state `m|00000> + n|11111> + s|22222>`.
    MultiGhz5 { m: f64, n: f64, s: f64 },
    /// GHZ on arbitrary dims: `|0…0> + |(n1-1)…(nN-1)>`.
    Ghz,
    /// Any (unnormalized) real amplitude vector.
    Pure(Vec<f64>),
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::W3 => "w3",
            StateKind::Ghz3 => "ghz3",
            StateKind::Ghz5 => "ghz5",
            StateKind::MultiGhz5 { .. } => "mghz5",
            StateKind::Ghz => "ghz",
            StateKind::Pure(_) => "custom",
        }
    }

    /// The dims a fixed-size family requires, if any.
    pub fn required_dims(&self) -> Option<SubsystemDims> {
        match self {
            StateKind::W3 | StateKind::Ghz3 => Some(SubsystemDims::qubits(3).unwrap()),
            StateKind::Ghz5 | StateKind::MultiGhz5 { .. } => {
                Some(SubsystemDims::uniform(3, 5).unwrap())
            }
            StateKind::Ghz | StateKind::Pure(_) => None,
        }
    }

    /// Unnormalized amplitude vector on `dims`.
    pub fn amplitudes(&self, dims: &SubsystemDims) -> Result<DVector<f64>> {
        if let Some(req) = self.required_dims() {
            if &req != dims {
                return Err(Error::shape(format!(
                    "state kind {} needs dims {req}, got {dims}",
                    self.name()
                )));
            }
        }
        let d = dims.total();
        let n = dims.len();
        let mut v = DVector::zeros(d);
        match self {
            StateKind::W3 => {
                for k in 0..3 {
                    let mut digits = [0usize; 3];
                    digits[k] = 1;
                    v[dims.flat_index(&digits)] += 1.0;
                }
            }
            StateKind::Ghz3 | StateKind::Ghz5 | StateKind::Ghz => {
                let last: Vec<usize> = dims.dims().iter().map(|&k| k - 1).collect();
                v[0] += 1.0;
                v[dims.flat_index(&last)] += 1.0;
            }
            StateKind::MultiGhz5 { m, n: nn, s } => {
                for (level, w) in [*m, *nn, *s].into_iter().enumerate() {
                    v[dims.flat_index(&vec![level; n])] += w;
                }
            }
            StateKind::Pure(amps) => {
                if amps.len() != d {
                    return Err(Error::shape(format!(
                        "custom amplitude vector has length {}, expected {d}",
                        amps.len()
                    )));
                }
                v.copy_from_slice(amps);
            }
        }
        Ok(v)
    }
}

/// `ρ = (v vᵀ + l·I) / tr(v vᵀ + l·I)` for the chosen family.
pub fn make_state(kind: &StateKind, dims: &SubsystemDims, noise: f64) -> Result<DensityMatrix> {
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::Domain(format!(
            "noise level must be a finite nonnegative number, got {noise}"
        )));
    }
    let v = kind.amplitudes(dims)?;
    let d = dims.total();
    let mut omega = &v * v.transpose();
    for i in 0..d {
        omega[(i, i)] += noise;
    }
    let tr = omega.trace();
    if !(tr > 0.0) {
        return Err(Error::Domain("state has zero trace before normalization".into()));
    }
    omega /= tr;
    DensityMatrix::new(symmetrize(&omega), dims.clone())
}

/// Diagnostics returned by [`check_density`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub symmetric: bool,
    pub asymmetry: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

impl DensityReport {
    /// Symmetric, unit trace within `1e-12`, and PSD.
    pub fn is_valid_state(&self) -> bool {
        self.symmetric && (self.trace - 1.0).abs() <= 1e-12 && self.psd
    }
}

/// Symmetry, trace and spectrum report. Never fails.
pub fn check_density(m: &Matrix, tol: f64) -> DensityReport {
    let asym = asymmetry(m);
    let symmetric = m.is_square() && asym <= SYMMETRY_TOL * m.norm().max(1.0);
    let min_eigenvalue = if m.is_square() && m.nrows() > 0 {
        SymmetricEigen::new(symmetrize(m))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::NAN
    };
    DensityReport {
        symmetric,
        asymmetry: asym,
        trace: if m.is_square() { m.trace() } else { f64::NAN },
        min_eigenvalue,
        psd: min_eigenvalue >= -tol,
    }
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Frobenius norm of `M - Mᵀ`.
pub fn asymmetry(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let d = m.nrows();
    let mut acc = 0.0;
    for j in 0..d {
        for i in 0..j {
            let diff = m[(i, j)] - m[(j, i)];
            acc += 2.0 * diff * diff;
        }
    }
    acc.sqrt()
}
