//! Dense complex linear algebra and entropy primitives for small systems.
//!
//! Everything here works on dimensions of at most a few dozen, so storage is
//! dense and every constructor validates its invariants eagerly.
//!
//! Composite indices follow the path-first convention: for factor dimensions
//! `[d_0, d_1, ...]` the flat index is row-major, so a path/detector pair
//! `(j, a)` lives at `j * d_detector + a`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Norm and trace tolerance.
pub const TAU_NORM: f64 = 1e-9;
/// Hermiticity tolerance (max entrywise deviation from the adjoint).
pub const TAU_HERM: f64 = 1e-9;
/// Eigenvalues in `[-TAU_PSD, 0)` are treated as zero.
pub const TAU_PSD: f64 = 1e-9;
/// Eigen-decomposition, orthonormality and completeness tolerance.
pub const TAU_EIG: f64 = 1e-8;
/// Default cap on the total dimension of any composite object.
pub const DEFAULT_MAX_DIM: usize = 64;

const EIG_MAX_SWEEPS: usize = 10_000;

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.0)
    }
}

impl ComplexMatrix {
    pub fn from_nalgebra(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Shape(
                "matrix must have at least one row and column".into(),
            ));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_nalgebra(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.0.shape() != other.0.shape() {
            return Err(Error::Dimension(
                "cannot add matrices of different shape".into(),
            ));
        }
        Ok(Self(&self.0 + &other.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * re(0.5))
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        unitary.matmul(self)?.matmul(&unitary.adjoint())
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        Ok((&self.0 * DVector::from_column_slice(v))
            .iter()
            .copied()
            .collect())
    }

    /// `|a⟩⟨b|` for raw amplitude vectors.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self(DMatrix::from_fn(a.len(), b.len(), |i, j| {
            a[i] * b[j].conj()
        }))
    }

    /// Kronecker product, refusing results larger than `max_dim` on either axis.
    pub fn kron_capped(&self, other: &Self, max_dim: usize) -> Result<Self> {
        let rows = self.rows().saturating_mul(other.rows());
        let cols = self.cols().saturating_mul(other.cols());
        if rows > max_dim || cols > max_dim {
            return Err(Error::Dimension(format!(
                "tensor product would be {rows}x{cols}, above the cap of {max_dim}"
            )));
        }
        Ok(Self(self.0.kronecker(&other.0)))
    }
}

/// Normalized pure state on a (possibly composite) space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates factor dimensions, finiteness and unit norm.
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::State("non-finite amplitude".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > TAU_NORM {
            return Err(Error::State(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::State(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(dims, amplitudes.into_iter().map(|z| z / n).collect())
    }

    /// Single-factor state from raw amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        Self::new(vec![amplitudes.len()], amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&x| re(x)).collect())
    }

    /// Computational basis vector `|index⟩` of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Arg(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = re(1.0);
        Self::new(vec![dim], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }

    /// Applies a unitary; the factor structure is kept.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<Self> {
        Self::new(self.dims.clone(), unitary.apply(&self.amplitudes)?)
    }

    /// `⟨ψ|op|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        let applied = op.apply(&self.amplitudes)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor_capped(&self, other: &Self, max_dim: usize) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        if dim > max_dim {
            return Err(Error::Dimension(format!(
                "tensor product would have dimension {dim}, above the cap of {max_dim}"
            )));
        }
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        Self::new(dims, amps)
    }
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!(
            "factor dimensions must be positive, got {dims:?}"
        )));
    }
    let product = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if product != Some(len) {
        return Err(Error::Dimension(format!(
            "factor dimensions {dims:?} do not multiply to {len}"
        )));
    }
    Ok(())
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two states or two matrices.
pub trait Tensor: Sized {
    fn tensor_with_cap(&self, other: &Self, max_dim: usize) -> Result<Self>;

    fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_with_cap(other, DEFAULT_MAX_DIM)
    }
}

impl Tensor for PureState {
    fn tensor_with_cap(&self, other: &Self, max_dim: usize) -> Result<Self> {
        self.tensor_capped(other, max_dim)
    }
}

impl Tensor for ComplexMatrix {
    fn tensor_with_cap(&self, other: &Self, max_dim: usize) -> Result<Self> {
        self.kron_capped(other, max_dim)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::State(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > TAU_HERM {
            return Err(Error::State(format!(
                "matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TAU_NORM || tr.im.abs() > TAU_NORM {
            return Err(Error::State(format!("trace is {tr}, expected 1")));
        }
        let rho = Self { matrix };
        rho.spectrum()?;
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(re(1.0 / dim as f64)),
        }
    }

    /// `Σ w_i ρ_i`; weights must form a distribution and dimensions agree.
    pub fn mixture(weights: &ProbDist, states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Dimension(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, s) in weights.probs().iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::Dimension(
                    "mixture of states with different dimensions".into(),
                ));
            }
            acc = acc.add(&s.matrix.scale(re(*w)))?;
        }
        Ok(Self { matrix: acc })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigenvalues in descending order with `[-TAU_PSD, 0)` clamped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let eig = eig_hermitian(&self.matrix)?;
        eig.values
            .into_iter()
            .map(|l| {
                if l < -TAU_PSD {
                    Err(Error::State(format!("negative eigenvalue {l:e}")))
                } else {
                    Ok(l.max(0.0))
                }
            })
            .collect()
    }

    /// `Tr(ρ op)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        Ok(self.matrix.matmul(op)?.trace())
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.conjugate_by(unitary)?.hermitian_part(),
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }
}

/// Reduced state on factor `keep` of a state with factor dimensions `dims`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: usize) -> Result<DensityMatrix> {
    check_dims(dims, rho.dim())?;
    if keep >= dims.len() {
        return Err(Error::Dimension(format!(
            "factor {keep} requested from {} factors",
            dims.len()
        )));
    }
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    let kept = dims[keep];
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(kept, kept, |a, b| {
        let mut acc = C64::default();
        for l in 0..left {
            for r in 0..right {
                acc += m.get((l * kept + a) * right + r, (l * kept + b) * right + r);
            }
        }
        acc
    })?;
    DensityMatrix::new(out.hermitian_part())
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.vectors.as_nalgebra();
        let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| re(l)),
        ));
        ComplexMatrix(v * lambda * v.adjoint())
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors
            .as_nalgebra()
            .column(i)
            .iter()
            .copied()
            .collect()
    }
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigen-decomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > TAU_HERM {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let n = m.rows();
    let eig = SymmetricEigen::try_new(m.hermitian_part().0, f64::EPSILON, EIG_MAX_SWEEPS)
        .ok_or(Error::Convergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix(vectors),
    })
}

fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    // -0.0 from a lone p = 1 term
    h.max(0.0)
}

/// `S(ρ) = -Σ λ log₂ λ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(rho.spectrum()?))
}

/// `H(p) = -Σ p log₂ p`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    entropy_bits(p.probs().iter().copied())
}

/// Finite probability distribution, optionally with outcome names.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl ProbDist {
    /// Entries in `[-TAU_NORM, 0)` are clamped to zero (round-off from Born
    /// probabilities); anything more negative is rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Dist("empty distribution".into()));
        }
        let mut clean = Vec::with_capacity(probs.len());
        for p in probs {
            if !p.is_finite() || p < -TAU_NORM {
                return Err(Error::Dist(format!("invalid probability {p}")));
            }
            clean.push(p.max(0.0));
        }
        let total: f64 = clean.iter().sum();
        if (total - 1.0).abs() > TAU_NORM {
            return Err(Error::Dist(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            probs: clean,
            labels: None,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dist(
                "uniform distribution over zero outcomes".into(),
            ));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
            labels: None,
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::Dist(format!(
                "point mass at {at} outside {n} outcomes"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self {
            probs,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::Dist(format!(
                "{} labels for {} outcomes",
                labels.len(),
                self.probs.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![2, 2], vec![re(h), re(0.0), re(0.0), re(h)]).unwrap()
    }

    #[test]
    fn basis_tensor_bookkeeping() {
        let s = PureState::basis(2, 0)
            .unwrap()
            .tensor(&PureState::basis(2, 1).unwrap())
            .unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.amplitudes()[1], re(1.0));
        assert_eq!(s.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn identity_tensor_identity() {
        let i6 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(i6, ComplexMatrix::identity(6));
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let a = ComplexMatrix::identity(8);
        let b = ComplexMatrix::identity(9);
        assert!(matches!(a.tensor(&b), Err(Error::Dimension(_))));
        assert!(a.tensor_with_cap(&b, 72).is_ok());
        let s = PureState::basis(16, 0).unwrap();
        assert!(matches!(
            s.tensor(&PureState::basis(5, 0).unwrap()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn state_rejects_bad_norm_and_dims() {
        assert!(matches!(
            PureState::from_real(&[1.0, 1.0]),
            Err(Error::State(_))
        ));
        assert!(matches!(
            PureState::new(vec![2, 2], vec![re(1.0); 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            PureState::new(vec![0], vec![]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let rho = bell().density();
        for keep in 0..2 {
            let r = partial_trace(&rho, &[2, 2], keep).unwrap();
            assert!(
                r.matrix()
                    .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                    < 1e-15
            );
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = PureState::normalized(vec![2], vec![c(1.0, 0.5), c(-0.3, 2.0)]).unwrap();
        let b = PureState::normalized(vec![3], vec![re(1.0), c(0.0, 1.0), re(0.25)]).unwrap();
        let rho_a = a.density();
        let rho = DensityMatrix::new(rho_a.matrix().tensor(b.density().matrix()).unwrap()).unwrap();
        let back = partial_trace(&rho, &[2, 3], 0).unwrap();
        assert!(back.matrix().max_abs_diff(rho_a.matrix()) < 1e-14);
        let back_b = partial_trace(&rho, &[2, 3], 1).unwrap();
        assert!(back_b.matrix().max_abs_diff(b.density().matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_mismatched_dims() {
        let rho = bell().density();
        assert!(matches!(
            partial_trace(&rho, &[3, 2], 0),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &[2, 2], 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn eig_of_identity() {
        let e = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        for l in e.values {
            assert!((l - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m =
            ComplexMatrix::from_rows(&[vec![re(1.0), re(2.0)], vec![re(0.0), re(1.0)]]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::Shape(_))));
        assert!(matches!(
            eig_hermitian(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let not_psd = ComplexMatrix::from_diagonal(&[re(1.5), re(-0.5)]);
        assert!(matches!(DensityMatrix::new(not_psd), Err(Error::State(_))));
        let bad_trace = ComplexMatrix::from_diagonal(&[re(0.5), re(0.4)]);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::State(_))
        ));
        let tiny_negative = ComplexMatrix::from_diagonal(&[re(1.0 + 1e-10), re(-1e-10)]);
        let rho = DensityMatrix::new(tiny_negative).unwrap();
        assert_eq!(rho.spectrum().unwrap()[1], 0.0);
    }

    #[test]
    fn entropies_of_simple_cases() {
        assert_eq!(von_neumann_entropy(&bell().density()).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-14);
        assert!((shannon_entropy(&ProbDist::uniform(4).unwrap()) - 2.0).abs() < 1e-15);
        assert!((shannon_entropy(&ProbDist::uniform(3).unwrap()) - 3f64.log2()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&ProbDist::point_mass(5, 2).unwrap()), 0.0);
    }

    #[test]
    fn prob_dist_validation() {
        assert!(ProbDist::new(vec![0.5, 0.6]).is_err());
        assert!(ProbDist::new(vec![1.1, -0.1]).is_err());
        assert!(ProbDist::new(vec![]).is_err());
        let p = ProbDist::new(vec![1.0 + 1e-12, -1e-12]).unwrap();
        assert_eq!(p.get(1), 0.0);
        assert!(p.clone().with_labels(vec!["a".into()]).is_err());
    }

    fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    fn random_hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        complex_vec(n * n).prop_map(move |v| {
            ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j])
                .unwrap()
                .hermitian_part()
        })
    }

    fn bipartite() -> impl Strategy<Value = PureState> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(a, b)| {
            complex_vec(a * b).prop_filter_map("zero vector", move |v| {
                PureState::normalized(vec![a, b], v).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs(m in (1usize..=8).prop_flat_map(random_hermitian)) {
            let e = eig_hermitian(&m).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&m) <= TAU_EIG);
            let v = &e.vectors;
            let gram = v.adjoint().matmul(v).unwrap();
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(m.rows())) <= TAU_EIG);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn reduced_entropies_of_pure_states_agree(psi in bipartite()) {
            let rho = psi.density();
            let a = partial_trace(&rho, psi.dims(), 0).unwrap();
            let b = partial_trace(&rho, psi.dims(), 1).unwrap();
            let (sa, sb) = (von_neumann_entropy(&a).unwrap(), von_neumann_entropy(&b).unwrap());
            prop_assert!((sa - sb).abs() <= 10.0 * TAU_EIG);
            prop_assert!(sa >= 0.0 && sa <= (a.dim() as f64).log2() + TAU_EIG);
            prop_assert!((a.matrix().trace().re - 1.0).abs() <= TAU_NORM);
        }

        #[test]
        fn shannon_bounded_by_support(w in prop::collection::vec(0.0f64..1.0, 1..10)) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-6);
            let p = ProbDist::new(w.iter().map(|x| x / total).collect()).unwrap();
            let h = shannon_entropy(&p);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (p.support_size() as f64).log2() + 1e-12);
        }
    }
}
