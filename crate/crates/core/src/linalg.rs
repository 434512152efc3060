//! Dense real symmetric linear algebra.
//!
//! Everything downstream works with [`SymmetricMatrix`] values whose spectra are
//! reported in descending order (`λ₁ ≥ λ₂ ≥ … ≥ λₙ`). Matrix functions are
//! evaluated through the spectral calculus `f(A) = Q·diag(f(λᵢ))·Qᵀ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::ScalarFunctionModel;

pub type Matrix = DMatrix<f64>;

/// Relative asymmetry accepted (and symmetrized away) on construction.
pub const ASYMMETRY_TOL: f64 = 1e-8;
/// Negative eigenvalues down to `-PSD_CLAMP_TOL·max(1, ‖m‖₂)` are treated as zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// Frobenius residual allowed in `QᵀQ − I`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Dense real symmetric `n×n` matrix. Entries are exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    /// Validates and symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Empty);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let asymmetry = (&m - m.transpose()).norm();
        let tolerance = ASYMMETRY_TOL * m.norm().max(1.0);
        if asymmetry > tolerance {
            return Err(Error::Asymmetric {
                asymmetry,
                tolerance,
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Builds from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Symmetrizes without the asymmetry check. Used for products that are
    /// symmetric in exact arithmetic, e.g. `QᵀKQ`.
    pub(crate) fn symmetrize(m: Matrix) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n, n))
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Self(Matrix::identity(n, n) * c)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self(Matrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Spectral norm `max |λᵢ|`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let range = spectral_range(self)?;
        Ok(range.lo.abs().max(range.hi.abs()))
    }

    /// `self + c·I`.
    pub fn shift(&self, c: f64) -> Self {
        let n = self.dim();
        Self(&self.0 + Matrix::identity(n, n) * c)
    }

    /// `qᵀ·self·q`.
    pub fn congruence(&self, q: &Matrix) -> Self {
        Self::symmetrize(q.transpose() * &self.0 * q)
    }

    /// `q·self·qᵀ`.
    pub fn congruence_t(&self, q: &Matrix) -> Self {
        Self::symmetrize(q * &self.0 * q.transpose())
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &SymmetricMatrix) -> Self {
        let (n, k) = (self.dim(), other.dim());
        let mut m = Matrix::zeros(n + k, n + k);
        m.view_mut((0, 0), (n, n)).copy_from(&self.0);
        m.view_mut((n, n), (k, k)).copy_from(&other.0);
        Self(m)
    }

    /// Principal block of size `len` starting at `start`.
    pub fn principal_block(&self, start: usize, len: usize) -> Self {
        Self(self.0.view((start, start), (len, len)).into_owned())
    }

    pub fn ensure_same_dim(&self, other: &SymmetricMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// `⟨self·x, x⟩`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.0 * x))
    }
}

impl fmt::Display for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn mul(self, rhs: f64) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 * rhs)
    }
}

impl Neg for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn neg(self) -> SymmetricMatrix {
        SymmetricMatrix(-&self.0)
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymmetricMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Row-major copy of a general matrix, for serialization.
pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// General square matrix from row vectors.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
    }
    let m = Matrix::from_fn(n, n, |i, j| rows[i][j]);
    if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| !m[(i, j)].is_finite())
    {
        return Err(Error::NonFinite { row: i, col: j });
    }
    Ok(m)
}

/// Descending eigenvalues with a matching orthonormal eigenvector frame.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub frame: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `frame·diag(values)·frameᵀ`.
    pub fn recompose(&self, values: &[f64]) -> SymmetricMatrix {
        let d = Matrix::from_diagonal(&DVector::from_column_slice(values));
        SymmetricMatrix::symmetrize(&self.frame * d * self.frame.transpose())
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.recompose(&self.eigenvalues)
    }

    pub fn range(&self) -> SpectralRange {
        SpectralRange {
            lo: self.eigenvalues[self.dim() - 1],
            hi: self.eigenvalues[0],
        }
    }
}

/// Smallest and largest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRange {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralRange {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Real orthogonal matrix (`‖QᵀQ − I‖_F ≤ 1e-10`).
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMatrix(Matrix);

impl OrthogonalMatrix {
    pub fn new(q: Matrix) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::NotSquare {
                rows: q.nrows(),
                cols: q.ncols(),
            });
        }
        let residual = orthogonality_residual(&q);
        if residual > ORTHOGONALITY_TOL {
            return Err(Error::Computation {
                dim: q.nrows(),
                echo: format!("orthogonality residual {residual:e}"),
            });
        }
        Ok(Self(q))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Product of two orthogonal matrices.
    pub fn compose(&self, other: &OrthogonalMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }

    /// `selfᵀ·m·self`.
    pub fn conjugate(&self, m: &SymmetricMatrix) -> SymmetricMatrix {
        m.congruence(&self.0)
    }
}

impl Serialize for OrthogonalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthogonalMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let m = matrix_from_rows(&rows).map_err(serde::de::Error::custom)?;
        OrthogonalMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

pub fn orthogonality_residual(q: &Matrix) -> f64 {
    let n = q.ncols();
    (q.transpose() * q - Matrix::identity(n, n)).norm()
}

/// Absolute and relative slack for order comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl ComparisonTolerance {
    pub const fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    /// Purely relative tolerance `rtol·scale`.
    pub const fn relative(rtol: f64) -> Self {
        Self { atol: 0.0, rtol }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

impl Default for ComparisonTolerance {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
        }
    }
}

/// Outcome of an order comparison. `margin` is signed: negative means the
/// claimed order is violated by that amount.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub pass: bool,
    pub margin: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing_index: Option<usize>,
}

pub fn eigh(m: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let eig = SymmetricEigen::try_new(m.0.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Computation {
            dim: n,
            echo: m.to_string(),
        }
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut frame = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        frame.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition { eigenvalues, frame })
}

/// Descending eigenvalues only.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    Ok(eigh(m)?.eigenvalues)
}

/// Applies `t ↦ f(t)` through the spectral calculus, no domain checks.
pub fn map_spectrum(m: &SymmetricMatrix, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
    let dec = eigh(m)?;
    let values: Vec<f64> = dec.eigenvalues.iter().map(|&t| f(t)).collect();
    Ok(dec.recompose(&values))
}

fn clamp_floor(dec: &SpectralDecomposition) -> f64 {
    let norm = dec
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &t| acc.max(t.abs()));
    -PSD_CLAMP_TOL * norm.max(1.0)
}

/// `f(m)` for a registry function. Eigenvalues slightly below the domain
/// bound (within the PSD clamp) are clamped onto it.
pub fn apply_scalar_function(
    f: &ScalarFunctionModel,
    m: &SymmetricMatrix,
) -> Result<SymmetricMatrix> {
    let dec = eigh(m)?;
    let lo = f.domain_lo();
    let floor = lo + clamp_floor(&dec);
    let mut values = Vec::with_capacity(dec.dim());
    for &t in &dec.eigenvalues {
        if t < floor {
            return Err(Error::Domain {
                function: f.specifier(),
                eigenvalue: t,
                domain_lo: lo,
            });
        }
        values.push(f.value(t.max(lo)));
    }
    Ok(dec.recompose(&values))
}

/// `|m| = (m²)^{1/2}`.
pub fn matrix_abs(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    map_spectrum(m, f64::abs)
}

pub fn spectral_range(m: &SymmetricMatrix) -> Result<SpectralRange> {
    Ok(eigh(m)?.range())
}

/// PSD square root; negative eigenvalues within the clamp are zeroed.
pub fn sqrt_psd(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let dec = eigh(m)?;
    let floor = clamp_floor(&dec);
    let lowest = dec.eigenvalues[dec.dim() - 1];
    if lowest < floor {
        return Err(Error::NotPsd {
            what: "matrix".into(),
            min_eigenvalue: lowest,
            tolerance: -floor,
        });
    }
    let values: Vec<f64> = dec.eigenvalues.iter().map(|&t| t.max(0.0).sqrt()).collect();
    Ok(dec.recompose(&values))
}

/// Fails unless `m` is PSD up to the clamp tolerance.
pub fn ensure_psd(m: &SymmetricMatrix, what: &str) -> Result<()> {
    let dec = eigh(m)?;
    let floor = clamp_floor(&dec);
    let lowest = dec.eigenvalues[dec.dim() - 1];
    if lowest < floor {
        return Err(Error::NotPsd {
            what: what.into(),
            min_eigenvalue: lowest,
            tolerance: -floor,
        });
    }
    Ok(())
}

/// Fails unless every eigenvalue of `m` is strictly positive.
pub fn ensure_positive_definite(m: &SymmetricMatrix, what: &str) -> Result<()> {
    let lowest = spectral_range(m)?.lo;
    if lowest <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            what: what.into(),
            min_eigenvalue: lowest,
        });
    }
    Ok(())
}

/// Entrywise `lhs[j] ≤ rhs[j] + threshold` for descending vectors.
pub fn vector_order_leq(
    lhs: &[f64],
    rhs: &[f64],
    tol: ComparisonTolerance,
    scale: f64,
) -> Result<OrderVerdict> {
    if lhs.len() != rhs.len() {
        return Err(Error::DimensionMismatch {
            left: lhs.len(),
            right: rhs.len(),
        });
    }
    let threshold = tol.threshold(scale);
    let mut margin = f64::INFINITY;
    let mut failing_index = None;
    for (j, (l, r)) in lhs.iter().zip(rhs).enumerate() {
        let d = r - l;
        margin = margin.min(d);
        if failing_index.is_none() && d < -threshold {
            failing_index = Some(j);
        }
    }
    Ok(OrderVerdict {
        pass: failing_index.is_none(),
        margin,
        threshold,
        failing_index,
    })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, &t| acc.max(t.abs()))
}

/// Löwner order `h ≤ k`: margin is `λ_min(k − h)`, passing when it is at
/// least `−(atol + rtol·‖k − h‖₂)`.
pub fn loewner_leq(
    h: &SymmetricMatrix,
    k: &SymmetricMatrix,
    tol: ComparisonTolerance,
) -> Result<OrderVerdict> {
    h.ensure_same_dim(k)?;
    let diff = eigenvalues(&(k - h))?;
    let margin = diff[diff.len() - 1];
    let threshold = tol.threshold(max_abs(&diff));
    Ok(OrderVerdict {
        pass: margin >= -threshold,
        margin,
        threshold,
        failing_index: None,
    })
}

/// Eigenvalue order `λ↓(h) ≤ λ↓(k)` entrywise. The relative part of the
/// tolerance scales with `max(‖h‖₂, ‖k‖₂)`.
pub fn eig_order_leq(
    h: &SymmetricMatrix,
    k: &SymmetricMatrix,
    tol: ComparisonTolerance,
) -> Result<OrderVerdict> {
    h.ensure_same_dim(k)?;
    let lh = eigenvalues(h)?;
    let lk = eigenvalues(k)?;
    let scale = max_abs(&lh).max(max_abs(&lk));
    vector_order_leq(&lh, &lk, tol, scale)
}

/// `frame(k)·frame(h)ᵀ`, the rotation carrying the eigenbasis of `h` onto
/// the eigenbasis of `k` in matching order. No precondition is checked.
pub fn aligning_orthogonal(h: &SymmetricMatrix, k: &SymmetricMatrix) -> Result<OrthogonalMatrix> {
    h.ensure_same_dim(k)?;
    let fh = eigh(h)?.frame;
    let fk = eigh(k)?.frame;
    Ok(OrthogonalMatrix(fk * fh.transpose()))
}

/// Orthogonal `Q` with `h ≤ Qᵀ·k·Q`, which exists exactly when
/// `λ↓(h) ≤ λ↓(k)`.
pub fn conjugating_orthogonal(
    h: &SymmetricMatrix,
    k: &SymmetricMatrix,
    tol: ComparisonTolerance,
) -> Result<OrthogonalMatrix> {
    let verdict = eig_order_leq(h, k, tol)?;
    if let Some(index) = verdict.failing_index {
        let lh = eigenvalues(h)?;
        let lk = eigenvalues(k)?;
        return Err(Error::Order {
            index,
            lhs: lh[index],
            rhs: lk[index],
        });
    }
    aligning_orthogonal(h, k)
}

/// `W = U·Vᵀ` from the SVD `z = UΣVᵀ`, so that `z·zᵀ = W·(zᵀ·z)·Wᵀ`.
pub fn congruence_orthogonal(z: &Matrix) -> Result<OrthogonalMatrix> {
    if z.nrows() != z.ncols() {
        return Err(Error::NotSquare {
            rows: z.nrows(),
            cols: z.ncols(),
        });
    }
    if z.nrows() == 0 {
        return Err(Error::Empty);
    }
    let svd = z.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Computation {
                dim: z.nrows(),
                echo: format!("{:?}", matrix_rows(z)),
            })
        }
    };
    Ok(OrthogonalMatrix(u * v_t))
}

/// `‖z·zᵀ − W·(zᵀ·z)·Wᵀ‖_F`.
pub fn congruence_residual(z: &Matrix, w: &OrthogonalMatrix) -> f64 {
    let zzt = z * z.transpose();
    let ztz = z.transpose() * z;
    (zzt - w.as_matrix() * ztz * w.as_matrix().transpose()).norm()
}

/// Singular values of a general matrix, descending.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `(m·mᵀ)^{1/2}` for a general square matrix.
pub fn left_abs(m: &Matrix) -> Result<SymmetricMatrix> {
    sqrt_psd(&SymmetricMatrix::symmetrize(m * m.transpose()))
}
